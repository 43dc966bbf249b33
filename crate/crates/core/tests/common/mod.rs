//! Reference computations that share no code with the library beyond the
//! model accessors. Everything here is deliberately naive.
#![allow(dead_code)]

use mixv::ising::{IsingError, Spin};
use mixv::models::{IsingModel, Mixture, Rational};
use num_traits::{One, Zero};
use proptest::prelude::*;

// ---------- rationals and rank ----------

/// Determinant by the Leibniz permutation expansion.
pub fn leibniz_det(m: &[Vec<Rational>]) -> Rational {
    let n = m.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut total = Rational::zero();
    permute(&mut perm, 0, m, &mut total);
    total
}

fn permute(perm: &mut Vec<usize>, at: usize, m: &[Vec<Rational>], total: &mut Rational) {
    let n = perm.len();
    if at == n {
        let mut inversions = 0;
        for i in 0..n {
            for j in i + 1..n {
                if perm[i] > perm[j] {
                    inversions += 1;
                }
            }
        }
        let mut prod = Rational::one();
        for (row, &col) in perm.iter().enumerate() {
            prod *= &m[row][col];
        }
        if inversions % 2 == 0 {
            *total += prod;
        } else {
            *total -= prod;
        }
        return;
    }
    for i in at..n {
        perm.swap(at, i);
        permute(perm, at + 1, m, total);
        perm.swap(at, i);
    }
}

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for last in r - 1..n {
        for mut s in subsets(last, r - 1) {
            s.push(last);
            out.push(s);
        }
    }
    out
}

/// Rank as the size of the largest nonvanishing square minor.
pub fn minor_rank(rows: &[Vec<Rational>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    for r in (1..=rows.len().min(cols)).rev() {
        for rs in subsets(rows.len(), r) {
            for cs in subsets(cols, r) {
                let minor: Vec<Vec<Rational>> = rs
                    .iter()
                    .map(|&i| cs.iter().map(|&j| rows[i][j].clone()).collect())
                    .collect();
                if !leibniz_det(&minor).is_zero() {
                    return r;
                }
            }
        }
    }
    0
}

pub fn small_rational() -> impl Strategy<Value = Rational> {
    (-4i64..=4, 1i64..=3).prop_map(|(p, q)| Rational::new(p.into(), q.into()))
}

// ---------- mixtures ----------

/// `Σ_i w_i Π_c P_i[c][x_c]` over the full point `x`.
pub fn naive_point_prob(m: &Mixture, x: &[usize]) -> Rational {
    let mut total = Rational::zero();
    for (w, comp) in m.weights().iter().zip(m.components()) {
        let mut prod = w.clone();
        for (c, &sym) in x.iter().enumerate() {
            prod *= &comp.rows()[c][sym];
        }
        total += prod;
    }
    total
}

/// All points of `Σ^n` by counting in base `|Σ|`.
pub fn all_points(sigma: usize, n: usize) -> Vec<Vec<usize>> {
    let total = sigma.pow(n as u32);
    (0..total)
        .map(|mut idx| {
            let mut x = vec![0; n];
            for c in (0..n).rev() {
                x[c] = idx % sigma;
                idx /= sigma;
            }
            x
        })
        .collect()
}

pub fn naive_equal(p: &Mixture, q: &Mixture) -> bool {
    all_points(p.alphabet().len(), p.n())
        .iter()
        .all(|x| naive_point_prob(p, x) == naive_point_prob(q, x))
}

/// Prefix probability by summing full points that extend `prefix`.
pub fn naive_prefix_prob(m: &Mixture, prefix: &[usize]) -> Rational {
    all_points(m.alphabet().len(), m.n())
        .iter()
        .filter(|x| x.starts_with(prefix))
        .map(|x| naive_point_prob(m, x))
        .sum()
}

// ---------- Ising ----------

pub fn spins(bits: usize, n: usize) -> Vec<f64> {
    (0..n).map(|i| if bits >> i & 1 == 1 { 1.0 } else { -1.0 }).collect()
}

/// Double loop over all ordered pairs `i < j`.
pub fn naive_energy(m: &IsingModel, x: &[f64]) -> f64 {
    let n = m.n();
    let mut e = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            e += m.pair_weight(i, j) * x[i] * x[j];
        }
        e += m.field(i) * x[i];
    }
    e
}

/// Unnormalized weights `exp(E(x))` indexed by bitmask, no log-space tricks.
pub fn direct_weights(m: &IsingModel) -> Vec<f64> {
    (0..1usize << m.n()).map(|b| naive_energy(m, &spins(b, m.n())).exp()).collect()
}

pub fn direct_partition(m: &IsingModel) -> f64 {
    direct_weights(m).iter().sum()
}

pub fn direct_marginal(m: &IsingModel, k: usize, s: Spin) -> f64 {
    let w = direct_weights(m);
    let want = s == Spin::Up;
    let hit: f64 = w.iter().enumerate().filter(|(b, _)| (b >> k & 1 == 1) == want).map(|(_, v)| v).sum();
    hit / w.iter().sum::<f64>()
}

pub fn direct_probs(m: &IsingModel) -> Vec<f64> {
    let w = direct_weights(m);
    let z: f64 = w.iter().sum();
    w.into_iter().map(|v| v / z).collect()
}

/// `max_A |P(A) − Q(A)|` over all `2^(2^n)` events; only for `n ≤ 3`.
pub fn max_event_tv(a: &IsingModel, b: &IsingModel) -> f64 {
    assert!(a.n() <= 3);
    let (p, q) = (direct_probs(a), direct_probs(b));
    let points = p.len();
    let mut best = 0.0f64;
    for event in 0u32..(1 << points) {
        let mut gap = 0.0;
        for x in 0..points {
            if event >> x & 1 == 1 {
                gap += p[x] - q[x];
            }
        }
        best = best.max(gap.abs());
    }
    best
}

pub fn direct_tv(a: &IsingModel, b: &IsingModel) -> f64 {
    let (p, q) = (direct_probs(a), direct_probs(b));
    0.5 * p.iter().zip(&q).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Exact marginals scaled by `factor`.
pub fn scaled_marginal_oracle(
    factor: f64,
) -> impl FnMut(&IsingModel, usize, Spin, f64, f64) -> Result<f64, IsingError> {
    move |m, k, s, _, _| Ok(direct_marginal(m, k, s) * factor)
}

pub fn ising_strategy(max_n: usize, weight: f64, field: f64) -> impl Strategy<Value = IsingModel> {
    (1..=max_n).prop_flat_map(move |n| {
        let pairs = proptest::collection::vec(proptest::option::weighted(0.6, -weight..=weight), n * (n - 1) / 2);
        let fields = proptest::collection::vec(-field..=field, n);
        (pairs, fields).prop_map(move |(ws, fs)| {
            let mut it = ws.into_iter();
            let mut pairs = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if let Some(w) = it.next().flatten() {
                        pairs.push((i, j, w));
                    }
                }
            }
            IsingModel::new(n, pairs, fs).unwrap()
        })
    })
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
