//! Seeded instance generation: random mixtures and Ising models,
//! distribution-preserving rewrites and single-entry perturbations.
//!
//! Every generator is a pure function of its arguments and seed.

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::equivalence::{brute_force_equivalence, EquivalenceError};
use crate::models::{
    enumeration_size, point_mass_mixture, ratio, Alphabet, Assignments, IsingModel, Mixture,
    ModelError, ProductDistribution, Rational,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Equivalence(#[from] EquivalenceError),
    #[error("invalid generator parameter: {0}")]
    Parameter(String),
    #[error("no entry can be shifted by {0} while staying inside [0, 1]")]
    Infeasible(String),
}

/// Generator seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Seed(pub u64);

impl Seed {
    fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

impl From<u64> for Seed {
    fn from(v: u64) -> Self {
        Seed(v)
    }
}

/// `parts` nonnegative rationals with common denominator `d ∈ [2, bound]`
/// summing to exactly 1.
fn random_simplex_point(rng: &mut impl Rng, parts: usize, bound: u64) -> Vec<Rational> {
    let d = rng.random_range(2..=bound);
    let mut cuts: Vec<u64> = (0..parts - 1).map(|_| rng.random_range(0..=d)).collect();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(d)) {
        out.push(ratio((c - prev) as i64, d as i64));
        prev = c;
    }
    out
}

fn random_product(rng: &mut impl Rng, n: usize, sigma: usize, bound: u64) -> ProductDistribution {
    ProductDistribution::new((0..n).map(|_| random_simplex_point(rng, sigma, bound)).collect())
}

/// A valid mixture whose rationals all have denominators at most `denominator_bound`.
pub fn random_mixture(
    n: usize,
    k: usize,
    alphabet: &Alphabet,
    seed: Seed,
    denominator_bound: u64,
) -> Result<Mixture, GenError> {
    if n == 0 || k == 0 {
        return Err(GenError::Parameter("n and k must be at least 1".into()));
    }
    if !(2..=i64::MAX as u64).contains(&denominator_bound) {
        return Err(GenError::Parameter("denominator bound must be at least 2".into()));
    }
    let mut rng = seed.rng();
    let weights = random_simplex_point(&mut rng, k, denominator_bound);
    let components = (0..k)
        .map(|_| random_product(&mut rng, n, alphabet.len(), denominator_bound))
        .collect();
    Ok(Mixture::new(alphabet.clone(), n, weights, components)?)
}

/// Reorders components; `order[i]` is the old index of new component `i`.
pub fn permute_components(m: &Mixture, order: &[usize]) -> Mixture {
    let w = order.iter().map(|&i| m.weights()[i].clone()).collect();
    let c = order.iter().map(|&i| m.components()[i].clone()).collect();
    Mixture::from_parts(m.alphabet().clone(), m.n(), w, c)
}

/// Replaces component `i` by two copies with weights `α w_i` and `(1 − α) w_i`.
/// The copy is inserted right after the original.
pub fn split_component(m: &Mixture, i: usize, alpha: &Rational) -> Result<Mixture, GenError> {
    if i >= m.k() {
        return Err(GenError::Parameter(format!("component {i} out of range")));
    }
    if *alpha < Rational::zero() || *alpha > Rational::one() {
        return Err(GenError::Parameter("split fraction must lie in [0, 1]".into()));
    }
    let (alphabet, n, mut weights, mut components) = m.clone().into_parts();
    let w = weights[i].clone();
    weights[i] = alpha * &w;
    weights.insert(i + 1, (Rational::one() - alpha) * w);
    components.insert(i + 1, components[i].clone());
    Ok(Mixture::from_parts(alphabet, n, weights, components))
}

/// Appends a zero-weight component.
pub fn append_zero_component(m: &Mixture, component: ProductDistribution) -> Mixture {
    let (alphabet, n, mut weights, mut components) = m.clone().into_parts();
    weights.push(Rational::zero());
    components.push(component);
    Mixture::from_parts(alphabet, n, weights, components)
}

/// The point-mass description of `m`'s distribution, one component per point.
pub fn point_mass_reexpression(m: &Mixture) -> Result<Mixture, GenError> {
    enumeration_size(m.alphabet().len(), m.n())?;
    let table = Assignments::new(m.alphabet().len(), m.n())
        .map(|x| m.prefix_prob(&x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(point_mass_mixture(m.alphabet().clone(), m.n(), &table)?)
}

/// Largest `|Σ|^n` at which [`equivalent_rewrite`] may re-express through point masses.
pub const REEXPRESS_LIMIT: u64 = 1 << 10;

/// A different description of the same distribution, built from one to three
/// random rewrites: component permutation, component splitting, appending a
/// zero-weight component, and (for small sample spaces) point-mass re-expression.
pub fn equivalent_rewrite(m: &Mixture, seed: Seed) -> Result<Mixture, GenError> {
    m.check()?;
    let mut rng = seed.rng();
    let small = m.n() > 0
        && crate::limits::checked_pow(m.alphabet().len() as u64, m.n())
            .is_some_and(|s| s <= REEXPRESS_LIMIT);
    let ops = rng.random_range(1..=3);
    let mut out = m.clone();
    for _ in 0..ops {
        let choices = if small { 4 } else { 3 };
        out = match rng.random_range(0..choices) {
            0 => {
                let mut order: Vec<usize> = (0..out.k()).collect();
                order.shuffle(&mut rng);
                permute_components(&out, &order)
            }
            1 => {
                let i = rng.random_range(0..out.k());
                let d = rng.random_range(2..=12i64);
                let alpha = ratio(rng.random_range(1..d), d);
                split_component(&out, i, &alpha)?
            }
            2 => {
                let c = random_product(&mut rng, out.n(), out.alphabet().len(), 8);
                append_zero_component(&out, c)
            }
            _ => point_mass_reexpression(&out)?,
        };
    }
    Ok(out)
}

/// Adds `magnitude` to entry `plus` and subtracts it from entry `minus` of one
/// row of one component.
pub fn perturb_entry(
    m: &Mixture,
    component: usize,
    row: usize,
    plus: usize,
    minus: usize,
    magnitude: &Rational,
) -> Result<Mixture, GenError> {
    let sigma = m.alphabet().len();
    if component >= m.k() || row >= m.n() || plus >= sigma || minus >= sigma || plus == minus {
        return Err(GenError::Parameter("perturbation target out of range".into()));
    }
    let (alphabet, n, weights, mut components) = m.clone().into_parts();
    let r = &mut components[component].rows_mut()[row];
    let up = &r[plus] + magnitude;
    let down = &r[minus] - magnitude;
    let unit = |x: &Rational| *x >= Rational::zero() && *x <= Rational::one();
    if !unit(&up) || !unit(&down) {
        return Err(GenError::Infeasible(crate::models::format_rational(magnitude)));
    }
    r[plus] = up;
    r[minus] = down;
    Ok(Mixture::from_parts(alphabet, n, weights, components))
}

/// A perturbed copy of a mixture and whether it still describes the same
/// distribution, decided by enumeration.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedPair {
    pub mixture: Mixture,
    pub equal: bool,
}

/// Shifts one randomly chosen entry by `magnitude`, compensating within its row.
pub fn perturbed_pair(m: &Mixture, seed: Seed, magnitude: &Rational) -> Result<PerturbedPair, GenError> {
    m.check()?;
    if *magnitude < Rational::zero() {
        return Err(GenError::Parameter("magnitude must be nonnegative".into()));
    }
    if magnitude.is_zero() {
        return Ok(PerturbedPair {
            mixture: m.clone(),
            equal: true,
        });
    }
    let sigma = m.alphabet().len();
    let mut feasible = Vec::new();
    for (c, comp) in m.components().iter().enumerate() {
        for (r, row) in comp.rows().iter().enumerate() {
            for plus in 0..sigma {
                for minus in 0..sigma {
                    if plus != minus
                        && &row[plus] + magnitude <= Rational::one()
                        && &row[minus] - magnitude >= Rational::zero()
                    {
                        feasible.push((c, r, plus, minus));
                    }
                }
            }
        }
    }
    let mut rng = seed.rng();
    let &(c, r, plus, minus) = feasible
        .get(rng.random_range(0..feasible.len().max(1)))
        .ok_or_else(|| GenError::Infeasible(crate::models::format_rational(magnitude)))?;
    let mixture = perturb_entry(m, c, r, plus, minus, magnitude)?;
    let equal = brute_force_equivalence(m, &mixture)?.is_equal();
    Ok(PerturbedPair { mixture, equal })
}

/// Random Ising model: each unordered pair present with probability
/// `pair_density`, weights and fields uniform in the given closed ranges.
pub fn random_ising(
    n: usize,
    pair_density: f64,
    weight_range: (f64, f64),
    field_range: (f64, f64),
    seed: Seed,
) -> Result<IsingModel, GenError> {
    if !(0.0..=1.0).contains(&pair_density) {
        return Err(GenError::Parameter("pair density must lie in [0, 1]".into()));
    }
    for (lo, hi) in [weight_range, field_range] {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(GenError::Parameter(format!("bad range [{lo}, {hi}]")));
        }
    }
    let mut rng = seed.rng();
    let uniform = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| lo + (hi - lo) * rng.random::<f64>();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random::<f64>() < pair_density {
                pairs.push((i, j, uniform(&mut rng, weight_range)));
            }
        }
    }
    let fields = (0..n).map(|_| uniform(&mut rng, field_range)).collect();
    Ok(IsingModel::new(n, pairs, fields)?)
}
