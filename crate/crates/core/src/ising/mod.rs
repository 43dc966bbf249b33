//! Ising-model computations in log space.
//!
//! [`brute`] holds the exhaustive oracles (partition function, atomic
//! marginals, total variation distance). [`reduction`] turns marginal
//! estimates into a partition-function estimate by eliminating one spin at a
//! time. [`gadget`] turns TV-distance estimates into marginal estimates using
//! a dummy spin coupled to the target.

pub mod brute;
pub mod gadget;
pub mod reduction;

pub use brute::{
    log_config_weight, log_partial_partition, log_partition_where, marginal_brute,
    partition_brute, spins_from_bits, tv_brute, tv_brute_detailed, TvValue,
};
pub use gadget::{
    build_marginal_gadget, eq1_rhs, gadget_error_bound, gadget_sign_check, SignCheck, log_marginal_lower_bound,
    marginal_via_tv, size_gadget, BruteTvOracle, GadgetBound, GadgetParams, MarginalEstimate,
    TvMarginalOracle, TvOracle, GADGET_MAGNITUDE_LIMIT,
};
pub use reduction::{
    eliminate_first_variable, partition_via_marginals, ExactMarginalOracle, MarginalOracle,
    PartitionEstimate,
};

use rayon::prelude::*;
use std::fmt;
use thiserror::Error;

use crate::limits;
use crate::models::{IsingModel, ModelError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IsingError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("enumerating 2^{n} configurations exceeds the limit of {limit}")]
    TooLarge { n: usize, limit: u64 },
    #[error("spin vector has length {found}, model has {expected} spins")]
    WrongLength { expected: usize, found: usize },
    #[error("spin value {0} is not -1 or +1")]
    BadSpin(i64),
    #[error("spin index {index} out of range for {n} spins")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("operation needs at least {needed} spins, model has {found}")]
    NotEnoughSpins { needed: usize, found: usize },
    #[error("models have different spin counts ({0} vs {1})")]
    ShapeMismatch(usize, usize),
    #[error("TV formulas disagree: half-L1 {half_l1} vs positive part {positive_part}")]
    TvDisagreement { half_l1: f64, positive_part: f64 },
    #[error("{name} must be {requirement}, got {value}")]
    BadParameter {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("oracle failure: {0}")]
    Oracle(String),
    #[error("oracle returned non-positive or non-finite estimate {0}")]
    NonPositiveEstimate(f64),
    #[error(
        "gadget needs |h0| >= {h0_magnitude:.6e} and delta >= {delta:.6e}, beyond the supported magnitude {limit:e}"
    )]
    InfeasibleGadget {
        h0_magnitude: f64,
        delta: f64,
        limit: f64,
    },
}

/// A spin value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn value(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    pub fn flip(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }

    fn bit(self) -> u64 {
        match self {
            Spin::Up => 1,
            Spin::Down => 0,
        }
    }
}

impl TryFrom<i64> for Spin {
    type Error = IsingError;
    fn try_from(v: i64) -> Result<Spin, IsingError> {
        match v {
            1 => Ok(Spin::Up),
            -1 => Ok(Spin::Down),
            other => Err(IsingError::BadSpin(other)),
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Up => "+1",
            Spin::Down => "-1",
        })
    }
}

/// A magnitude stored as its natural logarithm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogWeight(pub f64);

impl LogWeight {
    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn exp(self) -> f64 {
        self.0.exp()
    }
}

impl fmt::Display for LogWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Streaming max-shifted `log Σ exp(a_i)`.
#[derive(Debug, Clone, Copy)]
pub struct LogSumExp {
    max: f64,
    scaled: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self {
            max: f64::NEG_INFINITY,
            scaled: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn push(&mut self, a: f64) {
        if a == f64::NEG_INFINITY {
            return;
        }
        if a <= self.max {
            self.scaled += (a - self.max).exp();
        } else {
            self.scaled = self.scaled * (self.max - a).exp() + 1.0;
            self.max = a;
        }
    }

    pub fn merge(self, other: LogSumExp) -> LogSumExp {
        if other.max == f64::NEG_INFINITY {
            return self;
        }
        if self.max == f64::NEG_INFINITY {
            return other;
        }
        if self.max >= other.max {
            LogSumExp {
                max: self.max,
                scaled: self.scaled + other.scaled * (other.max - self.max).exp(),
            }
        } else {
            other.merge(self)
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.scaled.ln()
        }
    }
}

/// `log(exp(a) + exp(b))`.
pub fn log_add(a: f64, b: f64) -> f64 {
    let mut acc = LogSumExp::default();
    acc.push(a);
    acc.push(b);
    acc.value()
}

/// Neumaier-compensated summation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn merge(mut self, other: CompensatedSum) -> CompensatedSum {
        self.add(other.sum);
        self.add(other.carry);
        self
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Configurations per chunk, as a power of two. Each chunk re-anchors the
/// incremental energies with a direct evaluation.
const CHUNK_BITS: usize = 12;

pub(crate) fn ensure_enumerable(n: usize, default_limit: u64) -> Result<(), IsingError> {
    let limit = limits::max_enum(default_limit);
    match limits::checked_pow(2, n) {
        Some(count) if count <= limit && n < 64 => Ok(()),
        _ => Err(IsingError::TooLarge { n, limit }),
    }
}

/// Visits every configuration of `n` spins once, passing the bitmask and the
/// energy of each model in `models` at that configuration.
///
/// Configurations are split by their high bits into chunks walked in Gray-code
/// order over the low bits. Chunks run in parallel; their accumulators are
/// merged in chunk order, so results do not depend on scheduling.
pub(crate) fn enumerate<A, I, V, C>(models: &[&IsingModel], init: I, visit: V, combine: C) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, u64, &[f64]) + Sync,
    C: Fn(A, A) -> A,
{
    let n = models[0].n();
    debug_assert!(models.iter().all(|m| m.n() == n));
    let low = n.min(CHUNK_BITS);
    let chunks = 1u64 << (n - low);
    let adjacency: Vec<_> = models.iter().map(|m| m.adjacency()).collect();

    let run_chunk = |chunk: u64| -> A {
        let mut acc = init();
        let mut bits = chunk << low;
        let mut energies: Vec<f64> = models.iter().map(|m| m.energy_bits(bits)).collect();
        visit(&mut acc, bits, &energies);
        for t in 1u64..(1u64 << low) {
            let i = t.trailing_zeros() as usize;
            let s = if (bits >> i) & 1 == 1 { 1.0 } else { -1.0 };
            for ((e, m), adj) in energies.iter_mut().zip(models).zip(&adjacency) {
                let mut local = m.field(i);
                for &(j, w) in &adj[i] {
                    local += if (bits >> j) & 1 == 1 { w } else { -w };
                }
                *e -= 2.0 * s * local;
            }
            bits ^= 1 << i;
            visit(&mut acc, bits, &energies);
        }
        acc
    };

    if chunks == 1 {
        return run_chunk(0);
    }
    let parts: Vec<A> = (0..chunks).into_par_iter().map(run_chunk).collect();
    let mut it = parts.into_iter();
    let first = it.next().expect("at least one chunk");
    it.fold(first, combine)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_matches_direct() {
        let xs = [0.3, -1.2, 2.5, 0.0, -700.0, 1.1];
        let mut acc = LogSumExp::default();
        for &x in &xs {
            acc.push(x);
        }
        let direct = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((acc.value() - direct).abs() < 1e-14);
    }

    #[test]
    fn log_sum_exp_no_overflow() {
        let mut a = LogSumExp::default();
        a.push(1000.0);
        a.push(1000.0);
        assert!((a.value() - (1000.0 + 2f64.ln())).abs() < 1e-12);
        let mut b = LogSumExp::default();
        b.push(-2000.0);
        assert_eq!(a.merge(b).value(), a.value());
        assert_eq!(LogSumExp::default().value(), f64::NEG_INFINITY);
        assert_eq!(LogSumExp::default().merge(a).value(), a.value());
    }

    #[test]
    fn spin_parsing() {
        assert_eq!(Spin::try_from(1).unwrap(), Spin::Up);
        assert_eq!(Spin::try_from(-1).unwrap(), Spin::Down);
        assert_eq!(Spin::try_from(0), Err(IsingError::BadSpin(0)));
        assert_eq!(Spin::Up.flip(), Spin::Down);
    }

    #[test]
    fn gray_walk_visits_every_configuration_with_exact_energies() {
        let m = IsingModel::new(
            14,
            (0..13).map(|i| (i, i + 1, 0.1 * i as f64 - 0.4)),
            (0..14).map(|i| 0.05 * i as f64 - 0.3).collect(),
        )
        .unwrap();
        let (count, max_err) = enumerate(
            &[&m],
            || (0u64, 0.0f64),
            |acc, bits, e| {
                acc.0 += 1;
                acc.1 = acc.1.max((e[0] - m.energy_bits(bits)).abs());
            },
            |a, b| (a.0 + b.0, a.1.max(b.1)),
        );
        assert_eq!(count, 1 << 14);
        assert!(max_err < 1e-11, "{max_err}");
    }
}
