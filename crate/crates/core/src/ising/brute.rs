//! Exhaustive oracles over all `2^n` spin configurations.

use super::{enumerate, ensure_enumerable, CompensatedSum, IsingError, LogSumExp, LogWeight, Spin};
use crate::limits;
use crate::models::IsingModel;

/// Tolerance on the gap between the two TV formulas computed by [`tv_brute`].
pub const TV_FORMULA_TOLERANCE: f64 = 1e-10;

/// Spin vector for a bitmask (bit `i` set means `x_i = +1`).
pub fn spins_from_bits(bits: u64, n: usize) -> Vec<i8> {
    (0..n).map(|i| if (bits >> i) & 1 == 1 { 1 } else { -1 }).collect()
}

fn bits_from_spins(model: &IsingModel, x: &[i8]) -> Result<u64, IsingError> {
    if x.len() != model.n() {
        return Err(IsingError::WrongLength {
            expected: model.n(),
            found: x.len(),
        });
    }
    if model.n() > 64 {
        return Err(IsingError::TooLarge {
            n: model.n(),
            limit: u64::MAX,
        });
    }
    let mut bits = 0u64;
    for (i, &s) in x.iter().enumerate() {
        match s {
            1 => bits |= 1 << i,
            -1 => {}
            other => return Err(IsingError::BadSpin(other.into())),
        }
    }
    Ok(bits)
}

/// `Σ_{i<j} w_ij x_i x_j + Σ_i h_i x_i`, the log of the unnormalized weight of `x`.
pub fn log_config_weight(model: &IsingModel, x: &[i8]) -> Result<LogWeight, IsingError> {
    let bits = bits_from_spins(model, x)?;
    Ok(LogWeight(model.energy_bits(bits)))
}

/// `log Σ_{x : keep(x)} exp(E(x))` over configurations selected by a bitmask predicate.
pub fn log_partition_where<F>(model: &IsingModel, keep: F) -> Result<LogWeight, IsingError>
where
    F: Fn(u64) -> bool + Sync,
{
    ensure_enumerable(model.n(), limits::DEFAULT_ISING_CONFIGS)?;
    let acc = enumerate(
        &[model],
        LogSumExp::default,
        |acc, bits, e| {
            if keep(bits) {
                acc.push(e[0]);
            }
        },
        LogSumExp::merge,
    );
    Ok(LogWeight(acc.value()))
}

/// `log Z`.
pub fn partition_brute(model: &IsingModel) -> Result<LogWeight, IsingError> {
    log_partition_where(model, |_| true)
}

fn check_index(model: &IsingModel, k: usize) -> Result<(), IsingError> {
    if k >= model.n() {
        return Err(IsingError::IndexOutOfRange { index: k, n: model.n() });
    }
    Ok(())
}

/// `log Σ_{x : x_k = s} exp(E(x))`.
pub fn log_partial_partition(model: &IsingModel, k: usize, s: Spin) -> Result<LogWeight, IsingError> {
    check_index(model, k)?;
    let want = s.bit();
    log_partition_where(model, move |bits| (bits >> k) & 1 == want)
}

/// `Pr[x_k = s]`.
///
/// Both conditional sums come from a single pass and the result is formed as
/// a logistic function of their difference, so the two marginals of a spin
/// add up to 1 up to a single rounding.
pub fn marginal_brute(model: &IsingModel, k: usize, s: Spin) -> Result<f64, IsingError> {
    check_index(model, k)?;
    ensure_enumerable(model.n(), limits::DEFAULT_ISING_CONFIGS)?;
    let (up, down) = enumerate(
        &[model],
        || (LogSumExp::default(), LogSumExp::default()),
        |acc, bits, e| {
            if (bits >> k) & 1 == 1 {
                acc.0.push(e[0]);
            } else {
                acc.1.push(e[0]);
            }
        },
        |a, b| (a.0.merge(b.0), a.1.merge(b.1)),
    );
    let (mine, other) = match s {
        Spin::Up => (up.value(), down.value()),
        Spin::Down => (down.value(), up.value()),
    };
    Ok(logistic(mine - other))
}

/// `1 / (1 + exp(-t))`, stable for large |t|.
pub(crate) fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// Both TV formulas evaluated by enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvValue {
    /// `½ Σ_x |P(x) − Q(x)|`
    pub half_l1: f64,
    /// `Σ_x max(0, P(x) − Q(x))`
    pub positive_part: f64,
}

/// Computes both TV formulas without checking their agreement.
pub fn tv_brute_detailed(a: &IsingModel, b: &IsingModel) -> Result<TvValue, IsingError> {
    if a.n() != b.n() {
        return Err(IsingError::ShapeMismatch(a.n(), b.n()));
    }
    ensure_enumerable(a.n(), limits::DEFAULT_TV_CONFIGS)?;
    let (za, zb) = enumerate(
        &[a, b],
        || (LogSumExp::default(), LogSumExp::default()),
        |acc, _, e| {
            acc.0.push(e[0]);
            acc.1.push(e[1]);
        },
        |x, y| (x.0.merge(y.0), x.1.merge(y.1)),
    );
    let (za, zb) = (za.value(), zb.value());
    let (abs, pos) = enumerate(
        &[a, b],
        || (CompensatedSum::default(), CompensatedSum::default()),
        |acc, _, e| {
            let d = (e[0] - za).exp() - (e[1] - zb).exp();
            acc.0.add(d.abs());
            if d > 0.0 {
                acc.1.add(d);
            }
        },
        |x, y| (x.0.merge(y.0), x.1.merge(y.1)),
    );
    Ok(TvValue {
        half_l1: 0.5 * abs.value(),
        positive_part: pos.value(),
    })
}

/// Total variation distance between two models on the same spins.
///
/// Fails if the half-L1 and positive-part forms differ by more than
/// [`TV_FORMULA_TOLERANCE`]; otherwise returns the half-L1 value.
pub fn tv_brute(a: &IsingModel, b: &IsingModel) -> Result<f64, IsingError> {
    let tv = tv_brute_detailed(a, b)?;
    if (tv.half_l1 - tv.positive_part).abs() > TV_FORMULA_TOLERANCE {
        return Err(IsingError::TvDisagreement {
            half_l1: tv.half_l1,
            positive_part: tv.positive_part,
        });
    }
    Ok(tv.half_l1)
}
