//! Partition function from atomic marginals.
//!
//! Fixing `x_1 = +1` turns the couplings of spin 1 into extra fields on the
//! remaining spins, so `Σ_{x : x_1 = 1} E_1(x) = exp(h_1) Z_2` where `Z_2` is
//! the partition function of the reduced model. Dividing by `Pr[x_1 = 1]`
//! gives `Z_1 = Z_2 exp(h_1) / Pr[x_1 = 1]`. Repeating down to one spin,
//! whose partition function is `exp(h) + exp(-h)`, telescopes into
//! `log Z = Σ_t (h_t − log Pr_t[x_t = 1]) + log Z_n`.

use std::collections::BTreeMap;

use super::brute::marginal_brute;
use super::{IsingError, LogWeight, Spin};
use crate::models::IsingModel;

/// Source of atomic-marginal estimates `Pr[x_k = s]`.
///
/// `eps` is the requested multiplicative accuracy and `conf` the allowed
/// failure probability. Deterministic oracles may ignore `conf`.
pub trait MarginalOracle {
    fn estimate(
        &mut self,
        model: &IsingModel,
        k: usize,
        s: Spin,
        eps: f64,
        conf: f64,
    ) -> Result<f64, IsingError>;
}

impl<F> MarginalOracle for F
where
    F: FnMut(&IsingModel, usize, Spin, f64, f64) -> Result<f64, IsingError>,
{
    fn estimate(
        &mut self,
        model: &IsingModel,
        k: usize,
        s: Spin,
        eps: f64,
        conf: f64,
    ) -> Result<f64, IsingError> {
        self(model, k, s, eps, conf)
    }
}

/// Exact marginals by enumeration.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactMarginalOracle;

impl MarginalOracle for ExactMarginalOracle {
    fn estimate(
        &mut self,
        model: &IsingModel,
        k: usize,
        s: Spin,
        _eps: f64,
        _conf: f64,
    ) -> Result<f64, IsingError> {
        marginal_brute(model, k, s)
    }
}

/// Removes spin 0, folding its couplings into the fields of the others:
/// `h'_i = w_{0,i} + h_i`, all other couplings unchanged. Spin `i` of the
/// input becomes spin `i − 1` of the output.
pub fn eliminate_first_variable(model: &IsingModel) -> Result<IsingModel, IsingError> {
    let n = model.n();
    if n < 2 {
        return Err(IsingError::NotEnoughSpins { needed: 2, found: n });
    }
    let mut fields: Vec<f64> = model.fields()[1..].to_vec();
    let mut pairs = BTreeMap::new();
    for ((i, j), w) in model.pairs() {
        if i == 0 {
            fields[j - 1] += w;
        } else {
            pairs.insert((i - 1, j - 1), w);
        }
    }
    Ok(IsingModel::from_raw(n - 1, pairs, fields))
}

/// `log(exp(h) + exp(-h))`.
pub fn single_spin_log_partition(h: f64) -> f64 {
    let a = h.abs();
    a + (-2.0 * a).exp().ln_1p()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionEstimate {
    pub log_z: LogWeight,
    /// Oracle estimate of `Pr[x_1 = +1]` for each reduced model, outermost first.
    pub marginals: Vec<f64>,
}

fn check_accuracy(eps: f64, conf: f64) -> Result<(), IsingError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(IsingError::BadParameter {
            name: "eps",
            requirement: "positive and finite",
            value: eps,
        });
    }
    if !(conf > 0.0 && conf < 1.0) {
        return Err(IsingError::BadParameter {
            name: "conf",
            requirement: "in (0, 1)",
            value: conf,
        });
    }
    Ok(())
}

/// Estimates `log Z` from `n − 1` marginal queries, each made with accuracy
/// `eps / n` and failure probability `conf / n`.
pub fn partition_via_marginals<O: MarginalOracle + ?Sized>(
    model: &IsingModel,
    oracle: &mut O,
    eps: f64,
    conf: f64,
) -> Result<PartitionEstimate, IsingError> {
    check_accuracy(eps, conf)?;
    let n = model.n();
    let eps0 = eps / n as f64;
    let conf0 = conf / n as f64;
    let mut log_z = 0.0;
    let mut marginals = Vec::with_capacity(n.saturating_sub(1));
    let mut current = model.clone();
    while current.n() > 1 {
        let m = oracle.estimate(&current, 0, Spin::Up, eps0, conf0)?;
        if !(m > 0.0 && m.is_finite()) {
            return Err(IsingError::NonPositiveEstimate(m));
        }
        log_z += current.field(0) - m.ln();
        marginals.push(m);
        current = eliminate_first_variable(&current)?;
    }
    log_z += single_spin_log_partition(current.field(0));
    Ok(PartitionEstimate {
        log_z: LogWeight(log_z),
        marginals,
    })
}
