//! Atomic marginals from TV distance via a dummy spin.
//!
//! Given a model `I` on spins `1..n` and a target spin `k`, `P0` adds an
//! isolated spin `x_0` with field `h0`, and `Q0` additionally couples `x_0` to
//! `x_k` with weight `delta`. In the gadgets built here spin `0` is the dummy
//! and spin `i` of `I` becomes spin `i + 1`.
//!
//! `P0(x) ≥ Q0(x)` exactly when `x_0 x_k = −1`, which gives
//!
//! ```text
//! dtv(P0, Q0) = p0 − Σ_{x_0 x_k = −1} Q0(x) + (1 − 2 p0) Pr[x_k = 1 | I],   p0 = e^{2h0} / (e^{2h0} + 1).
//! ```
//!
//! With `h0` very negative and `delta` large the TV distance approaches
//! `Pr[x_k = 1 | I]`; with `h0` very positive it approaches `Pr[x_k = −1 | I]`.
//! The gap is at most `2 e^{−2|h0|} + e^{−delta} Z_{P0} / Z_{Q0}`.

use super::brute::{log_partition_where, logistic, marginal_brute, partition_brute, tv_brute};
use super::reduction::MarginalOracle;
use super::{enumerate, IsingError, Spin};
use crate::models::IsingModel;

/// Largest `|h0|` or `delta` the gadget will use. Beyond this the coupling
/// dominates every energy and double precision no longer resolves the
/// original model's contribution.
pub const GADGET_MAGNITUDE_LIMIT: f64 = 1e4;

/// Dummy-spin parameters. The sign of `h0` selects the marginal being
/// encoded: negative (or zero) for `Pr[x_k = +1]`, positive for `Pr[x_k = −1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GadgetParams {
    pub k: usize,
    pub h0: f64,
    pub delta: f64,
}

impl GadgetParams {
    pub fn new(k: usize, h0: f64, delta: f64) -> Result<Self, IsingError> {
        if !h0.is_finite() {
            return Err(IsingError::BadParameter {
                name: "h0",
                requirement: "finite",
                value: h0,
            });
        }
        if !(delta > 1.0 && delta.is_finite()) {
            return Err(IsingError::BadParameter {
                name: "delta",
                requirement: "finite and > 1",
                value: delta,
            });
        }
        Ok(Self { k, h0, delta })
    }

    pub fn target(&self) -> Spin {
        if self.h0 > 0.0 {
            Spin::Down
        } else {
            Spin::Up
        }
    }

    /// `Pr[x_0 = +1 | P0] = e^{2h0} / (e^{2h0} + 1)`.
    pub fn dummy_up_probability(&self) -> f64 {
        logistic(2.0 * self.h0)
    }

    fn validate_for(&self, model: &IsingModel) -> Result<(), IsingError> {
        Self::new(self.k, self.h0, self.delta)?;
        if self.k >= model.n() {
            return Err(IsingError::IndexOutOfRange {
                index: self.k,
                n: model.n(),
            });
        }
        Ok(())
    }
}

/// Builds `(P0, Q0)` on `n + 1` spins.
pub fn build_marginal_gadget(
    model: &IsingModel,
    params: &GadgetParams,
) -> Result<(IsingModel, IsingModel), IsingError> {
    params.validate_for(model)?;
    let shifted: Vec<_> = model.pairs().map(|((i, j), w)| (i + 1, j + 1, w)).collect();
    let mut fields = Vec::with_capacity(model.n() + 1);
    fields.push(params.h0);
    fields.extend_from_slice(model.fields());
    let p0 = IsingModel::new(model.n() + 1, shifted.clone(), fields.clone())?;
    let q0 = IsingModel::new(
        model.n() + 1,
        shifted.into_iter().chain(std::iter::once((0, params.k + 1, params.delta))),
        fields,
    )?;
    Ok((p0, q0))
}

fn anti_aligned(k: usize) -> impl Fn(u64) -> bool + Sync {
    let target = k + 1;
    move |bits| (bits & 1) != ((bits >> target) & 1)
}

/// Right-hand side of the TV identity, with `Σ_{x_0 x_k = −1} Q0(x)` and
/// `Pr[x_k = 1 | I]` both computed by enumeration.
pub fn eq1_rhs(model: &IsingModel, params: &GadgetParams) -> Result<f64, IsingError> {
    let (_, q0) = build_marginal_gadget(model, params)?;
    let log_zq = partition_brute(&q0)?.ln();
    let q_anti = (log_partition_where(&q0, anti_aligned(params.k))?.ln() - log_zq).exp();
    let p0 = params.dummy_up_probability();
    let up = marginal_brute(model, params.k, Spin::Up)?;
    Ok(p0 - q_anti + (1.0 - 2.0 * p0) * up)
}

/// Outcome of comparing `P0(x)` with `Q0(x)` over every configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignCheck {
    /// Configurations where `P0(x) > Q0(x)` does not coincide with `x_0 x_k = −1`.
    pub violations: u64,
    /// Bitmask of the first violating configuration in enumeration order.
    pub first_violation: Option<u64>,
}

impl SignCheck {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// Checks that `P0(x) > Q0(x)` exactly when `x_0 x_k = −1`, and `P0(x) < Q0(x)` otherwise.
pub fn gadget_sign_check(model: &IsingModel, params: &GadgetParams) -> Result<SignCheck, IsingError> {
    let (p0, q0) = build_marginal_gadget(model, params)?;
    let (lzp, lzq) = (partition_brute(&p0)?.ln(), partition_brute(&q0)?.ln());
    let anti = anti_aligned(params.k);
    let (violations, first_violation) = enumerate(
        &[&p0, &q0],
        || (0u64, None),
        |acc: &mut (u64, Option<u64>), bits, e| {
            let gap = (e[0] - lzp) - (e[1] - lzq);
            if (gap > 0.0) != anti(bits) {
                acc.0 += 1;
                acc.1 = acc.1.or(Some(bits));
            }
        },
        |a, b| (a.0 + b.0, a.1.or(b.1)),
    );
    Ok(SignCheck {
        violations,
        first_violation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GadgetBound {
    /// `2 e^{−2|h0|} + e^{−delta} Z_{P0} / Z_{Q0}`
    pub value: f64,
    /// `log(Z_{P0} / Z_{Q0})`
    pub log_partition_ratio: f64,
    /// False when the bound is at least 1 and so says nothing about a
    /// difference of two probabilities.
    pub informative: bool,
}

/// Bound on `|dtv(P0, Q0) − Pr[x_k = target]|` with the partition ratio
/// computed exactly by enumeration.
pub fn gadget_error_bound(model: &IsingModel, params: &GadgetParams) -> Result<GadgetBound, IsingError> {
    let (p0, q0) = build_marginal_gadget(model, params)?;
    let log_ratio = partition_brute(&p0)?.ln() - partition_brute(&q0)?.ln();
    let value = 2.0 * (-2.0 * params.h0.abs()).exp() + (log_ratio - params.delta).exp();
    Ok(GadgetBound {
        value,
        log_partition_ratio: log_ratio,
        informative: value < 1.0,
    })
}

/// `log` of the lower bound `e^{−W(n+1)² − (n+1)H} / (4 e^{W(n+1)² + (n+1)H})`
/// on every atomic marginal of `model`.
pub fn log_marginal_lower_bound(model: &IsingModel) -> f64 {
    let m = (model.n() + 1) as f64;
    let energy = model.max_abs_pair_weight() * m * m + m * model.max_abs_field();
    -2.0 * energy - 4f64.ln()
}

/// Chooses gadget parameters guaranteeing that `dtv(P0, Q0)` is within a
/// `(1 + eps)/(1 + eps/2)` multiplicative factor of `Pr[x_k = s]`, so that an
/// `eps/2`-accurate TV estimate is an `eps`-accurate marginal estimate.
///
/// The requirement is `2 e^{−2|h0|} + e^{−delta} Z_{P0}/Z_{Q0} ≤ β L` with
/// `L` the marginal lower bound and `β = eps / (2 (1 + eps))`. Using
/// `Z_{P0}/Z_{Q0} ≤ 2 e^{2|h0| − delta}` and splitting the budget evenly gives
/// `|h0| = ½ log(4 / (β L))` and `delta = 2|h0|`.
pub fn size_gadget(model: &IsingModel, k: usize, s: Spin, eps: f64) -> Result<GadgetParams, IsingError> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(IsingError::BadParameter {
            name: "eps",
            requirement: "positive and finite",
            value: eps,
        });
    }
    if k >= model.n() {
        return Err(IsingError::IndexOutOfRange { index: k, n: model.n() });
    }
    let beta = eps / (2.0 * (1.0 + eps));
    let magnitude = 0.5 * ((4.0 / beta).ln() - log_marginal_lower_bound(model));
    let delta = 2.0 * magnitude;
    if !(magnitude <= GADGET_MAGNITUDE_LIMIT && delta <= GADGET_MAGNITUDE_LIMIT) {
        return Err(IsingError::InfeasibleGadget {
            h0_magnitude: magnitude,
            delta,
            limit: GADGET_MAGNITUDE_LIMIT,
        });
    }
    let h0 = match s {
        Spin::Up => -magnitude,
        Spin::Down => magnitude,
    };
    GadgetParams::new(k, h0, delta)
}

/// Source of TV-distance estimates between two models on the same spins.
pub trait TvOracle {
    fn estimate(
        &mut self,
        a: &IsingModel,
        b: &IsingModel,
        eps: f64,
        conf: f64,
    ) -> Result<f64, IsingError>;
}

impl<F> TvOracle for F
where
    F: FnMut(&IsingModel, &IsingModel, f64, f64) -> Result<f64, IsingError>,
{
    fn estimate(
        &mut self,
        a: &IsingModel,
        b: &IsingModel,
        eps: f64,
        conf: f64,
    ) -> Result<f64, IsingError> {
        self(a, b, eps, conf)
    }
}

/// Exact TV distance by enumeration.
#[derive(Debug, Clone, Copy, Default)]
pub struct BruteTvOracle;

impl TvOracle for BruteTvOracle {
    fn estimate(
        &mut self,
        a: &IsingModel,
        b: &IsingModel,
        _eps: f64,
        _conf: f64,
    ) -> Result<f64, IsingError> {
        tv_brute(a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalEstimate {
    pub value: f64,
    pub params: GadgetParams,
}

/// Estimates `Pr[x_k = s]` with one TV query at accuracy `eps / 2`.
pub fn marginal_via_tv<O: TvOracle + ?Sized>(
    model: &IsingModel,
    k: usize,
    s: Spin,
    eps: f64,
    conf: f64,
    oracle: &mut O,
) -> Result<MarginalEstimate, IsingError> {
    let params = size_gadget(model, k, s, eps)?;
    let (p0, q0) = build_marginal_gadget(model, &params)?;
    let value = oracle.estimate(&p0, &q0, eps / 2.0, conf)?;
    Ok(MarginalEstimate { value, params })
}

/// Marginal oracle answering every query through [`marginal_via_tv`].
#[derive(Debug, Clone, Default)]
pub struct TvMarginalOracle<O> {
    pub tv: O,
}

impl<O: TvOracle> MarginalOracle for TvMarginalOracle<O> {
    fn estimate(
        &mut self,
        model: &IsingModel,
        k: usize,
        s: Spin,
        eps: f64,
        conf: f64,
    ) -> Result<f64, IsingError> {
        marginal_via_tv(model, k, s, eps, conf, &mut self.tv).map(|e| e.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::brute::log_config_weight;

    fn sample() -> IsingModel {
        IsingModel::new(3, [(0, 1, 0.4), (1, 2, -0.7), (0, 2, 0.2)], vec![0.3, -0.1, 0.5]).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(GadgetParams::new(0, -3.0, 1.0).is_err());
        assert!(GadgetParams::new(0, -3.0, f64::INFINITY).is_err());
        assert!(GadgetParams::new(0, f64::NAN, 2.0).is_err());
        let p = GadgetParams::new(5, -3.0, 2.0).unwrap();
        assert!(matches!(
            build_marginal_gadget(&sample(), &p),
            Err(IsingError::IndexOutOfRange { index: 5, n: 3 })
        ));
        assert_eq!(GadgetParams::new(0, 2.0, 2.0).unwrap().target(), Spin::Down);
        assert_eq!(GadgetParams::new(0, 0.0, 2.0).unwrap().target(), Spin::Up);
    }

    #[test]
    fn gadget_structure() {
        let m = sample();
        let params = GadgetParams::new(1, -3.0, 4.0).unwrap();
        let (p0, q0) = build_marginal_gadget(&m, &params).unwrap();
        assert_eq!(p0.n(), 4);
        assert_eq!(p0.field(0), -3.0);
        assert!((1..4).all(|i| p0.pair_weight(0, i) == 0.0));
        assert_eq!(p0.pair_weight(1, 2), 0.4);
        assert_eq!(q0.pair_weight(0, 2), 4.0);
        assert_eq!(q0.pair_count(), p0.pair_count() + 1);
        let expect = (-6f64).exp() / ((-6f64).exp() + 1.0);
        let got = marginal_brute(&p0, 0, Spin::Up).unwrap();
        assert!((got - expect).abs() < 1e-10);
        assert!((expect - 2.4726231566347748e-3).abs() < 1e-15);
    }

    #[test]
    fn dummy_is_independent_under_p0() {
        let m = sample();
        let params = GadgetParams::new(2, -1.5, 3.0).unwrap();
        let (p0, _) = build_marginal_gadget(&m, &params).unwrap();
        let log_z = partition_brute(&p0).unwrap().ln();
        let p_dummy = marginal_brute(&p0, 0, Spin::Up).unwrap();
        for bits in 0u64..16 {
            let x = crate::ising::spins_from_bits(bits, 4);
            let joint = (log_config_weight(&p0, &x).unwrap().ln() - log_z).exp();
            let mut rest = x.clone();
            rest.remove(0);
            let other = partition_brute(&m).unwrap().ln();
            let p_rest = (log_config_weight(&m, &rest).unwrap().ln() - other).exp();
            let p_x0 = if x[0] == 1 { p_dummy } else { 1.0 - p_dummy };
            assert!((joint - p_x0 * p_rest).abs() < 1e-14);
        }
    }

    #[test]
    fn sign_property_on_sample() {
        for (h0, delta) in [(-3.0, 2.0), (-10.0, 25.0), (4.0, 1.5)] {
            for k in 0..3 {
                let params = GadgetParams::new(k, h0, delta).unwrap();
                let check = gadget_sign_check(&sample(), &params).unwrap();
                assert!(check.holds(), "{check:?}");
            }
        }
    }

    #[test]
    fn vacuous_bound_flagged() {
        let b = gadget_error_bound(&sample(), &GadgetParams::new(0, 0.0, 1.0 + 1e-9).unwrap()).unwrap();
        assert!(b.value >= 2.0);
        assert!(!b.informative);
    }

    #[test]
    fn bound_shrinks_with_parameters() {
        let m = sample();
        let mut last = f64::INFINITY;
        for step in 1..8 {
            let t = step as f64;
            let b = gadget_error_bound(&m, &GadgetParams::new(0, -t, 1.0 + 3.0 * t).unwrap()).unwrap();
            assert!(b.value < last);
            last = b.value;
        }
        assert!(last < 1e-5);
    }

    #[test]
    fn sized_parameters_meet_budget() {
        let m = sample();
        for s in [Spin::Up, Spin::Down] {
            let eps = 0.05;
            let params = size_gadget(&m, 1, s, eps).unwrap();
            assert_eq!(params.target(), s);
            let bound = gadget_error_bound(&m, &params).unwrap();
            let budget = eps / (2.0 * (1.0 + eps)) * log_marginal_lower_bound(&m).exp();
            assert!(bound.value <= budget, "{} > {}", bound.value, budget);
        }
    }

    #[test]
    fn infeasible_accuracy_reports_magnitudes() {
        let strong = IsingModel::new(6, (0..5).map(|i| (i, i + 1, 150.0)), vec![10.0; 6]).unwrap();
        match size_gadget(&strong, 0, Spin::Up, 0.05) {
            Err(IsingError::InfeasibleGadget { h0_magnitude, delta, .. }) => {
                assert!(h0_magnitude > GADGET_MAGNITUDE_LIMIT / 2.0);
                assert!(delta > GADGET_MAGNITUDE_LIMIT);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
        assert!(size_gadget(&sample(), 0, Spin::Up, 0.0).is_err());
    }

    #[test]
    fn marginal_estimate_within_tolerance() {
        let m = sample();
        for k in 0..3 {
            for s in [Spin::Up, Spin::Down] {
                let est = marginal_via_tv(&m, k, s, 0.05, 0.1, &mut BruteTvOracle).unwrap();
                let truth = marginal_brute(&m, k, s).unwrap();
                let ratio = est.value / truth;
                assert!((1.0 / 1.05..=1.05).contains(&ratio), "k={k} s={s} ratio={ratio}");
            }
        }
    }
}
