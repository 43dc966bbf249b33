use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use mixv::equivalence::{self, Verdict};
use mixv::generators::{self, Seed};
use mixv::ising::{self, BruteTvOracle, ExactMarginalOracle, GadgetParams, IsingError, Spin, TvMarginalOracle};
use mixv::models::{self, format_rational, parse_rational, Alphabet, ProductDistribution};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn ising_error(e: IsingError) -> PyErr {
    match e {
        IsingError::TooLarge { .. } | IsingError::InfeasibleGadget { .. } | IsingError::TvDisagreement { .. } => {
            PyRuntimeError::new_err(e.to_string())
        }
        other => value_error(other),
    }
}

fn spin(s: i64) -> PyResult<Spin> {
    Spin::try_from(s).map_err(ising_error)
}

/// Mixture of product distributions with exact rational parameters.
#[pyclass(name = "Mixture", module = "mixv_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyMixture {
    inner: models::Mixture,
}

#[pymethods]
impl PyMixture {
    /// `components[i][c][y]` is `Pr[X_c = alphabet[y]]` under component `i`.
    #[new]
    fn new(alphabet: Vec<String>, weights: Vec<String>, components: Vec<Vec<Vec<String>>>) -> PyResult<Self> {
        let alphabet = Alphabet::new(alphabet).map_err(value_error)?;
        let weights = weights.iter().map(|w| parse_rational(w)).collect::<Result<Vec<_>, _>>().map_err(value_error)?;
        let n = components.first().map_or(0, Vec::len);
        let components = components
            .iter()
            .map(|rows| {
                rows.iter()
                    .map(|row| row.iter().map(|x| parse_rational(x)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()
                    .map(ProductDistribution::new)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(value_error)?;
        let inner = models::Mixture::new(alphabet, n, weights, components).map_err(value_error)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner = models::Mixture::from_json(text).map_err(value_error)?;
        inner.check().map_err(value_error)?;
        Ok(Self { inner })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn alphabet(&self) -> Vec<String> {
        self.inner.alphabet().symbols().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<String> {
        self.inner.weights().iter().map(format_rational).collect()
    }

    /// Exact `P^{<=i}(prefix)` as a "p/q" string.
    fn prefix_prob(&self, prefix: Vec<String>) -> PyResult<String> {
        self.inner.prefix_prob_symbols(&prefix).map(|r| format_rational(&r)).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!(
            "Mixture(n={}, k={}, alphabet={:?})",
            self.inner.n(),
            self.inner.k(),
            self.inner.alphabet().symbols()
        )
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

/// Ising model with real couplings and fields on spins `0..n`.
#[pyclass(name = "IsingModel", module = "mixv_py", frozen, skip_from_py_object)]
#[derive(Clone)]
pub struct PyIsingModel {
    inner: models::IsingModel,
}

#[pymethods]
impl PyIsingModel {
    #[new]
    #[pyo3(signature = (n, pairs, fields))]
    fn new(n: usize, pairs: Vec<(usize, usize, f64)>, fields: Vec<f64>) -> PyResult<Self> {
        let inner = models::IsingModel::new(n, pairs, fields).map_err(value_error)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        models::IsingModel::from_json(text).map(|inner| Self { inner }).map_err(value_error)
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn fields(&self) -> Vec<f64> {
        self.inner.fields().to_vec()
    }

    #[getter]
    fn pairs(&self) -> Vec<(usize, usize, f64)> {
        self.inner.pairs().map(|((i, j), w)| (i, j, w)).collect()
    }

    fn __repr__(&self) -> String {
        format!("IsingModel(n={}, pairs={})", self.inner.n(), self.inner.pair_count())
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

fn verdict_dict<'py>(py: Python<'py>, m: &models::Mixture, v: &Verdict) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("equal", v.is_equal())?;
    d.set_item("witness", v.witness().map(|w| m.alphabet().decode(&w.prefix)))?;
    Ok(d)
}

/// Exact equivalence check. Returns `{"equal", "witness", "basis_sizes"}`.
#[pyfunction]
fn check_equivalence<'py>(py: Python<'py>, p: &PyMixture, q: &PyMixture) -> PyResult<Bound<'py, PyDict>> {
    let run = equivalence::check_equivalence_traced(&p.inner, &q.inner).map_err(value_error)?;
    let d = verdict_dict(py, &p.inner, &run.verdict)?;
    d.set_item("basis_sizes", run.basis_sizes)?;
    Ok(d)
}

/// Equivalence by enumerating every full-length point.
#[pyfunction]
fn brute_force_equivalence<'py>(py: Python<'py>, p: &PyMixture, q: &PyMixture) -> PyResult<Bound<'py, PyDict>> {
    let v = equivalence::brute_force_equivalence(&p.inner, &q.inner).map_err(value_error)?;
    verdict_dict(py, &p.inner, &v)
}

#[pyfunction]
fn verify_witness(p: &PyMixture, q: &PyMixture, prefix: Vec<String>) -> PyResult<bool> {
    let x = p.inner.alphabet().encode(&prefix).map_err(value_error)?;
    equivalence::verify_witness(&p.inner, &q.inner, &x).map_err(value_error)
}

/// `log Z` by enumeration.
#[pyfunction]
fn partition_brute(m: &PyIsingModel) -> PyResult<f64> {
    ising::partition_brute(&m.inner).map(|z| z.ln()).map_err(ising_error)
}

#[pyfunction]
fn marginal_brute(m: &PyIsingModel, k: usize, s: i64) -> PyResult<f64> {
    ising::marginal_brute(&m.inner, k, spin(s)?).map_err(ising_error)
}

#[pyfunction]
fn tv_brute(a: &PyIsingModel, b: &PyIsingModel) -> PyResult<f64> {
    ising::tv_brute(&a.inner, &b.inner).map_err(ising_error)
}

/// `log Z` from marginal estimates; `oracle` is "exact" or "tv".
#[pyfunction]
#[pyo3(signature = (m, eps=0.05, conf=0.05, oracle="exact"))]
fn partition_via_marginals(m: &PyIsingModel, eps: f64, conf: f64, oracle: &str) -> PyResult<f64> {
    let est = match oracle {
        "exact" => ising::partition_via_marginals(&m.inner, &mut ExactMarginalOracle, eps, conf),
        "tv" => ising::partition_via_marginals(&m.inner, &mut TvMarginalOracle { tv: BruteTvOracle }, eps, conf),
        other => return Err(value_error(format!("unknown oracle {other:?}"))),
    };
    est.map(|e| e.log_z.ln()).map_err(ising_error)
}

/// Marginal estimate through one TV query. Returns `(value, h0, delta)`.
#[pyfunction]
#[pyo3(signature = (m, k, s, eps=0.05, conf=0.05))]
fn marginal_via_tv(m: &PyIsingModel, k: usize, s: i64, eps: f64, conf: f64) -> PyResult<(f64, f64, f64)> {
    let est = ising::marginal_via_tv(&m.inner, k, spin(s)?, eps, conf, &mut BruteTvOracle).map_err(ising_error)?;
    Ok((est.value, est.params.h0, est.params.delta))
}

fn gadget_params(k: usize, h0: f64, delta: f64) -> PyResult<GadgetParams> {
    GadgetParams::new(k, h0, delta).map_err(ising_error)
}

/// The pair `(P0, Q0)` on `n + 1` spins; spin 0 is the dummy.
#[pyfunction]
fn build_marginal_gadget(m: &PyIsingModel, k: usize, h0: f64, delta: f64) -> PyResult<(PyIsingModel, PyIsingModel)> {
    let (p0, q0) = ising::build_marginal_gadget(&m.inner, &gadget_params(k, h0, delta)?).map_err(ising_error)?;
    Ok((PyIsingModel { inner: p0 }, PyIsingModel { inner: q0 }))
}

/// Returns `{"value", "log_partition_ratio", "informative"}`.
#[pyfunction]
fn gadget_error_bound<'py>(
    py: Python<'py>,
    m: &PyIsingModel,
    k: usize,
    h0: f64,
    delta: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let b = ising::gadget_error_bound(&m.inner, &gadget_params(k, h0, delta)?).map_err(ising_error)?;
    let d = PyDict::new(py);
    d.set_item("value", b.value)?;
    d.set_item("log_partition_ratio", b.log_partition_ratio)?;
    d.set_item("informative", b.informative)?;
    Ok(d)
}

#[pyfunction]
#[pyo3(signature = (n, k, alphabet, seed, denominator_bound=10))]
fn random_mixture(n: usize, k: usize, alphabet: Vec<String>, seed: u64, denominator_bound: u64) -> PyResult<PyMixture> {
    let a = Alphabet::new(alphabet).map_err(value_error)?;
    generators::random_mixture(n, k, &a, Seed(seed), denominator_bound)
        .map(|inner| PyMixture { inner })
        .map_err(value_error)
}

#[pyfunction]
fn equivalent_rewrite(m: &PyMixture, seed: u64) -> PyResult<PyMixture> {
    generators::equivalent_rewrite(&m.inner, Seed(seed))
        .map(|inner| PyMixture { inner })
        .map_err(value_error)
}

/// Returns `(perturbed, still_equal)`.
#[pyfunction]
fn perturbed_pair(m: &PyMixture, seed: u64, magnitude: &str) -> PyResult<(PyMixture, bool)> {
    let mag = parse_rational(magnitude).map_err(value_error)?;
    let pair = generators::perturbed_pair(&m.inner, Seed(seed), &mag).map_err(value_error)?;
    Ok((PyMixture { inner: pair.mixture }, pair.equal))
}

#[pyfunction]
#[pyo3(signature = (n, seed, density=0.5, weight_range=(-1.0, 1.0), field_range=(-1.0, 1.0)))]
fn random_ising(
    n: usize,
    seed: u64,
    density: f64,
    weight_range: (f64, f64),
    field_range: (f64, f64),
) -> PyResult<PyIsingModel> {
    generators::random_ising(n, density, weight_range, field_range, Seed(seed))
        .map(|inner| PyIsingModel { inner })
        .map_err(value_error)
}

#[pymodule]
fn mixv_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMixture>()?;
    m.add_class::<PyIsingModel>()?;
    m.add_function(wrap_pyfunction!(check_equivalence, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force_equivalence, m)?)?;
    m.add_function(wrap_pyfunction!(verify_witness, m)?)?;
    m.add_function(wrap_pyfunction!(partition_brute, m)?)?;
    m.add_function(wrap_pyfunction!(marginal_brute, m)?)?;
    m.add_function(wrap_pyfunction!(tv_brute, m)?)?;
    m.add_function(wrap_pyfunction!(partition_via_marginals, m)?)?;
    m.add_function(wrap_pyfunction!(marginal_via_tv, m)?)?;
    m.add_function(wrap_pyfunction!(build_marginal_gadget, m)?)?;
    m.add_function(wrap_pyfunction!(gadget_error_bound, m)?)?;
    m.add_function(wrap_pyfunction!(random_mixture, m)?)?;
    m.add_function(wrap_pyfunction!(equivalent_rewrite, m)?)?;
    m.add_function(wrap_pyfunction!(perturbed_pair, m)?)?;
    m.add_function(wrap_pyfunction!(random_ising, m)?)?;
    Ok(())
}
