//! Python bindings: group models, the spectral calculus of the sublaplacian,
//! oscillating multipliers, sparse domination trials, weight characteristics
//! and the experiment runner.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use stratified_sparse::dyadic::domination::domination_experiment;
use stratified_sparse::dyadic::grid::build_dyadic_grids;
use stratified_sparse::dyadic::sparse::{self, Region};
use stratified_sparse::group::{build_group, GroupModel, ModelKind};
use stratified_sparse::harness::{run_experiment as run_suite, ExperimentConfig};
use stratified_sparse::multipliers::{dispersive, riesz, MultiplierSpec};
use stratified_sparse::spectral::{assemble_sublaplacian, spectral_decompose, SpectralDecomposition};
use stratified_sparse::weights::quantitative::{self, Thresholds};
use stratified_sparse::weights::{self as w, Weight};
use stratified_sparse::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::SizeLimit { .. } | Error::Config(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn check_len(name: &str, got: usize, want: usize) -> PyResult<()> {
    if got != want {
        return Err(PyValueError::new_err(format!("{name} has length {got}, expected {want}")));
    }
    Ok(())
}

/// Finite group model, e.g. `Group("heisenberg:6")` or `Group("torus:1:64")`.
#[pyclass(frozen, name = "Group")]
struct PyGroup {
    inner: Arc<GroupModel>,
}

#[pymethods]
impl PyGroup {
    #[new]
    #[pyo3(signature = (kind, max_size = 4096))]
    fn new(kind: &str, max_size: usize) -> PyResult<Self> {
        let kind = ModelKind::parse(kind).map_err(err)?;
        Ok(PyGroup { inner: Arc::new(build_group(kind, max_size).map_err(err)?) })
    }

    #[getter]
    fn size(&self) -> usize {
        self.inner.size()
    }

    #[getter]
    fn homogeneous_dim(&self) -> usize {
        self.inner.homogeneous_dim()
    }

    #[getter]
    fn diameter(&self) -> f64 {
        self.inner.diameter()
    }

    #[getter]
    fn identity(&self) -> usize {
        self.inner.identity()
    }

    fn quasi_triangle_constant(&self) -> f64 {
        self.inner.quasi_triangle_constant()
    }

    fn doubling_constant(&self) -> f64 {
        self.inner.doubling_constant()
    }

    fn mul(&self, a: usize, b: usize) -> PyResult<usize> {
        check_index(&self.inner, a)?;
        check_index(&self.inner, b)?;
        Ok(self.inner.mul(a, b))
    }

    fn inv(&self, a: usize) -> PyResult<usize> {
        check_index(&self.inner, a)?;
        Ok(self.inner.inv(a))
    }

    fn norm(&self, a: usize) -> PyResult<f64> {
        check_index(&self.inner, a)?;
        Ok(self.inner.norm(a))
    }

    fn norms(&self) -> Vec<f64> {
        self.inner.norms().to_vec()
    }

    fn dist(&self, a: usize, b: usize) -> PyResult<f64> {
        check_index(&self.inner, a)?;
        check_index(&self.inner, b)?;
        Ok(self.inner.dist(a, b))
    }

    /// Points at distance `< r` from `center`.
    fn ball(&self, center: usize, r: f64) -> PyResult<Vec<usize>> {
        check_index(&self.inner, center)?;
        Ok(self.inner.ball(center, r))
    }

    fn encode(&self, coords: Vec<i64>) -> PyResult<usize> {
        check_len("coords", coords.len(), self.inner.moduli().len())?;
        Ok(self.inner.encode(&coords))
    }

    fn decode(&self, index: usize) -> PyResult<Vec<i64>> {
        check_index(&self.inner, index)?;
        Ok(self.inner.decode(index).coords)
    }

    fn __repr__(&self) -> String {
        format!("Group('{}')", self.inner.kind())
    }
}

fn check_index(g: &GroupModel, a: usize) -> PyResult<()> {
    if a >= g.size() {
        return Err(PyValueError::new_err(format!("index {a} out of range for a group of {} points", g.size())));
    }
    Ok(())
}

/// Eigendecomposition of `L = s0^2 sum_a (I - R_a)` on a group.
#[pyclass(frozen, name = "Spectrum")]
struct PySpectrum {
    group: Arc<GroupModel>,
    inner: Arc<SpectralDecomposition>,
}

#[pymethods]
impl PySpectrum {
    #[new]
    #[pyo3(signature = (group, s0 = 4.0))]
    fn new(py: Python<'_>, group: &PyGroup, s0: f64) -> PyResult<Self> {
        let g = group.inner.clone();
        let dec = py.detach(|| spectral_decompose(&assemble_sublaplacian(&g, s0)?)).map_err(err)?;
        Ok(PySpectrum { group: g, inner: Arc::new(dec) })
    }

    #[getter]
    fn s0(&self) -> f64 {
        self.inner.s0()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues().to_vec()
    }

    /// `sqrt(lambda_i)`.
    fn frequencies(&self) -> Vec<f64> {
        self.inner.frequencies().to_vec()
    }

    fn reconstruction_error(&self) -> f64 {
        self.inner.reconstruction_error()
    }

    /// `sum_i v_i m(sqrt(lambda_i)) <v_i, f>` for precomputed `values`.
    fn apply_values(&self, values: Vec<Complex64>, f: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        check_len("values", values.len(), self.inner.size())?;
        check_len("f", f.len(), self.inner.size())?;
        Ok(self.inner.apply_values(&values, &f))
    }

    fn heat(&self, t: f64, f: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        check_len("f", f.len(), self.inner.size())?;
        self.inner.apply_multiplier(|lam| Complex64::new((-t * lam * lam).exp(), 0.0), &f).map_err(err)
    }

    fn heat_kernel(&self, t: f64) -> PyResult<Vec<f64>> {
        self.inner.heat_kernel(t).map_err(err)
    }

    fn plancherel_error(&self, values: Vec<Complex64>) -> PyResult<f64> {
        check_len("values", values.len(), self.inner.size())?;
        Ok(self.inner.plancherel_error(&values))
    }

    /// `exp(i t (sqrt L)^alpha) f`.
    fn dispersive(&self, alpha: f64, t: f64, f: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        check_len("f", f.len(), self.inner.size())?;
        dispersive::dispersive_apply(&self.inner, alpha, t, &f).map_err(err)
    }

    /// Riesz mean of order `k` at time `t`.
    fn riesz_mean(&self, k: f64, alpha: f64, t: f64, f: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        check_len("f", f.len(), self.inner.size())?;
        riesz::riesz_mean_apply(&self.inner, k, alpha, t, &f).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Spectrum(Group('{}'), s0={})", self.group.kind(), self.inner.s0())
    }
}

/// `exp(i lambda^theta) lambda^{-theta beta / 2}` cut to `lambda^theta >= 1`.
#[pyclass(frozen, name = "Multiplier")]
struct PyMultiplier {
    inner: Arc<MultiplierSpec>,
}

#[pymethods]
impl PyMultiplier {
    #[new]
    #[pyo3(signature = (theta, beta, nu = 2.0))]
    fn new(theta: f64, beta: f64, nu: f64) -> PyResult<Self> {
        Ok(PyMultiplier { inner: Arc::new(MultiplierSpec::oscillating(theta, beta, nu).map_err(err)?) })
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta()
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta()
    }

    fn __call__(&self, lam: f64) -> Complex64 {
        self.inner.eval(lam)
    }

    /// Frequency piece `m_j(lambda)`.
    fn piece(&self, j: i32, lam: f64) -> Complex64 {
        self.inner.piece(j, lam)
    }

    fn piece_sum(&self, lam: f64) -> Complex64 {
        self.inner.piece_sum(lam)
    }

    fn values(&self, spectrum: &PySpectrum) -> PyResult<Vec<Complex64>> {
        let spec = self.inner.clone();
        spectrum.inner.multiplier_values(|lam| spec.eval(lam)).map_err(err)
    }

    fn apply(&self, spectrum: &PySpectrum, f: Vec<Complex64>) -> PyResult<Vec<Complex64>> {
        check_len("f", f.len(), spectrum.inner.size())?;
        let spec = self.inner.clone();
        spectrum.inner.apply_multiplier(|lam| spec.eval(lam), &f).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Multiplier(theta={}, beta={}, nu={})", self.inner.theta(), self.inner.beta(), self.inner.nu())
    }
}

fn weight(g: &GroupModel, values: Vec<f64>) -> PyResult<Weight> {
    check_len("weight", values.len(), g.size())?;
    Weight::new(values).map_err(err)
}

/// `w(x) = max(|x|, h0)^a`.
#[pyfunction]
fn power_weight(group: &PyGroup, a: f64) -> Vec<f64> {
    w::power_weight(&group.inner, a).values().to_vec()
}

/// Muckenhoupt characteristic over all balls.
#[pyfunction]
fn ap_characteristic(py: Python<'_>, group: &PyGroup, weight_values: Vec<f64>, p: f64) -> PyResult<f64> {
    let wt = weight(&group.inner, weight_values)?;
    let g = group.inner.clone();
    py.detach(|| w::ap_characteristic(&g, &wt, p)).map_err(err)
}

/// Reverse Hölder characteristic over all balls.
#[pyfunction]
fn rh_characteristic(py: Python<'_>, group: &PyGroup, weight_values: Vec<f64>, q: f64) -> PyResult<f64> {
    let wt = weight(&group.inner, weight_values)?;
    let g = group.inner.clone();
    py.detach(|| w::rh_characteristic(&g, &wt, q)).map_err(err)
}

/// `"sparse1"`, `"sparse2"` or `"inadmissible"`, decided in exact arithmetic.
#[pyfunction]
fn admissible_region(q: f64, beta: f64, r1: f64, r2: f64) -> PyResult<&'static str> {
    Ok(match sparse::admissible_region(q, beta, r1, r2).map_err(err)?.region() {
        Region::Sparse1 => "sparse1",
        Region::Sparse2 => "sparse2",
        Region::Inadmissible => "inadmissible",
    })
}

fn thresholds_dict<'py>(py: Python<'py>, th: Thresholds) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("mode", th.mode.to_string())?;
    d.set_item("p_low", th.p_low.map(|r| r.to_string()))?;
    d.set_item("s_high", th.s_high.map(|r| r.to_string()))?;
    Ok(d)
}

/// Exponent thresholds as exact fractions: `kind` is `multiplier` (decay `beta`),
/// `riesz` (order `beta`) or `dispersive` (needs `alpha`).
#[pyfunction]
#[pyo3(signature = (q, beta, kind = "multiplier", alpha = None))]
fn thresholds<'py>(py: Python<'py>, q: f64, beta: f64, kind: &str, alpha: Option<f64>) -> PyResult<Bound<'py, PyDict>> {
    let th = match (kind, alpha) {
        ("multiplier", None) => quantitative::multiplier_thresholds(q, beta),
        ("riesz", None) => quantitative::riesz_thresholds(q, beta),
        ("dispersive", Some(a)) => quantitative::dispersive_thresholds(q, a, beta),
        _ => return Err(PyValueError::new_err(format!("unknown threshold kind '{kind}' (alpha only for dispersive)"))),
    }
    .map_err(err)?;
    thresholds_dict(py, th)
}

/// Random-trial sparse domination of a multiplier; returns summary statistics.
#[pyfunction]
#[pyo3(signature = (spectrum, multiplier, r1 = 1.0, r2 = 2.0, trials = 100, seed = 1, mu = 0.5))]
#[allow(clippy::too_many_arguments)]
fn sparse_domination<'py>(
    py: Python<'py>,
    spectrum: &PySpectrum,
    multiplier: &PyMultiplier,
    r1: f64,
    r2: f64,
    trials: usize,
    seed: u64,
    mu: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let (g, dec, spec) = (spectrum.group.clone(), spectrum.inner.clone(), multiplier.inner.clone());
    let stats = py
        .detach(|| {
            let family = build_dyadic_grids(&g, mu, seed)?;
            domination_experiment(&g, &dec, &spec, &family, r1, r2, trials, seed)
        })
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("max_ratio", stats.max_ratio)?;
    d.set_item("median_ratio", stats.median_ratio)?;
    d.set_item("dual_gap", stats.dual_gap)?;
    d.set_item("min_eta", stats.min_eta)?;
    d.set_item("families", stats.families)?;
    d.set_item("members", stats.members)?;
    d.set_item("clamped_fraction", stats.clamped_fraction)?;
    d.set_item("ratios", stats.rows.iter().map(|r| r.ratio).collect::<Vec<_>>())?;
    Ok(d)
}

/// Runs a harness suite with `section.key` overrides; returns `{name: (value, verdict)}`.
#[pyfunction]
#[pyo3(signature = (suite, overrides = None))]
fn run_experiment<'py>(
    py: Python<'py>,
    suite: &str,
    overrides: Option<BTreeMap<String, String>>,
) -> PyResult<Bound<'py, PyDict>> {
    let o: Vec<(String, String)> = overrides.unwrap_or_default().into_iter().collect();
    let cfg = ExperimentConfig::resolve(&BTreeMap::new(), &o).map_err(err)?;
    let report = py.detach(|| run_suite(suite, &cfg)).map_err(err)?;
    let d = PyDict::new(py);
    for c in &report.checks {
        d.set_item(&c.name, (c.value, c.verdict().as_str()))?;
    }
    Ok(d)
}

#[pymodule]
fn stratified_sparse_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGroup>()?;
    m.add_class::<PySpectrum>()?;
    m.add_class::<PyMultiplier>()?;
    m.add_function(wrap_pyfunction!(power_weight, m)?)?;
    m.add_function(wrap_pyfunction!(ap_characteristic, m)?)?;
    m.add_function(wrap_pyfunction!(rh_characteristic, m)?)?;
    m.add_function(wrap_pyfunction!(admissible_region, m)?)?;
    m.add_function(wrap_pyfunction!(thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(sparse_domination, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
