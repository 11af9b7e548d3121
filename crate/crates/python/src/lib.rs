//! Python bindings: spectra, samplers, the mean and stochastic dynamics,
//! rate fitting, the lemma verifiers and the experiment runner.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rankone_core::analysis::{self, BoundCheck};
use rankone_core::cli::{self, Overrides};
use rankone_core::dynamics::{self, IterationConfig};
use rankone_core::hilbert::{self, HilbertVector};
use rankone_core::sampler;
use rankone_core::{Error, SamplerKind, SpectrumFamily};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::DimensionMismatch { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn vector(coeffs: Vec<f64>) -> PyResult<HilbertVector> {
    HilbertVector::new(coeffs).map_err(py_err)
}

/// Eigenvalues of the covariance operator, rescaled into `(0, 1/2)`.
#[pyclass(name = "Spectrum", module = "rankone", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySpectrum(hilbert::Spectrum);

#[pymethods]
impl PySpectrum {
    /// `λ_i = c · i^{-p}` for `i = 1..d`.
    #[staticmethod]
    fn power_law(c: f64, p: f64, d: usize) -> PyResult<Self> {
        hilbert::make_spectrum(SpectrumFamily::PowerLaw { c, p }, d)
            .map(PySpectrum)
            .map_err(py_err)
    }

    /// `λ_i = c · r^{i-1}` for `i = 1..d`.
    #[staticmethod]
    fn geometric(c: f64, r: f64, d: usize) -> PyResult<Self> {
        hilbert::make_spectrum(SpectrumFamily::Geometric { c, r }, d)
            .map(PySpectrum)
            .map_err(py_err)
    }

    #[staticmethod]
    fn explicit(values: Vec<f64>) -> PyResult<Self> {
        let d = values.len();
        hilbert::make_spectrum(SpectrumFamily::Explicit { values }, d)
            .map(PySpectrum)
            .map_err(py_err)
    }

    #[getter]
    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    /// Factor the raw eigenvalues were multiplied by.
    #[getter]
    fn scale(&self) -> f64 {
        self.0.scale()
    }

    fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// `K_β = Σ λ_i^{1-β}`.
    fn k_sum(&self, beta: f64) -> f64 {
        self.0.k_sum(beta)
    }

    fn __len__(&self) -> usize {
        self.0.dim()
    }

    fn __repr__(&self) -> String {
        format!("Spectrum(d={}, largest={}, trace={})", self.0.dim(), self.0.largest(), self.0.trace())
    }
}

/// A feature-vector distribution bound to a spectrum and a seed.
#[pyclass(name = "Sampler", module = "rankone", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PySampler(sampler::SamplerSpec);

#[pymethods]
impl PySampler {
    /// `kind` is one of `"gff"`, `"gamma-sym"`, `"coordinate-bounded"`.
    #[new]
    #[pyo3(signature = (kind, spectrum, seed = 0))]
    fn new(kind: &str, spectrum: &PySpectrum, seed: u64) -> PyResult<Self> {
        let kind: SamplerKind = kind.parse().map_err(py_err)?;
        Ok(PySampler(sampler::SamplerSpec::new(kind, spectrum.0.clone(), seed)))
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.0.kind().name()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.0.seed()
    }

    /// `n` draws from stream `stream`, as a list of coefficient lists.
    #[pyo3(signature = (n, stream = 0))]
    fn sample(&self, n: usize, stream: u64) -> Vec<Vec<f64>> {
        let mut rng = self.0.stream(stream);
        (0..n).map(|_| self.0.sample(&mut rng).into_coeffs()).collect()
    }

    /// `E‖x‖²`
    fn second_moment(&self) -> f64 {
        self.0.second_moment()
    }

    /// `E‖x‖⁴`
    fn fourth_moment(&self) -> f64 {
        self.0.fourth_moment()
    }

    /// Closed-form `E[⟨θ,x⟩² φ_β(x)]`.
    fn assumption3_lhs(&self, theta: Vec<f64>, beta: f64) -> PyResult<f64> {
        sampler::assumption3_lhs(&self.0, &vector(theta)?, beta).map_err(py_err)
    }
}

/// `φ_β(θ) = Σ λ_i^{-β} θ_i²`.
#[pyfunction]
fn phi_norm(theta: Vec<f64>, spectrum: &PySpectrum, beta: f64) -> PyResult<f64> {
    hilbert::phi_norm(&vector(theta)?, &spectrum.0, beta).map_err(py_err)
}

/// `T_x θ = θ − γ⟨θ,x⟩x`.
#[pyfunction]
fn apply_t_x(theta: Vec<f64>, x: Vec<f64>, gamma: f64) -> PyResult<Vec<f64>> {
    hilbert::apply_t_x(&vector(theta)?, &vector(x)?, gamma)
        .map(HilbertVector::into_coeffs)
        .map_err(py_err)
}

/// `T^n θ0`, the mean of the stochastic iterate after `n` steps.
#[pyfunction]
fn mean_iterate(theta0: Vec<f64>, spectrum: &PySpectrum, gamma: f64, n: usize) -> PyResult<Vec<f64>> {
    dynamics::mean_iterate(&vector(theta0)?, &spectrum.0, gamma, n)
        .map(HilbertVector::into_coeffs)
        .map_err(py_err)
}

/// `‖T^n θ0‖_κ²`.
#[pyfunction]
fn mean_iterate_phi(theta0: Vec<f64>, spectrum: &PySpectrum, gamma: f64, n: usize, kappa: f64) -> PyResult<f64> {
    dynamics::mean_iterate_phi(&vector(theta0)?, &spectrum.0, gamma, n, kappa).map_err(py_err)
}

/// Monte Carlo ensemble of stochastic trajectories. Returns a dict with
/// `steps`, `betas`, `mean[k][j]`, `stderr[k][j]`, `monotone` and `diverged`.
#[pyfunction]
#[pyo3(signature = (sampler, theta0, gamma, n_steps, replicas = 1, betas = vec![0.0]))]
fn ensemble<'py>(
    py: Python<'py>,
    sampler: &PySampler,
    theta0: Vec<f64>,
    gamma: f64,
    n_steps: usize,
    replicas: usize,
    betas: Vec<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let config = IterationConfig::new(sampler.0.clone(), vector(theta0)?, gamma, n_steps)
        .map_err(py_err)?
        .with_replicas(replicas)
        .with_betas(betas);
    let stats = py.detach(|| dynamics::ensemble(&config)).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("steps", &stats.steps)?;
    d.set_item("betas", &stats.betas)?;
    let mean: Vec<Vec<f64>> = stats.means.iter().map(|r| r.iter().map(|e| e.mean).collect()).collect();
    let se: Vec<Vec<f64>> = stats.means.iter().map(|r| r.iter().map(|e| e.stderr).collect()).collect();
    d.set_item("mean", mean)?;
    d.set_item("stderr", se)?;
    d.set_item("monotone", &stats.monotone)?;
    d.set_item("diverged", &stats.diverged)?;
    Ok(d)
}

/// Least-squares slope of `log value` against `log n` over `window`.
#[pyfunction]
fn fit_decay_rate<'py>(
    py: Python<'py>,
    ns: Vec<f64>,
    values: Vec<f64>,
    window: (f64, f64),
) -> PyResult<Bound<'py, PyDict>> {
    if ns.len() != values.len() {
        return Err(PyValueError::new_err("ns and values must have the same length"));
    }
    let series: Vec<(f64, f64)> = ns.into_iter().zip(values).collect();
    let r = analysis::fit_decay_rate(&series, window).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("exponent", r.exponent)?;
    d.set_item("stderr", r.stderr)?;
    d.set_item("prefactor", r.prefactor)?;
    d.set_item("points_used", r.points_used)?;
    Ok(d)
}

#[pyfunction]
fn gamma_function(z: f64) -> PyResult<f64> {
    analysis::gamma_function(z).map_err(py_err)
}

fn check_dict<'py>(py: Python<'py>, c: &BoundCheck) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("name", &c.name)?;
    d.set_item("grid_points", c.grid_points)?;
    d.set_item("violations", c.violations)?;
    d.set_item("worst_margin", c.worst_margin)?;
    d.set_item("passed", c.passed())?;
    Ok(d)
}

#[pyfunction]
fn neutral_recursion_verify<'py>(py: Python<'py>, a0: f64, w: f64, n_max: usize) -> PyResult<Bound<'py, PyDict>> {
    let c = analysis::neutral_recursion_verify(a0, w, n_max).map_err(py_err)?;
    check_dict(py, &c)
}

#[pyfunction]
fn f_lambda_verify<'py>(py: Python<'py>, m: f64, tau: f64, grid_size: usize) -> PyResult<Bound<'py, PyDict>> {
    let r = analysis::f_lambda_verify(m, tau, grid_size).map_err(py_err)?;
    let d = check_dict(py, &r.check)?;
    d.set_item("lambda_star", r.lambda_star)?;
    d.set_item("f_star", r.f_star)?;
    d.set_item("lower", r.lower)?;
    d.set_item("upper", r.upper)?;
    Ok(d)
}

/// Runs an experiment config; returns `{"passed", "dir", "summary"}`.
#[pyfunction]
#[pyo3(signature = (config, out = None, seed = None, replicas = None, steps = None))]
fn run_config<'py>(
    py: Python<'py>,
    config: PathBuf,
    out: Option<PathBuf>,
    seed: Option<u64>,
    replicas: Option<usize>,
    steps: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let overrides = Overrides { seed, out, replicas, steps };
    let report = py
        .detach(|| cli::run(&config, &overrides))
        .map_err(|f| match f {
            cli::Failure::Input(m) => PyValueError::new_err(m),
            cli::Failure::Check(m) => PyRuntimeError::new_err(m),
        })?;
    let d = PyDict::new(py);
    d.set_item("passed", report.outcome.passed())?;
    d.set_item("dir", report.dir.to_string_lossy().into_owned())?;
    let summary: Vec<(String, f64, f64, bool)> = report
        .outcome
        .summary
        .iter()
        .map(|r| (r.name.clone(), r.value, r.threshold, r.passed))
        .collect();
    d.set_item("summary", summary)?;
    Ok(d)
}

#[pymodule]
pub fn rankone(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", rankone_core::VERSION)?;
    m.add_class::<PySpectrum>()?;
    m.add_class::<PySampler>()?;
    m.add_function(wrap_pyfunction!(phi_norm, m)?)?;
    m.add_function(wrap_pyfunction!(apply_t_x, m)?)?;
    m.add_function(wrap_pyfunction!(mean_iterate, m)?)?;
    m.add_function(wrap_pyfunction!(mean_iterate_phi, m)?)?;
    m.add_function(wrap_pyfunction!(ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(fit_decay_rate, m)?)?;
    m.add_function(wrap_pyfunction!(gamma_function, m)?)?;
    m.add_function(wrap_pyfunction!(neutral_recursion_verify, m)?)?;
    m.add_function(wrap_pyfunction!(f_lambda_verify, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    Ok(())
}
