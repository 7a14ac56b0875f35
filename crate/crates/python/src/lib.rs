//! Python bindings: states, distances, environments, mixtures, planning and
//! the experiment commands.

use std::path::PathBuf;
use std::sync::Arc;

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use qaixi::agent::{qaixi_policy, root_q_values, value, PlanningConfig};
use qaixi::env::{
    best_lhv_win_rate, ks_uncolourability_check, EnvironmentFile, EnvironmentModel, KsSet,
};
use qaixi::harness::{
    chsh_class, commuting_class, convergence_class, deterministic_class, run_experiment,
    ExperimentConfig, ExperimentKind,
};
use qaixi::induction::{gap_statistics, mixture_init, posterior_divergence, MixtureState};
use qaixi::linalg::{self, ComplexMatrix};
use qaixi::Error;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::Argument(_) | Error::Config(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

trait OrPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> OrPy<T> for qaixi::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(py_err)
    }
}

fn matrix_rows(m: &ComplexMatrix) -> Vec<Vec<Complex64>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect()).collect()
}

#[pyclass(name = "DensityOperator", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDensity(linalg::DensityOperator);

#[pymethods]
impl PyDensity {
    /// From a square nested list of complex numbers; `dims` splits it into
    /// subsystems.
    #[new]
    #[pyo3(signature = (rows, dims=None))]
    fn new(rows: Vec<Vec<Complex64>>, dims: Option<Vec<usize>>) -> PyResult<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err("matrix must be square"));
        }
        let flat: Vec<Complex64> = rows.into_iter().flatten().collect();
        let m = ComplexMatrix::new(n, n, &flat).py()?;
        let rho = linalg::DensityOperator::with_dims(m, dims.unwrap_or_else(|| vec![n])).py()?;
        Ok(Self(rho))
    }

    #[staticmethod]
    fn maximally_mixed(d: usize) -> Self {
        Self(linalg::DensityOperator::maximally_mixed(d))
    }

    #[staticmethod]
    fn basis(d: usize, i: usize) -> PyResult<Self> {
        Ok(Self(linalg::DensityOperator::basis(d, i).py()?))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.0.dims().to_vec()
    }

    fn trace(&self) -> f64 {
        self.0.trace()
    }

    fn purity(&self) -> f64 {
        self.0.purity()
    }

    fn eigenvalues(&self) -> Vec<f64> {
        self.0.eigenvalues()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        matrix_rows(self.0.matrix())
    }

    fn tensor(&self, other: &PyDensity) -> Self {
        Self(self.0.tensor(&other.0))
    }

    fn partial_trace(&self, keep: Vec<usize>) -> PyResult<Self> {
        Ok(Self(linalg::partial_trace(&self.0, &keep).py()?))
    }

    fn __repr__(&self) -> String {
        format!("DensityOperator(dims={:?}, trace={:.6})", self.0.dims(), self.0.trace())
    }
}

#[pyfunction]
fn trace_distance(rho: &PyDensity, sigma: &PyDensity) -> PyResult<f64> {
    linalg::trace_distance(&rho.0, &sigma.0).py()
}

/// Natural-log relative entropy; `inf` outside the support.
#[pyfunction]
fn relative_entropy(rho: &PyDensity, sigma: &PyDensity) -> PyResult<f64> {
    linalg::relative_entropy(&rho.0, &sigma.0).py()
}

#[pyfunction]
fn von_neumann_entropy(rho: &PyDensity) -> f64 {
    linalg::von_neumann_entropy(&rho.0)
}

#[pyclass(name = "Environment", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyEnvironment(EnvironmentModel);

#[pymethods]
impl PyEnvironment {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self(EnvironmentFile::from_json(text).py()?.to_model().py()?))
    }

    fn to_json(&self) -> PyResult<String> {
        EnvironmentFile::from_model(&self.0).to_json().py()
    }

    #[getter]
    fn name(&self) -> String {
        self.0.name().to_string()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    #[getter]
    fn description_length(&self) -> u32 {
        self.0.description_length()
    }

    fn action_ids(&self) -> Vec<String> {
        self.0.actions().iter().map(|a| a.id.clone()).collect()
    }

    fn initial_state(&self) -> PyDensity {
        PyDensity(self.0.initial_state().clone())
    }

    /// Outcome probabilities of `action` on `state` (default: the initial
    /// state).
    #[pyo3(signature = (action, state=None))]
    fn distribution(&self, action: &str, state: Option<&PyDensity>) -> PyResult<Vec<f64>> {
        let spec = self.0.action(action).py()?;
        let Some(instr) = spec.instrument_ref() else {
            return Err(PyValueError::new_err(format!("action `{action}` has no outcomes")));
        };
        let rho = state.map_or_else(|| self.0.initial_state(), |s| &s.0);
        instr.distribution(rho).py()
    }

    fn __repr__(&self) -> String {
        format!("Environment({:?}, dim={})", self.0.name(), self.0.dim())
    }
}

/// A built-in class: `converge`, `chsh`, `commuting` or `deterministic`.
#[pyfunction]
fn builtin_class(name: &str) -> PyResult<Vec<PyEnvironment>> {
    let class = match name {
        "converge" => convergence_class(),
        "chsh" => chsh_class(),
        "commuting" => commuting_class(),
        "deterministic" => deterministic_class(),
        other => return Err(PyValueError::new_err(format!("unknown class `{other}`"))),
    }
    .py()?;
    Ok(class.into_iter().map(PyEnvironment).collect())
}

#[pyclass(name = "Mixture", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMixture(Arc<MixtureState>);

#[pymethods]
impl PyMixture {
    #[new]
    fn new(class: Vec<PyRef<'_, PyEnvironment>>) -> PyResult<Self> {
        let models = class.iter().map(|e| e.0.clone()).collect();
        Ok(Self(Arc::new(mixture_init(models).py()?)))
    }

    fn names(&self) -> Vec<String> {
        self.0.hypotheses().iter().map(|h| h.name().to_string()).collect()
    }

    fn weights(&self) -> Vec<f64> {
        self.0.weights().to_vec()
    }

    fn prior(&self) -> Vec<f64> {
        self.0.prior().to_vec()
    }

    fn predictive(&self, action: &str) -> PyResult<Vec<f64>> {
        self.0.predictive_distribution(action).py()
    }

    /// Posterior after observing `outcome` (None for a unitary action).
    #[pyo3(signature = (action, outcome=None))]
    fn update(&self, action: &str, outcome: Option<usize>) -> PyResult<Self> {
        Ok(Self(Arc::new(self.0.update(action, outcome).py()?)))
    }

    fn operator(&self) -> PyDensity {
        PyDensity(self.0.operator())
    }

    fn divergence(&self, truth_state: &PyDensity) -> PyResult<f64> {
        posterior_divergence(&self.0, &truth_state.0).py()
    }

    /// `(g, d0_bound)` for the hypothesis named `truth`.
    fn gap(&self, truth: &str) -> PyResult<(f64, f64)> {
        let i = self
            .0
            .index_of(truth)
            .ok_or_else(|| PyValueError::new_err(format!("no hypothesis `{truth}`")))?;
        let g = gap_statistics(self.0.hypotheses(), i).py()?;
        Ok((g.g, g.d0_bound))
    }
}

/// Expectimax value of the mixture over `horizon` cycles.
#[pyfunction]
fn plan_value(mixture: &PyMixture, horizon: usize, gamma: f64) -> PyResult<f64> {
    let cfg = PlanningConfig::new(horizon, gamma).py()?;
    value(&mixture.0, &cfg, horizon).py()
}

/// `(chosen action, [(action, q)])`.
#[pyfunction]
fn plan(mixture: &PyMixture, horizon: usize, gamma: f64) -> PyResult<(String, Vec<(String, f64)>)> {
    let cfg = PlanningConfig::new(horizon, gamma).py()?;
    Ok((qaixi_policy(&mixture.0, &cfg).py()?, root_q_values(&mixture.0, &cfg).py()?))
}

/// `(colourable, valid assignments)` for the 18-vector set or a JSON set.
#[pyfunction]
#[pyo3(signature = (set_json=None))]
fn ks_check(set_json: Option<&str>) -> PyResult<(bool, u64)> {
    let set = match set_json {
        Some(text) => KsSet::from_json(text).py()?,
        None => KsSet::cabello18(),
    };
    let c = ks_uncolourability_check(&set).py()?;
    Ok((c.colourable, c.valid_assignments))
}

#[pyfunction]
fn lhv_max_win_rate() -> f64 {
    best_lhv_win_rate()
}

/// Runs a harness command (`converge`, `chsh`, `ks`, `value`, `run`) and
/// returns its report as a JSON string.
#[pyfunction]
#[pyo3(signature = (kind, seed, out, episodes=200, cycles=500, horizon=3, gamma=0.9, class_dir=None, truth=None))]
#[allow(clippy::too_many_arguments)]
fn run(
    kind: &str,
    seed: u64,
    out: PathBuf,
    episodes: usize,
    cycles: usize,
    horizon: usize,
    gamma: f64,
    class_dir: Option<PathBuf>,
    truth: Option<String>,
) -> PyResult<String> {
    let kind = match kind {
        "converge" => ExperimentKind::Converge,
        "chsh" => ExperimentKind::Chsh,
        "ks" => ExperimentKind::Ks,
        "value" => ExperimentKind::Value,
        "run" => ExperimentKind::Run,
        other => return Err(PyValueError::new_err(format!("unknown command `{other}`"))),
    };
    let mut cfg = ExperimentConfig::new(kind, seed, out);
    cfg.episodes = episodes;
    cfg.cycles = cycles;
    cfg.horizon = horizon;
    cfg.gamma = gamma;
    cfg.class_dir = class_dir;
    cfg.truth = truth;
    Ok(run_experiment(&cfg).py()?.to_string())
}

#[pymodule]
fn qaixi_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensity>()?;
    m.add_class::<PyEnvironment>()?;
    m.add_class::<PyMixture>()?;
    m.add_function(wrap_pyfunction!(trace_distance, m)?)?;
    m.add_function(wrap_pyfunction!(relative_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(von_neumann_entropy, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_class, m)?)?;
    m.add_function(wrap_pyfunction!(plan_value, m)?)?;
    m.add_function(wrap_pyfunction!(plan, m)?)?;
    m.add_function(wrap_pyfunction!(ks_check, m)?)?;
    m.add_function(wrap_pyfunction!(lhv_max_win_rate, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
