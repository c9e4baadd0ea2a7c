//! Python bindings: the main types and operations exposed in-process.
//!
//! Instances and mechanisms are wrapped as opaque classes; reports come
//! back as plain dicts.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;
use sigpact::model::{self, Mechanism, PaymentScheme};
use sigpact::oracle::{ContractGrid, KUniformParams};
use sigpact::{Instance, SolveReport};

fn err(e: sigpact::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// A principal-agent instance with hidden states.
#[pyclass(name = "Instance", skip_from_py_object)]
#[derive(Clone)]
struct PyInstance {
    inner: Instance,
}

#[pymethods]
impl PyInstance {
    /// Build from dense data: prior, costs, rewards, and one row-stochastic
    /// matrix (list of action rows) per state.
    #[new]
    fn new(
        prior: Vec<f64>,
        costs: Vec<f64>,
        rewards: Vec<f64>,
        matrices: Vec<Vec<Vec<f64>>>,
    ) -> PyResult<Self> {
        Ok(PyInstance {
            inner: Instance::from_dense(prior, costs, rewards, matrices).map_err(err)?,
        })
    }

    #[getter]
    fn num_states(&self) -> usize {
        self.inner.num_states()
    }

    #[getter]
    fn num_actions(&self) -> usize {
        self.inner.num_actions()
    }

    #[getter]
    fn num_outcomes(&self) -> usize {
        self.inner.num_outcomes()
    }

    #[getter]
    fn prior(&self) -> Vec<f64> {
        self.inner.prior.clone()
    }

    #[getter]
    fn costs(&self) -> Vec<f64> {
        self.inner.costs.clone()
    }

    #[getter]
    fn rewards(&self) -> Vec<f64> {
        self.inner.rewards.clone()
    }

    /// All invariant violations, as strings; empty means valid.
    fn validate(&self) -> Vec<String> {
        self.inner.validate().iter().map(|v| v.to_string()).collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(states={}, actions={}, outcomes={})",
            self.inner.num_states(),
            self.inner.num_actions(),
            self.inner.num_outcomes()
        )
    }
}

/// A signaling scheme paired with payments and recommendations.
#[pyclass(name = "Mechanism", skip_from_py_object)]
#[derive(Clone)]
struct PyMechanism {
    inner: Mechanism,
}

#[pymethods]
impl PyMechanism {
    #[getter]
    fn num_signals(&self) -> usize {
        self.inner.num_signals()
    }

    #[getter]
    fn signals(&self) -> Vec<String> {
        self.inner.scheme.signal_ids.clone()
    }

    #[getter]
    fn pi(&self) -> Vec<Vec<f64>> {
        self.inner.scheme.pi.clone()
    }

    #[getter]
    fn recommendations(&self) -> Option<Vec<usize>> {
        self.inner.recommendations.clone()
    }

    /// Payment class tag: ambiguous / menu / single / linear-single /
    /// linear-menu.
    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner.payments {
            PaymentScheme::Ambiguous { .. } => "ambiguous",
            PaymentScheme::Menu { .. } => "menu",
            PaymentScheme::Single { .. } => "single",
            PaymentScheme::LinearSingle { .. } => "linear-single",
            PaymentScheme::LinearMenu { .. } => "linear-menu",
        }
    }

    fn __repr__(&self) -> String {
        format!("Mechanism(kind={}, signals={})", self.kind(), self.num_signals())
    }
}

fn report_dict<'py>(py: Python<'py>, report: &SolveReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("utility", report.utility)?;
    d.set_item("lp_value", report.diagnostics.lp_value)?;
    d.set_item("residual_ic", report.diagnostics.residual_ic)?;
    d.set_item("scaled_bound", report.diagnostics.scaled_bound)?;
    let params = PyDict::new(py);
    for (k, v) in &report.diagnostics.params {
        params.set_item(k, v)?;
    }
    d.set_item("params", params)?;
    if !report.diagnostics.grid_values.is_empty() {
        d.set_item("grid_values", report.diagnostics.grid_values.clone())?;
    }
    d.set_item("mechanism", PyMechanism { inner: report.mechanism.clone() })?;
    Ok(d)
}

#[pyfunction]
fn generate_prop2() -> PyInstance {
    PyInstance { inner: sigpact::gen::gen_prop2() }
}

#[pyfunction]
fn prop2_mechanism(epsilon: f64) -> PyResult<PyMechanism> {
    Ok(PyMechanism { inner: sigpact::gen::prop2_mechanism(epsilon).map_err(err)? })
}

#[pyfunction]
fn generate_prop4(delta: f64) -> PyResult<PyInstance> {
    Ok(PyInstance { inner: sigpact::gen::gen_prop4(delta).map_err(err)? })
}

#[pyfunction]
#[pyo3(signature = (n, m, num_states, seed, reward_bound=1.0))]
fn generate_random(
    n: usize,
    m: usize,
    num_states: usize,
    seed: u64,
    reward_bound: f64,
) -> PyResult<PyInstance> {
    Ok(PyInstance {
        inner: sigpact::gen::gen_random(n, m, num_states, seed, reward_bound).map_err(err)?,
    })
}

/// ζ-optimal ambiguous-contract pipeline.
#[pyfunction]
fn solve_amb<'py>(py: Python<'py>, inst: &PyInstance, zeta: f64) -> PyResult<Bound<'py, PyDict>> {
    let report = sigpact::amb::solve_amb(&inst.inner, zeta).map_err(err)?;
    report_dict(py, &report)
}

/// Grid search over single linear contracts.
#[pyfunction]
fn solve_single_linear<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    epsilon: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let report = sigpact::linear::solve_single_linear(&inst.inner, epsilon).map_err(err)?;
    report_dict(py, &report)
}

/// One LP over the (share, action) signal family.
#[pyfunction]
fn solve_menu_linear<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    epsilon: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let report = sigpact::linear::solve_menu_linear(&inst.inner, epsilon).map_err(err)?;
    report_dict(py, &report)
}

/// K-uniform belief decomposition solver with bounded payments.
#[pyfunction]
#[pyo3(signature = (inst, k, bound, epsilon=0.1))]
fn solve_kuniform<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    k: usize,
    bound: f64,
    epsilon: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let params = KUniformParams::new(k, bound, epsilon).map_err(err)?;
    let report = sigpact::oracle::solve_kuniform(&inst.inner, &params).map_err(err)?;
    report_dict(py, &report)
}

#[pyfunction]
#[pyo3(signature = (inst, grid_step, bound, budget=None))]
fn oracle_single<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    grid_step: f64,
    bound: f64,
    budget: Option<u128>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut grid = ContractGrid::new(grid_step, bound).map_err(err)?;
    if let Some(b) = budget {
        grid = grid.with_budget(b);
    }
    let report = sigpact::oracle::oracle_single(&inst.inner, &grid).map_err(err)?;
    report_dict(py, &report)
}

#[pyfunction]
#[pyo3(signature = (inst, grid_step, bound, budget=None))]
fn oracle_menu<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    grid_step: f64,
    bound: f64,
    budget: Option<u128>,
) -> PyResult<Bound<'py, PyDict>> {
    let mut grid = ContractGrid::new(grid_step, bound).map_err(err)?;
    if let Some(b) = budget {
        grid = grid.with_budget(b);
    }
    let report = sigpact::oracle::oracle_menu(&inst.inner, &grid).map_err(err)?;
    report_dict(py, &report)
}

/// Upper bound on every feasible mechanism's utility (the relaxation LP).
#[pyfunction]
fn amb_relaxation_value(inst: &PyInstance) -> PyResult<f64> {
    Ok(sigpact::amb::solve_amb_relaxation(&inst.inner).map_err(err)?.value)
}

/// Cheapest contract incentivizing the best action at an unnormalized
/// posterior; returns (payments, action, value).
#[pyfunction]
#[pyo3(signature = (inst, mass, bound=None))]
fn optimal_contract_for_posterior(
    inst: &PyInstance,
    mass: Vec<f64>,
    bound: Option<f64>,
) -> PyResult<(Vec<f64>, usize, f64)> {
    sigpact::oracle::optimal_contract_for_posterior(&inst.inner, &mass, bound).map_err(err)
}

#[pyfunction]
fn principal_utility(inst: &PyInstance, mech: &PyMechanism) -> PyResult<f64> {
    model::principal_utility(&inst.inner, &mech.inner).map_err(err)
}

/// IC report as a dict: max_violation, ir_ok, per-signal slacks.
#[pyfunction]
fn check_ic<'py>(
    py: Python<'py>,
    inst: &PyInstance,
    mech: &PyMechanism,
    tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let report = model::check_ic(&inst.inner, &mech.inner, tol).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("max_violation", report.max_violation)?;
    d.set_item("ir_ok", report.ir_ok)?;
    d.set_item("ic", report.is_ic(tol))?;
    let per: Vec<(String, usize, usize, f64)> = report
        .per_signal
        .iter()
        .map(|s| (s.signal_id.clone(), s.recommended, s.worst_deviation, s.slack))
        .collect();
    d.set_item("per_signal", per)?;
    Ok(d)
}

/// Merge signals inducing the same best response; utility is preserved.
#[pyfunction]
fn make_direct(inst: &PyInstance, mech: &PyMechanism) -> PyResult<PyMechanism> {
    Ok(PyMechanism { inner: model::make_direct(&inst.inner, &mech.inner).map_err(err)? })
}

/// Monte Carlo replay; returns (mean, stderr), reproducible per seed.
#[pyfunction]
fn simulate(
    inst: &PyInstance,
    mech: &PyMechanism,
    samples: u64,
    seed: u64,
) -> PyResult<(f64, f64)> {
    sigpact::oracle::simulate(&inst.inner, &mech.inner, samples, seed).map_err(err)
}

#[pymodule]
fn sigpact_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyInstance>()?;
    m.add_class::<PyMechanism>()?;
    m.add_function(wrap_pyfunction!(generate_prop2, m)?)?;
    m.add_function(wrap_pyfunction!(prop2_mechanism, m)?)?;
    m.add_function(wrap_pyfunction!(generate_prop4, m)?)?;
    m.add_function(wrap_pyfunction!(generate_random, m)?)?;
    m.add_function(wrap_pyfunction!(solve_amb, m)?)?;
    m.add_function(wrap_pyfunction!(solve_single_linear, m)?)?;
    m.add_function(wrap_pyfunction!(solve_menu_linear, m)?)?;
    m.add_function(wrap_pyfunction!(solve_kuniform, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_single, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_menu, m)?)?;
    m.add_function(wrap_pyfunction!(amb_relaxation_value, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_contract_for_posterior, m)?)?;
    m.add_function(wrap_pyfunction!(principal_utility, m)?)?;
    m.add_function(wrap_pyfunction!(check_ic, m)?)?;
    m.add_function(wrap_pyfunction!(make_direct, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
