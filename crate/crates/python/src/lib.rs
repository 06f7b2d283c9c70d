//! Python bindings for `valign`. Strategies, agents and values are passed as
//! the same strings the CLI accepts (`"random:0.3"`, `"tft"`, `"alpha"`,
//! `"gain"`, ...).

#![allow(clippy::too_many_arguments)]

use std::fmt::Display;
use std::str::FromStr;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use valign::alignment::{uniform_grid, ValueModel};
use valign::values::{GainScale, Preference};
use valign::{
    AgentId, AlignmentEstimate as Estimate, PayoffMatrix, RngSpec, State, StrategyProfile,
    StrategySpace, StrategySpec, SweepParams, Tolerance, ValueAssignment, ValueId,
};

fn err(e: impl Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse<T: FromStr>(s: &str) -> PyResult<T>
where
    T::Err: Display,
{
    s.parse().map_err(err)
}

fn state((a, b): (u64, u64)) -> State {
    State::new(a, b)
}

fn profile(alpha: &str, beta: &str) -> PyResult<StrategyProfile> {
    StrategyProfile::from_specs(parse(alpha)?, parse(beta)?).map_err(err)
}

fn params(path_length: usize, num_paths: usize, seed: u64, exact: bool) -> SweepParams {
    if exact {
        SweepParams::exact(path_length)
    } else {
        SweepParams::monte_carlo(path_length, num_paths, seed)
    }
}

/// Alignment estimate of one agent under one value.
#[pyclass(name = "AlignmentEstimate", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyEstimate {
    #[pyo3(get)]
    mean: f64,
    #[pyo3(get)]
    std_error: f64,
    #[pyo3(get)]
    num_paths: usize,
    #[pyo3(get)]
    path_length: usize,
    #[pyo3(get)]
    exact: bool,
}

#[pymethods]
impl PyEstimate {
    fn __repr__(&self) -> String {
        format!(
            "AlignmentEstimate(mean={}, std_error={}, num_paths={}, path_length={}, exact={})",
            self.mean,
            self.std_error,
            self.num_paths,
            self.path_length,
            if self.exact { "True" } else { "False" }
        )
    }
}

impl From<Estimate> for PyEstimate {
    fn from(e: Estimate) -> Self {
        Self {
            mean: e.mean,
            std_error: e.std_error,
            num_paths: e.num_paths,
            path_length: e.path_length,
            exact: e.exact,
        }
    }
}

/// Gini index of a wealth pair.
#[pyfunction]
fn gini(wealth: (u64, u64)) -> f64 {
    valign::values::gini(&state(wealth))
}

/// Equality preference of `agent` for the transition `pre -> post`.
#[pyfunction]
fn prf_equality(agent: &str, pre: (u64, u64), post: (u64, u64)) -> PyResult<f64> {
    Preference::new(ValueId::Equality, &PayoffMatrix::default())
        .evaluate(parse(agent)?, &state(pre), &state(post))
        .map_err(err)
}

/// Gain preference of `agent` for `pre -> post` under the default matrix.
#[pyfunction]
fn prf_gain(agent: &str, pre: (u64, u64), post: (u64, u64)) -> PyResult<f64> {
    valign::values::prf_gain(&GainScale::default(), parse(agent)?, &state(pre), &state(post)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (alpha, beta, agent, value, path_length=10, num_paths=10_000, seed=42))]
fn alignment_mc(
    py: Python<'_>,
    alpha: &str,
    beta: &str,
    agent: &str,
    value: &str,
    path_length: usize,
    num_paths: usize,
    seed: u64,
) -> PyResult<PyEstimate> {
    let mut q = valign::AlignmentQuery::new(profile(alpha, beta)?, parse(agent)?, parse(value)?, RngSpec::new(seed));
    q.path_length = path_length;
    q.num_paths = num_paths;
    let model = ValueModel::default();
    py.detach(|| valign::alignment_mc(&model, &q))
        .map(Into::into)
        .map_err(err)
}

#[pyfunction]
#[pyo3(signature = (alpha, beta, agent, value, path_length=10))]
fn alignment_exact(
    py: Python<'_>,
    alpha: &str,
    beta: &str,
    agent: &str,
    value: &str,
    path_length: usize,
) -> PyResult<PyEstimate> {
    let p = profile(alpha, beta)?;
    let (agent, value): (AgentId, ValueId) = (parse(agent)?, parse(value)?);
    let model = ValueModel::default();
    py.detach(|| valign::alignment_exact(&model, &p, agent, value, path_length))
        .map(Into::into)
        .map_err(err)
}

fn means(m: Vec<Vec<Estimate>>) -> Vec<Vec<PyEstimate>> {
    m.into_iter().map(|r| r.into_iter().map(Into::into).collect()).collect()
}

/// Alignment matrix over random-action profiles, indexed `[p_alpha][p_beta]`.
#[pyfunction]
#[pyo3(signature = (grid, agent, value, path_length=10, num_paths=10_000, seed=42, exact=false))]
fn sweep_random_grid(
    py: Python<'_>,
    grid: Vec<f64>,
    agent: &str,
    value: &str,
    path_length: usize,
    num_paths: usize,
    seed: u64,
    exact: bool,
) -> PyResult<Vec<Vec<PyEstimate>>> {
    let (agent, value): (AgentId, ValueId) = (parse(agent)?, parse(value)?);
    let p = params(path_length, num_paths, seed, exact);
    let model = ValueModel::default();
    py.detach(|| valign::sweep_random_grid(&model, &grid, agent, value, &p))
        .map(means)
        .map_err(err)
}

/// Alignment matrix indexed `[alpha strategy][p_beta]`.
#[pyfunction]
#[pyo3(signature = (alpha_strategies, beta_grid, agent, value, path_length=10, num_paths=10_000, seed=42, exact=false))]
fn sweep_heterogeneous(
    py: Python<'_>,
    alpha_strategies: Vec<String>,
    beta_grid: Vec<f64>,
    agent: &str,
    value: &str,
    path_length: usize,
    num_paths: usize,
    seed: u64,
    exact: bool,
) -> PyResult<Vec<Vec<PyEstimate>>> {
    let specs = alpha_strategies
        .iter()
        .map(|s| parse::<StrategySpec>(s))
        .collect::<PyResult<Vec<_>>>()?;
    let (agent, value): (AgentId, ValueId) = (parse(agent)?, parse(value)?);
    let p = params(path_length, num_paths, seed, exact);
    let model = ValueModel::default();
    py.detach(|| valign::sweep_heterogeneous(&model, &specs, &beta_grid, agent, value, &p))
        .map(means)
        .map_err(err)
}

/// Equilibria and Pareto optimal profiles, as a dict of `(alpha, beta)`
/// strategy-string pairs.
#[pyfunction]
#[pyo3(signature = (
    value_alpha, value_beta, space="random", grid=None, alpha_strategies=None,
    path_length=10, num_paths=10_000, seed=42, exact=false, tolerance=None,
))]
fn find_alignment_equilibria<'py>(
    py: Python<'py>,
    value_alpha: &str,
    value_beta: &str,
    space: &str,
    grid: Option<Vec<f64>>,
    alpha_strategies: Option<Vec<String>>,
    path_length: usize,
    num_paths: usize,
    seed: u64,
    exact: bool,
    tolerance: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let grid = grid.unwrap_or_else(|| uniform_grid(11));
    let assign = ValueAssignment::new(parse(value_alpha)?, parse(value_beta)?);
    let space = match space {
        "random" => StrategySpace::random_grid(&grid),
        "heterogeneous" => {
            let alpha = match alpha_strategies {
                Some(list) => list.iter().map(|s| parse(s)).collect::<PyResult<Vec<_>>>()?,
                None => StrategySpec::NAMED.to_vec(),
            };
            StrategySpace::heterogeneous(&alpha, &grid)
        }
        other => return Err(err(format!("unknown space `{other}`"))),
    }
    .map_err(err)?;
    let p = params(path_length, num_paths, seed, exact);
    let model = ValueModel::default();
    let report = py
        .detach(|| valign::find_alignment_equilibria(&model, &space, assign, &p, tolerance.map(Tolerance::Fixed)))
        .map_err(err)?;

    let names = |ids: &[valign::equilibria::ProfileId]| -> Vec<(String, String)> {
        ids.iter()
            .map(|&id| {
                let (a, b) = space.specs(id);
                (a.to_string(), b.to_string())
            })
            .collect()
    };
    let table = PyDict::new(py);
    for (&id, cell) in report.table.iter() {
        let (a, b) = space.specs(id);
        table.set_item((a.to_string(), b.to_string()), (cell.alpha.mean, cell.beta.mean))?;
    }
    let out = PyDict::new(py);
    out.set_item("equilibria", names(&report.equilibria))?;
    out.set_item("pareto_optimal", names(&report.pareto_optimal))?;
    out.set_item("alignment_table", table)?;
    Ok(out)
}

/// Pure Nash equilibria of the stage game, e.g. `["(D,D)"]`.
#[pyfunction]
#[pyo3(signature = (cc=(6, 6), cd=(0, 9), dc=(9, 0), dd=(3, 3)))]
fn classical_nash_check(cc: (u64, u64), cd: (u64, u64), dc: (u64, u64), dd: (u64, u64)) -> Vec<String> {
    let m = PayoffMatrix { cc, cd, dc, dd };
    valign::classical_nash_check(&m).iter().map(ToString::to_string).collect()
}

#[pymodule]
fn pyvalign(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyEstimate>()?;
    m.add_function(wrap_pyfunction!(gini, m)?)?;
    m.add_function(wrap_pyfunction!(prf_equality, m)?)?;
    m.add_function(wrap_pyfunction!(prf_gain, m)?)?;
    m.add_function(wrap_pyfunction!(alignment_mc, m)?)?;
    m.add_function(wrap_pyfunction!(alignment_exact, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_random_grid, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_heterogeneous, m)?)?;
    m.add_function(wrap_pyfunction!(find_alignment_equilibria, m)?)?;
    m.add_function(wrap_pyfunction!(classical_nash_check, m)?)?;
    Ok(())
}
