//! Python bindings for the satlab toolkit: the mislabeling-risk bound, the
//! two generators, the tracing solver, the feature bank, and the decision
//! tree. Formulas cross the boundary as DIMACS text, assignments as 0/1
//! strings, models as JSON strings; errors raise `ValueError`.

// The #[pyfunction] expansion inserts PyErr-to-PyErr conversions.
#![allow(clippy::useless_conversion)]

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use satlab::cnf::{brute_force_sat, parse_dimacs, write_dimacs, Assignment};
use satlab::features::{feature_names, formula_features, LabeledMatrix};
use satlab::genlab::{gen_deceptive, gen_uniform, LabeledFormula};
use satlab::learn::{evaluate, train_tree, DecisionTree, TreeParams};
use satlab::walksat::{run_many, SolverParams, DEFAULT_STEPS_PER_VAR};

fn value_error(e: satlab::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse(dimacs: &str) -> PyResult<satlab::cnf::Formula> {
    parse_dimacs(dimacs).map_err(value_error)
}

fn parse_assignment(bits: &str) -> PyResult<Assignment> {
    Assignment::from_bit_string(bits).map_err(value_error)
}

fn solver_params(formula_n: u32, wp: f64, max_steps: Option<usize>) -> SolverParams {
    SolverParams { wp, max_steps: max_steps.unwrap_or(DEFAULT_STEPS_PER_VAR * formula_n as usize) }
}

fn formula_dict<'py>(py: Python<'py>, f: &LabeledFormula) -> PyResult<Bound<'py, PyDict>> {
    let sidecar = f.sidecar();
    let out = PyDict::new_bound(py);
    out.set_item("dimacs", write_dimacs(&f.formula))?;
    out.set_item(
        "label",
        match sidecar.label {
            satlab::genlab::Label::Sat => "sat",
            satlab::genlab::Label::Unsat => "unsat",
        },
    )?;
    out.set_item("n", sidecar.n)?;
    out.set_item("m", sidecar.m)?;
    out.set_item("r", sidecar.r)?;
    out.set_item("q", sidecar.q)?;
    out.set_item("seed", sidecar.seed)?;
    out.set_item("planted_assignment", sidecar.planted_assignment)?;
    Ok(out)
}

/// Upper bound f(r, n) on the per-formula satisfiability probability of a
/// uniform random 3-CNF at density r over n variables.
#[pyfunction]
fn bound_f(r: f64, n: u64) -> f64 {
    satlab::genlab::bound_f(r, n)
}

/// Large-n limit of `bound_f` at density r.
#[pyfunction]
fn bound_f_limit(r: f64) -> f64 {
    satlab::genlab::bound_f_limit(r)
}

/// The density where the large-n bound crosses 1, located to `tol`.
#[pyfunction]
#[pyo3(signature = (tol=1e-3))]
fn critical_density(tol: f64) -> PyResult<f64> {
    satlab::genlab::critical_density(tol).map_err(value_error)
}

/// log10 of the union-bound probability that a dataset of uniform formulas
/// contains at least one satisfiable (hence mislabeled) formula. Raises
/// `ValueError` when the bound is vacuous at this density.
#[pyfunction]
#[pyo3(signature = (r, n, dataset_size=1))]
fn unsat_risk(r: f64, n: u64, dataset_size: u64) -> PyResult<f64> {
    satlab::genlab::unsat_risk(r, n, dataset_size).map_err(value_error)
}

/// Expected satisfied-literal count of a kept deceptive clause at hardness q.
#[pyfunction]
fn mean_sat_literals(q: f64) -> PyResult<f64> {
    satlab::genlab::mean_sat_literals(q).map_err(value_error)
}

/// The hardness where `mean_sat_literals` crosses 3/2: (sqrt(5) - 1) / 2.
#[pyfunction]
fn balanced_q() -> f64 {
    satlab::genlab::balanced_q()
}

/// Generates a uniform random 3-CNF labeled unsatisfiable. Returns a dict
/// with the DIMACS text and the sidecar fields.
#[pyfunction]
fn gen_unsat(py: Python<'_>, n: u32, r: f64, seed: u64) -> PyResult<Bound<'_, PyDict>> {
    let f = gen_uniform(n, r, seed).map_err(value_error)?;
    formula_dict(py, &f)
}

/// Generates a deceptive planted 3-CNF labeled satisfiable, with hardness q.
#[pyfunction]
fn gen_sat(py: Python<'_>, n: u32, r: f64, q: f64, seed: u64) -> PyResult<Bound<'_, PyDict>> {
    let f = gen_deceptive(n, r, q, seed).map_err(value_error)?;
    formula_dict(py, &f)
}

/// Number of clauses the 0/1-string assignment violates in the DIMACS
/// formula.
#[pyfunction]
fn count_unsat(dimacs: &str, assignment: &str) -> PyResult<usize> {
    let f = parse(dimacs)?;
    let a = parse_assignment(assignment)?;
    if a.len() != f.n() as usize {
        return Err(PyValueError::new_err(format!(
            "assignment length {} does not match n = {}",
            a.len(),
            f.n()
        )));
    }
    Ok(satlab::cnf::count_unsat(&f, &a))
}

/// Exhaustive satisfiability check for small formulas; returns a satisfying
/// assignment as a 0/1 string, or None.
#[pyfunction]
fn brute_force(dimacs: &str) -> PyResult<Option<String>> {
    let f = parse(dimacs)?;
    Ok(brute_force_sat(&f).map_err(value_error)?.map(|a| a.to_bit_string()))
}

/// Runs the solver for `trials` independent tries and reports per-trial
/// outcomes: {"trials", "solved_trials", "solved", "steps"}.
#[pyfunction]
#[pyo3(signature = (dimacs, wp=0.48, max_steps=None, trials=1, seed=0))]
fn solve<'py>(
    py: Python<'py>,
    dimacs: &str,
    wp: f64,
    max_steps: Option<usize>,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let f = parse(dimacs)?;
    let params = solver_params(f.n(), wp, max_steps);
    let traces = run_many(&f, &params, trials, seed).map_err(value_error)?;
    let out = PyDict::new_bound(py);
    out.set_item("trials", traces.len())?;
    out.set_item("solved_trials", traces.iter().filter(|t| t.solved).count())?;
    out.set_item("solved", traces.iter().map(|t| t.solved).collect::<Vec<_>>())?;
    out.set_item("steps", traces.iter().map(|t| t.steps_taken()).collect::<Vec<_>>())?;
    Ok(out)
}

/// Names of the feature columns, in matrix order.
#[pyfunction]
#[pyo3(name = "feature_names")]
fn feature_names_py() -> Vec<String> {
    feature_names()
}

/// The full feature vector of one formula as a {name: value} dict, averaged
/// over `trials` solver runs.
#[pyfunction]
#[pyo3(signature = (dimacs, wp=0.48, max_steps=None, trials=16, seed=0))]
fn features<'py>(
    py: Python<'py>,
    dimacs: &str,
    wp: f64,
    max_steps: Option<usize>,
    trials: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let f = parse(dimacs)?;
    let params = solver_params(f.n(), wp, max_steps);
    let values = formula_features(&f, &params, trials, seed).map_err(value_error)?;
    let out = PyDict::new_bound(py);
    for (name, value) in feature_names().iter().zip(values) {
        out.set_item(name, value)?;
    }
    Ok(out)
}

fn matrix_from(rows: Vec<Vec<f64>>, labels: Vec<u8>) -> PyResult<LabeledMatrix> {
    if rows.len() != labels.len() {
        return Err(PyValueError::new_err(format!(
            "{} rows but {} labels",
            rows.len(),
            labels.len()
        )));
    }
    let width = rows.first().map_or(0, Vec::len);
    let names = (0..width).map(|i| format!("f{i}")).collect();
    let mut matrix = LabeledMatrix::new("label", names);
    for (label, row) in labels.into_iter().zip(rows) {
        if row.len() != width {
            return Err(PyValueError::new_err("rows must share one width"));
        }
        if label > 1 {
            return Err(PyValueError::new_err("labels must be 0 or 1"));
        }
        matrix.push(label, row);
    }
    Ok(matrix)
}

/// Trains a Gini decision tree on rows x labels and returns the model as a
/// JSON string.
#[pyfunction]
#[pyo3(name = "train_tree", signature = (rows, labels, max_depth=Some(3), seed=0))]
fn train_tree_py(
    rows: Vec<Vec<f64>>,
    labels: Vec<u8>,
    max_depth: Option<usize>,
    seed: u64,
) -> PyResult<String> {
    let matrix = matrix_from(rows, labels)?;
    let tree = train_tree(&matrix, &TreeParams::depth(max_depth, seed)).map_err(value_error)?;
    serde_json::to_string(&tree).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn load_model(model_json: &str) -> PyResult<DecisionTree> {
    serde_json::from_str(model_json).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Predicted labels of a JSON model on the given rows.
#[pyfunction]
fn predict(model_json: &str, rows: Vec<Vec<f64>>) -> PyResult<Vec<u8>> {
    let tree = load_model(model_json)?;
    rows.iter().map(|row| tree.predict_row(row).map_err(value_error)).collect()
}

/// Accuracy (percent) of a JSON model on rows x labels.
#[pyfunction]
#[pyo3(name = "evaluate")]
fn evaluate_py(model_json: &str, rows: Vec<Vec<f64>>, labels: Vec<u8>) -> PyResult<f64> {
    let tree = load_model(model_json)?;
    let matrix = matrix_from(rows, labels)?;
    evaluate(&tree, &matrix).map_err(value_error)
}

#[pymodule]
fn satlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(bound_f, m)?)?;
    m.add_function(wrap_pyfunction!(bound_f_limit, m)?)?;
    m.add_function(wrap_pyfunction!(critical_density, m)?)?;
    m.add_function(wrap_pyfunction!(unsat_risk, m)?)?;
    m.add_function(wrap_pyfunction!(mean_sat_literals, m)?)?;
    m.add_function(wrap_pyfunction!(balanced_q, m)?)?;
    m.add_function(wrap_pyfunction!(gen_unsat, m)?)?;
    m.add_function(wrap_pyfunction!(gen_sat, m)?)?;
    m.add_function(wrap_pyfunction!(count_unsat, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(feature_names_py, m)?)?;
    m.add_function(wrap_pyfunction!(features, m)?)?;
    m.add_function(wrap_pyfunction!(train_tree_py, m)?)?;
    m.add_function(wrap_pyfunction!(predict, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate_py, m)?)?;
    Ok(())
}
