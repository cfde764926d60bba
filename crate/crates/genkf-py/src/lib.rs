//! Python bindings. Commands return their JSON report as a string so callers
//! can use the standard `json` module; pointwise algebra works on plain lists.

use genkf::analysis::symbols;
use genkf::cli;
use genkf::multivector::{self, GenVector, GradedForm};
use genkf::structures::{standard_gk_pair, standard_omega, symplectic_spinor};
use num_complex::Complex64 as C64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Run a command line (without the program name) and return
/// `(exit_code, report_json_or_None, text, error_or_None)`. Nothing is
/// printed and `--output` is ignored.
#[pyfunction]
fn run(py: Python<'_>, args: Vec<String>) -> PyResult<(i32, Option<String>, String, Option<String>)> {
    let cli = cli::parse_args(&args).map_err(value_error)?;
    let ex = py.detach(|| cli::execute(&cli));
    Ok((ex.code, ex.report.map(|r| r.to_json()), ex.text, ex.error))
}

/// Clifford action of the real generalized vector `e` (vector part first)
/// on a form given by its 4^n bitmask-indexed coefficients.
#[pyfunction]
fn clifford_act(n: usize, e: Vec<f64>, alpha: Vec<C64>) -> PyResult<Vec<C64>> {
    let e = GenVector::from_real(n, &e).map_err(value_error)?;
    let a = GradedForm::from_coeffs(n, alpha).map_err(value_error)?;
    Ok(multivector::clifford_act(&e, &a).map_err(value_error)?.coeffs().to_vec())
}

/// Mukai pairing of two forms given by their coefficients.
#[pyfunction]
fn mukai_pair(n: usize, a: Vec<C64>, b: Vec<C64>) -> PyResult<C64> {
    let a = GradedForm::from_coeffs(n, a).map_err(value_error)?;
    let b = GradedForm::from_coeffs(n, b).map_err(value_error)?;
    multivector::mukai_pair(&a, &b).map_err(value_error)
}

/// Exactness report of the symbol sequence at one real covector, as JSON.
#[pyfunction]
fn symbol_exactness(n: usize, rank: usize, theta: Vec<f64>) -> PyResult<String> {
    if theta.len() != 2 * n {
        return Err(value_error(format!("theta needs {} components, got {}", 2 * n, theta.len())));
    }
    let mut comps = vec![0.0; 4 * n];
    comps[2 * n..].copy_from_slice(&theta);
    let gk = standard_gk_pair(n).map_err(value_error)?;
    let psi = symplectic_spinor(n, &vec![0.0; 4 * n * n], &standard_omega(n)).map_err(value_error)?;
    let theta = GenVector::from_real(n, &comps).map_err(value_error)?;
    let rep = symbols::symbol_exactness(&gk, &psi, rank, &theta).map_err(value_error)?;
    Ok(genkf::report::to_json_string(&rep))
}

#[pymodule]
fn genkf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("SCHEMA_VERSION", genkf::report::SCHEMA_VERSION)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(clifford_act, m)?)?;
    m.add_function(wrap_pyfunction!(mukai_pair, m)?)?;
    m.add_function(wrap_pyfunction!(symbol_exactness, m)?)?;
    Ok(())
}
