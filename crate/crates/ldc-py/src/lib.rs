//! Python bindings: checking, heap runs, LNL translation and law verification.

use ldc::algebra::{verify_axioms, Algebra, Grade};
use ldc::heap::{run, Heap, RunEnd};
use ldc::syntax::{parse_judgment, parse_term, print_type};
use ldc::{check, lnl};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn setup(algebra: &str, grade: Option<&str>) -> PyResult<(Algebra, Grade)> {
    let alg = Algebra::from_selector(algebra).map_err(err)?;
    let q = match grade {
        Some(g) => alg.parse_grade(g).map_err(err)?,
        None => alg.one(),
    };
    Ok((alg, q))
}

/// Checks `ctx |- term : type`; returns the type on success, `None` on rejection.
#[pyfunction]
#[pyo3(signature = (judgment, algebra = "nat-exact", grade = None))]
fn check_judgment(judgment: &str, algebra: &str, grade: Option<&str>) -> PyResult<Option<String>> {
    let (alg, q) = setup(algebra, grade)?;
    let j = parse_judgment(judgment, &alg).map_err(err)?;
    Ok(check::check(&alg, &j.ctx, &j.term, &q, j.ty.as_ref()).ok().map(|t| print_type(&t)))
}

/// Runs `term` against a heap; returns `(end, term, heap)` with `end` one of
/// `value`, `stuck` or `fuel`.
#[pyfunction]
#[pyo3(signature = (heap, term, algebra = "nat-exact", grade = None, fuel = 10_000))]
fn heap_run(heap: &str, term: &str, algebra: &str, grade: Option<&str>, fuel: u64) -> PyResult<(String, String, String)> {
    let (alg, q) = setup(algebra, grade)?;
    let h = Heap::parse(heap, &alg).map_err(err)?;
    let t = parse_term(term, &alg).map_err(err)?;
    let r = run(&alg, &h, &t, &q, fuel).map_err(err)?;
    let end = match r.end {
        RunEnd::Value => "value",
        RunEnd::Stuck(_) => "stuck",
        RunEnd::FuelExhausted => "fuel",
    };
    Ok((end.to_string(), r.term.to_string(), r.heap.to_string()))
}

/// Translates an LNL judgment and checks it under lin3.
#[pyfunction]
fn translate_lnl(judgment: &str) -> PyResult<(String, bool)> {
    let j = lnl::parse_lnl_judgment(judgment).map_err(err)?;
    let v = lnl::validate(&j);
    Ok((v.term.to_string(), v.accepted()))
}

/// Law name to `(claimed, holds)`.
#[pyfunction]
#[pyo3(signature = (algebra, sample_bound = 6))]
fn verify(algebra: &str, sample_bound: u64) -> PyResult<Vec<(String, bool, bool)>> {
    let alg = Algebra::from_selector(algebra).map_err(err)?;
    let r = verify_axioms(&alg, sample_bound);
    Ok(r.laws.iter().map(|l| (l.law.to_string(), l.claimed, l.holds())).collect())
}

#[pymodule]
fn ldc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(check_judgment, m)?)?;
    m.add_function(wrap_pyfunction!(heap_run, m)?)?;
    m.add_function(wrap_pyfunction!(translate_lnl, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}
