//! Python bindings: programs, distributions, the four leakage measures,
//! refinement/NI checking, witness distributions, model counting, and
//! DIMACS export. Values cross the boundary as bit strings, plain dicts
//! (mirroring the CLI's JSON), and the two wrapper classes below.

use std::collections::BTreeMap;
use std::str::FromStr;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qif_core::compare;
use qif_core::counting::{self, OracleKind};
use qif_core::dist::{InputDomain, JointDist, DEFAULT_SPARSITY};
use qif_core::error::Error;
use qif_core::exec::{self, DEFAULT_CAPACITY_BITS};
use qif_core::lang::ast::{Formula, ProgramUnit};
use qif_core::lang::{corpus, parse_formula, parse_program, render_formula, render_program};
use qif_core::qif::{self, MeasureKind};
use qif_core::symbolic;

fn err(e: Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    let s = serde_json::to_string(v).expect("json serialization");
    Ok(py.import("json")?.call_method1("loads", (s,))?.unbind())
}

/// A loop-free boolean program with high/low inputs and observable outputs.
#[pyclass(frozen)]
struct Program {
    inner: ProgramUnit,
}

#[pymethods]
impl Program {
    /// Parses program text (declarations followed by a statement sequence).
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Program> {
        Ok(Program { inner: parse_program(text).map_err(err)? })
    }

    /// Canonical rendering; `parse` returns a structurally equal program.
    fn render(&self) -> String {
        render_program(&self.inner)
    }

    #[getter]
    fn high(&self) -> Vec<String> {
        self.inner.high.clone()
    }

    #[getter]
    fn low(&self) -> Vec<String> {
        self.inner.low.clone()
    }

    #[getter]
    fn out(&self) -> Vec<String> {
        self.inner.out.clone()
    }

    #[getter]
    fn local(&self) -> Vec<String> {
        self.inner.local.clone()
    }

    /// Runs the program on packed bit-string inputs (`"-"` for an empty
    /// vector) and returns the output bit string.
    fn evaluate(&self, high: &str, low: &str) -> PyResult<String> {
        let (h, nh) = exec::bits_parse(high).map_err(err)?;
        let (l, nl) = exec::bits_parse(low).map_err(err)?;
        if nh != self.inner.high.len() || nl != self.inner.low.len() {
            return Err(PyValueError::new_err(format!(
                "expected {} high and {} low bits",
                self.inner.high.len(),
                self.inner.low.len()
            )));
        }
        let mut input = BTreeMap::new();
        for (j, v) in self.inner.high.iter().enumerate() {
            input.insert(v.clone(), h >> j & 1 == 1);
        }
        for (j, v) in self.inner.low.iter().enumerate() {
            input.insert(v.clone(), l >> j & 1 == 1);
        }
        let out = exec::evaluate(&self.inner, &input).map_err(err)?;
        let mut packed = 0u64;
        for (j, v) in self.inner.out.iter().enumerate() {
            if out[v] {
                packed |= 1 << j;
            }
        }
        Ok(exec::bits_render(packed, self.inner.out.len()))
    }

    /// The full input/output table, one `H L -> O` line per input.
    #[pyo3(signature = (capacity = DEFAULT_CAPACITY_BITS))]
    fn table(&self, capacity: u32) -> PyResult<String> {
        Ok(exec::denotation(&self.inner, capacity).map_err(err)?.render())
    }

    #[pyo3(signature = (capacity = DEFAULT_CAPACITY_BITS))]
    fn is_non_interferent(&self, capacity: u32) -> PyResult<bool> {
        exec::is_non_interferent(&self.inner, capacity).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "Program(high={:?}, low={:?}, out={:?})",
            self.inner.high, self.inner.low, self.inner.out
        )
    }
}

/// An exact rational joint distribution over a program's input space.
#[pyclass(frozen)]
struct Dist {
    inner: JointDist,
}

#[pymethods]
impl Dist {
    /// Parses the distribution file format (`vars:` header plus mass rows).
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Dist> {
        Ok(Dist { inner: JointDist::parse(text).map_err(err)? })
    }

    /// The uniform distribution over a program's inputs.
    #[staticmethod]
    #[pyo3(signature = (program, capacity = DEFAULT_CAPACITY_BITS))]
    fn uniform(program: &Program, capacity: u32) -> PyResult<Dist> {
        let d = JointDist::uniform(InputDomain::of_program(&program.inner), capacity)
            .map_err(err)?;
        Ok(Dist { inner: d })
    }

    /// A reproducible random distribution over a program's inputs.
    #[staticmethod]
    #[pyo3(signature = (program, seed = 0, sparsity = DEFAULT_SPARSITY, capacity = DEFAULT_CAPACITY_BITS))]
    fn random(program: &Program, seed: u64, sparsity: f64, capacity: u32) -> PyResult<Dist> {
        let d = JointDist::sample_random(
            InputDomain::of_program(&program.inner),
            seed,
            sparsity,
            capacity,
        )
        .map_err(err)?;
        Ok(Dist { inner: d })
    }

    fn render(&self) -> String {
        self.inner.render()
    }

    fn is_uniform(&self) -> bool {
        self.inner.is_uniform()
    }

    fn support_len(&self) -> u64 {
        self.inner.support_len()
    }

    fn __repr__(&self) -> String {
        format!("Dist({} support points)", self.inner.support_len())
    }
}

/// Computes one leakage measure (`"se"`, `"me"`, `"ge"`, `"cc"`); returns
/// the same dict as the CLI's JSON report.
#[pyfunction]
#[pyo3(signature = (program, measure, dist = None, capacity = DEFAULT_CAPACITY_BITS))]
fn measure(
    py: Python<'_>,
    program: &Program,
    measure: &str,
    dist: Option<&Dist>,
    capacity: u32,
) -> PyResult<Py<PyAny>> {
    let kind = MeasureKind::from_str(measure).map_err(err)?;
    let report = qif::measure(&program.inner, kind, dist.map(|d| &d.inner), capacity)
        .map_err(err)?;
    json_to_py(py, &report.to_json())
}

/// Checks that `left` leaks at most as much as `right` under one measure;
/// uniform inputs when `dist` is omitted (exact), `dist` otherwise.
#[pyfunction]
#[pyo3(name = "compare")]
#[pyo3(signature = (left, right, measure, dist = None, epsilon = 1e-9, capacity = DEFAULT_CAPACITY_BITS))]
fn compare_programs(
    py: Python<'_>,
    left: &Program,
    right: &Program,
    measure: &str,
    dist: Option<&Dist>,
    epsilon: f64,
    capacity: u32,
) -> PyResult<Py<PyAny>> {
    let kind = MeasureKind::from_str(measure).map_err(err)?;
    let (holds, conclusive) = match dist {
        None => (
            compare::cmp_uniform(&left.inner, &right.inner, kind, capacity).map_err(err)?,
            true,
        ),
        Some(d) => {
            let o = compare::cmp_dist(&left.inner, &right.inner, kind, &d.inner, epsilon, capacity)
                .map_err(err)?;
            (o.holds, o.conclusive)
        }
    };
    let dict = PyDict::new(py);
    dict.set_item("holds", holds)?;
    dict.set_item("conclusive", conclusive)?;
    Ok(dict.into_any().unbind())
}

fn verdict_to_py(py: Python<'_>, v: &compare::RVerdict, nh: usize, nl: usize) -> PyResult<Py<PyAny>> {
    json_to_py(py, &v.to_json(nh, nl))
}

/// Decides the refinement relation R(left, right): left is at least as
/// secure as right. `engine` is `"brute"` or `"sat"`.
#[pyfunction]
#[pyo3(signature = (left, right, engine = "brute", capacity = DEFAULT_CAPACITY_BITS))]
fn check_r(
    py: Python<'_>,
    left: &Program,
    right: &Program,
    engine: &str,
    capacity: u32,
) -> PyResult<Py<PyAny>> {
    let v = match engine {
        "brute" => compare::check_r(&left.inner, &right.inner, capacity).map_err(err)?,
        "sat" => symbolic::check_r_symbolic(&left.inner, &right.inner).map_err(err)?,
        other => return Err(PyValueError::new_err(format!("unknown engine `{other}`"))),
    };
    verdict_to_py(py, &v, left.inner.high.len(), left.inner.low.len())
}

/// Decides non-interference. `engine` is `"brute"` or `"sat"`.
#[pyfunction]
#[pyo3(signature = (program, engine = "brute", capacity = DEFAULT_CAPACITY_BITS))]
fn check_ni(py: Python<'_>, program: &Program, engine: &str, capacity: u32) -> PyResult<Py<PyAny>> {
    let p = &program.inner;
    let v = match engine {
        "brute" => match exec::ni_counterexample(p, capacity).map_err(err)? {
            None => compare::RVerdict { holds: true, counterexample: None },
            Some((l, h, h2)) => compare::RVerdict {
                holds: false,
                counterexample: Some(compare::Counterexample { l, h, h2 }),
            },
        },
        "sat" => symbolic::check_ni_symbolic(p).map_err(err)?,
        other => return Err(PyValueError::new_err(format!("unknown engine `{other}`"))),
    };
    verdict_to_py(py, &v, p.high.len(), p.low.len())
}

/// A two-point distribution refuting R(left, right): `left` leaks strictly
/// more than `right` on it. Raises when the refinement relation holds.
#[pyfunction]
#[pyo3(signature = (left, right, capacity = DEFAULT_CAPACITY_BITS))]
fn witness(left: &Program, right: &Program, capacity: u32) -> PyResult<Dist> {
    let d = compare::witness_distribution(&left.inner, &right.inner, capacity).map_err(err)?;
    Ok(Dist { inner: d })
}

/// Counts the models of a formula. `oracle` is `"enum"` for direct
/// enumeration or one of `"se"`, `"me"`, `"ge"`, `"cc"` to recover the
/// count purely through leakage-comparison queries; returns the CLI's
/// JSON dict including the search trace.
#[pyfunction]
#[pyo3(signature = (formula, oracle = "enum", universe = None, capacity = DEFAULT_CAPACITY_BITS))]
fn count(
    py: Python<'_>,
    formula: &str,
    oracle: &str,
    universe: Option<Vec<String>>,
    capacity: u32,
) -> PyResult<Py<PyAny>> {
    let f = parse_formula(formula).map_err(err)?;
    let kind = OracleKind::parse(oracle).map_err(err)?;
    let run = match universe {
        Some(u) => counting::count_via_oracle(&f, &u, kind, capacity).map_err(err)?,
        None => counting::count_via_oracle_auto(&f, kind, capacity).map_err(err)?,
    };
    json_to_py(py, &run.to_json())
}

/// A formula over `vars` with exactly `count` models.
#[pyfunction]
fn gen_formula(count: u64, vars: Vec<String>) -> PyResult<String> {
    Ok(render_formula(&counting::gen_count_formula(count, &vars).map_err(err)?))
}

/// The weakest precondition of a program's body against a postcondition
/// formula, via the passified (linear-size) transformer.
#[pyfunction]
fn wp(program: &Program, post: &str) -> PyResult<String> {
    let f = parse_formula(post).map_err(err)?;
    Ok(render_formula(&symbolic::wp_optimized(&program.inner.body, &f)))
}

/// The self-composition non-interference condition (valid iff NI holds).
#[pyfunction]
fn vc_ni(program: &Program) -> PyResult<String> {
    Ok(render_formula(&symbolic::vc_ni(&program.inner).map_err(err)?))
}

/// The four-copy refinement condition (valid iff R(left, right) holds).
#[pyfunction]
fn vc_r(left: &Program, right: &Program) -> PyResult<String> {
    Ok(render_formula(&symbolic::vc_r(&left.inner, &right.inner).map_err(err)?))
}

/// Tseitin-encodes a formula (negated first when `negate`) and returns the
/// DIMACS text.
#[pyfunction]
#[pyo3(signature = (formula, negate = false))]
fn export_dimacs(formula: &str, negate: bool) -> PyResult<String> {
    let mut f = parse_formula(formula).map_err(err)?;
    if negate {
        f = Formula::not(f);
    }
    Ok(symbolic::export_dimacs(&symbolic::tseitin_cnf(&f)))
}

/// Satisfying assignment of a formula as a dict over its variables, or
/// None when unsatisfiable.
#[pyfunction]
fn sat_model(py: Python<'_>, formula: &str) -> PyResult<Py<PyAny>> {
    let f = parse_formula(formula).map_err(err)?;
    let cnf = symbolic::tseitin_cnf(&f);
    match symbolic::dpll_sat(&cnf) {
        None => Ok(py.None()),
        Some(model) => {
            let dict = PyDict::new(py);
            for v in f.vars() {
                dict.set_item(&v, cnf.model_value(&model, &v))?;
            }
            Ok(dict.into_any().unbind())
        }
    }
}

fn programs_dict<'a>(
    py: Python<'_>,
    entries: impl IntoIterator<Item = (&'a str, &'a ProgramUnit)>,
) -> PyResult<Py<PyAny>> {
    let dict = PyDict::new(py);
    for (name, p) in entries {
        dict.set_item(name, Program { inner: p.clone() })?;
    }
    Ok(dict.into_any().unbind())
}

/// The bundled two-program guessing example.
#[pyfunction]
fn corpus_intro(py: Python<'_>) -> PyResult<Py<PyAny>> {
    let e = corpus::gen_intro_examples();
    programs_dict(py, e.entries())
}

/// The bundled password-check family at a given bit width.
#[pyfunction]
fn corpus_login(py: Python<'_>, bits: usize) -> PyResult<Py<PyAny>> {
    let c = corpus::gen_login_corpus(bits).map_err(err)?;
    programs_dict(py, c.entries())
}

/// The bundled two-output example over x, y.
#[pyfunction]
fn corpus_zw() -> Program {
    Program { inner: corpus::zw_example() }
}

#[pymodule]
fn qif_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Program>()?;
    m.add_class::<Dist>()?;
    m.add_function(wrap_pyfunction!(measure, m)?)?;
    m.add_function(wrap_pyfunction!(compare_programs, m)?)?;
    m.add_function(wrap_pyfunction!(check_r, m)?)?;
    m.add_function(wrap_pyfunction!(check_ni, m)?)?;
    m.add_function(wrap_pyfunction!(witness, m)?)?;
    m.add_function(wrap_pyfunction!(count, m)?)?;
    m.add_function(wrap_pyfunction!(gen_formula, m)?)?;
    m.add_function(wrap_pyfunction!(wp, m)?)?;
    m.add_function(wrap_pyfunction!(vc_ni, m)?)?;
    m.add_function(wrap_pyfunction!(vc_r, m)?)?;
    m.add_function(wrap_pyfunction!(export_dimacs, m)?)?;
    m.add_function(wrap_pyfunction!(sat_model, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_intro, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_login, m)?)?;
    m.add_function(wrap_pyfunction!(corpus_zw, m)?)?;
    Ok(())
}
