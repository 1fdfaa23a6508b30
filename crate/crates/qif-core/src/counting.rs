//! Model counting through leakage-comparison oracles.
//!
//! A formula is compiled into a small leaking program whose leakage is
//! strictly monotone in its model count; binary search through "leaks at
//! most as much as" queries then pins the count down exactly. The
//! construction needs a formula family with every possible count over a
//! fixed variable universe, which `gen_count_formula` supplies.

use serde_json::{json, Value};

use crate::compare::cmp_uniform;
use crate::error::{Error, Result};
use crate::exec::lex_iter;
use crate::lang::ast::{Formula, ProgramUnit, Stmt};
use crate::qif::MeasureKind;

/// Which comparison oracle drives the search; `Enum` counts directly by
/// enumeration instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    Se,
    Me,
    Ge,
    Cc,
    Enum,
}

impl OracleKind {
    pub fn name(self) -> &'static str {
        match self {
            OracleKind::Se => "se",
            OracleKind::Me => "me",
            OracleKind::Ge => "ge",
            OracleKind::Cc => "cc",
            OracleKind::Enum => "enum",
        }
    }

    pub fn parse(s: &str) -> Result<OracleKind> {
        match s {
            "se" => Ok(OracleKind::Se),
            "me" => Ok(OracleKind::Me),
            "ge" => Ok(OracleKind::Ge),
            "cc" => Ok(OracleKind::Cc),
            "enum" => Ok(OracleKind::Enum),
            _ => Err(Error::Usage(format!(
                "unknown oracle `{s}` (expected se, me, ge, cc, or enum)"
            ))),
        }
    }
}

/// One binary-search step: the bracket [l, r) and the probe count n that
/// was compared against the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceStep {
    pub l: u64,
    pub r: u64,
    pub n: u64,
}

/// A finished counting run: the formula, its universe, the oracle used,
/// the count, and the full audit trail of comparisons.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRun {
    pub formula: String,
    pub vars: Vec<String>,
    pub kind: OracleKind,
    pub count: u64,
    pub oracle_calls: u64,
    pub trace: Vec<TraceStep>,
}

impl CountRun {
    pub fn to_json(&self) -> Value {
        json!({
            "formula": self.formula,
            "vars": self.vars,
            "kind": self.kind.name(),
            "count": self.count,
            "oracle_calls": self.oracle_calls,
            "trace": self.trace.iter().map(|t| json!({
                "l": t.l,
                "r": t.r,
                "n": t.n,
            })).collect::<Vec<_>>(),
        })
    }
}

fn check_universe(universe: &[String]) -> Result<()> {
    for (i, v) in universe.iter().enumerate() {
        if universe[..i].contains(v) {
            return Err(Error::Usage(format!(
                "variable `{v}` listed twice in the counting universe"
            )));
        }
    }
    Ok(())
}

/// A formula over `vars` with exactly `k` models over that universe, built
/// from one occurrence of each variable. `k = 2^n` yields `true`; larger
/// counts do not fit and are rejected.
pub fn gen_count_formula(k: u64, vars: &[String]) -> Result<Formula> {
    check_universe(vars)?;
    let n = vars.len();
    if n > 63 || (n < 64 && k > 1u64 << n) {
        return Err(Error::CountOutOfRange { k, vars: n });
    }
    if k == 1u64 << n {
        return Ok(Formula::tt());
    }
    let mut acc = Formula::ff();
    for (j, v) in vars.iter().enumerate() {
        acc = if k >> j & 1 == 0 {
            Formula::and(Formula::var(v.clone()), acc)
        } else {
            Formula::or(Formula::var(v.clone()), acc)
        };
    }
    Ok(acc)
}

/// Exact model count of `f` over an explicit universe (which must cover the
/// formula's variables), by enumeration.
pub fn sharp_sat_enum(f: &Formula, universe: &[String], capacity: u32) -> Result<u64> {
    check_universe(universe)?;
    let missing: Vec<String> = f
        .vars()
        .into_iter()
        .filter(|v| !universe.contains(v))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Usage(format!(
            "counting universe does not cover formula variables: {}",
            missing.join(", ")
        )));
    }
    let n = universe.len();
    if n as u32 > capacity || n > 24 {
        return Err(Error::CapacityExceeded {
            bits: n as u32,
            capacity: capacity.min(24),
        });
    }
    let mut count = 0u64;
    for bits in lex_iter(n) {
        let sat = f.eval(&mut |name| {
            let j = universe.iter().position(|v| v == name).unwrap();
            bits >> j & 1 == 1
        });
        if sat {
            count += 1;
        }
    }
    Ok(count)
}

/// Enumeration count over the formula's own (sorted) variables.
pub fn sharp_sat_enum_auto(f: &Formula, capacity: u32) -> Result<u64> {
    let universe: Vec<String> = f.vars().into_iter().collect();
    sharp_sat_enum(f, &universe, capacity)
}

fn fresh_name(base: &str, taken: &[String]) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('\'');
    }
    name
}

/// The flagged-copy transform: a program with `vars` as highs whose output
/// is a success flag plus, on success, a copy of the whole high input. Its
/// output image has exactly (model count + 1) elements, except that a
/// tautology reaches all 2^n flagged outputs and no failure output.
pub fn boolenc_t(f: &Formula, vars: &[String]) -> Result<ProgramUnit> {
    check_universe(vars)?;
    let missing: Vec<String> = f
        .vars()
        .into_iter()
        .filter(|v| !vars.contains(v))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Usage(format!(
            "transform universe does not cover formula variables: {}",
            missing.join(", ")
        )));
    }
    let flag = fresh_name("of", vars);
    let copies: Vec<String> = (0..vars.len())
        .map(|i| fresh_name(&format!("o{i}"), vars))
        .collect();
    let mut then_branch = vec![Stmt::assign(flag.clone(), Formula::tt())];
    let mut else_branch = vec![Stmt::assign(flag.clone(), Formula::ff())];
    for (c, v) in copies.iter().zip(vars) {
        then_branch.push(Stmt::assign(c.clone(), Formula::var(v.clone())));
        else_branch.push(Stmt::assign(c.clone(), Formula::ff()));
    }
    let mut out = vec![flag];
    out.extend(copies);
    ProgramUnit::new(
        vars.to_vec(),
        vec![],
        out,
        vec![],
        Stmt::if_else(
            f.clone(),
            Stmt::seq_all(then_branch),
            Stmt::seq_all(else_branch),
        ),
    )
}

fn probe_program(
    psi: Formula,
    universe: &[String],
    aux: &str,
    kind: MeasureKind,
) -> Result<ProgramUnit> {
    let mut highs = universe.to_vec();
    highs.push(aux.to_string());
    let guarded = Formula::and(psi, Formula::var(aux));
    match kind {
        MeasureKind::Se | MeasureKind::Ge => {
            // a single success bit: class sizes j and 2^(n+1) - j
            let out = fresh_name("o", &highs);
            Ok(ProgramUnit::new(
                highs.clone(),
                vec![],
                vec![out.clone()],
                vec![],
                Stmt::assign(out, guarded),
            )?)
        }
        MeasureKind::Me | MeasureKind::Cc => {
            // the flagged copy: image size j + 1, since the guard is never
            // a tautology
            boolenc_t(&guarded, &highs)
        }
    }
}

/// Counts the models of `f` over `universe` by binary search through
/// leakage-comparison oracle calls (or directly, for the `Enum` kind). The
/// trace records every probed bracket; at most 3(n+1) + 2 oracle calls are
/// made for n universe variables.
pub fn count_via_oracle(
    f: &Formula,
    universe: &[String],
    kind: OracleKind,
    capacity: u32,
) -> Result<CountRun> {
    check_universe(universe)?;
    let n = universe.len();
    let run = |count, calls, trace| CountRun {
        formula: crate::lang::render_formula(f),
        vars: universe.to_vec(),
        kind,
        count,
        oracle_calls: calls,
        trace,
    };
    let measure_kind = match kind {
        OracleKind::Se => MeasureKind::Se,
        OracleKind::Me => MeasureKind::Me,
        OracleKind::Ge => MeasureKind::Ge,
        OracleKind::Cc => MeasureKind::Cc,
        OracleKind::Enum => {
            let count = sharp_sat_enum(f, universe, capacity)?;
            return Ok(run(count, 0, vec![]));
        }
    };
    if n > 16 {
        return Err(Error::Usage(format!(
            "oracle-driven counting supports at most 16 variables, got {n}"
        )));
    }
    let missing: Vec<String> = f
        .vars()
        .into_iter()
        .filter(|v| !universe.contains(v))
        .collect();
    if !missing.is_empty() {
        return Err(Error::Usage(format!(
            "counting universe does not cover formula variables: {}",
            missing.join(", ")
        )));
    }
    let aux = fresh_name("hp", universe);
    let target = probe_program(f.clone(), universe, &aux, measure_kind)?;
    let mut calls = 0u64;
    let mut trace = Vec::new();
    let mut oracle = |a: &ProgramUnit, b: &ProgramUnit| -> Result<bool> {
        calls += 1;
        cmp_uniform(a, b, measure_kind, capacity)
    };
    let mut l = 0u64;
    let mut r = 1u64 << n;
    let mut mid = (l + r) / 2;
    let count = loop {
        trace.push(TraceStep { l, r, n: mid });
        let probe = probe_program(gen_count_formula(mid, universe)?, universe, &aux, measure_kind)?;
        let not_above = oracle(&probe, &target)?;
        let not_below = oracle(&target, &probe)?;
        if not_above && not_below {
            break mid;
        }
        let c = oracle(&probe, &target)?;
        if c {
            l = mid;
        } else {
            r = mid;
        }
        mid = (l + r) / 2;
        if c && mid == l && r == l + 1 {
            // integer halving cannot reach the right endpoint on its own
            mid = r;
        }
    };
    Ok(run(count, calls, trace))
}

/// Oracle counting over the formula's own (sorted) variables.
pub fn count_via_oracle_auto(f: &Formula, kind: OracleKind, capacity: u32) -> Result<CountRun> {
    let universe: Vec<String> = f.vars().into_iter().collect();
    count_via_oracle(f, &universe, kind, capacity)
}
