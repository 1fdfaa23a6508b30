//! Seeded random generators for property-test suites: formulas, programs,
//! program pairs over a shared input domain, and non-interferent programs.

use rand::Rng;

use crate::lang::ast::{Formula, ProgramUnit, Stmt};

/// Dimensions for `random_program` and friends.
#[derive(Debug, Clone, Copy)]
pub struct ProgramShape {
    pub n_high: usize,
    pub n_low: usize,
    pub n_out: usize,
    pub n_local: usize,
    /// Leaf statements per sequence.
    pub max_stmts: usize,
    /// Conditional nesting depth.
    pub max_depth: usize,
    /// Size budget per generated formula.
    pub formula_fuel: usize,
}

/// Random formula over the given variables, mixing core and sugared
/// connectives (the result is core, sugar desugars on construction).
pub fn random_formula_over(rng: &mut impl Rng, vars: &[String], fuel: usize) -> Formula {
    if fuel == 0 || rng.random_range(0..4) == 0 {
        if vars.is_empty() || rng.random_range(0..6) == 0 {
            return if rng.random() { Formula::tt() } else { Formula::ff() };
        }
        return Formula::var(vars[rng.random_range(0..vars.len())].clone());
    }
    match rng.random_range(0..6) {
        0 => Formula::not(random_formula_over(rng, vars, fuel - 1)),
        1 => Formula::and(
            random_formula_over(rng, vars, fuel / 2),
            random_formula_over(rng, vars, fuel / 2),
        ),
        2 => Formula::or(
            random_formula_over(rng, vars, fuel / 2),
            random_formula_over(rng, vars, fuel / 2),
        ),
        3 => Formula::implies(
            random_formula_over(rng, vars, fuel / 2),
            random_formula_over(rng, vars, fuel / 2),
        ),
        4 => Formula::iff(
            random_formula_over(rng, vars, fuel / 2),
            random_formula_over(rng, vars, fuel / 2),
        ),
        _ => Formula::xor(
            random_formula_over(rng, vars, fuel / 2),
            random_formula_over(rng, vars, fuel / 2),
        ),
    }
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn random_stmt(
    rng: &mut impl Rng,
    reads: &[String],
    writes: &[String],
    depth: usize,
    shape: &ProgramShape,
) -> Stmt {
    let choice = rng.random_range(0..10);
    if depth > 0 && choice < 3 {
        let cond = random_formula_over(rng, reads, shape.formula_fuel);
        return Stmt::if_else(
            cond,
            random_seq(rng, reads, writes, depth - 1, shape, 2),
            random_seq(rng, reads, writes, depth - 1, shape, 2),
        );
    }
    if choice < 9 && !writes.is_empty() {
        let target = writes[rng.random_range(0..writes.len())].clone();
        return Stmt::assign(target, random_formula_over(rng, reads, shape.formula_fuel));
    }
    Stmt::Skip
}

fn random_seq(
    rng: &mut impl Rng,
    reads: &[String],
    writes: &[String],
    depth: usize,
    shape: &ProgramShape,
    max_stmts: usize,
) -> Stmt {
    let k = rng.random_range(1..=max_stmts.max(1));
    Stmt::seq_all((0..k).map(|_| random_stmt(rng, reads, writes, depth, shape)))
}

/// Random program over `shape`'s declaration lists. Assignments mostly hit
/// outs and locals, with a small chance of clobbering an input variable
/// (legal, and the analyses must cope).
pub fn random_program(rng: &mut impl Rng, shape: &ProgramShape) -> ProgramUnit {
    let high = names("h", shape.n_high);
    let low = names("l", shape.n_low);
    let out = names("o", shape.n_out);
    let local = names("t", shape.n_local);
    let reads: Vec<String> = high
        .iter()
        .chain(&low)
        .chain(&out)
        .chain(&local)
        .cloned()
        .collect();
    let mut writes: Vec<String> = out.iter().chain(&local).cloned().collect();
    // occasionally allow writes to inputs
    if rng.random_range(0..10) == 0 && !high.is_empty() {
        writes.push(high[rng.random_range(0..high.len())].clone());
    }
    if rng.random_range(0..10) == 0 && !low.is_empty() {
        writes.push(low[rng.random_range(0..low.len())].clone());
    }
    let body = random_seq(rng, &reads, &writes, shape.max_depth, shape, shape.max_stmts);
    ProgramUnit::new(high, low, out, local, body).expect("generated program is well-formed")
}

/// Two random programs over the same declaration lists.
pub fn random_pair(rng: &mut impl Rng, shape: &ProgramShape) -> (ProgramUnit, ProgramUnit) {
    let a = random_program(rng, shape);
    let b = random_program(rng, shape);
    (a, b)
}

/// Random non-interferent program: the body never reads a high variable.
pub fn random_ni_program(rng: &mut impl Rng, shape: &ProgramShape) -> ProgramUnit {
    let high = names("h", shape.n_high);
    let low = names("l", shape.n_low);
    let out = names("o", shape.n_out);
    let local = names("t", shape.n_local);
    let reads: Vec<String> = low.iter().chain(&out).chain(&local).cloned().collect();
    let writes: Vec<String> = out.iter().chain(&local).cloned().collect();
    let body = random_seq(rng, &reads, &writes, shape.max_depth, shape, shape.max_stmts);
    ProgramUnit::new(high, low, out, local, body).expect("generated program is well-formed")
}
