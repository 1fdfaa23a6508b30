//! Abstract syntax for loop-free boolean programs.
//!
//! Formulas are kept in a four-constructor core (truth, variable,
//! conjunction, negation). The extended connectives of the concrete
//! syntax (`|`, `=>`, `==`, `false`) are sugar and desugar at
//! construction time, so every `Formula` value is already in core form.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// Reserved words of the concrete syntax; not usable as identifiers.
pub const KEYWORDS: &[&str] = &[
    "true", "false", "if", "then", "else", "skip", "high", "low", "out", "local",
];

/// Identifiers: `[A-Za-z_][A-Za-z0-9_']*`, excluding keywords.
pub fn is_valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    let ok_first = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
    ok_first
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
        && !KEYWORDS.contains(&s)
}

/// Core boolean formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    Var(String),
    And(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
}

impl Formula {
    pub fn tt() -> Formula {
        Formula::True
    }

    /// `false` is sugar for `!true`.
    pub fn ff() -> Formula {
        Formula::not(Formula::True)
    }

    pub fn var(name: impl Into<String>) -> Formula {
        Formula::Var(name.into())
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    /// `a | b` desugars to `!(!a & !b)`.
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    /// `a => b` desugars to `!(a & !b)`.
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(a, Formula::not(b)))
    }

    /// `a == b` desugars to `(a & b) | (!a & !b)`.
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::or(
            Formula::and(a.clone(), b.clone()),
            Formula::and(Formula::not(a), Formula::not(b)),
        )
    }

    pub fn xor(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::iff(a, b))
    }

    /// Conjunction of all operands; `true` when empty.
    pub fn and_all(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = fs.into_iter();
        match it.next() {
            None => Formula::True,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Disjunction of all operands; `false` when empty.
    pub fn or_all(fs: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = fs.into_iter();
        match it.next() {
            None => Formula::ff(),
            Some(first) => it.fold(first, Formula::or),
        }
    }

    pub fn eval<F: FnMut(&str) -> bool>(&self, lookup: &mut F) -> bool {
        match self {
            Formula::True => true,
            Formula::Var(x) => lookup(x),
            Formula::And(a, b) => a.eval(lookup) && b.eval(lookup),
            Formula::Not(a) => !a.eval(lookup),
        }
    }

    /// Evaluates under a finite environment; unmapped variables read as false.
    pub fn eval_map(&self, env: &BTreeMap<String, bool>) -> bool {
        self.eval(&mut |x| env.get(x).copied().unwrap_or(false))
    }

    pub fn collect_vars(&self, into: &mut BTreeSet<String>) {
        match self {
            Formula::True => {}
            Formula::Var(x) => {
                into.insert(x.clone());
            }
            Formula::And(a, b) => {
                a.collect_vars(into);
                b.collect_vars(into);
            }
            Formula::Not(a) => a.collect_vars(into),
        }
    }

    /// The set of variables occurring in the formula, sorted by name.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.collect_vars(&mut s);
        s
    }

    /// Node count.
    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::Var(_) => 1,
            Formula::And(a, b) => 1 + a.size() + b.size(),
            Formula::Not(a) => 1 + a.size(),
        }
    }

    /// Substitutes `repl` for every occurrence of variable `name`.
    pub fn subst(&self, name: &str, repl: &Formula) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::Var(x) => {
                if x == name {
                    repl.clone()
                } else {
                    self.clone()
                }
            }
            Formula::And(a, b) => Formula::and(a.subst(name, repl), b.subst(name, repl)),
            Formula::Not(a) => Formula::not(a.subst(name, repl)),
        }
    }

    /// Renames variables through `map`; unmapped names stay as they are.
    pub fn rename(&self, map: &BTreeMap<String, String>) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::Var(x) => Formula::var(map.get(x).cloned().unwrap_or_else(|| x.clone())),
            Formula::And(a, b) => Formula::and(a.rename(map), b.rename(map)),
            Formula::Not(a) => Formula::not(a.rename(map)),
        }
    }

    /// Semantics-preserving constant folding plus double-negation removal.
    ///
    /// The result is either a constant (`true` / `!true`) or contains no
    /// constant subterm; useful before CNF conversion.
    pub fn fold_constants(&self) -> Formula {
        match self {
            Formula::True => Formula::True,
            Formula::Var(_) => self.clone(),
            Formula::And(a, b) => {
                let a = a.fold_constants();
                let b = b.fold_constants();
                if a.is_const_false() || b.is_const_false() {
                    Formula::ff()
                } else if a == Formula::True {
                    b
                } else if b == Formula::True {
                    a
                } else {
                    Formula::and(a, b)
                }
            }
            Formula::Not(a) => {
                let a = a.fold_constants();
                match a {
                    Formula::True => Formula::ff(),
                    Formula::Not(inner) if matches!(*inner, Formula::True) => Formula::True,
                    Formula::Not(inner) => *inner,
                    other => Formula::not(other),
                }
            }
        }
    }

    fn is_const_false(&self) -> bool {
        matches!(self, Formula::Not(a) if matches!(**a, Formula::True))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::lang::printer::render_formula(self))
    }
}

/// Loop-free statement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    Skip,
    Assign(String, Formula),
    If(Formula, Box<Stmt>, Box<Stmt>),
    Seq(Box<Stmt>, Box<Stmt>),
}

impl Stmt {
    pub fn assign(name: impl Into<String>, rhs: Formula) -> Stmt {
        Stmt::Assign(name.into(), rhs)
    }

    pub fn if_else(cond: Formula, then_branch: Stmt, else_branch: Stmt) -> Stmt {
        Stmt::If(cond, Box::new(then_branch), Box::new(else_branch))
    }

    pub fn seq(first: Stmt, second: Stmt) -> Stmt {
        Stmt::Seq(Box::new(first), Box::new(second))
    }

    /// Right-folded sequence of all statements; `skip` when empty.
    ///
    /// The parser produces right-folded sequences, so building corpora with
    /// this helper keeps parse/render round-trips structurally exact.
    pub fn seq_all(stmts: impl IntoIterator<Item = Stmt>) -> Stmt {
        let v: Vec<Stmt> = stmts.into_iter().collect();
        let mut it = v.into_iter().rev();
        match it.next() {
            None => Stmt::Skip,
            Some(last) => it.fold(last, |acc, s| Stmt::seq(s, acc)),
        }
    }

    pub fn collect_vars(&self, into: &mut BTreeSet<String>) {
        match self {
            Stmt::Skip => {}
            Stmt::Assign(x, rhs) => {
                into.insert(x.clone());
                rhs.collect_vars(into);
            }
            Stmt::If(c, t, e) => {
                c.collect_vars(into);
                t.collect_vars(into);
                e.collect_vars(into);
            }
            Stmt::Seq(a, b) => {
                a.collect_vars(into);
                b.collect_vars(into);
            }
        }
    }

    /// All variables read or written.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.collect_vars(&mut s);
        s
    }

    /// Variables appearing as assignment targets.
    pub fn assigned_vars(&self) -> BTreeSet<String> {
        let mut s = BTreeSet::new();
        self.collect_assigned(&mut s);
        s
    }

    fn collect_assigned(&self, into: &mut BTreeSet<String>) {
        match self {
            Stmt::Skip => {}
            Stmt::Assign(x, _) => {
                into.insert(x.clone());
            }
            Stmt::If(_, t, e) => {
                t.collect_assigned(into);
                e.collect_assigned(into);
            }
            Stmt::Seq(a, b) => {
                a.collect_assigned(into);
                b.collect_assigned(into);
            }
        }
    }

    /// Statement node count (formula sizes included).
    pub fn size(&self) -> usize {
        match self {
            Stmt::Skip => 1,
            Stmt::Assign(_, rhs) => 1 + rhs.size(),
            Stmt::If(c, t, e) => 1 + c.size() + t.size() + e.size(),
            Stmt::Seq(a, b) => a.size() + b.size(),
        }
    }

    pub fn rename(&self, map: &BTreeMap<String, String>) -> Stmt {
        match self {
            Stmt::Skip => Stmt::Skip,
            Stmt::Assign(x, rhs) => Stmt::Assign(
                map.get(x).cloned().unwrap_or_else(|| x.clone()),
                rhs.rename(map),
            ),
            Stmt::If(c, t, e) => {
                Stmt::if_else(c.rename(map), t.rename(map), e.rename(map))
            }
            Stmt::Seq(a, b) => Stmt::seq(a.rename(map), b.rename(map)),
        }
    }
}

/// A program: declaration lists plus a loop-free body.
///
/// `high` and `low` are the secret and public inputs, `out` the observed
/// outputs, `local` scratch space. The lists are pairwise disjoint except
/// that an `out` variable may double as a `high` or `low` input. Locals and
/// output-only variables start at `false`, so the program denotes a total
/// function from (high, low) valuations to out valuations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramUnit {
    pub high: Vec<String>,
    pub low: Vec<String>,
    pub out: Vec<String>,
    pub local: Vec<String>,
    pub body: Stmt,
}

impl ProgramUnit {
    pub fn new(
        high: Vec<String>,
        low: Vec<String>,
        out: Vec<String>,
        local: Vec<String>,
        body: Stmt,
    ) -> Result<ProgramUnit> {
        let p = ProgramUnit { high, low, out, local, body };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let lists: [(&str, &Vec<String>); 4] = [
            ("high", &self.high),
            ("low", &self.low),
            ("out", &self.out),
            ("local", &self.local),
        ];
        let mut kinds: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for (kind, names) in lists {
            for name in names {
                if !is_valid_ident(name) {
                    return Err(Error::InvalidIdentifier { name: name.clone() });
                }
                let seen = kinds.entry(name.as_str()).or_default();
                let compatible = match (seen.as_slice(), kind) {
                    ([], _) => true,
                    (["high"], "out") | (["low"], "out") => true,
                    _ => false,
                };
                if !compatible {
                    return Err(Error::DuplicateDeclaration { name: name.clone() });
                }
                seen.push(kind);
            }
        }
        let declared = self.declared_vars();
        for v in self.body.vars() {
            if !declared.contains(&v) {
                return Err(Error::UndeclaredVariable { name: v, line: 0, col: 0 });
            }
        }
        Ok(())
    }

    pub fn declared_vars(&self) -> BTreeSet<String> {
        self.high
            .iter()
            .chain(&self.low)
            .chain(&self.out)
            .chain(&self.local)
            .cloned()
            .collect()
    }

    pub fn is_input(&self, name: &str) -> bool {
        self.high.iter().any(|v| v == name) || self.low.iter().any(|v| v == name)
    }

    /// Non-input variables, in initialization order: locals first, then
    /// output-only variables; all start at `false`.
    pub fn scratch_vars(&self) -> Vec<String> {
        let mut v: Vec<String> = self.local.clone();
        v.extend(self.out.iter().filter(|o| !self.is_input(o)).cloned());
        v
    }

    pub fn input_bits(&self) -> u32 {
        (self.high.len() + self.low.len()) as u32
    }

    /// True when both programs declare the same ordered high and low lists.
    pub fn same_input_domain(&self, other: &ProgramUnit) -> bool {
        self.high == other.high && self.low == other.low
    }
}
