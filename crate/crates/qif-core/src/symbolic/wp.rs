//! Weakest preconditions for loop-free programs.
//!
//! `wp_naive` is the textbook transformer: substitution for assignments,
//! branching by implication pairs. Nested conditionals make it blow up
//! exponentially. `wp_optimized` instead passifies the program into a list
//! of single-assignment equations plus a transported postcondition; the
//! resulting formula grows only quadratically and agrees with the naive
//! transformer on every state once its auxiliary incarnation variables are
//! fixed by the equations.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::lang::ast::{Formula, ProgramUnit, Stmt};

/// Textbook weakest precondition.
pub fn wp_naive(s: &Stmt, post: &Formula) -> Formula {
    match s {
        Stmt::Skip => post.clone(),
        Stmt::Assign(x, rhs) => post.subst(x, rhs),
        Stmt::Seq(a, b) => wp_naive(a, &wp_naive(b, post)),
        Stmt::If(c, t, e) => Formula::and(
            Formula::implies(c.clone(), wp_naive(t, post)),
            Formula::implies(Formula::not(c.clone()), wp_naive(e, post)),
        ),
    }
}

/// Passive form of a program with respect to a postcondition: a list of
/// definitional equations `name <-> rhs` (in dependency order, each name
/// fresh) and the postcondition rewritten to final incarnations.
///
/// The passive form determines the weakest precondition in this sense: a
/// valuation of the original program variables satisfies `wp_naive(s, post)`
/// iff extending it through the equations (each auxiliary gets the value of
/// its right-hand side, in order) satisfies `post`'s rewritten form. The
/// implication `formula()` is therefore valid iff `wp_naive(s, post)` is.
#[derive(Debug, Clone)]
pub struct PassiveForm {
    pub equations: Vec<(String, Formula)>,
    pub post: Formula,
}

impl PassiveForm {
    /// `(AND of equations) => post`, one formula of size linear in the
    /// passive form.
    pub fn formula(&self) -> Formula {
        Formula::implies(
            Formula::and_all(
                self.equations
                    .iter()
                    .map(|(n, rhs)| Formula::iff(Formula::var(n.clone()), rhs.clone())),
            ),
            self.post.clone(),
        )
    }

    /// Evaluates the passive form on a valuation of the original variables
    /// by running the equations forward; equals `wp_naive` on that state.
    pub fn eval_under(&self, base: &BTreeMap<String, bool>) -> bool {
        let mut env = base.clone();
        for (name, rhs) in &self.equations {
            let v = rhs.eval_map(&env);
            env.insert(name.clone(), v);
        }
        self.post.eval_map(&env)
    }

    /// Total node count, for growth comparisons.
    pub fn size(&self) -> usize {
        self.post.size()
            + self
                .equations
                .iter()
                .map(|(_, rhs)| 1 + rhs.size())
                .sum::<usize>()
    }
}

struct Passifier {
    used: BTreeSet<String>,
    counters: BTreeMap<String, u32>,
    equations: Vec<(String, Formula)>,
}

impl Passifier {
    fn fresh(&mut self, base: &str) -> String {
        loop {
            let k = self.counters.entry(base.to_string()).or_insert(0);
            *k += 1;
            let candidate = format!("{base}_{k}");
            if self.used.insert(candidate.clone()) {
                return candidate;
            }
        }
    }

    fn current(env: &BTreeMap<String, String>, x: &str) -> String {
        env.get(x).cloned().unwrap_or_else(|| x.to_string())
    }

    fn walk(&mut self, s: &Stmt, env: &mut BTreeMap<String, String>) {
        match s {
            Stmt::Skip => {}
            Stmt::Assign(x, rhs) => {
                let rhs = rhs.rename(env);
                let name = self.fresh(x);
                self.equations.push((name.clone(), rhs));
                env.insert(x.clone(), name);
            }
            Stmt::Seq(a, b) => {
                self.walk(a, env);
                self.walk(b, env);
            }
            Stmt::If(c, t, e) => {
                let cond = c.rename(env);
                let guard = self.fresh("g");
                self.equations.push((guard.clone(), cond));
                let mut env_t = env.clone();
                self.walk(t, &mut env_t);
                let mut env_e = env.clone();
                self.walk(e, &mut env_e);
                let mut touched: BTreeSet<String> = t.assigned_vars();
                touched.extend(e.assigned_vars());
                for x in touched {
                    let tn = Self::current(&env_t, &x);
                    let en = Self::current(&env_e, &x);
                    if tn == en {
                        continue;
                    }
                    let merged = self.fresh(&x);
                    self.equations.push((
                        merged.clone(),
                        Formula::or(
                            Formula::and(Formula::var(guard.clone()), Formula::var(tn)),
                            Formula::and(
                                Formula::not(Formula::var(guard.clone())),
                                Formula::var(en),
                            ),
                        ),
                    ));
                    env.insert(x, merged);
                }
            }
        }
    }
}

/// Passifies `s` against `post`. Auxiliary names are `base_k` for assigned
/// variables and `g_k` for branch guards, chosen fresh against everything
/// in sight.
pub fn passify(s: &Stmt, post: &Formula) -> PassiveForm {
    let mut used: BTreeSet<String> = s.vars();
    used.extend(post.vars());
    let mut p = Passifier { used, counters: BTreeMap::new(), equations: Vec::new() };
    let mut env = BTreeMap::new();
    p.walk(s, &mut env);
    let post = post.rename(&env);
    PassiveForm { equations: p.equations, post }
}

/// Weakest precondition via passification: one implication whose size is
/// quadratic in `|s| + |post|`. Valid iff `wp_naive(s, post)` is valid; on
/// states of the original variables the two agree once the auxiliaries are
/// determined by the equations (see `PassiveForm::eval_under`).
pub fn wp_optimized(s: &Stmt, post: &Formula) -> Formula {
    passify(s, post).formula()
}

/// Copies a program with every declared variable renamed to `name_tag`.
/// Bodies mentioning only declared variables stay well-formed; the tag must
/// be a nonempty run of identifier characters.
pub fn rename_apart(p: &ProgramUnit, tag: &str) -> Result<ProgramUnit> {
    let tag_ok = !tag.is_empty()
        && tag
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'');
    if !tag_ok {
        return Err(Error::BadRenameTag { tag: tag.to_string() });
    }
    let map: BTreeMap<String, String> = p
        .declared_vars()
        .into_iter()
        .map(|v| {
            let renamed = format!("{v}_{tag}");
            (v, renamed)
        })
        .collect();
    let rename_list =
        |names: &[String]| names.iter().map(|n| map[n].clone()).collect::<Vec<_>>();
    ProgramUnit::new(
        rename_list(&p.high),
        rename_list(&p.low),
        rename_list(&p.out),
        rename_list(&p.local),
        p.body.rename(&map),
    )
}
