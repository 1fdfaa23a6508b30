//! Verification conditions for non-interference and for the refinement
//! relation, via self-composition: run renamed copies of the programs in
//! sequence, constrain the shared inputs, and compare outputs in the
//! postcondition. The generated condition is valid iff the property holds;
//! a model of its negation decodes to a concrete counterexample.

use crate::compare::{Counterexample, RVerdict};
use crate::error::{Error, Result};
use crate::lang::ast::{Formula, ProgramUnit, Stmt};
use crate::symbolic::cnf::{tseitin_cnf, Cnf};
use crate::symbolic::sat::dpll_sat;
use crate::symbolic::wp::{rename_apart, wp_naive, wp_optimized};

/// Which weakest-precondition transformer to build conditions with. The
/// passified transformer is the default; the naive one exists to cross-check
/// it and for exponential-growth demonstrations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WpMode {
    Naive,
    #[default]
    Optimized,
}

fn wp(mode: WpMode, s: &Stmt, post: &Formula) -> Formula {
    match mode {
        WpMode::Naive => wp_naive(s, post),
        WpMode::Optimized => wp_optimized(s, post),
    }
}

/// Initialization prefix: locals and pure outputs start false.
fn init_stmts(p: &ProgramUnit) -> Vec<Stmt> {
    p.scratch_vars()
        .into_iter()
        .map(|v| Stmt::assign(v, Formula::ff()))
        .collect()
}

fn block(p: &ProgramUnit) -> Vec<Stmt> {
    let mut v = init_stmts(p);
    v.push(p.body.clone());
    v
}

fn pairwise_iff<'a>(
    a: impl IntoIterator<Item = &'a String>,
    b: impl IntoIterator<Item = &'a String>,
) -> Vec<Formula> {
    a.into_iter()
        .zip(b)
        .map(|(x, y)| Formula::iff(Formula::var(x.clone()), Formula::var(y.clone())))
        .collect()
}

fn pairwise_xor<'a>(
    a: impl IntoIterator<Item = &'a String>,
    b: impl IntoIterator<Item = &'a String>,
) -> Vec<Formula> {
    a.into_iter()
        .zip(b)
        .map(|(x, y)| Formula::xor(Formula::var(x.clone()), Formula::var(y.clone())))
        .collect()
}

/// Non-interference condition for `m` using the chosen transformer: two
/// copies on equal lows must agree on every output. Valid iff `m` is
/// non-interferent.
pub fn vc_ni_using(m: &ProgramUnit, mode: WpMode) -> Result<Formula> {
    let a = rename_apart(m, "c1a")?;
    let b = rename_apart(m, "c1b")?;
    let mut stmts = block(&a);
    stmts.extend(block(&b));
    let program = Stmt::seq_all(stmts);
    let ante = Formula::and_all(pairwise_iff(&a.low, &b.low));
    let post = Formula::and_all(pairwise_iff(&a.out, &b.out));
    Ok(Formula::implies(ante, wp(mode, &program, &post)))
}

pub fn vc_ni(m: &ProgramUnit) -> Result<Formula> {
    vc_ni_using(m, WpMode::default())
}

///// Refinement condition for `(m1, m2)` over a shared input space: four
/// copies (each program on each of two high inputs, all on one low input),
/// and whenever the `m1` copies disagree on some output, the `m2` copies
/// must too. Valid iff the refinement relation holds.
pub fn vc_r_using(m1: &ProgramUnit, m2: &ProgramUnit, mode: WpMode) -> Result<Formula> {
    if !m1.same_input_domain(m2) {
        return Err(Error::DomainMismatch {
            detail: "refinement conditions need identical input declarations".into(),
        });
    }
    let c1a = rename_apart(m1, "c1a")?;
    let c1b = rename_apart(m1, "c1b")?;
    let c2a = rename_apart(m2, "c2a")?;
    let c2b = rename_apart(m2, "c2b")?;
    let mut stmts = block(&c1a);
    stmts.extend(block(&c1b));
    stmts.extend(block(&c2a));
    stmts.extend(block(&c2b));
    let program = Stmt::seq_all(stmts);

    let mut ante = Vec::new();
    ante.extend(pairwise_iff(&c1a.low, &c1b.low));
    ante.extend(pairwise_iff(&c1a.low, &c2a.low));
    ante.extend(pairwise_iff(&c1a.low, &c2b.low));
    ante.extend(pairwise_iff(&c1a.high, &c2a.high));
    ante.extend(pairwise_iff(&c1b.high, &c2b.high));

    let post = Formula::implies(
        Formula::or_all(pairwise_xor(&c1a.out, &c1b.out)),
        Formula::or_all(pairwise_xor(&c2a.out, &c2b.out)),
    );
    Ok(Formula::implies(
        Formula::and_all(ante),
        wp(mode, &program, &post),
    ))
}

pub fn vc_r(m1: &ProgramUnit, m2: &ProgramUnit) -> Result<Formula> {
    vc_r_using(m1, m2, WpMode::default())
}

fn read_packed(cnf: &Cnf, model: &[bool], names: &[String], tag: &str) -> u64 {
    let mut v = 0u64;
    for (j, n) in names.iter().enumerate() {
        if cnf.model_value(model, &format!("{n}_{tag}")) {
            v |= 1 << j;
        }
    }
    v
}

/// Decides non-interference by refuting the verification condition. A
/// failed check carries two highs and a low on which the outputs differ.
pub fn check_ni_symbolic(m: &ProgramUnit) -> Result<RVerdict> {
    let vc = vc_ni(m)?;
    let cnf = tseitin_cnf(&Formula::not(vc));
    match dpll_sat(&cnf) {
        None => Ok(RVerdict { holds: true, counterexample: None }),
        Some(model) => Ok(RVerdict {
            holds: false,
            counterexample: Some(Counterexample {
                l: read_packed(&cnf, &model, &m.low, "c1a"),
                h: read_packed(&cnf, &model, &m.high, "c1a"),
                h2: read_packed(&cnf, &model, &m.high, "c1b"),
            }),
        }),
    }
}

/// Decides the refinement relation by refuting the verification condition.
/// A failed check carries a low and two highs that `m1` tells apart while
/// `m2` does not.
pub fn check_r_symbolic(m1: &ProgramUnit, m2: &ProgramUnit) -> Result<RVerdict> {
    let vc = vc_r(m1, m2)?;
    let cnf = tseitin_cnf(&Formula::not(vc));
    match dpll_sat(&cnf) {
        None => Ok(RVerdict { holds: true, counterexample: None }),
        Some(model) => Ok(RVerdict {
            holds: false,
            counterexample: Some(Counterexample {
                l: read_packed(&cnf, &model, &m1.low, "c1a"),
                h: read_packed(&cnf, &model, &m1.high, "c1a"),
                h2: read_packed(&cnf, &model, &m1.high, "c1b"),
            }),
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compare::check_r;
    use crate::exec::{denotation, is_non_interferent, DEFAULT_CAPACITY_BITS};
    use crate::lang::corpus::{gen_intro_examples, gen_login_corpus};
    use crate::lang::parse_program;
    use crate::lang::sample::{random_formula_over, random_pair, random_program, ProgramShape};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const CAP: u32 = DEFAULT_CAPACITY_BITS;

    fn shape() -> ProgramShape {
        ProgramShape {
            n_high: 2,
            n_low: 2,
            n_out: 2,
            n_local: 1,
            max_stmts: 4,
            max_depth: 2,
            formula_fuel: 6,
        }
    }

    fn replay_ni(m: &ProgramUnit, v: &RVerdict) {
        let c = v.counterexample.expect("failed check carries a counterexample");
        let den = denotation(m, CAP).unwrap();
        assert_ne!(c.h, c.h2);
        assert_ne!(den.output_for(c.h, c.l), den.output_for(c.h2, c.l));
    }

    #[test]
    fn copy_is_interferent_and_masked_copy_is_not() {
        let leaky = parse_program("high h; low l; out o; o := h == l").unwrap();
        let v = check_ni_symbolic(&leaky).unwrap();
        assert!(!v.holds);
        replay_ni(&leaky, &v);

        let safe = parse_program("high h; low l; out o; o := l & !l").unwrap();
        assert!(check_ni_symbolic(&safe).unwrap().holds);

        let masked =
            parse_program("high h; out o; local t; t := h; o := t & !h & h").unwrap();
        assert!(check_ni_symbolic(&masked).unwrap().holds);
    }

    #[test]
    fn vc_ni_modes_agree_with_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x111);
        let sh = shape();
        for i in 0..60 {
            let p = random_program(&mut rng, &sh);
            let brute = is_non_interferent(&p, CAP).unwrap();
            let sym = check_ni_symbolic(&p).unwrap();
            assert_eq!(sym.holds, brute, "program {i}");
            if !sym.holds {
                replay_ni(&p, &sym);
            }
            let naive_vc = vc_ni_using(&p, WpMode::Naive).unwrap();
            let naive_unsat = dpll_sat(&tseitin_cnf(&Formula::not(naive_vc))).is_none();
            assert_eq!(naive_unsat, brute, "naive mode disagrees on program {i}");
        }
    }

    #[test]
    fn refinement_check_matches_enumeration() {
        let intro = gen_intro_examples();
        assert!(check_r_symbolic(&intro.m1, &intro.m2).unwrap().holds);
        let v = check_r_symbolic(&intro.m2, &intro.m1).unwrap();
        assert!(!v.holds);
        let c = v.counterexample.unwrap();
        let d1 = denotation(&intro.m2, CAP).unwrap();
        let d2 = denotation(&intro.m1, CAP).unwrap();
        assert_ne!(d1.output_for(c.h, c.l), d1.output_for(c.h2, c.l));
        assert_eq!(d2.output_for(c.h, c.l), d2.output_for(c.h2, c.l));

        let mut rng = ChaCha8Rng::seed_from_u64(0x222);
        let sh = shape();
        for i in 0..40 {
            let (a, b) = random_pair(&mut rng, &sh);
            let brute = check_r(&a, &b, CAP).unwrap();
            let sym = check_r_symbolic(&a, &b).unwrap();
            assert_eq!(sym.holds, brute.holds, "pair {i}");
            if let Some(c) = sym.counterexample {
                let d1 = denotation(&a, CAP).unwrap();
                let d2 = denotation(&b, CAP).unwrap();
                assert_ne!(d1.output_for(c.h, c.l), d1.output_for(c.h2, c.l));
                assert_eq!(d2.output_for(c.h, c.l), d2.output_for(c.h2, c.l));
            }
        }
    }

    #[test]
    fn login_refinements_at_small_width() {
        let c = gen_login_corpus(3).unwrap();
        assert!(check_r_symbolic(&c.m4, &c.m_spec).unwrap().holds);
        assert!(check_r_symbolic(&c.m_spec, &c.m4).unwrap().holds);
        assert!(!check_r_symbolic(&c.m1, &c.m_spec).unwrap().holds);
        assert!(!check_r_symbolic(&c.m_spec, &c.m2).unwrap().holds);
    }

    #[test]
    fn tautological_guard_collapses_to_non_interference() {
        // out := phi(high) is non-interferent exactly when phi is constant;
        // conjoining a fresh high variable rules the tautology case out
        let mut rng = ChaCha8Rng::seed_from_u64(0x333);
        let vars: Vec<String> = (0..4).map(|i| format!("h{i}")).collect();
        for _ in 0..30 {
            let phi = random_formula_over(&mut rng, &vars, 6);
            let guarded = Formula::and(phi.clone(), Formula::var("hx"));
            let mut highs = vars.clone();
            highs.push("hx".into());
            let p = ProgramUnit::new(
                highs,
                vec![],
                vec!["o".into()],
                vec![],
                Stmt::if_else(
                    guarded,
                    Stmt::assign("o", Formula::tt()),
                    Stmt::assign("o", Formula::ff()),
                ),
            )
            .unwrap();
            let ni = check_ni_symbolic(&p).unwrap().holds;
            let phi_unsat = dpll_sat(&tseitin_cnf(&phi)).is_none();
            assert_eq!(ni, phi_unsat);
        }
    }

    #[test]
    fn mismatched_domains_are_rejected() {
        let a = parse_program("high h; out o; o := h").unwrap();
        let b = parse_program("high g; out o; o := g").unwrap();
        assert!(matches!(
            vc_r(&a, &b),
            Err(Error::DomainMismatch { .. })
        ));
    }
}
