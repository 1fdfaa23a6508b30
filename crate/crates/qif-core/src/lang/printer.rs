//! Pretty-printer; inverse of the parser on its own output.
//!
//! Sequences are printed flat and re-parse right-folded, so programs built
//! with `Stmt::seq_all` (the parser, the corpus generators, the samplers)
//! round-trip to structurally equal ASTs.

use crate::lang::ast::{Formula, ProgramUnit, Stmt};

const PREC_ATOM: u8 = 3;
const PREC_NOT: u8 = 2;
const PREC_AND: u8 = 1;

fn prec(f: &Formula) -> u8 {
    match f {
        Formula::True | Formula::Var(_) => PREC_ATOM,
        Formula::Not(_) => PREC_NOT,
        Formula::And(_, _) => PREC_AND,
    }
}

fn render_into(f: &Formula, min_prec: u8, out: &mut String) {
    if prec(f) < min_prec {
        out.push('(');
        render_into(f, 0, out);
        out.push(')');
        return;
    }
    match f {
        Formula::True => out.push_str("true"),
        Formula::Var(x) => out.push_str(x),
        Formula::Not(a) => {
            out.push('!');
            render_into(a, PREC_NOT, out);
        }
        Formula::And(a, b) => {
            render_into(a, PREC_AND, out);
            out.push_str(" & ");
            render_into(b, PREC_AND + 1, out);
        }
    }
}

/// Renders a core formula with minimal parentheses.
pub fn render_formula(f: &Formula) -> String {
    let mut s = String::new();
    render_into(f, 0, &mut s);
    s
}

fn flatten<'a>(s: &'a Stmt, into: &mut Vec<&'a Stmt>) {
    match s {
        Stmt::Seq(a, b) => {
            flatten(a, into);
            flatten(b, into);
        }
        other => into.push(other),
    }
}

fn render_leaf(s: &Stmt, out: &mut String) {
    match s {
        Stmt::Skip => out.push_str("skip"),
        Stmt::Assign(x, rhs) => {
            out.push_str(x);
            out.push_str(" := ");
            render_into(rhs, 0, out);
        }
        Stmt::If(c, t, e) => {
            out.push_str("if ");
            render_into(c, 0, out);
            out.push_str(" then { ");
            render_stmt(t, "; ", out);
            out.push_str(" } else { ");
            render_stmt(e, "; ", out);
            out.push_str(" }");
        }
        Stmt::Seq(_, _) => unreachable!("flatten removes Seq nodes"),
    }
}

fn render_stmt(s: &Stmt, sep: &str, out: &mut String) {
    let mut leaves = Vec::new();
    flatten(s, &mut leaves);
    for (i, leaf) in leaves.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        render_leaf(leaf, out);
    }
}

/// Renders a full program; `parse_program` returns an equal AST for any
/// program whose sequences are right-folded.
pub fn render_program(p: &ProgramUnit) -> String {
    let mut s = String::new();
    for (kw, list) in [
        ("high", &p.high),
        ("low", &p.low),
        ("out", &p.out),
        ("local", &p.local),
    ] {
        if !list.is_empty() {
            s.push_str(kw);
            s.push(' ');
            s.push_str(&list.join(", "));
            s.push_str(";\n");
        }
    }
    render_stmt(&p.body, ";\n", &mut s);
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parser::{parse_formula, parse_program};
    use rand::{Rng, SeedableRng};

    #[test]
    fn formula_rendering_uses_minimal_parens() {
        let f = Formula::and(
            Formula::and(Formula::var("a"), Formula::var("b")),
            Formula::var("c"),
        );
        assert_eq!(render_formula(&f), "a & b & c");

        let g = Formula::and(
            Formula::var("a"),
            Formula::and(Formula::var("b"), Formula::var("c")),
        );
        assert_eq!(render_formula(&g), "a & (b & c)");

        let h = Formula::not(Formula::and(Formula::var("a"), Formula::var("b")));
        assert_eq!(render_formula(&h), "!(a & b)");

        let i = Formula::not(Formula::not(Formula::var("a")));
        assert_eq!(render_formula(&i), "!!a");
    }

    #[test]
    fn random_core_formulas_round_trip() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let f = random_core(&mut rng, 14);
            let text = render_formula(&f);
            let back = parse_formula(&text).unwrap_or_else(|e| panic!("reparse `{text}`: {e}"));
            assert_eq!(back, f, "round trip of `{text}`");
        }
    }

    fn random_core(rng: &mut impl Rng, fuel: usize) -> Formula {
        if fuel == 0 || rng.random_range(0..4) == 0 {
            return match rng.random_range(0..3) {
                0 => Formula::tt(),
                _ => Formula::var(["a", "b", "c", "d"][rng.random_range(0..4)]),
            };
        }
        if rng.random_range(0..2) == 0 {
            Formula::and(random_core(rng, fuel / 2), random_core(rng, fuel / 2))
        } else {
            Formula::not(random_core(rng, fuel - 1))
        }
    }

    #[test]
    fn program_round_trip() {
        let src = "high h0, h1;\nlow l0;\nout o0;\nlocal t;\n\
                   t := h0 & !l0;\nif t == h1 then { o0 := t; t := false } else { skip };\no0 := o0 & t\n";
        let p = parse_program(src).unwrap();
        let rendered = render_program(&p);
        let back = parse_program(&rendered).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn skip_round_trips() {
        let p = parse_program("skip").unwrap();
        assert_eq!(p.body, Stmt::Skip);
        assert_eq!(parse_program(&render_program(&p)).unwrap(), p);
    }
}
