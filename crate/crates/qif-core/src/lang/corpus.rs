//! Generated example programs: the two-bit guessing pair, the z/w swap
//! example, and the bit-blasted login checker family, together with the
//! closed-form Shannon leakage of the login programs under uniform inputs.
//!
//! Multi-bit values are little-endian bit vectors `v0 ... v_{n-1}`; bit 0 is
//! the `& 1` bit of the encoded integer.

use crate::error::{Error, Result};
use crate::lang::ast::{Formula, ProgramUnit, Stmt};

/// The guessing pair: `m1` reveals whether the 2-bit secret equals the
/// fixed guess (output encodes 0 on a match, 1 otherwise); `m2` copies the
/// secret to the output. No low inputs; 2-bit output.
pub struct IntroExamples {
    pub m1: ProgramUnit,
    pub m2: ProgramUnit,
}

impl IntroExamples {
    pub fn entries(&self) -> [(&'static str, &ProgramUnit); 2] {
        [("intro_m1", &self.m1), ("intro_m2", &self.m2)]
    }
}

/// Builds the guessing pair. The guess is the high input rendered as "01"
/// (h0 = 0, h1 = 1).
pub fn gen_intro_examples() -> IntroExamples {
    let guess = Formula::and(
        Formula::iff(Formula::var("h0"), Formula::ff()),
        Formula::iff(Formula::var("h1"), Formula::tt()),
    );
    let m1 = ProgramUnit::new(
        vec!["h0".into(), "h1".into()],
        vec![],
        vec!["o0".into(), "o1".into()],
        vec![],
        Stmt::if_else(
            guess,
            Stmt::seq_all([
                Stmt::assign("o0", Formula::ff()),
                Stmt::assign("o1", Formula::ff()),
            ]),
            Stmt::seq_all([
                Stmt::assign("o0", Formula::tt()),
                Stmt::assign("o1", Formula::ff()),
            ]),
        ),
    )
    .expect("generated program is well-formed");
    let m2 = ProgramUnit::new(
        vec!["h0".into(), "h1".into()],
        vec![],
        vec!["o0".into(), "o1".into()],
        vec![],
        Stmt::seq_all([
            Stmt::assign("o0", Formula::var("h0")),
            Stmt::assign("o1", Formula::var("h1")),
        ]),
    )
    .expect("generated program is well-formed");
    IntroExamples { m1, m2 }
}

/// The three-statement swap example: two high inputs x, y; observed
/// outputs z, w.
pub fn zw_example() -> ProgramUnit {
    ProgramUnit::new(
        vec!["x".into(), "y".into()],
        vec![],
        vec!["z".into(), "w".into()],
        vec![],
        Stmt::seq_all([
            Stmt::assign("z", Formula::var("x")),
            Stmt::assign("w", Formula::var("y")),
            Stmt::if_else(
                Formula::and(Formula::var("x"), Formula::var("y")),
                Stmt::assign("z", Formula::not(Formula::var("z"))),
                Stmt::assign("w", Formula::not(Formula::var("w"))),
            ),
        ]),
    )
    .expect("generated program is well-formed")
}

/// The login checker family over an n-bit secret H and n-bit guess L.
///
/// `m_spec` reports only whether H = L (output 0 on match). `m1` copies H
/// to the output. `m2` behaves like `m_spec` on a match but otherwise
/// outputs bit 0 of H. `m3` compares only the low floor(n/2) bits. `m4` is
/// the full equality check with the output polarity inverted (1 on match).
pub struct LoginCorpus {
    pub m_spec: ProgramUnit,
    pub m1: ProgramUnit,
    pub m2: ProgramUnit,
    pub m3: ProgramUnit,
    pub m4: ProgramUnit,
}

impl LoginCorpus {
    pub fn entries(&self) -> [(&'static str, &ProgramUnit); 5] {
        [
            ("login_spec", &self.m_spec),
            ("login_m1", &self.m1),
            ("login_m2", &self.m2),
            ("login_m3", &self.m3),
            ("login_m4", &self.m4),
        ]
    }
}

pub fn gen_login_corpus(n_bits: usize) -> Result<LoginCorpus> {
    if n_bits == 0 || n_bits > 24 {
        return Err(Error::CapacityExceeded { bits: n_bits as u32, capacity: 24 });
    }
    let highs: Vec<String> = (0..n_bits).map(|i| format!("h{i}")).collect();
    let lows: Vec<String> = (0..n_bits).map(|i| format!("l{i}")).collect();
    let eq_prefix = |k: usize| {
        Formula::and_all(
            (0..k).map(|i| Formula::iff(Formula::var(format!("h{i}")), Formula::var(format!("l{i}")))),
        )
    };
    let single_out_matcher = |cond: Formula, on_match: Formula, on_miss: Formula| {
        ProgramUnit::new(
            highs.clone(),
            lows.clone(),
            vec!["o".into()],
            vec![],
            Stmt::if_else(
                cond,
                Stmt::assign("o", on_match),
                Stmt::assign("o", on_miss),
            ),
        )
        .expect("generated program is well-formed")
    };

    let m_spec = single_out_matcher(eq_prefix(n_bits), Formula::ff(), Formula::tt());
    let m2 = single_out_matcher(eq_prefix(n_bits), Formula::ff(), Formula::var("h0"));
    let m3 = single_out_matcher(eq_prefix(n_bits / 2), Formula::ff(), Formula::tt());
    let m4 = single_out_matcher(eq_prefix(n_bits), Formula::tt(), Formula::ff());
    let m1 = ProgramUnit::new(
        highs.clone(),
        lows.clone(),
        (0..n_bits).map(|i| format!("o{i}")).collect(),
        vec![],
        Stmt::seq_all(
            (0..n_bits).map(|i| Stmt::assign(format!("o{i}"), Formula::var(format!("h{i}")))),
        ),
    )
    .expect("generated program is well-formed");

    Ok(LoginCorpus { m_spec, m1, m2, m3, m4 })
}

/// Which login program a closed form refers to (`m4` shares `m_spec`'s
/// Shannon leakage, so it has no entry of its own).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoginVariant {
    Spec,
    M1,
    M2,
    M3,
}

/// p log(1/p) with the 0 log(1/0) = 0 convention.
fn xlog2_recip(p: f64) -> f64 {
    if p <= 0.0 {
        0.0
    } else {
        -p * p.ln() / std::f64::consts::LN_2
    }
}

/// Binary entropy of a match event with probability 2^-m, computed so the
/// tiny tail term survives in double precision.
fn match_entropy(m: u32) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let p = 0.5f64.powi(m as i32);
    p * m as f64 + (1.0 - p) * (-(-p).ln_1p() / std::f64::consts::LN_2)
}

/// Closed-form Shannon leakage of the login programs under uniform inputs,
/// as a function of the bit width. Exact for every n >= 1:
///
/// * Spec: the output is a single match bit with match probability 2^-n
///   for each guess, so the leakage is the binary entropy of that event.
/// * M1: the whole n-bit secret is revealed.
/// * M2: for guesses with bit 0 clear the output is an unbiased bit; for
///   the other half its bias is 1/2 + 2^-n.
/// * M3: as Spec with floor(n/2) compared bits.
pub fn login_se_closed_form(variant: LoginVariant, n_bits: u32) -> f64 {
    match variant {
        LoginVariant::Spec => match_entropy(n_bits),
        LoginVariant::M1 => n_bits as f64,
        LoginVariant::M2 => {
            let eps = 0.5f64.powi(n_bits as i32);
            0.5 + 0.5 * (xlog2_recip(0.5 + eps) + xlog2_recip(0.5 - eps))
        }
        LoginVariant::M3 => match_entropy(n_bits / 2),
    }
}
