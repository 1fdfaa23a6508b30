//! Leakage measures for loop-free boolean programs: Shannon entropy,
//! min-entropy, guessing entropy, and channel capacity.
//!
//! Every measure is computed over the program's exact denotation. Arithmetic
//! stays in arbitrary-precision rationals (or integer class counts, for the
//! uniform prior) until the final logarithm, and each report carries an
//! exact payload whenever the quantity has a finite exact description.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::dist::JointDist;
use crate::error::{Error, Result};
use crate::exec::{bit_rev, bits_render, denotation, lex_iter, Denotation};
use crate::lang::ast::ProgramUnit;

/// Which leakage measure to compute or compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeasureKind {
    Se,
    Me,
    Ge,
    Cc,
}

impl MeasureKind {
    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::Se => "se",
            MeasureKind::Me => "me",
            MeasureKind::Ge => "ge",
            MeasureKind::Cc => "cc",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<MeasureKind> {
        match s {
            "se" => Ok(MeasureKind::Se),
            "me" => Ok(MeasureKind::Me),
            "ge" => Ok(MeasureKind::Ge),
            "cc" => Ok(MeasureKind::Cc),
            _ => Err(Error::Usage(format!(
                "unknown measure `{s}` (expected se, me, ge, or cc)"
            ))),
        }
    }
}

/// Whether a reported value was derived purely from exact arithmetic or
/// involved floating-point accumulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithMode {
    Exact,
    Float,
}

impl ArithMode {
    pub fn name(self) -> &'static str {
        match self {
            ArithMode::Exact => "exact",
            ArithMode::Float => "float",
        }
    }
}

/// Result of a measure computation. `value` is the measure in bits; `exact`
/// holds a textual exact form when one exists (a rational, an integer
/// summary, or a class-count multiset from which the value is recoverable
/// without rounding).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureReport {
    pub measure: MeasureKind,
    pub value: f64,
    pub exact: Option<String>,
    pub mode: ArithMode,
}

impl MeasureReport {
    pub fn to_json(&self) -> Value {
        json!({
            "measure": self.measure.name(),
            "value": self.value,
            "exact": self.exact,
            "mode": self.mode.name(),
        })
    }
}

// ---------------------------------------------------------------------------
// numeric helpers

/// log2 of a positive big integer, accurate to the last f64 bit for any size.
pub(crate) fn big_log2(x: &BigInt) -> f64 {
    debug_assert!(x.is_positive());
    let bits = x.bits();
    if bits <= 53 {
        return x.to_f64().unwrap().log2();
    }
    let shift = bits - 53;
    let top: BigInt = x >> shift;
    top.to_f64().unwrap().log2() + shift as f64
}

/// log2 of a positive rational.
pub(crate) fn ratio_log2(r: &BigRational) -> f64 {
    debug_assert!(r.is_positive());
    big_log2(r.numer()) - big_log2(r.denom())
}

/// Rational to f64 without overflowing intermediate conversions; keeps about
/// 60 significant bits by scaled integer division.
pub(crate) fn ratio_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    let neg = r.is_negative();
    let n = r.numer().abs();
    let d = r.denom().clone();
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    let v = if nb <= 52 && db <= 52 {
        n.to_f64().unwrap() / d.to_f64().unwrap()
    } else {
        let k = (62 - (nb - db)).max(0) as u64;
        let q: BigInt = (&n << k) / &d;
        q.to_f64().unwrap() * 2f64.powi(-(k as i32))
    };
    if neg {
        -v
    } else {
        v
    }
}

fn rat(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

// ---------------------------------------------------------------------------
// exact vulnerability and guesswork

/// V(H | L): the prior expected probability of guessing the high input in
/// one try, given only the low input.
pub fn prior_vulnerability(dist: &JointDist) -> BigRational {
    if dist.is_uniform() {
        // each low contributes 1/(N*L); summed over L lows this is 1/N
        return rat(1, 1u64 << dist.domain().high.len());
    }
    let mut best: BTreeMap<u64, BigRational> = BTreeMap::new();
    dist.for_each_mass(|_, l, m| {
        let e = best.entry(l).or_insert_with(BigRational::zero);
        if *m > *e {
            *e = m.clone();
        }
    });
    best.into_values().sum()
}

/// V(H | O, L): as above but with the program's output also observed.
pub fn posterior_vulnerability(den: &Denotation, dist: &JointDist) -> BigRational {
    if dist.is_uniform() {
        let classes: u64 = den.images_by_low().values().map(|s| s.len() as u64).sum();
        return rat(classes, 1u64 << dist.domain().bits());
    }
    let mut best: BTreeMap<(u64, u64), BigRational> = BTreeMap::new();
    dist.for_each_mass(|h, l, m| {
        let o = den.output_for(h, l);
        let e = best.entry((l, o)).or_insert_with(BigRational::zero);
        if *m > *e {
            *e = m.clone();
        }
    });
    best.into_values().sum()
}

/// Expected number of guesses for an optimal guesser that orders the highs
/// by nonincreasing mass. Ties are broken toward the lexicographically
/// smaller valuation; the expectation does not depend on the tie order.
fn guesswork(groups: BTreeMap<u64, Vec<(u64, BigRational)>>, nh: usize) -> BigRational {
    let mut total = BigRational::zero();
    for (_, mut members) in groups {
        members.sort_by(|(h1, m1), (h2, m2)| {
            m2.cmp(m1).then_with(|| bit_rev(*h1, nh).cmp(&bit_rev(*h2, nh)))
        });
        for (rank, (_, m)) in members.iter().enumerate() {
            total += BigRational::from(BigInt::from(rank as u64 + 1)) * m;
        }
    }
    total
}

/// G(H | L): expected guesses knowing only the low input.
pub fn prior_guess(dist: &JointDist) -> BigRational {
    let nh = dist.domain().high.len();
    if dist.is_uniform() {
        // sum over lows of sum_{i=1..N} i/(N*L) = (N+1)/2
        return rat((1u64 << nh) + 1, 2);
    }
    let mut groups: BTreeMap<u64, Vec<(u64, BigRational)>> = BTreeMap::new();
    dist.for_each_mass(|h, l, m| {
        groups.entry(l).or_default().push((h, m.clone()));
    });
    guesswork(groups, nh)
}

/// G(H | O, L): expected guesses after observing the output as well.
pub fn posterior_guess(den: &Denotation, dist: &JointDist) -> BigRational {
    let nh = dist.domain().high.len();
    if dist.is_uniform() {
        // each class of size n contributes n*(n+1)/2 unit masses
        let mut num = num_bigint::BigUint::from(0u32);
        for n in den.class_counts().values() {
            let n = num_bigint::BigUint::from(*n);
            num += &n * (&n + 1u32);
        }
        let den_bits = dist.domain().bits();
        return BigRational::new(
            BigInt::from(num),
            BigInt::from(1u64) << (den_bits + 1),
        );
    }
    let mut groups: BTreeMap<(u64, u64), Vec<(u64, BigRational)>> = BTreeMap::new();
    dist.for_each_mass(|h, l, m| {
        let o = den.output_for(h, l);
        groups.entry((l, o)).or_default().push((h, m.clone()));
    });
    // flatten the (l, o) keys; guesswork only needs the grouping
    let flat: BTreeMap<u64, Vec<(u64, BigRational)>> = groups
        .into_values()
        .enumerate()
        .map(|(i, v)| (i as u64, v))
        .collect();
    guesswork(flat, nh)
}

// ---------------------------------------------------------------------------
// the measures

fn prep(p: &ProgramUnit, dist: &JointDist, capacity: u32) -> Result<Denotation> {
    if !dist.domain().matches_program(p) {
        return Err(Error::DomainMismatch {
            detail: format!(
                "distribution over ({}; {}) does not match program inputs ({}; {})",
                dist.domain().high.join(" "),
                dist.domain().low.join(" "),
                p.high.join(" "),
                p.low.join(" ")
            ),
        });
    }
    denotation(p, capacity)
}

/// Multiset of equivalence-class sizes as `n^multiplicity` pairs, smallest
/// class size first.
fn count_multiset(den: &Denotation) -> BTreeMap<u64, u64> {
    let mut mult: BTreeMap<u64, u64> = BTreeMap::new();
    for n in den.class_counts().values() {
        *mult.entry(*n).or_default() += 1;
    }
    mult
}

fn render_multiset(mult: &BTreeMap<u64, u64>) -> String {
    mult.iter()
        .map(|(n, m)| format!("{n}^{m}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Shannon-entropy leakage SE = H(H | L) - H(H | O, L); for deterministic
/// programs this equals H(O | L) under the given prior.
pub fn se(p: &ProgramUnit, dist: &JointDist, capacity: u32) -> Result<MeasureReport> {
    let den = prep(p, dist, capacity)?;
    if dist.is_uniform() {
        let nh = p.high.len() as u32;
        let points = 1u64 << dist.domain().bits();
        let mult = count_multiset(&den);
        let mut weighted = 0.0;
        for (n, m) in &mult {
            weighted += (*m as f64) * (*n as f64) * (*n as f64).log2();
        }
        let value = nh as f64 - weighted / points as f64;
        return Ok(MeasureReport {
            measure: MeasureKind::Se,
            value,
            exact: Some(format!(
                "N={};L={};counts={}",
                1u64 << nh,
                1u64 << p.low.len(),
                render_multiset(&mult)
            )),
            mode: ArithMode::Exact,
        });
    }
    // float path over the exact class masses
    let mut class: BTreeMap<(u64, u64), BigRational> = BTreeMap::new();
    let mut marg: BTreeMap<u64, BigRational> = BTreeMap::new();
    dist.for_each_mass(|h, l, m| {
        let o = den.output_for(h, l);
        *class.entry((l, o)).or_insert_with(BigRational::zero) += m;
        *marg.entry(l).or_insert_with(BigRational::zero) += m;
    });
    let mut value = 0.0;
    for ((l, _), m) in &class {
        if m.is_zero() {
            continue;
        }
        let ratio = &marg[l] / m;
        value += ratio_to_f64(m) * ratio_log2(&ratio);
    }
    Ok(MeasureReport {
        measure: MeasureKind::Se,
        value,
        exact: None,
        mode: ArithMode::Float,
    })
}

/// Min-entropy leakage ME = log2( V(H|O,L) / V(H|L) ).
pub fn me(p: &ProgramUnit, dist: &JointDist, capacity: u32) -> Result<MeasureReport> {
    let den = prep(p, dist, capacity)?;
    let prior = prior_vulnerability(dist);
    let post = posterior_vulnerability(&den, dist);
    let ratio = post / prior;
    Ok(MeasureReport {
        measure: MeasureKind::Me,
        value: ratio_log2(&ratio),
        exact: Some(ratio.to_string()),
        mode: ArithMode::Exact,
    })
}

/// Guessing-entropy leakage GE = G(H|L) - G(H|O,L).
pub fn ge(p: &ProgramUnit, dist: &JointDist, capacity: u32) -> Result<MeasureReport> {
    let den = prep(p, dist, capacity)?;
    let diff = prior_guess(dist) - posterior_guess(&den, dist);
    Ok(MeasureReport {
        measure: MeasureKind::Ge,
        value: ratio_to_f64(&diff),
        exact: Some(diff.to_string()),
        mode: ArithMode::Exact,
    })
}

/// Channel capacity CC = max over lows of log2 |image(l)|; the exact payload
/// names the lexicographically first low attaining the maximum.
pub fn cc(p: &ProgramUnit, capacity: u32) -> Result<MeasureReport> {
    let den = denotation(p, capacity)?;
    let images = den.images_by_low();
    let mut max = 0u64;
    let mut arg = 0u64;
    for l in lex_iter(p.low.len()) {
        let k = images[&l].len() as u64;
        if k > max {
            max = k;
            arg = l;
        }
    }
    Ok(MeasureReport {
        measure: MeasureKind::Cc,
        value: (max as f64).log2(),
        exact: Some(format!("max={max};l={}", bits_render(arg, p.low.len()))),
        mode: ArithMode::Exact,
    })
}

/// Dispatch by kind. `dist: None` means the uniform prior; `cc` rejects an
/// explicit distribution since it maximizes over all priors.
pub fn measure(
    p: &ProgramUnit,
    kind: MeasureKind,
    dist: Option<&JointDist>,
    capacity: u32,
) -> Result<MeasureReport> {
    if kind == MeasureKind::Cc {
        if dist.is_some() {
            return Err(Error::MeasureNeedsNoDist { measure: kind.name().into() });
        }
        return cc(p, capacity);
    }
    let uniform;
    let dist = match dist {
        Some(d) => d,
        None => {
            uniform = JointDist::uniform(
                crate::dist::InputDomain::of_program(p),
                capacity,
            )?;
            &uniform
        }
    };
    match kind {
        MeasureKind::Se => se(p, dist, capacity),
        MeasureKind::Me => me(p, dist, capacity),
        MeasureKind::Ge => ge(p, dist, capacity),
        MeasureKind::Cc => unreachable!(),
    }
}

/// Conditional Shannon entropy H(X | Y) of an exact joint distribution,
/// given as ((x, y), mass) pairs. Masses must be nonnegative and sum to 1;
/// repeated cells are accumulated.
pub fn shannon_cond_entropy<X: Ord, Y: Ord>(joint: &[((X, Y), BigRational)]) -> f64 {
    let mut cells: BTreeMap<(&X, &Y), BigRational> = BTreeMap::new();
    let mut marg: BTreeMap<&Y, BigRational> = BTreeMap::new();
    for ((x, y), m) in joint {
        if m.is_zero() {
            continue;
        }
        *cells.entry((x, y)).or_insert_with(BigRational::zero) += m;
        *marg.entry(y).or_insert_with(BigRational::zero) += m;
    }
    let mut h = 0.0;
    for ((_, y), m) in &cells {
        let ratio = &marg[y] / m;
        h += ratio_to_f64(m) * ratio_log2(&ratio);
    }
    h
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::dist::{InputDomain, DEFAULT_SPARSITY};
    use crate::exec::{evaluate, is_non_interferent, ni_counterexample, DEFAULT_CAPACITY_BITS};
    use crate::lang::corpus::{
        gen_intro_examples, gen_login_corpus, login_se_closed_form, zw_example, LoginVariant,
    };
    use crate::lang::sample::{random_ni_program, random_program, ProgramShape};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const CAP: u32 = DEFAULT_CAPACITY_BITS;

    fn uniform_for(p: &ProgramUnit) -> JointDist {
        JointDist::uniform(InputDomain::of_program(p), CAP).unwrap()
    }

    fn rr(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn intro_pair_measures() {
        let intro = gen_intro_examples();
        let u = uniform_for(&intro.m1);

        let s1 = se(&intro.m1, &u, CAP).unwrap();
        let expect = 2.0 - 0.75 * 3f64.log2();
        assert!((s1.value - expect).abs() < 1e-12);
        assert!((s1.value - 0.81128).abs() < 1e-4);
        assert_eq!(s1.exact.as_deref(), Some("N=4;L=1;counts=1^1,3^1"));
        assert_eq!(s1.mode, ArithMode::Exact);
        let s2 = se(&intro.m2, &u, CAP).unwrap();
        assert_eq!(s2.value, 2.0);
        assert_eq!(s2.exact.as_deref(), Some("N=4;L=1;counts=1^4"));

        let m1 = me(&intro.m1, &u, CAP).unwrap();
        assert_eq!(m1.value, 1.0);
        assert_eq!(m1.exact.as_deref(), Some("2"));
        let m2 = me(&intro.m2, &u, CAP).unwrap();
        assert_eq!(m2.value, 2.0);
        assert_eq!(m2.exact.as_deref(), Some("4"));

        let g1 = ge(&intro.m1, &u, CAP).unwrap();
        assert_eq!(g1.exact.as_deref(), Some("3/4"));
        let g2 = ge(&intro.m2, &u, CAP).unwrap();
        assert_eq!(g2.exact.as_deref(), Some("3/2"));

        let c1 = cc(&intro.m1, CAP).unwrap();
        assert_eq!(c1.value, 1.0);
        assert_eq!(c1.exact.as_deref(), Some("max=2;l=-"));
        let c2 = cc(&intro.m2, CAP).unwrap();
        assert_eq!(c2.value, 2.0);
        assert_eq!(c2.exact.as_deref(), Some("max=4;l=-"));
    }

    #[test]
    fn zw_measures() {
        let p = zw_example();
        let u = uniform_for(&p);
        let s = se(&p, &u, CAP).unwrap();
        assert_eq!(s.value, 1.5);
        assert_eq!(s.exact.as_deref(), Some("N=4;L=1;counts=1^2,2^1"));
        let m = me(&p, &u, CAP).unwrap();
        assert!((m.value - 3f64.log2()).abs() < 1e-12);
        assert_eq!(m.exact.as_deref(), Some("3"));
        let g = ge(&p, &u, CAP).unwrap();
        assert_eq!(g.exact.as_deref(), Some("5/4"));
        let c = cc(&p, CAP).unwrap();
        assert!((c.value - 3f64.log2()).abs() < 1e-12);
        assert_eq!(c.exact.as_deref(), Some("max=3;l=-"));
    }

    #[test]
    fn login_small_widths_match_closed_forms() {
        for n in [1usize, 2, 3] {
            let c = gen_login_corpus(n).unwrap();
            for (variant, p) in [
                (LoginVariant::Spec, &c.m_spec),
                (LoginVariant::M1, &c.m1),
                (LoginVariant::M2, &c.m2),
                (LoginVariant::M3, &c.m3),
            ] {
                let u = uniform_for(p);
                let got = se(p, &u, CAP).unwrap().value;
                let want = login_se_closed_form(variant, n as u32);
                assert!(
                    (got - want).abs() < 1e-9,
                    "{variant:?} n={n}: enumerated {got}, closed form {want}"
                );
            }
        }
    }

    #[test]
    fn fixed_dist_guessing_entropy_with_ties() {
        let p = crate::lang::parse_program("high h0, h1; out o; o := h0").unwrap();
        let d = JointDist::from_table(
            InputDomain::of_program(&p),
            [
                ((0b00, 0), rr(3, 8)),
                ((0b01, 0), rr(3, 8)),
                ((0b10, 0), rr(1, 8)),
                ((0b11, 0), rr(1, 8)),
            ],
        )
        .unwrap();
        let g = ge(&p, &d, CAP).unwrap();
        assert_eq!(g.exact.as_deref(), Some("3/4"));
        assert_eq!(g.value, 0.75);
        // permuting the table construction order changes nothing
        let d2 = JointDist::from_table(
            InputDomain::of_program(&p),
            [
                ((0b11, 0), rr(1, 8)),
                ((0b00, 0), rr(3, 8)),
                ((0b10, 0), rr(1, 8)),
                ((0b01, 0), rr(3, 8)),
            ],
        )
        .unwrap();
        assert_eq!(ge(&p, &d2, CAP).unwrap(), g);
    }

    #[test]
    fn two_point_distribution_leaks_one_bit() {
        let p = crate::lang::parse_program(
            "high h0, h1; low l0; out o; if h0 == h1 then { o := l0 } else { o := !l0 }",
        )
        .unwrap();
        assert!(!is_non_interferent(&p, CAP).unwrap());
        let (l, h, h2) = ni_counterexample(&p, CAP).unwrap().unwrap();
        let d = JointDist::from_table(
            InputDomain::of_program(&p),
            [((h, l), rr(1, 2)), ((h2, l), rr(1, 2))],
        )
        .unwrap();
        assert_eq!(se(&p, &d, CAP).unwrap().value, 1.0);
        assert_eq!(me(&p, &d, CAP).unwrap().exact.as_deref(), Some("2"));
        assert_eq!(ge(&p, &d, CAP).unwrap().exact.as_deref(), Some("1/2"));
    }

    #[test]
    fn se_equals_conditional_output_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5e5e);
        let shape = ProgramShape {
            n_high: 3,
            n_low: 2,
            n_out: 2,
            n_local: 1,
            max_stmts: 5,
            max_depth: 2,
            formula_fuel: 8,
        };
        for i in 0..40 {
            let p = random_program(&mut rng, &shape);
            let dom = InputDomain::of_program(&p);
            let d = if i % 2 == 0 {
                JointDist::uniform(dom, CAP).unwrap()
            } else {
                JointDist::sample_random(dom, 1000 + i, DEFAULT_SPARSITY, CAP).unwrap()
            };
            let den = denotation(&p, CAP).unwrap();
            let mut joint: Vec<((u64, u64), BigRational)> = Vec::new();
            d.for_each_mass(|h, l, m| {
                joint.push(((den.output_for(h, l), l), m.clone()));
            });
            let href = shannon_cond_entropy(&joint);
            let got = se(&p, &d, CAP).unwrap().value;
            assert!(
                (got - href).abs() < 1e-9,
                "program {i}: se {got} vs H(O|L) {href}"
            );
        }
    }

    #[test]
    fn zero_leakage_characterizes_non_interference() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x17);
        let shape = ProgramShape {
            n_high: 3,
            n_low: 2,
            n_out: 2,
            n_local: 1,
            max_stmts: 5,
            max_depth: 2,
            formula_fuel: 8,
        };
        for i in 0..60 {
            let p = if i % 3 == 0 {
                random_ni_program(&mut rng, &shape)
            } else {
                random_program(&mut rng, &shape)
            };
            let u = uniform_for(&p);
            let leak = se(&p, &u, CAP).unwrap().value;
            let ni = is_non_interferent(&p, CAP).unwrap();
            if ni {
                assert!(leak.abs() < 1e-12, "NI program with leak {leak}");
            } else {
                assert!(leak > 1e-12, "interferent program with leak {leak}");
            }
        }
    }

    #[test]
    fn shannon_leakage_never_exceeds_capacity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xcc);
        let shape = ProgramShape {
            n_high: 3,
            n_low: 2,
            n_out: 2,
            n_local: 0,
            max_stmts: 4,
            max_depth: 2,
            formula_fuel: 6,
        };
        for i in 0..50 {
            let p = random_program(&mut rng, &shape);
            let d = JointDist::sample_random(
                InputDomain::of_program(&p),
                2000 + i,
                DEFAULT_SPARSITY,
                CAP,
            )
            .unwrap();
            let s = se(&p, &d, CAP).unwrap().value;
            let c = cc(&p, CAP).unwrap().value;
            assert!(s <= c + 1e-9, "se {s} > cc {c}");
        }
    }

    #[test]
    fn xlog_subadditivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let a = rng.random_range(1u64..1000);
            let b = rng.random_range(1u64..1000);
            let c = rng.random_range(0u64..1000);
            let t = a + b + c;
            let p = rat(a, t);
            let q = rat(b, t);
            let lhs = ratio_to_f64(&p) * ratio_log2(&(rat(1, 1) / &p))
                + ratio_to_f64(&q) * ratio_log2(&(rat(1, 1) / &q));
            let s = &p + &q;
            let rhs = ratio_to_f64(&s) * ratio_log2(&(rat(1, 1) / &s));
            assert!(lhs >= rhs - 1e-12, "p={p} q={q}: {lhs} < {rhs}");
        }
    }

    // Iterative capacity maximization over input priors, as an independent
    // check that max log2 |image(l)| really is the capacity of each
    // deterministic per-low channel.
    fn iterative_capacity(den: &Denotation, nh: usize, l: u64) -> f64 {
        let n = 1usize << nh;
        let mut p = vec![1.0 / n as f64; n];
        let outs: Vec<u64> = lex_iter(nh).map(|h| den.output_for(h, l)).collect();
        let mut cap = 0.0;
        for _ in 0..100 {
            let mut q: HashMap<u64, f64> = HashMap::new();
            for (i, o) in outs.iter().enumerate() {
                *q.entry(*o).or_default() += p[i];
            }
            let d: Vec<f64> = outs.iter().map(|o| -q[o].log2()).collect();
            cap = (0..n).map(|i| p[i] * d[i]).sum();
            let w: Vec<f64> = (0..n).map(|i| p[i] * d[i].exp2()).collect();
            let z: f64 = w.iter().sum();
            for i in 0..n {
                p[i] = w[i] / z;
            }
        }
        cap
    }

    #[test]
    fn capacity_agrees_with_iterative_maximization() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xba);
        let shape = ProgramShape {
            n_high: 3,
            n_low: 2,
            n_out: 2,
            n_local: 1,
            max_stmts: 5,
            max_depth: 2,
            formula_fuel: 8,
        };
        for _ in 0..20 {
            let p = random_program(&mut rng, &shape);
            let den = denotation(&p, CAP).unwrap();
            let mut best: f64 = 0.0;
            for l in lex_iter(p.low.len()) {
                best = best.max(iterative_capacity(&den, p.high.len(), l));
            }
            let c = cc(&p, CAP).unwrap().value;
            assert!((best - c).abs() < 1e-6, "iterative {best} vs exact {c}");
        }
        let intro = gen_intro_examples();
        let den = denotation(&intro.m2, CAP).unwrap();
        assert!((iterative_capacity(&den, 2, 0) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn dispatch_and_domain_checks() {
        let intro = gen_intro_examples();
        let r = measure(&intro.m1, MeasureKind::Ge, None, CAP).unwrap();
        assert_eq!(r.exact.as_deref(), Some("3/4"));
        let zw = zw_example();
        let wrong = uniform_for(&zw);
        assert!(matches!(
            se(&intro.m1, &wrong, CAP),
            Err(Error::DomainMismatch { .. })
        ));
        let u = uniform_for(&intro.m1);
        assert!(matches!(
            measure(&intro.m1, MeasureKind::Cc, Some(&u), CAP),
            Err(Error::MeasureNeedsNoDist { .. })
        ));
    }

    #[test]
    fn report_json_shape() {
        let intro = gen_intro_examples();
        let r = ge(&intro.m1, &uniform_for(&intro.m1), CAP).unwrap();
        let v = r.to_json();
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"exact":"3/4","measure":"ge","mode":"exact","value":0.75}"#
        );
    }

    #[test]
    fn evaluate_matches_denotation() {
        let zw = zw_example();
        let den = denotation(&zw, CAP).unwrap();
        let mut inputs = BTreeMap::new();
        inputs.insert("x".to_string(), true);
        inputs.insert("y".to_string(), true);
        let out = evaluate(&zw, &inputs).unwrap();
        assert_eq!(out["z"], false);
        assert_eq!(out["w"], true);
        let packed = den.output_for(0b11, 0);
        assert_eq!(packed & 1, 0); // z
        assert_eq!(packed >> 1 & 1, 1); // w
    }
}
