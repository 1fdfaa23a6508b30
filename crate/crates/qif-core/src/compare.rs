//! Leakage comparison between programs over a shared input space: exact
//! uniform-prior comparison, fixed-distribution comparison, the
//! distribution-universal order, and the partition-refinement check behind
//! it, together with witness distributions for failures.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow};
use serde_json::{json, Value};

use crate::dist::{InputDomain, JointDist};
use crate::error::{Error, Result};
use crate::exec::{bit_rev, bits_render, denotation, lex_iter, Denotation};
use crate::lang::ast::ProgramUnit;
use crate::qif::{posterior_guess, posterior_vulnerability, MeasureKind};

/// Outcome of a leakage comparison. `holds` answers "does the first program
/// leak at most as much as the second"; `conclusive` is false only on the
/// floating-point path when the measured gap is within the tolerance, where
/// `holds` defaults to true for a gap that small.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CmpOutcome {
    pub holds: bool,
    pub conclusive: bool,
}

/// A low input and two high inputs the first program tells apart while the
/// second does not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Counterexample {
    pub l: u64,
    pub h: u64,
    pub h2: u64,
}

impl Counterexample {
    pub fn to_json(&self, nh: usize, nl: usize) -> Value {
        json!({
            "l": bits_render(self.l, nl),
            "h": bits_render(self.h, nh),
            "h2": bits_render(self.h2, nh),
        })
    }
}

/// Verdict of the refinement check, with a counterexample when it fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RVerdict {
    pub holds: bool,
    pub counterexample: Option<Counterexample>,
}

impl RVerdict {
    pub fn to_json(&self, nh: usize, nl: usize) -> Value {
        json!({
            "holds": self.holds,
            "counterexample": self.counterexample.map(|c| c.to_json(nh, nl)),
        })
    }
}

fn ensure_same_inputs(m1: &ProgramUnit, m2: &ProgramUnit) -> Result<()> {
    if m1.same_input_domain(m2) {
        Ok(())
    } else {
        Err(Error::DomainMismatch {
            detail: format!(
                "programs must declare identical inputs: ({}; {}) vs ({}; {})",
                m1.high.join(" "),
                m1.low.join(" "),
                m2.high.join(" "),
                m2.low.join(" ")
            ),
        })
    }
}

fn sum_images(d: &Denotation) -> u64 {
    d.images_by_low().values().map(|s| s.len() as u64).sum()
}

fn max_image(d: &Denotation) -> u64 {
    d.images_by_low().values().map(|s| s.len() as u64).max().unwrap_or(0)
}

fn sum_squared_counts(d: &Denotation) -> u128 {
    d.class_counts().values().map(|n| (*n as u128) * (*n as u128)).sum()
}

/// Uniform-prior Shannon comparison, exactly: over a shared input space,
/// SE(m1) <= SE(m2) iff the product of n^n over m1's class sizes is at
/// least the same product for m2. Common factors are cancelled before the
/// big-integer comparison.
fn se_le_uniform(d1: &Denotation, d2: &Denotation) -> bool {
    let mut diff: BTreeMap<u64, i64> = BTreeMap::new();
    for n in d1.class_counts().values() {
        *diff.entry(*n).or_default() += 1;
    }
    for n in d2.class_counts().values() {
        *diff.entry(*n).or_default() -= 1;
    }
    let mut p1 = BigUint::one();
    let mut p2 = BigUint::one();
    for (n, d) in diff {
        if n <= 1 || d == 0 {
            continue;
        }
        let exp = n * d.unsigned_abs();
        let pw = BigUint::from(n).pow(exp);
        if d > 0 {
            p1 *= pw;
        } else {
            p2 *= pw;
        }
    }
    p1 >= p2
}

/// Does `m1` leak at most as much as `m2` under the uniform prior? Decided
/// by exact integer arithmetic for every measure.
pub fn cmp_uniform(
    m1: &ProgramUnit,
    m2: &ProgramUnit,
    kind: MeasureKind,
    capacity: u32,
) -> Result<bool> {
    ensure_same_inputs(m1, m2)?;
    let d1 = denotation(m1, capacity)?;
    let d2 = denotation(m2, capacity)?;
    Ok(match kind {
        MeasureKind::Se => se_le_uniform(&d1, &d2),
        MeasureKind::Me => sum_images(&d1) <= sum_images(&d2),
        MeasureKind::Cc => max_image(&d1) <= max_image(&d2),
        // guessing-entropy leakage shrinks as the squared class sizes grow
        MeasureKind::Ge => sum_squared_counts(&d1) >= sum_squared_counts(&d2),
    })
}

/// Does `m1` leak at most as much as `m2` under the given prior? Min-entropy
/// and guessing-entropy comparisons are exact; Shannon comparisons are exact
/// for the uniform prior and fall back to floats within `epsilon` otherwise.
/// Channel capacity does not depend on a prior and is rejected here.
pub fn cmp_dist(
    m1: &ProgramUnit,
    m2: &ProgramUnit,
    kind: MeasureKind,
    dist: &JointDist,
    epsilon: f64,
    capacity: u32,
) -> Result<CmpOutcome> {
    if kind == MeasureKind::Cc {
        return Err(Error::MeasureNeedsNoDist { measure: kind.name().into() });
    }
    ensure_same_inputs(m1, m2)?;
    if !dist.domain().matches_program(m1) {
        return Err(Error::DomainMismatch {
            detail: "distribution domain does not match the programs".into(),
        });
    }
    match kind {
        MeasureKind::Me => {
            // shared prior vulnerability cancels from the ratio
            let d1 = denotation(m1, capacity)?;
            let d2 = denotation(m2, capacity)?;
            let v1 = posterior_vulnerability(&d1, dist);
            let v2 = posterior_vulnerability(&d2, dist);
            Ok(CmpOutcome { holds: v1 <= v2, conclusive: true })
        }
        MeasureKind::Ge => {
            // shared prior guesswork cancels from the difference
            let d1 = denotation(m1, capacity)?;
            let d2 = denotation(m2, capacity)?;
            let g1 = posterior_guess(&d1, dist);
            let g2 = posterior_guess(&d2, dist);
            Ok(CmpOutcome { holds: g1 >= g2, conclusive: true })
        }
        MeasureKind::Se => {
            if dist.is_uniform() {
                let d1 = denotation(m1, capacity)?;
                let d2 = denotation(m2, capacity)?;
                return Ok(CmpOutcome {
                    holds: se_le_uniform(&d1, &d2),
                    conclusive: true,
                });
            }
            let s1 = crate::qif::se(m1, dist, capacity)?.value;
            let s2 = crate::qif::se(m2, dist, capacity)?.value;
            let d = s1 - s2;
            Ok(CmpOutcome { holds: d <= epsilon, conclusive: d.abs() >= epsilon })
        }
        MeasureKind::Cc => unreachable!(),
    }
}

/// The refinement relation behind the distribution-universal leakage order:
/// holds iff whenever `m1` maps two highs to different outputs under some
/// low, `m2` does too. On failure, reports the counterexample whose first
/// high is least in bit-string order under the least such low.
pub fn check_r(m1: &ProgramUnit, m2: &ProgramUnit, capacity: u32) -> Result<RVerdict> {
    ensure_same_inputs(m1, m2)?;
    let d1 = denotation(m1, capacity)?;
    let d2 = denotation(m2, capacity)?;
    let nh = m1.high.len();
    for l in lex_iter(m1.low.len()) {
        // group highs by m2 output; remember each group's first member, its
        // m1 output, and the group's first member whose m1 output differs
        let mut groups: BTreeMap<u64, (u64, u64, Option<u64>)> = BTreeMap::new();
        for h in lex_iter(nh) {
            let o2 = d2.output_for(h, l);
            let o1 = d1.output_for(h, l);
            match groups.entry(o2) {
                Entry::Vacant(e) => {
                    e.insert((h, o1, None));
                }
                Entry::Occupied(mut e) => {
                    let (_, first_o1, partner) = e.get_mut();
                    if partner.is_none() && o1 != *first_o1 {
                        *partner = Some(h);
                    }
                }
            }
        }
        let best = groups
            .into_values()
            .filter_map(|(h, _, partner)| partner.map(|h2| (h, h2)))
            .min_by_key(|(h, _)| bit_rev(*h, nh));
        if let Some((h, h2)) = best {
            return Ok(RVerdict {
                holds: false,
                counterexample: Some(Counterexample { l, h, h2 }),
            });
        }
    }
    Ok(RVerdict { holds: true, counterexample: None })
}

/// Does `m1` leak at most as much as `m2` under every prior? This coincides
/// with the refinement relation for each of the three prior-dependent
/// measures, so all kinds reduce to the same check.
pub fn universal_cmp(
    m1: &ProgramUnit,
    m2: &ProgramUnit,
    kind: MeasureKind,
    capacity: u32,
) -> Result<bool> {
    if kind == MeasureKind::Cc {
        return Err(Error::Usage(
            "universal comparison is defined for se, me, and ge".into(),
        ));
    }
    Ok(check_r(m1, m2, capacity)?.holds)
}

/// A prior on which `m1` measurably out-leaks `m2` under all three
/// prior-dependent measures: half the mass on each high of a refinement
/// counterexample. Errors with `RefinementHolds` when no such prior exists.
pub fn witness_distribution(
    m1: &ProgramUnit,
    m2: &ProgramUnit,
    capacity: u32,
) -> Result<JointDist> {
    let verdict = check_r(m1, m2, capacity)?;
    let Some(c) = verdict.counterexample else {
        return Err(Error::RefinementHolds);
    };
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    JointDist::from_table(
        InputDomain::of_program(m1),
        [((c.h, c.l), half.clone()), ((c.h2, c.l), half)],
    )
}
