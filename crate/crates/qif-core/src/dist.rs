//! Exact rational joint distributions over the (high, low) input space.
//!
//! All arithmetic here is arbitrary-precision rational; logarithms happen
//! only at the last step inside the measure computations. The uniform
//! distribution is represented symbolically, never materialized, so large
//! input spaces stay cheap.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exec::{bits_parse, bits_render, lex_iter};
use crate::lang::ast::ProgramUnit;

/// Candidate support points are dropped with this probability by
/// `sample_random` when the caller does not override the sparsity.
pub const DEFAULT_SPARSITY: f64 = 0.25;

/// The ordered high and low variable lists a distribution ranges over.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputDomain {
    pub high: Vec<String>,
    pub low: Vec<String>,
}

impl InputDomain {
    pub fn of_program(p: &ProgramUnit) -> InputDomain {
        InputDomain { high: p.high.clone(), low: p.low.clone() }
    }

    pub fn bits(&self) -> u32 {
        (self.high.len() + self.low.len()) as u32
    }

    pub fn matches_program(&self, p: &ProgramUnit) -> bool {
        self.high == p.high && self.low == p.low
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Uniform,
    Table(BTreeMap<(u64, u64), BigRational>),
}

/// A probability mass function over packed (h, l) pairs. Invariants: all
/// masses positive rationals, keys in range, total mass exactly 1.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDist {
    domain: InputDomain,
    repr: Repr,
}

fn big(n: u64) -> BigInt {
    BigInt::from(n)
}

fn check_capacity(bits: u32, capacity: u32) -> Result<()> {
    if bits > capacity || bits > 63 {
        Err(Error::CapacityExceeded { bits, capacity: capacity.min(63) })
    } else {
        Ok(())
    }
}

impl JointDist {
    /// Uniform over the whole input space; every point has mass
    /// 1/(|high space| * |low space|).
    pub fn uniform(domain: InputDomain, capacity: u32) -> Result<JointDist> {
        check_capacity(domain.bits(), capacity)?;
        Ok(JointDist { domain, repr: Repr::Uniform })
    }

    /// Builds a distribution from explicit packed-key entries. Unlisted
    /// points have mass zero. Rejects out-of-range keys, duplicate keys,
    /// negative masses, and totals different from 1.
    pub fn from_table(
        domain: InputDomain,
        entries: impl IntoIterator<Item = ((u64, u64), BigRational)>,
    ) -> Result<JointDist> {
        let nh = domain.high.len();
        let nl = domain.low.len();
        let mut table: BTreeMap<(u64, u64), BigRational> = BTreeMap::new();
        let mut total = BigRational::zero();
        for ((h, l), mass) in entries {
            if (nh < 64 && h >> nh != 0) || (nl < 64 && l >> nl != 0) {
                return Err(Error::BadDistribution(format!(
                    "point ({h}, {l}) lies outside the {nh}+{nl} bit domain"
                )));
            }
            if mass.is_negative() {
                return Err(Error::BadDistribution(format!(
                    "negative mass {mass} at ({h}, {l})"
                )));
            }
            total += &mass;
            if !mass.is_zero() && table.insert((h, l), mass).is_some() {
                return Err(Error::BadDistribution(format!(
                    "duplicate entry for point ({h}, {l})"
                )));
            }
        }
        if !total.is_one() {
            return Err(Error::BadDistribution(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        Ok(JointDist { domain, repr: Repr::Table(table) })
    }

    /// Seeded random distribution for property tests. Each point of the
    /// input space is kept as a support candidate with probability
    /// 1 - sparsity (at least one candidate always survives); a power-of-two
    /// number of unit masses, at most 2^16, is then thrown uniformly onto
    /// the candidates, so every mass has a denominator dividing 2^16.
    pub fn sample_random(
        domain: InputDomain,
        seed: u64,
        sparsity: f64,
        capacity: u32,
    ) -> Result<JointDist> {
        check_capacity(domain.bits(), capacity.min(20))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nh = domain.high.len();
        let nl = domain.low.len();
        let mut candidates: Vec<(u64, u64)> = Vec::new();
        for h in lex_iter(nh) {
            for l in lex_iter(nl) {
                if rng.random::<f64>() >= sparsity {
                    candidates.push((h, l));
                }
            }
        }
        if candidates.is_empty() {
            candidates.push((0, 0));
        }
        let units: u64 = (candidates.len() as u64 * 8)
            .next_power_of_two()
            .clamp(64, 1 << 16);
        let mut tally: HashMap<(u64, u64), u64> = HashMap::new();
        for _ in 0..units {
            let i = rng.random_range(0..candidates.len());
            *tally.entry(candidates[i]).or_default() += 1;
        }
        let table: BTreeMap<(u64, u64), BigRational> = tally
            .into_iter()
            .map(|(k, c)| (k, BigRational::new(big(c), big(units))))
            .collect();
        Ok(JointDist { domain, repr: Repr::Table(table) })
    }

    pub fn domain(&self) -> &InputDomain {
        &self.domain
    }

    /// True when every point of the space carries equal mass.
    pub fn is_uniform(&self) -> bool {
        match &self.repr {
            Repr::Uniform => true,
            Repr::Table(t) => {
                let points = 1u128 << self.domain.bits();
                t.len() as u128 == points && {
                    let first = t.values().next();
                    t.values().all(|m| Some(m) == first)
                }
            }
        }
    }

    /// Mass at a packed point.
    pub fn mass(&self, h: u64, l: u64) -> BigRational {
        match &self.repr {
            Repr::Uniform => self.uniform_mass(),
            Repr::Table(t) => t.get(&(h, l)).cloned().unwrap_or_else(BigRational::zero),
        }
    }

    /// The per-point mass of the uniform distribution on this domain.
    pub fn uniform_mass(&self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::one() << self.domain.bits())
    }

    /// Number of support points.
    pub fn support_len(&self) -> u64 {
        match &self.repr {
            Repr::Uniform => 1u64 << self.domain.bits(),
            Repr::Table(t) => t.len() as u64,
        }
    }

    /// Visits every support point. The order is unspecified; sums over the
    /// support do not depend on it.
    pub fn for_each_mass(&self, mut f: impl FnMut(u64, u64, &BigRational)) {
        match &self.repr {
            Repr::Uniform => {
                let m = self.uniform_mass();
                for h in lex_iter(self.domain.high.len()) {
                    for l in lex_iter(self.domain.low.len()) {
                        f(h, l, &m);
                    }
                }
            }
            Repr::Table(t) => {
                for ((h, l), m) in t {
                    f(*h, *l, m);
                }
            }
        }
    }

    /// Marginal mass of each low valuation with positive probability.
    pub fn low_marginals(&self) -> BTreeMap<u64, BigRational> {
        let mut m: BTreeMap<u64, BigRational> = BTreeMap::new();
        self.for_each_mass(|_, l, mass| {
            let e = m.entry(l).or_insert_with(BigRational::zero);
            *e += mass;
        });
        m
    }

    /// Total mass; 1 by construction.
    pub fn total(&self) -> BigRational {
        let mut t = BigRational::zero();
        self.for_each_mass(|_, _, m| t += m);
        t
    }

    /// Serializes to the distribution file format: a `vars:` header naming
    /// the high and low lists separated by `|`, then one
    /// `<h-bits> <l-bits> <num>/<den>` line per support point in
    /// bit-string lexicographic order. `-` stands for an empty list.
    pub fn render(&self) -> String {
        let nh = self.domain.high.len();
        let nl = self.domain.low.len();
        let side = |names: &[String]| {
            if names.is_empty() {
                "-".to_string()
            } else {
                names.join(" ")
            }
        };
        let mut lines: Vec<((String, String), String)> = Vec::new();
        self.for_each_mass(|h, l, m| {
            lines.push((
                (bits_render(h, nh), bits_render(l, nl)),
                format!("{}/{}", m.numer(), m.denom()),
            ));
        });
        lines.sort();
        let mut s = format!(
            "vars: {} | {}\n",
            side(&self.domain.high),
            side(&self.domain.low)
        );
        for ((hb, lb), m) in lines {
            s.push_str(&format!("{hb} {lb} {m}\n"));
        }
        s
    }

    /// Parses the `render` format.
    pub fn parse(text: &str) -> Result<JointDist> {
        let bad = |msg: String| Error::BadDistribution(msg);
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty distribution file".into()))?;
        let rest = header
            .strip_prefix("vars:")
            .ok_or_else(|| bad("missing `vars:` header".into()))?;
        let (hs, ls) = rest
            .split_once('|')
            .ok_or_else(|| bad("header must separate high and low names with `|`".into()))?;
        let side = |s: &str| -> Vec<String> {
            let toks: Vec<String> = s.split_whitespace().map(str::to_string).collect();
            if toks == ["-"] {
                vec![]
            } else {
                toks
            }
        };
        let domain = InputDomain { high: side(hs), low: side(ls) };
        let (nh, nl) = (domain.high.len(), domain.low.len());
        let mut entries = Vec::new();
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(bad(format!("expected `<h> <l> <mass>`, got `{line}`")));
            }
            let (h, wh) = bits_parse(parts[0])?;
            let (l, wl) = bits_parse(parts[1])?;
            if wh != nh || wl != nl {
                return Err(bad(format!("bit widths do not match the header in `{line}`")));
            }
            let mass = parse_rational(parts[2])?;
            entries.push(((h, l), mass));
        }
        JointDist::from_table(domain, entries)
    }
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::BadDistribution(format!("bad rational `{s}`"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| bad())?;
    let d: BigInt = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}
