//! Dyadic admissibility and the spherical cosine rule.
//!
//! `Q₂(N)` is the set of rationals in `[−1, 1]` whose reduced denominator
//! divides `2^N`. Phase angles are carried as the fraction `f` of `π`. The
//! third side of a spherical triangle is `r1 + √r2 · cos(fπ)`, and
//! [`is_rational`] decides exactly whether that number is rational.

use std::fmt;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::interval::{self, Enclosure};
use crate::rational::{dyadic_level, rational_sqrt, round_half_toward_zero, two_pow};

/// Default cap on triples visited by [`incompatibility_search`].
pub const DEFAULT_SEARCH_BUDGET: u64 = 50_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrigError {
    #[error("cosine {0} outside [-1, 1]")]
    CosineOutOfRange(BigRational),
    #[error("phase fraction {0} outside [0, 1]")]
    PhaseOutOfRange(BigRational),
    #[error("{what} = {value} is not in Q2({level})")]
    NotInQ2 {
        what: &'static str,
        value: BigRational,
        level: u32,
    },
    #[error("search budget of {budget} triples exceeded after {searched}")]
    BudgetExceeded { searched: u64, budget: u64 },
    #[error("level {0} is too large for exhaustive search")]
    LevelTooLarge(u32),
}

/// `m / 2^N` in lowest terms: `m` odd, or `m = 0` with `N = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DyadicRational {
    numerator: BigInt,
    level: u32,
}

impl Serialize for DyadicRational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        crate::rational::ser_rational(&self.to_rational(), s)
    }
}

impl DyadicRational {
    pub fn new(numerator: BigInt, level: u32) -> Self {
        if numerator.is_zero() {
            return DyadicRational {
                numerator,
                level: 0,
            };
        }
        let tz = numerator.trailing_zeros().unwrap_or(0).min(level as u64) as u32;
        DyadicRational {
            numerator: numerator >> tz as usize,
            level: level - tz,
        }
    }

    pub fn from_rational(q: &BigRational) -> Option<Self> {
        dyadic_level(q).map(|level| DyadicRational {
            numerator: q.numer().clone(),
            level,
        })
    }

    pub fn numerator(&self) -> &BigInt {
        &self.numerator
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.numerator.clone(), two_pow(self.level))
    }
}

impl fmt::Display for DyadicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_rational().fmt(f)
    }
}

/// `φ = fπ` with `0 ≤ f ≤ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhaseAngle {
    fraction: BigRational,
}

impl PhaseAngle {
    pub fn new(fraction: BigRational) -> Result<Self, TrigError> {
        if fraction.is_negative() || fraction > BigRational::one() {
            return Err(TrigError::PhaseOutOfRange(fraction));
        }
        Ok(PhaseAngle { fraction })
    }

    pub fn fraction(&self) -> &BigRational {
        &self.fraction
    }

    pub fn dyadic(&self) -> Option<DyadicRational> {
        DyadicRational::from_rational(&self.fraction)
    }

    pub fn radians(&self) -> f64 {
        crate::rational::to_f64(&self.fraction) * std::f64::consts::PI
    }
}

impl fmt::Display for PhaseAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}π", self.fraction)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Rationality {
    Rational(#[serde(serialize_with = "crate::rational::ser_rational")] BigRational),
    Irrational,
}

impl Rationality {
    pub fn value(&self) -> Option<&BigRational> {
        match self {
            Rationality::Rational(q) => Some(q),
            Rationality::Irrational => None,
        }
    }
}

/// `r1 + √r2 · cos(φ)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraicCosine {
    pub r1: BigRational,
    pub r2: BigRational,
    pub phase: PhaseAngle,
}

impl AlgebraicCosine {
    pub fn enclosure(&self, bits: u32) -> Enclosure {
        let c = interval::cos_pi_multiple(self.phase.fraction(), bits);
        Enclosure::point(self.r1.clone()).add(&interval::sqrt(&self.r2, bits).mul(&c))
    }
}

/// Reduced denominator divides `2^N` and `|q| ≤ 1`.
pub fn in_q2n(q: &BigRational, level: u32) -> bool {
    q.abs() <= BigRational::one() && dyadic_level(q).is_some_and(|l| l <= level)
}

/// `cos(fπ)` when it is rational. By Niven's theorem that happens exactly when
/// `f mod 2` has reduced denominator 1, 2 or 3.
pub fn niven_cos(f: &BigRational) -> Option<BigRational> {
    let two = BigRational::from_integer(BigInt::from(2));
    let f = f - &two * (f / &two).floor();
    let d = f.denom();
    let n = f.numer();
    let half = |m: i64| BigRational::new(BigInt::from(m), BigInt::from(2));
    if d.is_one() {
        // f ∈ {0, 1}
        return Some(if n.is_zero() {
            BigRational::one()
        } else {
            -BigRational::one()
        });
    }
    if d == &BigInt::from(2) {
        return Some(BigRational::zero());
    }
    if d == &BigInt::from(3) {
        // f ∈ {1/3, 2/3, 4/3, 5/3}
        let n: i64 = n.try_into().expect("numerator below 6");
        return Some(if n == 1 || n == 5 { half(1) } else { half(-1) });
    }
    None
}

pub fn cos_phase_rationality(phase: &PhaseAngle) -> Rationality {
    match niven_cos(phase.fraction()) {
        Some(c) => Rationality::Rational(c),
        None => Rationality::Irrational,
    }
}

/// `cos²(fπ) = (1 + cos(2fπ)) / 2` when rational.
pub fn cos_squared(phase: &PhaseAngle) -> Option<BigRational> {
    let two = BigRational::from_integer(BigInt::from(2));
    niven_cos(&(phase.fraction() * &two)).map(|c| (BigRational::one() + c) / two)
}

fn check_cosine(c: &BigRational) -> Result<(), TrigError> {
    if c.abs() > BigRational::one() {
        Err(TrigError::CosineOutOfRange(c.clone()))
    } else {
        Ok(())
    }
}

/// Cosine rule on the sphere: `cos θ_ab = cos θ_ac cos θ_bc + sin θ_ac sin θ_bc cos φ`.
pub fn third_side(
    cos_ac: &BigRational,
    cos_bc: &BigRational,
    phase: &PhaseAngle,
) -> Result<AlgebraicCosine, TrigError> {
    check_cosine(cos_ac)?;
    check_cosine(cos_bc)?;
    let one = BigRational::one();
    Ok(AlgebraicCosine {
        r1: cos_ac * cos_bc,
        r2: (&one - cos_ac * cos_ac) * (&one - cos_bc * cos_bc),
        phase: phase.clone(),
    })
}

/// Per-phase facts reused across many `(r1, r2)` pairs.
#[derive(Debug, Clone)]
struct PhaseFacts {
    cos: Option<BigRational>,
    cos_squared: Option<BigRational>,
    below_right_angle: bool,
}

impl PhaseFacts {
    fn of(phase: &PhaseAngle) -> Self {
        PhaseFacts {
            cos: niven_cos(phase.fraction()),
            cos_squared: cos_squared(phase),
            below_right_angle: phase.fraction() < &BigRational::new(BigInt::one(), BigInt::from(2)),
        }
    }
}

fn decide(r1: &BigRational, r2: &BigRational, facts: &PhaseFacts) -> Rationality {
    if r2.is_zero() {
        return Rationality::Rational(r1.clone());
    }
    if let Some(c) = &facts.cos {
        if c.is_zero() {
            return Rationality::Rational(r1.clone());
        }
        return match rational_sqrt(r2) {
            Some(s) => Rationality::Rational(r1 + s * c),
            None => Rationality::Irrational,
        };
    }
    if let Some(c2) = &facts.cos_squared {
        // cos φ = ±√c2, positive below π/2.
        return match rational_sqrt(&(r2 * c2)) {
            Some(s) if facts.below_right_angle => Rationality::Rational(r1 + s),
            Some(s) => Rationality::Rational(r1 - s),
            None => Rationality::Irrational,
        };
    }
    // √r2 · cos φ rational would force r2 · cos²φ, hence cos²φ, to be rational.
    Rationality::Irrational
}

/// Exact decision of whether `r1 + √r2 · cos φ` is rational, and its value if so.
pub fn is_rational(a: &AlgebraicCosine) -> Rationality {
    decide(&a.r1, &a.r2, &PhaseFacts::of(&a.phase))
}

/// The third side is rational and lies in `Q₂(N)`.
pub fn admissible_third_side(
    cos_ac: &BigRational,
    cos_bc: &BigRational,
    phase: &PhaseAngle,
    level: u32,
) -> Result<bool, TrigError> {
    for (what, value) in [
        ("cos_ac", cos_ac),
        ("cos_bc", cos_bc),
        ("phase fraction", phase.fraction()),
    ] {
        if !in_q2n(value, level) {
            return Err(TrigError::NotInQ2 {
                what,
                value: value.clone(),
                level,
            });
        }
    }
    Ok(match is_rational(&third_side(cos_ac, cos_bc, phase)?) {
        Rationality::Rational(q) => in_q2n(&q, level),
        Rationality::Irrational => false,
    })
}

/// Which dyadic phases the search ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseRange {
    /// `0 < φ < π/2`.
    Open,
    /// `0 < φ ≤ π/2`, adding the right-angle family.
    WithRightAngle,
    /// `0 ≤ φ ≤ π`.
    Full,
}

impl PhaseRange {
    /// Phase fractions `j / 2^N` in the range, ascending.
    pub fn phases(self, level: u32) -> Vec<PhaseAngle> {
        let den = 1u64 << level;
        let js: Vec<u64> = match self {
            PhaseRange::Open if level == 0 => vec![],
            PhaseRange::Open => (1..den / 2).collect(),
            PhaseRange::WithRightAngle if level == 0 => vec![],
            PhaseRange::WithRightAngle => (1..=den / 2).collect(),
            PhaseRange::Full => (0..=den).collect(),
        };
        js.into_iter()
            .map(|j| PhaseAngle {
                fraction: BigRational::new(BigInt::from(j), BigInt::from(den)),
            })
            .collect()
    }
}

/// Every `m / 2^N` with `−2^N ≤ m ≤ 2^N`, ascending.
pub fn q2n_cosines(level: u32) -> Vec<BigRational> {
    let den = 1i64 << level;
    (-den..=den)
        .map(|m| BigRational::new(BigInt::from(m), BigInt::from(den)))
        .collect()
}

/// Number of triples the search visits.
pub fn search_size(level: u32, range: PhaseRange) -> u64 {
    let cos = (1u64 << (level + 1)) + 1;
    cos * cos * range.phases_len(level)
}

impl PhaseRange {
    fn phases_len(self, level: u32) -> u64 {
        let den = 1u64 << level;
        match self {
            PhaseRange::Open if level == 0 => 0,
            PhaseRange::Open => den / 2 - 1,
            PhaseRange::WithRightAngle if level == 0 => 0,
            PhaseRange::WithRightAngle => den / 2,
            PhaseRange::Full => den + 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TripleRecord {
    #[serde(serialize_with = "crate::rational::ser_rational")]
    pub cos_ac: BigRational,
    #[serde(serialize_with = "crate::rational::ser_rational")]
    pub cos_bc: BigRational,
    #[serde(serialize_with = "crate::rational::ser_rational")]
    pub phase_fraction: BigRational,
    pub verdict: Rationality,
    pub admissible: bool,
}

impl TripleRecord {
    /// Either cosine is `±1`, so the triangle collapses and `r2 = 0`.
    pub fn is_degenerate(&self) -> bool {
        self.cos_ac.abs().is_one() || self.cos_bc.abs().is_one()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchReport {
    pub level: u32,
    pub phase_range: PhaseRange,
    pub count_searched: u64,
    /// Admissible triples with both `|cos| < 1`.
    pub admissible_triples: Vec<TripleRecord>,
    /// Triples with a `±1` cosine; always admissible.
    pub degenerate_triples: Vec<TripleRecord>,
}

impl SearchReport {
    pub const CSV_HEADER: &'static str = "cos_ac,cos_bc,phase_fraction,verdict,value";

    /// One CSV row per catalogued triple (admissible first, then degenerate).
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in self.admissible_triples.iter().chain(&self.degenerate_triples) {
            let (verdict, value) = match &r.verdict {
                Rationality::Rational(q) => ("rational", q.to_string()),
                Rationality::Irrational => ("irrational", String::new()),
            };
            writeln!(
                out,
                "{},{},{},{verdict},{value}",
                r.cos_ac, r.cos_bc, r.phase_fraction
            )?;
        }
        Ok(())
    }
}

/// Enumerates every `(cos_ac, cos_bc, φ/π)` in `Q₂(N)³` with the phase in
/// `range`, and catalogues the admissible ones.
pub fn incompatibility_search(
    level: u32,
    range: PhaseRange,
    budget: u64,
) -> Result<SearchReport, TrigError> {
    if level > 24 {
        return Err(TrigError::LevelTooLarge(level));
    }
    let cosines = q2n_cosines(level);
    let phases: Vec<(PhaseAngle, PhaseFacts)> = range
        .phases(level)
        .into_iter()
        .map(|ph| {
            let facts = PhaseFacts::of(&ph);
            (ph, facts)
        })
        .collect();
    let row = cosines.len() as u64 * phases.len() as u64;
    let one = BigRational::one();

    let mut report = SearchReport {
        level,
        phase_range: range,
        count_searched: 0,
        admissible_triples: Vec::new(),
        degenerate_triples: Vec::new(),
    };
    for a in &cosines {
        if report.count_searched + row > budget {
            return Err(TrigError::BudgetExceeded {
                searched: report.count_searched,
                budget,
            });
        }
        let sin2_a = &one - a * a;
        let records: Vec<TripleRecord> = cosines
            .par_iter()
            .flat_map_iter(|b| {
                let r1 = a * b;
                let r2 = &sin2_a * (&one - b * b);
                let degenerate = a.abs().is_one() || b.abs().is_one();
                phases.iter().filter_map(move |(ph, facts)| {
                    let verdict = decide(&r1, &r2, facts);
                    let admissible = verdict.value().is_some_and(|q| in_q2n(q, level));
                    (admissible || degenerate).then(|| TripleRecord {
                        cos_ac: a.clone(),
                        cos_bc: b.clone(),
                        phase_fraction: ph.fraction().clone(),
                        verdict,
                        admissible,
                    })
                })
            })
            .collect();
        report.count_searched += row;
        for r in records {
            if r.is_degenerate() {
                report.degenerate_triples.push(r);
            } else {
                report.admissible_triples.push(r);
            }
        }
    }
    Ok(report)
}

/// Nearest `m / 2^N` to `target`, ties toward zero.
pub fn snap_cosine(target: &BigRational, level: u32) -> Result<DyadicRational, TrigError> {
    check_cosine(target)?;
    Ok(snap(target, level))
}

fn snap(target: &BigRational, level: u32) -> DyadicRational {
    let scaled = target * BigRational::from_integer(two_pow(level));
    DyadicRational::new(round_half_toward_zero(&scaled), level)
}

/// [`snap_cosine`] for the phase fraction `φ/π ∈ [0, 1]`.
pub fn snap_phase(target: &BigRational, level: u32) -> Result<PhaseAngle, TrigError> {
    PhaseAngle::new(target.clone())?;
    PhaseAngle::new(snap(target, level).to_rational())
}

/// `θ` snapped through its cosine: the angle whose cosine is the nearest
/// `m / 2^N` to `cos θ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnappedAngle {
    pub theta: f64,
    pub cosine: DyadicRational,
    pub snapped_theta: f64,
    /// `|θ′ − θ|` in radians.
    pub error: f64,
}

/// Snaps `θ ∈ [0, π]` (radians) to the invariant set at level `N`.
pub fn snap_theta(theta: f64, level: u32) -> Result<SnappedAngle, TrigError> {
    let c = BigRational::from_float(theta.cos())
        .ok_or_else(|| TrigError::CosineOutOfRange(BigRational::zero()))?;
    let cosine = snap_cosine(&c, level)?;
    let snapped_theta = crate::rational::to_f64(&cosine.to_rational()).clamp(-1.0, 1.0).acos();
    Ok(SnappedAngle {
        theta,
        error: (snapped_theta - theta).abs(),
        cosine,
        snapped_theta,
    })
}

/// Largest [`snap_theta`] error over `points` evenly spaced angles in `[0, π]`.
pub fn max_snap_error(level: u32, points: u32) -> f64 {
    let steps = points.max(2) - 1;
    (0..=steps)
        .into_par_iter()
        .map(|k| {
            let theta = std::f64::consts::PI * k as f64 / steps as f64;
            snap_theta(theta, level).map(|s| s.error).unwrap_or(f64::NAN)
        })
        .reduce(|| 0.0, f64::max)
}
