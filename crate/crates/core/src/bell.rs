//! Bell and CHSH bookkeeping on the invariant set.
//!
//! Correlations follow `Corr(a, b) = cos θ_ab` unless the singlet convention
//! (`−cos θ_ab`) is selected. A setting pair is on the invariant set at level
//! `N` when its correlation is a rational in `Q₂(N)`.
//!
//! The joint quantity `A` needs all four setting pairs for one hidden state.
//! Under the invariant-set rule, once the realized pair `(a_i, b_j)` is on the
//! set, the single-swap counterfactuals `(a_k, b_j)` and `(a_i, b_k)` are not,
//! so `A` is reported as undefined together with those pairs. `A′` instead
//! combines four separate sub-experiments, each with its own admissible
//! (snapped) correlation, and is always a finite exact rational.

use std::fmt;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::interval::{self, Enclosure, DEFAULT_BITS};
use crate::rational::{ser_rational, to_f64, two_pow};
use crate::trig::{in_q2n, niven_cos, snap_cosine, DyadicRational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BellError {
    #[error("realized pair index ({0}, {1}) is not in {{1, 2}}²")]
    BadPairIndex(usize, usize),
    #[error("pair {pair} has correlation {correlation}, not in Q2({level})")]
    OffInvariantSet {
        pair: PairLabel,
        correlation: String,
        level: u32,
    },
    #[error("pair {pair}: snapped angle is {deviation:.3e} rad from nominal, above the resolution {resolution:.3e}")]
    OutsideResolution {
        pair: PairLabel,
        deviation: f64,
        resolution: f64,
    },
    #[error("correlation of {0} is irrational and cannot be sampled exactly")]
    NotSampleable(PairLabel),
    #[error("a sub-experiment needs at least one trial")]
    NoTrials,
    #[error("cannot snap correlation of {0}: enclosure straddles a rounding boundary")]
    Indeterminate(PairLabel),
}

/// A measurement orientation, as a fraction of `π` reduced into `[0, 2)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Orientation {
    angle: BigRational,
}

impl Orientation {
    pub fn new(angle: BigRational) -> Self {
        let two = BigRational::from_integer(BigInt::from(2));
        let reduced = &angle - &two * (&angle / &two).floor();
        Orientation { angle: reduced }
    }

    pub fn angle(&self) -> &BigRational {
        &self.angle
    }

    pub fn radians(&self) -> f64 {
        to_f64(&self.angle) * std::f64::consts::PI
    }

    /// Relative angle folded into `[0, 1]` (as a fraction of `π`).
    pub fn relative_to(&self, other: &Orientation) -> BigRational {
        let d = Orientation::new(&self.angle - &other.angle).angle;
        if d > BigRational::one() {
            BigRational::from_integer(BigInt::from(2)) - d
        } else {
            d
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}π", self.angle)
    }
}

/// Exact when rational, otherwise a certified enclosure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RealNumber {
    Exact(BigRational),
    Enclosed(Enclosure),
}

impl RealNumber {
    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            RealNumber::Exact(q) => Some(q),
            RealNumber::Enclosed(_) => None,
        }
    }

    pub fn enclosure(&self) -> Enclosure {
        match self {
            RealNumber::Exact(q) => Enclosure::point(q.clone()),
            RealNumber::Enclosed(e) => e.clone(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            RealNumber::Exact(q) => to_f64(q),
            RealNumber::Enclosed(e) => e.to_f64(),
        }
    }

    fn neg(&self) -> Self {
        match self {
            RealNumber::Exact(q) => RealNumber::Exact(-q),
            RealNumber::Enclosed(e) => RealNumber::Enclosed(e.neg()),
        }
    }
}

impl fmt::Display for RealNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RealNumber::Exact(q) => q.fmt(f),
            RealNumber::Enclosed(e) => write!(f, "≈{:.12}", e.to_f64()),
        }
    }
}

impl Serialize for RealNumber {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(2))?;
        match self {
            RealNumber::Exact(q) => {
                m.serialize_entry("exact", &q.to_string())?;
                m.serialize_entry("approx", &to_f64(q))?;
            }
            RealNumber::Enclosed(e) => {
                m.serialize_entry("approx", &e.to_f64())?;
                m.serialize_entry("precision", &to_f64(&e.width()))?;
            }
        }
        m.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// `Corr(a, b) = cos θ_ab`.
    #[default]
    Cosine,
    /// `Corr(a, b) = −cos θ_ab`, the textbook singlet sign.
    Singlet,
}

impl Convention {
    fn sign(self) -> i32 {
        match self {
            Convention::Cosine => 1,
            Convention::Singlet => -1,
        }
    }
}

/// `cos θ_ab`, exact when the relative angle has a rational cosine.
pub fn correlation_exact(a: &Orientation, b: &Orientation) -> RealNumber {
    let rel = a.relative_to(b);
    match niven_cos(&rel) {
        Some(c) => RealNumber::Exact(c),
        None => RealNumber::Enclosed(interval::cos_pi_multiple(&rel, DEFAULT_BITS)),
    }
}

fn correlation_with(a: &Orientation, b: &Orientation, convention: Convention) -> RealNumber {
    let c = correlation_exact(a, b);
    if convention.sign() < 0 {
        c.neg()
    } else {
        c
    }
}

pub fn correlation_on_invariant_set(c: &RealNumber, level: u32) -> bool {
    c.exact().is_some_and(|q| in_q2n(q, level))
}

/// The pair's correlation is a rational in `Q₂(N)`.
pub fn pair_on_invariant_set(a: &Orientation, b: &Orientation, level: u32) -> bool {
    correlation_on_invariant_set(&correlation_exact(a, b), level)
}

/// Which settings a pair uses; `primed` marks the sub-experiment copy of a
/// setting (`a′₁`, `b′₁`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PairLabel {
    pub a: usize,
    pub b: usize,
    pub a_primed: bool,
    pub b_primed: bool,
}

impl PairLabel {
    pub fn new(a: usize, b: usize) -> Self {
        PairLabel {
            a,
            b,
            a_primed: false,
            b_primed: false,
        }
    }
}

impl fmt::Display for PairLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prime = |p: bool| if p { "'" } else { "" };
        write!(
            f,
            "(a{}{},b{}{})",
            self.a,
            prime(self.a_primed),
            self.b,
            prime(self.b_primed)
        )
    }
}

impl Serialize for PairLabel {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// One sub-experiment: a setting pair and the correlation it realizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSpec {
    pub label: PairLabel,
    /// Correlation at the nominal (chosen) orientations, if known.
    pub nominal: Option<RealNumber>,
    /// Correlation actually realized.
    pub correlation: RealNumber,
    /// `|θ′ − θ|` in radians between realized and nominal relative angles.
    pub angular_deviation: f64,
}

impl PairSpec {
    /// A sub-experiment given only by its correlation.
    pub fn from_correlation(label: PairLabel, correlation: BigRational) -> Self {
        PairSpec {
            label,
            nominal: None,
            correlation: RealNumber::Exact(correlation),
            angular_deviation: 0.0,
        }
    }

    fn exact_on_set(&self, level: u32) -> Result<&BigRational, BellError> {
        match self.correlation.exact() {
            Some(q) if in_q2n(q, level) => Ok(q),
            _ => Err(BellError::OffInvariantSet {
                pair: self.label,
                correlation: self.correlation.to_string(),
                level,
            }),
        }
    }
}

/// Default instrument resolution `2^(−(N−1)/2)` radians.
pub fn default_resolution(level: u32) -> f64 {
    2f64.powf(-(level as f64 - 1.0) / 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub a: [Orientation; 2],
    pub b: [Orientation; 2],
    pub level: u32,
    /// 1-based `(i, j)` of the settings actually chosen.
    pub realized_pair: (usize, usize),
    /// Realize each pair at the nearest `Q₂(N)` correlation.
    pub snap: bool,
    pub convention: Convention,
    /// Radians; `None` means [`default_resolution`].
    pub resolution: Option<f64>,
}

impl ExperimentConfig {
    /// `a = (0, π/2)`, `b = (π/4, 3π/4)`: `|Corr|` is `√2/2` for every pair and
    /// `A` reaches `2√2`. Snapped, realized pair `(1, 1)`.
    pub fn standard(level: u32) -> Self {
        let o = |n: i64, d: i64| Orientation::new(BigRational::new(n.into(), d.into()));
        ExperimentConfig {
            a: [o(0, 1), o(1, 2)],
            b: [o(1, 4), o(3, 4)],
            level,
            realized_pair: (1, 1),
            snap: true,
            convention: Convention::Cosine,
            resolution: None,
        }
    }

    pub fn resolution(&self) -> f64 {
        self.resolution.unwrap_or_else(|| default_resolution(self.level))
    }

    fn check_index(&self, i: usize, j: usize) -> Result<(), BellError> {
        if (1..=2).contains(&i) && (1..=2).contains(&j) {
            Ok(())
        } else {
            Err(BellError::BadPairIndex(i, j))
        }
    }

    /// The sub-experiment on `(a_i, b_j)`.
    pub fn pair_spec(&self, label: PairLabel) -> Result<PairSpec, BellError> {
        self.check_index(label.a, label.b)?;
        let (oa, ob) = (&self.a[label.a - 1], &self.b[label.b - 1]);
        let nominal = correlation_with(oa, ob, self.convention);
        if !self.snap {
            return Ok(PairSpec {
                label,
                nominal: Some(nominal.clone()),
                correlation: nominal,
                angular_deviation: 0.0,
            });
        }
        let snapped = snap_real(&nominal, self.level).ok_or(BellError::Indeterminate(label))?;
        let sign = self.convention.sign() as f64;
        let nominal_angle = to_f64(&oa.relative_to(ob)) * std::f64::consts::PI;
        let realized_angle = (sign * to_f64(&snapped.to_rational())).clamp(-1.0, 1.0).acos();
        Ok(PairSpec {
            label,
            nominal: Some(nominal),
            correlation: RealNumber::Exact(snapped.to_rational()),
            angular_deviation: (realized_angle - nominal_angle).abs(),
        })
    }

    /// The four CHSH sub-experiments `(a1,b1)`, `(a1′,b2)`, `(a2,b1′)`, `(a2,b2)`.
    pub fn chsh_sub_experiments(&self) -> Result<[PairSpec; 4], BellError> {
        let mut l12 = PairLabel::new(1, 2);
        l12.a_primed = true;
        let mut l21 = PairLabel::new(2, 1);
        l21.b_primed = true;
        Ok([
            self.pair_spec(PairLabel::new(1, 1))?,
            self.pair_spec(l12)?,
            self.pair_spec(l21)?,
            self.pair_spec(PairLabel::new(2, 2))?,
        ])
    }
}

fn snap_real(c: &RealNumber, level: u32) -> Option<DyadicRational> {
    match c {
        RealNumber::Exact(q) => snap_cosine(q, level).ok(),
        RealNumber::Enclosed(e) => {
            let lo = snap_cosine(&e.lo().clone().max(-BigRational::one()), level).ok()?;
            let hi = snap_cosine(&e.hi().clone().min(BigRational::one()), level).ok()?;
            (lo == hi).then_some(lo)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InvariantSetRule {
    #[default]
    Enforced,
    /// Evaluate `A` as if all four pairs coexisted, for comparison runs.
    Disabled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "pair", rename_all = "snake_case")]
pub enum Diagnostic {
    /// A single-swap counterfactual of the realized pair.
    CounterfactualOffInvariantSet(PairLabel),
    /// The realized configuration is itself not on the invariant set.
    RealizedOffInvariantSet(PairLabel),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum AStatus {
    Undefined { diagnostics: Vec<Diagnostic> },
    Value { value: RealNumber },
}

impl AStatus {
    pub fn is_undefined(&self) -> bool {
        matches!(self, AStatus::Undefined { .. })
    }
}

/// `A = |c11 − c12| + |c21 + c22|` as one joint quantity.
pub fn chsh_a(config: &ExperimentConfig, rule: InvariantSetRule) -> Result<AStatus, BellError> {
    let (i, j) = config.realized_pair;
    config.check_index(i, j)?;
    match rule {
        InvariantSetRule::Enforced => {
            let realized = config.pair_spec(PairLabel::new(i, j))?;
            let mut diagnostics = Vec::new();
            if !correlation_on_invariant_set(&realized.correlation, config.level) {
                diagnostics.push(Diagnostic::RealizedOffInvariantSet(realized.label));
            }
            let other = |k: usize| 3 - k;
            diagnostics.push(Diagnostic::CounterfactualOffInvariantSet(PairLabel::new(other(i), j)));
            diagnostics.push(Diagnostic::CounterfactualOffInvariantSet(PairLabel::new(i, other(j))));
            Ok(AStatus::Undefined { diagnostics })
        }
        InvariantSetRule::Disabled => {
            let c = |a, b| config.pair_spec(PairLabel::new(a, b)).map(|s| s.correlation);
            let (c11, c12, c21, c22) = (c(1, 1)?, c(1, 2)?, c(2, 1)?, c(2, 2)?);
            let value = match (c11.exact(), c12.exact(), c21.exact(), c22.exact()) {
                (Some(c11), Some(c12), Some(c21), Some(c22)) => {
                    RealNumber::Exact((c11 - c12).abs() + (c21 + c22).abs())
                }
                _ => RealNumber::Enclosed(
                    c11.enclosure()
                        .sub(&c12.enclosure())
                        .abs()
                        .add(&c21.enclosure().add(&c22.enclosure()).abs()),
                ),
            };
            Ok(AStatus::Value { value })
        }
    }
}

/// `A′ = |c(a1,b1) − c(a1′,b2)| + |c(a2,b1′) + c(a2,b2)|` from four separate
/// sub-experiments, each required to be on the invariant set and within the
/// instrument resolution of its nominal setting.
pub fn chsh_a_prime(
    subs: &[PairSpec; 4],
    level: u32,
    resolution: f64,
) -> Result<BigRational, BellError> {
    for s in subs {
        s.exact_on_set(level)?;
        if s.angular_deviation > resolution {
            return Err(BellError::OutsideResolution {
                pair: s.label,
                deviation: s.angular_deviation,
                resolution,
            });
        }
    }
    let c: Vec<&BigRational> = subs
        .iter()
        .map(|s| s.exact_on_set(level))
        .collect::<Result<_, _>>()?;
    Ok((c[0] - c[1]).abs() + (c[2] + c[3]).abs())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BellOriginal {
    #[serde(serialize_with = "ser_rational")]
    pub lhs: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub rhs: BigRational,
    pub satisfied: bool,
}

/// `|Corr(a,b) − Corr(a,c)| ≤ 1 + Corr(b,c)` from three separate sub-experiments.
pub fn bell_original_lhs(
    ab: &PairSpec,
    ac: &PairSpec,
    bc: &PairSpec,
    level: u32,
) -> Result<BellOriginal, BellError> {
    let (ab, ac, bc) = (ab.exact_on_set(level)?, ac.exact_on_set(level)?, bc.exact_on_set(level)?);
    let lhs = (ab - ac).abs();
    let rhs = BigRational::one() + bc;
    Ok(BellOriginal {
        satisfied: lhs <= rhs,
        lhs,
        rhs,
    })
}

/// Outcome tallies for one sub-experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationRecord {
    pub label: PairLabel,
    pub n_trials: u64,
    /// `Σ A·B` over trials.
    pub sum_products: i64,
    /// Trials with `A = +1`.
    pub a_plus: u64,
    #[serde(serialize_with = "ser_rational")]
    pub estimate: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub exact_correlation: BigRational,
    /// `√((1 − estimate²) / n)`.
    pub standard_error: f64,
}

impl CorrelationRecord {
    pub const CSV_HEADER: &'static str =
        "label,n_trials,sum_products,a_plus,estimate,exact_correlation,standard_error";

    pub fn write_csv_row<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(
            out,
            "\"{}\",{},{},{},{},{},{:e}",
            self.label,
            self.n_trials,
            self.sum_products,
            self.a_plus,
            self.estimate,
            self.exact_correlation,
            self.standard_error
        )
    }
}

/// SplitMix64 finalizer over `seed + stream·γ`: independent per-stream seeds.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws `n` outcome pairs with `P(A=α, B=β) = (1 + αβc)/4`: `A` is a fair
/// coin and `B = A` with probability exactly `(1 + c)/2`.
pub fn simulate_subexperiment(
    spec: &PairSpec,
    n_trials: u64,
    seed: u64,
) -> Result<CorrelationRecord, BellError> {
    if n_trials == 0 {
        return Err(BellError::NoTrials);
    }
    let c = spec
        .correlation
        .exact()
        .ok_or(BellError::NotSampleable(spec.label))?;
    // P(same) = (den + num) / (2 den), drawn as an integer comparison.
    let (num, den) = match (c.numer().to_i128(), c.denom().to_u64()) {
        (Some(n), Some(d)) if d <= u64::MAX / 2 => (n, d),
        _ => return Err(BellError::NotSampleable(spec.label)),
    };
    let same_cut = (den as i128 + num) as u64;
    let span = 2 * den;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sum = 0i64;
    let mut a_plus = 0u64;
    for _ in 0..n_trials {
        let a_up: bool = rng.random();
        let same = rng.random_range(0..span) < same_cut;
        a_plus += a_up as u64;
        sum += if same { 1 } else { -1 };
    }
    let estimate = BigRational::new(BigInt::from(sum), BigInt::from(n_trials));
    let e = to_f64(&estimate);
    Ok(CorrelationRecord {
        label: spec.label,
        n_trials,
        sum_products: sum,
        a_plus,
        estimate,
        exact_correlation: c.clone(),
        standard_error: ((1.0 - e * e).max(0.0) / n_trials as f64).sqrt(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshReport {
    pub level: u32,
    pub convention: Convention,
    pub rule: InvariantSetRule,
    pub resolution: f64,
    pub a_status: AStatus,
    pub sub_experiments: Vec<PairSpec>,
    #[serde(serialize_with = "ser_rational")]
    pub a_prime_exact: BigRational,
    pub a_prime_approx: f64,
    pub a_prime_mc: Option<f64>,
    /// Combined standard error of the Monte Carlo `A′`.
    pub stderr: Option<f64>,
    /// Exact `A′ > 2`.
    pub violation: bool,
    pub n_trials: u64,
    pub seed: u64,
    pub records: Vec<CorrelationRecord>,
}

/// `A` status, exact `A′`, and (for `n_trials > 0`) a Monte Carlo `A′` from
/// four independently seeded sub-experiments.
pub fn run_chsh_experiment(
    config: &ExperimentConfig,
    n_trials: u64,
    seed: u64,
    rule: InvariantSetRule,
) -> Result<ChshReport, BellError> {
    let a_status = chsh_a(config, rule)?;
    let subs = config.chsh_sub_experiments()?;
    let resolution = config.resolution();
    let a_prime_exact = chsh_a_prime(&subs, config.level, resolution)?;

    let records: Vec<CorrelationRecord> = if n_trials == 0 {
        Vec::new()
    } else {
        subs.par_iter()
            .enumerate()
            .map(|(k, s)| simulate_subexperiment(s, n_trials, derive_seed(seed, k as u64)))
            .collect::<Result<_, _>>()?
    };
    let (a_prime_mc, stderr) = if records.is_empty() {
        (None, None)
    } else {
        let e: Vec<f64> = records.iter().map(|r| to_f64(&r.estimate)).collect();
        let mc = (e[0] - e[1]).abs() + (e[2] + e[3]).abs();
        let se = records.iter().map(|r| r.standard_error.powi(2)).sum::<f64>().sqrt();
        (Some(mc), Some(se))
    };
    Ok(ChshReport {
        level: config.level,
        convention: config.convention,
        rule,
        resolution,
        a_status,
        sub_experiments: subs.to_vec(),
        a_prime_approx: to_f64(&a_prime_exact),
        violation: a_prime_exact > BigRational::from_integer(BigInt::from(2)),
        a_prime_exact,
        a_prime_mc,
        stderr,
        n_trials,
        seed,
        records,
    })
}

/// Exact `A′` of the snapped standard geometry at each level.
pub fn chsh_sweep(levels: impl IntoIterator<Item = u32>) -> Result<Vec<(u32, BigRational)>, BellError> {
    levels
        .into_iter()
        .map(|n| {
            let cfg = ExperimentConfig::standard(n);
            let subs = cfg.chsh_sub_experiments()?;
            Ok((n, chsh_a_prime(&subs, n, cfg.resolution())?))
        })
        .collect()
}

/// `2^(−(N−2))`, the gap allowed between snapped `A′` and `2√2`.
pub fn a_prime_gap_bound(level: u32) -> BigRational {
    if level >= 2 {
        BigRational::new(BigInt::one(), two_pow(level - 2))
    } else {
        BigRational::from_integer(two_pow(2 - level))
    }
}

/// `|A′ − 2√2|` as a certified enclosure.
pub fn a_prime_gap(a_prime: &BigRational) -> Enclosure {
    let two_root_two = interval::sqrt(&BigRational::from_integer(BigInt::from(8)), DEFAULT_BITS);
    Enclosure::point(a_prime.clone()).sub(&two_root_two).abs()
}
