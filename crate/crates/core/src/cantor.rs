//! The p-adic Cantor set `C(p) ⊂ [0, 1]` and the map from `Z_p` onto it.
//!
//! `C_0(p) = [0, 1]`; each refinement splits every interval into `2p − 1`
//! equal pieces and keeps the pieces at odd positions `1, 3, …, 2p − 1`, so
//! both endpoints survive and exactly `p` children remain. A p-adic integer
//! with digits `a_k` lands on `Σ 2a_k / (2p − 1)^(k+1)`, which is the left end
//! of the interval addressed by those digits.
//!
//! Geometry (iterates, encoding, membership) accepts any base `p ≥ 2`. The
//! invariant-set distance `D` needs the p-adic norm, so it requires prime `p`.

use std::fmt;
use std::io::{self, Write};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::padic::{embed, padic_distance, PAdicInteger, PAdicNorm, PAdicRational, PadicError, Prime};

/// Largest number of intervals [`construct_iterate`] will materialise.
pub const MAX_ITERATE_INTERVALS: u64 = 1 << 20;

/// Absolute accuracy of the f64 dimension logarithms.
pub const DIMENSION_PRECISION: f64 = 1e-15;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CantorError {
    #[error("base p must be at least 2, got {0}")]
    BaseTooSmall(u64),
    #[error("iterate C_{depth}({p}) has {p}^{depth} intervals, over the limit of {limit}")]
    TooManyIntervals { p: u64, depth: u32, limit: u64 },
    #[error("digit {digit} out of range for p = {p}")]
    DigitOutOfRange { digit: u32, p: u32 },
    #[error("point {0} lies outside [0, 1]")]
    OutsideUnitInterval(BigRational),
    #[error("points live in C({0}) and C({1})")]
    BaseMismatch(u32, u32),
    #[error("p = {0} is composite; the distance D needs a prime base")]
    CompositeBase(u32),
    #[error(transparent)]
    Padic(#[from] PadicError),
}

fn check_base(p: u64) -> Result<u32, CantorError> {
    if p < 2 || p > u32::MAX as u64 {
        return Err(CantorError::BaseTooSmall(p));
    }
    Ok(p as u32)
}

/// A closed interval with exact rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lo <= q && q <= &self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// `C_k(p)` for a given base and depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CantorConstruction {
    pub p: u32,
    pub depth: u32,
}

impl CantorConstruction {
    pub fn new(p: u64, depth: u32) -> Result<Self, CantorError> {
        Ok(CantorConstruction {
            p: check_base(p)?,
            depth,
        })
    }

    pub fn subdivisions(&self) -> u64 {
        2 * self.p as u64 - 1
    }

    /// `p^k`, if it fits.
    pub fn interval_count(&self) -> Option<u64> {
        (self.p as u64).checked_pow(self.depth)
    }

    /// `(2p − 1)^(−k)`.
    pub fn interval_width(&self) -> BigRational {
        BigRational::new(
            BigInt::one(),
            num_traits::pow(BigInt::from(self.subdivisions()), self.depth as usize),
        )
    }

    /// Numerators (over `(2p − 1)^depth`) of every left endpoint, ascending.
    fn left_numerators(&self) -> Vec<BigInt> {
        let sub = BigInt::from(self.subdivisions());
        let mut level = vec![BigInt::zero()];
        for _ in 0..self.depth {
            level = level
                .iter()
                .flat_map(|lo| {
                    let base = lo * &sub;
                    (0..self.p).map(move |j| &base + BigInt::from(2 * j))
                })
                .collect();
        }
        level
    }

    pub fn intervals(&self, limit: u64) -> Result<Vec<Interval>, CantorError> {
        match self.interval_count() {
            Some(n) if n <= limit => {}
            _ => {
                return Err(CantorError::TooManyIntervals {
                    p: self.p as u64,
                    depth: self.depth,
                    limit,
                })
            }
        }
        let den = num_traits::pow(BigInt::from(self.subdivisions()), self.depth as usize);
        Ok(self
            .left_numerators()
            .into_iter()
            .map(|lo| Interval {
                hi: BigRational::new(&lo + 1, den.clone()),
                lo: BigRational::new(lo, den.clone()),
            })
            .collect())
    }
}

/// The `p^k` kept intervals of `C_k(p)` in ascending order.
pub fn construct_iterate(p: u64, depth: u32) -> Result<Vec<Interval>, CantorError> {
    CantorConstruction::new(p, depth)?.intervals(MAX_ITERATE_INTERVALS)
}

/// Writes `level,interval_index,lo_num,lo_den,hi_num,hi_den` rows for every
/// level `0..=depth` (or only the last one), endpoints reduced.
pub fn write_iterate_csv<W: Write>(
    out: &mut W,
    p: u64,
    depth: u32,
    all_levels: bool,
) -> Result<(), IterateCsvError> {
    writeln!(out, "level,interval_index,lo_num,lo_den,hi_num,hi_den")?;
    let first = if all_levels { 0 } else { depth };
    for level in first..=depth {
        for (i, iv) in construct_iterate(p, level)?.iter().enumerate() {
            writeln!(
                out,
                "{level},{i},{},{},{},{}",
                iv.lo.numer(),
                iv.lo.denom(),
                iv.hi.numer(),
                iv.hi.denom()
            )?;
        }
    }
    Ok(())
}

#[derive(Debug, Error)]
pub enum IterateCsvError {
    #[error(transparent)]
    Cantor(#[from] CantorError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A point of `C(p)` at finite depth, addressed both by its digit string and by
/// its exact coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CantorPoint {
    p: u32,
    address: Vec<u32>,
    coordinate: BigRational,
}

impl CantorPoint {
    /// Works for any base `p ≥ 2`, composite included.
    pub fn from_address(p: u64, address: Vec<u32>) -> Result<Self, CantorError> {
        let p = check_base(p)?;
        if let Some(&digit) = address.iter().find(|&&a| a >= p) {
            return Err(CantorError::DigitOutOfRange { digit, p });
        }
        let sub = BigInt::from(2 * p as u64 - 1);
        // Horner over (2p − 1)^K: Σ 2a_k (2p − 1)^(K−1−k).
        let numer = address
            .iter()
            .fold(BigInt::zero(), |acc, &a| acc * &sub + BigInt::from(2 * a as u64));
        let denom = num_traits::pow(sub, address.len());
        Ok(CantorPoint {
            p,
            coordinate: BigRational::new(numer, denom),
            address,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn address(&self) -> &[u32] {
        &self.address
    }

    pub fn depth(&self) -> usize {
        self.address.len()
    }

    pub fn coordinate(&self) -> &BigRational {
        &self.coordinate
    }

    /// The interval of `C_K(p)` selected by the address.
    pub fn enclosing_interval(&self) -> Interval {
        let width = CantorConstruction {
            p: self.p,
            depth: self.address.len() as u32,
        }
        .interval_width();
        Interval {
            lo: self.coordinate.clone(),
            hi: &self.coordinate + width,
        }
    }

    /// The preimage as a truncated p-adic integer; needs prime `p`.
    pub fn preimage(&self) -> Result<PAdicInteger, CantorError> {
        let prime = Prime::new(self.p as u64).map_err(|_| CantorError::CompositeBase(self.p))?;
        Ok(PAdicInteger::from_digits(prime, self.address.clone())?)
    }
}

/// The Cantor image of a truncated p-adic integer. Zero-length preimages map to 0.
pub fn encode_integer(x: &PAdicInteger) -> CantorPoint {
    CantorPoint::from_address(x.prime().get() as u64, x.digits().to_vec())
        .expect("digits already below p")
}

/// `F_p(x)` for `x ∈ Z_p`; rejects negative valuation.
pub fn cantor_encode(x: &PAdicRational) -> Result<CantorPoint, CantorError> {
    Ok(encode_integer(&x.to_integer()?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "level")]
pub enum Membership {
    /// Survives every refinement up to the requested depth.
    InsideAtDepth,
    /// First falls in a removed piece at this refinement level (1-based).
    ExcludedAtDepth(u32),
}

/// Follows `q` down the refinements of `C(p)`.
pub fn cantor_membership(q: &BigRational, p: u64, depth: u32) -> Result<Membership, CantorError> {
    let p = check_base(p)?;
    if q.is_negative() || q > &BigRational::one() {
        return Err(CantorError::OutsideUnitInterval(q.clone()));
    }
    let sub = BigRational::from_integer(BigInt::from(2 * p as u64 - 1));
    let mut local = q.clone();
    for level in 1..=depth {
        let t = &local * &sub;
        let s = t.floor();
        let pos = s.to_integer().to_u64().expect("position below 2p − 1");
        local = if pos == 2 * p as u64 - 1 {
            // q = 1 locally: right end of the last kept piece.
            BigRational::one()
        } else if pos.is_multiple_of(2) {
            &t - &s
        } else if t == s {
            // Left end of a removed piece is the right end of a kept one.
            BigRational::one()
        } else {
            return Ok(Membership::ExcludedAtDepth(level));
        };
    }
    Ok(Membership::InsideAtDepth)
}

/// The invariant-set distance `D(y1, y2) = |x1 − x2|_p`.
pub fn cantor_distance(y1: &CantorPoint, y2: &CantorPoint) -> Result<PAdicNorm, CantorError> {
    if y1.p != y2.p {
        return Err(CantorError::BaseMismatch(y1.p, y2.p));
    }
    let x1 = PAdicRational::from_integer(&y1.preimage()?);
    let x2 = PAdicRational::from_integer(&y2.preimage()?);
    Ok(padic_distance(&x1, &x2)?)
}

/// `E(y1, y2) = |y1 − y2|`, exact.
pub fn euclidean_distance(y1: &CantorPoint, y2: &CantorPoint) -> BigRational {
    (&y1.coordinate - &y2.coordinate).abs()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PerturbationTag {
    GeometricallyConstrained,
    GeometricallyUnconstrained,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbationClass {
    pub tag: PerturbationTag,
    /// `|δ|_p`, which is `D` between the perturbed and original points.
    pub d_magnitude: PAdicNorm,
    /// `F_p(x + δ)` when it stays on `C(p)`.
    pub perturbed: Option<CantorPoint>,
}

/// Adds `delta` to the preimage `x` and reports whether the result stays in
/// `Z_p` (and therefore on `C(p)`).
pub fn classify_perturbation(
    x: &PAdicRational,
    delta: &BigRational,
    p: u64,
    precision: usize,
) -> Result<PerturbationClass, CantorError> {
    if x.prime().get() as u64 != p {
        return Err(CantorError::Padic(PadicError::PrimeMismatch(
            x.prime().get(),
            p as u32,
        )));
    }
    if !x.is_integer() {
        return Err(PadicError::NotAnInteger(x.valuation().unwrap_or_default()).into());
    }
    let d = embed(delta, p, precision)?;
    let d_magnitude = d.norm();
    if d_magnitude.is_integral() {
        let moved = x.add(&d)?;
        Ok(PerturbationClass {
            tag: PerturbationTag::GeometricallyConstrained,
            d_magnitude,
            perturbed: Some(cantor_encode(&moved)?),
        })
    } else {
        Ok(PerturbationClass {
            tag: PerturbationTag::GeometricallyUnconstrained,
            d_magnitude,
            perturbed: None,
        })
    }
}

/// A Euclidean-small move off `C(p)` that is p-adically large.
#[derive(Debug, Clone)]
pub struct MetricWitness {
    pub base: CantorPoint,
    /// The rational offset `1 / (p · (2p − 1)^m)`.
    pub delta: BigRational,
    /// `E` between the base point and the moved point: `|δ|`.
    pub euclidean: BigRational,
    /// Classification of `δ`; its `d_magnitude` is `D`, equal to `p`.
    pub class: PerturbationClass,
    /// First refinement level that removes the moved point.
    pub exclusion: Membership,
}

/// Shifts `F_p(x)` by `δ = 1 / (p · (2p − 1)^m)`. For `m` at least the depth of
/// `x` the moved point is outside `C(p)`, its Euclidean offset is below
/// `(2p − 1)^(−m)`, and `|δ|_p = p`.
pub fn unconstrained_witness(x: &PAdicInteger, m: u32) -> Result<MetricWitness, CantorError> {
    let p = x.prime().get() as u64;
    let base = encode_integer(x);
    let delta = BigRational::new(
        BigInt::one(),
        BigInt::from(p) * num_traits::pow(BigInt::from(2 * p - 1), m as usize),
    );
    let moved = base.coordinate() + &delta;
    let class = classify_perturbation(&PAdicRational::from_integer(x), &delta, p, x.precision())?;
    let exclusion = cantor_membership(&moved, p, m + 2)?;
    Ok(MetricWitness {
        euclidean: delta.clone(),
        delta,
        base,
        class,
        exclusion,
    })
}

/// `log p / log(2p − 1)`: kept pieces over subdivisions.
pub fn hausdorff_dimension(p: u64) -> Result<f64, CantorError> {
    if p < 2 {
        return Err(CantorError::BaseTooSmall(p));
    }
    let p = p as f64;
    Ok(p.ln() / (2.0 * p - 1.0).ln())
}

/// The closed form `log(2^N) / log(2^(N+1) − 1)` quoted for `p = 2^N + 1`.
pub fn quoted_dimension_expression(n: u32) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    let e = n as f64 + 1.0;
    // log(2^(N+1) − 1) = (N+1)·log 2 + log(1 − 2^−(N+1))
    (n as f64 * ln2) / (e * ln2 + (-(2f64.powf(-e))).ln_1p())
}

/// `log(2^N + 1) / log(2^(N+1) + 1)`: the construction count at `p = 2^N + 1`.
pub fn construction_dimension_for_level(n: u32) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    let ln_pow_plus_one = |k: f64| k * ln2 + 2f64.powf(-k).ln_1p();
    ln_pow_plus_one(n as f64) / ln_pow_plus_one(n as f64 + 1.0)
}
