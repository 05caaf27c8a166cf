//! Truncated p-adic integers and rationals.
//!
//! A [`PAdicInteger`] keeps `K` base-`p` digits, least significant first, and
//! stands for the residue class `Σ a_k p^k mod p^K`. A [`PAdicRational`] is
//! `p^v · u` with `u` a unit (`a_0 ≠ 0`) carrying `K` relative digits, so its
//! value is known modulo `p^(v+K)`. Sums keep the weaker absolute precision of
//! their operands; products keep the weaker relative precision. Valuations are
//! always exact, which is what makes the norm multiplicative on the nose.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::rational::{biguint_pow, split_valuation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PadicError {
    #[error("{0} is not a prime below 2^32")]
    NotPrime(u64),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("mismatched primes {0} and {1}")]
    PrimeMismatch(u32, u32),
    #[error("precision must be at least one digit")]
    ZeroPrecision,
    #[error("digit {digit} out of range for p = {prime}")]
    DigitOutOfRange { digit: u32, prime: u32 },
    #[error("leading unit digit must be nonzero")]
    NotAUnit,
    #[error("valuation {0} is negative: not a p-adic integer")]
    NotAnInteger(i64),
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &q in &SMALL {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut b: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, b);
            }
            b = mul(b, b);
            e >>= 1;
        }
        r
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &SMALL {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// A prime below 2^32, so digit products fit in a `u64`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Prime(u32);

impl Prime {
    pub fn new(p: u64) -> Result<Self, PadicError> {
        if p <= u32::MAX as u64 && is_prime(p) {
            Ok(Prime(p as u32))
        } else {
            Err(PadicError::NotPrime(p))
        }
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

fn add_digits(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let p = p as u64;
    let mut carry = 0u64;
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let s = x as u64 + y as u64 + carry;
            carry = s / p;
            (s % p) as u32
        })
        .collect()
}

/// `p^L − a mod p^L`.
fn neg_digits(a: &[u32], p: u32) -> Vec<u32> {
    let mut out = vec![0; a.len()];
    if let Some(t) = a.iter().position(|&d| d != 0) {
        out[t] = p - a[t];
        for k in t + 1..a.len() {
            out[k] = p - 1 - a[k];
        }
    }
    out
}

/// Product of two digit strings modulo `p^len`.
fn mul_digits(a: &[u32], b: &[u32], p: u32, len: usize) -> Vec<u32> {
    let mut acc = vec![0u128; len];
    for (i, &x) in a.iter().enumerate().take(len) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(len - i) {
            acc[i + j] += x as u128 * y as u128;
        }
    }
    let p = p as u128;
    let mut carry = 0u128;
    acc.into_iter()
        .map(|s| {
            let s = s + carry;
            carry = s / p;
            (s % p) as u32
        })
        .collect()
}

fn inverse_mod(a: u64, p: u64) -> u64 {
    let (mut r0, mut r1) = (p as i128, (a % p) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    debug_assert_eq!(r0, 1);
    t0.rem_euclid(p as i128) as u64
}

/// A p-adic integer truncated to `K` digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PAdicInteger {
    prime: Prime,
    digits: Vec<u32>,
}

impl PAdicInteger {
    pub fn from_digits(prime: Prime, digits: Vec<u32>) -> Result<Self, PadicError> {
        if digits.is_empty() {
            return Err(PadicError::ZeroPrecision);
        }
        if let Some(&digit) = digits.iter().find(|&&d| d >= prime.get()) {
            return Err(PadicError::DigitOutOfRange {
                digit,
                prime: prime.get(),
            });
        }
        Ok(PAdicInteger { prime, digits })
    }

    pub fn zero(prime: Prime, precision: usize) -> Result<Self, PadicError> {
        Self::from_digits(prime, vec![0; precision])
    }

    /// `n mod p^K`, negative `n` included.
    pub fn from_bigint(prime: Prime, precision: usize, n: &BigInt) -> Result<Self, PadicError> {
        if precision == 0 {
            return Err(PadicError::ZeroPrecision);
        }
        let modulus = BigInt::from(biguint_pow(prime.get() as u64, precision as u32));
        let mut r = n.mod_floor(&modulus).to_biguint().expect("non-negative");
        let p = BigUint::from(prime.get());
        let mut digits = Vec::with_capacity(precision);
        for _ in 0..precision {
            let (q, d) = r.div_rem(&p);
            digits.push(d.to_u32().expect("digit below p"));
            r = q;
        }
        Ok(PAdicInteger { prime, digits })
    }

    pub fn from_i64(prime: Prime, precision: usize, n: i64) -> Result<Self, PadicError> {
        Self::from_bigint(prime, precision, &BigInt::from(n))
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    /// Number of retained digits `K`.
    pub fn precision(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn is_zero(&self) -> bool {
        self.digits.iter().all(|&d| d == 0)
    }

    /// Index of the first nonzero digit; `None` for zero at this precision.
    pub fn valuation(&self) -> Option<usize> {
        self.digits.iter().position(|&d| d != 0)
    }

    /// The canonical representative `Σ a_k p^k` in `[0, p^K)`.
    pub fn residue(&self) -> BigUint {
        let p = BigUint::from(self.prime.get());
        self.digits
            .iter()
            .rev()
            .fold(BigUint::zero(), |acc, &d| acc * &p + BigUint::from(d))
    }

    /// The first `k` digits.
    pub fn truncate(&self, k: usize) -> Result<Self, PadicError> {
        Self::from_digits(self.prime, self.digits[..k.min(self.digits.len())].to_vec())
    }
}

impl fmt::Display for PAdicInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_digits(f, &self.digits, self.prime)
    }
}

fn write_digits(f: &mut fmt::Formatter<'_>, digits: &[u32], prime: Prime) -> fmt::Result {
    write!(f, "…")?;
    let sep = if prime.get() > 10 { "," } else { "" };
    for (i, d) in digits.iter().rev().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{d}")?;
    }
    write!(f, "_{prime}")
}

/// `|x|_p = p^(-exponent)`, or zero. Never stored as a float.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PAdicNorm {
    prime: Prime,
    exponent: Option<i64>,
}

impl PAdicNorm {
    pub fn zero(prime: Prime) -> Self {
        PAdicNorm {
            prime,
            exponent: None,
        }
    }

    /// The norm `p^(-exponent)`.
    pub fn power(prime: Prime, exponent: i64) -> Self {
        PAdicNorm {
            prime,
            exponent: Some(exponent),
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        self.exponent.is_none()
    }

    /// `e` such that the norm is `p^(-e)`; `None` for zero.
    pub fn exponent(&self) -> Option<i64> {
        self.exponent
    }

    pub fn to_rational(&self) -> BigRational {
        match self.exponent {
            None => BigRational::zero(),
            Some(e) => {
                let pe = BigInt::from(biguint_pow(self.prime.get() as u64, e.unsigned_abs() as u32));
                if e >= 0 {
                    BigRational::new(BigInt::one(), pe)
                } else {
                    BigRational::from_integer(pe)
                }
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self.exponent {
            None => 0.0,
            Some(e) => (self.prime.get() as f64).powf(-(e as f64)),
        }
    }

    /// Norm at most one.
    pub fn is_integral(&self) -> bool {
        self.exponent.is_none_or(|e| e >= 0)
    }
}

impl PartialOrd for PAdicNorm {
    /// Norms of different primes are incomparable.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.prime != other.prime {
            return None;
        }
        Some(match (self.exponent, other.exponent) {
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
            (Some(a), Some(b)) => b.cmp(&a),
        })
    }
}

impl fmt::Display for PAdicNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_rational().fmt(f)
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Zero { precision: usize },
    Unit { valuation: i64, unit: PAdicInteger },
}

/// `p^v · u` with `u` a truncated unit, or zero.
#[derive(Debug, Clone)]
pub struct PAdicRational {
    prime: Prime,
    repr: Repr,
}

impl PartialEq for PAdicRational {
    fn eq(&self, other: &Self) -> bool {
        self.prime == other.prime
            && match (&self.repr, &other.repr) {
                (Repr::Zero { .. }, Repr::Zero { .. }) => true,
                (
                    Repr::Unit {
                        valuation: v1,
                        unit: u1,
                    },
                    Repr::Unit {
                        valuation: v2,
                        unit: u2,
                    },
                ) => v1 == v2 && u1 == u2,
                _ => false,
            }
    }
}

impl Eq for PAdicRational {}

impl PAdicRational {
    pub fn zero(prime: Prime, precision: usize) -> Self {
        PAdicRational {
            prime,
            repr: Repr::Zero { precision },
        }
    }

    pub fn from_parts(valuation: i64, unit: PAdicInteger) -> Result<Self, PadicError> {
        if unit.digits[0] == 0 {
            return Err(PadicError::NotAUnit);
        }
        Ok(PAdicRational {
            prime: unit.prime,
            repr: Repr::Unit { valuation, unit },
        })
    }

    /// Splits off the valuation of a truncated integer. The relative precision
    /// drops by the number of stripped zeros.
    pub fn from_integer(x: &PAdicInteger) -> Self {
        Self::normalize(x.prime, 0, &x.digits)
    }

    /// `p^base_valuation · Σ digits[k] p^k`, stripped to a unit.
    fn normalize(prime: Prime, base_valuation: i64, digits: &[u32]) -> Self {
        match digits.iter().position(|&d| d != 0) {
            None => Self::zero(prime, digits.len()),
            Some(t) => PAdicRational {
                prime,
                repr: Repr::Unit {
                    valuation: base_valuation + t as i64,
                    unit: PAdicInteger {
                        prime,
                        digits: digits[t..].to_vec(),
                    },
                },
            },
        }
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.repr, Repr::Zero { .. })
    }

    pub fn valuation(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Unit { valuation, .. } => Some(*valuation),
        }
    }

    pub fn unit(&self) -> Option<&PAdicInteger> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Unit { unit, .. } => Some(unit),
        }
    }

    /// Relative precision: the number of unit digits retained.
    pub fn precision(&self) -> usize {
        match &self.repr {
            Repr::Zero { precision } => *precision,
            Repr::Unit { unit, .. } => unit.precision(),
        }
    }

    /// The value is known modulo `p^absolute_precision`; `None` for zero.
    pub fn absolute_precision(&self) -> Option<i64> {
        match &self.repr {
            Repr::Zero { .. } => None,
            Repr::Unit { valuation, unit } => Some(valuation + unit.precision() as i64),
        }
    }

    /// Zero or non-negative valuation.
    pub fn is_integer(&self) -> bool {
        self.valuation().is_none_or(|v| v >= 0)
    }

    pub fn norm(&self) -> PAdicNorm {
        match self.valuation() {
            None => PAdicNorm::zero(self.prime),
            Some(v) => PAdicNorm::power(self.prime, v),
        }
    }

    /// Digit form `a_0 … a_{v+K−1}` of a p-adic integer.
    pub fn to_integer(&self) -> Result<PAdicInteger, PadicError> {
        match &self.repr {
            Repr::Zero { precision } => PAdicInteger::zero(self.prime, (*precision).max(1)),
            Repr::Unit { valuation, unit } => {
                if *valuation < 0 {
                    return Err(PadicError::NotAnInteger(*valuation));
                }
                let mut digits = vec![0; *valuation as usize];
                digits.extend_from_slice(&unit.digits);
                Ok(PAdicInteger {
                    prime: self.prime,
                    digits,
                })
            }
        }
    }

    /// The truncated value `p^v · residue(u)` as an exact rational.
    pub fn to_rational(&self) -> BigRational {
        match &self.repr {
            Repr::Zero { .. } => BigRational::zero(),
            Repr::Unit { valuation, unit } => {
                let r = BigRational::from_integer(BigInt::from(unit.residue()));
                let pv = BigInt::from(biguint_pow(
                    self.prime.get() as u64,
                    valuation.unsigned_abs() as u32,
                ));
                if *valuation >= 0 {
                    r * BigRational::from_integer(pv)
                } else {
                    r / BigRational::from_integer(pv)
                }
            }
        }
    }

    fn check_prime(&self, other: &Self) -> Result<(), PadicError> {
        if self.prime == other.prime {
            Ok(())
        } else {
            Err(PadicError::PrimeMismatch(self.prime.get(), other.prime.get()))
        }
    }

    pub fn neg(&self) -> Self {
        match &self.repr {
            Repr::Zero { .. } => self.clone(),
            Repr::Unit { valuation, unit } => PAdicRational {
                prime: self.prime,
                repr: Repr::Unit {
                    valuation: *valuation,
                    unit: PAdicInteger {
                        prime: self.prime,
                        digits: neg_digits(&unit.digits, self.prime.get()),
                    },
                },
            },
        }
    }

    /// Sum, known to the weaker absolute precision of the two operands.
    pub fn add(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_prime(other)?;
        let (
            Repr::Unit {
                valuation: v1,
                unit: u1,
            },
            Repr::Unit {
                valuation: v2,
                unit: u2,
            },
        ) = (&self.repr, &other.repr)
        else {
            return Ok(if self.is_zero() {
                other.clone()
            } else {
                self.clone()
            });
        };
        let base = (*v1).min(*v2);
        let abs = (v1 + u1.precision() as i64).min(v2 + u2.precision() as i64);
        let len = (abs - base) as usize;
        let shifted = |v: i64, u: &PAdicInteger| {
            let shift = ((v - base) as usize).min(len);
            let mut d = vec![0; shift];
            d.extend(u.digits.iter().take(len - shift));
            d.resize(len, 0);
            d
        };
        let sum = add_digits(&shifted(*v1, u1), &shifted(*v2, u2), self.prime.get());
        Ok(Self::normalize(self.prime, base, &sum))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, PadicError> {
        self.add(&other.neg())
    }

    /// Product; valuations add exactly, units keep the weaker relative precision.
    pub fn mul(&self, other: &Self) -> Result<Self, PadicError> {
        self.check_prime(other)?;
        match (&self.repr, &other.repr) {
            (Repr::Zero { .. }, _) => Ok(self.clone()),
            (_, Repr::Zero { .. }) => Ok(other.clone()),
            (
                Repr::Unit {
                    valuation: v1,
                    unit: u1,
                },
                Repr::Unit {
                    valuation: v2,
                    unit: u2,
                },
            ) => {
                let len = u1.precision().min(u2.precision());
                let digits = mul_digits(&u1.digits, &u2.digits, self.prime.get(), len);
                Ok(PAdicRational {
                    prime: self.prime,
                    repr: Repr::Unit {
                        valuation: v1 + v2,
                        unit: PAdicInteger {
                            prime: self.prime,
                            digits,
                        },
                    },
                })
            }
        }
    }
}

impl fmt::Display for PAdicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.repr {
            Repr::Zero { .. } => write!(f, "0"),
            Repr::Unit { valuation, unit } => {
                write!(f, "{}^{} · ", self.prime, valuation)?;
                write_digits(f, &unit.digits, self.prime)
            }
        }
    }
}

/// Embeds `numerator / denominator` into `Q_p` with `precision` unit digits.
pub fn embed_rational(
    numerator: &BigInt,
    denominator: &BigInt,
    p: u64,
    precision: usize,
) -> Result<PAdicRational, PadicError> {
    if denominator.is_zero() {
        return Err(PadicError::ZeroDenominator);
    }
    let prime = Prime::new(p)?;
    if precision == 0 {
        return Err(PadicError::ZeroPrecision);
    }
    if numerator.is_zero() {
        return Ok(PAdicRational::zero(prime, precision));
    }
    let (va, a) = split_valuation(numerator, prime.get());
    let (vb, b) = split_valuation(denominator, prime.get());
    let pb = BigInt::from(prime.get());
    let b_inv = {
        let b0 = b.mod_floor(&pb).to_u64().expect("residue below p");
        BigInt::from(inverse_mod(b0, prime.get() as u64))
    };
    // Digit-by-digit division: a/b = c_0 + p·(r_1/b), with c_0 ≡ a·b⁻¹ (mod p).
    let mut digits = Vec::with_capacity(precision);
    match (a.to_i64(), b.to_i64()) {
        // |r| never exceeds max(|a|, |b|), so machine words suffice.
        (Some(a), Some(b)) => {
            let (p, b, b_inv) = (prime.get() as i128, b as i128, b_inv.to_i128().expect("below p"));
            let mut r = a as i128;
            for _ in 0..precision {
                let c = (r.rem_euclid(p) * b_inv).rem_euclid(p);
                r = (r - c * b) / p;
                digits.push(c as u32);
            }
        }
        _ => {
            let mut r = a;
            for _ in 0..precision {
                let c = (&r * &b_inv).mod_floor(&pb);
                r = (&r - &c * &b) / &pb;
                digits.push(c.to_u32().expect("digit below p"));
            }
        }
    }
    PAdicRational::from_parts(
        va as i64 - vb as i64,
        PAdicInteger { prime, digits },
    )
}

/// Convenience wrapper for exact rationals.
pub fn embed(q: &BigRational, p: u64, precision: usize) -> Result<PAdicRational, PadicError> {
    embed_rational(q.numer(), q.denom(), p, precision)
}

pub fn padic_norm(x: &PAdicRational) -> PAdicNorm {
    x.norm()
}

pub fn padic_add(x: &PAdicRational, y: &PAdicRational) -> Result<PAdicRational, PadicError> {
    x.add(y)
}

pub fn padic_mul(x: &PAdicRational, y: &PAdicRational) -> Result<PAdicRational, PadicError> {
    x.mul(y)
}

/// `|x − y|_p`.
pub fn padic_distance(x: &PAdicRational, y: &PAdicRational) -> Result<PAdicNorm, PadicError> {
    Ok(x.sub(y)?.norm())
}

/// Exponent of `p` in a nonzero rational, straight from its factorisation.
pub fn rational_valuation(q: &BigRational, p: u32) -> Option<i64> {
    if q.is_zero() {
        return None;
    }
    let (vn, _) = split_valuation(q.numer(), p);
    let (vd, _) = split_valuation(q.denom(), p);
    Some(vn as i64 - vd as i64)
}
