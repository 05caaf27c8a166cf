//! Small helpers around `BigRational` shared by every module.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse {input:?} as an exact rational: {reason}")]
pub struct ParseRationalError {
    pub input: String,
    pub reason: &'static str,
}

/// Parses `a/b`, plain integers and finite decimals (`-0.7071`) into an exact
/// rational. Decimals are read exactly, so `0.1` is `1/10`.
pub fn parse_rational(input: &str) -> Result<BigRational, ParseRationalError> {
    let s = input.trim();
    let err = |reason| ParseRationalError {
        input: input.to_string(),
        reason,
    };
    if s.is_empty() {
        return Err(err("empty input"));
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = d.trim().parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(err("no digits"));
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return Err(err("unexpected character"));
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| err("bad digits"))?
    };
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let q = BigRational::new(numer, denom);
    Ok(if negative { -q } else { q })
}

pub fn rational(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn pow_u64(base: u64, exp: u32) -> BigInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

pub fn two_pow(exp: u32) -> BigInt {
    BigInt::one() << exp as usize
}

/// Exact square root of a rational when it is a perfect square.
pub fn rational_sqrt(q: &BigRational) -> Option<BigRational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    if &(&n * &n) == q.numer() && &(&d * &d) == q.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// Exponent of 2 in the reduced denominator, or `None` if the denominator has
/// an odd prime factor.
pub fn dyadic_level(q: &BigRational) -> Option<u32> {
    let d = q.denom();
    let tz = d.trailing_zeros().unwrap_or(0);
    if (d >> tz as usize).is_one() {
        Some(tz as u32)
    } else {
        None
    }
}

/// Nearest integer to `q`, ties resolved toward zero.
pub fn round_half_toward_zero(q: &BigRational) -> BigInt {
    let a = q.abs();
    let fl = a.floor();
    let frac = &a - &fl;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut m = fl.to_integer();
    if frac > half {
        m += 1;
    }
    if q.is_negative() {
        -m
    } else {
        m
    }
}

/// Nearest f64, computed from the exact fraction.
pub fn to_f64(q: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (q.numer().to_f64(), q.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    // Huge numerator or denominator: scale both down before dividing.
    let shift = q.denom().bits().max(q.numer().bits()).saturating_sub(900) as usize;
    let n = (q.numer() >> shift).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> shift).to_f64().unwrap_or(1.0);
    n / d
}

/// Exact binary value of a finite f64.
pub fn from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// `v_p(n)` and `n / p^v` for a nonzero integer.
pub(crate) fn split_valuation(n: &BigInt, p: u32) -> (u64, BigInt) {
    debug_assert!(!n.is_zero());
    let pb = BigInt::from(p);
    let mut v = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            break;
        }
        m = q;
        v += 1;
    }
    (v, m)
}

/// Serializes an exact rational as its fraction string (`"181/64"`, `"3"`).
pub fn ser_rational<S: serde::Serializer>(q: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

pub(crate) fn biguint_pow(base: u64, exp: u32) -> BigUint {
    num_traits::pow(BigUint::from(base), exp as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_integers_and_decimals() {
        assert_eq!(parse_rational("1/3").unwrap(), rational(1, 3));
        assert_eq!(parse_rational("-6/4").unwrap(), rational(-3, 2));
        assert_eq!(parse_rational("50").unwrap(), integer(50));
        assert_eq!(parse_rational("0.5").unwrap(), rational(1, 2));
        assert_eq!(parse_rational("-.25").unwrap(), rational(-1, 4));
        assert_eq!(
            parse_rational("0.70710678").unwrap(),
            rational(70_710_678, 100_000_000)
        );
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational(".").is_err());
    }

    #[test]
    fn perfect_squares() {
        assert_eq!(rational_sqrt(&rational(9, 16)), Some(rational(3, 4)));
        assert_eq!(rational_sqrt(&rational(1, 2)), None);
        assert_eq!(rational_sqrt(&rational(-1, 4)), None);
        assert_eq!(rational_sqrt(&integer(0)), Some(integer(0)));
    }

    #[test]
    fn dyadic_levels() {
        assert_eq!(dyadic_level(&rational(181, 256)), Some(8));
        assert_eq!(dyadic_level(&integer(3)), Some(0));
        assert_eq!(dyadic_level(&rational(3, 5)), None);
    }

    #[test]
    fn rounding_ties_go_toward_zero() {
        assert_eq!(round_half_toward_zero(&rational(5, 2)), BigInt::from(2));
        assert_eq!(round_half_toward_zero(&rational(-5, 2)), BigInt::from(-2));
        assert_eq!(round_half_toward_zero(&rational(7, 3)), BigInt::from(2));
        assert_eq!(round_half_toward_zero(&rational(8, 3)), BigInt::from(3));
        assert_eq!(round_half_toward_zero(&rational(-8, 3)), BigInt::from(-3));
    }
}
