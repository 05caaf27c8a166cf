//! Certified enclosures of real numbers with exact rational endpoints.
//!
//! Endpoints are rounded outward to the dyadic grid `2^(−W)` after every
//! operation, with `W = bits + GUARD_BITS`, so sizes stay bounded while every
//! result still contains the true value. Transcendental pieces (`π`, `cos`)
//! are evaluated in fixed point with an explicit error budget in units of
//! `2^(−W)`.

use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::rational::{to_f64, two_pow};

/// Default working precision, in bits.
pub const DEFAULT_BITS: u32 = 128;
const GUARD_BITS: u32 = 32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    lo: BigRational,
    hi: BigRational,
}

fn floor_scaled(q: &BigRational, w: u32) -> BigInt {
    (q * BigRational::from_integer(two_pow(w))).floor().to_integer()
}

fn ceil_scaled(q: &BigRational, w: u32) -> BigInt {
    (q * BigRational::from_integer(two_pow(w))).ceil().to_integer()
}

fn scaled(n: BigInt, w: u32) -> BigRational {
    BigRational::new(n, two_pow(w))
}

impl Enclosure {
    pub fn new(lo: BigRational, hi: BigRational) -> Self {
        assert!(lo <= hi, "empty enclosure");
        Enclosure { lo, hi }
    }

    pub fn point(q: BigRational) -> Self {
        Enclosure {
            lo: q.clone(),
            hi: q,
        }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2))
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.midpoint())
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lo <= q && q <= &self.hi
    }

    /// Whether some `m / 2^level` lies in the enclosure.
    pub fn contains_dyadic(&self, level: u32) -> bool {
        ceil_scaled(&self.lo, level) <= floor_scaled(&self.hi, level)
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    /// Rounds outward to multiples of `2^(−w)`.
    pub fn round_out(&self, w: u32) -> Self {
        Enclosure {
            lo: scaled(floor_scaled(&self.lo, w), w),
            hi: scaled(ceil_scaled(&self.hi, w), w),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Enclosure {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn neg(&self) -> Self {
        Enclosure {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let products = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = products.iter().min().expect("four products").clone();
        let hi = products.iter().max().expect("four products").clone();
        Enclosure { lo, hi }
    }

    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            Enclosure {
                lo: BigRational::zero(),
                hi: self.hi.clone().max(-&self.lo),
            }
        }
    }
}

fn working_bits(bits: u32) -> u32 {
    bits + GUARD_BITS
}

/// `√q` for `q ≥ 0`.
pub fn sqrt(q: &BigRational, bits: u32) -> Enclosure {
    assert!(!q.is_negative(), "square root of a negative rational");
    let w = working_bits(bits);
    let s = floor_scaled(q, 2 * w).sqrt();
    Enclosure {
        lo: scaled(s.clone(), w),
        hi: scaled(s + 1, w),
    }
}

/// `Σ (−1)^k / ((2k+1) x^(2k+1))` in fixed point at scale `2^w`, with its
/// error bound in ulps.
fn atan_inverse_fixed(x: u64, w: u32) -> (BigInt, BigInt) {
    let x2 = BigInt::from(x * x);
    // floor(floor(a / b) / c) = floor(a / (bc)), so `power` is exact to within 1 ulp.
    let mut power = two_pow(w) / BigInt::from(x);
    let mut sum = BigInt::zero();
    let mut k = 0u64;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        k += 1;
    }
    // 2 ulps per term plus the (sub-ulp) tail.
    (sum, BigInt::from(2 * k + 2))
}

fn pi_uncached(bits: u32) -> Enclosure {
    let w = working_bits(bits);
    // π = 16 atan(1/5) − 4 atan(1/239)
    let (a, ea) = atan_inverse_fixed(5, w);
    let (b, eb) = atan_inverse_fixed(239, w);
    let mid = BigInt::from(16) * a - BigInt::from(4) * b;
    let err = BigInt::from(16) * ea + BigInt::from(4) * eb;
    Enclosure {
        lo: scaled(&mid - &err, w),
        hi: scaled(mid + err, w),
    }
}

/// An enclosure of `π`.
pub fn pi(bits: u32) -> Enclosure {
    static DEFAULT: OnceLock<Enclosure> = OnceLock::new();
    if bits == DEFAULT_BITS {
        DEFAULT.get_or_init(|| pi_uncached(DEFAULT_BITS)).clone()
    } else {
        pi_uncached(bits)
    }
}

/// `cos(t)` for `t = t_scaled / 2^w ∈ [0, 2]`, as (value, error) in ulps.
fn cos_fixed(t_scaled: &BigInt, w: u32) -> (BigInt, BigInt) {
    debug_assert!(t_scaled.sign() != Sign::Minus);
    let one = two_pow(w);
    let t2 = (t_scaled * t_scaled) >> w as usize;
    let mut term = one.clone();
    let mut sum = one;
    let mut k = 1u64;
    loop {
        term = (&term * &t2) >> w as usize;
        term /= BigInt::from((2 * k - 1) * (2 * k));
        if term.is_zero() {
            break;
        }
        if k % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
        k += 1;
    }
    // Each truncated term is within 3 ulps of the true term for t ≤ 2; the
    // alternating tail after the last nonzero term is below one more ulp.
    (sum, BigInt::from(4 * k + 8))
}

/// `cos(fπ)` for a rational multiple `f` of `π`.
pub fn cos_pi_multiple(f: &BigRational, bits: u32) -> Enclosure {
    let two = BigRational::from_integer(BigInt::from(2));
    let one = BigRational::one();
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    // Reduce to [0, 1], then to [0, 1/2] with cos(fπ) = −cos((1 − f)π).
    let mut f = f - &two * (f / &two).floor();
    if f > one {
        f = &two - f;
    }
    if f > half {
        return cos_pi_multiple(&(one - f), bits).neg();
    }
    let w = working_bits(bits);
    let pi = pi(bits);
    let theta_lo = floor_scaled(&(&f * pi.lo()), w).max(BigInt::zero());
    let theta_hi = ceil_scaled(&(&f * pi.hi()), w);
    // cos is decreasing on [0, π/2].
    let (c_hi, e_hi) = cos_fixed(&theta_lo, w);
    let (c_lo, e_lo) = cos_fixed(&theta_hi, w);
    let one_scaled = two_pow(w);
    Enclosure {
        lo: scaled((c_lo - e_lo).max(-&one_scaled), w),
        hi: scaled((c_hi + e_hi).min(one_scaled), w),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{integer, rational};

    fn tiny(bits: u32) -> BigRational {
        BigRational::new(BigInt::one(), two_pow(bits))
    }

    #[test]
    fn pi_is_tight_and_correct() {
        let p = pi(DEFAULT_BITS);
        // 31 digits of π bracket it.
        let below = crate::rational::parse_rational("3.141592653589793238462643383279").unwrap();
        let above = crate::rational::parse_rational("3.141592653589793238462643383280").unwrap();
        assert!(p.lo() > &below && p.hi() < &above);
        assert!(p.width() < tiny(120));
    }

    #[test]
    fn cos_special_values() {
        for (f, c) in [
            (integer(0), integer(1)),
            (rational(1, 3), rational(1, 2)),
            (rational(1, 2), integer(0)),
            (rational(2, 3), rational(-1, 2)),
            (integer(1), integer(-1)),
            (rational(5, 3), rational(1, 2)),
            (integer(2), integer(1)),
        ] {
            let e = cos_pi_multiple(&f, DEFAULT_BITS);
            assert!(e.contains(&c), "cos({f}π) = {c} not in [{}, {}]", e.lo(), e.hi());
            assert!(e.width() < tiny(110));
        }
    }

    #[test]
    fn cos_quarter_pi_squares_to_half() {
        let e = cos_pi_multiple(&rational(1, 4), DEFAULT_BITS);
        let sq = e.mul(&e);
        assert!(sq.contains(&rational(1, 2)));
        assert!(e.width() < crate::rational::parse_rational("0.000000000000000000000000000001").unwrap());
        assert!(!e.contains_dyadic(64));
    }

    #[test]
    fn cos_matches_f64() {
        for j in 0..=64 {
            let f = rational(j, 32);
            let e = cos_pi_multiple(&f, 64);
            let x = (std::f64::consts::PI * j as f64 / 32.0).cos();
            assert!((e.to_f64() - x).abs() < 1e-14, "j = {j}");
        }
    }

    #[test]
    fn sqrt_brackets() {
        let s = sqrt(&integer(2), DEFAULT_BITS);
        assert!(s.mul(&s).contains(&integer(2)));
        let s = sqrt(&rational(9, 16), DEFAULT_BITS);
        assert!(s.contains(&rational(3, 4)));
    }

    #[test]
    fn abs_and_dyadic_membership() {
        let e = Enclosure::new(rational(-1, 3), rational(1, 4));
        assert_eq!(e.abs(), Enclosure::new(integer(0), rational(1, 3)));
        assert!(Enclosure::point(rational(3, 8)).contains_dyadic(3));
        assert!(!Enclosure::point(rational(3, 8)).contains_dyadic(2));
        assert!(!Enclosure::new(rational(1, 3), rational(1, 3) + tiny(80)).contains_dyadic(64));
    }
}
