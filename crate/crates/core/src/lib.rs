//! Exact p-adic arithmetic, the p-adic Cantor set `C(p)`, dyadic admissibility
//! of measurement orientations, and the CHSH `A` versus `A′` evaluation.
//!
//! Everything is exact (big rationals, truncated p-adic digit strings) except
//! where a transcendental value is needed, in which case a certified
//! [`interval::Enclosure`] is returned instead of a float.

pub mod bell;
pub mod cantor;
pub mod interval;
pub mod padic;
pub mod rational;
pub mod trig;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;
