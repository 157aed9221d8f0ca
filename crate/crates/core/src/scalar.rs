//! Scalar abstraction shared by the problem model and the solver engine.
//!
//! The iteration itself only needs ring operations, division and ordering, so
//! it runs unchanged over hardware floats and over exact rationals. Anything
//! that needs square roots (norms, bound constants, diagnostics) converts to
//! `f64` through [`Scalar::to_f64`].

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive};

/// Exact rational scalar.
pub type Exact = BigRational;

pub trait Scalar:
    Clone + PartialOrd + fmt::Debug + fmt::Display + Num + Signed + Send + Sync + 'static
{
    /// Converts a configuration value. Exact scalars read the shortest
    /// round-trip decimal of `x`, so `0.1` becomes `1/10`.
    fn from_f64(x: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn is_finite(&self) -> bool;

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }
}

impl Scalar for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Scalar for f32 {
    fn from_f64(x: f64) -> Self {
        x as f32
    }

    fn to_f64(&self) -> f64 {
        f64::from(*self)
    }

    fn is_finite(&self) -> bool {
        f32::is_finite(*self)
    }
}

impl Scalar for BigRational {
    fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "cannot represent {x} exactly");
        decimal_to_rational(&format!("{x}"))
    }

    fn to_f64(&self) -> f64 {
        // ToPrimitive for Ratio<BigInt> rounds correctly; fall back to the
        // quotient of the parts if either side overflows f64.
        ToPrimitive::to_f64(self).unwrap_or_else(|| {
            let n = ToPrimitive::to_f64(self.numer()).unwrap_or(f64::NAN);
            let d = ToPrimitive::to_f64(self.denom()).unwrap_or(f64::NAN);
            n / d
        })
    }

    fn is_finite(&self) -> bool {
        true
    }

    fn from_usize(n: usize) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }
}

// `format!("{x}")` on f64 never uses exponent notation.
fn decimal_to_rational(text: &str) -> BigRational {
    let (negative, digits) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    let numer = BigInt::from_str(&format!("{int_part}{frac_part}")).expect("decimal digits");
    let denom = num_traits::pow(BigInt::from(10u32), frac_part.len());
    let value = BigRational::new(numer, denom);
    if negative {
        -value
    } else {
        value
    }
}

pub(crate) fn max_of<S: Scalar>(a: S, b: S) -> S {
    if b > a {
        b
    } else {
        a
    }
}

pub(crate) fn min_of<S: Scalar>(a: S, b: S) -> S {
    if b < a {
        b
    } else {
        a
    }
}

pub(crate) fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter()
        .zip(b)
        .fold(S::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub(crate) fn two<S: Scalar>() -> S {
    S::one() + S::one()
}

pub(crate) fn to_f64_vec<S: Scalar>(v: &[S]) -> Vec<f64> {
    v.iter().map(Scalar::to_f64).collect()
}

/// Euclidean norm of an `f64` slice.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
