//! Exact rationals and extended non-negative values.
//!
//! Finite systems carry masses and integrands as [`BigRational`]s so every
//! identity can be checked with equality instead of a tolerance. Integrands
//! take values in `[0, +inf]`, represented by [`ExtValue`].

use std::fmt;
use std::iter::Sum;
use std::ops::Add;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseValueError {
    #[error("cannot parse `{0}` as a rational number")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("negative value `{0}` where a non-negative value is required")]
    Negative(String),
}

/// Parses `"3"`, `"-3/4"` or a decimal such as `"0.125"` exactly.
pub fn parse_rational(text: &str) -> Result<BigRational, ParseValueError> {
    let s = text.trim();
    let bad = || ParseValueError::Malformed(text.to_string());
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(ParseValueError::ZeroDenominator(text.to_string()));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int_part.starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        let int_value = if int_digits.is_empty() {
            BigInt::zero()
        } else {
            BigInt::from_str(int_digits).map_err(|_| bad())?
        };
        let frac_value = BigInt::from_str(frac_part).map_err(|_| bad())?;
        let scale = num_traits::pow(BigInt::from(10u32), frac_part.len());
        let magnitude = BigRational::new(int_value * &scale + frac_value, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    BigInt::from_str(s)
        .map(BigRational::from_integer)
        .map_err(|_| bad())
}

/// Renders a rational as `numerator/denominator`, always with both parts.
pub fn ratio_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Serde helper: serialize a rational as `"n/d"`.
pub fn serialize_ratio<S: Serializer>(r: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&ratio_string(r))
}

pub fn serialize_ratio_vec<S: Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(ratio_string))
}

/// A value in `[0, +inf]` with an exact finite part.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtValue {
    Finite(BigRational),
    Infinite,
}

impl ExtValue {
    pub fn zero() -> Self {
        ExtValue::Finite(BigRational::zero())
    }

    pub fn one() -> Self {
        ExtValue::Finite(BigRational::one())
    }

    pub fn from_integer(n: i64) -> Self {
        ExtValue::Finite(BigRational::from_integer(BigInt::from(n)))
    }

    /// Rejects negative finite values.
    pub fn nonnegative(r: BigRational) -> Result<Self, ParseValueError> {
        if r.is_negative() {
            Err(ParseValueError::Negative(ratio_string(&r)))
        } else {
            Ok(ExtValue::Finite(r))
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtValue::Infinite)
    }

    pub fn finite(&self) -> Option<&BigRational> {
        match self {
            ExtValue::Finite(r) => Some(r),
            ExtValue::Infinite => None,
        }
    }

    /// `mass * self` with the measure-theoretic convention `0 * inf = 0`.
    pub fn weighted(&self, mass: &BigRational) -> ExtValue {
        if mass.is_zero() {
            return ExtValue::zero();
        }
        match self {
            ExtValue::Finite(r) => ExtValue::Finite(r * mass),
            ExtValue::Infinite => ExtValue::Infinite,
        }
    }
}

impl Add for ExtValue {
    type Output = ExtValue;

    fn add(self, rhs: ExtValue) -> ExtValue {
        match (self, rhs) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => ExtValue::Finite(a + b),
            _ => ExtValue::Infinite,
        }
    }
}

impl<'a> Add<&'a ExtValue> for ExtValue {
    type Output = ExtValue;

    fn add(self, rhs: &'a ExtValue) -> ExtValue {
        match (self, rhs) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => ExtValue::Finite(a + b),
            _ => ExtValue::Infinite,
        }
    }
}

impl Sum for ExtValue {
    fn sum<I: Iterator<Item = ExtValue>>(iter: I) -> Self {
        iter.fold(ExtValue::zero(), |acc, v| acc + v)
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::Finite(r) => write!(f, "{}", ratio_string(r)),
            ExtValue::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for ExtValue {
    type Err = ParseValueError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "+inf" | "infinity" => Ok(ExtValue::Infinite),
            other => ExtValue::nonnegative(parse_rational(other)?),
        }
    }
}

impl Serialize for ExtValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl From<BigRational> for ExtValue {
    fn from(r: BigRational) -> Self {
        ExtValue::Finite(r)
    }
}
