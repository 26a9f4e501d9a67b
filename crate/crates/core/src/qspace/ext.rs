//! Non-negative exact rationals extended by a single point at infinity.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("0 * inf is undefined")]
    ZeroTimesInf,
    #[error("0 / 0 is undefined")]
    ZeroOverZero,
    #[error("inf / inf is undefined outside cross-ratio cancellation")]
    InfOverInf,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseExtError {
    #[error("empty distance entry")]
    Empty,
    #[error("negative distance entry `{0}`")]
    Negative(String),
    #[error("malformed rational `{0}` (expected `p`, `p/q` or `inf`)")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Repr {
    Finite(BigRational),
    Inf,
}

/// A value in `[0, ∞]` with exact rational finite part.
///
/// Finite values compare below `INF`. Division follows `λ/0 = ∞` for
/// `λ > 0`; `inf/inf` is rejected here (cross-ratio cancellation lives in
/// [`crate::crossratio`]).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExtRational(Repr);

impl ExtRational {
    pub const INF: ExtRational = ExtRational(Repr::Inf);

    /// Returns `None` for negative input.
    pub fn new(value: BigRational) -> Option<Self> {
        if value.is_negative() {
            None
        } else {
            Some(ExtRational(Repr::Finite(value)))
        }
    }

    pub fn zero() -> Self {
        ExtRational(Repr::Finite(BigRational::zero()))
    }

    pub fn one() -> Self {
        ExtRational(Repr::Finite(BigRational::one()))
    }

    pub fn from_integer(n: u64) -> Self {
        ExtRational(Repr::Finite(BigRational::from_integer(BigInt::from(n))))
    }

    /// `numer / denom`; panics if `denom == 0`.
    pub fn ratio(numer: u64, denom: u64) -> Self {
        ExtRational(Repr::Finite(BigRational::new(
            BigInt::from(numer),
            BigInt::from(denom),
        )))
    }

    pub(crate) fn finite_unchecked(value: BigRational) -> Self {
        debug_assert!(!value.is_negative());
        ExtRational(Repr::Finite(value))
    }

    pub fn is_inf(&self) -> bool {
        matches!(self.0, Repr::Inf)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_inf()
    }

    pub fn is_zero(&self) -> bool {
        matches!(&self.0, Repr::Finite(v) if v.is_zero())
    }

    pub fn as_finite(&self) -> Option<&BigRational> {
        match &self.0 {
            Repr::Finite(v) => Some(v),
            Repr::Inf => None,
        }
    }

    pub fn into_finite(self) -> Option<BigRational> {
        match self.0 {
            Repr::Finite(v) => Some(v),
            Repr::Inf => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Finite(v) => v.to_f64().unwrap_or(f64::INFINITY),
            Repr::Inf => f64::INFINITY,
        }
    }

    pub fn checked_mul(&self, rhs: &ExtRational) -> Result<ExtRational, ArithError> {
        match (&self.0, &rhs.0) {
            (Repr::Finite(a), Repr::Finite(b)) => Ok(ExtRational(Repr::Finite(a * b))),
            (Repr::Inf, Repr::Inf) => Ok(Self::INF),
            (Repr::Inf, Repr::Finite(v)) | (Repr::Finite(v), Repr::Inf) => {
                if v.is_zero() {
                    Err(ArithError::ZeroTimesInf)
                } else {
                    Ok(Self::INF)
                }
            }
        }
    }

    pub fn checked_div(&self, rhs: &ExtRational) -> Result<ExtRational, ArithError> {
        match (&self.0, &rhs.0) {
            (Repr::Finite(a), Repr::Finite(b)) => {
                if b.is_zero() {
                    if a.is_zero() {
                        Err(ArithError::ZeroOverZero)
                    } else {
                        Ok(Self::INF)
                    }
                } else {
                    Ok(ExtRational(Repr::Finite(a / b)))
                }
            }
            (Repr::Finite(_), Repr::Inf) => Ok(Self::zero()),
            (Repr::Inf, Repr::Finite(_)) => Ok(Self::INF),
            (Repr::Inf, Repr::Inf) => Err(ArithError::InfOverInf),
        }
    }

    pub fn add(&self, rhs: &ExtRational) -> ExtRational {
        match (&self.0, &rhs.0) {
            (Repr::Finite(a), Repr::Finite(b)) => ExtRational(Repr::Finite(a + b)),
            _ => Self::INF,
        }
    }

    /// Multiplies a finite value by `lambda > 0`; `INF` stays `INF`.
    pub fn scale(&self, lambda: &BigRational) -> ExtRational {
        match &self.0 {
            Repr::Finite(v) => ExtRational(Repr::Finite(v * lambda)),
            Repr::Inf => Self::INF,
        }
    }
}

impl From<BigRational> for ExtRational {
    /// Panics on negative input.
    fn from(value: BigRational) -> Self {
        ExtRational::new(value).expect("negative value for ExtRational")
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Finite(a), Repr::Finite(b)) => a.cmp(b),
            (Repr::Finite(_), Repr::Inf) => Ordering::Less,
            (Repr::Inf, Repr::Finite(_)) => Ordering::Greater,
            (Repr::Inf, Repr::Inf) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Finite(v) => write!(f, "{v}"),
            Repr::Inf => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtRational {
    type Err = ParseExtError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.is_empty() {
            return Err(ParseExtError::Empty);
        }
        if t == "inf" {
            return Ok(Self::INF);
        }
        let value = parse_rational(t)?;
        ExtRational::new(value).ok_or_else(|| ParseExtError::Negative(t.to_string()))
    }
}

/// Parses `p` or `p/q` (integers, optional leading `-`); rejects `q = 0`.
pub fn parse_rational(s: &str) -> Result<BigRational, ParseExtError> {
    let t = s.trim();
    let malformed = || ParseExtError::Malformed(t.to_string());
    let int = |part: &str| -> Result<BigInt, ParseExtError> {
        let digits = part.strip_prefix('-').unwrap_or(part);
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(malformed());
        }
        part.parse::<BigInt>().map_err(|_| malformed())
    };
    match t.split_once('/') {
        None => Ok(BigRational::from_integer(int(t)?)),
        Some((p, q)) => {
            let q = int(q)?;
            if q.is_zero() {
                return Err(malformed());
            }
            Ok(BigRational::new(int(p)?, q))
        }
    }
}

impl Serialize for ExtRational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExtRational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
