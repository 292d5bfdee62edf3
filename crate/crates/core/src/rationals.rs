//! Exact arithmetic on ℚ and ℚ/ℤ.
//!
//! Frequencies on the real line and the solenoid are rationals; transversal
//! character indices are elements of ℚ/ℤ, stored as their representative in
//! `[0, 1)`. Integers are arbitrary precision throughout.

use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A reduced rational number `num/den` with `den > 0`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    /// Builds the canonical reduced form of `num/den`.
    pub fn reduce(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Self> {
        let den = den.into();
        if den.is_zero() {
            return Err(Error::Domain("zero denominator".into()));
        }
        Ok(Rational(BigRational::new(num.into(), den)))
    }

    /// Shorthand for literals in code and tests; panics on a zero denominator.
    pub fn new(num: i64, den: i64) -> Self {
        Self::reduce(num, den).expect("nonzero denominator")
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn floor(&self) -> BigInt {
        self.0.numer().div_floor(self.0.denom())
    }

    /// Splits `q = n + ϱ` with `n = ⌊q⌋` and `0 ≤ ϱ < 1`.
    pub fn frac_decompose(&self) -> (BigInt, RationalAngle) {
        let n = self.floor();
        let rest = &self.0 - BigRational::from_integer(n.clone());
        (n, RationalAngle(Rational(rest)))
    }

    /// The fractional part `q mod ℤ`.
    pub fn frac(&self) -> RationalAngle {
        self.frac_decompose().1
    }

    pub fn to_f64(&self) -> f64 {
        const EXACT: i64 = 1 << 53;
        match (self.numer().to_i64(), self.denom().to_i64()) {
            (Some(n), Some(d)) if n.abs() <= EXACT && d <= EXACT => n as f64 / d as f64,
            _ => self.0.to_f64().unwrap_or(f64::NAN),
        }
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl Add for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        Rational(&self.0 + &rhs.0)
    }
}

impl Sub for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        Rational(&self.0 - &rhs.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `"n"` or `"n/d"`.
    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<BigInt>()
                .map_err(|_| Error::Domain(format!("not a rational: {s:?}")))
        };
        match s.split_once('/') {
            Some((n, d)) => Rational::reduce(parse(n)?, parse(d)?),
            None => Ok(Rational::from_integer(parse(s)?)),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    #[serde(with = "bigint_json")]
    num: BigInt,
    #[serde(with = "bigint_json")]
    den: BigInt,
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RationalRepr {
            num: self.numer().clone(),
            den: self.denom().clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = RationalRepr::deserialize(d)?;
        if !repr.den.is_positive() {
            return Err(serde::de::Error::custom("rational denominator must be positive"));
        }
        Rational::reduce(repr.num, repr.den).map_err(serde::de::Error::custom)
    }
}

/// An element `a/b` of ℚ/ℤ, held as its representative in `[0, 1)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalAngle(Rational);

impl RationalAngle {
    /// Reduces `a/b` modulo 1.
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>) -> Result<Self> {
        Ok(Rational::reduce(a, b)?.frac())
    }

    pub fn identity() -> Self {
        RationalAngle(Rational::zero())
    }

    pub fn is_identity(&self) -> bool {
        self.0.is_zero()
    }

    /// Numerator `a` with `0 ≤ a < b`.
    pub fn a(&self) -> &BigInt {
        self.0.numer()
    }

    /// Denominator `b ≥ 1`; this is the order of the angle in ℚ/ℤ.
    pub fn b(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn add(&self, other: &RationalAngle) -> RationalAngle {
        (&self.0 + &other.0).frac()
    }

    pub fn neg(&self) -> RationalAngle {
        (-&self.0).frac()
    }

    pub fn sub(&self, other: &RationalAngle) -> RationalAngle {
        self.add(&other.neg())
    }

    pub fn as_rational(&self) -> &Rational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
}

impl From<&Rational> for RationalAngle {
    fn from(q: &Rational) -> Self {
        q.frac()
    }
}

impl fmt::Display for RationalAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.a(), self.b())
    }
}

impl fmt::Debug for RationalAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Serialize, Deserialize)]
struct AngleRepr {
    #[serde(with = "bigint_json")]
    a: BigInt,
    #[serde(with = "bigint_json")]
    b: BigInt,
}

impl Serialize for RationalAngle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        AngleRepr {
            a: self.a().clone(),
            b: self.b().clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalAngle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = AngleRepr::deserialize(d)?;
        if !repr.b.is_positive() {
            return Err(serde::de::Error::custom("angle denominator must be positive"));
        }
        RationalAngle::new(repr.a, repr.b).map_err(serde::de::Error::custom)
    }
}

/// `reduce(num, den)` as a free function.
pub fn reduce(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Result<Rational> {
    Rational::reduce(num, den)
}

pub fn frac_decompose(q: &Rational) -> (BigInt, RationalAngle) {
    q.frac_decompose()
}

pub fn angle_add(p: &RationalAngle, r: &RationalAngle) -> RationalAngle {
    p.add(r)
}

/// JSON integers for `BigInt`: plain numbers when they fit in 64 bits,
/// decimal strings otherwise.
pub mod bigint_json {
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(n: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        if let Some(v) = n.to_i64() {
            s.serialize_i64(v)
        } else if let Some(v) = n.to_u64() {
            s.serialize_u64(v)
        } else {
            s.serialize_str(&n.to_string())
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Signed(i64),
        Unsigned(u64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Signed(v) => Ok(v.into()),
            Repr::Unsigned(v) => Ok(v.into()),
            Repr::Text(t) => t
                .parse()
                .map_err(|_| de::Error::custom(format!("not an integer: {t:?}"))),
        }
    }
}
