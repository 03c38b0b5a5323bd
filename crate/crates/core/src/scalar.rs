//! Exact-first scalar arithmetic.
//!
//! Scores, crossing points and report values are computed in exact rational
//! arithmetic whenever the inputs are rational, which covers every value that
//! can be written in a CSV cell or a config file: integers, finite decimals,
//! and explicit `p/q` fractions. Ranking selections and solving for the exact
//! θ where two score lines cross are both decided by sign tests, so the exact
//! path never has to ask "how close is close enough".
//!
//! A floating-point fallback exists for values that are only available
//! approximately (e.g. sampled parameter points fed in as `f64`). Mixing an
//! approximate value into an expression taints the result: once any operand
//! is [`Scalar::approx`], the whole computation continues in `f64` and
//! comparisons treat values within a relative `1e-9` of each other as tied.
//! That tolerance is also what merges near-duplicate crossing points on the
//! float path.
//!
//! Construction rejects non-finite floats, so the comparison order is total.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, Visitor};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Relative tolerance deciding ties on the floating-point path.
pub const RELATIVE_TOLERANCE: f64 = 1e-9;

/// A real number that is exact when it can be and explicit about it when it
/// cannot.
#[derive(Clone, Debug)]
pub enum Scalar {
    /// Arbitrary-precision rational; arithmetic and comparisons are exact.
    Exact(BigRational),
    /// Finite `f64`; comparisons use [`RELATIVE_TOLERANCE`].
    Approx(f64),
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(BigRational::one())
    }

    /// Exact integer.
    pub fn integer(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact ratio `n/d`.
    ///
    /// # Panics
    /// Panics if `d == 0`.
    pub fn ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "ratio denominator must be nonzero");
        Scalar::Exact(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    /// Explicitly approximate value.
    ///
    /// # Panics
    /// Panics if `x` is NaN or infinite; non-finite values have no place in
    /// scores and would break the total comparison order.
    pub fn approx(x: f64) -> Self {
        assert!(x.is_finite(), "approximate scalar must be finite, got {x}");
        Scalar::Approx(x)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(r) => r.is_zero(),
            Scalar::Approx(x) => *x == 0.0,
        }
    }

    /// Nearest `f64`. Exact values convert with one rounding.
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => r
                .to_f64()
                .unwrap_or_else(|| panic!("rational out of f64 range: {r}")),
            Scalar::Approx(x) => *x,
        }
    }

    /// Underlying rational, if this value is exact.
    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(r) => Some(r),
            Scalar::Approx(_) => None,
        }
    }

    /// Total order; see the module doc for the float-path tie rule.
    pub fn cmp_value(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.cmp(b),
            _ => {
                let a = self.to_f64();
                let b = other.to_f64();
                if (a - b).abs() <= RELATIVE_TOLERANCE * a.abs().max(b.abs()).max(1.0) {
                    Ordering::Equal
                } else {
                    a.partial_cmp(&b).expect("scalars are finite")
                }
            }
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(r.abs()),
            Scalar::Approx(x) => Scalar::Approx(x.abs()),
        }
    }

    pub fn min(self, other: Scalar) -> Scalar {
        if self.cmp_value(&other) == Ordering::Greater {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if self.cmp_value(&other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    pub fn midpoint(a: &Scalar, b: &Scalar) -> Scalar {
        &(a + b) / &Scalar::integer(2)
    }

    fn binop(
        &self,
        rhs: &Scalar,
        exact: fn(&BigRational, &BigRational) -> BigRational,
        approx: fn(f64, f64) -> f64,
    ) -> Scalar {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(exact(a, b)),
            _ => Scalar::Approx(approx(self.to_f64(), rhs.to_f64())),
        }
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::integer(n)
    }
}

impl From<usize> for Scalar {
    fn from(n: usize) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl Eq for Scalar {}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_value(other)
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $exact:expr, $approx:expr) => {
        impl $trait for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                self.binop(rhs, $exact, $approx)
            }
        }

        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }

        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }

        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

scalar_binop!(Add, add, |a, b| a + b, |a, b| a + b);
scalar_binop!(Sub, sub, |a, b| a - b, |a, b| a - b);
scalar_binop!(Mul, mul, |a, b| a * b, |a, b| a * b);

impl Div for &Scalar {
    type Output = Scalar;

    /// # Panics
    /// Panics on division by exact zero; callers guard the divisor.
    fn div(self, rhs: &Scalar) -> Scalar {
        if let Scalar::Exact(b) = rhs {
            if b.is_zero() {
                panic!("division by exact zero");
            }
        }
        self.binop(rhs, |a, b| a / b, |a, b| a / b)
    }
}

impl Div for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        &self / &rhs
    }
}

impl Div<&Scalar> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: &Scalar) -> Scalar {
        &self / rhs
    }
}

impl Div<Scalar> for &Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        self / &rhs
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(r) => Scalar::Exact(-r),
            Scalar::Approx(x) => Scalar::Approx(-x),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(r) => {
                if r.denom().is_one() {
                    write!(f, "{}", r.numer())
                } else {
                    write!(f, "{}/{}", r.numer(), r.denom())
                }
            }
            Scalar::Approx(x) => write!(f, "{x}"),
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    /// Accepts integers (`22`), fractions (`7/20`), and finite decimals with
    /// an optional exponent (`10.1`, `1e-3`). All of them parse exactly.
    fn from_str(s: &str) -> Result<Self, Error> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Argument("empty numeric value".into()));
        }
        if let Some((num, den)) = s.split_once('/') {
            let n: BigInt = num
                .trim()
                .parse()
                .map_err(|_| bad_number(s, "fraction numerator"))?;
            let d: BigInt = den
                .trim()
                .parse()
                .map_err(|_| bad_number(s, "fraction denominator"))?;
            if d.is_zero() {
                return Err(Error::Argument(format!("zero denominator in '{s}'")));
            }
            return Ok(Scalar::Exact(BigRational::new(n, d)));
        }
        parse_decimal(s)
    }
}

fn bad_number(s: &str, what: &str) -> Error {
    Error::Argument(format!("cannot parse {what} in '{s}'"))
}

fn parse_decimal(s: &str) -> Result<Scalar, Error> {
    let (mantissa, exp) = match s.split_once(['e', 'E']) {
        Some((m, e)) => {
            let exp: i32 = e.parse().map_err(|_| bad_number(s, "exponent"))?;
            (m, exp)
        }
        None => (s, 0),
    };
    let (sign, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad_number(s, "number"));
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit())
    {
        return Err(bad_number(s, "number"));
    }
    let joined = format!("{int_part}{frac_part}");
    let unsigned: BigInt = if joined.is_empty() {
        BigInt::zero()
    } else {
        joined.parse().map_err(|_| bad_number(s, "number"))?
    };
    let numer = BigInt::from(sign) * unsigned;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * ten.pow(scale as u32))
    } else {
        BigRational::new(numer, ten.pow(scale.unsigned_abs()))
    };
    Ok(Scalar::Exact(value))
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            // Exact values travel as strings so no reader is tempted to round them.
            Scalar::Exact(_) => serializer.serialize_str(&self.to_string()),
            Scalar::Approx(x) => serializer.serialize_f64(*x),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ScalarVisitor;

        impl Visitor<'_> for ScalarVisitor {
            type Value = Scalar;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or a 'p/q' / decimal string")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
                v.parse().map_err(|e: Error| E::custom(e.to_string()))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Scalar, E> {
                if v.is_finite() {
                    Ok(Scalar::Approx(v))
                } else {
                    Err(E::custom("non-finite value"))
                }
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
                Ok(Scalar::integer(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
                Ok(Scalar::Exact(BigRational::from_integer(BigInt::from(v))))
            }
        }

        deserializer.deserialize_any(ScalarVisitor)
    }
}
