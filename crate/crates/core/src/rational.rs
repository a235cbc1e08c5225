//! Exact rational scalars and the mixed exact/float [`Value`] returned by cost
//! evaluation.
//!
//! All game arithmetic is exact except for the exponential cost model, whose
//! values are `f64`. Rational arithmetic is backed by `Ratio<i128>` with
//! checked operations; an overflow panics with a clear message instead of
//! silently wrapping.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, ToPrimitive, Zero};

/// Absolute/relative tolerance used whenever a floating point value takes part
/// in a comparison.
pub const FLOAT_TOL: f64 = 1e-9;

/// An exact rational number.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(Ratio<i128>);

impl Rational {
    pub fn new(numer: i128, denom: i128) -> Self {
        assert!(denom != 0, "rational with zero denominator");
        Rational(Ratio::new(numer, denom))
    }

    pub fn from_int(v: i128) -> Self {
        Rational(Ratio::from_integer(v))
    }

    pub fn zero() -> Self {
        Rational(Ratio::zero())
    }

    pub fn one() -> Self {
        Rational::from_int(1)
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// The value as a non-negative integer, if it is one.
    pub fn to_u32(&self) -> Option<u32> {
        if self.is_integer() && !self.is_negative() {
            u32::try_from(self.numer()).ok()
        } else {
            None
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Closest rational with a bounded denominator; `None` for non-finite input.
    pub fn approximate_f64(v: f64) -> Option<Self> {
        Ratio::<i128>::approximate_float(v).map(Rational)
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn half(&self) -> Self {
        *self / Rational::from_int(2)
    }
}

impl From<i128> for Rational {
    fn from(v: i128) -> Self {
        Rational::from_int(v)
    }
}

impl From<u32> for Rational {
    fn from(v: u32) -> Self {
        Rational::from_int(v as i128)
    }
}

impl From<usize> for Rational {
    fn from(v: usize) -> Self {
        Rational::from_int(v as i128)
    }
}

macro_rules! checked_binop {
    ($trait:ident, $method:ident, $checked:ident, $assign_trait:ident, $assign:ident, $name:literal) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(
                    self.0
                        .$checked(&rhs.0)
                        .unwrap_or_else(|| panic!(concat!("rational overflow in ", $name))),
                )
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                self.$method(*rhs)
            }
        }
        impl $assign_trait for Rational {
            fn $assign(&mut self, rhs: Rational) {
                *self = (*self).$method(rhs);
            }
        }
    };
}

checked_binop!(Add, add, checked_add, AddAssign, add_assign, "addition");
checked_binop!(Sub, sub, checked_sub, SubAssign, sub_assign, "subtraction");
checked_binop!(Mul, mul, checked_mul, MulAssign, mul_assign, "multiplication");

// `Div` is handled separately so that division by zero reports its own cause.
impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational(self.0.checked_div(&rhs.0).expect("rational overflow in division"))
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, v| acc + v)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, v| acc + *v)
    }
}

/// Always `p/q`, including integers (`3/1`).
impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}` (expected `p` or `p/q`)")]
pub struct ParseRationalError(pub String);

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        match t.split_once('/') {
            Some((p, q)) => {
                let p: i128 = p.trim().parse().map_err(|_| err())?;
                let q: i128 = q.trim().parse().map_err(|_| err())?;
                if q == 0 {
                    return Err(err());
                }
                Ok(Rational::new(p, q))
            }
            None => t.parse::<i128>().map(Rational::from_int).map_err(|_| err()),
        }
    }
}

/// A cost or payoff value: exact whenever the cost model is rational-valued,
/// floating point for the exponential model.
/// `PartialEq` is structural (variant and exact payload); use
/// [`Value::same`] for tolerance-aware comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Value {
    Exact(Rational),
    Approx(f64),
}

impl Value {
    pub fn zero() -> Self {
        Value::Exact(Rational::zero())
    }

    pub fn as_exact(&self) -> Option<Rational> {
        match self {
            Value::Exact(r) => Some(*r),
            Value::Approx(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64(),
            Value::Approx(v) => *v,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    /// Exact comparison for rationals; tolerance-based as soon as a float is
    /// involved (values within [`FLOAT_TOL`] compare equal).
    pub fn compare(&self, other: &Value) -> Ordering {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a.cmp(b),
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                if approx_eq(a, b) {
                    Ordering::Equal
                } else if a < b {
                    Ordering::Less
                } else {
                    Ordering::Greater
                }
            }
        }
    }

    pub fn same(&self, other: &Value) -> bool {
        self.compare(other) == Ordering::Equal
    }

    pub fn less_than(&self, other: &Value) -> bool {
        self.compare(other) == Ordering::Less
    }

    pub fn scale(&self, k: Rational) -> Value {
        match self {
            Value::Exact(r) => Value::Exact(*r * k),
            Value::Approx(v) => Value::Approx(v * k.to_f64()),
        }
    }
}

/// `|a - b| <= FLOAT_TOL * max(1, |a|, |b|)`.
pub fn approx_eq(a: f64, b: f64) -> bool {
    let scale = 1f64.max(a.abs()).max(b.abs());
    (a - b).abs() <= FLOAT_TOL * scale
}

impl From<Rational> for Value {
    fn from(r: Rational) -> Self {
        Value::Exact(r)
    }
}

impl Add for Value {
    type Output = Value;
    fn add(self, rhs: Value) -> Value {
        match (self, rhs) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a + b),
            (a, b) => Value::Approx(a.to_f64() + b.to_f64()),
        }
    }
}

impl Sub for Value {
    type Output = Value;
    fn sub(self, rhs: Value) -> Value {
        match (self, rhs) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a - b),
            (a, b) => Value::Approx(a.to_f64() - b.to_f64()),
        }
    }
}

impl Sum for Value {
    fn sum<I: Iterator<Item = Value>>(iter: I) -> Value {
        iter.fold(Value::zero(), |acc, v| acc + v)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{r}"),
            Value::Approx(v) => write!(f, "{v}"),
        }
    }
}
