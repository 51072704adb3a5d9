use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::{format_rat, parse_int, parse_rat, Rat};

/// Default absolute tolerance for comparisons over [`SemiringTag::Real`].
pub const REAL_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SemiringTag {
    Bool,
    Int,
    Rat,
    Real,
}

/// A commutative semiring with the operations tensors need. Exact carriers
/// compare exactly; `f64` compares within an absolute tolerance.
pub trait Semiring: Clone + PartialEq + Debug + Send + Sync + 'static {
    const TAG: SemiringTag;

    fn zero() -> Self;
    fn one() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;

    fn is_zero(&self) -> bool {
        self.approx_eq(&Self::zero(), REAL_TOL)
    }

    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn to_json(&self) -> Value;
    fn from_json(v: &Value) -> Result<Self>;
}

impl Semiring for bool {
    const TAG: SemiringTag = SemiringTag::Bool;

    fn zero() -> Self {
        false
    }
    fn one() -> Self {
        true
    }
    fn add(&self, other: &Self) -> Self {
        *self || *other
    }
    fn mul(&self, other: &Self) -> Self {
        *self && *other
    }
    fn to_json(&self) -> Value {
        Value::from(u8::from(*self))
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::Bool(b) => Ok(*b),
            Value::Number(n) if n.as_u64() == Some(0) => Ok(false),
            Value::Number(n) if n.as_u64() == Some(1) => Ok(true),
            _ => Err(Error::MalformedInput(format!("not a boolean entry: {v}"))),
        }
    }
}

impl Semiring for BigInt {
    const TAG: SemiringTag = SemiringTag::Int;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_json(&self) -> Value {
        Value::from(self.to_string())
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_int(s),
            Value::Number(n) => parse_int(&n.to_string()),
            _ => Err(Error::MalformedInput(format!("not an integer entry: {v}"))),
        }
    }
}

impl Semiring for Rat {
    const TAG: SemiringTag = SemiringTag::Rat;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_json(&self) -> Value {
        Value::from(format_rat(self))
    }
    fn from_json(v: &Value) -> Result<Self> {
        match v {
            Value::String(s) => parse_rat(s),
            Value::Number(n) => parse_rat(&n.to_string()),
            _ => Err(Error::MalformedInput(format!("not a rational entry: {v}"))),
        }
    }
}

impl Semiring for f64 {
    const TAG: SemiringTag = SemiringTag::Real;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).abs() <= tol
    }
    fn to_json(&self) -> Value {
        Value::from(*self)
    }
    fn from_json(v: &Value) -> Result<Self> {
        v.as_f64()
            .ok_or_else(|| Error::MalformedInput(format!("not a real entry: {v}")))
    }
}
