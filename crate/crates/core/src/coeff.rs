//! Commutative coefficient algebras `B` that characters take values in.
//!
//! Three algebras are registered: exact unbounded rationals, `f64`, and the
//! truncated polynomial algebra `Q[x]/(x^M)`. The last one is a genuinely
//! non-field target and catches code that silently assumes `B = R`.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

/// Default relative tolerance for float comparisons.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoeffError {
    #[error("element is not invertible: {0}")]
    NotInvertible(String),
    #[error("algebra `{0}` declares no norm")]
    Unsupported(&'static str),
    #[error("cannot parse scalar literal: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgebraKind {
    Rational,
    Float64,
    TruncatedPoly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormKind {
    AbsoluteValue,
    /// `M * max_i |c_i|` on `Q[x]/(x^M)`.
    ScaledMaxCoefficient,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct AlgebraDescriptor {
    pub kind: AlgebraKind,
    pub order: Option<usize>,
    pub norm: Option<NormKind>,
}

/// A commutative unital algebra over `Q`.
///
/// Arithmetic goes through the standard operator traits; the remaining
/// methods cover what the character calculus needs beyond a ring.
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn descriptor() -> AlgebraDescriptor;

    /// The image of a rational under the unit map `Q -> B`.
    fn from_rational(r: &BigRational) -> Self;

    fn try_inverse(&self) -> Result<Self, CoeffError>;

    fn norm(&self) -> Result<f64, CoeffError>;

    /// Equality for exact algebras, relative closeness for floats.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool;

    fn is_exact() -> bool;

    /// A basis of `B` as a `Q`-vector space (finite for all registered kinds).
    fn field_basis() -> Vec<Self>;

    /// Coordinates with respect to [`Coeff::field_basis`].
    fn field_coords(&self) -> Vec<BigRational>;

    fn to_json(&self) -> Value;

    fn from_json(v: &Value) -> Result<Self, CoeffError>;

    /// `self += a * b`.
    fn mul_acc(&mut self, a: &Self, b: &Self) {
        let prod = a.clone() * b.clone();
        let cur = std::mem::replace(self, Self::zero());
        *self = cur + prod;
    }

    fn scale(&self, r: &BigRational) -> Self {
        if r.is_one() {
            self.clone()
        } else {
            self.clone() * Self::from_rational(r)
        }
    }
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"p"` or a JSON number (converted exactly) into a rational.
pub fn parse_rational(v: &Value) -> Result<BigRational, CoeffError> {
    match v {
        Value::String(s) => parse_rational_str(s),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(int(i))
            } else {
                let f = n.as_f64().ok_or_else(|| CoeffError::Parse(n.to_string()))?;
                BigRational::from_float(f).ok_or_else(|| CoeffError::Parse(n.to_string()))
            }
        }
        other => Err(CoeffError::Parse(other.to_string())),
    }
}

pub fn parse_rational_str(s: &str) -> Result<BigRational, CoeffError> {
    let s = s.trim();
    let err = || CoeffError::Parse(s.to_string());
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().map_err(|_| err())?;
            let q: BigInt = q.trim().parse().map_err(|_| err())?;
            if q.is_zero() {
                return Err(err());
            }
            Ok(BigRational::new(p, q))
        }
        None => {
            let p: BigInt = s.parse().map_err(|_| err())?;
            Ok(BigRational::from_integer(p))
        }
    }
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

impl Coeff for BigRational {
    fn descriptor() -> AlgebraDescriptor {
        AlgebraDescriptor {
            kind: AlgebraKind::Rational,
            order: None,
            norm: Some(NormKind::AbsoluteValue),
        }
    }

    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }

    fn try_inverse(&self) -> Result<Self, CoeffError> {
        if self.is_zero() {
            Err(CoeffError::NotInvertible("0".into()))
        } else {
            Ok(self.recip())
        }
    }

    fn norm(&self) -> Result<f64, CoeffError> {
        Ok(rational_to_f64(&self.abs()))
    }

    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn is_exact() -> bool {
        true
    }

    fn field_basis() -> Vec<Self> {
        vec![BigRational::one()]
    }

    fn field_coords(&self) -> Vec<BigRational> {
        vec![self.clone()]
    }

    fn to_json(&self) -> Value {
        Value::String(format_rational(self))
    }

    fn from_json(v: &Value) -> Result<Self, CoeffError> {
        parse_rational(v)
    }

    fn mul_acc(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }

    fn scale(&self, r: &BigRational) -> Self {
        self * r
    }
}

/// Relative comparison `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn float_close(a: f64, b: f64, tol: f64) -> bool {
    let scale = 1f64.max(a.abs()).max(b.abs());
    (a - b).abs() <= tol * scale
}

impl Coeff for f64 {
    fn descriptor() -> AlgebraDescriptor {
        AlgebraDescriptor {
            kind: AlgebraKind::Float64,
            order: None,
            norm: Some(NormKind::AbsoluteValue),
        }
    }

    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }

    fn try_inverse(&self) -> Result<Self, CoeffError> {
        if *self == 0.0 || !self.is_finite() {
            Err(CoeffError::NotInvertible(self.to_string()))
        } else {
            Ok(1.0 / self)
        }
    }

    fn norm(&self) -> Result<f64, CoeffError> {
        Ok(self.abs())
    }

    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        float_close(*self, *other, tol)
    }

    fn is_exact() -> bool {
        false
    }

    fn field_basis() -> Vec<Self> {
        vec![1.0]
    }

    fn field_coords(&self) -> Vec<BigRational> {
        vec![BigRational::from_float(*self).unwrap_or_else(BigRational::zero)]
    }

    fn to_json(&self) -> Value {
        serde_json::Number::from_f64(*self)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    }

    fn from_json(v: &Value) -> Result<Self, CoeffError> {
        match v {
            Value::Number(n) => n.as_f64().ok_or_else(|| CoeffError::Parse(n.to_string())),
            Value::String(_) => Ok(rational_to_f64(&parse_rational(v)?)),
            other => Err(CoeffError::Parse(other.to_string())),
        }
    }

    fn mul_acc(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

/// An element of `Q[x]/(x^M)`, stored as `M` rational coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncPoly<const M: usize> {
    coeffs: [BigRational; M],
}

impl<const M: usize> TruncPoly<M> {
    pub fn new(coeffs: [BigRational; M]) -> Self {
        Self { coeffs }
    }

    /// Builds from a coefficient slice; entries beyond `M` are discarded.
    pub fn from_slice(c: &[BigRational]) -> Self {
        Self {
            coeffs: std::array::from_fn(|i| c.get(i).cloned().unwrap_or_else(BigRational::zero)),
        }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        let c: Vec<_> = c.iter().map(|&v| int(v)).collect();
        Self::from_slice(&c)
    }

    pub fn x() -> Self {
        let mut p = Self::zero();
        if M > 1 {
            p.coeffs[1] = BigRational::one();
        }
        p
    }

    pub fn coeffs(&self) -> &[BigRational; M] {
        &self.coeffs
    }

    pub fn max_abs_coefficient(&self) -> BigRational {
        self.coeffs
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigRational::zero)
    }
}

impl<const M: usize> Zero for TruncPoly<M> {
    fn zero() -> Self {
        Self {
            coeffs: std::array::from_fn(|_| BigRational::zero()),
        }
    }

    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
}

impl<const M: usize> One for TruncPoly<M> {
    fn one() -> Self {
        Self::from_rational(&BigRational::one())
    }
}

impl<const M: usize> Add for TruncPoly<M> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a += b;
        }
        self
    }
}

impl<const M: usize> Sub for TruncPoly<M> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs) {
            *a -= b;
        }
        self
    }
}

impl<const M: usize> Neg for TruncPoly<M> {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            coeffs: self.coeffs.map(|c| -c),
        }
    }
}

impl<const M: usize> Mul for TruncPoly<M> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = Self::zero();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(M - i) {
                out.coeffs[i + j] += a * b;
            }
        }
        out
    }
}

impl<const M: usize> Coeff for TruncPoly<M> {
    fn descriptor() -> AlgebraDescriptor {
        AlgebraDescriptor {
            kind: AlgebraKind::TruncatedPoly,
            order: Some(M),
            norm: Some(NormKind::ScaledMaxCoefficient),
        }
    }

    fn from_rational(r: &BigRational) -> Self {
        let mut p = Self::zero();
        if M > 0 {
            p.coeffs[0] = r.clone();
        }
        p
    }

    /// Writes `a = c (1 + n)` with `n` nilpotent and sums the geometric series
    /// `c^{-1} (1 - n + n^2 - ...)`, which stops after `M` terms.
    fn try_inverse(&self) -> Result<Self, CoeffError> {
        let c = &self.coeffs[0];
        if M == 0 || c.is_zero() {
            return Err(CoeffError::NotInvertible(format!("{:?}", self.coeffs)));
        }
        let c_inv = c.recip();
        let mut nil = self.clone() * Self::from_rational(&c_inv);
        nil.coeffs[0] = BigRational::zero();
        let mut term = Self::one();
        let mut acc = Self::one();
        for k in 1..M {
            term = term * nil.clone();
            if k % 2 == 1 {
                acc = acc - term.clone();
            } else {
                acc = acc + term.clone();
            }
        }
        Ok(acc * Self::from_rational(&c_inv))
    }

    /// `M * max|c_i|`. The plain max-coefficient norm is not submultiplicative
    /// (`(1 + x)^2` already breaks it); scaling by `M` bounds every convolution
    /// coefficient sum and restores `|ab| <= |a| |b|`.
    fn norm(&self) -> Result<f64, CoeffError> {
        Ok(M as f64 * rational_to_f64(&self.max_abs_coefficient()))
    }

    fn approx_eq(&self, other: &Self, _tol: f64) -> bool {
        self == other
    }

    fn is_exact() -> bool {
        true
    }

    fn field_basis() -> Vec<Self> {
        (0..M)
            .map(|i| {
                let mut p = Self::zero();
                p.coeffs[i] = BigRational::one();
                p
            })
            .collect()
    }

    fn field_coords(&self) -> Vec<BigRational> {
        self.coeffs.to_vec()
    }

    fn to_json(&self) -> Value {
        Value::Array(self.coeffs.iter().map(|c| Value::String(format_rational(c))).collect())
    }

    fn from_json(v: &Value) -> Result<Self, CoeffError> {
        match v {
            Value::Array(items) => {
                if items.len() > M {
                    return Err(CoeffError::Parse(format!(
                        "{} coefficients for order {M}",
                        items.len()
                    )));
                }
                let c = items.iter().map(parse_rational).collect::<Result<Vec<_>, _>>()?;
                Ok(Self::from_slice(&c))
            }
            other => Ok(Self::from_rational(&parse_rational(other)?)),
        }
    }
}
