//! Field elements: exact rationals, exact Gaussian rationals, and their
//! double-precision counterparts.
//!
//! Everything downstream is generic over [`Scalar`]. Exact kinds compare
//! structurally; float kinds go through a [`TolerancePolicy`].

use std::fmt::{self, Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::complex::Complex64;
use num::rational::BigRational;
use num::traits::{FromPrimitive, Signed, ToPrimitive, Zero, One};
use num::{Complex, Integer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational numbers.
pub type Q = BigRational;
/// Exact Gaussian rationals `p/q + (r/s)i`.
pub type Qi = Complex<BigRational>;
/// Real doubles.
pub type R64 = f64;
/// Complex doubles.
pub type C64 = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldKind {
    #[serde(rename = "Q")]
    ExactRational,
    #[serde(rename = "Qi")]
    ExactGaussianRational,
    #[serde(rename = "R64")]
    FloatReal,
    #[serde(rename = "C64")]
    FloatComplex,
}

impl FieldKind {
    pub fn tag(self) -> &'static str {
        match self {
            FieldKind::ExactRational => "Q",
            FieldKind::ExactGaussianRational => "Qi",
            FieldKind::FloatReal => "R64",
            FieldKind::FloatComplex => "C64",
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, FieldKind::ExactRational | FieldKind::ExactGaussianRational)
    }

    pub fn is_complex(self) -> bool {
        matches!(self, FieldKind::ExactGaussianRational | FieldKind::FloatComplex)
    }
}

impl Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for FieldKind {
    type Err = ScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Q" => Ok(FieldKind::ExactRational),
            "Qi" => Ok(FieldKind::ExactGaussianRational),
            "R64" => Ok(FieldKind::FloatReal),
            "C64" => Ok(FieldKind::FloatComplex),
            other => Err(ScalarError::UnknownField(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalarError {
    #[error("kind mismatch: {0} vs {1}")]
    KindMismatch(FieldKind, FieldKind),
    #[error("cannot parse {text:?} as {kind} scalar")]
    Parse { kind: FieldKind, text: String },
    #[error("non-finite float value")]
    NonFinite,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("unknown field tag {0:?}")]
    UnknownField(String),
    #[error("invalid tolerance policy: relTol={rel_tol}, absTol={abs_tol}")]
    InvalidTolerance { rel_tol: f64, abs_tol: f64 },
}

/// Outcome of a failed root extraction. `NoRootInField` is an expected
/// answer for exact kinds, not a bug.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RootError {
    #[error("{value} has no root of degree {k} in {kind}")]
    NoRootInField { kind: FieldKind, value: String, k: u32 },
    #[error("root of zero requested")]
    ZeroInput,
}

/// Float comparison policy: `|a-b| <= abs_tol + rel_tol * max(|a|,|b|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl TolerancePolicy {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Result<Self, ScalarError> {
        if rel_tol.is_finite() && abs_tol.is_finite() && rel_tol >= 0.0 && abs_tol >= 0.0 {
            Ok(Self { rel_tol, abs_tol })
        } else {
            Err(ScalarError::InvalidTolerance { rel_tol, abs_tol })
        }
    }

    /// Both tolerances set to the same value.
    pub fn uniform(tol: f64) -> Result<Self, ScalarError> {
        Self::new(tol, tol)
    }

    /// Threshold for a difference between quantities of size `scale`.
    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs_tol + self.rel_tol * scale
    }
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self { rel_tol: 1e-9, abs_tol: 1e-12 }
    }
}

/// A field element. Implemented for [`Q`], [`Qi`], [`R64`] and [`C64`].
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const KIND: FieldKind;
    const EXACT: bool;
    const COMPLEX: bool;

    type Real: RealScalar;
    type Complex: ComplexScalar<Real = Self::Real>;
    type Float: Scalar;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_ratio(num: i64, den: i64) -> Self;
    fn from_real(r: Self::Real) -> Self;
    /// Nearest representable value; exact kinds convert the binary
    /// fraction exactly. Imaginary part dropped for real kinds.
    fn from_c64(z: C64) -> Self;

    fn is_zero(&self) -> bool;
    fn magnitude(&self) -> f64;
    fn conj(&self) -> Self;
    fn to_c64(&self) -> C64;
    fn to_float(&self) -> Self::Float;
    fn to_complex(&self) -> Self::Complex;

    /// A `k`-th root; principal branch for float kinds.
    fn nth_root(&self, k: u32) -> Result<Self, RootError>;

    fn format(&self) -> String;
    fn parse(text: &str) -> Result<Self, ScalarError>;

    fn approx_eq(&self, other: &Self, pol: &TolerancePolicy) -> bool {
        if Self::EXACT {
            self == other
        } else {
            let d = (self.clone() - other.clone()).magnitude();
            d <= pol.threshold(self.magnitude().max(other.magnitude()))
        }
    }

    /// Zero test relative to the size of the surrounding data.
    fn is_negligible(&self, scale: f64, pol: &TolerancePolicy) -> bool {
        if Self::EXACT {
            self.is_zero()
        } else {
            self.magnitude() <= pol.threshold(scale)
        }
    }

    fn from_i64(v: i64) -> Self {
        Self::from_ratio(v, 1)
    }

    /// Common denominator of the exact components (1 for float kinds).
    fn denominator(&self) -> BigInt {
        BigInt::one()
    }

    /// Nearest value with denominator `scale` (float kinds: `from_c64`).
    fn snap(z: C64, _scale: &BigInt) -> Self {
        Self::from_c64(z)
    }

    /// Nearest value with denominator `scale` (identity for float kinds).
    fn round_to(&self, _scale: &BigInt) -> Self {
        self.clone()
    }

    fn inv(&self) -> Self {
        Self::one() / self.clone()
    }

    fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }
}

pub trait RealScalar: Scalar<Real = Self> + PartialOrd {
    fn from_f64(x: f64) -> Self;
    fn is_negative(&self) -> bool;
}

pub trait ComplexScalar: Scalar {
    fn from_parts(re: Self::Real, im: Self::Real) -> Self;
    fn re(&self) -> Self::Real;
    fn im(&self) -> Self::Real;
    fn i() -> Self {
        Self::from_parts(Self::Real::zero(), Self::Real::one())
    }
}

fn q_to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        // Fall back to a ratio of scaled magnitudes when either side overflows.
        let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000) as usize;
        let n = (q.numer() >> shift).to_f64().unwrap_or(f64::INFINITY);
        let d = (q.denom() >> shift).to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

fn f64_to_q(x: f64) -> Q {
    BigRational::from_float(x).unwrap_or_else(<Q as Zero>::zero)
}

fn parse_q(text: &str) -> Option<Q> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    match t.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).ok()?;
            let d = BigInt::from_str(d.trim()).ok()?;
            if d.is_zero() {
                return None;
            }
            Some(BigRational::new(n, d))
        }
        None => BigInt::from_str(t).ok().map(BigRational::from_integer),
    }
}

/// Split `"<re><sign><im><suffix>"` into its parts. Also accepts a pure
/// real or a pure imaginary value.
fn split_complex<'a>(text: &'a str, suffix: &str) -> Option<(&'a str, &'a str)> {
    let t = text.trim();
    let Some(body) = t.strip_suffix(suffix) else {
        return Some((t, "0"));
    };
    let bytes = body.as_bytes();
    let mut split = None;
    for idx in (1..bytes.len()).rev() {
        let c = bytes[idx];
        if (c == b'+' || c == b'-') && !matches!(bytes[idx - 1], b'e' | b'E' | b'/') {
            split = Some(idx);
            break;
        }
    }
    match split {
        Some(idx) => {
            let im = &body[idx..];
            let im = im.strip_prefix('+').unwrap_or(im);
            Some((&body[..idx], im))
        }
        None => Some(("0", body)),
    }
}

fn rational_nth_root(a: &Q, k: u32) -> Option<Q> {
    if Signed::is_negative(a) {
        if k.is_multiple_of(2) {
            return None;
        }
        return rational_nth_root(&-a.clone(), k).map(|r| -r);
    }
    let n = a.numer().nth_root(k);
    let d = a.denom().nth_root(k);
    let cand = BigRational::new(n, d);
    if num::pow(cand.clone(), k as usize) == *a {
        Some(cand)
    } else {
        None
    }
}

/// `round(x * scale) / scale` as an exact rational.
pub(crate) fn snap_to_denominator(x: f64, scale: &BigInt) -> Q {
    let s = scale.to_f64().unwrap_or(f64::MAX);
    let v = (x * s).round();
    let n = BigInt::from_f64(v).unwrap_or_else(BigInt::zero);
    BigRational::new(n, scale.clone())
}

impl Scalar for Q {
    const KIND: FieldKind = FieldKind::ExactRational;
    const EXACT: bool = true;
    const COMPLEX: bool = false;
    type Real = Q;
    type Complex = Qi;
    type Float = R64;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }
    fn from_real(r: Q) -> Self {
        r
    }
    fn from_c64(z: C64) -> Self {
        f64_to_q(z.re)
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn magnitude(&self) -> f64 {
        q_to_f64(self).abs()
    }
    fn conj(&self) -> Self {
        self.clone()
    }
    fn to_c64(&self) -> C64 {
        C64::new(q_to_f64(self), 0.0)
    }
    fn to_float(&self) -> R64 {
        q_to_f64(self)
    }
    fn to_complex(&self) -> Qi {
        Complex::new(self.clone(), <Q as Zero>::zero())
    }
    fn nth_root(&self, k: u32) -> Result<Self, RootError> {
        if Scalar::is_zero(self) {
            return Err(RootError::ZeroInput);
        }
        rational_nth_root(self, k).ok_or_else(|| RootError::NoRootInField {
            kind: Self::KIND,
            value: self.format(),
            k,
        })
    }
    fn denominator(&self) -> BigInt {
        self.denom().clone()
    }
    fn snap(z: C64, scale: &BigInt) -> Self {
        snap_to_denominator(z.re, scale)
    }
    fn round_to(&self, scale: &BigInt) -> Self {
        let s = BigRational::from_integer(scale.clone());
        (self * &s).round() / s
    }
    fn format(&self) -> String {
        self.to_string()
    }
    fn parse(text: &str) -> Result<Self, ScalarError> {
        parse_q(text).ok_or_else(|| ScalarError::Parse { kind: Self::KIND, text: text.to_string() })
    }
}

impl RealScalar for Q {
    fn from_f64(x: f64) -> Self {
        f64_to_q(x)
    }
    fn is_negative(&self) -> bool {
        Signed::is_negative(self)
    }
}

fn qi_lcm_denominator(z: &Qi) -> BigInt {
    z.re.denom().lcm(z.im.denom())
}

impl Scalar for Qi {
    const KIND: FieldKind = FieldKind::ExactGaussianRational;
    const EXACT: bool = true;
    const COMPLEX: bool = true;
    type Real = Q;
    type Complex = Qi;
    type Float = C64;

    fn zero() -> Self {
        Complex::new(<Q as Zero>::zero(), <Q as Zero>::zero())
    }
    fn one() -> Self {
        Complex::new(<Q as One>::one(), <Q as Zero>::zero())
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        Complex::new(<Q as Scalar>::from_ratio(num, den), <Q as Zero>::zero())
    }
    fn from_real(r: Q) -> Self {
        Complex::new(r, <Q as Zero>::zero())
    }
    fn from_c64(z: C64) -> Self {
        Complex::new(f64_to_q(z.re), f64_to_q(z.im))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.re) && Zero::is_zero(&self.im)
    }
    fn magnitude(&self) -> f64 {
        q_to_f64(&self.re).hypot(q_to_f64(&self.im))
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn to_c64(&self) -> C64 {
        C64::new(q_to_f64(&self.re), q_to_f64(&self.im))
    }
    fn to_float(&self) -> C64 {
        self.to_c64()
    }
    fn to_complex(&self) -> Qi {
        self.clone()
    }
    fn nth_root(&self, k: u32) -> Result<Self, RootError> {
        if Scalar::is_zero(self) {
            return Err(RootError::ZeroInput);
        }
        // Any root r of a = alpha/L (alpha Gaussian integer) has L*r
        // integral over Z[i], so it is a Gaussian integer: round and verify.
        let scale = qi_lcm_denominator(self);
        let principal = self.to_c64().powf(1.0 / k as f64);
        for j in 0..k {
            let w = principal * C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / k as f64);
            let cand = Complex::new(snap_to_denominator(w.re, &scale), snap_to_denominator(w.im, &scale));
            if Scalar::pow(&cand, k) == *self {
                return Ok(cand);
            }
        }
        Err(RootError::NoRootInField { kind: Self::KIND, value: self.format(), k })
    }
    fn denominator(&self) -> BigInt {
        qi_lcm_denominator(self)
    }
    fn snap(z: C64, scale: &BigInt) -> Self {
        Complex::new(snap_to_denominator(z.re, scale), snap_to_denominator(z.im, scale))
    }
    fn round_to(&self, scale: &BigInt) -> Self {
        Complex::new(self.re.round_to(scale), self.im.round_to(scale))
    }
    fn format(&self) -> String {
        if Signed::is_negative(&self.im) {
            format!("{}-{}*i", self.re, -self.im.clone())
        } else {
            format!("{}+{}*i", self.re, self.im)
        }
    }
    fn parse(text: &str) -> Result<Self, ScalarError> {
        let err = || ScalarError::Parse { kind: Self::KIND, text: text.to_string() };
        let suffix = if text.trim_end().ends_with("*i") { "*i" } else { "i" };
        let (re, im) = split_complex(text, suffix).ok_or_else(err)?;
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            other => other,
        };
        Ok(Complex::new(parse_q(re).ok_or_else(err)?, parse_q(im).ok_or_else(err)?))
    }
}

impl ComplexScalar for Qi {
    fn from_parts(re: Q, im: Q) -> Self {
        Complex::new(re, im)
    }
    fn re(&self) -> Q {
        self.re.clone()
    }
    fn im(&self) -> Q {
        self.im.clone()
    }
}

/// Decimal literal, or an exact `p/q` rounded to the nearest double.
fn parse_f64(text: &str, kind: FieldKind) -> Result<f64, ScalarError> {
    let v = f64::from_str(text.trim())
        .ok()
        .or_else(|| parse_q(text).map(|q| q_to_f64(&q)))
        .ok_or_else(|| ScalarError::Parse { kind, text: text.to_string() })?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ScalarError::NonFinite)
    }
}

impl Scalar for R64 {
    const KIND: FieldKind = FieldKind::FloatReal;
    const EXACT: bool = false;
    const COMPLEX: bool = false;
    type Real = R64;
    type Complex = C64;
    type Float = R64;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn from_real(r: f64) -> Self {
        r
    }
    fn from_c64(z: C64) -> Self {
        z.re
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn conj(&self) -> Self {
        *self
    }
    fn to_c64(&self) -> C64 {
        C64::new(*self, 0.0)
    }
    fn to_float(&self) -> R64 {
        *self
    }
    fn to_complex(&self) -> C64 {
        C64::new(*self, 0.0)
    }
    fn nth_root(&self, k: u32) -> Result<Self, RootError> {
        if *self == 0.0 {
            return Err(RootError::ZeroInput);
        }
        if *self > 0.0 {
            Ok(self.powf(1.0 / k as f64))
        } else if k % 2 == 1 {
            Ok(-(-self).powf(1.0 / k as f64))
        } else {
            Err(RootError::NoRootInField { kind: Self::KIND, value: self.format(), k })
        }
    }
    fn format(&self) -> String {
        format!("{self:?}")
    }
    fn parse(text: &str) -> Result<Self, ScalarError> {
        parse_f64(text, Self::KIND)
    }
}

impl RealScalar for R64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn is_negative(&self) -> bool {
        *self < 0.0
    }
}

impl Scalar for C64 {
    const KIND: FieldKind = FieldKind::FloatComplex;
    const EXACT: bool = false;
    const COMPLEX: bool = true;
    type Real = R64;
    type Complex = C64;
    type Float = C64;

    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn from_ratio(num: i64, den: i64) -> Self {
        C64::new(num as f64 / den as f64, 0.0)
    }
    fn from_real(r: f64) -> Self {
        C64::new(r, 0.0)
    }
    fn from_c64(z: C64) -> Self {
        z
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn to_c64(&self) -> C64 {
        *self
    }
    fn to_float(&self) -> C64 {
        *self
    }
    fn to_complex(&self) -> C64 {
        *self
    }
    fn nth_root(&self, k: u32) -> Result<Self, RootError> {
        if Scalar::is_zero(self) {
            return Err(RootError::ZeroInput);
        }
        if k == 1 {
            return Ok(*self);
        }
        let (r, theta) = self.to_polar();
        Ok(C64::from_polar(r.powf(1.0 / k as f64), theta / k as f64))
    }
    fn format(&self) -> String {
        if self.im.is_sign_negative() {
            format!("{:?}-{:?}i", self.re, -self.im)
        } else {
            format!("{:?}+{:?}i", self.re, self.im)
        }
    }
    fn parse(text: &str) -> Result<Self, ScalarError> {
        let err = || ScalarError::Parse { kind: Self::KIND, text: text.to_string() };
        let (re, im) = split_complex(text, "i").ok_or_else(err)?;
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            other => other,
        };
        Ok(C64::new(parse_f64(re, Self::KIND)?, parse_f64(im, Self::KIND)?))
    }
}

impl ComplexScalar for C64 {
    fn from_parts(re: f64, im: f64) -> Self {
        C64::new(re, im)
    }
    fn re(&self) -> f64 {
        self.re
    }
    fn im(&self) -> f64 {
        self.im
    }
}

/// A scalar whose kind is only known at run time (file input).
#[derive(Debug, Clone, PartialEq)]
pub enum AnyScalar {
    Q(Q),
    Qi(Qi),
    R64(R64),
    C64(C64),
}

impl AnyScalar {
    pub fn kind(&self) -> FieldKind {
        match self {
            AnyScalar::Q(_) => FieldKind::ExactRational,
            AnyScalar::Qi(_) => FieldKind::ExactGaussianRational,
            AnyScalar::R64(_) => FieldKind::FloatReal,
            AnyScalar::C64(_) => FieldKind::FloatComplex,
        }
    }

    pub fn parse(kind: FieldKind, text: &str) -> Result<Self, ScalarError> {
        Ok(match kind {
            FieldKind::ExactRational => AnyScalar::Q(Q::parse(text)?),
            FieldKind::ExactGaussianRational => AnyScalar::Qi(Qi::parse(text)?),
            FieldKind::FloatReal => AnyScalar::R64(R64::parse(text)?),
            FieldKind::FloatComplex => AnyScalar::C64(C64::parse(text)?),
        })
    }

    pub fn format(&self) -> String {
        match self {
            AnyScalar::Q(v) => v.format(),
            AnyScalar::Qi(v) => v.format(),
            AnyScalar::R64(v) => v.format(),
            AnyScalar::C64(v) => Scalar::format(v),
        }
    }

    pub fn approx_eq(&self, other: &Self, pol: &TolerancePolicy) -> Result<bool, ScalarError> {
        match (self, other) {
            (AnyScalar::Q(a), AnyScalar::Q(b)) => Ok(a.approx_eq(b, pol)),
            (AnyScalar::Qi(a), AnyScalar::Qi(b)) => Ok(a.approx_eq(b, pol)),
            (AnyScalar::R64(a), AnyScalar::R64(b)) => Ok(a.approx_eq(b, pol)),
            (AnyScalar::C64(a), AnyScalar::C64(b)) => Ok(Scalar::approx_eq(a, b, pol)),
            (a, b) => Err(ScalarError::KindMismatch(a.kind(), b.kind())),
        }
    }

    pub fn nth_root(&self, k: u32) -> Result<Self, RootError> {
        Ok(match self {
            AnyScalar::Q(v) => AnyScalar::Q(v.nth_root(k)?),
            AnyScalar::Qi(v) => AnyScalar::Qi(v.nth_root(k)?),
            AnyScalar::R64(v) => AnyScalar::R64(Scalar::nth_root(v, k)?),
            AnyScalar::C64(v) => AnyScalar::C64(Scalar::nth_root(v, k)?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Q {
        <Q as Scalar>::from_ratio(n, d)
    }

    #[test]
    fn exact_equality_is_structural() {
        let pol = TolerancePolicy::default();
        assert!(q(1, 2).approx_eq(&q(1, 2), &pol));
        assert!(Q::parse("1/2").unwrap().approx_eq(&Q::parse("2/4").unwrap(), &pol));
        assert_eq!(Q::parse("2/4").unwrap().format(), "1/2");
        assert_eq!(Q::parse("3/-6").unwrap().format(), "-1/2");
    }

    #[test]
    fn float_absolute_tolerance() {
        let pol = TolerancePolicy::new(0.0, 1e-9).unwrap();
        assert!(0.0f64.approx_eq(&1e-12, &pol));
        assert!(!0.0f64.approx_eq(&1e-6, &pol));
    }

    #[test]
    fn any_scalar_kind_mismatch() {
        let a = AnyScalar::parse(FieldKind::ExactRational, "1").unwrap();
        let b = AnyScalar::parse(FieldKind::FloatReal, "1.0").unwrap();
        assert_eq!(
            a.approx_eq(&b, &TolerancePolicy::default()),
            Err(ScalarError::KindMismatch(FieldKind::ExactRational, FieldKind::FloatReal))
        );
    }

    #[test]
    fn roots() {
        assert_eq!(q(8, 1).nth_root(3).unwrap(), q(2, 1));
        assert_eq!(q(-8, 27).nth_root(3).unwrap(), q(-2, 3));
        assert!(matches!(q(2, 1).nth_root(2), Err(RootError::NoRootInField { .. })));
        assert_eq!(q(0, 1).nth_root(2), Err(RootError::ZeroInput));
        let i = Scalar::nth_root(&C64::new(-1.0, 0.0), 2).unwrap();
        assert!(Scalar::approx_eq(&i, &C64::new(0.0, 1.0), &TolerancePolicy::default()));
        assert!(matches!(Scalar::nth_root(&-4.0f64, 2), Err(RootError::NoRootInField { .. })));
        assert_eq!(Scalar::nth_root(&-27.0f64, 3).unwrap(), -3.0);
    }

    #[test]
    fn gaussian_roots() {
        let z = Qi::parse("-1+0*i").unwrap();
        let r = z.nth_root(2).unwrap();
        assert_eq!(Scalar::pow(&r, 2), z);
        // (1+2i)^3 = -11-2i
        let c = Qi::parse("-11/8-2/8*i").unwrap();
        let r = c.nth_root(3).unwrap();
        assert_eq!(Scalar::pow(&r, 3), c);
        // x^3 = -8 has the root -2 even though the principal root is not in Q(i)
        let r = Qi::parse("-8").unwrap().nth_root(3).unwrap();
        assert_eq!(r, Qi::parse("-2").unwrap());
        assert!(Qi::parse("2").unwrap().nth_root(2).is_err());
    }

    #[test]
    fn string_formats() {
        assert_eq!(Qi::parse("1/2+3/4*i").unwrap().format(), "1/2+3/4*i");
        assert_eq!(Qi::parse("-1/2-3*i").unwrap(), Complex::new(q(-1, 2), q(-3, 1)));
        assert_eq!(Qi::parse("5").unwrap().format(), "5+0*i");
        assert_eq!(Qi::parse("1/2-i").unwrap(), Complex::new(q(1, 2), q(-1, 1)));
        assert_eq!(C64::parse("1.5-2e-3i").unwrap(), C64::new(1.5, -2e-3));
        assert_eq!(C64::parse("1e-5+2i").unwrap(), C64::new(1e-5, 2.0));
        assert_eq!(C64::parse("-i").unwrap(), C64::new(0.0, -1.0));
        assert_eq!(R64::parse("-3/4").unwrap(), -0.75);
        assert!(R64::parse("NaN").is_err());
        assert!(R64::parse("inf").is_err());
        let z = C64::new(0.1, -1.0 / 3.0);
        assert_eq!(C64::parse(&Scalar::format(&z)).unwrap(), z);
        assert!(Q::parse("1/0").is_err());
    }

    #[test]
    fn tolerance_policy_validation() {
        assert!(TolerancePolicy::new(-1.0, 0.0).is_err());
        assert!(TolerancePolicy::new(f64::NAN, 0.0).is_err());
        let d = TolerancePolicy::default();
        assert_eq!((d.rel_tol, d.abs_tol), (1e-9, 1e-12));
    }
}
