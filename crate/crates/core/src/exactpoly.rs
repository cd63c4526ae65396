//! Exact rational polynomials and the class of functions `P(s)·σ(s)^{k/2}`.
//!
//! Every ladder identity in this crate is an equality between elements of this
//! class, so all of them can be checked with no rounding at all. Floats only
//! appear at evaluation time, where a double-double Horner scheme keeps the
//! result accurate even for badly conditioned high-degree polynomials.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, SerializeStruct, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact scalar: arbitrary-precision numerator over positive denominator, always reduced.
pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Correctly rounded conversion to `f64`.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact conversion of a finite float.
pub fn from_f64(x: f64) -> Option<Rational> {
    Rational::from_float(x)
}

/// `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Parse `"p/q"`, `"p"`, or a plain decimal such as `"-0.25"` / `"1.5e-3"`, exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let t = text.trim();
    if t.is_empty() {
        return Err(Error::parse("rational", "empty string"));
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::parse("rational", format!("bad numerator in {t:?}")))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::parse("rational", format!("bad denominator in {t:?}")))?;
        if q.is_zero() {
            return Err(Error::parse("rational", format!("zero denominator in {t:?}")));
        }
        return Ok(Rational::new(p, q));
    }
    parse_decimal(t).ok_or_else(|| Error::parse("rational", format!("cannot parse {t:?}")))
}

fn parse_decimal(t: &str) -> Option<Rational> {
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let mut value = Rational::from_integer(all);
    let shift = exp - frac_part.len() as i32;
    let ten = int(10);
    if shift >= 0 {
        value *= num_traits::pow(ten, shift as usize);
    } else {
        value /= num_traits::pow(ten, (-shift) as usize);
    }
    Some(if neg { -value } else { value })
}

// ---------------------------------------------------------------------------
// Polynomial
// ---------------------------------------------------------------------------

/// Univariate polynomial with exact rational coefficients, degree-ascending.
///
/// The zero polynomial has an empty coefficient list; otherwise the last
/// coefficient is nonzero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Polynomial {
    coeffs: Vec<Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    /// The identity polynomial `s`.
    pub fn s() -> Self {
        Self::new(vec![Rational::zero(), Rational::one()])
    }

    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// Convenience constructor from integer pairs `(num, den)`, degree-ascending.
    pub fn from_ratios(pairs: &[(i64, i64)]) -> Self {
        Self::new(pairs.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    pub fn from_ints(values: &[i64]) -> Self {
        Self::new(values.iter().map(|&n| int(n)).collect())
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of `s^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> Rational {
        self.coeffs.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * int(i as i64))
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Exact Horner evaluation.
    pub fn eval(&self, s: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * s + c)
    }

    /// Plain `f64` Horner; fine for the low-degree σ and τ.
    pub fn eval_f64(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * s + to_f64(c))
    }

    pub fn to_float(&self) -> FloatPoly {
        FloatPoly::from_poly(self)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = i == 0 || !mag.is_one();
            if show_coeff {
                if mag.is_integer() || i == 0 {
                    write!(f, "{mag}")?;
                } else {
                    write!(f, "({mag})")?;
                }
            }
            match i {
                0 => {}
                1 => write!(f, "s")?,
                _ => write!(f, "s^{i}")?,
            }
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        Polynomial::new((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: Polynomial) -> Polynomial { (&self).$m(&rhs) }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $m(self, rhs: &Polynomial) -> Polynomial { (&self).$m(rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(&format_rational(c))?;
        }
        seq.end()
    }
}

/// Accepts strings (`"1/3"`) or plain JSON numbers in each slot.
#[derive(Deserialize)]
#[serde(untagged)]
enum ScalarRepr {
    Text(String),
    Number(serde_json::Number),
}

impl ScalarRepr {
    fn to_rational(&self) -> Result<Rational> {
        match self {
            ScalarRepr::Text(t) => parse_rational(t),
            ScalarRepr::Number(n) => parse_rational(&n.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Polynomial {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct PolyVisitor;
        impl<'de> Visitor<'de> for PolyVisitor {
            type Value = Polynomial;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a degree-ascending array of rationals")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<Polynomial, A::Error> {
                let mut coeffs = Vec::new();
                while let Some(item) = seq.next_element::<ScalarRepr>()? {
                    coeffs.push(item.to_rational().map_err(de::Error::custom)?);
                }
                Ok(Polynomial::new(coeffs))
            }
        }
        deserializer.deserialize_seq(PolyVisitor)
    }
}

/// Parse a rational from either a JSON string or a JSON number.
pub fn rational_from_json(value: &serde_json::Value) -> Result<Rational> {
    match value {
        serde_json::Value::String(s) => parse_rational(s),
        serde_json::Value::Number(n) => parse_rational(&n.to_string()),
        other => Err(Error::parse("rational", format!("expected string or number, got {other}"))),
    }
}

// ---------------------------------------------------------------------------
// Double-double evaluation
// ---------------------------------------------------------------------------

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Polynomial with coefficients stored as unevaluated sums `hi + lo` of two
/// doubles, evaluated by double-double Horner. Relative error is about
/// `1e-16 + cond · 1e-32`.
#[derive(Clone, Debug)]
pub struct FloatPoly {
    hi: Vec<f64>,
    lo: Vec<f64>,
}

impl FloatPoly {
    pub fn from_poly(p: &Polynomial) -> Self {
        let mut hi = Vec::with_capacity(p.coeffs.len());
        let mut lo = Vec::with_capacity(p.coeffs.len());
        for c in &p.coeffs {
            let h = to_f64(c);
            let rest = match Rational::from_float(h) {
                Some(hr) => to_f64(&(c - hr)),
                None => 0.0,
            };
            hi.push(h);
            lo.push(rest);
        }
        Self { hi, lo }
    }

    pub fn degree(&self) -> Option<usize> {
        self.hi.len().checked_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (mut ah, mut al) = (0.0f64, 0.0f64);
        for i in (0..self.hi.len()).rev() {
            // (ah, al) * x
            let (ph, pl) = two_prod(ah, x);
            let (ph, pl) = quick_two_sum(ph, pl + al * x);
            // + (hi, lo)
            let (sh, sl) = two_sum(ph, self.hi[i]);
            let (h, l) = quick_two_sum(sh, sl + pl + self.lo[i]);
            ah = h;
            al = l;
        }
        ah + al
    }
}

// ---------------------------------------------------------------------------
// Half-power functions
// ---------------------------------------------------------------------------

/// The function `P(s)·σ(s)^{k/2}` for a fixed σ.
///
/// No σ factors are ever divided out of `poly`; equality cross-multiplies.
#[derive(Clone, Debug)]
pub struct HalfPowerFunction {
    pub poly: Polynomial,
    pub halfpower: u32,
    pub sigma: Polynomial,
}

impl HalfPowerFunction {
    pub fn new(poly: Polynomial, halfpower: u32, sigma: Polynomial) -> Self {
        Self {
            poly,
            halfpower,
            sigma,
        }
    }

    pub fn zero(halfpower: u32, sigma: Polynomial) -> Self {
        Self::new(Polynomial::zero(), halfpower, sigma)
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.poly.scale(c), self.halfpower, self.sigma.clone())
    }

    fn check_sigma(&self, other: &Self) -> Result<()> {
        if self.sigma != other.sigma {
            return Err(Error::SigmaMismatch);
        }
        Ok(())
    }

    /// The same function written with a smaller half power `k` of the same
    /// parity: `P·σ^{j/2} = (P·σ^{(j−k)/2})·σ^{k/2}`.
    pub fn express_at(&self, k: u32) -> Result<Self> {
        if k > self.halfpower || !(self.halfpower - k).is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "cannot rewrite half power {} as {k}",
                self.halfpower
            )));
        }
        let factor = self.sigma.pow((self.halfpower - k) / 2);
        Ok(Self::new(&self.poly * &factor, k, self.sigma.clone()))
    }

    /// Equality of the represented functions.
    pub fn hp_equal(&self, other: &Self) -> Result<bool> {
        self.check_sigma(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(self.is_zero() && other.is_zero());
        }
        if self.halfpower % 2 != other.halfpower % 2 {
            return Ok(false);
        }
        let k = self.halfpower.min(other.halfpower);
        Ok(self.express_at(k)?.poly == other.express_at(k)?.poly)
    }

    /// Sum, expressed at the smaller half power. Zero terms adopt any parity.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_sigma(other)?;
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if self.halfpower % 2 != other.halfpower % 2 {
            return Err(Error::Domain(
                "cannot add half-power functions of opposite parity".into(),
            ));
        }
        let (lo, hi) = if self.halfpower <= other.halfpower {
            (self, other)
        } else {
            (other, self)
        };
        // Bring the higher power down by multiplying its σ excess into the polynomial.
        let excess = self.sigma.pow((hi.halfpower - lo.halfpower) / 2);
        Ok(Self::new(
            &lo.poly + &(&hi.poly * &excess),
            lo.halfpower,
            self.sigma.clone(),
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&int(-1)))
    }

    pub fn eval_f64(&self, s: f64) -> f64 {
        let p = self.poly.to_float().eval(s);
        p * self.sigma.eval_f64(s).powf(f64::from(self.halfpower) / 2.0)
    }
}

impl Serialize for HalfPowerFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("HalfPowerFunction", 2)?;
        st.serialize_field("poly", &self.poly)?;
        st.serialize_field("halfpower", &self.halfpower)?;
        st.end()
    }
}
