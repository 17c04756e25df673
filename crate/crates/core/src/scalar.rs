//! Real parameters in one of two backends: exact rationals or `f64`.
//!
//! Every system built from rational literals runs exact, which keeps
//! cylinder endpoints, dedup of sum digits and box counts free of
//! round-off. Mixing the two backends in one operation is an error; the
//! operator impls panic on it and the `try_*` methods report it.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when comparing floating values that should agree.
pub const FLOAT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Exact,
    Float,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::domain(format!(
                "unknown backend mode '{other}' (expected 'exact' or 'float')"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Scalar {
    pub fn exact(n: i64, d: i64) -> Self {
        Scalar::Exact(ratio(n, d))
    }

    pub fn int(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn float(x: f64) -> Self {
        Scalar::Float(x)
    }

    pub fn mode(&self) -> Mode {
        match self {
            Scalar::Exact(_) => Mode::Exact,
            Scalar::Float(_) => Mode::Float,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Scalar::Exact(q) => Some(q),
            Scalar::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(x) => *x,
        }
    }

    /// Converts to the requested backend. Float to exact is the exact
    /// binary value of the double.
    pub fn to_mode(&self, mode: Mode) -> Result<Scalar> {
        match (self, mode) {
            (Scalar::Exact(_), Mode::Exact) | (Scalar::Float(_), Mode::Float) => Ok(self.clone()),
            (Scalar::Exact(q), Mode::Float) => Ok(Scalar::Float(q.to_f64().unwrap_or(f64::NAN))),
            (Scalar::Float(x), Mode::Exact) => BigRational::from_float(*x)
                .map(Scalar::Exact)
                .ok_or_else(|| Error::Numeric(format!("{x} has no exact value"))),
        }
    }

    pub fn zero(mode: Mode) -> Self {
        match mode {
            Mode::Exact => Scalar::Exact(BigRational::zero()),
            Mode::Float => Scalar::Float(0.0),
        }
    }

    pub fn one(mode: Mode) -> Self {
        match mode {
            Mode::Exact => Scalar::Exact(BigRational::one()),
            Mode::Float => Scalar::Float(1.0),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Float(x) => *x == 0.0,
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_positive(),
            Scalar::Float(x) => *x > 0.0,
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Scalar::Exact(q) => q.is_negative(),
            Scalar::Float(x) => *x < 0.0,
        }
    }

    pub fn abs(&self) -> Self {
        match self {
            Scalar::Exact(q) => Scalar::Exact(q.abs()),
            Scalar::Float(x) => Scalar::Float(x.abs()),
        }
    }

    pub fn recip(&self) -> Self {
        match self {
            Scalar::Exact(q) => Scalar::Exact(q.recip()),
            Scalar::Float(x) => Scalar::Float(x.recip()),
        }
    }

    pub fn powi(&self, e: i32) -> Self {
        match self {
            Scalar::Exact(q) => Scalar::Exact(num::pow::Pow::pow(q, e)),
            Scalar::Float(x) => Scalar::Float(x.powi(e)),
        }
    }

    /// Natural logarithm, always floating.
    pub fn ln(&self) -> f64 {
        match self {
            Scalar::Exact(q) => ln_rational(q),
            Scalar::Float(x) => x.ln(),
        }
    }

    fn same_mode(&self, other: &Scalar, op: &str) -> Result<()> {
        if self.mode() == other.mode() {
            Ok(())
        } else {
            Err(Error::MixedMode(format!("{self} {op} {other}")))
        }
    }

    pub fn try_add(&self, other: &Scalar) -> Result<Scalar> {
        self.same_mode(other, "+")?;
        Ok(self + other)
    }

    pub fn try_sub(&self, other: &Scalar) -> Result<Scalar> {
        self.same_mode(other, "-")?;
        Ok(self - other)
    }

    pub fn try_mul(&self, other: &Scalar) -> Result<Scalar> {
        self.same_mode(other, "*")?;
        Ok(self * other)
    }

    pub fn try_div(&self, other: &Scalar) -> Result<Scalar> {
        self.same_mode(other, "/")?;
        if other.is_zero() {
            return Err(Error::domain("division by zero"));
        }
        Ok(self / other)
    }

    pub fn min(self, other: Scalar) -> Scalar {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Equality up to `FLOAT_TOL` (relative) in float mode, exact otherwise.
    pub fn approx_eq(&self, other: &Scalar) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                (a - b).abs() <= FLOAT_TOL * a.abs().max(b.abs()).max(1.0)
            }
        }
    }

    /// Parses a literal in the given backend.
    ///
    /// Accepted forms: integers, `p/q`, decimals and scientific notation.
    /// In float mode a trailing `pi` (as in `0.5pi` or `2/3*pi`) multiplies
    /// by π.
    pub fn parse(text: &str, mode: Mode) -> Result<Scalar> {
        let t = text.trim();
        if t.is_empty() {
            return Err(Error::domain("empty number"));
        }
        if let Some(head) = t.strip_suffix("pi") {
            if mode == Mode::Exact {
                return Err(Error::domain(format!(
                    "'{t}' is irrational and cannot be used in exact mode"
                )));
            }
            let head = head.trim().trim_end_matches('*').trim();
            let factor = if head.is_empty() {
                1.0
            } else if head == "-" {
                -1.0
            } else {
                parse_rational(head)?.to_f64().unwrap_or(f64::NAN)
            };
            return Ok(Scalar::Float(factor * std::f64::consts::PI));
        }
        let q = parse_rational(t)?;
        Ok(match mode {
            Mode::Exact => Scalar::Exact(q),
            Mode::Float => Scalar::Float(q.to_f64().unwrap_or(f64::NAN)),
        })
    }
}

/// Parses `p/q`, integers, decimals and scientific notation into an exact
/// rational.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let bad = || Error::domain(format!("cannot parse '{text}' as a number"));
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return Err(Error::domain(format!("zero denominator in '{text}'")));
        }
        return Ok(n / d);
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let n: BigInt = all.parse().map_err(|_| bad())?;
    let ten = BigRational::from_integer(BigInt::from(10));
    let scale = exponent - frac_part.len() as i32;
    let mut q = BigRational::from_integer(n) * num::pow::Pow::pow(&ten, scale);
    if neg {
        q = -q;
    }
    Ok(q)
}

/// Natural log of a positive rational, accurate for huge numerators and
/// denominators.
pub fn ln_rational(q: &BigRational) -> f64 {
    if !q.is_positive() {
        return f64::NAN;
    }
    ln_bigint(q.numer()) - ln_bigint(q.denom())
}

pub fn ln_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        if let Some(x) = n.to_f64() {
            return x.ln();
        }
    }
    let shift = bits - 64;
    let top: BigInt = n >> shift;
    top.to_f64().unwrap_or(f64::NAN).ln() + shift as f64 * std::f64::consts::LN_2
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.partial_cmp(b),
            (Scalar::Float(a), Scalar::Float(b)) => a.partial_cmp(b),
            _ => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) => write!(f, "{q}"),
            Scalar::Float(x) => write!(f, "{x}"),
        }
    }
}

/// Exact values serialise as `"p/q"` strings, floats as numbers.
impl Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(q) => s.serialize_str(&q.to_string()),
            Scalar::Float(x) => s.serialize_f64(*x),
        }
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $sym:tt) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;

            fn $method(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $sym b),
                    (Scalar::Float(a), Scalar::Float(b)) => Scalar::Float(a $sym b),
                    (a, b) => panic!(
                        "mixed exact/float arithmetic: {a} {} {b}",
                        stringify!($sym)
                    ),
                }
            }
        }

        impl $trait<Scalar> for Scalar {
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
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl Neg for Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(-q),
            Scalar::Float(x) => Scalar::Float(-x),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;

    fn neg(self) -> Scalar {
        -(self.clone())
    }
}
