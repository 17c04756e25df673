//! Algebraic resonance: rational relations between logarithms of
//! contraction ratios.
//!
//! From floating input irrationality cannot be decided. A negative answer
//! here always means "no relation `q·log x = p·log y` with
//! `max(|p|, q) ≤ q_max` holds to within `tol`". Exact rational input is
//! decided without logarithms, by a Euclid-style search for a common
//! rational base.

use std::fmt;

use num::bigint::BigInt;
use num::integer::Integer;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::Ifs1d;
use crate::scalar::Scalar;

/// `q·log x = p·log y`, i.e. `log x / log y = p / q` with `q > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub p: i64,
    pub q: i64,
}

impl Witness {
    pub fn transposed(self) -> Witness {
        // log y / log x = q / p; keep the second entry positive.
        if self.p < 0 {
            Witness {
                p: -self.q,
                q: -self.p,
            }
        } else {
            Witness {
                p: self.q,
                q: self.p,
            }
        }
    }
}

/// Witness for one cross pair `(j, j')` of contraction ratios (zero-based).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairWitness {
    pub left: usize,
    pub right: usize,
    pub witness: Witness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceVerdict {
    pub resonant: bool,
    /// One entry per cross pair that has a relation; all pairs when resonant.
    pub witnesses: Vec<PairWitness>,
    /// Generator `α` of a lattice `αℕ` containing every `|log r|`.
    pub lattice: Option<f64>,
    /// Common base `c` with every ratio a power of `c`, exact input only.
    pub exact_base: Option<String>,
    pub q_max: i64,
    pub tolerance: f64,
    /// Whether the verdict was decided by exact arithmetic.
    pub exact: bool,
}

impl ResonanceVerdict {
    pub fn transposed(&self) -> ResonanceVerdict {
        let mut w: Vec<PairWitness> = self
            .witnesses
            .iter()
            .map(|pw| PairWitness {
                left: pw.right,
                right: pw.left,
                witness: pw.witness.transposed(),
            })
            .collect();
        w.sort_by_key(|pw| (pw.left, pw.right));
        ResonanceVerdict {
            witnesses: w,
            ..self.clone()
        }
    }
}

impl fmt::Display for ResonanceVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "resonant: {}", self.resonant)?;
        writeln!(f, "decided_exactly: {}", self.exact)?;
        if !self.exact {
            writeln!(
                f,
                "semantics: relations searched with max(|p|,q) <= {} at tolerance {:e}",
                self.q_max, self.tolerance
            )?;
        }
        if let Some(b) = &self.exact_base {
            writeln!(f, "common_base: {b}")?;
        }
        match self.lattice {
            Some(a) => writeln!(f, "lattice_alpha: {a:.15}")?,
            None => writeln!(f, "lattice_alpha: none")?,
        }
        for pw in &self.witnesses {
            writeln!(
                f,
                "witness: r{} ~ r'{}: {}*log|r| = {}*log|r'|",
                pw.left + 1,
                pw.right + 1,
                pw.witness.q,
                pw.witness.p
            )?;
        }
        Ok(())
    }
}

fn height(q: &BigRational) -> BigInt {
    q.numer().abs().max(q.denom().abs())
}

/// For rationals `x, y > 1`, finds `(q, p)` with `x^q = y^p` and the common
/// base `c` (`x = c^a`, `y = c^b`), or `None` if they are multiplicatively
/// independent.
///
/// Each division step strictly lowers the larger height while the pair is
/// dependent, so a step that fails to do so proves independence.
fn exact_relation(x: &BigRational, y: &BigRational) -> Option<(BigRational, Witness)> {
    // log X = u1 log x + v1 log y, log Y = u2 log x + v2 log y.
    let (mut big, mut small) = (x.clone(), y.clone());
    let (mut ub, mut vb, mut us, mut vs) = (1i64, 0i64, 0i64, 1i64);
    loop {
        if big == small {
            let q = ub - us;
            let p = vs - vb;
            let (p, q) = if q < 0 { (-p, -q) } else { (p, q) };
            let g = p.gcd(&q);
            if q == 0 {
                return None;
            }
            return Some((big, Witness { p: p / g, q: q / g }));
        }
        if big < small {
            std::mem::swap(&mut big, &mut small);
            std::mem::swap(&mut ub, &mut us);
            std::mem::swap(&mut vb, &mut vs);
        }
        let before = height(&big);
        let next = &big / &small;
        if height(&next).max(height(&small)) >= before {
            return None;
        }
        big = next;
        ub -= us;
        vb -= vs;
    }
}

/// Maps a positive rational other than one into `(1, ∞)`, returning whether
/// it was inverted.
fn above_one(x: &BigRational) -> Result<(BigRational, bool)> {
    if !x.is_positive() || x.is_one() {
        return Err(Error::domain(format!(
            "{x} must be positive and different from 1"
        )));
    }
    Ok(if x > &BigRational::one() {
        (x.clone(), false)
    } else {
        (x.recip(), true)
    })
}

fn exact_pair(x: &BigRational, y: &BigRational) -> Result<Option<Witness>> {
    let (xx, fx) = above_one(x)?;
    let (yy, fy) = above_one(y)?;
    Ok(exact_relation(&xx, &yy).map(|(_, w)| {
        if fx != fy {
            Witness { p: -w.p, q: w.q }
        } else {
            w
        }
    }))
}

/// Continued-fraction convergents `p/q` of an exact rational.
fn convergents(x: &BigRational) -> impl Iterator<Item = (BigInt, BigInt)> {
    let mut rem = Some(x.clone());
    let (mut p0, mut q0) = (BigInt::one(), BigInt::zero());
    let (mut p1, mut q1) = (BigInt::zero(), BigInt::one());
    std::iter::from_fn(move || {
        let r = rem.take()?;
        let a = r.floor().to_integer();
        let frac = &r - BigRational::from_integer(a.clone());
        let p = &a * &p0 + &p1;
        let q = &a * &q0 + &q1;
        p1 = std::mem::replace(&mut p0, p.clone());
        q1 = std::mem::replace(&mut q0, q.clone());
        if !frac.is_zero() {
            rem = Some(frac.recip());
        }
        Some((p, q))
    })
}

/// Smallest convergent `p/q` of `a/b` with `max(|p|, q) ≤ q_max` and
/// `|q·a − p·b| ≤ tol`. Residuals are evaluated exactly on the binary
/// values of `a` and `b`.
pub fn float_relation(a: f64, b: f64, q_max: i64, tol: f64) -> Option<Witness> {
    if !(a.is_finite() && b.is_finite()) || b == 0.0 {
        return None;
    }
    let aq = BigRational::from_float(a)?;
    let bq = BigRational::from_float(b)?;
    let limit = BigInt::from(q_max);
    for (p, q) in convergents(&(&aq / &bq)) {
        if q > limit || p.abs() > limit {
            break;
        }
        if q.is_zero() {
            continue;
        }
        let pr = BigRational::from_integer(p.clone());
        let qr = BigRational::from_integer(q.clone());
        let residual = (&qr * &aq - &pr * &bq)
            .abs()
            .to_f64()
            .unwrap_or(f64::INFINITY);
        if residual <= tol {
            return Some(Witness {
                p: p.to_i64()?,
                q: q.to_i64()?,
            });
        }
    }
    None
}

/// Finds `(p, q)` with `q·log x = p·log y` and `max(|p|, q) ≤ q_max`.
///
/// Exact rational inputs are decided exactly (no logarithms); otherwise the
/// continued-fraction convergents of `log x / log y` are scanned.
pub fn is_rational_ratio(x: &Scalar, y: &Scalar, q_max: i64, tol: f64) -> Result<Option<Witness>> {
    if q_max < 1 {
        return Err(Error::domain(format!(
            "q_max must be at least 1, got {q_max}"
        )));
    }
    for v in [x, y] {
        let f = v.to_f64();
        if !(f > 0.0) || v.approx_eq(&Scalar::one(v.mode())) {
            return Err(Error::domain(format!(
                "{v} must be positive and different from 1"
            )));
        }
    }
    if let (Some(xq), Some(yq)) = (x.as_exact(), y.as_exact()) {
        let w = exact_pair(xq, yq)?;
        return Ok(w.filter(|w| w.q <= q_max && w.p.abs() <= q_max));
    }
    Ok(float_relation(x.ln(), y.ln(), q_max, tol))
}

/// Largest `α` such that every entry is within `tol` of `n·α` for some
/// integer `1 ≤ n ≤ q_max`, found by Euclid-style reduction on pairs.
pub fn arithmetic_lattice(logs: &[f64], tol: f64, q_max: i64) -> Result<Option<f64>> {
    if logs.is_empty() {
        return Err(Error::domain("arithmetic lattice of an empty set"));
    }
    if logs.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::domain("lattice entries must be positive"));
    }
    // Sorted so the refinement does not depend on input order.
    let mut sorted = logs.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut alpha = sorted[0];
    for &x in &sorted[1..] {
        let Some(w) = float_relation(x, alpha, q_max, tol) else {
            return Ok(None);
        };
        // x ≈ p·λ and α ≈ q·λ with gcd(p, q) = 1.
        let (p, q) = (w.p as f64, w.q as f64);
        alpha = (q * alpha + p * x) / (q * q + p * p);
    }
    for &x in logs {
        let n = (x / alpha).round();
        if n < 1.0 || n > q_max as f64 || (x - n * alpha).abs() > tol.max(4.0 * f64::EPSILON * x) {
            return Ok(None);
        }
    }
    Ok(Some(alpha))
}

/// Common rational base `c > 1` with every `|r|` a power of `c`, or `None`.
pub fn exact_common_base(ratios: &[BigRational]) -> Result<Option<BigRational>> {
    let mut base: Option<BigRational> = None;
    for r in ratios {
        let (x, _) = above_one(&r.abs())?;
        base = match base {
            None => Some(x),
            Some(b) => match exact_relation(&b, &x) {
                Some((c, _)) => Some(c),
                None => return Ok(None),
            },
        };
    }
    Ok(base)
}

/// Decides algebraic resonance of two systems.
pub fn check_pair(left: &Ifs1d, right: &Ifs1d, q_max: i64, tol: f64) -> Result<ResonanceVerdict> {
    let lr: Vec<Scalar> = left.ratios().iter().map(Scalar::abs).collect();
    let rr: Vec<Scalar> = right.ratios().iter().map(Scalar::abs).collect();
    let mut witnesses = Vec::new();
    let mut all = true;
    for (j, x) in lr.iter().enumerate() {
        for (k, y) in rr.iter().enumerate() {
            match is_rational_ratio(x, y, q_max, tol)? {
                Some(w) => witnesses.push(PairWitness {
                    left: j,
                    right: k,
                    witness: w,
                }),
                None => all = false,
            }
        }
    }
    let exact = lr.iter().chain(&rr).all(Scalar::is_exact);
    let (lattice, exact_base) = if exact {
        let qs: Vec<BigRational> = lr
            .iter()
            .chain(&rr)
            .map(|s| s.as_exact().expect("exact").clone())
            .collect();
        match exact_common_base(&qs)? {
            Some(c) => (Some(crate::scalar::ln_rational(&c)), Some(c.to_string())),
            None => (None, None),
        }
    } else {
        let logs: Vec<f64> = lr.iter().chain(&rr).map(|s| -s.ln()).collect();
        (arithmetic_lattice(&logs, tol, q_max)?, None)
    };
    Ok(ResonanceVerdict {
        resonant: all,
        witnesses,
        lattice,
        exact_base,
        q_max,
        tolerance: tol,
        exact,
    })
}
