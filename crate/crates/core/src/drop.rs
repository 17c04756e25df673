//! Dimension drop for algebraically resonant pairs: the digit-collision
//! bound in the homogeneous case and the essential-pair covering bound in
//! general.

use num::integer::Integer;
use num::{BigRational, One, Signed, ToPrimitive};
use serde::Serialize;

use crate::boxdim::{
    estimate_dimension, sum_series, BoxCountSeries, DimensionEstimate, ScaleWindow,
};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::ifs::{compose_word, solve_similarity_dimension, Ifs1d, Similitude1d, Word};
use crate::resonance::{arithmetic_lattice, exact_common_base};
use crate::scalar::{Mode, Scalar};

/// `(t_n − t_1) / (t'_n − t'_1)` for digit sets spanning a positive range.
pub fn resonant_scale(t: &[Scalar], t2: &[Scalar]) -> Result<Scalar> {
    let span = |d: &[Scalar], name: &str| -> Result<Scalar> {
        let lo = d.iter().cloned().reduce(Scalar::min);
        let hi = d.iter().cloned().reduce(Scalar::max);
        match (lo, hi) {
            (Some(lo), Some(hi)) if hi > lo => Ok(hi - lo),
            _ => Err(Error::domain(format!(
                "{name} needs two distinct translations"
            ))),
        }
    };
    Ok(span(t, "first digit set")? / span(t2, "second digit set")?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DigitSumReport {
    pub d: Vec<Scalar>,
    pub d2: Vec<Scalar>,
    pub s: Scalar,
    /// `|D + sD'|`.
    pub sum_size: usize,
    /// `log |D + sD'| / log(1/ξ)`.
    pub bound: f64,
}

fn dedup_sorted(mut v: Vec<Scalar>) -> Vec<Scalar> {
    v.sort_by(|a, b| a.partial_cmp(b).expect("same backend"));
    v.dedup_by(|a, b| a.approx_eq(b));
    v
}

/// Counts `D + sD'`; exact values are deduplicated exactly, floats up to
/// relative `1e-12`.
pub fn digit_collision(
    d: &[Scalar],
    d2: &[Scalar],
    s: &Scalar,
    xi: &Scalar,
) -> Result<DigitSumReport> {
    let x = xi.to_f64();
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain(format!("base ξ = {xi} must lie in (0, 1)")));
    }
    let (d, d2) = (dedup_sorted(d.to_vec()), dedup_sorted(d2.to_vec()));
    if d.is_empty() || d2.is_empty() {
        return Err(Error::domain("empty digit set"));
    }
    let sums: Vec<Scalar> = d
        .iter()
        .flat_map(|a| d2.iter().map(move |b| a.try_add(&s.try_mul(b)?)))
        .collect::<Result<_>>()?;
    let sum_size = dedup_sorted(sums).len();
    if d.len() >= 2 && d2.len() >= 2 && resonant_scale(&d, &d2)?.approx_eq(s) {
        assert!(
            sum_size < d.len() * d2.len(),
            "the resonant scale must produce a collision"
        );
    }
    Ok(DigitSumReport {
        bound: (sum_size as f64).ln() / -x.ln(),
        d,
        d2,
        s: s.clone(),
        sum_size,
    })
}

/// Smallest `M0` such that every multiple of `unit` at or above `M0` is a
/// nonempty nonnegative combination of `steps`; `unit` must be a multiple
/// of the steps' gcd.
fn threshold_for(steps: &[u64], unit: u64) -> u64 {
    let amax = *steps.iter().max().expect("nonempty");
    // Every multiple of the gcd beyond amax² is representable.
    let limit = (amax * amax + 2 * unit) as usize;
    let mut rep = vec![false; limit + 1];
    rep[0] = true;
    for m in 1..=limit {
        rep[m] = steps
            .iter()
            .any(|&s| s as usize <= m && rep[m - s as usize]);
    }
    let last_gap = (1..=limit / unit as usize)
        .map(|j| j * unit as usize)
        .filter(|&m| !rep[m])
        .max()
        .unwrap_or(0);
    last_gap as u64 + unit
}

/// `(gcd, M0)`: every multiple of the gcd at or above `M0` is a sum of steps.
pub fn representation_threshold(steps: &[u64]) -> Result<(u64, u64)> {
    if steps.is_empty() || steps.contains(&0) {
        return Err(Error::domain(
            "steps must be a nonempty list of positive integers",
        ));
    }
    let g = steps.iter().fold(0u64, |g, &s| g.gcd(&s));
    Ok((g, threshold_for(steps, g)))
}

/// Probability that the renewal walk with the given steps lands on `target`.
pub fn hit_probability(target: u64, steps: &[u64], probs: &[Scalar]) -> Result<Scalar> {
    if steps.len() != probs.len() || steps.is_empty() {
        return Err(Error::domain("steps and probabilities must pair up"));
    }
    let mode = probs[0].mode();
    let total = probs
        .iter()
        .try_fold(Scalar::zero(mode), |a, p| a.try_add(p))?;
    if (total.to_f64() - 1.0).abs() > 1e-12
        || (mode == Mode::Exact && !total.approx_eq(&Scalar::one(mode)))
    {
        return Err(Error::domain(format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    let n = target as usize;
    let mut h = vec![Scalar::zero(mode); n + 1];
    h[0] = Scalar::one(mode);
    for m in 1..=n {
        let mut acc = Scalar::zero(mode);
        for (&s, p) in steps.iter().zip(probs) {
            if s as usize <= m {
                acc = acc + p * &h[m - s as usize];
            }
        }
        h[m] = acc;
    }
    Ok(h.swap_remove(n))
}

/// Maps of one exponent after normalisation, grouped.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepClass {
    pub exponent: u64,
    /// Number of maps with this exponent.
    pub count: f64,
    /// Total natural-measure weight `count · ξ^{β e}`.
    pub weight: f64,
}

/// Constants of the essential-pair argument for `r_i = ξ^{a_i}`,
/// `r'_i = ξ^{b_i}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropInstance {
    pub xi: Scalar,
    pub a_exponents: Vec<u64>,
    pub b_exponents: Vec<u64>,
    pub t: Vec<Scalar>,
    pub t2: Vec<Scalar>,
    pub beta: f64,
    pub beta2: f64,
    /// Exponent classes after making the first two maps of each side share
    /// the exponent `ℓ`.
    pub a_steps: Vec<StepClass>,
    pub b_steps: Vec<StepClass>,
    pub a: u64,
    pub b: u64,
    pub a_max: u64,
    pub b_max: u64,
    pub m0: u64,
    pub m: u64,
    pub ell: u64,
    pub p_left: Vec<f64>,
    pub p_right: Vec<f64>,
    pub p: f64,
    pub q: f64,
}

const MAX_NORMALIZED_DEGREE: u64 = 1 << 20;

/// Replaces maps 1 and 2 by `{f_i f_u : |u| = len_i}`, symbolically: the
/// exponent distribution of `u` is the `len`-th power of the generating
/// polynomial.
fn normalize(exps: &[u64], probs: &[f64], lens: [u64; 2]) -> Result<Vec<StepClass>> {
    let amax = *exps.iter().max().expect("nonempty");
    let mut classes: Vec<(u64, f64, f64)> = Vec::new();
    for i in 0..2 {
        let len = lens[i];
        if len * amax > MAX_NORMALIZED_DEGREE {
            return Err(Error::resource(
                format!("exponent polynomial of degree {}", len * amax),
                "max_cells",
                MAX_NORMALIZED_DEGREE,
            ));
        }
        // (count, weight) per exponent sum.
        let mut poly = vec![(1.0f64, 1.0f64)];
        for _ in 0..len {
            let mut next = vec![(0.0, 0.0); poly.len() + amax as usize];
            for (e, &(c, w)) in poly.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                for (&a, &p) in exps.iter().zip(probs) {
                    let slot = &mut next[e + a as usize];
                    slot.0 += c;
                    slot.1 += w * p;
                }
            }
            poly = next;
        }
        for (e, &(c, w)) in poly.iter().enumerate() {
            if c > 0.0 {
                classes.push((exps[i] + e as u64, c, probs[i] * w));
            }
        }
    }
    for (&a, &p) in exps.iter().zip(probs).skip(2) {
        classes.push((a, 1.0, p));
    }
    classes.sort_by_key(|c| c.0);
    let mut out: Vec<StepClass> = Vec::new();
    for (e, c, w) in classes {
        match out.last_mut() {
            Some(last) if last.exponent == e => {
                last.count += c;
                last.weight += w;
            }
            _ => out.push(StepClass {
                exponent: e,
                count: c,
                weight: w,
            }),
        }
    }
    Ok(out)
}

fn side_probabilities(steps: &[StepClass], unit: u64, top: u64, m: u64) -> Result<Vec<f64>> {
    let es: Vec<u64> = steps.iter().map(|c| c.exponent).collect();
    let ws: Vec<Scalar> = steps.iter().map(|c| Scalar::float(c.weight)).collect();
    (0..top / unit)
        .map(|i| Ok(hit_probability(m - i * unit, &es, &ws)?.to_f64()))
        .collect()
}

impl DropInstance {
    /// Builds the instance for `r_i = ξ^{a_i}`, `r'_i = ξ^{b_i}` with the
    /// given translations (used only to build the systems and choose `s`).
    pub fn new(
        xi: Scalar,
        a_exps: &[u64],
        b_exps: &[u64],
        t: Vec<Scalar>,
        t2: Vec<Scalar>,
    ) -> Result<DropInstance> {
        let x = xi.to_f64();
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::domain(format!("base ξ = {xi} must lie in (0, 1)")));
        }
        for (exps, tr, name) in [(a_exps, &t, "first"), (b_exps, &t2, "second")] {
            if exps.len() < 2 {
                return Err(Error::domain(format!(
                    "{name} system needs at least two maps"
                )));
            }
            if exps.contains(&0) {
                return Err(Error::domain(format!("{name} system has a zero exponent")));
            }
            if tr.len() != exps.len() {
                return Err(Error::domain(format!(
                    "{name} system: {} translations for {} maps",
                    tr.len(),
                    exps.len()
                )));
            }
        }
        let ratios = |e: &[u64]| e.iter().map(|&a| x.powi(a as i32)).collect::<Vec<_>>();
        let beta = solve_similarity_dimension(&ratios(a_exps));
        let beta2 = solve_similarity_dimension(&ratios(b_exps));
        let pa: Vec<f64> = a_exps.iter().map(|&a| x.powf(beta * a as f64)).collect();
        let pb: Vec<f64> = b_exps.iter().map(|&b| x.powf(beta2 * b as f64)).collect();
        let (a1, a2, b1, b2) = (a_exps[0], a_exps[1], b_exps[0], b_exps[1]);
        let ell = a1 * a2 * b1 * b2;
        let a_steps = normalize(a_exps, &pa, [a2 * b1 * b2 - 1, a1 * b1 * b2 - 1])?;
        let b_steps = normalize(b_exps, &pb, [b2 * a1 * a2 - 1, b1 * a1 * a2 - 1])?;
        let exps = |c: &[StepClass]| c.iter().map(|s| s.exponent).collect::<Vec<_>>();
        let (ae, be) = (exps(&a_steps), exps(&b_steps));
        let a = ae.iter().fold(0, |g, &e| g.gcd(&e));
        let b = be.iter().fold(0, |g, &e| g.gcd(&e));
        let (a_max, b_max) = (
            *ae.iter().max().expect("maps"),
            *be.iter().max().expect("maps"),
        );
        let unit = a * b;
        let m0 = threshold_for(&ae, unit).max(threshold_for(&be, unit));
        let m = (m0 + a_max.max(b_max)).div_ceil(unit) * unit;
        let p_left = side_probabilities(&a_steps, a, a_max, m)?;
        let p_right = side_probabilities(&b_steps, b, b_max, m)?;
        let p = p_left
            .iter()
            .chain(&p_right)
            .cloned()
            .fold(f64::INFINITY, f64::min);
        let q = (x.powf(ell as f64 * (beta + beta2)) * p * p).powi(2);
        Ok(DropInstance {
            xi,
            a_exponents: a_exps.to_vec(),
            b_exponents: b_exps.to_vec(),
            t,
            t2,
            beta,
            beta2,
            a_steps,
            b_steps,
            a,
            b,
            a_max,
            b_max,
            m0,
            m,
            ell,
            p_left,
            p_right,
            p,
            q,
        })
    }

    /// Reads `ξ` and the exponents off two algebraically resonant systems
    /// with positive ratios.
    pub fn from_systems(left: &Ifs1d, right: &Ifs1d, q_max: i64, tol: f64) -> Result<DropInstance> {
        let all: Vec<Scalar> = left.ratios().into_iter().chain(right.ratios()).collect();
        if all.iter().any(|r| !r.is_positive()) {
            return Err(Error::domain(
                "the drop bound needs orientation-preserving maps",
            ));
        }
        let (xi, exps) = match all
            .iter()
            .map(|r| r.as_exact().cloned())
            .collect::<Option<Vec<_>>>()
        {
            Some(exact) => {
                let c = exact_common_base(&exact)?.ok_or_else(|| {
                    Error::domain("ratios are not powers of a common rational base")
                })?;
                let exps = exact
                    .iter()
                    .map(|r| exact_exponent(&c, r))
                    .collect::<Result<Vec<_>>>()?;
                (Scalar::Exact(c.recip()), exps)
            }
            None => {
                let logs: Vec<f64> = all.iter().map(|r| -r.ln()).collect();
                let alpha = arithmetic_lattice(&logs, tol, q_max)?
                    .ok_or_else(|| Error::domain("ratios are not algebraically resonant"))?;
                let exps = logs.iter().map(|l| (l / alpha).round() as u64).collect();
                (Scalar::float((-alpha).exp()), exps)
            }
        };
        let n = left.len();
        DropInstance::new(
            xi,
            &exps[..n],
            &exps[n..],
            left.translations(),
            right.translations(),
        )
    }

    /// The two systems `{ξ^{a_i} x + t_i}` and `{ξ^{b_i} x + t'_i}`.
    pub fn systems(&self) -> Result<(Ifs1d, Ifs1d)> {
        let build = |e: &[u64], t: &[Scalar]| {
            let pairs: Vec<(Scalar, Scalar)> = e
                .iter()
                .zip(t)
                .map(|(&a, t)| (self.xi.powi(a as i32), t.clone()))
                .collect();
            Ifs1d::from_pairs(&pairs)
        };
        Ok((
            build(&self.a_exponents, &self.t)?,
            build(&self.b_exponents, &self.t2)?,
        ))
    }

    pub fn is_homogeneous(&self) -> bool {
        self.a_exponents.iter().all(|&a| a == self.a_exponents[0])
            && self.b_exponents.iter().all(|&b| b == self.b_exponents[0])
    }
}

fn exact_exponent(c: &BigRational, r: &BigRational) -> Result<u64> {
    let e = (r.recip().to_f64().unwrap_or(f64::INFINITY).ln()
        / c.to_f64().unwrap_or(f64::NAN).ln())
    .round();
    let e = e as u64;
    let mut pow = BigRational::one();
    for _ in 0..e {
        pow = pow * c;
    }
    if e == 0 || pow != r.abs().recip() {
        return Err(Error::Numeric(format!("{r} is not a power of 1/{c}")));
    }
    Ok(e)
}

/// `β + β' + log(1 − q) / (M log(1/ξ))`.
pub fn essential_bound_value(beta_sum: f64, m: u64, xi: f64, q: f64) -> f64 {
    beta_sum + (-q).ln_1p() / (m as f64 * -xi.ln())
}

/// `-log(1 − q) / (M log(1/ξ))`, the amount the covering bound sits below
/// `β + β'`. Kept apart because it can fall below the resolution of the sum.
pub fn essential_deficit(inst: &DropInstance) -> Result<f64> {
    if !(inst.p > 0.0) || !(inst.q > 0.0 && inst.q < 1.0) {
        return Err(Error::Consistency(format!(
            "p = {}, q = {} out of range",
            inst.p, inst.q
        )));
    }
    let d = -(-inst.q).ln_1p() / (inst.m as f64 * -inst.xi.to_f64().ln());
    if !(d > 0.0) {
        return Err(Error::Consistency(format!("deficit {d} is not positive")));
    }
    Ok(d)
}

/// Covering bound on `dim(K + sK')` from counting essential pairs.
pub fn essential_pair_bound(inst: &DropInstance) -> Result<Scalar> {
    let d = essential_deficit(inst)?;
    Ok(Scalar::float(inst.beta + inst.beta2 - d))
}

/// Translations of all compositions of length `len`, i.e. the digits of the
/// `len`-fold iterate.
pub fn iterated_digits(ifs: &Ifs1d, len: usize) -> Result<Vec<Scalar>> {
    let n = ifs.len();
    let total = n
        .checked_pow(len as u32)
        .filter(|&t| t <= 1 << 24)
        .ok_or_else(|| Error::resource(format!("{n}^{len} digits"), "max_cells", 1 << 24))?;
    (0..total)
        .map(|mut idx| {
            let mut w = vec![0; len];
            for slot in w.iter_mut().rev() {
                *slot = idx % n;
                idx /= n;
            }
            compose_word(ifs, &Word(w)).map(|f: Similitude1d| f.translation)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DropReport {
    pub instance: DropInstance,
    pub s: Scalar,
    /// Present when every ratio on each side is equal.
    pub digit: Option<DigitSumReport>,
    pub essential_bound: Scalar,
    pub essential_deficit: f64,
    pub dimension_sum: f64,
    pub series: BoxCountSeries,
    pub measured: DimensionEstimate,
}

/// Both bounds and the box-counting slope of `K + sK'` at the resonant `s`.
pub fn drop_report(
    left: &Ifs1d,
    right: &Ifs1d,
    window: &ScaleWindow,
    budget: &Budget,
    q_max: i64,
    tol: f64,
) -> Result<DropReport> {
    let instance = DropInstance::from_systems(left, right, q_max, tol)?;
    let essential_bound = essential_pair_bound(&instance)?;
    let essential_deficit = essential_deficit(&instance)?;
    let (digit, s) = if instance.is_homogeneous() {
        let (a, b) = (instance.a_exponents[0], instance.b_exponents[0]);
        let (d, d2) = (
            iterated_digits(left, b as usize)?,
            iterated_digits(right, a as usize)?,
        );
        let s = resonant_scale(&d, &d2)?;
        let xi = instance.xi.powi((a * b) as i32);
        (Some(digit_collision(&d, &d2, &s, &xi)?), s)
    } else {
        (None, resonant_scale(&instance.t, &instance.t2)?)
    };
    let series = sum_series(left, right, &s, window, budget)?;
    let measured = estimate_dimension(&series)?;
    Ok(DropReport {
        series,
        dimension_sum: instance.beta + instance.beta2,
        instance,
        s,
        digit,
        essential_bound,
        essential_deficit,
        measured,
    })
}
