//! Similitudes, iterated function systems, words and cylinders.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Mode, Scalar};

/// A closed interval `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lo: Scalar,
    pub hi: Scalar,
}

impl Interval {
    pub fn new(lo: Scalar, hi: Scalar) -> Result<Self> {
        match lo.partial_cmp(&hi) {
            Some(std::cmp::Ordering::Greater) => {
                Err(Error::domain(format!("interval [{lo}, {hi}] has lo > hi")))
            }
            None => Err(Error::MixedMode(format!("interval [{lo}, {hi}]"))),
            _ => Ok(Interval { lo, hi }),
        }
    }

    pub fn mode(&self) -> Mode {
        self.lo.mode()
    }

    pub fn length(&self) -> Scalar {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Scalar {
        let two = match self.mode() {
            Mode::Exact => Scalar::int(2),
            Mode::Float => Scalar::float(2.0),
        };
        (&self.lo + &self.hi) / two
    }

    pub fn contains(&self, x: &Scalar) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Like [`Interval::contains_interval`] but with `FLOAT_TOL` slack in float mode.
    pub fn contains_interval_approx(&self, other: &Interval) -> bool {
        match self.mode() {
            Mode::Exact => self.contains_interval(other),
            Mode::Float => {
                let slack = crate::scalar::FLOAT_TOL * self.length().to_f64().abs().max(1.0);
                self.lo.to_f64() - slack <= other.lo.to_f64()
                    && other.hi.to_f64() <= self.hi.to_f64() + slack
            }
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// `x -> ratio * x + translation` with `0 < |ratio| < 1`.
///
/// The identity (ratio one) exists only as the composition of the empty
/// word; see [`Similitude1d::identity`].
#[derive(Debug, Clone, PartialEq)]
pub struct Similitude1d {
    pub ratio: Scalar,
    pub translation: Scalar,
}

impl Similitude1d {
    pub fn new(ratio: Scalar, translation: Scalar) -> Result<Self> {
        if ratio.mode() != translation.mode() {
            return Err(Error::MixedMode(format!("map {ratio}x + {translation}")));
        }
        let abs = ratio.abs();
        if ratio.is_zero() || abs >= Scalar::one(ratio.mode()) {
            return Err(Error::domain(format!(
                "contraction ratio {ratio} must satisfy 0 < |r| < 1"
            )));
        }
        Ok(Similitude1d { ratio, translation })
    }

    /// The empty composition.
    pub fn identity(mode: Mode) -> Self {
        Similitude1d {
            ratio: Scalar::one(mode),
            translation: Scalar::zero(mode),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.ratio == Scalar::one(self.ratio.mode()) && self.translation.is_zero()
    }

    pub fn mode(&self) -> Mode {
        self.ratio.mode()
    }

    pub fn apply(&self, x: &Scalar) -> Scalar {
        &(&self.ratio * x) + &self.translation
    }

    pub fn apply_interval(&self, i: &Interval) -> Interval {
        let a = self.apply(&i.lo);
        let b = self.apply(&i.hi);
        if self.ratio.is_negative() {
            Interval { lo: b, hi: a }
        } else {
            Interval { lo: a, hi: b }
        }
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Similitude1d) -> Similitude1d {
        Similitude1d {
            ratio: &self.ratio * &inner.ratio,
            translation: &(&self.ratio * &inner.translation) + &self.translation,
        }
    }

    pub fn fixed_point(&self) -> Scalar {
        &self.translation / &(Scalar::one(self.mode()) - &self.ratio)
    }
}

impl fmt::Display for Similitude1d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x + {}", self.ratio, self.translation)
    }
}

/// A finite word over the map indices of a system, stored zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Builds a word from the 1-based labels used in the literature.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        labels
            .iter()
            .map(|&l| {
                l.checked_sub(1)
                    .ok_or_else(|| Error::domain("word labels start at 1"))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    /// `i^n`: the letter `i` (zero-based) repeated `n` times.
    pub fn repeat(i: usize, n: usize) -> Self {
        Word(vec![i; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&self, i: usize) -> Word {
        let mut v = self.0.clone();
        v.push(i);
        Word(v)
    }
}

/// Serialised as the list of 1-based labels.
impl serde::Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.0.iter().map(|i| i + 1))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, i) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str(")")
    }
}

/// `f_u(I)` together with its word and signed ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderInterval {
    pub word: Word,
    pub interval: Interval,
    pub ratio: Scalar,
}

/// A system of at least two similitudes of the line with its hull.
#[derive(Debug, Clone, PartialEq)]
pub struct Ifs1d {
    maps: Vec<Similitude1d>,
    hull: Interval,
}

impl Ifs1d {
    pub fn new(maps: Vec<Similitude1d>) -> Result<Self> {
        let hull = attractor_hull(&maps)?;
        Ok(Ifs1d { maps, hull })
    }

    /// Uses a caller-supplied invariant interval instead of the attractor hull.
    pub fn with_hull(maps: Vec<Similitude1d>, hull: Interval) -> Result<Self> {
        check_maps(&maps)?;
        if hull.mode() != maps[0].mode() {
            return Err(Error::MixedMode("hull and maps".into()));
        }
        for (i, f) in maps.iter().enumerate() {
            if !hull.contains_interval_approx(&f.apply_interval(&hull)) {
                return Err(Error::domain(format!(
                    "map {} sends the hull {hull} outside itself",
                    i + 1
                )));
            }
        }
        Ok(Ifs1d { maps, hull })
    }

    pub fn from_pairs(pairs: &[(Scalar, Scalar)]) -> Result<Self> {
        let maps = pairs
            .iter()
            .map(|(r, t)| Similitude1d::new(r.clone(), t.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ifs1d::new(maps)
    }

    pub fn maps(&self) -> &[Similitude1d] {
        &self.maps
    }

    pub fn hull(&self) -> &Interval {
        &self.hull
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn mode(&self) -> Mode {
        self.hull.mode()
    }

    pub fn ratios(&self) -> Vec<Scalar> {
        self.maps.iter().map(|m| m.ratio.clone()).collect()
    }

    pub fn translations(&self) -> Vec<Scalar> {
        self.maps.iter().map(|m| m.translation.clone()).collect()
    }

    /// The common ratio if every map shares it (sign included).
    pub fn common_ratio(&self) -> Option<Scalar> {
        let r = &self.maps[0].ratio;
        self.maps
            .iter()
            .all(|m| m.ratio.approx_eq(r))
            .then(|| r.clone())
    }

    pub fn min_abs_ratio(&self) -> Scalar {
        self.maps
            .iter()
            .map(|m| m.ratio.abs())
            .reduce(Scalar::min)
            .expect("non-empty system")
    }

    pub fn max_abs_ratio(&self) -> Scalar {
        self.maps
            .iter()
            .map(|m| m.ratio.abs())
            .reduce(Scalar::max)
            .expect("non-empty system")
    }

    pub fn similarity_dimension(&self) -> f64 {
        similarity_dimension(&self.ratios()).expect("validated ratios")
    }

    /// Converts every parameter to another backend.
    pub fn to_mode(&self, mode: Mode) -> Result<Ifs1d> {
        let maps = self
            .maps
            .iter()
            .map(|m| Similitude1d::new(m.ratio.to_mode(mode)?, m.translation.to_mode(mode)?))
            .collect::<Result<Vec<_>>>()?;
        let hull = Interval::new(self.hull.lo.to_mode(mode)?, self.hull.hi.to_mode(mode)?)?;
        Ok(Ifs1d { maps, hull })
    }

    /// The image of the hull under the word's composition.
    pub fn cylinder(&self, word: &Word) -> Result<CylinderInterval> {
        let f = compose_word(self, word)?;
        Ok(CylinderInterval {
            interval: f.apply_interval(&self.hull),
            ratio: f.ratio,
            word: word.clone(),
        })
    }
}

fn check_maps(maps: &[Similitude1d]) -> Result<()> {
    if maps.len() < 2 {
        return Err(Error::domain(format!(
            "an iterated function system needs at least two maps, got {}",
            maps.len()
        )));
    }
    let mode = maps[0].mode();
    if maps
        .iter()
        .any(|m| m.mode() != mode || m.translation.mode() != mode)
    {
        return Err(Error::MixedMode(
            "maps of one system use different backends".into(),
        ));
    }
    Ok(())
}

/// The central Cantor set `C_a`: the attractor of `{a x, a x + (1 - a)}`.
pub fn central_cantor(a: Scalar) -> Result<Ifs1d> {
    let mode = a.mode();
    let half = match mode {
        Mode::Exact => Scalar::exact(1, 2),
        Mode::Float => Scalar::float(0.5),
    };
    if !a.is_positive() || a >= half {
        return Err(Error::domain(format!(
            "central Cantor parameter a={a} must lie in (0, 1/2)"
        )));
    }
    let one = Scalar::one(mode);
    let maps = vec![
        Similitude1d::new(a.clone(), Scalar::zero(mode))?,
        Similitude1d::new(a.clone(), &one - &a)?,
    ];
    let hull = Interval::new(Scalar::zero(mode), one)?;
    Ok(Ifs1d { maps, hull })
}

const HULL_MAX_ITER: usize = 1000;
const HULL_TOL: f64 = 1e-14;

/// Smallest interval `J` with `f_i(J) ⊆ J` for every map.
///
/// Closed form when every ratio is positive. With a negative ratio the hull
/// is found by contracting iteration; in exact mode the converged extremes
/// are then solved for exactly and re-verified.
pub fn attractor_hull(maps: &[Similitude1d]) -> Result<Interval> {
    check_maps(maps)?;
    if maps.iter().all(|m| m.ratio.is_positive()) {
        let fixed: Vec<Scalar> = maps.iter().map(Similitude1d::fixed_point).collect();
        let lo = fixed.iter().cloned().reduce(Scalar::min).expect("two maps");
        let hi = fixed.into_iter().reduce(Scalar::max).expect("two maps");
        return Interval::new(lo, hi);
    }

    let r: Vec<f64> = maps.iter().map(|m| m.ratio.to_f64()).collect();
    let t: Vec<f64> = maps.iter().map(|m| m.translation.to_f64()).collect();
    let rmax = r.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let bound = t.iter().fold(0.0f64, |acc, x| acc.max(x.abs())) / (1.0 - rmax) + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    let mut converged = false;
    for _ in 0..HULL_MAX_ITER {
        let (nlo, nhi) = image_hull(&r, &t, lo, hi);
        let scale = nhi.abs().max(nlo.abs()).max(1.0);
        let done = (nlo - lo).abs() + (nhi - hi).abs() < HULL_TOL * scale;
        lo = nlo;
        hi = nhi;
        if done {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numeric(format!(
            "hull iteration did not converge within {HULL_MAX_ITER} steps"
        )));
    }
    match maps[0].mode() {
        Mode::Float => Interval::new(Scalar::float(lo), Scalar::float(hi)),
        Mode::Exact => exact_hull(maps, &r, &t, lo, hi),
    }
}

fn image_hull(r: &[f64], t: &[f64], lo: f64, hi: f64) -> (f64, f64) {
    let mut out = (f64::INFINITY, f64::NEG_INFINITY);
    for (ri, ti) in r.iter().zip(t) {
        let a = ri * lo + ti;
        let b = ri * hi + ti;
        out.0 = out.0.min(a.min(b));
        out.1 = out.1.max(a.max(b));
    }
    out
}

/// Solves for the hull endpoints exactly once iteration identified which
/// map and which endpoint realise each extreme.
fn exact_hull(maps: &[Similitude1d], r: &[f64], t: &[f64], lo: f64, hi: f64) -> Result<Interval> {
    // Each extreme is ratio * (lo or hi) + translation for some map.
    let pick = |want_low: bool| -> (usize, bool) {
        let mut best = (0, true);
        let mut best_val = if want_low {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        for i in 0..r.len() {
            for use_lo in [true, false] {
                let v = r[i] * if use_lo { lo } else { hi } + t[i];
                if (want_low && v < best_val) || (!want_low && v > best_val) {
                    best_val = v;
                    best = (i, use_lo);
                }
            }
        }
        best
    };
    let (i, i_lo) = pick(true);
    let (j, j_lo) = pick(false);
    let mode = Mode::Exact;
    let zero = Scalar::zero(mode);
    let one = Scalar::one(mode);
    let coeff = |k: usize, on_lo: bool| {
        if on_lo {
            (maps[k].ratio.clone(), zero.clone())
        } else {
            (zero.clone(), maps[k].ratio.clone())
        }
    };
    // lo = a1 lo + b1 hi + t_i ; hi = a2 lo + b2 hi + t_j
    let (a1, b1) = coeff(i, i_lo);
    let (a2, b2) = coeff(j, j_lo);
    let m11 = &one - &a1;
    let m12 = -&b1;
    let m21 = -&a2;
    let m22 = &one - &b2;
    let det = &(&m11 * &m22) - &(&m12 * &m21);
    if det.is_zero() {
        return Err(Error::Numeric("singular hull system".into()));
    }
    let ti = &maps[i].translation;
    let tj = &maps[j].translation;
    let xlo = &(&(&m22 * ti) - &(&m12 * tj)) / &det;
    let xhi = &(&(&m11 * tj) - &(&m21 * ti)) / &det;
    let hull = Interval::new(xlo, xhi)?;
    let images: Vec<Interval> = maps.iter().map(|f| f.apply_interval(&hull)).collect();
    let ilo = images
        .iter()
        .map(|x| x.lo.clone())
        .reduce(Scalar::min)
        .expect("maps");
    let ihi = images
        .into_iter()
        .map(|x| x.hi)
        .reduce(Scalar::max)
        .expect("maps");
    if ilo != hull.lo || ihi != hull.hi {
        return Err(Error::Numeric(format!(
            "exact hull {hull} failed the fixed-point check"
        )));
    }
    Ok(hull)
}

/// The unique `β ≥ 0` with `Σ |r_i|^β = 1`, by bisection.
pub fn similarity_dimension(ratios: &[Scalar]) -> Result<f64> {
    if ratios.is_empty() {
        return Err(Error::domain("similarity dimension of an empty ratio list"));
    }
    let r: Vec<f64> = ratios.iter().map(|x| x.to_f64().abs()).collect();
    if r.iter().any(|&x| !(x > 0.0 && x < 1.0)) {
        return Err(Error::domain("every |r_i| must lie in (0, 1)"));
    }
    Ok(solve_similarity_dimension(&r))
}

/// Same as [`similarity_dimension`] on raw absolute ratios, which must lie
/// in `(0, 1)`.
pub fn solve_similarity_dimension(r: &[f64]) -> f64 {
    let f = |b: f64| r.iter().map(|x| x.powf(b)).sum::<f64>() - 1.0;
    let rmax = r.iter().cloned().fold(0.0, f64::max);
    let mut lo = 0.0;
    let mut hi = (r.len() as f64).ln() / (1.0 / rmax).ln() + 1e-9;
    if f(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `f_u = f_{u_1} ∘ ... ∘ f_{u_k}`; the empty word yields the identity.
pub fn compose_word(ifs: &Ifs1d, word: &Word) -> Result<Similitude1d> {
    let mut acc = Similitude1d::identity(ifs.mode());
    for &i in &word.0 {
        let f = ifs.maps.get(i).ok_or_else(|| {
            Error::domain(format!(
                "letter {} out of range for {} maps",
                i + 1,
                ifs.len()
            ))
        })?;
        acc = acc.compose(f);
    }
    Ok(acc)
}

/// A planar similitude `x -> scale · R_angle · O · x + translation`, where
/// `O` is the reflection about the x-axis when `reflect` is set.
///
/// Planar systems run in floating point; rotations by irrational angles
/// have no exact representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similitude2d {
    pub scale: f64,
    pub angle: f64,
    pub reflect: bool,
    pub translation: [f64; 2],
}

impl Similitude2d {
    pub fn new(scale: f64, angle: f64, reflect: bool, translation: [f64; 2]) -> Result<Self> {
        if !(scale > 0.0 && scale < 1.0) {
            return Err(Error::domain(format!(
                "planar scale {scale} must lie in (0, 1)"
            )));
        }
        Ok(Similitude2d {
            scale,
            angle: normalize_angle(angle),
            reflect,
            translation,
        })
    }

    pub fn identity() -> Self {
        Similitude2d {
            scale: 1.0,
            angle: 0.0,
            reflect: false,
            translation: [0.0, 0.0],
        }
    }

    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let y = if self.reflect { -p[1] } else { p[1] };
        let (s, c) = self.angle.sin_cos();
        [
            self.scale * (c * p[0] - s * y) + self.translation[0],
            self.scale * (s * p[0] + c * y) + self.translation[1],
        ]
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Similitude2d) -> Similitude2d {
        // R_a O R_b = R_{a-b} O, so the inner angle flips sign under a reflection.
        let angle = if self.reflect {
            self.angle - inner.angle
        } else {
            self.angle + inner.angle
        };
        let t = self.apply(inner.translation);
        Similitude2d {
            scale: self.scale * inner.scale,
            angle: normalize_angle(angle),
            reflect: self.reflect ^ inner.reflect,
            translation: t,
        }
    }
}

pub fn normalize_angle(theta: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let a = theta.rem_euclid(tau);
    if a >= tau {
        0.0
    } else {
        a
    }
}

/// Slack for planar containment checks.
pub const PLANAR_TOL: f64 = 1e-10;

/// A planar system with a ball `B` satisfying `f_i(B) ⊆ B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ifs2d {
    maps: Vec<Similitude2d>,
    center: [f64; 2],
    radius: f64,
}

impl Ifs2d {
    pub fn new(maps: Vec<Similitude2d>, center: [f64; 2], radius: f64) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::domain("planar system without maps"));
        }
        if !(radius > 0.0) {
            return Err(Error::domain("bounding ball radius must be positive"));
        }
        for (i, f) in maps.iter().enumerate() {
            let c = f.apply(center);
            let d = ((c[0] - center[0]).powi(2) + (c[1] - center[1]).powi(2)).sqrt();
            if d + f.scale * radius > radius + PLANAR_TOL {
                return Err(Error::domain(format!(
                    "map {} sends the bounding ball outside itself",
                    i + 1
                )));
            }
        }
        Ok(Ifs2d {
            maps,
            center,
            radius,
        })
    }

    /// Picks a bounding ball centred at the mean of the fixed points.
    pub fn with_auto_ball(maps: Vec<Similitude2d>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::domain("planar system without maps"));
        }
        let fixed: Vec<[f64; 2]> = maps.iter().map(fixed_point_2d).collect();
        let n = fixed.len() as f64;
        let center = [
            fixed.iter().map(|p| p[0]).sum::<f64>() / n,
            fixed.iter().map(|p| p[1]).sum::<f64>() / n,
        ];
        let radius = maps
            .iter()
            .map(|f| {
                let c = f.apply(center);
                ((c[0] - center[0]).hypot(c[1] - center[1])) / (1.0 - f.scale)
            })
            .fold(0.0, f64::max)
            .max(1e-9)
            * (1.0 + 1e-9);
        Ifs2d::new(maps, center, radius)
    }

    pub fn maps(&self) -> &[Similitude2d] {
        &self.maps
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn similarity_dimension(&self) -> f64 {
        let r: Vec<f64> = self.maps.iter().map(|m| m.scale).collect();
        solve_similarity_dimension(&r)
    }

    pub fn compose_word(&self, word: &Word) -> Result<Similitude2d> {
        let mut acc = Similitude2d::identity();
        for &i in &word.0 {
            let f = self
                .maps
                .get(i)
                .ok_or_else(|| Error::domain(format!("letter {} out of range", i + 1)))?;
            acc = acc.compose(f);
        }
        Ok(acc)
    }
}

fn fixed_point_2d(f: &Similitude2d) -> [f64; 2] {
    // Solve (I - A) x = t for the 2x2 linear part A.
    let (s, c) = f.angle.sin_cos();
    let sign = if f.reflect { -1.0 } else { 1.0 };
    let a = [
        [f.scale * c, -f.scale * s * sign],
        [f.scale * s, f.scale * c * sign],
    ];
    let m = [[1.0 - a[0][0], -a[0][1]], [-a[1][0], 1.0 - a[1][1]]];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let t = f.translation;
    [
        (m[1][1] * t[0] - m[0][1] * t[1]) / det,
        (m[0][0] * t[1] - m[1][0] * t[0]) / det,
    ]
}
