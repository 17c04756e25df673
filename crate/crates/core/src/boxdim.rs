//! Cylinder covers, arithmetic sums of covers and box-counting dimension.
//!
//! Exact covers live on an integer lattice: every endpoint is stored as a
//! numerator over one common denominator, so sweeping and counting never
//! touch big rationals in the inner loops.

use std::cmp::Ordering;
use std::ops::{Add, Sub};

use num::bigint::BigInt;
use num::integer::Integer;
use num::rational::BigRational;
use num::traits::{One, Signed, ToPrimitive};
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::ifs::{CylinderInterval, Ifs1d, Interval, Similitude1d, Word};
use crate::par;
use crate::scalar::{Mode, Scalar, FLOAT_TOL};

/// Pairs materialised per sweep chunk.
const CHUNK_PAIRS: usize = 1 << 22;

/// Largest lattice numerator accepted, leaving headroom for sums.
const LATTICE_LIMIT: i128 = 1 << 120;

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Lattice {
        denom: BigInt,
        ivals: Vec<(i128, i128)>,
    },
    Float(Vec<(f64, f64)>),
}

/// A sorted union of pairwise separated closed intervals at a scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover1D {
    delta: Scalar,
    repr: Repr,
}

impl Cover1D {
    /// Merges arbitrary intervals into a cover.
    pub fn from_intervals(delta: Scalar, intervals: &[Interval]) -> Result<Cover1D> {
        let mode = delta.mode();
        if intervals.iter().any(|i| i.mode() != mode) {
            return Err(Error::MixedMode("cover intervals and scale".into()));
        }
        match mode {
            Mode::Float => {
                let ivals = intervals
                    .iter()
                    .map(|i| (i.lo.to_f64(), i.hi.to_f64()))
                    .collect();
                Cover1D::from_float(delta.to_f64(), ivals)
            }
            Mode::Exact => {
                let pairs: Vec<(BigRational, BigRational)> = intervals
                    .iter()
                    .map(|i| {
                        (
                            i.lo.as_exact().unwrap().clone(),
                            i.hi.as_exact().unwrap().clone(),
                        )
                    })
                    .collect();
                let d = delta.as_exact().unwrap();
                let (denom, mut ivals) = encode(&[&pairs], d.denom())?;
                ivals.sort_unstable();
                let ivals = merge_sorted(ivals, 0);
                Ok(Cover1D {
                    delta,
                    repr: Repr::Lattice { denom, ivals },
                })
            }
        }
    }

    /// Merges floating intervals with the float gap tolerance.
    pub fn from_float(delta: f64, mut ivals: Vec<(f64, f64)>) -> Result<Cover1D> {
        if !(delta > 0.0) {
            return Err(Error::domain(format!(
                "scale must be positive, got {delta}"
            )));
        }
        if ivals.iter().any(|&(a, b)| !(a <= b)) {
            return Err(Error::domain("cover interval with lo > hi or NaN"));
        }
        ivals.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
        let wrapped = ivals.into_iter().map(|(a, b)| (F(a), F(b))).collect();
        let merged = merge_sorted(wrapped, F(FLOAT_TOL * delta));
        Ok(Cover1D {
            delta: Scalar::float(delta),
            repr: Repr::Float(merged.into_iter().map(|(a, b)| (a.0, b.0)).collect()),
        })
    }

    pub fn delta(&self) -> &Scalar {
        &self.delta
    }

    pub fn mode(&self) -> Mode {
        self.delta.mode()
    }

    pub fn len(&self) -> usize {
        match &self.repr {
            Repr::Lattice { ivals, .. } => ivals.len(),
            Repr::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The intervals as scalars, sorted by left endpoint.
    pub fn intervals(&self) -> Vec<Interval> {
        match &self.repr {
            Repr::Lattice { denom, ivals } => ivals
                .iter()
                .map(|&(a, b)| Interval {
                    lo: Scalar::Exact(BigRational::new(BigInt::from(a), denom.clone())),
                    hi: Scalar::Exact(BigRational::new(BigInt::from(b), denom.clone())),
                })
                .collect(),
            Repr::Float(v) => v
                .iter()
                .map(|&(a, b)| Interval {
                    lo: Scalar::float(a),
                    hi: Scalar::float(b),
                })
                .collect(),
        }
    }

    /// Floating copies of the endpoints, for plotting and summaries.
    pub fn float_intervals(&self) -> Vec<(f64, f64)> {
        match &self.repr {
            Repr::Lattice { denom, ivals } => {
                let d = denom.to_f64().unwrap_or(f64::INFINITY);
                ivals
                    .iter()
                    .map(|&(a, b)| (a as f64 / d, b as f64 / d))
                    .collect()
            }
            Repr::Float(v) => v.clone(),
        }
    }

    /// Lebesgue measure of the union.
    pub fn total_length(&self) -> Scalar {
        match &self.repr {
            Repr::Lattice { denom, ivals } => {
                let sum: BigInt = ivals.iter().map(|&(a, b)| BigInt::from(b - a)).sum();
                Scalar::Exact(BigRational::new(sum, denom.clone()))
            }
            Repr::Float(v) => Scalar::float(v.iter().map(|(a, b)| b - a).sum()),
        }
    }

    /// Whether `x` lies in the union (float covers allow `FLOAT_TOL·δ` slack).
    pub fn contains(&self, x: &Scalar) -> bool {
        match &self.repr {
            Repr::Lattice { denom, ivals } => {
                let Some(x) = x.as_exact() else {
                    return false;
                };
                let xd = x * BigRational::from_integer(denom.clone());
                let at = |v: i128| BigRational::from_integer(BigInt::from(v));
                let i = ivals.partition_point(|iv| at(iv.0) <= xd);
                i > 0 && xd <= at(ivals[i - 1].1)
            }
            Repr::Float(v) => {
                let x = x.to_f64();
                let slack = FLOAT_TOL * self.delta.to_f64();
                let i = v.partition_point(|iv| iv.0 - slack <= x);
                i > 0 && x <= v[i - 1].1 + slack
            }
        }
    }
}

/// Ordered `f64` for the generic sweep; inputs are never NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
struct F(f64);

impl Eq for F {}

impl PartialOrd for F {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for F {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl Add for F {
    type Output = F;
    fn add(self, o: F) -> F {
        F(self.0 + o.0)
    }
}

impl Sub for F {
    type Output = F;
    fn sub(self, o: F) -> F {
        F(self.0 - o.0)
    }
}

trait Coord: Copy + Ord + Send + Sync + Add<Output = Self> + Sub<Output = Self> {
    /// `n + 1` nondecreasing cut points, the last strictly above `hi`.
    fn cuts(lo: Self, hi: Self, n: usize) -> Vec<Self>;
}

impl Coord for i128 {
    fn cuts(lo: i128, hi: i128, n: usize) -> Vec<i128> {
        let step = (hi - lo) / n as i128 + 1;
        (0..=n)
            .map(|c| {
                if c == n {
                    hi + 1
                } else {
                    (lo + step * c as i128).min(hi + 1)
                }
            })
            .collect()
    }
}

impl Coord for F {
    fn cuts(lo: F, hi: F, n: usize) -> Vec<F> {
        let span = hi.0 - lo.0;
        (0..=n)
            .map(|c| {
                if c == n {
                    F(f64::INFINITY)
                } else {
                    F(lo.0 + span * (c as f64 / n as f64))
                }
            })
            .collect()
    }
}

/// Merges intervals sorted by left endpoint; gaps of at most `tol` close.
fn merge_sorted<T: Coord>(sorted: Vec<(T, T)>, tol: T) -> Vec<(T, T)> {
    let mut out: Vec<(T, T)> = Vec::with_capacity(sorted.len() / 4 + 1);
    for (a, b) in sorted {
        push_merge(&mut out, (a, b), tol);
    }
    out
}

fn push_merge<T: Coord>(out: &mut Vec<(T, T)>, (a, b): (T, T), tol: T) {
    if let Some(last) = out.last_mut() {
        if a <= last.1 + tol {
            last.0 = last.0.min(a);
            last.1 = last.1.max(b);
            return;
        }
    }
    out.push((a, b));
}

/// Merged union of `{x + y}` over `x ∈ a`, `y ∈ b`, both sorted by `lo`.
///
/// The range of left endpoints of the sums is cut into chunks of about
/// `CHUNK_PAIRS` pairs; each chunk is materialised, sorted and merged on its
/// own, then the chunks are stitched in order. Peak memory is one chunk per
/// worker and the output is independent of scheduling.
fn sweep<T: Coord>(a: &[(T, T)], b: &[(T, T)], tol: T) -> Vec<(T, T)> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let (outer, inner) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let pairs = outer.len() * inner.len();
    let n = pairs.div_ceil(CHUNK_PAIRS).max(1);
    let lo = outer[0].0 + inner[0].0;
    let hi = outer[outer.len() - 1].0 + inner[inner.len() - 1].0;
    let cuts = T::cuts(lo, hi, n);
    let inner_lo: Vec<T> = inner.iter().map(|iv| iv.0).collect();
    let chunks = par::map_range(n, |c| {
        let (x0, x1) = (cuts[c], cuts[c + 1]);
        let mut buf = Vec::new();
        for &(olo, ohi) in outer {
            let j0 = inner_lo.partition_point(|&v| v < x0 - olo);
            let j1 = inner_lo.partition_point(|&v| v < x1 - olo);
            buf.extend(
                inner[j0..j1]
                    .iter()
                    .map(|&(ilo, ihi)| (olo + ilo, ohi + ihi)),
            );
        }
        buf.sort_unstable();
        merge_sorted(buf, tol)
    });
    let mut out = Vec::new();
    for chunk in chunks {
        for iv in chunk {
            push_merge(&mut out, iv, tol);
        }
    }
    out
}

/// Puts several families of rational intervals over one denominator that
/// is also a multiple of `extra`.
fn encode(
    families: &[&[(BigRational, BigRational)]],
    extra: &BigInt,
) -> Result<(BigInt, Vec<(i128, i128)>)> {
    let mut denom = extra.clone();
    for fam in families {
        for (a, b) in fam.iter() {
            denom = denom.lcm(a.denom()).lcm(b.denom());
        }
    }
    let conv = |q: &BigRational| -> Result<i128> {
        let v = q.numer() * (&denom / q.denom());
        v.to_i128()
            .filter(|v| v.abs() < LATTICE_LIMIT)
            .ok_or_else(|| Error::Numeric(format!("lattice numerator {v} exceeds 120 bits")))
    };
    let mut out = Vec::new();
    for fam in families {
        for (a, b) in fam.iter() {
            out.push((conv(a)?, conv(b)?));
        }
    }
    Ok((denom, out))
}

fn leq_scale(diam: &Scalar, delta: &Scalar) -> bool {
    match (diam, delta) {
        (Scalar::Float(d), Scalar::Float(e)) => *d <= *e * (1.0 + FLOAT_TOL),
        _ => diam <= delta,
    }
}

/// Depth-first refinement of the hull, visiting every word whose cylinder
/// first reaches diameter `≤ δ`.
fn visit_leaves(
    ifs: &Ifs1d,
    delta: &Scalar,
    budget: &Budget,
    mut visit: impl FnMut(&[usize], &Similitude1d),
) -> Result<usize> {
    let len = ifs.hull().length();
    let mut stack = vec![(Vec::new(), Similitude1d::identity(ifs.mode()))];
    let mut leaves = 0usize;
    while let Some((word, f)) = stack.pop() {
        if leq_scale(&(&f.ratio.abs() * &len), delta) {
            leaves += 1;
            if leaves as u64 > budget.max_cells {
                return Err(Error::resource(
                    format!("cylinder cover at scale {delta}"),
                    "max_cells",
                    budget.max_cells,
                ));
            }
            visit(&word, &f);
            continue;
        }
        for (i, g) in ifs.maps().iter().enumerate().rev() {
            let mut w = word.clone();
            w.push(i);
            stack.push((w, f.compose(g)));
        }
    }
    Ok(leaves)
}

fn check_scale(ifs: &Ifs1d, delta: &Scalar) -> Result<()> {
    if delta.mode() != ifs.mode() {
        return Err(Error::MixedMode("scale and system".into()));
    }
    if !delta.is_positive() {
        return Err(Error::domain(format!(
            "scale must be positive, got {delta}"
        )));
    }
    Ok(())
}

/// Cylinders `f_u(hull)` of diameter in `(r_*·δ, δ]` covering the attractor,
/// in depth-first word order.
pub fn cylinders_at_scale(
    ifs: &Ifs1d,
    delta: &Scalar,
    budget: &Budget,
) -> Result<Vec<CylinderInterval>> {
    check_scale(ifs, delta)?;
    if !leq_scale(delta, &ifs.hull().length()) {
        return Err(Error::domain(format!(
            "scale {delta} exceeds the hull length {}",
            ifs.hull().length()
        )));
    }
    let mut out = Vec::new();
    visit_leaves(ifs, delta, budget, |w, f| {
        out.push(CylinderInterval {
            word: Word(w.to_vec()),
            interval: f.apply_interval(ifs.hull()),
            ratio: f.ratio.clone(),
        })
    })?;
    Ok(out)
}

/// Leaf intervals at scale `δ`, scaled by `s`; the hull itself when it is
/// already shorter than `δ`.
fn leaf_intervals(
    ifs: &Ifs1d,
    delta: &Scalar,
    s: &Scalar,
    budget: &Budget,
) -> Result<Vec<Interval>> {
    let mut out = Vec::new();
    visit_leaves(ifs, delta, budget, |_, f| {
        let i = f.apply_interval(ifs.hull());
        out.push(Interval {
            lo: &i.lo * s,
            hi: &i.hi * s,
        });
    })?;
    Ok(out)
}

/// Cover of the attractor by its scale-`δ` cylinders.
pub fn attractor_cover(ifs: &Ifs1d, delta: &Scalar, budget: &Budget) -> Result<Cover1D> {
    check_scale(ifs, delta)?;
    let one = Scalar::one(ifs.mode());
    let ivals = leaf_intervals(ifs, delta, &one, budget)?;
    Cover1D::from_intervals(delta.clone(), &ivals)
}

/// Cover of `K + s·K'` by sums of scale-`δ` cylinders of `K` and cylinders
/// of `K'` whose images under `x ↦ s·x` have diameter at most `δ`.
pub fn sum_cover(
    left: &Ifs1d,
    right: &Ifs1d,
    s: &Scalar,
    delta: &Scalar,
    budget: &Budget,
) -> Result<Cover1D> {
    check_scale(left, delta)?;
    check_scale(right, delta)?;
    if s.mode() != left.mode() {
        return Err(Error::MixedMode("sum factor and systems".into()));
    }
    if !s.is_positive() {
        return Err(Error::domain(format!(
            "sum factor must be positive, got {s}"
        )));
    }
    let one = Scalar::one(left.mode());
    let a = leaf_intervals(left, delta, &one, budget)?;
    let b = leaf_intervals(right, &(delta / s), s, budget)?;
    let pairs = a.len() as u64 * b.len() as u64;
    if pairs > budget.max_pairs {
        return Err(Error::resource(
            format!("sum cover at scale {delta} ({pairs} cylinder pairs)"),
            "max_pairs",
            budget.max_pairs,
        ));
    }
    match left.mode() {
        Mode::Exact => {
            let ex = |v: &[Interval]| -> Vec<(BigRational, BigRational)> {
                v.iter()
                    .map(|i| {
                        (
                            i.lo.as_exact().unwrap().clone(),
                            i.hi.as_exact().unwrap().clone(),
                        )
                    })
                    .collect()
            };
            let (ea, eb) = (ex(&a), ex(&b));
            let (denom, all) = encode(&[&ea, &eb], delta.as_exact().unwrap().denom())?;
            let (mut la, mut lb) = (all[..ea.len()].to_vec(), all[ea.len()..].to_vec());
            la.sort_unstable();
            lb.sort_unstable();
            let ivals = sweep(&la, &lb, 0i128);
            Ok(Cover1D {
                delta: delta.clone(),
                repr: Repr::Lattice { denom, ivals },
            })
        }
        Mode::Float => {
            let fl = |v: &[Interval]| -> Vec<(F, F)> {
                let mut out: Vec<(F, F)> = v
                    .iter()
                    .map(|i| (F(i.lo.to_f64()), F(i.hi.to_f64())))
                    .collect();
                out.sort_unstable();
                out
            };
            let d = delta.to_f64();
            let ivals = sweep(&fl(&a), &fl(&b), F(FLOAT_TOL * d));
            Ok(Cover1D {
                delta: delta.clone(),
                repr: Repr::Float(ivals.into_iter().map(|(x, y)| (x.0, y.0)).collect()),
            })
        }
    }
}

/// Counts cells as `[first, last]` index ranges, never counting a cell twice.
fn count_cells(ranges: impl Iterator<Item = (i128, i128)>) -> u64 {
    let mut prev: Option<i128> = None;
    let mut total: u128 = 0;
    for (first, last) in ranges {
        let start = prev.map_or(first, |p| first.max(p + 1));
        if last >= start {
            total += (last - start + 1) as u128;
        }
        prev = Some(prev.map_or(last, |p| p.max(last)));
    }
    total as u64
}

fn snap(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= 1e-9 * v.abs().max(1.0) {
        r
    } else {
        v
    }
}

/// Number of grid cells `[jδ, (j+1)δ)` meeting the cover. A right endpoint
/// on a grid line touches only the cell to its left.
pub fn box_count(cover: &Cover1D, delta: &Scalar) -> Result<u64> {
    if !delta.is_positive() {
        return Err(Error::domain(format!(
            "scale must be positive, got {delta}"
        )));
    }
    match &cover.repr {
        Repr::Float(v) => {
            let d = delta.to_f64();
            Ok(count_cells(v.iter().map(|&(a, b)| {
                let first = snap(a / d).floor() as i128;
                let last = ((snap(b / d).ceil() as i128) - 1).max(first);
                (first, last)
            })))
        }
        Repr::Lattice { denom, ivals } => {
            let d = match delta {
                Scalar::Exact(q) => q.clone(),
                Scalar::Float(x) => BigRational::from_float(*x)
                    .ok_or_else(|| Error::domain("scale is not finite"))?,
            };
            // δ in lattice units, p/q.
            let units = d * BigRational::from_integer(denom.clone());
            let (p, q) = (units.numer().clone(), units.denom().clone());
            let fast = p
                .to_i128()
                .zip(q.to_i128())
                .filter(|&(_, q)| q < i128::MAX / LATTICE_LIMIT);
            if let Some((p, q)) = fast {
                Ok(count_cells(ivals.iter().map(|&(a, b)| {
                    let first = Integer::div_floor(&(a * q), &p);
                    let last = (Integer::div_ceil(&(b * q), &p) - 1).max(first);
                    (first, last)
                })))
            } else {
                let to = |v: BigInt| {
                    v.to_i128()
                        .ok_or_else(|| Error::Numeric("cell index overflow".into()))
                };
                let cells = ivals
                    .iter()
                    .map(|&(a, b)| {
                        let first = (BigInt::from(a) * &q).div_floor(&p);
                        let last = ((BigInt::from(b) * &q).div_ceil(&p) - BigInt::one())
                            .max(first.clone());
                        Ok((to(first)?, to(last)?))
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(count_cells(cells.into_iter()))
            }
        }
    }
}

/// Scales `δ_k = base^{-k}` for `k_min ≤ k ≤ k_max`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleWindow {
    pub base: Scalar,
    pub k_min: u32,
    pub k_max: u32,
}

impl ScaleWindow {
    pub fn new(base: Scalar, k_min: u32, k_max: u32) -> Result<ScaleWindow> {
        if !(base.to_f64() > 1.0) {
            return Err(Error::domain(format!(
                "ladder base must exceed 1, got {base}"
            )));
        }
        if k_min >= k_max {
            return Err(Error::domain(format!(
                "empty scale window {k_min}..{k_max}"
            )));
        }
        Ok(ScaleWindow { base, k_min, k_max })
    }

    /// The default ladder for the given systems ending at `k_max`; the two
    /// coarsest scales are left out of the fit.
    pub fn ending_at(systems: &[&Ifs1d], k_max: u32) -> Result<ScaleWindow> {
        ScaleWindow::new(ladder_base(systems)?, 2, k_max)
    }

    pub fn delta(&self, k: u32) -> Scalar {
        self.base.powi(-(k as i32))
    }

    pub fn scales(&self) -> impl Iterator<Item = u32> {
        self.k_min..=self.k_max
    }
}

/// `1/r` for the largest ratio `r` when every system is homogeneous
/// (one contraction ratio up to sign), otherwise 2.
pub fn ladder_base(systems: &[&Ifs1d]) -> Result<Scalar> {
    let Some(first) = systems.first() else {
        return Err(Error::domain("no systems given"));
    };
    let mode = first.mode();
    let homogeneous = systems.iter().all(|s| {
        let r = s.max_abs_ratio();
        s.ratios().iter().all(|x| x.abs().approx_eq(&r))
    });
    if homogeneous {
        let r = systems
            .iter()
            .map(|s| s.max_abs_ratio())
            .reduce(Scalar::max)
            .unwrap();
        Ok(r.recip())
    } else {
        Ok(match mode {
            Mode::Exact => Scalar::int(2),
            Mode::Float => Scalar::float(2.0),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxCountRow {
    pub k: u32,
    pub delta: Scalar,
    pub count: u64,
}

/// Box counts along a scale ladder with strictly decreasing `δ`.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct BoxCountSeries {
    pub rows: Vec<BoxCountRow>,
}

impl BoxCountSeries {
    pub fn new(rows: Vec<BoxCountRow>) -> Result<BoxCountSeries> {
        for w in rows.windows(2) {
            if w[1].delta.to_f64() >= w[0].delta.to_f64() {
                return Err(Error::domain("scales must strictly decrease"));
            }
        }
        Ok(BoxCountSeries { rows })
    }

    /// Writes `k, delta, count, log_count` rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "delta", "count", "log_count"])?;
        for r in &self.rows {
            w.write_record([
                r.k.to_string(),
                format!("{:e}", r.delta.to_f64()),
                r.count.to_string(),
                format!("{:.12}", (r.count as f64).ln()),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Least-squares slope of `log N` against `log(1/δ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DimensionEstimate {
    pub value: f64,
    /// Standard error of the slope; infinite when `degenerate`.
    pub stderr: f64,
    pub scale_range: (u32, u32),
    /// Largest absolute residual of the fit.
    pub residual: f64,
    /// Every count was equal, so no slope is defined.
    pub degenerate: bool,
}

pub fn estimate_dimension(series: &BoxCountSeries) -> Result<DimensionEstimate> {
    let rows = &series.rows;
    if rows.len() < 3 {
        return Err(Error::domain(format!(
            "need at least 3 scales, got {}",
            rows.len()
        )));
    }
    if rows.iter().any(|r| r.count == 0) {
        return Err(Error::domain("a box count is zero"));
    }
    let scale_range = (rows[0].k, rows[rows.len() - 1].k);
    if rows.iter().all(|r| r.count == rows[0].count) {
        return Ok(DimensionEstimate {
            value: 0.0,
            stderr: f64::INFINITY,
            scale_range,
            residual: 0.0,
            degenerate: true,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| -r.delta.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| (r.count as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let res: Vec<f64> = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| y - icpt - slope * x)
        .collect();
    let ssr: f64 = res.iter().map(|r| r * r).sum();
    Ok(DimensionEstimate {
        value: slope,
        stderr: (ssr / (n - 2.0) / sxx).sqrt(),
        scale_range,
        residual: res.iter().fold(0.0f64, |m, r| m.max(r.abs())),
        degenerate: false,
    })
}

/// Box counts of the attractor along the window.
pub fn attractor_series(
    ifs: &Ifs1d,
    window: &ScaleWindow,
    budget: &Budget,
) -> Result<BoxCountSeries> {
    let base = window.base.to_mode(ifs.mode())?;
    let mut rows = Vec::new();
    for k in window.scales() {
        let delta = base.powi(-(k as i32));
        let cover = attractor_cover(ifs, &delta, budget)?;
        rows.push(BoxCountRow {
            k,
            count: box_count(&cover, &delta)?,
            delta,
        });
    }
    BoxCountSeries::new(rows)
}

/// Box counts of `K + s·K'` along the window.
pub fn sum_series(
    left: &Ifs1d,
    right: &Ifs1d,
    s: &Scalar,
    window: &ScaleWindow,
    budget: &Budget,
) -> Result<BoxCountSeries> {
    let base = window.base.to_mode(left.mode())?;
    let mut rows = Vec::new();
    for k in window.scales() {
        let delta = base.powi(-(k as i32));
        let cover = sum_cover(left, right, s, &delta, budget)?;
        rows.push(BoxCountRow {
            k,
            count: box_count(&cover, &delta)?,
            delta,
        });
    }
    BoxCountSeries::new(rows)
}

/// Box-counting estimate of `dim(K + s·K')` over the window.
pub fn dim_report(
    left: &Ifs1d,
    right: &Ifs1d,
    s: &Scalar,
    window: &ScaleWindow,
    budget: &Budget,
) -> Result<DimensionEstimate> {
    estimate_dimension(&sum_series(left, right, s, window, budget)?)
}
