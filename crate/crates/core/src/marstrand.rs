//! Discrete projection theorem: separated projection subfamilies of a
//! family of planar cells, good-angle sets and Riesz energies.
//!
//! Geometry runs in `f64`. Separation audits recompute every projection and
//! compare without slack.

use std::f64::consts::PI;
use std::ops::Sub;

use num::rational::BigRational;
use serde::Serialize;

use crate::boxdim::cylinders_at_scale;
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::ifs::Ifs1d;
use crate::par;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Cell {
    /// Axis-parallel rectangle with lower-left corner `(x0, y0)`.
    Rect {
        x0: f64,
        y0: f64,
        w: f64,
        h: f64,
    },
    Disk {
        cx: f64,
        cy: f64,
        r: f64,
    },
}

impl Cell {
    pub fn center(&self) -> [f64; 2] {
        match *self {
            Cell::Rect { x0, y0, w, h } => [x0 + 0.5 * w, y0 + 0.5 * h],
            Cell::Disk { cx, cy, .. } => [cx, cy],
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Cell::Rect { w, h, .. } => w * h,
            Cell::Disk { r, .. } => PI * r * r,
        }
    }

    /// Radius of the largest inscribed disk.
    pub fn inradius(&self) -> f64 {
        match *self {
            Cell::Rect { w, h, .. } => 0.5 * w.min(h),
            Cell::Disk { r, .. } => r,
        }
    }

    /// Radius of the smallest enclosing disk.
    pub fn circumradius(&self) -> f64 {
        match *self {
            Cell::Rect { w, h, .. } => 0.5 * w.hypot(h),
            Cell::Disk { r, .. } => r,
        }
    }

    /// Mean of `1/|z - w|` for independent uniform points of the cell.
    pub fn self_energy(&self) -> f64 {
        match *self {
            Cell::Rect { w, h, .. } => {
                let d = w.hypot(h);
                let i = 2.0 / 3.0 * (w.powi(3) + h.powi(3))
                    + 2.0 * h * h * w * (w / h).asinh()
                    + 2.0 * h * w * w * (h / w).asinh()
                    - 2.0 / 3.0 * d.powi(3);
                i / (w * h).powi(2)
            }
            Cell::Disk { r, .. } => 16.0 / (3.0 * PI * r),
        }
    }

    /// Rotation about the origin by `phi`; rectangles are not closed under it.
    pub fn rotated(&self, phi: f64) -> Result<Cell> {
        match *self {
            Cell::Disk { cx, cy, r } => {
                let (s, c) = phi.sin_cos();
                Ok(Cell::Disk {
                    cx: c * cx - s * cy,
                    cy: s * cx + c * cy,
                    r,
                })
            }
            Cell::Rect { .. } => Err(Error::domain("only disk cells can be rotated")),
        }
    }
}

/// `P_θ(cell)` on the line through the origin with direction `(cos θ, sin θ)`.
pub fn project_cell(cell: &Cell, theta: f64) -> (f64, f64) {
    let (s, c) = theta.sin_cos();
    let [x, y] = cell.center();
    let m = c * x + s * y;
    let half = match *cell {
        Cell::Rect { w, h, .. } => 0.5 * (w * c.abs() + h * s.abs()),
        Cell::Disk { r, .. } => r,
    };
    (m - half, m + half)
}

/// A family of cells with its separation scale `ρ` and regularity constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellFamily {
    pub cells: Vec<Cell>,
    pub rho: f64,
    /// Each cell contains a disk of radius `ρ/A` and lies in one of radius `Aρ`.
    pub a: f64,
    /// `|cells| ≥ ρ^{-γ} / A1`.
    pub a1: f64,
    /// Disks of radius `ℓ ∈ (ρ, 1)` meet at most `A2 (ℓ/ρ)^γ` cells.
    pub a2: f64,
    pub gamma: f64,
}

impl CellFamily {
    /// Builds a family, taking `A` and `A1` as the tightest values for these
    /// cells and `A2` as measured on disks centred at the cells.
    pub fn new(cells: Vec<Cell>, rho: f64, gamma: f64) -> Result<CellFamily> {
        if cells.is_empty() {
            return Err(Error::domain("empty cell family"));
        }
        if !(rho > 0.0) || !(gamma >= 0.0) {
            return Err(Error::domain(format!(
                "need rho > 0 and gamma >= 0, got {rho}, {gamma}"
            )));
        }
        let a = cells
            .iter()
            .map(|c| (rho / c.inradius()).max(c.circumradius() / rho))
            .fold(1.0f64, f64::max);
        let a1 = rho.powf(-gamma) / cells.len() as f64;
        let mut fam = CellFamily {
            cells,
            rho,
            a,
            a1,
            a2: 0.0,
            gamma,
        };
        fam.a2 = fam.measure_a2();
        Ok(fam)
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// `max count/(ℓ/ρ)^γ` over disks centred at up to 64 cells with radii
    /// `ℓ = 2^i ρ < 1`.
    fn measure_a2(&self) -> f64 {
        let centers: Vec<[f64; 2]> = self.cells.iter().map(Cell::center).collect();
        let stride = (centers.len() / 64).max(1);
        let mut worst = 0.0f64;
        let mut ell = 2.0 * self.rho;
        while ell < 1.0 {
            for c in centers.iter().step_by(stride) {
                let n = self
                    .cells
                    .iter()
                    .filter(|cell| {
                        let p = cell.center();
                        (p[0] - c[0]).hypot(p[1] - c[1]) <= ell + cell.circumradius()
                    })
                    .count();
                worst = worst.max(n as f64 / (ell / self.rho).powf(self.gamma));
            }
            ell *= 2.0;
        }
        worst
    }

    pub fn projections(&self, theta: f64) -> Vec<(f64, f64)> {
        self.cells.iter().map(|c| project_cell(c, theta)).collect()
    }
}

/// Largest `k'` with `r^k ≤ r'^{k'}` for contraction ratios `0 < r, r' < 1`.
///
/// Non-strict so that equal ratios give square cells.
pub fn matching_level(r: &Scalar, r2: &Scalar, k: u32) -> Result<u32> {
    let (a, b) = (r.abs(), r2.abs());
    for v in [&a, &b] {
        if !(v.to_f64() > 0.0 && v.to_f64() < 1.0) {
            return Err(Error::domain(format!("ratio {v} must lie in (0, 1)")));
        }
    }
    let target = a.powi(k as i32);
    let le = |k2: u32| -> bool {
        let rhs = b.powi(k2 as i32);
        match (&target, &rhs) {
            (Scalar::Float(x), Scalar::Float(y)) => *x <= *y * (1.0 + 1e-12),
            _ => target <= rhs,
        }
    };
    let mut k2 = ((k as f64) * a.ln() / b.ln()).floor().max(0.0) as u32;
    while k2 > 0 && !le(k2) {
        k2 -= 1;
    }
    while le(k2 + 1) {
        k2 += 1;
    }
    Ok(k2)
}

/// The common contraction ratio of a homogeneous system up to sign.
pub fn homogeneous_ratio(ifs: &Ifs1d) -> Result<Scalar> {
    let r = ifs.max_abs_ratio();
    if ifs.ratios().iter().all(|x| x.abs().approx_eq(&r)) {
        Ok(r)
    } else {
        Err(Error::domain(
            "system is not homogeneous; extract a homogeneous subsystem first (homogenize)",
        ))
    }
}

/// The rectangles `I(u) × I'(u')` with `|u| = k` and `|u'| = k'`.
pub fn product_cells(left: &Ifs1d, right: &Ifs1d, k: u32, budget: &Budget) -> Result<CellFamily> {
    if k == 0 {
        return Err(Error::domain("level must be at least 1"));
    }
    let r = homogeneous_ratio(left)?;
    let r2 = homogeneous_ratio(right)?;
    let k2 = matching_level(&r, &r2, k)?;
    let count = (left.len() as f64).powi(k as i32) * (right.len() as f64).powi(k2 as i32);
    if count > budget.max_cells as f64 {
        return Err(Error::resource(
            format!("product family of {count} cells"),
            "max_cells",
            budget.max_cells,
        ));
    }
    let wl = &left.hull().length() * &r.powi(k as i32);
    let wr = &right.hull().length() * &r2.powi(k2 as i32);
    let xs = cylinders_at_scale(left, &wl, budget)?;
    let ys = if k2 == 0 {
        vec![right.hull().lo.to_f64()]
    } else {
        cylinders_at_scale(right, &wr, budget)?
            .iter()
            .map(|c| c.interval.lo.to_f64())
            .collect()
    };
    let (w, h) = (wl.to_f64(), wr.to_f64());
    let mut cells = Vec::with_capacity(xs.len() * ys.len());
    for x in &xs {
        let x0 = x.interval.lo.to_f64();
        for &y0 in &ys {
            cells.push(Cell::Rect { x0, y0, w, h });
        }
    }
    let gamma = left.similarity_dimension() + right.similarity_dimension();
    CellFamily::new(cells, w, gamma)
}

/// Indices of a maximum subfamily whose intervals have pairwise gaps
/// strictly greater than `rho`, by the earliest-right-endpoint greedy.
pub fn greedy_separated<T>(ivals: &[(T, T)], rho: &T) -> Vec<usize>
where
    T: Clone + PartialOrd,
    for<'a> &'a T: Sub<&'a T, Output = T>,
{
    let mut order: Vec<usize> = (0..ivals.len()).collect();
    order.sort_by(|&i, &j| {
        ivals[i]
            .1
            .partial_cmp(&ivals[j].1)
            .expect("comparable endpoints")
            .then(i.cmp(&j))
    });
    let mut chosen = Vec::new();
    let mut last: Option<&T> = None;
    for i in order {
        if last.is_none_or(|hi| &(&ivals[i].0 - hi) > rho) {
            chosen.push(i);
            last = Some(&ivals[i].1);
        }
    }
    chosen
}

/// Whether the chosen intervals are pairwise more than `rho` apart.
pub fn audit_separated<T>(ivals: &[(T, T)], chosen: &[usize], rho: &T) -> bool
where
    T: Clone + PartialOrd,
    for<'a> &'a T: Sub<&'a T, Output = T>,
{
    let mut sel: Vec<&(T, T)> = chosen.iter().map(|&i| &ivals[i]).collect();
    sel.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable endpoints"));
    sel.windows(2).all(|w| &(&w[1].0 - &w[0].1) > rho)
}

/// Exact variant of [`greedy_separated`] for rational intervals.
pub fn greedy_separated_exact(
    ivals: &[(BigRational, BigRational)],
    rho: &BigRational,
) -> Vec<usize> {
    greedy_separated(ivals, rho)
}

/// A maximum `ρ`-separated subfamily of projections at angle `θ`.
///
/// # Panics
/// If the result fails the separation audit, which would be a bug.
pub fn separated_subfamily(family: &CellFamily, theta: f64) -> Vec<usize> {
    let ivals = family.projections(theta);
    let chosen = greedy_separated(&ivals, &family.rho);
    assert!(
        audit_separated(&ivals, &chosen, &family.rho),
        "separation audit failed at theta = {theta}"
    );
    chosen
}

/// Length of the union of sorted intervals.
pub fn union_length(mut ivals: Vec<(f64, f64)>) -> f64 {
    ivals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (a, b) in ivals {
        match cur {
            Some((lo, hi)) if a <= hi => cur = Some((lo, hi.max(b))),
            Some((lo, hi)) => {
                total += hi - lo;
                cur = Some((a, b));
            }
            None => cur = Some((a, b)),
        }
    }
    total + cur.map_or(0.0, |(lo, hi)| hi - lo)
}

/// `|P_θ(∪ cells)|`.
pub fn projection_length(family: &CellFamily, theta: f64) -> f64 {
    union_length(family.projections(theta))
}

/// One grid angle of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AngleSample {
    pub theta: f64,
    pub subfamily_size: usize,
    pub projection_length: f64,
    pub good: bool,
}

/// Grid angles `θ_i = (i + 1/2)π/N`, the midpoints of a partition of `[0, π)`.
pub fn theta_grid(steps: usize) -> Vec<f64> {
    let h = PI / steps as f64;
    (0..steps).map(|i| (i as f64 + 0.5) * h).collect()
}

/// Separated subfamily size at every grid angle.
pub fn subfamily_sizes(family: &CellFamily, steps: usize) -> Vec<usize> {
    let grid = theta_grid(steps);
    par::map_slice(&grid, |&t| separated_subfamily(family, t).len())
}

/// Finite union of open subintervals of `[0, π)` where projections keep a
/// large separated subfamily.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoodAngleSet {
    pub intervals: Vec<(f64, f64)>,
    pub epsilon: f64,
    pub delta: f64,
    pub theta_steps: usize,
    /// Lebesgue measure of `[0, π) \ J`.
    pub bad_measure: f64,
    /// `ε·π`, the bound the bad measure is compared against.
    pub bound: f64,
}

impl GoodAngleSet {
    pub fn contains(&self, theta: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a < theta && theta < b)
    }

    pub fn within_bound(&self) -> bool {
        self.bad_measure <= self.bound
    }
}

fn check_eps(epsilon: f64, steps: usize) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::domain(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if steps < 8 {
        return Err(Error::domain(format!(
            "need at least 8 angle steps, got {steps}"
        )));
    }
    Ok(())
}

/// Each maximal run of good grid angles `θ_a..θ_b` becomes the open interval
/// `(θ_a - h/2, θ_b + h/2)`.
fn intervals_from_flags(flags: &[bool]) -> Vec<(f64, f64)> {
    let h = PI / flags.len() as f64;
    let mut out = Vec::new();
    let mut i = 0;
    while i < flags.len() {
        if flags[i] {
            let start = i;
            while i < flags.len() && flags[i] {
                i += 1;
            }
            let lo = start as f64 * h;
            let hi = if i == flags.len() { PI } else { i as f64 * h };
            out.push((lo, hi));
        } else {
            i += 1;
        }
    }
    out
}

fn angle_set_from_sizes(sizes: &[usize], n: usize, epsilon: f64, delta: f64) -> GoodAngleSet {
    let threshold = epsilon * delta * n as f64;
    let flags: Vec<bool> = sizes.iter().map(|&s| s as f64 >= threshold).collect();
    let intervals = intervals_from_flags(&flags);
    let good: f64 = intervals.iter().map(|(a, b)| b - a).sum();
    GoodAngleSet {
        intervals,
        epsilon,
        delta,
        theta_steps: sizes.len(),
        bad_measure: (PI - good).max(0.0),
        bound: epsilon * PI,
    }
}

/// Sweeps the grid; `θ` is good when its separated subfamily has at least
/// `ε·δ·|cells|` members.
pub fn good_angle_set(
    family: &CellFamily,
    epsilon: f64,
    theta_steps: usize,
    delta: f64,
) -> Result<GoodAngleSet> {
    check_eps(epsilon, theta_steps)?;
    if !(delta > 0.0) {
        return Err(Error::domain(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let sizes = subfamily_sizes(family, theta_steps);
    Ok(angle_set_from_sizes(&sizes, family.len(), epsilon, delta))
}

/// The largest `δ` making at least a `1 - ε` fraction of grid angles good.
pub fn calibrate_delta(family: &CellFamily, epsilon: f64, theta_steps: usize) -> Result<f64> {
    check_eps(epsilon, theta_steps)?;
    let sizes = subfamily_sizes(family, theta_steps);
    Ok(delta_from_sizes(&sizes, family.len(), epsilon))
}

fn delta_from_sizes(sizes: &[usize], n: usize, epsilon: f64) -> f64 {
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let need = ((1.0 - epsilon) * sizes.len() as f64).ceil() as usize;
    let t = sorted[need.clamp(1, sorted.len()) - 1];
    t as f64 / (epsilon * n as f64)
}

/// Good-angle set with calibrated `δ`, doubling the grid until every
/// endpoint moves by at most one coarse step.
pub fn refined_good_angle_set(
    family: &CellFamily,
    epsilon: f64,
    start_steps: usize,
    max_steps: usize,
) -> Result<GoodAngleSet> {
    check_eps(epsilon, start_steps)?;
    let sizes = subfamily_sizes(family, start_steps);
    let delta = delta_from_sizes(&sizes, family.len(), epsilon);
    let mut cur = angle_set_from_sizes(&sizes, family.len(), epsilon, delta);
    let mut steps = start_steps;
    while steps * 2 <= max_steps {
        let next = good_angle_set(family, epsilon, steps * 2, delta)?;
        let h = PI / steps as f64;
        let stable = next.intervals.len() == cur.intervals.len()
            && next
                .intervals
                .iter()
                .zip(&cur.intervals)
                .all(|(a, b)| (a.0 - b.0).abs() <= h && (a.1 - b.1).abs() <= h);
        cur = next;
        steps *= 2;
        if stable {
            break;
        }
    }
    Ok(cur)
}

/// Per-angle rows for CSV output.
pub fn angle_sweep(
    family: &CellFamily,
    steps: usize,
    epsilon: f64,
    delta: f64,
) -> Vec<AngleSample> {
    let threshold = epsilon * delta * family.len() as f64;
    let grid = theta_grid(steps);
    par::map_slice(&grid, |&theta| {
        let size = separated_subfamily(family, theta).len();
        AngleSample {
            theta,
            subfamily_size: size,
            projection_length: projection_length(family, theta),
            good: size as f64 >= threshold,
        }
    })
}

/// `I_1(μ) = ∫∫ |z - w|^{-1} dμ dμ` for the normalised area measure on the
/// union of the cells.
///
/// Distinct cells interact through their centres; each cell contributes
/// its own closed-form self energy.
pub fn riesz_energy(family: &CellFamily) -> f64 {
    let total: f64 = family.cells.iter().map(Cell::area).sum();
    let mass: Vec<f64> = family.cells.iter().map(|c| c.area() / total).collect();
    let centers: Vec<[f64; 2]> = family.cells.iter().map(Cell::center).collect();
    let rows = par::map_range(family.len(), |i| {
        let mut s = mass[i] * mass[i] * family.cells[i].self_energy();
        let [x, y] = centers[i];
        for j in i + 1..centers.len() {
            let d = (centers[j][0] - x).hypot(centers[j][1] - y);
            s += 2.0 * mass[i] * mass[j] / d;
        }
        s
    });
    rows.iter().sum()
}

/// Least-squares slope of `log I_1` against `log ρ` across families.
pub fn energy_exponent(families: &[CellFamily]) -> Result<f64> {
    if families.len() < 2 {
        return Err(Error::domain("need at least two families"));
    }
    let pts: Vec<(f64, f64)> = families
        .iter()
        .map(|f| (f.rho.ln(), riesz_energy(f).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
