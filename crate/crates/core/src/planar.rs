//! Planar self-similar sets with rotations: ball covers, projection
//! profiles, the dense-rotation check and SVG figures.

use std::fmt::Write as _;

use num::integer::Integer;
use serde::Serialize;

use crate::boxdim::{
    box_count, cylinders_at_scale, estimate_dimension, BoxCountRow, BoxCountSeries, Cover1D,
    DimensionEstimate,
};
use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::ifs::{normalize_angle, Ifs1d, Ifs2d, Similitude2d, Word, PLANAR_TOL};
use crate::par;
use crate::resonance::{exact_common_base, float_relation};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum RotationVerdict {
    /// Some generated rotation angle has no rational witness `θ/π = p/q`
    /// with `q ≤ q_max`.
    Dense { angle: f64, word: Word },
    /// No reflections and every rotation angle is a rational multiple of π.
    NotDense,
    /// Reflections present and no irrational angle among words of length
    /// at most 2.
    Inconclusive,
}

/// Rotation parts of the generators and of reflection pairs.
pub fn generated_rotations(ifs: &Ifs2d) -> Vec<(Word, f64)> {
    let maps = ifs.maps();
    let mut out: Vec<(Word, f64)> = maps
        .iter()
        .enumerate()
        .filter(|(_, m)| !m.reflect)
        .map(|(i, m)| (Word(vec![i]), m.angle))
        .collect();
    let refl: Vec<usize> = (0..maps.len()).filter(|&i| maps[i].reflect).collect();
    for (x, &i) in refl.iter().enumerate() {
        for &j in &refl[x + 1..] {
            out.push((Word(vec![i, j]), maps[i].compose(&maps[j]).angle));
        }
    }
    out
}

fn is_rational_turn(angle: f64, q_max: i64, tol: f64) -> bool {
    let a = normalize_angle(angle);
    let pi = std::f64::consts::PI;
    if a <= tol || std::f64::consts::TAU - a <= tol {
        return true;
    }
    float_relation(a, pi, q_max, tol).is_some()
}

pub fn dense_rotation_check(ifs: &Ifs2d, q_max: i64, tol: f64) -> RotationVerdict {
    for (word, angle) in generated_rotations(ifs) {
        if !is_rational_turn(angle, q_max, tol) {
            return RotationVerdict::Dense { angle, word };
        }
    }
    if ifs.maps().iter().any(|m| m.reflect) {
        RotationVerdict::Inconclusive
    } else {
        RotationVerdict::NotDense
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ball {
    pub word: Word,
    pub center: [f64; 2],
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        (p[0] - self.center[0]).hypot(p[1] - self.center[1]) <= self.radius + PLANAR_TOL
    }
}

/// Balls `f_u(B)` refined until their radius is at most `δ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallCover {
    pub delta: f64,
    pub balls: Vec<Ball>,
}

impl BallCover {
    pub fn len(&self) -> usize {
        self.balls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.balls.is_empty()
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.balls.iter().any(|b| b.contains(p))
    }

    /// Projection onto the direction `(cos ξ, sin ξ)` as intervals.
    pub fn project(&self, xi: f64) -> Vec<(f64, f64)> {
        let (s, c) = xi.sin_cos();
        self.balls
            .iter()
            .map(|b| {
                let m = b.center[0] * c + b.center[1] * s;
                (m - b.radius, m + b.radius)
            })
            .collect()
    }
}

pub fn ball_cover(ifs: &Ifs2d, delta: f64, budget: &Budget) -> Result<BallCover> {
    let r0 = ifs.radius();
    if !(delta > 0.0 && delta <= r0 * (1.0 + PLANAR_TOL)) {
        return Err(Error::domain(format!(
            "scale {delta} must lie in (0, {r0}]"
        )));
    }
    let stop = delta * (1.0 + PLANAR_TOL);
    let mut balls = Vec::new();
    let mut stack = vec![(Word::empty(), Similitude2d::identity())];
    while let Some((w, f)) = stack.pop() {
        if f.scale * r0 <= stop {
            if balls.len() as u64 >= budget.max_cells {
                return Err(Error::resource(
                    "planar ball cover",
                    "max_cells",
                    budget.max_cells,
                ));
            }
            balls.push(Ball {
                center: f.apply(ifs.center()),
                radius: f.scale * r0,
                word: w,
            });
            continue;
        }
        // Reverse push keeps the output in lexicographic word order.
        for (i, g) in ifs.maps().iter().enumerate().rev() {
            stack.push((w.push(i), f.compose(g)));
        }
    }
    Ok(BallCover { delta, balls })
}

/// Planar scale ladder `δ_k = R · base^{-k}`: `base = 1/ζ` for a common
/// ratio `ζ`, otherwise 2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanarWindow {
    pub base: f64,
    pub k_min: u32,
    pub k_max: u32,
}

impl PlanarWindow {
    pub fn new(base: f64, k_min: u32, k_max: u32) -> Result<PlanarWindow> {
        if !(base > 1.0) || k_min >= k_max {
            return Err(Error::domain(format!(
                "invalid planar window base {base}, k {k_min}..{k_max}"
            )));
        }
        Ok(PlanarWindow { base, k_min, k_max })
    }

    pub fn for_system(ifs: &Ifs2d, k_min: u32, k_max: u32) -> Result<PlanarWindow> {
        let z = ifs.maps()[0].scale;
        let homogeneous = ifs.maps().iter().all(|m| (m.scale - z).abs() <= 1e-12 * z);
        PlanarWindow::new(if homogeneous { 1.0 / z } else { 2.0 }, k_min, k_max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub xi: f64,
    pub estimate: DimensionEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionProfile {
    pub rows: Vec<ProfileRow>,
}

impl ProjectionProfile {
    pub fn min(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.estimate.value)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.estimate.value)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Writes `xi, dim_estimate, stderr` rows.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> std::result::Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["xi", "dim_estimate", "stderr"])?;
        for r in &self.rows {
            w.write_record([
                format!("{:.12}", r.xi),
                format!("{:.12}", r.estimate.value),
                format!("{:.6e}", r.estimate.stderr),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Box-counting slope of `P_ξ(E)` for `ξ = iπ/steps`, `0 ≤ i < steps`.
pub fn projection_profile(
    ifs: &Ifs2d,
    xi_steps: usize,
    window: &PlanarWindow,
    budget: &Budget,
) -> Result<ProjectionProfile> {
    if xi_steps < 4 {
        return Err(Error::domain("need at least 4 directions"));
    }
    let covers = (window.k_min..=window.k_max)
        .map(|k| {
            let delta = ifs.radius() * window.base.powi(-(k as i32));
            ball_cover(ifs, delta, budget).map(|c| (k, c))
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = par::map_range(xi_steps, |i| {
        let xi = i as f64 * std::f64::consts::PI / xi_steps as f64;
        let mut series = Vec::with_capacity(covers.len());
        for (k, cover) in &covers {
            let c = Cover1D::from_float(cover.delta, cover.project(xi))?;
            let d = Scalar::float(cover.delta);
            series.push(BoxCountRow {
                k: *k,
                count: box_count(&c, &d)?,
                delta: d,
            });
        }
        Ok(ProfileRow {
            xi,
            estimate: estimate_dimension(&BoxCountSeries::new(series)?)?,
        })
    });
    Ok(ProjectionProfile {
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}

pub enum RenderTarget<'a> {
    Planar(&'a Ifs2d),
    /// `K × K'`, drawn with cylinder rectangles.
    Product(&'a Ifs1d, &'a Ifs1d),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub budget: Budget,
    /// Colour product rectangles whose diagonal projections coincide.
    pub highlight: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            budget: Budget::default(),
            highlight: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rendered {
    pub svg: String,
    /// Per level `1..=depth`: pairs of product rectangles with equal
    /// projection onto the diagonal. Empty for planar targets.
    pub colored_pairs: Vec<usize>,
}

const VIEW: f64 = 1000.0;
const COLORS: [&str; 2] = ["#111111", "#f2f2f2"];

fn svg_open(out: &mut String) {
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{VIEW}\" height=\"{VIEW}\" viewBox=\"0 0 {VIEW} {VIEW}\">"
    );
    let _ = writeln!(
        out,
        "<rect x=\"0\" y=\"0\" width=\"{VIEW}\" height=\"{VIEW}\" fill=\"white\"/>"
    );
}

/// Side of the level-1 squares: `c^{-lcm(m, n)}` when the ratios are
/// `c^{-m}` and `c^{-n}`, otherwise the larger ratio.
fn product_level_ratio(left: &Ifs1d, right: &Ifs1d) -> Result<Scalar> {
    let (a, b) = (left.common_ratio(), right.common_ratio());
    if let (Some(a), Some(b)) = (&a, &b) {
        if let (Some(x), Some(y)) = (a.abs().as_exact().cloned(), b.abs().as_exact().cloned()) {
            if let Some(c) = exact_common_base(&[x.clone(), y.clone()])? {
                let c = Scalar::Exact(c);
                let exponent = |r: &num::BigRational| {
                    let mut e = 0i32;
                    let mut p = Scalar::int(1);
                    while p.as_exact().expect("exact") > r {
                        p = p / &c;
                        e += 1;
                    }
                    e
                };
                let l = exponent(&x).lcm(&exponent(&y));
                return Ok(c.powi(-l));
            }
        }
    }
    Ok(left.max_abs_ratio().max(right.max_abs_ratio()))
}

fn render_product(
    left: &Ifs1d,
    right: &Ifs1d,
    depth: u32,
    opts: &RenderOptions,
) -> Result<Rendered> {
    if left.mode() != right.mode() {
        return Err(Error::MixedMode(
            "product factors use different backends".into(),
        ));
    }
    let rho = product_level_ratio(left, right)?;
    let (hx, hy) = (left.hull(), right.hull());
    let (x0, wx) = (hx.lo.to_f64(), hx.length().to_f64());
    let (y0, wy) = (hy.lo.to_f64(), hy.length().to_f64());
    let px = |x: f64| (x - x0) / wx * VIEW;
    let py = |y: f64| VIEW - (y - y0) / wy * VIEW;
    let mut svg = String::new();
    svg_open(&mut svg);
    let _ = writeln!(svg, "<rect x=\"0\" y=\"0\" width=\"{VIEW}\" height=\"{VIEW}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>");
    let mut colored_pairs = Vec::new();
    for j in 1..=depth {
        let delta = rho.powi(j as i32);
        let cx = cylinders_at_scale(left, &delta, &opts.budget)?;
        let cy = cylinders_at_scale(right, &delta, &opts.budget)?;
        let cells = cx.len() as u64 * cy.len() as u64;
        if cells > opts.budget.max_cells {
            return Err(Error::resource(
                format!("{cells} product cells at level {j}"),
                "max_cells",
                opts.budget.max_cells,
            ));
        }
        // (projection lo, projection hi, x index, y index)
        let mut rects: Vec<(Scalar, Scalar, usize, usize)> = Vec::with_capacity(cells as usize);
        for (i, a) in cx.iter().enumerate() {
            for (k, b) in cy.iter().enumerate() {
                let lo = &a.interval.lo + &b.interval.lo;
                let hi = &a.interval.hi + &b.interval.hi;
                rects.push((lo, hi, i, k));
            }
        }
        rects.sort_by(|p, q| p.partial_cmp(q).expect("same backend"));
        let mut fill = vec![None; rects.len()];
        let mut pairs = 0;
        let mut start = 0;
        while start < rects.len() {
            let mut end = start + 1;
            while end < rects.len()
                && rects[end].0 == rects[start].0
                && rects[end].1 == rects[start].1
            {
                end += 1;
            }
            let n = end - start;
            if n > 1 {
                pairs += n * (n - 1) / 2;
                for (slot, f) in fill[start..end].iter_mut().enumerate() {
                    *f = Some(COLORS[(slot > 0) as usize]);
                }
            }
            start = end;
        }
        colored_pairs.push(pairs);
        let stroke = (2.0 / j as f64).max(0.3);
        let _ = writeln!(
            svg,
            "<g id=\"level-{j}\" stroke=\"#555555\" stroke-width=\"{stroke:.3}\">"
        );
        for ((_, _, i, k), f) in rects.iter().zip(&fill) {
            let (a, b) = (&cx[*i].interval, &cy[*k].interval);
            let (xa, xb) = (px(a.lo.to_f64()), px(a.hi.to_f64()));
            let (ya, yb) = (py(b.hi.to_f64()), py(b.lo.to_f64()));
            let color = match f {
                Some(c) if opts.highlight => c,
                _ => "none",
            };
            let _ = writeln!(
                svg,
                "<rect x=\"{xa:.4}\" y=\"{ya:.4}\" width=\"{:.4}\" height=\"{:.4}\" fill=\"{color}\"/>",
                xb - xa,
                yb - ya
            );
        }
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    Ok(Rendered { svg, colored_pairs })
}

fn render_planar(ifs: &Ifs2d, depth: u32, opts: &RenderOptions) -> Result<Rendered> {
    let n = (ifs.len() as f64).powi(depth as i32);
    if n > opts.budget.max_cells as f64 {
        return Err(Error::resource(
            format!("{n} balls at depth {depth}"),
            "max_cells",
            opts.budget.max_cells,
        ));
    }
    let (c, r) = (ifs.center(), ifs.radius());
    let scale = VIEW / (2.0 * r);
    let px = |x: f64| (x - c[0] + r) * scale;
    let py = |y: f64| VIEW - (y - c[1] + r) * scale;
    let mut svg = String::new();
    svg_open(&mut svg);
    let _ = writeln!(
        svg,
        "<circle cx=\"{:.4}\" cy=\"{:.4}\" r=\"{:.4}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>",
        px(c[0]),
        py(c[1]),
        r * scale
    );
    let mut frontier = vec![Similitude2d::identity()];
    for _ in 0..depth {
        frontier = frontier
            .iter()
            .flat_map(|f| ifs.maps().iter().map(move |g| f.compose(g)))
            .collect();
    }
    if depth > 0 {
        svg.push_str("<g fill=\"#111111\" stroke=\"none\">\n");
        for f in &frontier {
            let p = f.apply(c);
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.4}\" cy=\"{:.4}\" r=\"{:.4}\"/>",
                px(p[0]),
                py(p[1]),
                f.scale * r * scale
            );
        }
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    Ok(Rendered {
        svg,
        colored_pairs: Vec::new(),
    })
}

/// SVG 1.1 figure of the target at the given depth on a 1000×1000
/// viewport with the y-axis pointing up.
pub fn render_svg(target: RenderTarget<'_>, depth: u32, opts: &RenderOptions) -> Result<Rendered> {
    match target {
        RenderTarget::Planar(ifs) => render_planar(ifs, depth, opts),
        RenderTarget::Product(a, b) => render_product(a, b, depth, opts),
    }
}
