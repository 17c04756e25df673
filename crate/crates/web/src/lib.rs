//! Browser bindings: sum dimension measurement, the product-square figure
//! and a planar projection profile.

use resonance_core::boxdim::{estimate_dimension, ladder_base, sum_series, ScaleWindow};
use resonance_core::cli::regular_planar;
use resonance_core::planar::{
    dense_rotation_check, projection_profile as profile, render_svg, PlanarWindow, RenderOptions,
    RenderTarget,
};
use resonance_core::resonance::check_pair;
use resonance_core::{central_cantor, Budget, Mode, Scalar};
use serde::Serialize;
use wasm_bindgen::prelude::*;

// Keeps a browser tab responsive.
const WEB_BUDGET: Budget = Budget {
    max_cells: 2_000_000,
    max_pairs: 50_000_000,
    max_tree_nodes: 100_000,
};

#[derive(Serialize)]
struct SumRow {
    k: u32,
    delta: f64,
    count: u64,
}

#[derive(Serialize)]
struct SumResult {
    rows: Vec<SumRow>,
    slope: f64,
    stderr: f64,
    dimension_sum: f64,
    resonant: bool,
}

fn text_err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Box-counting slope of `C_a + s·C_b` as JSON.
pub fn sum_dimension_json(
    a: &str,
    b: &str,
    s: &str,
    k_min: u32,
    k_max: u32,
) -> Result<String, String> {
    let left =
        central_cantor(Scalar::parse(a, Mode::Exact).map_err(text_err)?).map_err(text_err)?;
    let right =
        central_cantor(Scalar::parse(b, Mode::Exact).map_err(text_err)?).map_err(text_err)?;
    let s = Scalar::parse(s, Mode::Exact).map_err(text_err)?;
    let base = ladder_base(&[&left, &right]).map_err(text_err)?;
    let window = ScaleWindow::new(base, k_min, k_max).map_err(text_err)?;
    let series = sum_series(&left, &right, &s, &window, &WEB_BUDGET).map_err(text_err)?;
    let est = estimate_dimension(&series).map_err(text_err)?;
    let verdict = check_pair(&left, &right, 1_000_000, 1e-12).map_err(text_err)?;
    let out = SumResult {
        rows: series
            .rows
            .iter()
            .map(|r| SumRow {
                k: r.k,
                delta: r.delta.to_f64(),
                count: r.count,
            })
            .collect(),
        slope: est.value,
        stderr: est.stderr,
        dimension_sum: left.similarity_dimension() + right.similarity_dimension(),
        resonant: verdict.resonant,
    };
    serde_json::to_string(&out).map_err(text_err)
}

/// SVG of the cylinder squares of `C_a × C_b` up to `depth`.
pub fn product_svg(a: &str, b: &str, depth: u32) -> Result<String, String> {
    let left =
        central_cantor(Scalar::parse(a, Mode::Exact).map_err(text_err)?).map_err(text_err)?;
    let right =
        central_cantor(Scalar::parse(b, Mode::Exact).map_err(text_err)?).map_err(text_err)?;
    let opts = RenderOptions {
        budget: WEB_BUDGET,
        highlight: true,
    };
    Ok(
        render_svg(RenderTarget::Product(&left, &right), depth, &opts)
            .map_err(text_err)?
            .svg,
    )
}

#[derive(Serialize)]
struct ProfilePoint {
    xi: f64,
    value: f64,
}

#[derive(Serialize)]
struct ProfileResult {
    points: Vec<ProfilePoint>,
    similarity_dimension: f64,
    dense: bool,
    svg: String,
}

/// Projection profile of `n` maps of ratio `ζ` rotating by `θ = t·π`,
/// placed on a regular polygon, plus a picture of the attractor.
pub fn projection_profile_json(
    n: u32,
    zeta: f64,
    theta_over_pi: f64,
    xi_steps: u32,
    k_min: u32,
    k_max: u32,
) -> Result<String, String> {
    let ifs =
        regular_planar(n as usize, zeta, theta_over_pi * std::f64::consts::PI).map_err(text_err)?;
    let window = PlanarWindow::for_system(&ifs, k_min, k_max).map_err(text_err)?;
    let p = profile(&ifs, xi_steps as usize, &window, &WEB_BUDGET).map_err(text_err)?;
    let depth = ((20_000f64).ln() / (n.max(2) as f64).ln()).floor().min(8.0) as u32;
    let svg = render_svg(RenderTarget::Planar(&ifs), depth, &RenderOptions::default())
        .map_err(text_err)?
        .svg;
    let out = ProfileResult {
        points: p
            .rows
            .iter()
            .map(|r| ProfilePoint {
                xi: r.xi,
                value: r.estimate.value,
            })
            .collect(),
        similarity_dimension: ifs.similarity_dimension(),
        dense: matches!(
            dense_rotation_check(&ifs, 1_000_000, 1e-12),
            resonance_core::planar::RotationVerdict::Dense { .. }
        ),
        svg,
    };
    serde_json::to_string(&out).map_err(text_err)
}

#[wasm_bindgen]
pub fn sum_dimension(a: &str, b: &str, s: &str, k_min: u32, k_max: u32) -> Result<String, JsValue> {
    sum_dimension_json(a, b, s, k_min, k_max).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn render_product_svg(a: &str, b: &str, depth: u32) -> Result<String, JsValue> {
    product_svg(a, b, depth).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn projection_profile(
    n: u32,
    zeta: f64,
    theta_over_pi: f64,
    xi_steps: u32,
    k_min: u32,
    k_max: u32,
) -> Result<String, JsValue> {
    projection_profile_json(n, zeta, theta_over_pi, xi_steps, k_min, k_max)
        .map_err(|e| JsValue::from_str(&e))
}
