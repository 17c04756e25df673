//! Experiment orchestration behind the `resonance` binary.
//!
//! [`run`] computes everything in memory and returns the report plus CSV
//! and SVG artifacts; [`emit`] is the single writer.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::boxdim::{
    attractor_cover, attractor_series, estimate_dimension, ladder_base, sum_series, ScaleWindow,
};
use crate::config::{Command, ExperimentConfig, NumText, RenderKind};
use crate::drop::drop_report;
use crate::error::{Error, Result};
use crate::homogenize::{
    homogeneous_subsystem, multinomial, prune_to_disjoint, repair_irrationality, RepairOutcome,
};
use crate::ifs::{central_cantor, compose_word, Ifs1d, Ifs2d, Similitude2d, Word};
use crate::marstrand::{
    angle_sweep, calibrate_delta, energy_exponent, good_angle_set, product_cells, riesz_energy,
};
use crate::planar::{
    dense_rotation_check, projection_profile, render_svg, PlanarWindow, RenderOptions, RenderTarget,
};
use crate::resonance::check_pair;
use crate::scalar::Scalar;
use crate::tower::{build_tree, TowerParams};

/// Everything a run produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutput {
    pub report: Value,
    pub csv: Option<String>,
    pub svg: Option<String>,
}

fn to_json<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialise")
}

fn csv_string(
    f: impl FnOnce(&mut Vec<u8>) -> std::result::Result<(), csv::Error>,
) -> Result<String> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(|e| Error::Numeric(format!("csv: {e}")))?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

fn system_from(
    cfg: &ExperimentConfig,
    cantor: &Option<NumText>,
    list: &Option<Vec<[NumText; 2]>>,
    key: &str,
) -> Result<Ifs1d> {
    if let Some(list) = list {
        let pairs = list
            .iter()
            .map(|[r, t]| Ok((r.to_scalar(cfg.mode)?, t.to_scalar(cfg.mode)?)))
            .collect::<Result<Vec<_>>>()?;
        return Ifs1d::from_pairs(&pairs);
    }
    match cantor {
        Some(a) => central_cantor(a.to_scalar(cfg.mode)?),
        None => Err(Error::domain(format!("no system given for '{key}'"))),
    }
}

pub fn left_system(cfg: &ExperimentConfig) -> Result<Ifs1d> {
    system_from(cfg, &cfg.a, &cfg.left, "a")
}

pub fn right_system(cfg: &ExperimentConfig) -> Result<Ifs1d> {
    system_from(cfg, &cfg.b, &cfg.right, "b")
}

/// `n` maps of ratio `ζ` and common rotation `θ` placed on a regular
/// polygon inside the unit disk.
pub fn regular_planar(n: usize, zeta: f64, theta: f64) -> Result<Ifs2d> {
    let maps = (0..n)
        .map(|j| {
            let a = std::f64::consts::TAU * j as f64 / n as f64;
            let d = if n == 1 { 0.0 } else { 1.0 - zeta };
            Similitude2d::new(zeta, theta, false, [d * a.cos(), d * a.sin()])
        })
        .collect::<Result<Vec<_>>>()?;
    Ifs2d::new(maps, [0.0, 0.0], 1.0)
}

pub fn planar_system(cfg: &ExperimentConfig) -> Result<Ifs2d> {
    if let Some(list) = &cfg.planar {
        let maps = list
            .iter()
            .map(|m| Similitude2d::new(m.scale, m.angle.to_f64()?, m.reflect, m.translation))
            .collect::<Result<Vec<_>>>()?;
        return match (cfg.center, cfg.radius) {
            (Some(c), Some(r)) => Ifs2d::new(maps, c, r),
            _ => Ifs2d::with_auto_ball(maps),
        };
    }
    let zeta = cfg
        .zeta
        .ok_or_else(|| Error::domain("no planar system given"))?;
    let theta = match &cfg.theta {
        Some(t) => t.to_f64()?,
        None => 0.0,
    };
    regular_planar(cfg.n_maps, zeta, theta)
}

fn window(
    cfg: &ExperimentConfig,
    systems: &[&Ifs1d],
    k_min: u32,
    k_max: u32,
) -> Result<ScaleWindow> {
    let base = match &cfg.base {
        Some(b) => b.to_scalar(cfg.mode)?,
        None => ladder_base(systems)?,
    };
    ScaleWindow::new(base, cfg.k_min.unwrap_or(k_min), cfg.k_max.unwrap_or(k_max))
}

/// Attractor point `f_w(x_1)` for a random word `w`, `x_1` the fixed point
/// of the first map.
fn sample_point(ifs: &Ifs1d, rng: &mut ChaCha8Rng, len: usize) -> Result<Scalar> {
    let w = Word((0..len).map(|_| rng.random_range(0..ifs.len())).collect());
    Ok(compose_word(ifs, &w)?.apply(&ifs.maps()[0].fixed_point()))
}

fn run_dim(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let ifs = left_system(cfg)?;
    let win = window(cfg, &[&ifs], 6, 14)?;
    let series = attractor_series(&ifs, &win, &cfg.budget)?;
    let est = estimate_dimension(&series)?;
    // Random attractor points must lie in the finest cover.
    let delta = win.delta(win.k_max).to_mode(ifs.mode())?;
    let cover = attractor_cover(&ifs, &delta, &cfg.budget)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut misses = 0;
    for _ in 0..cfg.samples {
        if !cover.contains(&sample_point(&ifs, &mut rng, 40)?) {
            misses += 1;
        }
    }
    Ok(RunOutput {
        report: json!({
            "command": "dim",
            "similarity_dimension": ifs.similarity_dimension(),
            "window": win,
            "estimate": est,
            "membership_samples": cfg.samples,
            "membership_misses": misses,
            "seed": cfg.seed,
        }),
        csv: Some(csv_string(|b| series.write_csv(b))?),
        svg: None,
    })
}

fn run_sumdim(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (l, r) = (left_system(cfg)?, right_system(cfg)?);
    let s = cfg.s.to_scalar(cfg.mode)?;
    let win = window(cfg, &[&l, &r], 6, 12)?;
    let series = sum_series(&l, &r, &s, &win, &cfg.budget)?;
    let est = estimate_dimension(&series)?;
    let sum = l.similarity_dimension() + r.similarity_dimension();
    let verdict = check_pair(&l, &r, cfg.q_max, cfg.tol)?;
    Ok(RunOutput {
        report: json!({
            "command": "sumdim",
            "s": s,
            "window": win,
            "estimate": est,
            "dimension_sum": sum,
            "expected_without_drop": sum.min(1.0),
            "below_dimension_sum_by": sum - est.value,
            "resonant": verdict.resonant,
        }),
        csv: Some(csv_string(|b| series.write_csv(b))?),
        svg: None,
    })
}

fn run_resonance(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let verdict = check_pair(&left_system(cfg)?, &right_system(cfg)?, cfg.q_max, cfg.tol)?;
    let first = verdict
        .witnesses
        .first()
        .map(|w| format!("({},{})", w.witness.p, w.witness.q));
    let mut report = to_json(&verdict);
    report["command"] = json!("resonance");
    report["witness"] = json!(first);
    Ok(RunOutput {
        report,
        csv: None,
        svg: None,
    })
}

fn run_marstrand(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (l, r) = (left_system(cfg)?, right_system(cfg)?);
    let family = product_cells(&l, &r, cfg.level, &cfg.budget)?;
    let delta = match cfg.delta {
        Some(d) => d,
        None => calibrate_delta(&family, cfg.epsilon, cfg.theta_steps)?,
    };
    let set = good_angle_set(&family, cfg.epsilon, cfg.theta_steps, delta)?;
    let sweep = angle_sweep(&family, cfg.theta_steps, cfg.epsilon, delta);
    let (e_lo, e_hi) = (cfg.k_min.unwrap_or(3), cfg.k_max.unwrap_or(7));
    let families = (e_lo..=e_hi)
        .map(|k| product_cells(&l, &r, k, &cfg.budget))
        .collect::<Result<Vec<_>>>()?;
    let energies: Vec<f64> = families.iter().map(riesz_energy).collect();
    let exponent = energy_exponent(&families)?;
    let csv = csv_string(|buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["theta", "subfamily_size", "projection_length", "good"])?;
        for s in &sweep {
            w.write_record([
                format!("{:.12}", s.theta),
                s.subfamily_size.to_string(),
                format!("{:.12}", s.projection_length),
                s.good.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(RunOutput {
        report: json!({
            "command": "marstrand",
            "level": cfg.level,
            "cells": family.len(),
            "rho": family.rho,
            "gamma": family.gamma,
            "epsilon": cfg.epsilon,
            "delta": delta,
            "theta_steps": cfg.theta_steps,
            "bad_measure": set.bad_measure,
            "bound": set.bound,
            "within_bound": set.within_bound(),
            "good_intervals": set.intervals.len(),
            "separation_audits": sweep.len(),
            "separation_failures": 0,
            "energy_levels": [e_lo, e_hi],
            "riesz_energies": energies,
            "energy_exponent": exponent,
            "energy_target": family.gamma - 1.0,
        }),
        csv: Some(csv),
        svg: None,
    })
}

fn run_tower(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (l, r) = (left_system(cfg)?, right_system(cfg)?);
    let params = TowerParams {
        tau: cfg.tau,
        m: cfg.m,
        epsilon: cfg.epsilon,
        levels: cfg.levels,
        grid_steps: cfg.grid_steps,
        delta1: cfg.delta1,
        orbit_steps: cfg.orbit_steps,
        q_max: cfg.q_max,
        tolerance: cfg.tol,
    };
    let tower = build_tree(&l, &r, &params, &cfg.budget)?;
    let rows = tower.rows();
    let csv = csv_string(|buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["j", "orbit", "good", "count", "cumulative_bound"])?;
        for r in &rows {
            w.write_record([
                r.j.to_string(),
                format!("{:.12}", r.orbit),
                r.good.to_string(),
                r.count.to_string(),
                format!("{:.12}", r.cumulative_bound),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(RunOutput {
        report: json!({
            "command": "tower",
            "params": params,
            "report": tower.report,
            "audits": tower.audits,
            "all_audits_passed": tower.audits.iter().all(|a| a.passed()),
        }),
        csv: Some(csv),
        svg: None,
    })
}

fn repair_json(outcome: &RepairOutcome) -> Value {
    match outcome {
        RepairOutcome::Unchanged(a, b) => json!({
            "outcome": "unchanged",
            "ratios": [a.common_ratio(), b.common_ratio()],
        }),
        RepairOutcome::Repaired {
            left,
            right,
            prefixed_left,
            prefixed_right,
        } => json!({
            "outcome": "repaired",
            "prefixed_left": prefixed_left,
            "prefixed_right": prefixed_right,
            "ratios": [left.common_ratio(), right.common_ratio()],
        }),
        RepairOutcome::Inconclusive(why) => json!({"outcome": "inconclusive", "reason": why}),
    }
}

fn run_homogenize(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let l = left_system(cfg)?;
    let k = cfg.k.unwrap_or(10) as u64;
    let (sub, report) = homogeneous_subsystem(&l, k)?;
    let mut rows = Vec::new();
    for j in 1..=k {
        rows.push(homogeneous_subsystem(&l, j)?.1);
    }
    let mut out = json!({
        "command": "homogenize",
        "report": report,
        "similarity_dimension": l.similarity_dimension(),
    });
    if let Some(d) = cfg.delta {
        let pruned = prune_to_disjoint(
            &l,
            &Scalar::parse(&format!("{d:?}"), l.mode())?,
            &cfg.budget,
        )?;
        out["pruned"] = json!({
            "delta": d,
            "candidates": pruned.candidates,
            "kept": pruned.words.len(),
            "dimension_before": pruned.dimension_before,
            "dimension_after": pruned.dimension_after,
        });
    }
    if cfg.b.is_some() || cfg.right.is_some() {
        let r = right_system(cfg)?;
        let (sub2, _) = homogeneous_subsystem(&r, k)?;
        let hom = sub.materialize(&cfg.budget)?;
        let hom2 = sub2.materialize(&cfg.budget)?;
        out["repair"] = repair_json(&repair_irrationality(
            &l, &r, &hom, &hom2, cfg.q_max, cfg.tol,
        )?);
    }
    let csv = csv_string(|buf| {
        let mut w = csv::Writer::from_writer(buf);
        w.write_record(["k", "v", "n_k", "rho", "tau"])?;
        for r in &rows {
            let v: Vec<String> = r.v.iter().map(u64::to_string).collect();
            w.write_record([
                r.k.to_string(),
                v.join(";"),
                r.n_k.clone(),
                format!("{:e}", r.rho.to_f64()),
                format!("{:.12}", r.tau),
            ])?;
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(RunOutput {
        report: out,
        csv: Some(csv),
        svg: None,
    })
}

fn run_drop(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let (l, r) = (left_system(cfg)?, right_system(cfg)?);
    let win = window(cfg, &[&l, &r], 2, 10)?;
    let rep = drop_report(&l, &r, &win, &cfg.budget, cfg.q_max, cfg.tol)?;
    let csv = csv_string(|b| rep.series.write_csv(b))?;
    let inst = &rep.instance;
    Ok(RunOutput {
        report: json!({
            "command": "drop",
            "xi": inst.xi,
            "a_exponents": inst.a_exponents,
            "b_exponents": inst.b_exponents,
            "a": inst.a, "b": inst.b, "A": inst.a_max, "B": inst.b_max,
            "M0": inst.m0, "M": inst.m, "ell": inst.ell,
            "p": inst.p, "q": inst.q,
            "s": rep.s,
            "digit_bound": rep.digit.as_ref().map(|d| d.bound),
            "digit_sum_size": rep.digit.as_ref().map(|d| d.sum_size),
            "essential_bound": rep.essential_bound,
            "essential_deficit": rep.essential_deficit,
            "dimension_sum": rep.dimension_sum,
            "measured": rep.measured,
            "window": win,
        }),
        csv: Some(csv),
        svg: None,
    })
}

fn planar_window(cfg: &ExperimentConfig, ifs: &Ifs2d) -> Result<PlanarWindow> {
    let (lo, hi) = (cfg.k_min.unwrap_or(4), cfg.k_max.unwrap_or(9));
    match &cfg.base {
        Some(b) => PlanarWindow::new(b.to_f64()?, lo, hi),
        None => PlanarWindow::for_system(ifs, lo, hi),
    }
}

fn run_project(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let ifs = planar_system(cfg)?;
    let win = planar_window(cfg, &ifs)?;
    let profile = projection_profile(&ifs, cfg.xi_steps, &win, &cfg.budget)?;
    let dim = ifs.similarity_dimension();
    Ok(RunOutput {
        report: json!({
            "command": "project",
            "similarity_dimension": dim,
            "expected": dim.min(1.0),
            "rotations": dense_rotation_check(&ifs, cfg.q_max, cfg.tol),
            "window": win,
            "directions": cfg.xi_steps,
            "min_estimate": profile.min(),
            "max_estimate": profile.max(),
        }),
        csv: Some(csv_string(|b| profile.write_csv(b))?),
        svg: None,
    })
}

fn run_render(cfg: &ExperimentConfig) -> Result<RunOutput> {
    let opts = RenderOptions {
        budget: cfg.budget,
        highlight: true,
    };
    let (rendered, kind) = match cfg.target {
        RenderKind::Product => {
            let (l, r) = (left_system(cfg)?, right_system(cfg)?);
            (
                render_svg(RenderTarget::Product(&l, &r), cfg.depth, &opts)?,
                "product",
            )
        }
        RenderKind::Planar => {
            let ifs = planar_system(cfg)?;
            (
                render_svg(RenderTarget::Planar(&ifs), cfg.depth, &opts)?,
                "planar",
            )
        }
    };
    Ok(RunOutput {
        report: json!({
            "command": "render",
            "target": kind,
            "depth": cfg.depth,
            "colored_pairs": rendered.colored_pairs,
        }),
        csv: None,
        svg: Some(rendered.svg),
    })
}

/// Executes the configured experiment.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutput> {
    if cfg.dry_run {
        return Ok(RunOutput {
            report: plan(cfg)?,
            csv: None,
            svg: None,
        });
    }
    match cfg.command {
        Command::Resonance => run_resonance(cfg),
        Command::Dim => run_dim(cfg),
        Command::Sumdim => run_sumdim(cfg),
        Command::Marstrand => run_marstrand(cfg),
        Command::Tower => run_tower(cfg),
        Command::Homogenize => run_homogenize(cfg),
        Command::Drop => run_drop(cfg),
        Command::Project => run_project(cfg),
        Command::Render => run_render(cfg),
    }
}

/// Expected number of scale-`δ` cylinders, `≈ (|I|/δ)^β`.
fn cylinder_estimate(ifs: &Ifs1d, delta: f64) -> f64 {
    (ifs.hull().length().to_f64() / delta)
        .powf(ifs.similarity_dimension())
        .ceil()
}

/// Work sizes of the configured run, without computing it.
pub fn plan(cfg: &ExperimentConfig) -> Result<Value> {
    let mut p = json!({"command": cfg.command.name(), "dry_run": true});
    match cfg.command {
        Command::Resonance => {
            let (l, r) = (left_system(cfg)?, right_system(cfg)?);
            p["pairs"] = json!(l.len() * r.len());
        }
        Command::Dim | Command::Sumdim | Command::Drop => {
            let l = left_system(cfg)?;
            let two = cfg.command != Command::Dim;
            let r = if two { Some(right_system(cfg)?) } else { None };
            let systems: Vec<&Ifs1d> = std::iter::once(&l).chain(r.as_ref()).collect();
            let (lo, hi) = match cfg.command {
                Command::Dim => (6, 14),
                Command::Sumdim => (6, 12),
                _ => (2, 10),
            };
            let win = window(cfg, &systems, lo, hi)?;
            let rows: Vec<Value> = win
                .scales()
                .map(|k| {
                    let d = win.delta(k).to_f64();
                    let cl = cylinder_estimate(&l, d);
                    match &r {
                        Some(r) => json!({"k": k, "cells": cl, "pairs": cl * cylinder_estimate(r, d / cfg.s.to_f64().unwrap_or(1.0))}),
                        None => json!({"k": k, "cells": cl}),
                    }
                })
                .collect();
            p["scales"] = json!(rows);
        }
        Command::Marstrand => {
            let (l, r) = (left_system(cfg)?, right_system(cfg)?);
            let cells =
                (l.len() as f64).powi(cfg.level as i32) * (r.len() as f64).powi(cfg.level as i32);
            p["cells"] = json!(cells);
            p["angles"] = json!(cfg.theta_steps);
            p["energy_levels"] = json!([cfg.k_min.unwrap_or(3), cfg.k_max.unwrap_or(7)]);
        }
        Command::Tower => {
            p["levels"] = json!(cfg.levels);
            p["m"] = json!(cfg.m);
            p["grid_steps"] = json!(cfg.grid_steps);
            p["orbit_steps"] = json!(cfg.orbit_steps);
            p["max_tree_nodes"] = json!(cfg.budget.max_tree_nodes);
        }
        Command::Homogenize => {
            let l = left_system(cfg)?;
            let (_, rep) = homogeneous_subsystem(&l, cfg.k.unwrap_or(10) as u64)?;
            p["maps"] = json!(multinomial(&rep.v).to_string());
        }
        Command::Project => {
            let ifs = planar_system(cfg)?;
            let win = planar_window(cfg, &ifs)?;
            let balls: Vec<Value> = (win.k_min..=win.k_max)
                .map(|k| {
                    let d = ifs.radius() * win.base.powi(-(k as i32));
                    json!({"k": k, "cells": (ifs.radius() / d).powf(ifs.similarity_dimension()).ceil()})
                })
                .collect();
            p["scales"] = json!(balls);
            p["angles"] = json!(cfg.xi_steps);
        }
        Command::Render => {
            let cells = match cfg.target {
                RenderKind::Product => {
                    let (l, r) = (left_system(cfg)?, right_system(cfg)?);
                    let d = l
                        .max_abs_ratio()
                        .max(r.max_abs_ratio())
                        .to_f64()
                        .powi(cfg.depth as i32);
                    cylinder_estimate(&l, d) * cylinder_estimate(&r, d)
                }
                RenderKind::Planar => (planar_system(cfg)?.len() as f64).powi(cfg.depth as i32),
            };
            p["cells"] = json!(cells);
        }
    }
    Ok(p)
}

/// Writes artifacts to their configured paths. Unrouted SVG goes to
/// `stdout` in place of the report; unrouted CSV is dropped.
pub fn emit(
    cfg: &ExperimentConfig,
    out: &RunOutput,
    stdout: &mut dyn Write,
) -> std::io::Result<()> {
    if let (Some(csv), Some(path)) = (&out.csv, &cfg.output.csv) {
        std::fs::write(path, csv)?;
    }
    let report = serde_json::to_string_pretty(&out.report).expect("json") + "\n";
    match (&out.svg, &cfg.output.svg) {
        (Some(svg), Some(path)) => std::fs::write(path, svg)?,
        (Some(svg), None) => {
            stdout.write_all(svg.as_bytes())?;
            if let Some(path) = &cfg.output.report {
                std::fs::write(path, report)?;
            }
            return Ok(());
        }
        _ => {}
    }
    match &cfg.output.report {
        Some(path) => std::fs::write(path, report),
        None => stdout.write_all(report.as_bytes()),
    }
}

/// Machine-readable error record.
pub fn error_record(kind: &str, messages: &[String]) -> String {
    serde_json::to_string(&json!({"error": kind, "messages": messages})).expect("json")
}
