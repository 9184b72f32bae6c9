//! Subcommand implementations. Each takes resolved params, writes its
//! outputs plus a manifest, and returns the process exit code.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context, Result};

use ergodiff::drift_fields::{
    make_grad_r4_field, make_z4_field, make_zero_field, PolyDriftField,
};
use ergodiff::ergodic_estimator::{
    convergence_diagnostic, run_ensemble, EnsembleConfig, IndicatorBall, StartBox,
};
use ergodiff::recurrence_classifier::{
    classify, ClassificationReport, ClassifierConfig, RadialProfile,
};
use ergodiff::sde_integrator::{
    simulate, strong_order_estimate, Scheme, SimulationConfig, StrongOrderSetup,
};

use crate::outputs::{
    ensure_dir, fmt_f64, out_path, write_json, write_series_csv, write_trajectory_csv,
};
use crate::params::{
    ClassifyParams, ErgodicParams, OrderCheckParams, RunManifest, RunParams, SimulateParams,
};
use crate::svg::ensemble_chart;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Resolves a field name: a built-in (`z4`, `zero`, `grad-r4`) or a path to
/// a field definition JSON file.
pub fn resolve_field(name: &str) -> Result<PolyDriftField> {
    match name {
        "z4" => Ok(make_z4_field()),
        "zero" => Ok(make_zero_field(2)),
        "grad-r4" => Ok(make_grad_r4_field()),
        other => {
            let path = Path::new(other);
            if path.extension().map(|e| e == "json").unwrap_or(false) && path.exists() {
                let raw = std::fs::read_to_string(path)
                    .with_context(|| format!("read field file {}", path.display()))?;
                PolyDriftField::from_json_str(&raw)
                    .map_err(|e| anyhow::anyhow!("--field file {}: {e}", path.display()))
            } else {
                bail!("--field must be one of z4|zero|grad-r4 or a .json field file, got {other:?}")
            }
        }
    }
}

fn finish(
    params: RunParams,
    outputs: Vec<PathBuf>,
    out_dir: &Path,
    manifest_name: &str,
    started: Instant,
) -> Result<()> {
    let manifest = RunManifest::new(params, outputs, started.elapsed().as_secs_f64());
    manifest.write(&out_path(out_dir, manifest_name))
}

pub fn cmd_simulate(params: &SimulateParams, out_dir: &Path) -> Result<i32> {
    let started = Instant::now();
    let field = resolve_field(&params.field)?;
    let config = SimulationConfig {
        field_name: params.field.clone(),
        delta: params.delta,
        horizon: params.horizon,
        start: params.start,
        scheme: params.scheme,
        master_seed: params.seed,
        checkpoint_stride: params.stride,
        guard_radius: params.guard_radius,
    };
    config.validate().map_err(|e| anyhow::anyhow!("{e}"))?;
    ensure_dir(out_dir)?;
    let trajectory = simulate(&field, &config).map_err(|e| anyhow::anyhow!("{e}"))?;
    let csv = out_path(out_dir, "trajectory.csv");
    write_trajectory_csv(&csv, &trajectory)?;
    finish(
        RunParams::Simulate(params.clone()),
        vec![csv.clone()],
        out_dir,
        "simulate_manifest.json",
        started,
    )?;
    println!(
        "wrote {} ({} checkpoints, final state ({}, {}))",
        csv.display(),
        trajectory.states.len(),
        fmt_f64(trajectory.final_state()[0]),
        fmt_f64(trajectory.final_state()[1]),
    );
    if let Some(t) = trajectory.exploded {
        eprintln!("numerical explosion at t = {t}; output truncated at the last checkpoint");
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

/// Builds the classification profile from params.
fn resolve_profile(params: &ClassifyParams) -> Result<RadialProfile> {
    if let Some(path) = &params.field_file {
        let raw = std::fs::read_to_string(path)
            .with_context(|| format!("read field file {}", path.display()))?;
        let field =
            PolyDriftField::from_json_str(&raw).map_err(|e| anyhow::anyhow!("--field-file: {e}"))?;
        return RadialProfile::sampled(Arc::new(field), params.n_angles)
            .map_err(|e| anyhow::anyhow!("{e}"));
    }
    match params.profile.as_str() {
        "brownian" => RadialProfile::brownian(params.dim),
        "power-well" => RadialProfile::power_well(params.dim, params.alpha),
        "power-attract" => RadialProfile::power_attract(params.dim, params.alpha),
        "z4" => Ok(RadialProfile::z4()),
        other => bail!("--profile must be brownian|power-well|power-attract|z4, got {other:?}"),
    }
    .map_err(|e| anyhow::anyhow!("{e}"))
}

fn print_report(report: &ClassificationReport) {
    println!("profile: {}    r0: {}", report.profile, report.r0);
    println!("{:<10} {:<14} evidence (N, log value)", "criterion", "verdict");
    for cv in &report.criteria {
        let ev: Vec<String> = cv
            .evidence
            .iter()
            .map(|(n, v)| format!("({n}, {v:.6})"))
            .collect();
        let shown = if ev.len() > 4 {
            format!("{} ... {}", ev[..2].join(" "), ev[ev.len() - 2..].join(" "))
        } else {
            ev.join(" ")
        };
        println!(
            "{:<10} {:<14} {shown}",
            cv.criterion.as_str(),
            format!("{:?}", cv.verdict).to_lowercase()
        );
    }
    let qualifier = match report.summary {
        ergodiff::recurrence_classifier::Summary::RecurrentNoFiniteMeasure => {
            " (no finite invariant measure)"
        }
        _ => "",
    };
    println!(
        "summary: {}{qualifier}",
        match report.summary {
            ergodiff::recurrence_classifier::Summary::RecurrentNoFiniteMeasure => "recurrent",
            s => s.describe(),
        }
    );
    println!("notes: {}", report.notes);
}

pub fn cmd_classify(params: &ClassifyParams, out_dir: &Path) -> Result<i32> {
    let started = Instant::now();
    let profile = resolve_profile(params)?;
    let config = ClassifierConfig {
        r0: params.r0,
        max_doublings: params.doublings,
        ..ClassifierConfig::default()
    };
    if !(params.r0 > 0.0) {
        bail!("--r0 must be positive, got {}", params.r0);
    }
    let report = classify(&profile, &config).map_err(|e| anyhow::anyhow!("{e}"))?;
    ensure_dir(out_dir)?;
    let json = out_path(out_dir, "classification.json");
    std::fs::write(&json, report.to_json_string() + "\n")
        .with_context(|| format!("write {}", json.display()))?;
    print_report(&report);
    finish(
        RunParams::Classify(params.clone()),
        vec![json],
        out_dir,
        "classify_manifest.json",
        started,
    )?;
    // an inconclusive classification is a valid scientific answer
    Ok(EXIT_OK)
}

pub fn cmd_ergodic(params: &ErgodicParams, out_dir: &Path) -> Result<i32> {
    let started = Instant::now();
    let field = resolve_field(&params.field)?;
    if params.centers.is_empty() {
        bail!("--centers must name at least one ball center");
    }
    if !(params.radius >= 0.0) {
        bail!("--radius must be non-negative, got {}", params.radius);
    }
    let config = EnsembleConfig {
        field_name: params.field.clone(),
        n_traj: params.n_traj,
        horizon: params.horizon,
        delta: params.delta,
        scheme: params.scheme,
        checkpoint_stride: params.stride,
        start_box: StartBox::symmetric(params.start_box),
        master_seed: params.seed,
        guard_radius: params.guard_radius,
        starts_override: None,
        negate_noise: false,
    };
    ensure_dir(out_dir)?;

    let mut outputs = Vec::new();
    let mut summaries = Vec::new();
    let mut any_explosion = false;
    for (i, &center) in params.centers.iter().enumerate() {
        let ball = IndicatorBall::new(center, params.radius);
        let result = run_ensemble(&field, &ball, &config).map_err(|e| anyhow::anyhow!("{e}"))?;
        any_explosion |= result.summary.exploded.iter().any(|e| e.is_some());

        let csv = out_path(out_dir, &format!("series_center_{i}.csv"));
        write_series_csv(&csv, &result)?;
        let svg = out_path(out_dir, &format!("ergodic_center_{i}.svg"));
        let title = format!("f_T for the ball at ({}, {})", center[0], center[1]);
        std::fs::write(&svg, ensemble_chart(&result, &title))
            .with_context(|| format!("write {}", svg.display()))?;
        outputs.push(csv);
        outputs.push(svg);

        let diagnostics: Vec<_> = result
            .series
            .iter()
            .map(|s| convergence_diagnostic(s, 0.25).ok())
            .collect();
        println!(
            "center ({}, {}): terminal mean {:.6} +- {:.6} (stderr), {} trajectories{}",
            center[0],
            center[1],
            result.summary.terminal_mean,
            result.summary.terminal_stderr,
            result.series.len(),
            if diagnostics.iter().all(|d| d.map(|d| d.stabilized).unwrap_or(false)) {
                ", all stabilized"
            } else {
                ""
            }
        );
        summaries.push(serde_json::json!({
            "center": center,
            "summary": result.summary,
            "diagnostics": diagnostics,
        }));
    }

    let summary_path = out_path(out_dir, "ergodic_summary.json");
    write_json(
        &summary_path,
        &serde_json::json!({
            "field": params.field,
            "radius": params.radius,
            "config": params,
            "centers": summaries,
        }),
    )?;
    outputs.push(summary_path);
    finish(RunParams::Ergodic(params.clone()), outputs, out_dir, "ergodic_manifest.json", started)?;
    if any_explosion {
        eprintln!("some trajectories hit the explosion guard; their series are truncated");
        return Ok(EXIT_NUMERICAL);
    }
    Ok(EXIT_OK)
}

pub fn cmd_order_check(params: &OrderCheckParams, out_dir: &Path) -> Result<i32> {
    let started = Instant::now();
    let field = resolve_field(&params.field)?;
    if params.coarsest_exp > params.finest_exp || params.finest_exp >= params.ref_exp {
        bail!(
            "step exponents must satisfy coarsest <= finest < ref, got {} {} {}",
            params.coarsest_exp,
            params.finest_exp,
            params.ref_exp
        );
    }
    let deltas: Vec<f64> = (params.coarsest_exp..=params.finest_exp)
        .map(|k| params.horizon / f64::powi(2.0, k as i32))
        .collect();
    let setup = StrongOrderSetup {
        start: params.start,
        horizon: params.horizon,
        deltas,
        delta_ref: params.horizon / f64::powi(2.0, params.ref_exp as i32),
        n_paths: params.n_paths,
        master_seed: params.seed,
    };
    let mut results = Vec::new();
    for scheme in [Scheme::Taylor15Full, Scheme::Euler] {
        let est = strong_order_estimate(&field, scheme, &setup).map_err(|e| anyhow::anyhow!("{e}"))?;
        println!("scheme {}:", scheme.as_str());
        for (d, e) in &est.errors {
            println!("  delta {:>12.6e}   strong error {:>12.6e}", d, e);
        }
        match est.slope {
            Some(s) => println!("  fitted slope {s:.4} ({} paths excluded)", est.excluded_paths),
            None => println!("  errors vanish; slope undefined"),
        }
        results.push(serde_json::json!({
            "scheme": scheme.as_str(),
            "errors": est.errors,
            "slope": est.slope,
            "excluded_paths": est.excluded_paths,
        }));
    }
    ensure_dir(out_dir)?;
    let json = out_path(out_dir, "order_check.json");
    write_json(&json, &serde_json::json!({ "config": params, "results": results }))?;
    finish(
        RunParams::OrderCheck(params.clone()),
        vec![json],
        out_dir,
        "order_check_manifest.json",
        started,
    )?;
    Ok(EXIT_OK)
}
