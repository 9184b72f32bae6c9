//! Deterministic file emission: CSV with round-trip-exact floats, JSON via
//! serde, and directory plumbing.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use ergodiff::ergodic_estimator::EnsembleResult;
use ergodiff::sde_integrator::Trajectory;

/// 17 significant digits: enough to reproduce any f64 bit pattern exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("create output directory {}", dir.display()))
}

/// Trajectory CSV: header `t,x1,x2`, one row per checkpoint.
pub fn write_trajectory_csv(path: &Path, trajectory: &Trajectory) -> Result<()> {
    let mut out = String::from("t,x1,x2\n");
    for (t, s) in trajectory.times.iter().zip(&trajectory.states) {
        out.push_str(&fmt_f64(*t));
        out.push(',');
        out.push_str(&fmt_f64(s[0]));
        out.push(',');
        out.push_str(&fmt_f64(s[1]));
        out.push('\n');
    }
    fs::write(path, out).with_context(|| format!("write {}", path.display()))
}

/// Ergodic series CSV for one center: all trajectories appended, one row per
/// checkpoint, `seed` being the trajectory's noise-stream index.
pub fn write_series_csv(path: &Path, result: &EnsembleResult) -> Result<()> {
    let mut out = String::from("T,f_T,seed,start_x1,start_x2,center_x1,center_x2\n");
    for series in &result.series {
        for (t, f) in series.times.iter().zip(&series.averages) {
            out.push_str(&fmt_f64(*t));
            out.push(',');
            out.push_str(&fmt_f64(*f));
            out.push(',');
            out.push_str(&series.trajectory_index.to_string());
            out.push(',');
            out.push_str(&fmt_f64(series.start[0]));
            out.push(',');
            out.push_str(&fmt_f64(series.start[1]));
            out.push(',');
            out.push_str(&fmt_f64(series.ball.center[0]));
            out.push(',');
            out.push_str(&fmt_f64(series.ball.center[1]));
            out.push('\n');
        }
    }
    fs::write(path, out).with_context(|| format!("write {}", path.display()))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value).context("serialize json")?;
    fs::write(path, json + "\n").with_context(|| format!("write {}", path.display()))
}

pub fn out_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}
