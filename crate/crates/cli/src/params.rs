//! Resolved run parameters for each subcommand, plus the run manifest.
//!
//! Every subcommand resolves its flags (and optional TOML config file) into
//! one concrete params value; the run is a pure function of that value. The
//! manifest records it verbatim, so `--manifest` replays reproduce outputs
//! byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use ergodiff::sde_integrator::Scheme;

pub const DEFAULT_CENTERS: [[f64; 2]; 7] = [
    [0.0, 0.0],
    [2.0, 0.0],
    [0.0, 2.0],
    [3.0, 0.0],
    [0.0, 3.0],
    [std::f64::consts::SQRT_2, std::f64::consts::SQRT_2],
    [2.121320343559643, 2.121320343559643],
];

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SimulateParams {
    pub field: String,
    pub start: [f64; 2],
    pub delta: f64,
    pub horizon: f64,
    pub seed: u64,
    pub scheme: Scheme,
    pub stride: u64,
    pub guard_radius: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ClassifyParams {
    pub profile: String,
    pub dim: usize,
    pub alpha: f64,
    pub field_file: Option<PathBuf>,
    pub n_angles: usize,
    pub r0: f64,
    pub doublings: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ErgodicParams {
    pub field: String,
    pub centers: Vec<[f64; 2]>,
    pub radius: f64,
    pub n_traj: usize,
    pub horizon: f64,
    pub delta: f64,
    pub seed: u64,
    pub scheme: Scheme,
    pub stride: u64,
    pub guard_radius: f64,
    pub start_box: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct OrderCheckParams {
    pub field: String,
    pub start: [f64; 2],
    pub horizon: f64,
    /// Step sizes are `horizon / 2^k` for `k` in `coarsest_exp..=finest_exp`.
    pub coarsest_exp: u32,
    pub finest_exp: u32,
    pub ref_exp: u32,
    pub n_paths: usize,
    pub seed: u64,
}

/// The resolved configuration of any subcommand, as stored in a manifest.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "subcommand", content = "config", rename_all = "kebab-case")]
pub enum RunParams {
    Simulate(SimulateParams),
    Classify(ClassifyParams),
    Ergodic(ErgodicParams),
    OrderCheck(OrderCheckParams),
}

impl RunParams {
    pub fn master_seed(&self) -> u64 {
        match self {
            RunParams::Simulate(p) => p.seed,
            RunParams::Classify(_) => 0,
            RunParams::Ergodic(p) => p.seed,
            RunParams::OrderCheck(p) => p.seed,
        }
    }
}

/// Record of one completed run: enough to replay it exactly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunManifest {
    #[serde(flatten)]
    pub params: RunParams,
    pub master_seed: u64,
    pub artifact_version: String,
    /// Output files written by the run (manifest excluded).
    pub outputs: Vec<PathBuf>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new(params: RunParams, outputs: Vec<PathBuf>, wall_clock_seconds: f64) -> Self {
        RunManifest {
            master_seed: params.master_seed(),
            params,
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs,
            wall_clock_seconds,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).context("serialize manifest")?;
        fs::write(path, json + "\n").with_context(|| format!("write {}", path.display()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let raw = fs::read_to_string(path).with_context(|| format!("read {}", path.display()))?;
        serde_json::from_str(&raw).with_context(|| format!("parse manifest {}", path.display()))
    }
}

/// Parses "x,y" into a point.
pub fn parse_point(s: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        bail!("expected \"x,y\", got {s:?}");
    }
    Ok([
        parts[0].trim().parse().with_context(|| format!("bad coordinate {:?}", parts[0]))?,
        parts[1].trim().parse().with_context(|| format!("bad coordinate {:?}", parts[1]))?,
    ])
}

/// Parses "x,y;x,y;..." into a center list.
pub fn parse_centers(s: &str) -> Result<Vec<[f64; 2]>> {
    s.split(';').map(parse_point).collect()
}

/// Default master seed: the ERGODIFF_SEED environment variable, or zero.
pub fn env_default_seed() -> Result<u64> {
    match std::env::var("ERGODIFF_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("ERGODIFF_SEED must be an unsigned integer, got {v:?}")),
        Err(_) => Ok(0),
    }
}
