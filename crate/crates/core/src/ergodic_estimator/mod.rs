//! Running time averages `f_T = (1/T) int_0^T f(X_t) dt` for indicator test
//! functions, ensembles over random starting points, and convergence
//! diagnostics.
//!
//! The integral is discretized by the left-endpoint rule at checkpoint
//! resolution: the test functions are indicators, so higher-order rules buy
//! nothing, and the checkpoint stride bounds memory on long runs. Averages
//! start at `t = 0` with no burn-in; transients are the diagnostic's job.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::drift_fields::PolyDriftField;
use crate::sde_integrator::{
    make_noise_stream, simulate_with_noise, uniform_box_samples, NegatedNoise, Scheme, SimError,
    SimulationConfig, Trajectory,
};

#[derive(Debug, Error, PartialEq)]
pub enum ErgodicError {
    #[error("trajectory has no checkpoint interval to average over")]
    EmptyTrajectory,
    #[error("series of length {len} is shorter than two windows of {window}")]
    SeriesTooShort { len: usize, window: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Simulation(#[from] SimError),
}

/// Indicator of the open ball `{ x : |x - center| < radius }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorBall {
    pub center: [f64; 2],
    pub radius: f64,
}

impl IndicatorBall {
    pub fn new(center: [f64; 2], radius: f64) -> Self {
        IndicatorBall { center, radius }
    }

    /// Unit ball around a center, the test function family of the
    /// occupation experiments.
    pub fn unit(center: [f64; 2]) -> Self {
        IndicatorBall { center, radius: 1.0 }
    }

    pub fn contains(&self, x: [f64; 2]) -> bool {
        let dx = x[0] - self.center[0];
        let dy = x[1] - self.center[1];
        // strict inequality: open ball; a zero radius contains nothing
        dx * dx + dy * dy < self.radius * self.radius
    }

    pub fn indicator(&self, x: [f64; 2]) -> f64 {
        if self.contains(x) {
            1.0
        } else {
            0.0
        }
    }
}

/// Running time average of one test function along one trajectory,
/// sampled on the checkpoint grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErgodicSeries {
    /// Times `T_i` (the checkpoint times after zero).
    pub times: Vec<f64>,
    /// `f_{T_i}`, maintained incrementally with compensated summation.
    pub averages: Vec<f64>,
    pub trajectory_index: u64,
    pub master_seed: u64,
    pub start: [f64; 2],
    pub ball: IndicatorBall,
    /// Explosion time when the trajectory was truncated by the guard.
    pub exploded: Option<f64>,
}

impl ErgodicSeries {
    pub fn terminal(&self) -> Option<f64> {
        self.averages.last().copied()
    }

    /// Standard error of the terminal time average by batch means: the run
    /// is split into `n_batches` equal time windows whose occupation means
    /// are treated as roughly independent samples.
    pub fn batch_standard_error(&self, n_batches: usize) -> Option<f64> {
        if n_batches < 2 || self.averages.len() < n_batches {
            return None;
        }
        let n = self.averages.len();
        let occupied = |i: usize| -> f64 {
            // occupied time up to index i (times are absolute)
            self.averages[i] * self.times[i]
        };
        let mut means = Vec::with_capacity(n_batches);
        let mut prev_occ = 0.0;
        let mut prev_t = 0.0;
        for b in 1..=n_batches {
            let idx = b * n / n_batches - 1;
            let occ = occupied(idx);
            let t = self.times[idx];
            means.push((occ - prev_occ) / (t - prev_t));
            prev_occ = occ;
            prev_t = t;
        }
        let m = means.iter().sum::<f64>() / n_batches as f64;
        let var = means.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n_batches - 1) as f64;
        Some((var / n_batches as f64).sqrt())
    }
}

/// Kahan-compensated accumulator for the occupied-time sum.
#[derive(Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Left-endpoint running time average of the ball indicator along a
/// trajectory's checkpoints.
pub fn time_average(
    trajectory: &Trajectory,
    ball: &IndicatorBall,
) -> Result<ErgodicSeries, ErgodicError> {
    if trajectory.states.len() < 2 {
        return Err(ErgodicError::EmptyTrajectory);
    }
    let n = trajectory.states.len() - 1;
    let mut times = Vec::with_capacity(n);
    let mut averages = Vec::with_capacity(n);
    let mut occupied = Compensated::default();
    for i in 0..n {
        let dt = trajectory.times[i + 1] - trajectory.times[i];
        occupied.add(ball.indicator(trajectory.states[i]) * dt);
        let t = trajectory.times[i + 1];
        times.push(t);
        averages.push(occupied.sum / t);
    }
    Ok(ErgodicSeries {
        times,
        averages,
        trajectory_index: 0,
        master_seed: trajectory.config.master_seed,
        start: trajectory.config.start,
        ball: *ball,
        exploded: trajectory.exploded,
    })
}

/// Axis-aligned sampling box for starting points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StartBox {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl StartBox {
    pub fn symmetric(half_width: f64) -> Self {
        StartBox { min: [-half_width, -half_width], max: [half_width, half_width] }
    }
}

/// Ensemble experiment description. Starting points are drawn once from
/// `start_box` (deterministically from the master seed) unless overridden.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub field_name: String,
    pub n_traj: usize,
    pub horizon: f64,
    pub delta: f64,
    pub scheme: Scheme,
    pub checkpoint_stride: u64,
    pub start_box: StartBox,
    pub master_seed: u64,
    pub guard_radius: f64,
    /// Explicit starting points (test hook and replay aid).
    #[serde(default)]
    pub starts_override: Option<Vec<[f64; 2]>>,
    /// Drive every trajectory with the sign-flipped noise stream
    /// (antipodal-coupling test hook).
    #[serde(default)]
    pub negate_noise: bool,
}

impl EnsembleConfig {
    pub fn new(field_name: impl Into<String>, n_traj: usize, horizon: f64, delta: f64) -> Self {
        EnsembleConfig {
            field_name: field_name.into(),
            n_traj,
            horizon,
            delta,
            scheme: Scheme::Taylor15Full,
            checkpoint_stride: 100,
            start_box: StartBox::symmetric(10.0),
            master_seed: 0,
            guard_radius: 1e6,
            starts_override: None,
            negate_noise: false,
        }
    }

    fn simulation_config(&self, start: [f64; 2]) -> SimulationConfig {
        SimulationConfig {
            field_name: self.field_name.clone(),
            delta: self.delta,
            horizon: self.horizon,
            start,
            scheme: self.scheme,
            master_seed: self.master_seed,
            checkpoint_stride: self.checkpoint_stride,
            guard_radius: self.guard_radius,
        }
    }
}

/// Cross-trajectory aggregate of an ensemble.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub ball: IndicatorBall,
    pub start_box: StartBox,
    pub starts: Vec<[f64; 2]>,
    pub master_seed: u64,
    /// Common checkpoint grid (shortest series when explosions truncate).
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Terminal running average per trajectory.
    pub terminals: Vec<f64>,
    pub terminal_mean: f64,
    pub terminal_std: f64,
    /// Standard error of the terminal ensemble mean.
    pub terminal_stderr: f64,
    pub exploded: Vec<Option<f64>>,
    /// Soft diagnostic: the cross-trajectory spread at the final checkpoint
    /// does not exceed its minimum beyond the burn-in quarter by more than
    /// 10 percent. Reported, never enforced.
    pub spread_contracted: bool,
}

/// Result of one ensemble run: the per-trajectory series plus the summary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub series: Vec<ErgodicSeries>,
    pub summary: EnsembleSummary,
}

/// Simulates `n_traj` trajectories with independent noise streams, computes
/// their running averages, and aggregates. Deterministic in the config and
/// independent of worker count and scheduling order.
pub fn run_ensemble(
    field: &PolyDriftField,
    ball: &IndicatorBall,
    config: &EnsembleConfig,
) -> Result<EnsembleResult, ErgodicError> {
    if config.n_traj < 1 {
        return Err(ErgodicError::InvalidInput("need at least one trajectory".into()));
    }
    let starts = match &config.starts_override {
        Some(s) => {
            if s.len() != config.n_traj {
                return Err(ErgodicError::InvalidInput(format!(
                    "{} explicit starts for {} trajectories",
                    s.len(),
                    config.n_traj
                )));
            }
            s.clone()
        }
        None => uniform_box_samples(
            config.master_seed,
            config.n_traj,
            config.start_box.min,
            config.start_box.max,
        ),
    };

    let series: Vec<ErgodicSeries> = starts
        .par_iter()
        .enumerate()
        .map(|(i, &start)| -> Result<ErgodicSeries, ErgodicError> {
            let sim_config = config.simulation_config(start);
            let noise = make_noise_stream(config.master_seed, i as u64, config.delta);
            let trajectory = if config.negate_noise {
                simulate_with_noise(field, &sim_config, &mut NegatedNoise(noise))?
            } else {
                simulate_with_noise(field, &sim_config, &mut { noise })?
            };
            let mut s = time_average(&trajectory, ball)?;
            s.trajectory_index = i as u64;
            Ok(s)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let summary = summarize(ball, config, starts, &series);
    Ok(EnsembleResult { series, summary })
}

fn summarize(
    ball: &IndicatorBall,
    config: &EnsembleConfig,
    starts: Vec<[f64; 2]>,
    series: &[ErgodicSeries],
) -> EnsembleSummary {
    let grid_len = series.iter().map(|s| s.averages.len()).min().unwrap_or(0);
    let times = series
        .first()
        .map(|s| s.times[..grid_len].to_vec())
        .unwrap_or_default();
    let n = series.len() as f64;
    let mut mean = Vec::with_capacity(grid_len);
    let mut std = Vec::with_capacity(grid_len);
    for i in 0..grid_len {
        let m = series.iter().map(|s| s.averages[i]).sum::<f64>() / n;
        let var = if series.len() > 1 {
            series.iter().map(|s| (s.averages[i] - m).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        mean.push(m);
        std.push(var.sqrt());
    }
    let terminals: Vec<f64> = series.iter().filter_map(|s| s.terminal()).collect();
    let tn = terminals.len() as f64;
    let terminal_mean = terminals.iter().sum::<f64>() / tn.max(1.0);
    let terminal_var = if terminals.len() > 1 {
        terminals.iter().map(|t| (t - terminal_mean).powi(2)).sum::<f64>() / (tn - 1.0)
    } else {
        0.0
    };
    let terminal_std = terminal_var.sqrt();
    let terminal_stderr = terminal_std / tn.max(1.0).sqrt();

    let burn_in = grid_len / 4;
    let spread_contracted = match (std.last(), std[burn_in..].iter().cloned().reduce(f64::min)) {
        (Some(&last), Some(min_after)) => last <= 1.1 * min_after.max(1e-12) || last <= 1e-12,
        _ => true,
    };

    EnsembleSummary {
        ball: *ball,
        start_box: config.start_box,
        starts,
        master_seed: config.master_seed,
        times,
        mean,
        std,
        terminals,
        terminal_mean,
        terminal_std,
        terminal_stderr,
        exploded: series.iter().map(|s| s.exploded).collect(),
        spread_contracted,
    }
}

/// Terminal occupation of one ball center within a comparison run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OccupationRow {
    pub center: [f64; 2],
    pub terminal_mean: f64,
    pub terminal_std: f64,
    pub terminal_stderr: f64,
    pub n_traj: usize,
    pub exploded_count: usize,
}

/// Runs the ensemble once per ball center (same seed, hence the same
/// trajectories: a paired comparison) and tabulates terminal occupations.
pub fn occupation_comparison(
    field: &PolyDriftField,
    centers: &[[f64; 2]],
    radius: f64,
    config: &EnsembleConfig,
) -> Result<Vec<OccupationRow>, ErgodicError> {
    centers
        .iter()
        .map(|&center| {
            let ball = IndicatorBall::new(center, radius);
            let result = run_ensemble(field, &ball, config)?;
            Ok(OccupationRow {
                center,
                terminal_mean: result.summary.terminal_mean,
                terminal_std: result.summary.terminal_std,
                terminal_stderr: result.summary.terminal_stderr,
                n_traj: result.series.len(),
                exploded_count: result.summary.exploded.iter().filter(|e| e.is_some()).count(),
            })
        })
        .collect()
}

/// Window-comparison convergence verdict on a running-average series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub stabilized: bool,
    /// Mean of the last window minus mean of the window before it.
    pub drift_of_mean: f64,
}

/// Compares the time average of `f` over the last `window_fraction` of the
/// run against the preceding window of the same length: stabilized when the
/// window means differ by at most three pooled standard errors.
///
/// Each window's mean is its occupation rate (recovered exactly from the
/// running averages), and its standard error comes from the scatter of four
/// sub-batch rates. Consecutive values of the running average itself are too
/// autocorrelated to carry a usable standard error, so the comparison is
/// made on the occupation rates the averages encode.
pub fn convergence_diagnostic(
    series: &ErgodicSeries,
    window_fraction: f64,
) -> Result<Diagnostic, ErgodicError> {
    if !(window_fraction > 0.0 && window_fraction < 0.5) {
        return Err(ErgodicError::InvalidInput(format!(
            "window fraction must lie in (0, 1/2), got {window_fraction}"
        )));
    }
    const SUB_BATCHES: usize = 4;
    let len = series.averages.len();
    let w = ((len as f64) * window_fraction).floor() as usize;
    if w < 2 * SUB_BATCHES || len < 2 * w {
        return Err(ErgodicError::SeriesTooShort { len, window: (2 * SUB_BATCHES).max(w) });
    }
    // occupied time at checkpoint index, with index -1 meaning t = 0
    let occupied = |i: isize| -> (f64, f64) {
        if i < 0 {
            (0.0, 0.0)
        } else {
            let i = i as usize;
            (series.averages[i] * series.times[i], series.times[i])
        }
    };
    // mean occupation rate and its batch-means standard error over the
    // checkpoint index range (start, end]
    let window_stats = |start: isize, end: isize| -> (f64, f64) {
        let (occ_a, t_a) = occupied(start);
        let (occ_b, t_b) = occupied(end);
        let mean = (occ_b - occ_a) / (t_b - t_a);
        let span = (end - start) as usize;
        let mut batch_rates = Vec::with_capacity(SUB_BATCHES);
        let mut prev = occupied(start);
        for b in 1..=SUB_BATCHES {
            let idx = start + (b * span / SUB_BATCHES) as isize;
            let cur = occupied(idx);
            batch_rates.push((cur.0 - prev.0) / (cur.1 - prev.1));
            prev = cur;
        }
        let bm = batch_rates.iter().sum::<f64>() / SUB_BATCHES as f64;
        let var = batch_rates.iter().map(|r| (r - bm) * (r - bm)).sum::<f64>()
            / (SUB_BATCHES - 1) as f64;
        (mean, var / SUB_BATCHES as f64)
    };
    let (m_prev, v_prev) = window_stats(len as isize - 2 * w as isize - 1, len as isize - w as isize - 1);
    let (m_last, v_last) = window_stats(len as isize - w as isize - 1, len as isize - 1);
    let pooled_se = (v_last + v_prev).sqrt();
    let drift = m_last - m_prev;
    Ok(Diagnostic { stabilized: drift.abs() <= 3.0 * pooled_se, drift_of_mean: drift })
}
