//! Trajectory simulation with checkpointed storage and an explosion guard.

use serde::{Deserialize, Serialize};

use super::noise::{make_noise_stream, NoiseSource};
use super::scheme::{Scheme, Stepper};
use super::SimError;
use crate::drift_fields::PolyDriftField;

fn default_guard_radius() -> f64 {
    1e6
}

/// Full description of one simulation run. `simulate` is a pure function of
/// this value, so storing it reproduces the run exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub field_name: String,
    /// Time step.
    pub delta: f64,
    /// Total process time.
    pub horizon: f64,
    pub start: [f64; 2],
    pub scheme: Scheme,
    pub master_seed: u64,
    /// Steps between recorded checkpoints.
    pub checkpoint_stride: u64,
    /// Norm beyond which the run is flagged as numerically exploded and
    /// truncated. The underlying diffusion is conservative; crossing this
    /// radius signals discretization stiffness, not process behavior.
    #[serde(default = "default_guard_radius")]
    pub guard_radius: f64,
}

impl SimulationConfig {
    pub fn new(field_name: impl Into<String>, delta: f64, horizon: f64, start: [f64; 2]) -> Self {
        SimulationConfig {
            field_name: field_name.into(),
            delta,
            horizon,
            start,
            scheme: Scheme::Taylor15Full,
            master_seed: 0,
            checkpoint_stride: 100,
            guard_radius: default_guard_radius(),
        }
    }

    pub fn n_steps(&self) -> u64 {
        (self.horizon / self.delta).round() as u64
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.delta > 0.0) || !self.delta.is_finite() {
            return Err(SimError::InvalidConfig(format!(
                "delta must be positive and finite, got {}",
                self.delta
            )));
        }
        if !(self.horizon >= self.delta) || !self.horizon.is_finite() {
            return Err(SimError::InvalidConfig(format!(
                "horizon must be at least delta, got horizon={} delta={}",
                self.horizon, self.delta
            )));
        }
        if self.n_steps() < 1 {
            return Err(SimError::InvalidConfig("at least one step required".into()));
        }
        if self.checkpoint_stride < 1 {
            return Err(SimError::InvalidConfig(
                "checkpoint_stride must be at least 1".into(),
            ));
        }
        if !self.start.iter().all(|v| v.is_finite()) {
            return Err(SimError::InvalidConfig(format!(
                "start must be finite, got {:?}",
                self.start
            )));
        }
        if !(self.guard_radius > 0.0) {
            return Err(SimError::InvalidConfig(
                "guard_radius must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// A simulated path sampled on the checkpoint grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Checkpoint times, starting at zero.
    pub times: Vec<f64>,
    /// States at the checkpoint times; `states[0]` is the starting point.
    pub states: Vec<[f64; 2]>,
    /// Time at which the state norm crossed the guard radius, if it did.
    /// The recorded checkpoints are truncated at that time.
    pub exploded: Option<f64>,
    pub config: SimulationConfig,
}

impl Trajectory {
    pub fn final_state(&self) -> [f64; 2] {
        *self.states.last().expect("trajectory has at least the start")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory has at least the start")
    }
}

/// Simulates trajectory 0 of the configured run.
pub fn simulate(field: &PolyDriftField, config: &SimulationConfig) -> Result<Trajectory, SimError> {
    simulate_indexed(field, config, 0)
}

/// Simulates the trajectory with the given index within the run's noise
/// keyspace. Deterministic in `(config.master_seed, trajectory_index)`.
pub fn simulate_indexed(
    field: &PolyDriftField,
    config: &SimulationConfig,
    trajectory_index: u64,
) -> Result<Trajectory, SimError> {
    let mut noise = make_noise_stream(config.master_seed, trajectory_index, config.delta);
    simulate_with_noise(field, config, &mut noise)
}

/// Simulates with an explicit noise source (test hooks: zeroed or negated
/// streams).
pub fn simulate_with_noise<S: NoiseSource>(
    field: &PolyDriftField,
    config: &SimulationConfig,
    noise: &mut S,
) -> Result<Trajectory, SimError> {
    config.validate()?;
    let stepper = Stepper::new(field, config.scheme)?;
    let n = config.n_steps();
    let stride = config.checkpoint_stride;
    let n_checkpoints = (n / stride) as usize + 2;
    let mut times = Vec::with_capacity(n_checkpoints);
    let mut states = Vec::with_capacity(n_checkpoints);
    times.push(0.0);
    states.push(config.start);

    let guard_sq = config.guard_radius * config.guard_radius;
    let mut y = config.start;
    let mut exploded = None;
    for step in 0..n {
        let inc = noise.increment(step);
        y = stepper.step(y, &inc, config.delta);
        let t = (step + 1) as f64 * config.delta;
        let norm_sq = y[0] * y[0] + y[1] * y[1];
        if !norm_sq.is_finite() || norm_sq > guard_sq {
            exploded = Some(t);
            break;
        }
        if (step + 1) % stride == 0 {
            times.push(t);
            states.push(y);
        }
    }
    if exploded.is_none() && n % stride != 0 {
        // endpoint of a run whose length is not stride-aligned
        times.push(n as f64 * config.delta);
        states.push(y);
    }
    Ok(Trajectory { times, states, exploded, config: config.clone() })
}
