//! Strong Taylor order-1.5 and Euler-Maruyama integration of
//! `dX = b(X) dt + dW` with deterministic, splittable noise streams and
//! coupled-path refinement for strong-order measurement.

mod noise;
mod order;
mod refine;
mod scheme;
mod simulate;

pub use noise::{
    make_noise_stream, uniform_box_samples, CounterNoise, NegatedNoise, NoiseIncrement,
    NoiseSource, ZeroNoise, AUX_STREAM_BASE,
};
pub use order::{strong_order_estimate, OrderEstimate, StrongOrderSetup};
pub use refine::refine_increments;
pub use scheme::{step_euler, step_taylor15, Scheme, Stepper, TaylorVariant};
pub use simulate::{simulate, simulate_indexed, simulate_with_noise, SimulationConfig, Trajectory};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("integrator requires a 2-D field, got dimension {0}")]
    NotTwoDimensional(usize),
    #[error("sequence length {len} is not divisible by refinement factor {factor}")]
    LengthNotDivisible { len: usize, factor: usize },
}
