//! Aggregation of fine-grid noise into coarse-grid noise.
//!
//! A coarse step of size `m * delta` driven by the aggregated increments is
//! driven by the same underlying Brownian path as the `m` fine steps it
//! covers:
//!
//! ```text
//! dW_coarse = sum_j dW_j
//! dZ_coarse = sum_j (dZ_j + (W_{t_j} - W_{t_0}) * delta)
//! ```
//!
//! the second line being the additivity of `int (W_s - W_start) ds` over
//! subintervals. This is what makes coupled-path strong-order measurement
//! possible: reference and coarse solutions see one Brownian motion.

use super::noise::NoiseIncrement;
use super::SimError;

/// Merges every `factor` consecutive fine increments (for fine step
/// `fine_delta`) into one coarse increment.
pub fn refine_increments(
    fine: &[NoiseIncrement],
    factor: usize,
    fine_delta: f64,
) -> Result<Vec<NoiseIncrement>, SimError> {
    if factor == 0 {
        return Err(SimError::InvalidConfig("refinement factor must be >= 1".into()));
    }
    if fine.len() % factor != 0 {
        return Err(SimError::LengthNotDivisible { len: fine.len(), factor });
    }
    let mut coarse = Vec::with_capacity(fine.len() / factor);
    for chunk in fine.chunks(factor) {
        let mut w_partial = [0.0_f64; 2];
        let mut dz = [0.0_f64; 2];
        for inc in chunk {
            for k in 0..2 {
                dz[k] += inc.dz[k] + w_partial[k] * fine_delta;
                w_partial[k] += inc.dw[k];
            }
        }
        coarse.push(NoiseIncrement { dw: w_partial, dz });
    }
    Ok(coarse)
}
