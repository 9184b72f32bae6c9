//! Coupled-path strong-order measurement.
//!
//! For each sample path, a reference solution is computed on the finest grid
//! and coarse solutions on each tested step size, all driven by the same
//! Brownian path via [`refine_increments`]. The strong error
//! `E |Y_T^delta - Y_T^ref|` then scales like `delta^p` with `p` the strong
//! order, read off as the least-squares slope in log-log coordinates.

use rayon::prelude::*;

use super::noise::make_noise_stream;
use super::refine::refine_increments;
use super::scheme::{Scheme, Stepper};
use super::SimError;
use crate::drift_fields::PolyDriftField;

/// Parameters of a strong-order measurement.
#[derive(Clone, Debug)]
pub struct StrongOrderSetup {
    pub start: [f64; 2],
    pub horizon: f64,
    /// Tested step sizes, each an integer multiple of `delta_ref`.
    pub deltas: Vec<f64>,
    /// Reference grid step.
    pub delta_ref: f64,
    pub n_paths: usize,
    pub master_seed: u64,
}

/// Per-step-size strong errors and the fitted convergence slope.
#[derive(Clone, Debug)]
pub struct OrderEstimate {
    /// `(delta, mean strong error at the horizon)` per tested step size.
    pub errors: Vec<(f64, f64)>,
    /// Least-squares slope of `log error` against `log delta`; `None` when
    /// some error vanishes (exactly coupled grids) and the log is undefined.
    pub slope: Option<f64>,
    /// Paths dropped because reference or coarse solution left the guard
    /// radius.
    pub excluded_paths: usize,
}

fn integer_ratio(delta: f64, delta_ref: f64) -> Result<usize, SimError> {
    let ratio = delta / delta_ref;
    let m = ratio.round();
    if m < 1.0 || (ratio - m).abs() > 1e-9 * m {
        return Err(SimError::InvalidConfig(format!(
            "delta {delta} is not an integer multiple of the reference step {delta_ref}"
        )));
    }
    Ok(m as usize)
}

/// Measures the strong convergence order of `scheme` on `field`.
/// The reference solution always uses the full Taylor scheme on the finest
/// grid; coupling makes its own discretization error negligible against the
/// coarse-grid errors being measured.
pub fn strong_order_estimate(
    field: &PolyDriftField,
    scheme: Scheme,
    setup: &StrongOrderSetup,
) -> Result<OrderEstimate, SimError> {
    if setup.deltas.is_empty() {
        return Err(SimError::InvalidConfig("no step sizes to test".into()));
    }
    if !(setup.delta_ref > 0.0) {
        return Err(SimError::InvalidConfig("reference step must be positive".into()));
    }
    let n_ref_f = setup.horizon / setup.delta_ref;
    let n_ref = n_ref_f.round() as u64;
    if n_ref < 1 || (n_ref_f - n_ref as f64).abs() > 1e-6 {
        return Err(SimError::InvalidConfig(
            "horizon must be an integer number of reference steps".into(),
        ));
    }
    let factors = setup
        .deltas
        .iter()
        .map(|&d| {
            let m = integer_ratio(d, setup.delta_ref)?;
            if n_ref as usize % m != 0 {
                return Err(SimError::LengthNotDivisible { len: n_ref as usize, factor: m });
            }
            Ok(m)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let ref_stepper = Stepper::new(field, Scheme::Taylor15Full)?;
    let test_stepper = Stepper::new(field, scheme)?;
    const GUARD: f64 = 1e6;

    // per path: Some(vec of per-delta errors) or None when excluded
    let per_path: Vec<Option<Vec<f64>>> = (0..setup.n_paths as u64)
        .into_par_iter()
        .map(|path| {
            let mut noise = make_noise_stream(setup.master_seed, path, setup.delta_ref);
            let fine: Vec<_> = (0..n_ref).map(|s| {
                use super::noise::NoiseSource;
                noise.increment(s)
            }).collect();

            let mut y_ref = setup.start;
            for inc in &fine {
                y_ref = ref_stepper.step(y_ref, inc, setup.delta_ref);
            }
            if !y_ref.iter().all(|v| v.is_finite() && v.abs() < GUARD) {
                return None;
            }

            let mut errs = Vec::with_capacity(factors.len());
            for (&delta, &m) in setup.deltas.iter().zip(&factors) {
                let coarse = refine_increments(&fine, m, setup.delta_ref)
                    .expect("validated divisibility");
                let mut y = setup.start;
                for inc in &coarse {
                    y = test_stepper.step(y, inc, delta);
                }
                if !y.iter().all(|v| v.is_finite() && v.abs() < GUARD) {
                    return None;
                }
                errs.push(((y[0] - y_ref[0]).powi(2) + (y[1] - y_ref[1]).powi(2)).sqrt());
            }
            Some(errs)
        })
        .collect();

    let excluded = per_path.iter().filter(|p| p.is_none()).count();
    let kept: Vec<&Vec<f64>> = per_path.iter().flatten().collect();
    if kept.is_empty() {
        return Err(SimError::InvalidConfig("every sample path was excluded".into()));
    }

    let errors: Vec<(f64, f64)> = setup
        .deltas
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let mean = kept.iter().map(|e| e[i]).sum::<f64>() / kept.len() as f64;
            (d, mean)
        })
        .collect();

    let slope = if errors.iter().all(|&(_, e)| e > 0.0) {
        let pts: Vec<(f64, f64)> = errors.iter().map(|&(d, e)| (d.ln(), e.ln())).collect();
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx = pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>();
        Some(sxy / sxx)
    } else {
        None
    };

    Ok(OrderEstimate { errors, slope, excluded_paths: excluded })
}
