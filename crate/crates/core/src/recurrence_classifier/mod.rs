//! Integral criteria for transience, recurrence, and finite invariant
//! measure of a diffusion `dX = b(X) dt + dW`, evaluated from radial
//! envelopes of the drift — in closed form for the built-in profiles and by
//! overflow-safe log-domain quadrature in general.

mod criteria;
mod logquad;
mod profile;
mod stationary;

pub use criteria::{
    classify, criterion_verdict, ClassificationReport, ClassifierConfig, Criterion,
    CriterionVerdict, Summary, Verdict,
};
pub use logquad::{
    cr5_quotient, logaddexp, logsubexp, outer_integral_logdomain, Cr5Quotient, Cr5State,
    LogIntegralState, OuterIntegrand,
};
pub use profile::{adaptive_simpson, envelopes, Envelope, RadialProfile};
pub use stationary::power_well_stationary_residual;

use thiserror::Error;

use crate::drift_fields::VectorField;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("quadrature did not converge on [{}, {}] (residual {residual})", interval.0, interval.1)]
    QuadratureNonConvergence { interval: (f64, f64), residual: f64 },
    #[error("field evaluation failed: {0}")]
    FieldEvaluation(String),
}

/// The drift comparison function `C(x) = 2 sum_i x_i b_i(x)`; zero at the
/// origin for every field (each summand carries a factor `x_i`).
pub fn c_function(field: &dyn VectorField, x: &[f64]) -> Result<f64, ClassifyError> {
    if x.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let b = field
        .eval_at(x)
        .map_err(|e| ClassifyError::FieldEvaluation(e.to_string()))?;
    Ok(2.0 * x.iter().zip(&b).map(|(xi, bi)| xi * bi).sum::<f64>())
}

#[cfg(test)]
mod tests;
