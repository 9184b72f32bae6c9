//! Numerical toolkit for a 2-D diffusion with polynomial drift: strong
//! Taylor order-1.5 simulation, radial recurrence/transience criteria, and
//! ergodic time-average estimation.

pub mod drift_fields;
pub mod ergodic_estimator;
pub mod recurrence_classifier;
pub mod sde_integrator;
