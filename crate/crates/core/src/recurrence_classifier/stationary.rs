//! Stationary-density residual for the power-well example.
//!
//! For `V = -r^{-alpha}` and `b = -grad V`, the density `rho = e^{-2V}`
//! solves the stationary equation `div((grad/2 - b) rho) = 0` away from the
//! origin. The residual is computed from exact symbolic derivatives of `V`
//! as three separately evaluated pieces,
//!
//! ```text
//! lap(rho)/2 - div(b) rho - b . grad(rho)
//! ```
//!
//! so the analytic cancellation is exercised numerically instead of being
//! assumed.

use super::ClassifyError;

/// Residual of the stationary equation at `x` (any dimension), for the well
/// potential with the given `alpha`.
pub fn power_well_stationary_residual(alpha: f64, x: &[f64]) -> Result<f64, ClassifyError> {
    if !(alpha > 0.0) {
        return Err(ClassifyError::InvalidInput(format!("alpha must be positive, got {alpha}")));
    }
    let d = x.len() as f64;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let r = r2.sqrt();
    if r == 0.0 {
        return Err(ClassifyError::InvalidInput(
            "the well potential is singular at the origin".into(),
        ));
    }

    // grad V = w x with w = alpha r^{-alpha-2};  b = -w x
    let w = alpha * r.powf(-alpha - 2.0);
    // d(w)/dx_i = dw * x_i with dw = -alpha (alpha + 2) r^{-alpha-4}
    let dw = -alpha * (alpha + 2.0) * r.powf(-alpha - 4.0);
    // rho = e^{-2V} = e^{2 r^{-alpha}}
    let rho = (2.0 * r.powf(-alpha)).exp();

    // lap rho = -2 rho (dw r^2 + w d) + 4 rho w^2 r^2
    let lap_rho = -2.0 * rho * (dw * r2 + w * d) + 4.0 * rho * w * w * r2;
    // div b = -(dw r^2 + w d)
    let div_b = -(dw * r2 + w * d);
    // b . grad rho = (-w x) . (-2 rho w x) = 2 rho w^2 r^2
    let b_dot_grad_rho = 2.0 * rho * w * w * r2;

    Ok(0.5 * lap_rho - div_b * rho - b_dot_grad_rho)
}
