//! Radial envelopes of the drift comparison function.
//!
//! For a drift `b` in dimension `d` the comparison function is
//! `C(x) = 2 sum_i x_i b_i(x)`; its circle-wise envelopes
//!
//! ```text
//! beta_upper(r) = sup_{|x|=r} (d - 1 + C(x)),   beta_lower(r) = inf (...)
//! ```
//!
//! and their logarithmic integrals `I(r) = int_{r0}^r beta(u)/u du` are the
//! inputs to every integral criterion. Built-in profiles carry closed forms
//! for both; general 2-D fields are handled by sampling the circle and
//! refining the discrete extremum with golden-section search.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use super::{c_function, ClassifyError};
use crate::drift_fields::VectorField;

/// Which envelope of `d - 1 + C` is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Envelope {
    Upper,
    Lower,
}

#[derive(Clone)]
enum ProfileKind {
    /// Zero drift: `beta = d - 1`.
    Brownian,
    /// `V = -r^{-alpha}`: `beta = d - 1 - 2 alpha r^{-alpha}`.
    PowerWell { alpha: f64 },
    /// `V = r^alpha`: `beta = d - 1 - 2 alpha r^alpha`.
    PowerAttract { alpha: f64 },
    /// The quartic-potential drift: `beta = 1 +/- 8 r^4`.
    Z4,
    /// Envelopes sampled from a concrete 2-D field on each circle.
    Sampled {
        field: Arc<dyn VectorField + Send + Sync>,
        n_angles: usize,
        // circle scans repeat at the same radii across quadrature
        // refinements; memoizing them is a large constant-factor win
        cache: Arc<Mutex<HashMap<u64, (f64, f64)>>>,
    },
}

/// Radial envelope pair `(beta_upper, beta_lower)` for one drift field,
/// with closed-form logarithmic integrals where available.
#[derive(Clone)]
pub struct RadialProfile {
    dim: usize,
    name: String,
    kind: ProfileKind,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("dim", &self.dim)
            .field("name", &self.name)
            .finish()
    }
}

impl RadialProfile {
    pub fn brownian(dim: usize) -> Result<Self, ClassifyError> {
        if dim == 0 {
            return Err(ClassifyError::InvalidInput("dimension must be positive".into()));
        }
        Ok(RadialProfile {
            dim,
            name: format!("brownian(d={dim})"),
            kind: ProfileKind::Brownian,
        })
    }

    pub fn power_well(dim: usize, alpha: f64) -> Result<Self, ClassifyError> {
        if dim == 0 {
            return Err(ClassifyError::InvalidInput("dimension must be positive".into()));
        }
        if !(alpha > 0.0) {
            return Err(ClassifyError::InvalidInput(format!("alpha must be positive, got {alpha}")));
        }
        Ok(RadialProfile {
            dim,
            name: format!("power-well(d={dim},alpha={alpha})"),
            kind: ProfileKind::PowerWell { alpha },
        })
    }

    pub fn power_attract(dim: usize, alpha: f64) -> Result<Self, ClassifyError> {
        if dim == 0 {
            return Err(ClassifyError::InvalidInput("dimension must be positive".into()));
        }
        if !(alpha > 0.0) {
            return Err(ClassifyError::InvalidInput(format!("alpha must be positive, got {alpha}")));
        }
        Ok(RadialProfile {
            dim,
            name: format!("power-attract(d={dim},alpha={alpha})"),
            kind: ProfileKind::PowerAttract { alpha },
        })
    }

    pub fn z4() -> Self {
        RadialProfile { dim: 2, name: "z4".into(), kind: ProfileKind::Z4 }
    }

    /// Envelopes sampled from a concrete field. Restricted to 2-D fields,
    /// where "equispaced points on |x| = r" is canonical.
    pub fn sampled(
        field: Arc<dyn VectorField + Send + Sync>,
        n_angles: usize,
    ) -> Result<Self, ClassifyError> {
        if field.dim() != 2 {
            return Err(ClassifyError::InvalidInput(format!(
                "sampled envelopes need a 2-D field, got dimension {}",
                field.dim()
            )));
        }
        if n_angles < 8 {
            return Err(ClassifyError::InvalidInput(format!(
                "need at least 8 sample angles, got {n_angles}"
            )));
        }
        Ok(RadialProfile {
            dim: 2,
            name: format!("sampled({})", field.name()),
            kind: ProfileKind::Sampled {
                field,
                n_angles,
                cache: Arc::new(Mutex::new(HashMap::new())),
            },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Envelope value `beta(r)`.
    pub fn beta(&self, which: Envelope, r: f64) -> f64 {
        let d1 = (self.dim - 1) as f64;
        match &self.kind {
            ProfileKind::Brownian => d1,
            ProfileKind::PowerWell { alpha } => d1 - 2.0 * alpha * r.powf(-alpha),
            ProfileKind::PowerAttract { alpha } => d1 - 2.0 * alpha * r.powf(*alpha),
            ProfileKind::Z4 => match which {
                Envelope::Upper => 1.0 + 8.0 * r.powi(4),
                Envelope::Lower => 1.0 - 8.0 * r.powi(4),
            },
            ProfileKind::Sampled { field, n_angles, cache } => {
                let key = r.to_bits();
                if let Some(&(up, lo)) = cache.lock().unwrap().get(&key) {
                    return match which {
                        Envelope::Upper => up,
                        Envelope::Lower => lo,
                    };
                }
                let (up, lo) = envelopes(field.as_ref(), r, *n_angles)
                    .expect("sampled profile fields are total on r > 0");
                cache.lock().unwrap().insert(key, (up, lo));
                match which {
                    Envelope::Upper => up,
                    Envelope::Lower => lo,
                }
            }
        }
    }

    /// Closed form of `I(r) = int_{r0}^r beta(u)/u du`, when the profile
    /// has one.
    pub fn i_closed(&self, which: Envelope, r0: f64, r: f64) -> Option<f64> {
        let d1 = (self.dim - 1) as f64;
        let log_ratio = (r / r0).ln();
        match &self.kind {
            ProfileKind::Brownian => Some(d1 * log_ratio),
            ProfileKind::PowerWell { alpha } => {
                Some(d1 * log_ratio + 2.0 * (r.powf(-alpha) - r0.powf(-alpha)))
            }
            ProfileKind::PowerAttract { alpha } => {
                Some(d1 * log_ratio - 2.0 * (r.powf(*alpha) - r0.powf(*alpha)))
            }
            ProfileKind::Z4 => {
                let quartic = 2.0 * (r.powi(4) - r0.powi(4));
                Some(match which {
                    Envelope::Upper => log_ratio + quartic,
                    Envelope::Lower => log_ratio - quartic,
                })
            }
            ProfileKind::Sampled { .. } => None,
        }
    }

    /// `I(r)` by adaptive quadrature of `beta(u)/u`, regardless of closed
    /// form. Kept as the independent numeric route for cross-checks.
    pub fn i_numeric(&self, which: Envelope, r0: f64, r: f64) -> Result<f64, ClassifyError> {
        check_interval(r0, r)?;
        if r == r0 {
            return Ok(0.0);
        }
        adaptive_simpson(&|u| self.beta(which, u) / u, r0, r, 1e-10, 40)
    }

    /// `I(r)`: closed form when available, otherwise quadrature.
    pub fn i_integral(&self, which: Envelope, r0: f64, r: f64) -> Result<f64, ClassifyError> {
        check_interval(r0, r)?;
        if r == r0 {
            return Ok(0.0);
        }
        match self.i_closed(which, r0, r) {
            Some(v) => Ok(v),
            None => self.i_numeric(which, r0, r),
        }
    }

    /// True when `beta_upper >= beta_lower` holds on the given radii.
    pub fn envelope_order_ok(&self, radii: &[f64]) -> bool {
        radii
            .iter()
            .all(|&r| self.beta(Envelope::Upper, r) >= self.beta(Envelope::Lower, r))
    }
}

fn check_interval(r0: f64, r: f64) -> Result<(), ClassifyError> {
    if !(r0 > 0.0) || !(r >= r0) {
        return Err(ClassifyError::InvalidInput(format!(
            "need 0 < r0 <= r, got r0={r0}, r={r}"
        )));
    }
    Ok(())
}

/// Golden-section maximization of `f` on `[a, b]` to the given abscissa
/// tolerance. Returns the maximal value found.
fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    fc.max(fd).max(f(0.5 * (a + b)))
}

/// `(beta_upper(r), beta_lower(r))` for a concrete 2-D field: grid scan of
/// `d - 1 + C` over `n_angles` equispaced circle points, then golden-section
/// refinement around the discrete extrema (angle tolerance 1e-10).
pub fn envelopes(
    field: &dyn VectorField,
    r: f64,
    n_angles: usize,
) -> Result<(f64, f64), ClassifyError> {
    if field.dim() != 2 {
        return Err(ClassifyError::InvalidInput(format!(
            "envelope sampling needs a 2-D field, got dimension {}",
            field.dim()
        )));
    }
    if !(r > 0.0) {
        return Err(ClassifyError::InvalidInput(format!("radius must be positive, got {r}")));
    }
    if n_angles < 8 {
        return Err(ClassifyError::InvalidInput(format!(
            "need at least 8 sample angles, got {n_angles}"
        )));
    }
    let d1 = (field.dim() - 1) as f64;
    let h = |phi: f64| -> f64 {
        let x = [r * phi.cos(), r * phi.sin()];
        d1 + c_function(field, &x).expect("2-D field evaluation away from the origin")
    };
    let two_pi = 2.0 * std::f64::consts::PI;
    let step = two_pi / n_angles as f64;
    let values: Vec<f64> = (0..n_angles)
        .map(|i| h(-std::f64::consts::PI + step * i as f64))
        .collect();
    let refine = |idx: usize, sign: f64| -> f64 {
        let phi = -std::f64::consts::PI + step * idx as f64;
        sign * golden_max(&|p| sign * h(p), phi - step, phi + step, 1e-10)
    };
    let (mut imax, mut imin) = (0, 0);
    for (i, v) in values.iter().enumerate() {
        if *v > values[imax] {
            imax = i;
        }
        if *v < values[imin] {
            imin = i;
        }
    }
    Ok((refine(imax, 1.0), refine(imin, -1.0)))
}

/// Adaptive Simpson quadrature with Richardson acceptance.
pub fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    max_depth: u32,
) -> Result<f64, ClassifyError> {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64, ClassifyError> {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        if depth == 0 {
            return Err(ClassifyError::QuadratureNonConvergence {
                interval: (a, b),
                residual: delta.abs(),
            });
        }
        Ok(recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }

    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, b - a);
    let tol = rel_tol * whole.abs().max(1.0);
    recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)
}
