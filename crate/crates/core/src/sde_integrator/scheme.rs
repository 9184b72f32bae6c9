//! One-step integration rules.
//!
//! The order-1.5 strong Taylor step for additive unit noise is
//!
//! ```text
//! Y_{n+1}^k = Y_n^k + b_k D + dW^k + L0 b_k D^2 / 2 + (mixed term)
//! ```
//!
//! with `L0 b_k = b . grad b_k + lap b_k / 2`. The mixed term comes in two
//! variants: `full` sums over all noise indices, `sum_j (d_j b_k) dZ^j`,
//! while `diagonal` keeps only `(d_k b_k) dZ^k`. Both are selectable; `full`
//! is the default.

use serde::{Deserialize, Serialize};

use super::noise::NoiseIncrement;
use super::SimError;
use crate::drift_fields::{Poly, PolyDriftField};

/// Selectable integration scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Taylor15Full,
    Taylor15Diagonal,
    Euler,
}

impl Scheme {
    pub fn parse(s: &str) -> Option<Scheme> {
        match s {
            "taylor15_full" | "taylor15" => Some(Scheme::Taylor15Full),
            "taylor15_diagonal" => Some(Scheme::Taylor15Diagonal),
            "euler" => Some(Scheme::Euler),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Taylor15Full => "taylor15_full",
            Scheme::Taylor15Diagonal => "taylor15_diagonal",
            Scheme::Euler => "euler",
        }
    }
}

/// Mixed-term variant of the Taylor step, for the standalone step function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaylorVariant {
    Full,
    Diagonal,
}

/// A 2-D polynomial flattened to `(coeff, p, q)` triples for the hot loop.
#[derive(Clone, Debug)]
struct Compiled {
    terms: Vec<(f64, i32, i32)>,
}

impl Compiled {
    fn from_poly(p: &Poly) -> Self {
        Compiled {
            terms: p
                .terms()
                .iter()
                .map(|t| (t.coeff, t.powers[0] as i32, t.powers[1] as i32))
                .collect(),
        }
    }

    #[inline]
    fn eval(&self, x: [f64; 2]) -> f64 {
        let mut acc = 0.0;
        for &(c, p, q) in &self.terms {
            acc += c * x[0].powi(p) * x[1].powi(q);
        }
        acc
    }
}

/// Precompiled stepper: the field together with its exact Jacobian and
/// component Laplacians, differentiated once up front so the per-step cost
/// is pure evaluation.
#[derive(Clone, Debug)]
pub struct Stepper {
    scheme: Scheme,
    b: [Compiled; 2],
    // jac[k][j] = d_j b_k
    jac: [[Compiled; 2]; 2],
    lap: [Compiled; 2],
}

impl Stepper {
    pub fn new(field: &PolyDriftField, scheme: Scheme) -> Result<Self, SimError> {
        if field.dim() != 2 {
            return Err(SimError::NotTwoDimensional(field.dim()));
        }
        let jac = field.jacobian();
        Ok(Stepper {
            scheme,
            b: [
                Compiled::from_poly(field.component(0)),
                Compiled::from_poly(field.component(1)),
            ],
            jac: [
                [
                    Compiled::from_poly(jac.entry(0, 0)),
                    Compiled::from_poly(jac.entry(0, 1)),
                ],
                [
                    Compiled::from_poly(jac.entry(1, 0)),
                    Compiled::from_poly(jac.entry(1, 1)),
                ],
            ],
            lap: [
                Compiled::from_poly(&field.component(0).laplacian()),
                Compiled::from_poly(&field.component(1).laplacian()),
            ],
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    #[inline]
    pub fn step(&self, y: [f64; 2], noise: &NoiseIncrement, delta: f64) -> [f64; 2] {
        let b = [self.b[0].eval(y), self.b[1].eval(y)];
        match self.scheme {
            Scheme::Euler => [
                y[0] + b[0] * delta + noise.dw[0],
                y[1] + b[1] * delta + noise.dw[1],
            ],
            Scheme::Taylor15Full | Scheme::Taylor15Diagonal => {
                let j = [
                    [self.jac[0][0].eval(y), self.jac[0][1].eval(y)],
                    [self.jac[1][0].eval(y), self.jac[1][1].eval(y)],
                ];
                let half_d2 = 0.5 * delta * delta;
                let mut out = [0.0; 2];
                for k in 0..2 {
                    // L0 b_k = b . grad b_k + lap b_k / 2
                    let l0 = b[0] * j[k][0] + b[1] * j[k][1] + 0.5 * self.lap[k].eval(y);
                    let mixed = match self.scheme {
                        Scheme::Taylor15Full => j[k][0] * noise.dz[0] + j[k][1] * noise.dz[1],
                        _ => j[k][k] * noise.dz[k],
                    };
                    out[k] = y[k] + b[k] * delta + noise.dw[k] + l0 * half_d2 + mixed;
                }
                out
            }
        }
    }
}

/// One strong Taylor order-1.5 step (convenience wrapper; compiles the
/// field derivatives on every call, so use [`Stepper`] in loops).
pub fn step_taylor15(
    field: &PolyDriftField,
    y: [f64; 2],
    noise: &NoiseIncrement,
    delta: f64,
    variant: TaylorVariant,
) -> Result<[f64; 2], SimError> {
    let scheme = match variant {
        TaylorVariant::Full => Scheme::Taylor15Full,
        TaylorVariant::Diagonal => Scheme::Taylor15Diagonal,
    };
    Ok(Stepper::new(field, scheme)?.step(y, noise, delta))
}

/// One Euler-Maruyama step: `y + b(y) delta + dW`.
pub fn step_euler(
    field: &PolyDriftField,
    y: [f64; 2],
    noise: &NoiseIncrement,
    delta: f64,
) -> Result<[f64; 2], SimError> {
    Ok(Stepper::new(field, Scheme::Euler)?.step(y, noise, delta))
}
