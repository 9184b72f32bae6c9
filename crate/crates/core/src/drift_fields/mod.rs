//! Drift vector fields: exact polynomial representations with symbolic
//! differentiation, plus the closed-form radial gradient fields used by the
//! recurrence classifier.
//!
//! The central object is [`PolyDriftField`], a vector field whose components
//! are sparse polynomials. Every derivative a strong Taylor scheme needs
//! (Jacobian entries, component Laplacians) is available exactly via the
//! power rule, so no finite-difference noise enters the integrator.

mod poly;

pub use poly::{Monomial, Poly};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FieldError {
    #[error("point has {got} coordinates, field has dimension {dim}")]
    DimensionMismatch { dim: usize, got: usize },
    #[error("operation requires a 2-D field, got dimension {0}")]
    NotTwoDimensional(usize),
    #[error("component index {index} out of range for dimension {dim}")]
    ComponentOutOfRange { index: usize, dim: usize },
    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),
    #[error("alpha must be positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("field is singular at the origin")]
    SingularAtOrigin,
    #[error("invalid field definition: {0}")]
    InvalidDefinition(String),
}

/// Anything the classifier can evaluate pointwise.
pub trait VectorField {
    fn dim(&self) -> usize;
    fn name(&self) -> &str;
    fn eval_at(&self, x: &[f64]) -> Result<Vec<f64>, FieldError>;
}

/// A drift field whose components are exact polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyDriftField {
    dim: usize,
    components: Vec<Poly>,
    name: String,
}

/// The d x d matrix of partials `entry(k, j) = d b_k / d x_j`, each entry an
/// exact polynomial.
#[derive(Clone, Debug)]
pub struct JacobianField {
    dim: usize,
    entries: Vec<Poly>, // row-major
}

impl JacobianField {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entry(&self, k: usize, j: usize) -> &Poly {
        &self.entries[k * self.dim + j]
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        self.entries.iter().map(|p| p.eval(x)).collect()
    }
}

/// Value of the radial drift component `e_r . b` at a point on the circle of
/// radius `radius` at angle `angle`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialDiagnostics {
    pub radius: f64,
    pub angle: f64,
    pub radial_component: f64,
}

impl PolyDriftField {
    pub fn new(components: Vec<Poly>, name: impl Into<String>) -> Self {
        let dim = components.len();
        assert!(dim > 0, "field needs at least one component");
        for c in &components {
            assert_eq!(c.dim(), dim, "component arity must equal field dimension");
        }
        PolyDriftField { dim, components, name: name.into() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field_name(&self) -> &str {
        &self.name
    }

    pub fn component(&self, k: usize) -> &Poly {
        &self.components[k]
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    /// Exact evaluation of all components at `x`.
    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim, "point arity must equal field dimension");
        self.components.iter().map(|p| p.eval(x)).collect()
    }

    /// Two-dimensional fast path used by the integrator.
    pub fn eval2(&self, x: [f64; 2]) -> [f64; 2] {
        debug_assert_eq!(self.dim, 2);
        [self.components[0].eval(&x), self.components[1].eval(&x)]
    }

    /// Matrix of exact partial derivatives via term-wise power rule.
    pub fn jacobian(&self) -> JacobianField {
        let mut entries = Vec::with_capacity(self.dim * self.dim);
        for k in 0..self.dim {
            for j in 0..self.dim {
                entries.push(self.components[k].partial(j));
            }
        }
        JacobianField { dim: self.dim, entries }
    }

    /// Exact Laplacian of component `k` (0-based).
    pub fn laplacian_component(&self, k: usize) -> Result<Poly, FieldError> {
        if k >= self.dim {
            return Err(FieldError::ComponentOutOfRange { index: k, dim: self.dim });
        }
        Ok(self.components[k].laplacian())
    }

    /// `d1 b2 - d2 b1` as an exact polynomial. A nonzero result certifies
    /// that the field is not the gradient of any potential.
    pub fn curl2d(&self) -> Result<Poly, FieldError> {
        if self.dim != 2 {
            return Err(FieldError::NotTwoDimensional(self.dim));
        }
        Ok(self.components[1].partial(0).sub(&self.components[0].partial(1)))
    }

    /// Radial drift component `(x . b(x)) / r` at `x = (r cos phi, r sin phi)`.
    pub fn radial_component(&self, r: f64, phi: f64) -> Result<RadialDiagnostics, FieldError> {
        if self.dim != 2 {
            return Err(FieldError::NotTwoDimensional(self.dim));
        }
        if !(r > 0.0) {
            return Err(FieldError::NonPositiveRadius(r));
        }
        let x = [r * phi.cos(), r * phi.sin()];
        let b = self.eval2(x);
        let radial = (x[0] * b[0] + x[1] * b[1]) / r;
        Ok(RadialDiagnostics { radius: r, angle: phi, radial_component: radial })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&FieldDef::from(self)).expect("field serialization")
    }

    pub fn from_json_str(s: &str) -> Result<Self, FieldError> {
        let def: FieldDef = serde_json::from_str(s)
            .map_err(|e| FieldError::InvalidDefinition(e.to_string()))?;
        def.try_into()
    }
}

impl VectorField for PolyDriftField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn eval_at(&self, x: &[f64]) -> Result<Vec<f64>, FieldError> {
        if x.len() != self.dim {
            return Err(FieldError::DimensionMismatch { dim: self.dim, got: x.len() });
        }
        Ok(self.eval(x))
    }
}

/// On-disk schema for a field definition.
#[derive(Serialize, Deserialize)]
struct FieldDef {
    dim: usize,
    components: Vec<Vec<Monomial>>,
    name: String,
}

impl From<&PolyDriftField> for FieldDef {
    fn from(f: &PolyDriftField) -> Self {
        FieldDef {
            dim: f.dim,
            components: f.components.iter().map(|p| p.terms().to_vec()).collect(),
            name: f.name.clone(),
        }
    }
}

impl TryFrom<FieldDef> for PolyDriftField {
    type Error = FieldError;

    fn try_from(def: FieldDef) -> Result<Self, FieldError> {
        if def.dim == 0 {
            return Err(FieldError::ZeroDimension);
        }
        if def.components.len() != def.dim {
            return Err(FieldError::InvalidDefinition(format!(
                "{} components for dimension {}",
                def.components.len(),
                def.dim
            )));
        }
        let components = def
            .components
            .into_iter()
            .map(|terms| Poly::try_new(def.dim, terms).map_err(FieldError::InvalidDefinition))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PolyDriftField { dim: def.dim, components, name: def.name })
    }
}

/// The quartic-potential drift: `b = -(Re g', Im g')` for `g(z) = z^4`,
/// i.e. `b1 = -4 x1^3 + 12 x1 x2^2`, `b2 = -12 x1^2 x2 + 4 x2^3`.
pub fn make_z4_field() -> PolyDriftField {
    let b1 = Poly::new(
        2,
        vec![Monomial::new(-4.0, vec![3, 0]), Monomial::new(12.0, vec![1, 2])],
    );
    let b2 = Poly::new(
        2,
        vec![Monomial::new(-12.0, vec![2, 1]), Monomial::new(4.0, vec![0, 3])],
    );
    PolyDriftField::new(vec![b1, b2], "z4")
}

/// The identically zero field in `d` coordinates (pure Brownian motion).
pub fn make_zero_field(dim: usize) -> PolyDriftField {
    PolyDriftField::new(vec![Poly::zero(dim); dim], "zero")
}

/// `b = -grad V` for a polynomial potential `V`.
pub fn gradient_field(potential: &Poly, name: impl Into<String>) -> PolyDriftField {
    let dim = potential.dim();
    let components = (0..dim).map(|j| potential.partial(j).scale(-1.0)).collect();
    PolyDriftField::new(components, name)
}

/// The polynomial gradient field `b = -grad r^4 = -4 r^2 x` in 2-D.
pub fn make_grad_r4_field() -> PolyDriftField {
    let r2 = Poly::new(
        2,
        vec![Monomial::new(1.0, vec![2, 0]), Monomial::new(1.0, vec![0, 2])],
    );
    gradient_field(&r2.mul(&r2), "grad-r4")
}

/// Which gradient example family a [`RadialGradField`] represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PowerFieldKind {
    /// `V = r^alpha`: drift pulled inward by a growing potential.
    Attractive,
    /// `V = -r^{-alpha}`: a potential well that is singular at the origin
    /// and flattens out at infinity.
    RepulsiveWell,
}

/// Closed-form radial gradient field `b = -grad V` for the power-law
/// potentials. Generally non-polynomial, so it is consumed by the
/// classifier only, never by the Taylor integrator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGradField {
    dim: usize,
    alpha: f64,
    kind: PowerFieldKind,
    name: String,
}

/// Builds the gradient field of the power-law potentials: `V = r^alpha`
/// (attractive) or `V = -r^{-alpha}` (repulsive well).
pub fn make_gradient_power_field(
    dim: usize,
    alpha: f64,
    kind: PowerFieldKind,
) -> Result<RadialGradField, FieldError> {
    if dim == 0 {
        return Err(FieldError::ZeroDimension);
    }
    if !(alpha > 0.0) {
        return Err(FieldError::NonPositiveAlpha(alpha));
    }
    let name = match kind {
        PowerFieldKind::Attractive => format!("power-attract(d={dim},alpha={alpha})"),
        PowerFieldKind::RepulsiveWell => format!("power-well(d={dim},alpha={alpha})"),
    };
    Ok(RadialGradField { dim, alpha, kind, name })
}

impl RadialGradField {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kind(&self) -> PowerFieldKind {
        self.kind
    }

    /// Scalar factor `s(r)` in `b(x) = s(r) x`.
    fn scale_factor(&self, r: f64) -> f64 {
        match self.kind {
            // V = r^alpha, b = -alpha r^{alpha-2} x
            PowerFieldKind::Attractive => -self.alpha * r.powf(self.alpha - 2.0),
            // V = -r^{-alpha}, b = -alpha r^{-alpha-2} x
            PowerFieldKind::RepulsiveWell => -self.alpha * r.powf(-self.alpha - 2.0),
        }
    }

    /// `e_r . b` on the sphere of radius `r`; the field is radially
    /// symmetric so this fully determines it.
    pub fn radial_drift(&self, r: f64) -> Result<f64, FieldError> {
        if !(r > 0.0) {
            return Err(FieldError::NonPositiveRadius(r));
        }
        Ok(self.scale_factor(r) * r)
    }
}

impl VectorField for RadialGradField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn eval_at(&self, x: &[f64]) -> Result<Vec<f64>, FieldError> {
        if x.len() != self.dim {
            return Err(FieldError::DimensionMismatch { dim: self.dim, got: x.len() });
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            // V = -r^{-alpha} is singular at 0; V = r^alpha has gradient 0
            // there only when alpha > 1.
            return match self.kind {
                PowerFieldKind::Attractive if self.alpha > 1.0 => Ok(vec![0.0; self.dim]),
                _ => Err(FieldError::SingularAtOrigin),
            };
        }
        let s = self.scale_factor(r);
        Ok(x.iter().map(|&v| s * v).collect())
    }
}

/// The bundled definition of the z4 field, byte-for-byte the file shipped
/// with the binary distribution.
pub const Z4_FIELD_JSON: &str = include_str!("z4_field.json");
