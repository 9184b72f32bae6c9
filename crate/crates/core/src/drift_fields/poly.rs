//! Sparse multivariate polynomials with exact term-wise differentiation.
//!
//! Polynomials are kept in a canonical form (terms sorted by exponent
//! vector, duplicate exponents merged, zero coefficients dropped) so that
//! structural equality coincides with mathematical equality.

use serde::{Deserialize, Serialize};

/// A single term `coeff * x_1^p_1 * ... * x_d^p_d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

impl Monomial {
    pub fn new(coeff: f64, powers: Vec<u32>) -> Self {
        Monomial { coeff, powers }
    }

    pub fn degree(&self) -> u32 {
        self.powers.iter().sum()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.powers.len());
        let mut v = self.coeff;
        for (xi, &p) in x.iter().zip(&self.powers) {
            if p > 0 {
                v *= xi.powi(p as i32);
            }
        }
        v
    }
}

/// A polynomial in `dim` variables, stored as a normalized term list.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly {
    dim: usize,
    terms: Vec<Monomial>,
}

impl Poly {
    /// Builds a polynomial from raw terms, merging duplicates and dropping
    /// zero coefficients. Panics if a term's exponent vector has the wrong
    /// length; use [`Poly::try_new`] for validated construction.
    pub fn new(dim: usize, terms: Vec<Monomial>) -> Self {
        Self::try_new(dim, terms).expect("monomial arity mismatch")
    }

    pub fn try_new(dim: usize, terms: Vec<Monomial>) -> Result<Self, String> {
        for t in &terms {
            if t.powers.len() != dim {
                return Err(format!(
                    "monomial has {} exponents, expected {}",
                    t.powers.len(),
                    dim
                ));
            }
        }
        let mut p = Poly { dim, terms };
        p.normalize();
        Ok(p)
    }

    pub fn zero(dim: usize) -> Self {
        Poly { dim, terms: Vec::new() }
    }

    /// The constant polynomial `c`.
    pub fn constant(dim: usize, c: f64) -> Self {
        Poly::new(dim, vec![Monomial::new(c, vec![0; dim])])
    }

    /// The coordinate polynomial `x_j`.
    pub fn coordinate(dim: usize, j: usize) -> Self {
        let mut powers = vec![0; dim];
        powers[j] = 1;
        Poly::new(dim, vec![Monomial::new(1.0, powers)])
    }

    fn normalize(&mut self) {
        self.terms.sort_by(|a, b| a.powers.cmp(&b.powers));
        let mut merged: Vec<Monomial> = Vec::with_capacity(self.terms.len());
        for t in self.terms.drain(..) {
            match merged.last_mut() {
                Some(last) if last.powers == t.powers => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        self.terms = merged;
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// Exact partial derivative with respect to coordinate `j`.
    pub fn partial(&self, j: usize) -> Poly {
        assert!(j < self.dim, "coordinate index out of range");
        let terms = self
            .terms
            .iter()
            .filter(|t| t.powers[j] > 0)
            .map(|t| {
                let mut powers = t.powers.clone();
                let p = powers[j];
                powers[j] = p - 1;
                Monomial::new(t.coeff * f64::from(p), powers)
            })
            .collect();
        Poly::new(self.dim, terms)
    }

    /// Exact Laplacian: sum of second partials over all coordinates.
    pub fn laplacian(&self) -> Poly {
        let mut acc = Poly::zero(self.dim);
        for j in 0..self.dim {
            acc = acc.add(&self.partial(j).partial(j));
        }
        acc
    }

    pub fn add(&self, other: &Poly) -> Poly {
        assert_eq!(self.dim, other.dim);
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Poly::new(self.dim, terms)
    }

    pub fn scale(&self, c: f64) -> Poly {
        let terms = self
            .terms
            .iter()
            .map(|t| Monomial::new(t.coeff * c, t.powers.clone()))
            .collect();
        Poly::new(self.dim, terms)
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        assert_eq!(self.dim, other.dim);
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let powers = a
                    .powers
                    .iter()
                    .zip(&b.powers)
                    .map(|(&p, &q)| p + q)
                    .collect();
                terms.push(Monomial::new(a.coeff * b.coeff, powers));
            }
        }
        Poly::new(self.dim, terms)
    }
}
