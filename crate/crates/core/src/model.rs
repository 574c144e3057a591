//! MOMOS kinetics: parameters, the feasible homogeneous equilibrium and the
//! kinetic Jacobian.
//!
//! The two-compartment system is
//!
//! ```text
//! ∂t u = D_u Δu − β ∇·(ℓ(u) ∇v) − k1 u − q u² + k2 v
//! ∂t v = D_v Δv + k1 u − k2 v + c
//! ```
//!
//! with `u` the microbial biomass and `v` the soil organic matter.

use crate::error::{Error, Result};
use crate::matrix::Matrix2;
use serde::{Deserialize, Serialize};

/// Density dependence `ℓ(u)` of the chemotactic flux.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChemotacticLaw {
    /// `ℓ(u) = u`.
    #[default]
    Linear,
}

impl ChemotacticLaw {
    pub fn eval(&self, u: f64) -> f64 {
        match self {
            ChemotacticLaw::Linear => u,
        }
    }
}

/// Kinetic and transport constants of the MOMOS system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Biomass diffusivity.
    pub d_u: f64,
    /// Organic-matter diffusivity.
    pub d_v: f64,
    /// Chemotactic sensitivity.
    pub beta: f64,
    /// Microbial mortality rate.
    pub k1: f64,
    /// Carbon degradation rate.
    pub k2: f64,
    /// Metabolic quotient.
    pub q: f64,
    /// Carbon input.
    pub c: f64,
    #[serde(default)]
    pub ell: ChemotacticLaw,
}

impl Default for ModelParams {
    /// `D_u = D_v = 0.6`, `k1 = 0.4`, `k2 = 0.6`, `c = 0.8` with the
    /// reference point `(q, β) = (0.0433, 0.806)`.
    fn default() -> Self {
        Self {
            d_u: 0.6,
            d_v: 0.6,
            beta: 0.806,
            k1: 0.4,
            k2: 0.6,
            q: 0.0433,
            c: 0.8,
            ell: ChemotacticLaw::Linear,
        }
    }
}

/// Positive spatially homogeneous steady state `(u0, v0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub u0: f64,
    pub v0: f64,
}

impl ModelParams {
    pub fn with_q_beta(mut self, q: f64, beta: f64) -> Self {
        self.q = q;
        self.beta = beta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("d_u", self.d_u),
            ("d_v", self.d_v),
            ("k1", self.k1),
            ("k2", self.k2),
            ("q", self.q),
            ("c", self.c),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::domain(
                    name,
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        if !(self.beta.is_finite() && self.beta >= 0.0) {
            return Err(Error::domain(
                "beta",
                format!("must be finite and >= 0, got {}", self.beta),
            ));
        }
        Ok(())
    }

    /// Reaction term of the biomass equation.
    pub fn f(&self, u: f64, v: f64) -> f64 {
        -self.k1 * u - self.q * u * u + self.k2 * v
    }

    /// Reaction term of the organic-matter equation.
    pub fn g(&self, u: f64, v: f64) -> f64 {
        self.k1 * u - self.k2 * v + self.c
    }

    /// `u0 = sqrt(c/q)`, `v0 = (k1/k2) u0 + c/k2`.
    pub fn equilibrium(&self) -> Result<Equilibrium> {
        for (name, value) in [("c", self.c), ("q", self.q), ("k2", self.k2)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::domain(
                    name,
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        let u0 = (self.c / self.q).sqrt();
        let v0 = self.k1 / self.k2 * u0 + self.c / self.k2;
        Ok(Equilibrium { u0, v0 })
    }

    /// `ℓ(u0)`, the chemotactic density evaluated at equilibrium.
    pub fn ell_at_equilibrium(&self) -> Result<f64> {
        Ok(self.ell.eval(self.equilibrium()?.u0))
    }

    /// Kinetic Jacobian at `P0`: `[[−k1 − 2 sqrt(cq), k2], [k1, −k2]]`.
    pub fn jacobian0(&self) -> Result<Matrix2> {
        self.validate()?;
        let root_cq = (self.c * self.q).sqrt();
        Ok(Matrix2::new(
            -self.k1 - 2.0 * root_cq,
            self.k2,
            self.k1,
            -self.k2,
        ))
    }
}

/// Stability of the kinetics alone: `tr J0 < 0` and `det J0 > 0`.
pub fn kinetic_stability(j0: &Matrix2) -> bool {
    j0.trace() < 0.0 && j0.det() > 0.0
}

/// Reactivity of a Jacobian with negative trace:
/// `f_u g_v − (f_v + g_u)²/4 < 0`.
pub fn j0_reactivity(j0: &Matrix2) -> Result<bool> {
    if !(j0.trace() < 0.0) {
        return Err(Error::domain(
            "J0",
            format!("reactivity test needs negative trace, got {}", j0.trace()),
        ));
    }
    let off = j0.a12 + j0.a21;
    Ok(j0.a11 * j0.a22 - off * off / 4.0 < 0.0)
}

/// `(M + Mᵀ)/2`.
pub fn hermitian_part(m: &Matrix2) -> Matrix2 {
    m.hermitian_part()
}

/// Largest eigenvalue of the Hermitian part.
pub fn numerical_abscissa(m: &Matrix2) -> f64 {
    m.numerical_abscissa()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline() -> ModelParams {
        ModelParams::default()
    }

    #[test]
    fn equilibrium_closed_form_and_residual() {
        let p = baseline();
        let eq = p.equilibrium().unwrap();
        assert!((eq.u0 - 4.298_342_771_041_789).abs() < 1e-12);
        assert!((eq.v0 - 4.198_895_180_694_526).abs() < 1e-12);
        assert!(p.f(eq.u0, eq.v0).abs() <= 1e-12 * eq.u0.max(eq.v0));
        assert!(p.g(eq.u0, eq.v0).abs() <= 1e-12 * eq.u0.max(eq.v0));
    }

    #[test]
    fn equilibrium_when_c_equals_q() {
        let p = ModelParams {
            c: 0.3,
            q: 0.3,
            ..baseline()
        };
        let eq = p.equilibrium().unwrap();
        assert_eq!(eq.u0, 1.0);
        assert!((eq.v0 - (p.k1 + p.c) / p.k2).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_fig1_point() {
        let p = baseline().with_q_beta(0.0196639, 0.474095);
        assert!((p.equilibrium().unwrap().u0 - 6.378_376_705_743_655).abs() < 1e-12);
    }

    #[test]
    fn equilibrium_rejects_bad_inputs() {
        for p in [
            ModelParams {
                q: 0.0,
                ..baseline()
            },
            ModelParams {
                c: -1.0,
                ..baseline()
            },
        ] {
            assert!(matches!(p.equilibrium(), Err(Error::Domain { .. })));
        }
    }

    #[test]
    fn jacobian_baseline() {
        let j = baseline().jacobian0().unwrap();
        assert!((j.a11 + 0.77224).abs() < 5e-6);
        assert_eq!((j.a12, j.a21, j.a22), (0.6, 0.4, -0.6));
        assert!((j.det() - 0.22334).abs() < 5e-6);
        assert!((j.trace() + 1.37224).abs() < 5e-6);
        let p = baseline();
        assert!((j.det() - 2.0 * p.k2 * (p.c * p.q).sqrt()).abs() < 1e-15);
        assert!(kinetic_stability(&j));
        let f_u = baseline()
            .with_q_beta(0.0196639, 0.474095)
            .jacobian0()
            .unwrap()
            .a11;
        assert!((f_u + 0.650_847_523_408_145).abs() < 1e-12);
    }

    #[test]
    fn stability_examples() {
        assert!(!kinetic_stability(&Matrix2::diag(1.0, -2.0)));
        assert!(!kinetic_stability(&Matrix2::new(-1.0, 2.0, 2.0, -1.0)));
    }

    #[test]
    fn reactivity_examples() {
        let j = baseline().jacobian0().unwrap();
        let val = j.a11 * j.a22 - (j.a12 + j.a21).powi(2) / 4.0;
        assert!((val - 0.21334).abs() < 5e-6);
        assert!(!j0_reactivity(&j).unwrap());
        assert!(!j0_reactivity(&Matrix2::diag(-1.0, -1.0)).unwrap());
        assert!(j0_reactivity(&Matrix2::new(-1.0, 10.0, 0.0, -1.0)).unwrap());
        assert!(j0_reactivity(&Matrix2::diag(1.0, 1.0)).is_err());
    }
}
