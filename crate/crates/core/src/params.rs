//! Construction parameters of the calibration field.

use serde::{Deserialize, Serialize};

use crate::error::{CalibError, Result};
use crate::geometry::SQRT3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationParams {
    /// Half-width of the bands around the graphs of `u_i`.
    pub epsilon: f64,
    /// Scale of the bands `K_i` between consecutive graphs.
    pub lambda: f64,
    /// Vertical component of the field on `K_i`.
    pub mu: f64,
    pub l1: f64,
    pub l2: f64,
    /// Second derivative at the origin of the even profile `f`.
    pub fpp: f64,
    /// Radius of the working neighbourhood `U`.
    pub u_radius: f64,
    /// Maximal step of the field-line integrator.
    pub ode_step: f64,
    pub quad_tol: f64,
}

/// Partial parameter set; `None` entries are filled by `select_params`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub epsilon: Option<f64>,
    pub lambda: Option<f64>,
    pub mu: Option<f64>,
    pub l1: Option<f64>,
    pub l2: Option<f64>,
    pub fpp: Option<f64>,
    pub u_radius: Option<f64>,
    pub ode_step: Option<f64>,
    pub quad_tol: Option<f64>,
}

impl CalibrationParams {
    pub fn l(&self, i: usize) -> f64 {
        match i {
            1 => self.l1,
            2 => self.l2,
            _ => panic!("band index must be 1 or 2, got {i}"),
        }
    }

    pub fn g0(&self) -> f64 {
        1.0 - SQRT3 * self.epsilon
    }

    /// Checks the inequalities that do not involve the triple or the characteristics.
    pub fn validate_scalars(&self) -> Result<()> {
        let fail = |msg: String| Err(CalibError::InfeasibleParams(msg));
        let all = [
            self.epsilon,
            self.lambda,
            self.mu,
            self.l1,
            self.l2,
            self.fpp,
            self.u_radius,
            self.ode_step,
            self.quad_tol,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return fail("all parameters must be finite".into());
        }
        if self.epsilon <= 0.0 {
            return fail(format!("epsilon = {} must be positive", self.epsilon));
        }
        if self.g0() <= 0.0 {
            return fail(format!(
                "g(0) = 1 - sqrt(3)*epsilon = {:.6} must be positive (epsilon < 1/sqrt(3))",
                self.g0()
            ));
        }
        if self.epsilon >= SQRT3 {
            return fail(format!("epsilon = {} must be below sqrt(3)", self.epsilon));
        }
        if 0.75 - SQRT3 / (2.0 * self.epsilon) >= 0.0 {
            return fail("3/4 - sqrt(3)/(2 epsilon) must be negative".into());
        }
        if self.lambda <= 0.0 {
            return fail(format!("lambda = {} must be positive", self.lambda));
        }
        let mu_min = 1.0 / (4.0 * self.lambda * self.lambda);
        if self.mu <= mu_min {
            return fail(format!("mu = {} must exceed 1/(4 lambda^2) = {mu_min}", self.mu));
        }
        if self.fpp >= 0.0 {
            return fail(format!("f''(0) = {} must be negative", self.fpp));
        }
        if self.u_radius <= 0.0 || self.u_radius >= 1.0 {
            return fail(format!("u_radius = {} must lie in (0, 1)", self.u_radius));
        }
        if self.ode_step <= 0.0 || self.quad_tol <= 0.0 {
            return fail("ode_step and quad_tol must be positive".into());
        }
        Ok(())
    }
}

/// Right-hand side of the upper bound on `f''(0)`.
pub fn fpp_bound(epsilon: f64, uyy0: f64, uyy2: f64) -> f64 {
    -2.0 * SQRT3 - 2.0 / epsilon - (2.0 * epsilon / 3.0) * (uyy0 * uyy0 + uyy2 * uyy2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> CalibrationParams {
        CalibrationParams {
            epsilon: 0.05,
            lambda: 0.1,
            mu: 40.0,
            l1: 0.5,
            l2: 1.5,
            fpp: -50.0,
            u_radius: 0.01,
            ode_step: 1e-4,
            quad_tol: 1e-10,
        }
    }

    #[test]
    fn defaults_validate() {
        base().validate_scalars().unwrap();
        assert!((base().g0() - (1.0 - SQRT3 * 0.05)).abs() < 1e-16);
    }

    #[test]
    fn large_epsilon_rejected() {
        let p = CalibrationParams { epsilon: 0.6, ..base() };
        let err = p.validate_scalars().unwrap_err().to_string();
        assert!(err.contains("g(0)"), "{err}");
    }

    #[test]
    fn small_mu_rejected() {
        let p = CalibrationParams { mu: 20.0, ..base() };
        assert!(p.validate_scalars().is_err());
    }

    #[test]
    fn fpp_bound_for_flat_triple() {
        let b = fpp_bound(0.05, 0.0, 0.0);
        assert!((b - (-2.0 * SQRT3 - 40.0)).abs() < 1e-12);
        assert!((b + 43.4641).abs() < 1e-4);
    }
}
