//! Field-line tracing for `φ_1`, `φ_2` and the transport problems solved along
//! their integral curves.
//!
//! `φ_i^y ≥ g/2 > 0` and `φ_i · ν_i = g > 0` on the working disc, so every
//! field line is a graph over `y` and over `ν_i · p`. Both are used as
//! integration variables: `y` to reach the x-axis (giving `h_i` and the
//! branch of `α_i`, `β_i` with data on the x-axis), `ν_i · p` to reach the
//! line spanned by `τ_i` (the branch with data on the ray).

use crate::error::{CalibError, Result};
use crate::harmonic::SectorHarmonicTriple;
use crate::ingredients::FieldIngredients;
use crate::geometry::Vec2;
use crate::params::CalibrationParams;

/// Which solution of the transport problems to use.
///
/// `Auto` is the field itself: the ray branch where `h_i ≤ 0`, the axis
/// branch where `h_i > 0`. The other two extend one branch smoothly across
/// the gluing curve, which gives the one-sided traces of derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Branch {
    #[default]
    Auto,
    Ray,
    Axis,
}

/// Everything the field needs from the characteristics of `φ_i` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aux {
    pub h: f64,
    pub sigma: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone)]
pub struct CharacteristicSolution {
    ingredients: FieldIngredients,
    triple: SectorHarmonicTriple,
    lambda: f64,
    mu: f64,
    u_radius: f64,
    ode_step: f64,
}

struct Trace {
    end: Vec2,
    /// `∫ λ S_α / (d·φ) dc` and the same for `β`, from the start to the target.
    ja: f64,
    jb: f64,
}

impl CharacteristicSolution {
    pub fn new(triple: &SectorHarmonicTriple, params: &CalibrationParams) -> Self {
        Self {
            ingredients: FieldIngredients::new(params.epsilon, params.fpp),
            triple: triple.clone(),
            lambda: params.lambda,
            mu: params.mu,
            u_radius: params.u_radius,
            ode_step: params.ode_step,
        }
    }

    pub fn ingredients(&self) -> &FieldIngredients {
        &self.ingredients
    }

    pub fn ode_step(&self) -> f64 {
        self.ode_step
    }

    pub fn with_ode_step(mut self, step: f64) -> Self {
        assert!(step > 0.0);
        self.ode_step = step;
        self
    }

    pub fn phi(&self, i: usize, p: &Vec2) -> Vec2 {
        self.ingredients.phi(i, p)
    }

    /// Source terms of the transport equations for `α_i` and `β_i`.
    fn sources(&self, i: usize, q: &Vec2) -> (f64, f64) {
        let e2 = self.ingredients.epsilon().powi(2);
        let va = self.ingredients.v(i - 1, q);
        let vb = self.ingredients.v(i, q);
        let sa = self.mu - e2 / (va * va) + self.triple.grad_norm_sq(i - 1, q);
        let sb = self.mu - e2 / (vb * vb) + self.triple.grad_norm_sq(i, q);
        (sa, sb)
    }

    /// Integrates the field line of `φ_i` from `p` until `d·q = target`,
    /// using `d·q` as the independent variable.
    fn trace(&self, i: usize, p: &Vec2, d: Vec2, target: f64, sources: bool) -> Result<Trace> {
        let c0 = d.dot(p);
        let span = target - c0;
        let mut out = Trace { end: *p, ja: 0.0, jb: 0.0 };
        if span == 0.0 {
            return Ok(out);
        }
        let n = ((2.0 * span.abs() / self.ode_step).ceil() as usize).max(2);
        let dc = span / n as f64;
        let limit = 2.0 * self.u_radius;
        let rhs = |q: &Vec2| -> Result<(Vec2, f64, f64)> {
            let phi = self.ingredients.phi(i, q);
            let speed = d.dot(&phi);
            if !(speed.abs() > 1e-12) || q.norm() > limit {
                return Err(CalibError::NoCrossing { x: p.x, y: p.y, limit });
            }
            let (sa, sb) = if sources { self.sources(i, q) } else { (0.0, 0.0) };
            Ok((phi / speed, self.lambda * sa / speed, self.lambda * sb / speed))
        };
        let mut q = *p;
        for _ in 0..n {
            let (k1, a1, b1) = rhs(&q)?;
            let (k2, a2, b2) = rhs(&(q + 0.5 * dc * k1))?;
            let (k3, a3, b3) = rhs(&(q + 0.5 * dc * k2))?;
            let (k4, a4, b4) = rhs(&(q + dc * k3))?;
            q += dc / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            out.ja += dc / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            out.jb += dc / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
        }
        // Land exactly on the target line.
        let miss = target - d.dot(&q);
        q += miss * d;
        if q.norm() > limit {
            return Err(CalibError::NoCrossing { x: p.x, y: p.y, limit });
        }
        out.end = q;
        Ok(out)
    }

    /// Abscissa where the field line of `φ_i` through `p` meets the x-axis.
    pub fn h(&self, i: usize, p: &Vec2) -> Result<f64> {
        if p.y == 0.0 {
            return Ok(p.x);
        }
        Ok(self.trace(i, p, Vec2::new(0.0, 1.0), 0.0, false)?.end.x)
    }

    /// Ordinate at abscissa `x` of the field line of `φ_i` through `(s, 0)`.
    pub fn psi(&self, i: usize, x: f64, s: f64) -> Result<f64> {
        let p = Vec2::new(s, 0.0);
        Ok(self.trace(i, &p, Vec2::new(1.0, 0.0), x, false)?.end.y)
    }

    fn sigma_from_h(&self, i: usize, h: f64) -> f64 {
        if h <= 0.0 {
            1.0
        } else {
            self.sigma_axis(i, h)
        }
    }

    pub fn sigma(&self, i: usize, p: &Vec2) -> Result<f64> {
        Ok(self.sigma_from_h(i, self.h(i, p)?))
    }

    /// `h_i`, `σ_i`, `α_i`, `β_i` at `p`.
    pub fn aux(&self, i: usize, p: &Vec2) -> Result<Aux> {
        if p.y == 0.0 {
            let h = p.x;
            if h > 0.0 {
                return Ok(Aux { h, sigma: self.sigma_from_h(i, h), alpha: 0.0, beta: 0.0 });
            }
        }
        let ty = self.trace(i, p, Vec2::new(0.0, 1.0), 0.0, true)?;
        let h = if p.y == 0.0 { p.x } else { ty.end.x };
        if h > 0.0 {
            let sigma = self.sigma_from_h(i, h);
            return Ok(Aux { h, sigma, alpha: -ty.ja / sigma, beta: -ty.jb / sigma });
        }
        let (alpha, beta) = self.ray_branch(i, p)?;
        Ok(Aux { h, sigma: 1.0, alpha, beta })
    }

    /// `aux` with a prescribed branch.
    pub fn aux_branch(&self, i: usize, p: &Vec2, branch: Branch) -> Result<Aux> {
        match branch {
            Branch::Auto => self.aux(i, p),
            Branch::Ray => {
                let h = self.h(i, p)?;
                let (alpha, beta) = self.ray_branch(i, p)?;
                Ok(Aux { h, sigma: 1.0, alpha, beta })
            }
            Branch::Axis => {
                let ty = self.trace(i, p, Vec2::new(0.0, 1.0), 0.0, true)?;
                let h = if p.y == 0.0 { p.x } else { ty.end.x };
                let sigma = self.sigma_axis(i, h);
                Ok(Aux { h, sigma, alpha: -ty.ja / sigma, beta: -ty.jb / sigma })
            }
        }
    }

    /// `g(h) / (2 φ_i^y(h, 0))` for any `h`.
    pub fn sigma_axis(&self, i: usize, h: f64) -> f64 {
        let phi = self.ingredients.phi(i, &Vec2::new(h, 0.0));
        self.ingredients.g(h) / (2.0 * phi.y)
    }

    /// Both solution branches at `p` regardless of the sign of `h_i`:
    /// `(h, [α, β] with data on the ray line, [α, β] with data on the x-axis)`.
    pub fn both_branches(&self, i: usize, p: &Vec2) -> Result<(f64, [f64; 2], [f64; 2])> {
        let ty = self.trace(i, p, Vec2::new(0.0, 1.0), 0.0, true)?;
        let h = if p.y == 0.0 { p.x } else { ty.end.x };
        let sigma = self.sigma_from_h(i, h.max(0.0));
        let (a, b) = self.ray_branch(i, p)?;
        Ok((h, [a, b], [-ty.ja / sigma, -ty.jb / sigma]))
    }

    fn ray_branch(&self, i: usize, p: &Vec2) -> Result<(f64, f64)> {
        let nu = self.ingredients.geometry().nu(i);
        let tn = self.trace(i, p, nu, 0.0, true)?;
        Ok((-tn.ja, -tn.jb))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SQRT3;

    fn params() -> CalibrationParams {
        CalibrationParams {
            epsilon: 0.05,
            lambda: 0.2,
            mu: 20.0,
            l1: 0.5,
            l2: 1.5,
            fpp: -50.0,
            u_radius: 0.005,
            ode_step: 0.005 / 32.0,
            quad_tol: 1e-10,
        }
    }

    fn solution() -> CharacteristicSolution {
        CharacteristicSolution::new(&SectorHarmonicTriple::constants([0.0, 1.0, 2.0]), &params())
    }

    #[test]
    fn h_on_axis_is_identity() {
        let c = solution();
        for s in [-0.004, 0.0, 0.002] {
            assert_eq!(c.h(1, &Vec2::new(s, 0.0)).unwrap(), s);
        }
    }

    #[test]
    fn h_is_nonpositive_on_own_ray() {
        let c = solution();
        let g = *c.ingredients().geometry();
        for i in 1..=2 {
            for s in [0.0, 0.001, 0.004] {
                assert!(c.h(i, &(s * g.tau(i))).unwrap() <= 0.0);
            }
        }
    }

    #[test]
    fn h_is_constant_along_field_lines() {
        let c = solution();
        let p = Vec2::new(0.001, 0.002);
        let h = c.h(1, &p).unwrap();
        let q = p + 1e-4 * c.phi(1, &p);
        // One Euler step leaves an O(dt^2) error.
        assert!((c.h(1, &q).unwrap() - h).abs() < 1e-7);
    }

    #[test]
    fn slope_of_field_lines_at_origin() {
        let c = solution();
        for i in 1..=2 {
            let d = 1e-3;
            let slope = (c.psi(i, d, 0.0).unwrap() - c.psi(i, -d, 0.0).unwrap()) / (2.0 * d);
            let expected = if i == 1 { -1.0 } else { 1.0 } / SQRT3;
            assert!((slope - expected).abs() < 1e-3 * expected.abs(), "{slope} vs {expected}");
        }
    }

    #[test]
    fn sigma_is_one_on_ray_and_continuous_at_origin() {
        let c = solution();
        let g = *c.ingredients().geometry();
        assert_eq!(c.sigma(1, &(0.003 * g.tau(1))).unwrap(), 1.0);
        let near = c.sigma(1, &Vec2::new(1e-9, 0.0)).unwrap();
        assert!((near - 1.0).abs() < 1e-6);
    }

    #[test]
    fn cauchy_data_vanish() {
        let c = solution();
        let g = *c.ingredients().geometry();
        for i in 1..=2 {
            for s in [0.0, 0.001, 0.003] {
                let a = c.aux(i, &Vec2::new(s, 0.0)).unwrap();
                assert_eq!((a.alpha, a.beta), (0.0, 0.0));
                let r = c.aux(i, &(s * g.tau(i))).unwrap();
                assert!(r.alpha.abs() < 1e-15 && r.beta.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mirror_symmetry() {
        let c = solution();
        for p in [Vec2::new(0.002, 0.001), Vec2::new(-0.001, 0.003), Vec2::new(0.003, -0.002)] {
            let m = Vec2::new(p.x, -p.y);
            let a = c.aux(2, &p).unwrap();
            let b = c.aux(1, &m).unwrap();
            assert!((a.h - b.h).abs() < 1e-14);
            assert!((a.sigma - b.sigma).abs() < 1e-14);
        }
    }

    #[test]
    fn branches_agree_on_the_gluing_line() {
        let c = solution();
        // Points on the field line through the origin.
        for s in [-0.003, 0.002] {
            let y = c.psi(1, s, 0.0).unwrap();
            let (_, ray, axis) = c.both_branches(1, &Vec2::new(s, y)).unwrap();
            assert!((ray[0] - axis[0]).abs() < 1e-12 && (ray[1] - axis[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn step_independence() {
        let c = solution();
        let fine = c.clone().with_ode_step(params().ode_step / 8.0);
        for p in [Vec2::new(0.002, 0.001), Vec2::new(-0.003, -0.002)] {
            for i in 1..=2 {
                let a = c.aux(i, &p).unwrap();
                let b = fine.aux(i, &p).unwrap();
                assert!((a.alpha - b.alpha).abs() < 1e-12 && (a.beta - b.beta).abs() < 1e-12);
                assert!((a.h - b.h).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn transport_equation_residual() {
        let c = solution();
        let lambda = params().lambda;
        let mu = params().mu;
        let ing = c.ingredients().clone();
        for p in [Vec2::new(0.002, 0.001), Vec2::new(-0.002, 0.001), Vec2::new(0.001, -0.003)] {
            for i in 1..=2 {
                let a = c.aux(i, &p).unwrap();
                let phi = c.phi(i, &p);
                let dt = 1e-5;
                let fwd = c.aux(i, &(p + dt * phi)).unwrap();
                let bwd = c.aux(i, &(p - dt * phi)).unwrap();
                let dir = (fwd.alpha - bwd.alpha) / (2.0 * dt);
                let v = ing.v(i - 1, &p);
                let src = mu - 0.0025 / (v * v);
                let res = a.sigma * dir / lambda - src;
                assert!(res.abs() < 1e-6, "i={i} p={p:?} residual {res}");
            }
        }
    }

    #[test]
    fn leaving_the_disc_is_reported() {
        let c = solution();
        let err = c.aux(1, &Vec2::new(0.0, 0.0099)).unwrap_err();
        assert!(matches!(err, CalibError::NoCrossing { .. }));
    }
}
