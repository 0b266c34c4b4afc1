//! The explicit building blocks of the field: the affine functions `v_i`, the
//! profile `g` along the interfaces, the even profile `f`, and the planar
//! fields `φ_1`, `φ_2` whose integral curves carry the transport problems.

use crate::geometry::{SectorGeometry, Vec2, SQRT3};

#[derive(Debug, Clone, PartialEq)]
pub struct FieldIngredients {
    epsilon: f64,
    fpp: f64,
    geometry: SectorGeometry,
}

impl FieldIngredients {
    pub fn new(epsilon: f64, fpp: f64) -> Self {
        Self { epsilon, fpp, geometry: SectorGeometry::new() }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn fpp(&self) -> f64 {
        self.fpp
    }

    pub fn geometry(&self) -> &SectorGeometry {
        &self.geometry
    }

    /// Constant gradient of `v_i`.
    pub fn grad_v(&self, i: usize) -> Vec2 {
        match i {
            0 => self.geometry.tau(2),
            1 => self.geometry.ex,
            2 => self.geometry.tau(1),
            _ => panic!("sector index out of range: {i}"),
        }
    }

    pub fn v(&self, i: usize, p: &Vec2) -> f64 {
        self.grad_v(i).dot(p) + self.epsilon
    }

    pub fn g(&self, t: f64) -> f64 {
        1.0 - SQRT3 * self.epsilon * self.epsilon / (self.epsilon - 0.5 * t)
    }

    pub fn g_prime(&self, t: f64) -> f64 {
        let v = self.epsilon - 0.5 * t;
        -0.5 * SQRT3 * self.epsilon * self.epsilon / (v * v)
    }

    pub fn f(&self, s: f64) -> f64 {
        0.5 * self.fpp * s * s
    }

    pub fn f_prime(&self, s: f64) -> f64 {
        self.fpp * s
    }

    /// `φ_i = (−1)^{i+1} f(ν_i·p) τ_i + g(τ_i·p) ν_i` for `i ∈ {1, 2}`.
    pub fn phi(&self, i: usize, p: &Vec2) -> Vec2 {
        let tau = self.geometry.tau(i);
        let nu = self.geometry.nu(i);
        let sign = if i == 1 { 1.0 } else { -1.0 };
        sign * self.f(nu.dot(p)) * tau + self.g(tau.dot(p)) * nu
    }

    /// Jacobian of `φ_i`, rows are the components.
    pub fn phi_jacobian(&self, i: usize, p: &Vec2) -> nalgebra::Matrix2<f64> {
        let tau = self.geometry.tau(i);
        let nu = self.geometry.nu(i);
        let sign = if i == 1 { 1.0 } else { -1.0 };
        sign * self.f_prime(nu.dot(p)) * tau * nu.transpose()
            + self.g_prime(tau.dot(p)) * nu * tau.transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ing() -> FieldIngredients {
        FieldIngredients::new(0.05, -50.0)
    }

    #[test]
    fn v_agree_along_interfaces() {
        let f = ing();
        let g = *f.geometry();
        for s in [0.0, 0.003, 0.01] {
            for i in 1..=2 {
                let p = s * g.tau(i);
                let target = -0.5 * s + 0.05;
                assert!((f.v(i - 1, &p) - target).abs() < 1e-15);
                assert!((f.v(i, &p) - target).abs() < 1e-15);
            }
            let p = Vec2::new(s, 0.0);
            assert!((f.v(0, &p) - f.v(2, &p)).abs() < 1e-16);
        }
    }

    #[test]
    fn gradient_identities() {
        let f = ing();
        let g = *f.geometry();
        for i in 1..=2 {
            let d = f.grad_v(i - 1) - f.grad_v(i);
            assert!((d - SQRT3 * g.nu(i)).norm() < 1e-15);
        }
        assert!((f.grad_v(0) - f.grad_v(2) - SQRT3 * g.ey).norm() < 1e-15);
        assert!((f.grad_v(0) + f.grad_v(2) + g.ex).norm() < 1e-15);
    }

    #[test]
    fn profile_values() {
        let f = ing();
        assert!((f.g(0.0) - (1.0 - SQRT3 * 0.05)).abs() < 1e-15);
        assert!((f.g_prime(0.0) + SQRT3 / 2.0).abs() < 1e-14);
        let h = 1e-6;
        let fd = (f.g(0.002 + h) - f.g(0.002 - h)) / (2.0 * h);
        assert!((fd - f.g_prime(0.002)).abs() < 1e-7);
        assert_eq!(f.f(0.0), 0.0);
        assert_eq!(f.f(0.3), f.f(-0.3));
    }

    #[test]
    fn phi_at_origin_and_on_rays() {
        let f = ing();
        let g = *f.geometry();
        let p0 = f.phi(1, &Vec2::zeros());
        assert!((p0 - Vec2::new(-0.791_025_4, 0.456_698_7)).norm() < 1e-6);
        for i in 1..=2 {
            assert!((f.phi(i, &Vec2::zeros()).y - f.g(0.0) / 2.0).abs() < 1e-15);
            let s = 0.004;
            assert!((f.phi(i, &(s * g.tau(i))) - f.g(s) * g.nu(i)).norm() < 1e-15);
        }
    }

    #[test]
    fn mirror_symmetry_of_phi() {
        let f = ing();
        for p in [Vec2::new(0.003, 0.002), Vec2::new(-0.004, 0.001), Vec2::new(0.0, -0.005)] {
            let m = Vec2::new(p.x, -p.y);
            let a = f.phi(2, &p);
            let b = f.phi(1, &m);
            assert!((a.x + b.x).abs() < 1e-15 && (a.y - b.y).abs() < 1e-15);
        }
    }

    #[test]
    fn jacobian_matches_differences() {
        let f = ing();
        let p = Vec2::new(0.003, -0.002);
        let h = 1e-7;
        for i in 1..=2 {
            let j = f.phi_jacobian(i, &p);
            for a in 0..2 {
                let mut e = Vec2::zeros();
                e[a] = h;
                let col = (f.phi(i, &(p + e)) - f.phi(i, &(p - e))) / (2.0 * h);
                assert!((col - j.column(a)).norm() < 1e-7);
            }
        }
    }
}
