//! Sector geometry of the rectilinear triple junction.
//!
//! The unit disc is split into three open sectors `A_0`, `A_1`, `A_2` by the
//! rays `S_{0,1}` (angle 4π/3), `S_{1,2}` (angle 2π/3) and `S_{0,2}` (angle 0).
//! All membership tests below are sign tests on dot and cross products; no
//! angle is ever reduced modulo 2π.

use std::fmt;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{CalibError, Result};

pub type Vec2 = Vector2<f64>;

pub const SQRT3: f64 = 1.732_050_807_568_877_2;

/// z-component of the planar cross product.
#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Rotation by +90 degrees.
#[inline]
pub fn perp(a: &Vec2) -> Vec2 {
    Vec2::new(-a.y, a.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Interface {
    S01,
    S12,
    S02,
}

impl Interface {
    pub const ALL: [Interface; 3] = [Interface::S01, Interface::S12, Interface::S02];

    /// The two sectors adjacent to this interface, lower index first.
    pub fn sectors(self) -> (usize, usize) {
        match self {
            Interface::S01 => (0, 1),
            Interface::S12 => (1, 2),
            Interface::S02 => (0, 2),
        }
    }

    pub fn between(i: usize, j: usize) -> Interface {
        match (i.min(j), i.max(j)) {
            (0, 1) => Interface::S01,
            (1, 2) => Interface::S12,
            (0, 2) => Interface::S02,
            _ => panic!("no interface between sectors {i} and {j}"),
        }
    }
}

impl fmt::Display for Interface {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Interface::S01 => "S_{0,1}",
            Interface::S12 => "S_{1,2}",
            Interface::S02 => "S_{0,2}",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PointLabel {
    Sector(usize),
    Interface(Interface),
    Origin,
}

/// Unit vectors attached to the junction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorGeometry {
    /// `tau[0] = τ_1`, `tau[1] = τ_2`.
    pub tau: [Vec2; 2],
    /// `nu[0] = ν_1`, `nu[1] = ν_2`.
    pub nu: [Vec2; 2],
    pub ex: Vec2,
    pub ey: Vec2,
}

impl Default for SectorGeometry {
    fn default() -> Self {
        Self::new()
    }
}

impl SectorGeometry {
    pub fn new() -> Self {
        let h = 0.5 * SQRT3;
        Self {
            tau: [Vec2::new(-0.5, -h), Vec2::new(-0.5, h)],
            nu: [Vec2::new(-h, 0.5), Vec2::new(h, 0.5)],
            ex: Vec2::new(1.0, 0.0),
            ey: Vec2::new(0.0, 1.0),
        }
    }

    /// `τ_i` for `i ∈ {1, 2}`.
    #[inline]
    pub fn tau(&self, i: usize) -> Vec2 {
        self.tau[i - 1]
    }

    /// `ν_i` for `i ∈ {1, 2}`.
    #[inline]
    pub fn nu(&self, i: usize) -> Vec2 {
        self.nu[i - 1]
    }

    /// Unit direction of an interface ray.
    pub fn ray(&self, s: Interface) -> Vec2 {
        match s {
            Interface::S01 => self.tau[0],
            Interface::S12 => self.tau[1],
            Interface::S02 => self.ex,
        }
    }

    /// Oriented normal `ν_u` on an interface (points from the lower to the higher value).
    pub fn normal(&self, s: Interface) -> Vec2 {
        match s {
            Interface::S01 => self.nu[0],
            Interface::S12 => self.nu[1],
            Interface::S02 => self.ey,
        }
    }

    /// Unit vector along the bisector of sector `i` (angles 5π/3, π, π/3).
    pub fn bisector(&self, i: usize) -> Vec2 {
        let h = 0.5 * SQRT3;
        match i {
            0 => Vec2::new(0.5, -h),
            1 => Vec2::new(-1.0, 0.0),
            2 => Vec2::new(0.5, h),
            _ => panic!("sector index {i} out of range"),
        }
    }

    pub fn bisector_angle(i: usize) -> f64 {
        use std::f64::consts::PI;
        match i {
            0 => 5.0 * PI / 3.0,
            1 => PI,
            2 => PI / 3.0,
            _ => panic!("sector index {i} out of range"),
        }
    }

    /// The two bounding rays of sector `i`, in counter-clockwise order.
    pub fn sector_edges(&self, i: usize) -> (Interface, Interface) {
        match i {
            0 => (Interface::S01, Interface::S02),
            1 => (Interface::S12, Interface::S01),
            2 => (Interface::S02, Interface::S12),
            _ => panic!("sector index {i} out of range"),
        }
    }

    /// Ray opposite to the bisector of sector `i`: the cut of its antisymmetric extension.
    pub fn slit_of(i: usize) -> Interface {
        match i {
            0 => Interface::S12,
            1 => Interface::S02,
            2 => Interface::S01,
            _ => panic!("sector index {i} out of range"),
        }
    }

    /// Sector whose antisymmetric extension is cut along `s`.
    pub fn slit_owner(s: Interface) -> usize {
        match s {
            Interface::S12 => 0,
            Interface::S02 => 1,
            Interface::S01 => 2,
        }
    }

    pub fn on_ray(&self, s: Interface, p: &Vec2) -> bool {
        let d = self.ray(s);
        cross(&d, p) == 0.0 && d.dot(p) > 0.0
    }

    /// Classification with exact ray membership; no tolerance.
    pub fn classify_point(&self, p: &Vec2) -> Result<PointLabel> {
        if !(p.norm_squared() < 1.0) {
            return Err(CalibError::OutOfDomain { x: p.x, y: p.y, radius: 1.0 });
        }
        if p.x == 0.0 && p.y == 0.0 {
            return Ok(PointLabel::Origin);
        }
        for s in Interface::ALL {
            if self.on_ray(s, p) {
                return Ok(PointLabel::Interface(s));
            }
        }
        Ok(PointLabel::Sector(self.sector_of(p)))
    }

    /// Sector containing an off-ray, non-zero point.
    pub fn sector_of(&self, p: &Vec2) -> usize {
        for i in 0..3 {
            let (a, b) = self.sector_edges(i);
            if cross(&self.ray(a), p) > 0.0 && cross(p, &self.ray(b)) > 0.0 {
                return i;
            }
        }
        // Only reachable for points on a ray; attribute them to the sector whose
        // upper (counter-clockwise) edge they lie on.
        for i in 0..3 {
            let (_, b) = self.sector_edges(i);
            if self.on_ray(b, p) {
                return i;
            }
        }
        0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_is_orthonormal() {
        let g = SectorGeometry::new();
        for i in 1..=2 {
            assert!(g.tau(i).dot(&g.nu(i)).abs() < 1e-15);
            assert!((g.tau(i).norm() - 1.0).abs() < 1e-15);
            assert!((g.nu(i).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rays_meet_at_120_degrees() {
        let g = SectorGeometry::new();
        for (a, b) in [
            (Interface::S01, Interface::S12),
            (Interface::S12, Interface::S02),
            (Interface::S01, Interface::S02),
        ] {
            assert!((g.ray(a).dot(&g.ray(b)) + 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn normals_are_orthogonal_to_their_rays() {
        let g = SectorGeometry::new();
        for s in Interface::ALL {
            assert!(g.ray(s).dot(&g.normal(s)).abs() < 1e-15);
        }
        // ν_u points from the lower-valued sector into the higher-valued one.
        assert_eq!(g.sector_of(&(g.ray(Interface::S01) + 0.1 * g.normal(Interface::S01))), 1);
        assert_eq!(g.sector_of(&(g.ray(Interface::S12) * 0.5 + 0.1 * g.normal(Interface::S12))), 2);
        assert_eq!(g.sector_of(&(g.ray(Interface::S02) * 0.5 + 0.1 * g.normal(Interface::S02))), 2);
    }

    #[test]
    fn classify_examples() {
        let g = SectorGeometry::new();
        let l = |x, y| g.classify_point(&Vec2::new(x, y)).unwrap();
        assert_eq!(l(0.5, 0.0), PointLabel::Interface(Interface::S02));
        assert_eq!(l(-0.25, -0.25 * SQRT3), PointLabel::Interface(Interface::S01));
        assert_eq!(l(0.0, -0.3), PointLabel::Sector(0));
        assert_eq!(l(-0.3, 0.0), PointLabel::Sector(1));
        assert_eq!(l(0.1, 0.3), PointLabel::Sector(2));
        assert_eq!(l(0.0, 0.0), PointLabel::Origin);
        assert!(matches!(
            g.classify_point(&Vec2::new(1.0, 0.0)),
            Err(CalibError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn bisector_matches_angle() {
        let g = SectorGeometry::new();
        for i in 0..3 {
            let t = SectorGeometry::bisector_angle(i);
            assert!((g.bisector(i) - Vec2::new(t.cos(), t.sin())).norm() < 1e-15);
            let slit = g.ray(SectorGeometry::slit_of(i));
            assert!((slit + g.bisector(i)).norm() < 1e-15);
        }
    }
}
