//! The candidate triple `u = (u_0, u_1, u_2)`: one harmonic function per sector,
//! realised as finite sums of Neumann eigenmodes of the 2π/3 sector.
//!
//! Symmetric family: `u_i = a_i + Σ c_k r^{3k} cos(3k(θ − θ_i))`.
//! Antisymmetric family: `u_i = a_i + s_i Σ c_k r^{m_k} sin(m_k(θ − θ_i))` with
//! `m_k = 3(2k+1)/2`, `k ≥ 1`, and signs `s = (+1, −1, +1)`.
//!
//! Evaluation works in the local frame of sector `i` (bisector as real axis),
//! where each mode is the real or imaginary part of `c w^m`, so values,
//! gradients and Hessians are exact.

use nalgebra::Matrix2;
use serde::{Deserialize, Serialize};

use crate::error::{CalibError, Result};
use crate::geometry::{cross, perp, Interface, SectorGeometry, Vec2};

pub const MAX_MODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Symmetry {
    Symmetric,
    Antisymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub k: u32,
    pub c: f64,
}

impl Mode {
    pub fn new(k: u32, c: f64) -> Self {
        Self { k, c }
    }
}

/// Value, gradient and Hessian at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub gradient: Vec2,
    pub hessian: Matrix2<f64>,
}

/// Where the harmonic extension of `u_i` is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExtensionDomain {
    FullDisc,
    SlitDisc { slit: Interface },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SectorHarmonicTriple {
    symmetry: Symmetry,
    modes: [Vec<Mode>; 3],
    constants: [f64; 3],
    geometry: SectorGeometry,
}

impl SectorHarmonicTriple {
    /// Rotated copies of one mode list in all three sectors.
    pub fn new(symmetry: Symmetry, modes: Vec<Mode>, constants: [f64; 3]) -> Result<Self> {
        Self::with_sector_modes(symmetry, [modes.clone(), modes.clone(), modes], constants)
    }

    pub fn constants(constants: [f64; 3]) -> Self {
        Self::new(Symmetry::Symmetric, Vec::new(), constants).expect("constant triple is always valid")
    }

    /// Independent mode lists per sector. Nothing forces the interface
    /// conditions here; `check_hypotheses` reports whether they hold.
    pub fn with_sector_modes(
        symmetry: Symmetry,
        modes: [Vec<Mode>; 3],
        constants: [f64; 3],
    ) -> Result<Self> {
        if constants.iter().any(|a| !a.is_finite()) {
            return Err(CalibError::InvalidTriple("constants must be finite".into()));
        }
        for (i, list) in modes.iter().enumerate() {
            if list.len() > MAX_MODES {
                return Err(CalibError::InvalidTriple(format!(
                    "sector {i} has {} modes, at most {MAX_MODES} allowed",
                    list.len()
                )));
            }
            let mut bound = 0.0;
            for m in list {
                if m.k == 0 {
                    return Err(CalibError::InvalidTriple(
                        "mode index k must be at least 1".into(),
                    ));
                }
                if !m.c.is_finite() {
                    return Err(CalibError::InvalidTriple("mode coefficient is not finite".into()));
                }
                let e = exponent(symmetry, m.k);
                bound += m.c.abs() * e * 0.1f64.powf(e - 1.0);
            }
            if bound > 0.1 {
                return Err(CalibError::InvalidTriple(format!(
                    "sector {i}: gradient bound {bound:.3e} exceeds 0.1 on the disc of radius 0.1"
                )));
            }
        }
        Ok(Self { symmetry, modes, constants, geometry: SectorGeometry::new() })
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn modes(&self, i: usize) -> &[Mode] {
        &self.modes[i]
    }

    pub fn constant(&self, i: usize) -> f64 {
        self.constants[i]
    }

    pub fn constants_array(&self) -> [f64; 3] {
        self.constants
    }

    pub fn geometry(&self) -> &SectorGeometry {
        &self.geometry
    }

    pub fn is_piecewise_constant(&self) -> bool {
        self.modes.iter().all(|m| m.iter().all(|md| md.c == 0.0))
    }

    fn sign(&self, i: usize) -> f64 {
        match self.symmetry {
            Symmetry::Symmetric => 1.0,
            Symmetry::Antisymmetric => {
                if i == 1 {
                    -1.0
                } else {
                    1.0
                }
            }
        }
    }

    pub fn extend_domain(&self, i: usize) -> ExtensionDomain {
        match self.symmetry {
            Symmetry::Symmetric => ExtensionDomain::FullDisc,
            Symmetry::Antisymmetric => ExtensionDomain::SlitDisc { slit: SectorGeometry::slit_of(i) },
        }
    }

    /// True when `p` lies on the cut of `u_i` (antisymmetric family only).
    pub fn on_branch_cut(&self, i: usize, p: &Vec2) -> bool {
        match self.symmetry {
            Symmetry::Symmetric => false,
            Symmetry::Antisymmetric => {
                !self.modes[i].is_empty() && self.geometry.on_ray(SectorGeometry::slit_of(i), p)
            }
        }
    }

    /// Exact value, gradient and Hessian of the extension of `u_i`.
    pub fn eval(&self, i: usize, p: &Vec2) -> Result<Jet> {
        if !(p.norm_squared() < 1.0) {
            return Err(CalibError::OutOfDomain { x: p.x, y: p.y, radius: 1.0 });
        }
        if self.on_branch_cut(i, p) {
            return Err(CalibError::BranchCut {
                x: p.x,
                y: p.y,
                sector: i,
                slit: SectorGeometry::slit_of(i),
            });
        }
        Ok(self.jet(i, p))
    }

    /// Like `eval` without domain checks; on a cut the branch with local angle +π is used.
    pub fn jet(&self, i: usize, p: &Vec2) -> Jet {
        let b = self.geometry.bisector(i);
        let bp = perp(&b);
        let (wx, wy) = (b.dot(p), bp.dot(p));
        let rho = wx.hypot(wy);
        let phi = local_angle(wx, wy);
        let mut f = (0.0, 0.0);
        let mut d1 = (0.0, 0.0);
        let mut d2 = (0.0, 0.0);
        for md in &self.modes[i] {
            let m = exponent(self.symmetry, md.k);
            let c = md.c;
            let r0 = c * pow(rho, m);
            let r1 = c * m * pow(rho, m - 1.0);
            let r2 = c * m * (m - 1.0) * pow(rho, m - 2.0);
            let (s0, c0) = (m * phi).sin_cos();
            let (s1, c1) = ((m - 1.0) * phi).sin_cos();
            let (s2, c2) = ((m - 2.0) * phi).sin_cos();
            f.0 += r0 * c0;
            f.1 += r0 * s0;
            d1.0 += r1 * c1;
            d1.1 += r1 * s1;
            d2.0 += r2 * c2;
            d2.1 += r2 * s2;
        }
        let s = self.sign(i);
        let (value, gl, hl) = match self.symmetry {
            Symmetry::Symmetric => (
                f.0,
                Vec2::new(d1.0, -d1.1),
                Matrix2::new(d2.0, -d2.1, -d2.1, -d2.0),
            ),
            Symmetry::Antisymmetric => (
                s * f.1,
                s * Vec2::new(d1.1, d1.0),
                s * Matrix2::new(d2.1, d2.0, d2.0, -d2.1),
            ),
        };
        // Rows of q are the local axes.
        let q = Matrix2::new(b.x, b.y, bp.x, bp.y);
        Jet {
            value: self.constants[i] + value,
            gradient: q.transpose() * gl,
            hessian: q.transpose() * hl * q,
        }
    }

    /// Value and gradient only.
    pub fn value_grad(&self, i: usize, p: &Vec2) -> (f64, Vec2) {
        if self.modes[i].is_empty() {
            return (self.constants[i], Vec2::zeros());
        }
        let j = self.jet(i, p);
        (j.value, j.gradient)
    }

    pub fn value(&self, i: usize, p: &Vec2) -> f64 {
        self.value_grad(i, p).0
    }

    /// `|∇u_i|²`, which is single valued even across the cut.
    pub fn grad_norm_sq(&self, i: usize, p: &Vec2) -> f64 {
        if self.modes[i].is_empty() {
            return 0.0;
        }
        let b = self.geometry.bisector(i);
        let (wx, wy) = (b.dot(p), cross(&b, p));
        let rho = wx.hypot(wy);
        let phi = local_angle(wx, wy);
        let (mut re, mut im) = (0.0, 0.0);
        for md in &self.modes[i] {
            let m = exponent(self.symmetry, md.k);
            let r1 = md.c * m * pow(rho, m - 1.0);
            let (s1, c1) = ((m - 1.0) * phi).sin_cos();
            re += r1 * c1;
            im += r1 * s1;
        }
        re * re + im * im
    }

    /// Points at which to read both traces at `p ∈ S`: `p` itself, or
    /// `p ± 1e−14·perp` when `S` is the slit of some nonconstant `u_k`.
    pub fn trace_points(&self, s: Interface, p: Vec2) -> Vec<Vec2> {
        let owner = SectorGeometry::slit_owner(s);
        if self.symmetry == Symmetry::Antisymmetric && !self.modes[owner].is_empty() {
            let off = 1e-14 * perp(&self.geometry.ray(s));
            vec![p + off, p - off]
        } else {
            vec![p]
        }
    }

    /// Validates the assumptions on `u` at `n_samples` points per sector edge and interface.
    pub fn check_hypotheses(&self, tol: f64, n_samples: usize) -> HypothesisReport {
        assert!(tol > 0.0, "tolerance must be positive");
        let n = n_samples.max(8);
        let g = &self.geometry;
        let radii: Vec<f64> = (1..=n).map(|j| j as f64 / (n + 1) as f64).collect();

        let mut neumann = Worst::default();
        for i in 0..3 {
            let (a, b) = g.sector_edges(i);
            for edge in [a, b] {
                let d = g.ray(edge);
                let nrm = perp(&d);
                for &r in &radii {
                    let p = d * r;
                    let gu = self.jet(i, &p).gradient;
                    neumann.update(gu.dot(&nrm).abs(), p);
                }
            }
        }

        let mut modulus = Worst::default();
        for s in Interface::ALL {
            let (i, j) = s.sectors();
            let d = g.ray(s);
            for &r in &radii {
                let p = d * r;
                let gi = self.jet(i, &p).gradient.norm();
                let gj = self.jet(j, &p).gradient.norm();
                modulus.update((gi - gj).abs(), p);
            }
        }

        let origin = Vec2::zeros();
        let origin_gradient = (0..3)
            .map(|i| self.jet(i, &origin).gradient.norm())
            .fold(0.0, f64::max);
        let ordering = self.constants[0] < self.constants[1] && self.constants[1] < self.constants[2];

        let pass = neumann.value <= tol && modulus.value <= tol && ordering && origin_gradient <= tol;
        HypothesisReport {
            tolerance: tol,
            samples_per_ray: n,
            neumann_residual: neumann.value,
            neumann_witness: [neumann.at.x, neumann.at.y],
            gradient_modulus_residual: modulus.value,
            gradient_modulus_witness: [modulus.at.x, modulus.at.y],
            ordering_ok: ordering,
            origin_values: self.constants,
            origin_gradient,
            pass,
        }
    }
}

#[derive(Debug, Clone, Default)]
struct Worst {
    value: f64,
    at: Vec2,
}

impl Worst {
    fn update(&mut self, v: f64, p: Vec2) {
        if v > self.value || v.is_nan() {
            self.value = v;
            self.at = p;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub tolerance: f64,
    pub samples_per_ray: usize,
    pub neumann_residual: f64,
    pub neumann_witness: [f64; 2],
    pub gradient_modulus_residual: f64,
    pub gradient_modulus_witness: [f64; 2],
    pub ordering_ok: bool,
    pub origin_values: [f64; 3],
    pub origin_gradient: f64,
    pub pass: bool,
}

pub fn exponent(symmetry: Symmetry, k: u32) -> f64 {
    match symmetry {
        Symmetry::Symmetric => 3.0 * k as f64,
        Symmetry::Antisymmetric => 1.5 * (2 * k + 1) as f64,
    }
}

/// Angle in (−π, π]; the negative real axis maps to +π regardless of the sign of zero.
#[inline]
fn local_angle(wx: f64, wy: f64) -> f64 {
    if wy == 0.0 && wx < 0.0 {
        std::f64::consts::PI
    } else {
        wy.atan2(wx)
    }
}

#[inline]
fn pow(r: f64, e: f64) -> f64 {
    if r == 0.0 {
        if e == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        r.powf(e)
    }
}
