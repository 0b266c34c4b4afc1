//! The piecewise calibration field on `U × ℝ`.
//!
//! For a fixed planar point `p` the field is piecewise in `z` with at most
//! seventeen pieces. A [`Column`] caches everything that depends on `p` only
//! (values of `u_i`, characteristics, band positions), so evaluating the field
//! or integrating it in `z` at that `p` costs no further tracing.

use serde::Serialize;

use crate::characteristics::{Aux, Branch, CharacteristicSolution};
use crate::error::{CalibError, Result};
use crate::geometry::Vec2;
use crate::harmonic::SectorHarmonicTriple;
use crate::ingredients::FieldIngredients;
use crate::params::CalibrationParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum RegionLabel {
    G(usize),
    KMinusH(usize),
    H(usize),
    Vertical,
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RegionLabel::G(i) => write!(f, "G{i}"),
            RegionLabel::KMinusH(i) => write!(f, "K{i}-H{i}"),
            RegionLabel::H(i) => write!(f, "H{i}"),
            RegionLabel::Vertical => write!(f, "V"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    /// `(0, ω_j)`.
    Vertical { j: usize },
    /// Field built from the graph of `u_i + t v_i`.
    G { i: usize },
    /// Constant planar part, vertical component `μ`.
    Flat { label: RegionLabel, xy: Vec2 },
}

/// One `z`-interval `(lo, hi]` of a column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Segment {
    pub lo: f64,
    pub hi: f64,
    pub piece: Piece,
}

#[derive(Debug, Clone)]
pub struct CalibrationField {
    triple: SectorHarmonicTriple,
    params: CalibrationParams,
    chars: CharacteristicSolution,
}

impl CalibrationField {
    pub fn new(triple: &SectorHarmonicTriple, params: &CalibrationParams) -> Result<Self> {
        params.validate_scalars()?;
        Ok(Self {
            triple: triple.clone(),
            params: *params,
            chars: CharacteristicSolution::new(triple, params),
        })
    }

    pub fn triple(&self) -> &SectorHarmonicTriple {
        &self.triple
    }

    pub fn params(&self) -> &CalibrationParams {
        &self.params
    }

    pub fn characteristics(&self) -> &CharacteristicSolution {
        &self.chars
    }

    pub fn ingredients(&self) -> &FieldIngredients {
        self.chars.ingredients()
    }

    pub fn column(&self, p: &Vec2) -> Result<Column> {
        Column::new(self, p)
    }

    /// `ε²/v_j² − |∇u_j|²`, with `j` selected by the height `z`.
    pub fn omega(&self, p: &Vec2, z: f64) -> f64 {
        let pr = &self.params;
        let j = if z < pr.l1 + pr.lambda {
            0
        } else if z < pr.l2 + pr.lambda {
            1
        } else {
            2
        };
        self.omega_j(j, p)
    }

    pub fn omega_j(&self, j: usize, p: &Vec2) -> f64 {
        let v = self.ingredients().v(j, p);
        self.params.epsilon.powi(2) / (v * v) - self.triple.grad_norm_sq(j, p)
    }

    pub fn region_of(&self, p: &Vec2, z: f64) -> Result<RegionLabel> {
        Ok(self.column(p)?.region(z))
    }

    pub fn eval(&self, p: &Vec2, z: f64) -> Result<(Vec2, f64)> {
        let c = self.column(p)?;
        let (xy, zc, _) = c.eval(z);
        Ok((xy, zc))
    }

    /// `∫_{t1}^{t2} φ^{xy}(p, z) dz`.
    pub fn jump_integral(&self, p: &Vec2, t1: f64, t2: f64) -> Result<Vec2> {
        Ok(self.column(p)?.integral(t1, t2))
    }
}

/// All `p`-dependent data of the field at one planar point.
#[derive(Debug, Clone)]
pub struct Column {
    pub p: Vec2,
    pub u: [f64; 3],
    pub grad_u: [Vec2; 3],
    pub v: [f64; 3],
    pub grad_v: [Vec2; 3],
    /// Characteristic data for `i = 1, 2` at indices 0, 1.
    pub aux: [Aux; 2],
    pub omega: [f64; 3],
    pub mu: f64,
    pub segments: Vec<Segment>,
}

impl Column {
    pub fn new(field: &CalibrationField, p: &Vec2) -> Result<Self> {
        Self::with_branches(field, p, [Branch::Auto; 2])
    }

    /// Column built from prescribed branches of the characteristics of `φ_1`, `φ_2`.
    pub fn with_branches(field: &CalibrationField, p: &Vec2, branches: [Branch; 2]) -> Result<Self> {
        let pr = &field.params;
        let ing = field.ingredients();
        let tr = &field.triple;
        let mut u = [0.0; 3];
        let mut grad_u = [Vec2::zeros(); 3];
        let mut v = [0.0; 3];
        let mut grad_v = [Vec2::zeros(); 3];
        let mut omega = [0.0; 3];
        for i in 0..3 {
            let (val, g) = tr.value_grad(i, p);
            u[i] = val;
            grad_u[i] = g;
            v[i] = ing.v(i, p);
            grad_v[i] = ing.grad_v(i);
            omega[i] = field.omega_j(i, p);
        }
        let aux = [
            field.chars.aux_branch(1, p, branches[0])?,
            field.chars.aux_branch(2, p, branches[1])?,
        ];

        let eps = pr.epsilon;
        let lam = pr.lambda;
        let cut = [tr.on_branch_cut(0, p), tr.on_branch_cut(1, p), tr.on_branch_cut(2, p)];
        let g_piece = |i: usize| {
            if cut[i] {
                Piece::Vertical { j: i }
            } else {
                Piece::G { i }
            }
        };
        let mut bounds = Vec::with_capacity(16);
        let mut pieces = Vec::with_capacity(17);
        pieces.push(Piece::Vertical { j: 0 });
        bounds.push(u[0] - eps);
        pieces.push(g_piece(0));
        bounds.push(u[0] + eps);
        pieces.push(Piece::Vertical { j: 0 });
        for i in 1..=2 {
            let a = aux[i - 1];
            let l = pr.l(i);
            let phi = ing.phi(i, p);
            let k = Piece::Flat { label: RegionLabel::KMinusH(i), xy: a.sigma * phi / lam };
            let h_excluded = cut[i - 1] || cut[i];
            let h = Piece::Flat {
                label: RegionLabel::H(i),
                xy: -(2.0 * eps / lam) * (grad_u[i - 1] + grad_u[i]),
            };
            let (h_lo, h_hi) = if h_excluded {
                (Piece::Vertical { j: i - 1 }, Piece::Vertical { j: i })
            } else {
                (h, h)
            };
            bounds.push(l + a.alpha);
            pieces.push(k);
            bounds.push(l + 0.5 * lam);
            pieces.push(h_lo);
            bounds.push(l + lam);
            pieces.push(h_hi);
            bounds.push(l + 1.5 * lam);
            pieces.push(k);
            bounds.push(l + 2.0 * lam + a.beta);
            pieces.push(Piece::Vertical { j: i });
            bounds.push(u[i] - eps);
            pieces.push(g_piece(i));
            bounds.push(u[i] + eps);
            pieces.push(Piece::Vertical { j: i });
        }
        for w in bounds.windows(2) {
            if !(w[0] < w[1]) {
                return Err(CalibError::InfeasibleParams(format!(
                    "bands overlap at ({:.3e}, {:.3e}): breakpoints {:?}",
                    p.x, p.y, bounds
                )));
            }
        }
        let mut segments = Vec::with_capacity(pieces.len());
        let mut lo = f64::NEG_INFINITY;
        for (k, piece) in pieces.into_iter().enumerate() {
            let hi = bounds.get(k).copied().unwrap_or(f64::INFINITY);
            segments.push(Segment { lo, hi, piece });
            lo = hi;
        }
        Ok(Self { p: *p, u, grad_u, v, grad_v, aux, omega, mu: pr.mu, segments })
    }

    /// Finite breakpoints in increasing order.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.segments.iter().skip(1).map(|s| s.lo)
    }

    fn segment_index(&self, z: f64) -> usize {
        self.segments.partition_point(|s| s.hi < z)
    }

    pub fn segment_at(&self, z: f64) -> &Segment {
        &self.segments[self.segment_index(z)]
    }

    pub fn region(&self, z: f64) -> RegionLabel {
        label(&self.segment_at(z).piece)
    }

    /// Field value at height `z` and its region.
    pub fn eval(&self, z: f64) -> (Vec2, f64, RegionLabel) {
        let piece = self.segment_at(z).piece;
        let (xy, zc) = self.eval_piece(&piece, z);
        (xy, zc, label(&piece))
    }

    pub fn eval_piece(&self, piece: &Piece, z: f64) -> (Vec2, f64) {
        match *piece {
            Piece::Vertical { j } => (Vec2::zeros(), self.omega[j]),
            Piece::G { i } => {
                let w = self.grad_u[i] + ((z - self.u[i]) / self.v[i]) * self.grad_v[i];
                (2.0 * w, w.norm_squared())
            }
            Piece::Flat { xy, .. } => (xy, self.mu),
        }
    }

    /// Exact `∫_a^b φ^{xy} dz` over one piece.
    fn piece_integral(&self, piece: &Piece, a: f64, b: f64) -> Vec2 {
        match *piece {
            Piece::Vertical { .. } => Vec2::zeros(),
            Piece::G { i } => {
                let (da, db) = (a - self.u[i], b - self.u[i]);
                2.0 * (b - a) * self.grad_u[i] + ((db * db - da * da) / self.v[i]) * self.grad_v[i]
            }
            Piece::Flat { xy, .. } => (b - a) * xy,
        }
    }

    /// `∫_{t1}^{t2} φ^{xy} dz`, oriented.
    pub fn integral(&self, t1: f64, t2: f64) -> Vec2 {
        if t1 > t2 {
            return -self.integral(t2, t1);
        }
        let mut acc = Vec2::zeros();
        if t1 == t2 {
            return acc;
        }
        let start = self.segment_index(t1);
        for s in &self.segments[start..] {
            if s.lo >= t2 {
                break;
            }
            let a = s.lo.max(t1);
            let b = s.hi.min(t2);
            if b > a {
                acc += self.piece_integral(&s.piece, a, b);
            }
        }
        acc
    }

    /// `∫_{t1}^{t2} φ^z dz`, oriented.
    pub fn integral_z(&self, t1: f64, t2: f64) -> f64 {
        if t1 > t2 {
            return -self.integral_z(t2, t1);
        }
        let mut acc = 0.0;
        for s in &self.segments {
            let a = s.lo.max(t1);
            let b = s.hi.min(t2);
            if b <= a {
                continue;
            }
            acc += match s.piece {
                Piece::Vertical { j } => (b - a) * self.omega[j],
                Piece::Flat { .. } => (b - a) * self.mu,
                Piece::G { i } => {
                    let g = self.grad_u[i];
                    let d = self.grad_v[i];
                    let v = self.v[i];
                    let (da, db) = (a - self.u[i], b - self.u[i]);
                    (b - a) * g.norm_squared()
                        + (db * db - da * da) / v * g.dot(&d)
                        + (db.powi(3) - da.powi(3)) / (3.0 * v * v) * d.norm_squared()
                }
            };
        }
        acc
    }
}

pub fn label(piece: &Piece) -> RegionLabel {
    match *piece {
        Piece::Vertical { .. } => RegionLabel::Vertical,
        Piece::G { i } => RegionLabel::G(i),
        Piece::Flat { label, .. } => label,
    }
}
