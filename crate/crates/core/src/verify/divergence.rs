//! Flux balance of the field through small boxes of `U × ℝ`.
//!
//! Lateral faces are integrated exactly in `z` (via the column integral of
//! `φ^{xy}`) and by Gauss rules along the edge, split where the integrand has
//! kinks: the gluing curves `{h_i = 0}` and, for cut extensions, the rays.
//! Boxes are generated so that their horizontal faces never meet a region
//! boundary, which makes `φ^z` smooth on each sector part of those faces.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::report::ConditionResult;
use crate::error::Result;
use crate::field::{CalibrationField, Column, Piece};
use crate::geometry::{cross, Interface, Vec2};
use crate::harmonic::Symmetry;
use crate::quadrature::{illinois, GaussRule};

/// Indices into `Column::breakpoints` of the genuine interface surfaces
/// (the planes `z = l_i + λ` only switch `ω` inside `H_i` and are skipped).
pub const SURFACES: [usize; 14] = [0, 1, 2, 3, 5, 6, 7, 8, 9, 10, 12, 13, 14, 15];

pub fn surface_name(k: usize) -> &'static str {
    match k {
        0 => "u0-eps",
        1 => "u0+eps",
        2 => "l1+alpha1",
        3 => "l1+lambda/2",
        5 => "l1+3lambda/2",
        6 => "l1+2lambda+beta1",
        7 => "u1-eps",
        8 => "u1+eps",
        9 => "l2+alpha2",
        10 => "l2+lambda/2",
        12 => "l2+3lambda/2",
        13 => "l2+2lambda+beta2",
        14 => "u2-eps",
        15 => "u2+eps",
        _ => "other",
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DivergenceConfig {
    pub n_random: usize,
    pub per_surface: usize,
    pub tol: f64,
    pub seed: u64,
    pub gauss_points: usize,
}

impl Default for DivergenceConfig {
    fn default() -> Self {
        Self { n_random: 100, per_surface: 50, tol: 1e-6, seed: 1, gauss_points: 8 }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FluxBox {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub z: [f64; 2],
    /// Surface the box was built to straddle, if any.
    pub target: Option<usize>,
}

impl FluxBox {
    pub fn area(&self) -> f64 {
        let (a, b, c) = (self.x[1] - self.x[0], self.y[1] - self.y[0], self.z[1] - self.z[0]);
        2.0 * (a * b + a * c + b * c)
    }

    fn corners(&self) -> [Vec2; 4] {
        [
            Vec2::new(self.x[0], self.y[0]),
            Vec2::new(self.x[1], self.y[0]),
            Vec2::new(self.x[1], self.y[1]),
            Vec2::new(self.x[0], self.y[1]),
        ]
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FluxResult {
    pub flux: f64,
    pub area: f64,
}

/// Net outward flux of the field through the box.
pub fn box_flux(field: &CalibrationField, b: &FluxBox, rule: &GaussRule) -> Result<FluxResult> {
    let corners = b.corners();
    let mut flux = 0.0;
    for k in 0..4 {
        let (pa, pb) = (corners[k], corners[(k + 1) % 4]);
        let d = pb - pa;
        let normal = Vec2::new(d.y, -d.x) / d.norm();
        let len = d.norm();
        let breaks = edge_breaks(field, pa, pb)?;
        for w in breaks.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            for (s, wt) in rule.mapped(w[0], w[1]) {
                let p = pa + s * d;
                let c = Column::new(field, &p)?;
                flux += wt * len * c.integral(b.z[0], b.z[1]).dot(&normal);
            }
        }
    }
    let center = Vec2::new(0.5 * (b.x[0] + b.x[1]), 0.5 * (b.y[0] + b.y[1]));
    let cc = Column::new(field, &center)?;
    for (z, sign) in [(b.z[1], 1.0), (b.z[0], -1.0)] {
        let piece = cc.segment_at(z).piece;
        for poly in face_pieces(field, b) {
            for tri in 1..poly.len().saturating_sub(1) {
                for (p, w) in rule.triangle(poly[0], poly[tri], poly[tri + 1]) {
                    flux += sign * w * phi_z(field, &piece, &p, z);
                }
            }
        }
    }
    Ok(FluxResult { flux, area: b.area() })
}

/// `φ^z` of a fixed piece at `(p, z)`, without tracing characteristics.
fn phi_z(field: &CalibrationField, piece: &Piece, p: &Vec2, z: f64) -> f64 {
    match *piece {
        Piece::Vertical { j } => field.omega_j(j, p),
        Piece::Flat { .. } => field.params().mu,
        Piece::G { i } => {
            let (u, gu) = field.triple().value_grad(i, p);
            let ing = field.ingredients();
            let w = gu + ((z - u) / ing.v(i, p)) * ing.grad_v(i);
            w.norm_squared()
        }
    }
}

/// Convex pieces of the horizontal face on which `φ^z` is smooth.
fn face_pieces(field: &CalibrationField, b: &FluxBox) -> Vec<Vec<Vec2>> {
    let rect = b.corners().to_vec();
    if field.triple().symmetry() == Symmetry::Symmetric || field.triple().is_piecewise_constant() {
        return vec![rect];
    }
    let g = field.triple().geometry();
    let mut out = Vec::new();
    for i in 0..3 {
        let (e0, e1) = g.sector_edges(i);
        // The sector is the intersection of the two half-planes bounded by its
        // edges that contain its bisector.
        let mut poly = rect.clone();
        for e in [e0, e1] {
            let d = g.ray(e);
            let s = cross(&d, &g.bisector(i)).signum();
            poly = clip_half_plane(&poly, |p| s * cross(&d, p));
        }
        if poly.len() >= 3 {
            out.push(poly);
        }
    }
    out
}

/// Sutherland-Hodgman clip against `{f ≥ 0}` for affine `f`.
fn clip_half_plane(poly: &[Vec2], f: impl Fn(&Vec2) -> f64) -> Vec<Vec2> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    for k in 0..poly.len() {
        let (a, b) = (poly[k], poly[(k + 1) % poly.len()]);
        let (fa, fb) = (f(&a), f(&b));
        if fa >= 0.0 {
            out.push(a);
        }
        if (fa >= 0.0) != (fb >= 0.0) {
            let t = fa / (fa - fb);
            out.push(a + t * (b - a));
        }
    }
    out
}

/// Parameters in `[0, 1]` along `pa → pb` where the lateral integrand has kinks.
fn edge_breaks(field: &CalibrationField, pa: Vec2, pb: Vec2) -> Result<Vec<f64>> {
    let mut breaks = vec![0.0, 1.0];
    let d = pb - pa;
    let chars = field.characteristics();
    for i in 1..=2 {
        let samples = 4;
        let mut prev = (0.0, chars.h(i, &pa)?);
        for k in 1..=samples {
            let s = k as f64 / samples as f64;
            let h = chars.h(i, &(pa + s * d))?;
            if (prev.1 <= 0.0) != (h <= 0.0) {
                let root = illinois(|t| chars.h(i, &(pa + t * d)).unwrap_or(f64::NAN), prev.0, s, 1e-15);
                if let Some(r) = root {
                    breaks.push(r);
                }
            }
            prev = (s, h);
        }
    }
    if field.triple().symmetry() == Symmetry::Antisymmetric {
        let g = field.triple().geometry();
        for s in Interface::ALL {
            let ray = g.ray(s);
            let den = cross(&d, &ray);
            if den == 0.0 {
                continue;
            }
            // pa + t d = r ray
            let t = cross(&ray, &pa) / den;
            let r = cross(&d, &pa) / den;
            if t > 0.0 && t < 1.0 && r > 0.0 {
                breaks.push(t);
            }
        }
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    Ok(breaks)
}

/// Heights of all genuine surfaces at the points of a `k × k` grid on the face.
fn surface_heights(field: &CalibrationField, x: [f64; 2], y: [f64; 2], k: usize) -> Result<Vec<[f64; 14]>> {
    let mut out = Vec::with_capacity(k * k);
    for a in 0..k {
        for b in 0..k {
            let p = Vec2::new(
                x[0] + (x[1] - x[0]) * a as f64 / (k - 1) as f64,
                y[0] + (y[1] - y[0]) * b as f64 / (k - 1) as f64,
            );
            let c = Column::new(field, &p)?;
            let bp: Vec<f64> = c.breakpoints().collect();
            let mut h = [0.0; 14];
            for (m, &s) in SURFACES.iter().enumerate() {
                h[m] = bp[s];
            }
            out.push(h);
        }
    }
    Ok(out)
}

const GRID: usize = 5;

/// Random boxes: `n_random` free ones and `per_surface` straddling each surface.
pub fn generate_boxes(field: &CalibrationField, cfg: &DivergenceConfig) -> Result<Vec<FluxBox>> {
    let pr = field.params();
    let r = pr.u_radius;
    let a = field.triple().constants_array();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut boxes = Vec::new();
    let mut targets: Vec<Option<usize>> = vec![None; cfg.n_random];
    for &s in &SURFACES {
        targets.extend(std::iter::repeat_n(Some(s), cfg.per_surface));
    }
    for target in targets {
        for _attempt in 0..1000 {
            let w = r * rng.gen_range(0.02..0.1);
            let center = super::sample_disc(&mut rng, r);
            let x = [center.x - w, center.x + w];
            let y = [center.y - w * rng.gen_range(0.5..1.0), center.y + w * rng.gen_range(0.5..1.0)];
            if [x[0], x[1]].iter().any(|&xx| [y[0], y[1]].iter().any(|&yy| xx.hypot(yy) > r)) {
                continue;
            }
            let hs = surface_heights(field, x, y, GRID)?;
            // Surfaces can move between grid nodes; keep faces well clear of them.
            let slack = 8.0 * w / (GRID - 1) as f64;
            let z = match target {
                None => {
                    let z0 = rng.gen_range(a[0] - 2.0 * pr.epsilon..a[2] + 2.0 * pr.epsilon);
                    [z0, z0 + w * rng.gen_range(0.5..2.0)]
                }
                Some(s) => {
                    let m = SURFACES.iter().position(|&q| q == s).expect("known surface");
                    let lo = hs.iter().map(|h| h[m]).fold(f64::INFINITY, f64::min);
                    let hi = hs.iter().map(|h| h[m]).fold(f64::NEG_INFINITY, f64::max);
                    let pad = slack + w * rng.gen_range(0.2..1.0);
                    [lo - pad, hi + pad]
                }
            };
            let clean = hs.iter().all(|h| h.iter().all(|&s| (s - z[0]).abs() > slack && (s - z[1]).abs() > slack));
            let straddles = match target {
                None => true,
                Some(s) => {
                    let m = SURFACES.iter().position(|&q| q == s).expect("known surface");
                    hs.iter().all(|h| h[m] > z[0] && h[m] < z[1])
                        && hs.iter().all(|h| {
                            h.iter().enumerate().all(|(k, &v)| k == m || v < z[0] || v > z[1])
                        })
                }
            };
            if clean && straddles {
                boxes.push(FluxBox { x, y, z, target });
                break;
            }
        }
    }
    Ok(boxes)
}

/// Worst `|flux| / area` over the generated boxes; pass iff `≤ tol`.
pub fn check_divergence(field: &CalibrationField, cfg: &DivergenceConfig) -> Result<ConditionResult> {
    let boxes = generate_boxes(field, cfg)?;
    let rule = GaussRule::new(cfg.gauss_points);
    let results: Vec<Result<(f64, FluxBox)>> = boxes
        .par_iter()
        .map(|b| {
            let f = box_flux(field, b, &rule)?;
            Ok((f.flux.abs() / f.area, *b))
        })
        .collect();
    let mut worst = (0.0, None::<FluxBox>);
    let mut per_surface = std::collections::BTreeMap::new();
    let mut n = 0;
    for r in results {
        let (v, b) = r?;
        n += 1;
        if v > worst.0 || v.is_nan() || worst.1.is_none() {
            worst = (v, Some(b));
        }
        let key = b.target.map_or("free", surface_name);
        let e = per_surface.entry(key.to_string()).or_insert(0.0f64);
        *e = e.max(v);
    }
    let witness = worst
        .1
        .map(|b| vec![b.x[0], b.x[1], b.y[0], b.y[1], b.z[0], b.z[1]])
        .unwrap_or_default();
    let mut res = ConditionResult::residual(worst.0, cfg.tol, witness, n);
    for (k, v) in per_surface {
        res = res.with_detail(&format!("max_rel_flux[{k}]"), v);
    }
    Ok(res)
}
