//! Global maximization of `ρ` over `U × [a_0 − 2ε, a_2 + 2ε]²`.
//!
//! Planar nodes are the cell centres of a square grid clipped to the disc,
//! together with points on the three rays. Each planar node gets the uniform
//! `t`-grid augmented with the traces `u_0(p), u_1(p), u_2(p)`, so that full
//! jumps are represented exactly. One column is built per planar node and
//! `ρ` is evaluated on every pair `t_1 ≤ t_2`.

use rayon::prelude::*;
use serde::Serialize;

use super::report::ConditionResult;
use crate::error::Result;
use crate::field::{CalibrationField, Column};
use crate::geometry::{Interface, Vec2};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanConfig {
    /// Nodes per axis of the coarse grid (planar and `t`).
    pub grid: usize,
    pub refine_iters: usize,
    /// Number of best coarse nodes refined.
    pub top: usize,
    /// Nodes per axis of each local refinement grid (odd).
    pub local: usize,
    pub tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self { grid: 32, refine_iters: 3, top: 10, local: 5, tol: 1e-9 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub max_rho: f64,
    /// `(x, y, t_1, t_2)` of the maximum.
    pub argmax: [f64; 4],
    /// Distance of the argmax to the full-jump set.
    pub jump_distance: f64,
    pub on_jump: bool,
    /// Largest `ρ` over coarse nodes farther than one cell from the full-jump set.
    pub off_jump_max: f64,
    pub coarse_max: f64,
    pub evaluations: usize,
    pub columns: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl ScanReport {
    pub fn to_condition(&self) -> ConditionResult {
        ConditionResult::residual(self.max_rho - 1.0, self.tolerance, self.argmax.to_vec(), self.evaluations)
            .with_detail("max_rho", self.max_rho)
            .with_detail("jump_distance", self.jump_distance)
            .with_detail("on_jump", if self.on_jump { 1.0 } else { 0.0 })
            .with_detail("off_jump_max", self.off_jump_max)
            .with_detail("coarse_max", self.coarse_max)
            .with_detail("columns", self.columns as f64)
    }
}

#[derive(Debug, Clone, Copy)]
struct Hit {
    rho: f64,
    q: [f64; 4],
}

fn better(a: &Hit, b: &Hit) -> bool {
    a.rho > b.rho || a.rho.is_nan()
}

/// Planar nodes: clipped cell centres plus points on each ray. On rays that
/// are slits of some `u_k` the points are doubled with offsets `±1e−14` so
/// that both traces are seen.
fn planar_nodes(field: &CalibrationField, n: usize) -> Vec<Vec2> {
    let r = field.params().u_radius;
    let t = field.triple();
    let g = t.geometry();
    let h = 2.0 * r / n as f64;
    let mut nodes = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let p = Vec2::new(-r + (i as f64 + 0.5) * h, -r + (j as f64 + 0.5) * h);
            if p.norm() <= r {
                nodes.push(p);
            }
        }
    }
    nodes.push(Vec2::zeros());
    for s in Interface::ALL {
        let d = g.ray(s);
        for k in 1..=n / 2 {
            nodes.extend(t.trace_points(s, d * (r * k as f64 / (n / 2) as f64)));
        }
    }
    nodes
}

fn t_range(field: &CalibrationField) -> (f64, f64) {
    let a = field.triple().constants_array();
    let eps = field.params().epsilon;
    (a[0] - 2.0 * eps, a[2] + 2.0 * eps)
}

fn t_nodes(lo: f64, hi: f64, n: usize, c: &Column) -> Vec<f64> {
    let h = (hi - lo) / n as f64;
    let mut ts: Vec<f64> = (0..n).map(|k| lo + (k as f64 + 0.5) * h).collect();
    ts.extend(c.u.iter().copied().filter(|u| (lo..=hi).contains(u)));
    ts.sort_by(f64::total_cmp);
    ts
}

/// Best pair over the `t`-nodes of one column, and the best pair among
/// those farther than `far` from the full jump at `p` (if any).
fn scan_column(field: &CalibrationField, p: &Vec2, n: usize, far: f64) -> Result<(Hit, Hit, usize)> {
    let c = field.column(p)?;
    let (lo, hi) = t_range(field);
    let ts = t_nodes(lo, hi, n, &c);
    let mut best = Hit { rho: f64::NEG_INFINITY, q: [0.0; 4] };
    let mut off = best;
    let mut count = 0;
    for (a, &t1) in ts.iter().enumerate() {
        for &t2 in &ts[a + 1..] {
            let hit = Hit { rho: c.integral(t1, t2).norm(), q: [p.x, p.y, t1, t2] };
            count += 1;
            if better(&hit, &best) {
                best = hit;
            }
            if better(&hit, &off) && jump_distance(field, &hit.q) > far {
                off = hit;
            }
        }
    }
    Ok((best, off, count))
}

/// Distance of `(p, t_1, t_2)` to `{(p, u_a(p), u_b(p)) : p ∈ S_ab}`.
pub fn jump_distance(field: &CalibrationField, q: &[f64; 4]) -> f64 {
    let t = field.triple();
    let g = t.geometry();
    let p = Vec2::new(q[0], q[1]);
    let (t1, t2) = (q[2].min(q[3]), q[2].max(q[3]));
    let mut best = f64::INFINITY;
    for s in Interface::ALL {
        let (a, b) = s.sectors();
        let d = g.ray(s);
        let proj = d * p.dot(&d).max(0.0);
        let dp = (p - proj).norm();
        let du = (t1 - t.jet(a, &proj).value).abs().max((t2 - t.jet(b, &proj).value).abs());
        best = best.min(dp.max(du));
    }
    best
}

fn reduce(hits: impl IntoIterator<Item = Hit>) -> Hit {
    hits.into_iter()
        .fold(Hit { rho: f64::NEG_INFINITY, q: [0.0; 4] }, |b, h| if better(&h, &b) { h } else { b })
}

fn eval(field: &CalibrationField, q: &[f64; 4]) -> Result<f64> {
    Ok(field.jump_integral(&Vec2::new(q[0], q[1]), q[2], q[3])?.norm())
}

/// Local grid search around `start`, shrinking the box by the grid factor
/// each round.
fn refine(field: &CalibrationField, start: Hit, half: [f64; 4], cfg: &ScanConfig) -> Result<(Hit, usize)> {
    let r = field.params().u_radius;
    let (lo, hi) = t_range(field);
    let m = cfg.local.max(3) | 1;
    let c = (m / 2) as i64;
    let mut best = start;
    let mut half = half;
    let mut evals = 0;
    for _ in 0..cfg.refine_iters {
        let centre = best.q;
        let mut qs = Vec::with_capacity(m.pow(4));
        for i in 0..m.pow(4) {
            let mut q = centre;
            let mut k = i;
            for (axis, qa) in q.iter_mut().enumerate() {
                let off = (k % m) as i64 - c;
                k /= m;
                *qa += half[axis] * off as f64 / c as f64;
            }
            if q[0].hypot(q[1]) > r || q[2] < lo || q[3] > hi {
                continue;
            }
            qs.push(q);
        }
        evals += qs.len();
        let hits: Vec<Hit> = qs
            .par_iter()
            .map(|q| Ok(Hit { rho: eval(field, q)?, q: *q }))
            .collect::<Result<_>>()?;
        let round = reduce(hits);
        if better(&round, &best) {
            best = round;
        }
        for h in half.iter_mut() {
            *h /= c as f64 + 1.0;
        }
    }
    Ok((best, evals))
}

/// Coarse scan followed by local refinement around the best coarse nodes.
pub fn check_d_global(field: &CalibrationField, cfg: &ScanConfig) -> Result<ScanReport> {
    let r = field.params().u_radius;
    let (lo, hi) = t_range(field);
    let hp = 2.0 * r / cfg.grid as f64;
    let ht = (hi - lo) / cfg.grid as f64;
    let nodes = planar_nodes(field, cfg.grid);
    let per_node: Vec<(Hit, Hit, usize)> = nodes
        .par_iter()
        .map(|p| scan_column(field, p, cfg.grid, hp.max(ht)))
        .collect::<Result<_>>()?;
    let coarse = reduce(per_node.iter().map(|x| x.0));
    let off_jump = reduce(per_node.iter().map(|x| x.1));
    let mut evaluations: usize = per_node.iter().map(|x| x.2).sum();

    let mut order: Vec<usize> = (0..per_node.len()).collect();
    order.sort_by(|&a, &b| per_node[b].0.rho.total_cmp(&per_node[a].0.rho).then(a.cmp(&b)));
    let mut best = coarse;
    for &k in order.iter().take(cfg.top) {
        let (hit, n) = refine(field, per_node[k].0, [hp, hp, ht, ht], cfg)?;
        evaluations += n;
        if better(&hit, &best) {
            best = hit;
        }
    }
    let dist = jump_distance(field, &best.q);
    let finest = hp.min(ht) / (cfg.local as f64 / 2.0).ceil().powi(cfg.refine_iters as i32);
    let report = ScanReport {
        max_rho: best.rho,
        argmax: best.q,
        jump_distance: dist,
        on_jump: dist <= finest.max(1e-12),
        off_jump_max: off_jump.rho,
        coarse_max: coarse.rho,
        evaluations,
        columns: nodes.len(),
        tolerance: cfg.tol,
        pass: best.rho <= 1.0 + cfg.tol,
    };
    log::info!(
        "scan: max rho {:.15} at {:?}, jump distance {:.3e}, off-jump max {:.12}",
        report.max_rho,
        report.argmax,
        report.jump_distance,
        report.off_jump_max
    );
    Ok(report)
}

/// Exhaustive scan on the augmented `n⁴` grid without refinement.
pub fn brute_force_max(field: &CalibrationField, n: usize) -> Result<(f64, [f64; 4])> {
    let nodes = planar_nodes(field, n);
    let hits: Vec<Hit> = nodes
        .par_iter()
        .map(|p| Ok(scan_column(field, p, n, f64::INFINITY)?.0))
        .collect::<Result<_>>()?;
    let best = reduce(hits);
    Ok((best.rho, best.q))
}
