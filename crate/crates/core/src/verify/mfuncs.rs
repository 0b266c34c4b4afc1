//! Constrained maxima `M_1, M_2, M_3` of `ρ` over `t`, away from the
//! critical values `u_i(0,0)`.
//!
//! For fixed `p` the maximum is taken over `u_0(p) − ε ≤ t_1 ≤ t_2 ≤ u_2(p) + ε`
//! with two of the values `t_1, t_2` kept at distance `≥ δ` from two of the
//! `u_i(0,0)`. A grid containing all breakpoints of the column and all
//! constraint endpoints is scanned, then the best nodes are polished by
//! coordinatewise golden-section search on the feasible piece.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CalibError, Result};
use crate::field::{CalibrationField, Column};
use crate::geometry::Vec2;
use crate::quadrature::golden_max;

/// Which of the three constrained maxima.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MFunction {
    /// `|t_1 − u_0| ≥ δ`, `|t_1 − u_1| ≥ δ`.
    M1,
    /// `|t_2 − u_1| ≥ δ`, `|t_2 − u_2| ≥ δ`.
    M2,
    /// `|t_1 − u_0| ≥ δ`, `|t_2 − u_2| ≥ δ`.
    M3,
}

impl MFunction {
    pub const ALL: [MFunction; 3] = [MFunction::M1, MFunction::M2, MFunction::M3];

    /// Centres of the excluded windows for `t_1` and for `t_2`.
    fn exclusions(self, a: [f64; 3]) -> (Vec<f64>, Vec<f64>) {
        match self {
            MFunction::M1 => (vec![a[0], a[1]], vec![]),
            MFunction::M2 => (vec![], vec![a[1], a[2]]),
            MFunction::M3 => (vec![a[0]], vec![a[2]]),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MValue {
    pub function: MFunction,
    pub p: [f64; 2],
    pub value: f64,
    pub t: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct MReport {
    pub delta: f64,
    /// `M_k(0,0)` for `k = 1, 2, 3`.
    pub at_origin: Vec<MValue>,
    /// Worst value of each `M_k` over the origin and the perimeter points.
    pub worst: Vec<MValue>,
    pub perimeter_points: usize,
    pub tolerance: f64,
    pub pass: bool,
}

/// Closed pieces of `[lo, hi]` outside the open windows `(c − δ, c + δ)`.
fn feasible(lo: f64, hi: f64, centres: &[f64], delta: f64) -> Vec<(f64, f64)> {
    let mut pieces = vec![(lo, hi)];
    for &c in centres {
        let mut next = Vec::new();
        for (a, b) in pieces {
            if c + delta <= a || c - delta >= b {
                next.push((a, b));
                continue;
            }
            if a <= c - delta {
                next.push((a, c - delta));
            }
            if c + delta <= b {
                next.push((c + delta, b));
            }
        }
        pieces = next;
    }
    pieces
}

fn contains(pieces: &[(f64, f64)], t: f64) -> Option<(f64, f64)> {
    pieces.iter().copied().find(|&(a, b)| a <= t && t <= b)
}

fn nodes(pieces: &[(f64, f64)], n: usize, extra: &[f64]) -> Vec<f64> {
    let mut ts = Vec::new();
    for &(a, b) in pieces {
        ts.extend((0..=n).map(|k| a + (b - a) * k as f64 / n as f64));
        ts.extend(extra.iter().copied().filter(|&t| a <= t && t <= b));
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

/// `M_k(p)` with its maximizer.
pub fn m_value(field: &CalibrationField, which: MFunction, p: &Vec2, delta: f64, n: usize) -> Result<MValue> {
    let c = field.column(p)?;
    let eps = field.params().epsilon;
    let a = field.triple().constants_array();
    let (lo, hi) = (c.u[0] - eps, c.u[2] + eps);
    let (ex1, ex2) = which.exclusions(a);
    let f1 = feasible(lo, hi, &ex1, delta);
    let f2 = feasible(lo, hi, &ex2, delta);
    let breaks: Vec<f64> = c.breakpoints().chain(c.u).collect();
    let n1 = nodes(&f1, n, &breaks);
    let n2 = nodes(&f2, n, &breaks);
    let rho = |t1: f64, t2: f64| c.integral(t1, t2).norm();

    let mut cands: Vec<(f64, f64, f64)> = Vec::new();
    for &t1 in &n1 {
        for &t2 in n2.iter().filter(|&&t2| t2 >= t1) {
            cands.push((rho(t1, t2), t1, t2));
        }
    }
    if cands.is_empty() {
        return Err(CalibError::InfeasibleParams(format!("empty feasible set for {which:?} at delta = {delta}")));
    }
    cands.sort_by(|x, y| y.0.total_cmp(&x.0));
    let h = (hi - lo) / n as f64;
    let mut best = cands[0];
    for &start in cands.iter().take(8) {
        let polished = polish(&c, start, &f1, &f2, h);
        if polished.0 > best.0 {
            best = polished;
        }
    }
    Ok(MValue { function: which, p: [p.x, p.y], value: best.0, t: [best.1, best.2] })
}

fn polish(c: &Column, start: (f64, f64, f64), f1: &[(f64, f64)], f2: &[(f64, f64)], h: f64) -> (f64, f64, f64) {
    let rho = |t1: f64, t2: f64| c.integral(t1, t2).norm();
    let mut cur = start;
    for _ in 0..4 {
        if let Some((a, b)) = contains(f1, cur.1) {
            let (a, b) = (a.max(cur.1 - h), b.min(cur.1 + h).min(cur.2));
            if b > a {
                let (t, v) = golden_max(|t| rho(t, cur.2), a, b, 60);
                if v > cur.0 {
                    cur = (v, t, cur.2);
                }
            }
        }
        if let Some((a, b)) = contains(f2, cur.2) {
            let (a, b) = (a.max(cur.2 - h).max(cur.1), b.min(cur.2 + h));
            if b > a {
                let (t, v) = golden_max(|t| rho(cur.1, t), a, b, 60);
                if v > cur.0 {
                    cur = (v, cur.1, t);
                }
            }
        }
    }
    cur
}

/// `M_1, M_2, M_3` at the origin and at `n_perimeter` points of `∂U`.
pub fn check_m_functions(field: &CalibrationField, delta: f64, n_perimeter: usize) -> Result<MReport> {
    let eps = field.params().epsilon;
    if !(delta > 0.0 && delta < eps) {
        return Err(CalibError::InfeasibleParams(format!("delta = {delta} not in (0, {eps})")));
    }
    let r = field.params().u_radius;
    let grid = 400;
    let mut points = vec![Vec2::zeros()];
    for k in 0..n_perimeter {
        // Offset by half a step so that no point falls on a ray.
        let a = std::f64::consts::TAU * (k as f64 + 0.5) / n_perimeter as f64;
        points.push(r * Vec2::new(a.cos(), a.sin()));
    }
    let jobs: Vec<(MFunction, Vec2)> =
        MFunction::ALL.iter().flat_map(|&m| points.iter().map(move |p| (m, *p))).collect();
    let values: Vec<MValue> =
        jobs.par_iter().map(|(m, p)| m_value(field, *m, p, delta, grid)).collect::<Result<_>>()?;
    let tolerance = 1e-6;
    let at_origin: Vec<MValue> = values.iter().filter(|v| v.p == [0.0, 0.0]).cloned().collect();
    let worst: Vec<MValue> = MFunction::ALL
        .iter()
        .map(|&m| {
            values
                .iter()
                .filter(|v| v.function == m)
                .max_by(|x, y| x.value.total_cmp(&y.value))
                .cloned()
                .expect("origin is always evaluated")
        })
        .collect();
    let pass = worst.iter().all(|v| v.value < 1.0 - tolerance);
    Ok(MReport { delta, at_origin, worst, perimeter_points: n_perimeter, tolerance, pass })
}

/// Smallest `δ` (to relative precision `rel`) for which all three maxima stay
/// below `1 − 1e−6` on the origin and the perimeter points. `None` if even
/// `δ` close to `ε` fails.
pub fn smallest_admissible_delta(field: &CalibrationField, n_perimeter: usize, rel: f64) -> Result<Option<f64>> {
    let eps = field.params().epsilon;
    let mut hi = 0.999 * eps;
    if !check_m_functions(field, hi, n_perimeter)?.pass {
        return Ok(None);
    }
    let mut lo = 1e-6 * eps;
    if check_m_functions(field, lo, n_perimeter)?.pass {
        return Ok(Some(lo));
    }
    while hi - lo > rel * hi {
        let mid = 0.5 * (lo + hi);
        if check_m_functions(field, mid, n_perimeter)?.pass {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}
