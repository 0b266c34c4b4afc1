//! Pointwise conditions: the bound `|φ^{xy}|² ≤ 4φ^z`, the trace on the graph
//! of `u`, and the flux through the jump set.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::report::ConditionResult;
use super::sample_disc;
use crate::error::Result;
use crate::field::CalibrationField;
use crate::geometry::{perp, Interface, Vec2};

/// Worst `(value, witness)` under `better`, ties resolved by sample order.
fn reduce<T: Copy>(items: Vec<(f64, T)>, worse: impl Fn(f64, f64) -> bool) -> Option<(f64, T)> {
    let mut it = items.into_iter();
    let mut best = it.next()?;
    for x in it {
        if worse(x.0, best.0) || x.0.is_nan() {
            best = x;
        }
    }
    Some(best)
}

/// Minimum over samples of `4φ^z − |φ^{xy}|²`; pass iff `≥ −1e−12`.
pub fn check_b(field: &CalibrationField, n_samples: usize, seed: u64) -> Result<ConditionResult> {
    let r = field.params().u_radius;
    let eps = field.params().epsilon;
    let a = field.triple().constants_array();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_cols = (n_samples / 16).max(1);
    let cols: Vec<Vec2> = (0..n_cols).map(|_| sample_disc(&mut rng, r)).collect();
    let per_col = n_samples.div_ceil(n_cols);
    let zs: Vec<Vec<f64>> = (0..n_cols)
        .map(|_| {
            (0..per_col)
                .map(|_| rand::Rng::gen_range(&mut rng, a[0] - 2.0 * eps..=a[2] + 2.0 * eps))
                .collect()
        })
        .collect();
    let results: Vec<Result<Vec<(f64, [f64; 3])>>> = cols
        .par_iter()
        .zip(zs.par_iter())
        .map(|(p, zs)| {
            let c = field.column(p)?;
            // Uniform heights plus both sides of every breakpoint.
            let mut heights = zs.clone();
            for b in c.breakpoints() {
                let d = 1e-12 * b.abs().max(1.0);
                heights.extend([b - d, b, b + d]);
            }
            Ok(heights
                .into_iter()
                .map(|z| {
                    let (xy, zc, _) = c.eval(z);
                    (4.0 * zc - xy.norm_squared(), [p.x, p.y, z])
                })
                .collect())
        })
        .collect();
    let mut all = Vec::new();
    for r in results {
        all.extend(r?);
    }
    let samples = all.len();
    let (m, w) = reduce(all, |x, best| x < best).expect("at least one sample");
    Ok(ConditionResult::lower_bound(m, 1e-12, w.to_vec(), samples))
}

/// Trace residual `|φ^{xy} − 2∇u_i| + |φ^z − |∇u_i|²|` at `z = u_i(p)`, `p ∈ A_i`.
pub fn check_c(field: &CalibrationField, n_samples: usize, seed: u64) -> Result<ConditionResult> {
    let r = field.params().u_radius;
    let t = field.triple();
    let g = t.geometry();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(n_samples);
    while pts.len() < n_samples {
        let p = sample_disc(&mut rng, r);
        if let crate::geometry::PointLabel::Sector(i) = g.classify_point(&p)? {
            pts.push((i, p));
        }
    }
    // Points hugging the interfaces from inside each sector.
    for s in Interface::ALL {
        let (i, j) = s.sectors();
        let d = g.ray(s);
        let n = perp(&d);
        for k in 1..=16 {
            let q = d * (r * k as f64 / 17.0);
            for (sector, side) in [(i, 1e-9 * r), (j, -1e-9 * r)] {
                for cand in [q + side * n, q - side * n] {
                    if g.classify_point(&cand)? == crate::geometry::PointLabel::Sector(sector) {
                        pts.push((sector, cand));
                    }
                }
            }
        }
    }
    let results: Vec<Result<(f64, [f64; 2])>> = pts
        .par_iter()
        .map(|&(i, p)| {
            let jet = t.eval(i, &p)?;
            let c = field.column(&p)?;
            let (xy, zc, _) = c.eval(jet.value);
            let res = (xy - 2.0 * jet.gradient).norm() + (zc - jet.gradient.norm_squared()).abs();
            Ok((res, [p.x, p.y]))
        })
        .collect();
    let all: Vec<(f64, [f64; 2])> = results.into_iter().collect::<Result<_>>()?;
    let samples = all.len();
    let (m, w) = reduce(all, |x, best| x > best).expect("at least one sample");
    Ok(ConditionResult::residual(m, 1e-12, w.to_vec(), samples))
}

/// `|I(p, u^-(p), u^+(p)) − ν_u|` along the three rays.
///
/// On a ray that is the cut of one of the extensions (antisymmetric family)
/// the jump is evaluated as the one-sided traces from both adjacent sectors.
pub fn check_e(field: &CalibrationField, n_per_ray: usize, tol: f64) -> Result<ConditionResult> {
    let r = field.params().u_radius;
    let t = field.triple();
    let g = *t.geometry();
    let mut jobs = Vec::new();
    for s in Interface::ALL {
        let (a, b) = s.sectors();
        let d = g.ray(s);
        for k in 0..n_per_ray {
            let p = d * (r * (k as f64 + 0.5) / n_per_ray as f64);
            for q in t.trace_points(s, p) {
                jobs.push((s, a, b, q));
            }
        }
    }
    let results: Vec<Result<(f64, [f64; 2])>> = jobs
        .par_iter()
        .map(|&(s, a, b, p)| {
            let c = field.column(&p)?;
            let i = c.integral(c.u[a], c.u[b]);
            Ok(((i - g.normal(s)).norm(), [p.x, p.y]))
        })
        .collect();
    let all: Vec<(f64, [f64; 2])> = results.into_iter().collect::<Result<_>>()?;
    let samples = all.len();
    let (m, w) = reduce(all, |x, best| x > best).expect("at least one sample");
    Ok(ConditionResult::residual(m, tol, w.to_vec(), samples))
}
