//! P1 energies and the constrained Dirichlet solve.

use serde::Serialize;

use super::mesh::StarMesh;
use crate::error::{CalibError, Result};
use crate::geometry::Vec2;

/// `∫|∇v|² + H¹(S_v)` on a conforming mesh.
#[derive(Debug, Clone, Serialize)]
pub struct DiscreteEnergy {
    pub dirichlet: f64,
    /// Dirichlet term restricted to each region.
    pub dirichlet_by_region: [f64; 3],
    pub jump_length: f64,
    pub total: f64,
    pub triangles: usize,
}

impl DiscreteEnergy {
    fn new(by_region: [f64; 3], jump_length: f64, triangles: usize) -> Self {
        let dirichlet = by_region.iter().sum();
        Self { dirichlet, dirichlet_by_region: by_region, jump_length, total: dirichlet + jump_length, triangles }
    }
}

/// Energy of the continuous piecewise-linear field with the given nodal values.
pub fn ms_energy(mesh: &StarMesh, values: &[f64]) -> Result<DiscreteEnergy> {
    if values.len() != mesh.nodes.len() {
        return Err(CalibError::NonConformingMesh(format!(
            "{} nodal values for {} nodes",
            values.len(),
            mesh.nodes.len()
        )));
    }
    let mut by_region = [0.0; 3];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let (grads, area) = mesh.shape_gradients(t);
        let g: Vec2 = (0..3).map(|k| values[tri[k]] * grads[k]).sum();
        by_region[mesh.triangle_region[t]] += area * g.norm_squared();
    }
    Ok(DiscreteEnergy::new(by_region, mesh.jump_length(), mesh.triangles.len()))
}

/// Energy of a field known analytically on each region, by the edge-midpoint
/// rule (exact for quadratic `|∇v|²`).
pub fn ms_energy_analytic(mesh: &StarMesh, grad: impl Fn(usize, &Vec2) -> Vec2) -> DiscreteEnergy {
    let mut by_region = [0.0; 3];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let [a, b, c] = tri.map(|v| mesh.nodes[v]);
        let i = mesh.triangle_region[t];
        let area = mesh.signed_area(t);
        let s: f64 = [(a + b) / 2.0, (b + c) / 2.0, (c + a) / 2.0]
            .iter()
            .map(|m| grad(i, m).norm_squared())
            .sum();
        by_region[i] += area * s / 3.0;
    }
    DiscreteEnergy::new(by_region, mesh.jump_length(), mesh.triangles.len())
}

/// Symmetric sparse matrix in row-compressed form.
struct Stiffness {
    rows: Vec<Vec<(usize, f64)>>,
}

impl Stiffness {
    fn assemble(mesh: &StarMesh) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); mesh.nodes.len()];
        for (t, tri) in mesh.triangles.iter().enumerate() {
            let (grads, area) = mesh.shape_gradients(t);
            for a in 0..3 {
                for b in 0..3 {
                    rows[tri[a]].push((tri[b], area * grads[a].dot(&grads[b])));
                }
            }
        }
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(j, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += v,
                    _ => merged.push((j, v)),
                }
            }
            *row = merged;
        }
        Self { rows }
    }

    fn apply(&self, x: &[f64], free: &[bool], out: &mut [f64]) {
        for (i, row) in self.rows.iter().enumerate() {
            out[i] = if free[i] { row.iter().filter(|e| free[e.0]).map(|&(j, v)| v * x[j]).sum() } else { 0.0 };
        }
    }

    fn diagonal(&self, i: usize) -> f64 {
        self.rows[i].iter().find(|e| e.0 == i).map_or(1.0, |e| e.1)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes the P1 Dirichlet energy over the nodes marked `free`, the others
/// held at `values`. Jacobi-preconditioned conjugate gradients; returns the
/// number of iterations.
pub fn minimize_dirichlet(mesh: &StarMesh, values: &mut [f64], free: &[bool], tol: f64) -> Result<usize> {
    let k = Stiffness::assemble(mesh);
    let n = values.len();
    // Right-hand side: −K_{free,fixed} x_fixed.
    let mut b = vec![0.0; n];
    for (i, row) in k.rows.iter().enumerate() {
        if free[i] {
            b[i] = -row.iter().filter(|e| !free[e.0]).map(|&(j, v)| v * values[j]).sum::<f64>();
        }
    }
    let mut x: Vec<f64> = (0..n).map(|i| if free[i] { values[i] } else { 0.0 }).collect();
    let mut ax = vec![0.0; n];
    k.apply(&x, free, &mut ax);
    let mut r: Vec<f64> = (0..n).map(|i| b[i] - ax[i]).collect();
    let dinv: Vec<f64> = (0..n).map(|i| if free[i] { 1.0 / k.diagonal(i) } else { 0.0 }).collect();
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(a, d)| a * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let bnorm = dot(&b, &b).sqrt().max(1e-300);
    let mut ap = vec![0.0; n];
    let max_iter = 20 * n;
    for it in 0..max_iter {
        if dot(&r, &r).sqrt() <= tol * bnorm {
            for i in 0..n {
                if free[i] {
                    values[i] = x[i];
                }
            }
            return Ok(it);
        }
        k.apply(&p, free, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(CalibError::Solver(format!("conjugate gradients did not converge in {max_iter} iterations")))
}
