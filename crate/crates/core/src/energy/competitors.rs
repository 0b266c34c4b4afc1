//! Competitors sharing the boundary trace of `u` on `∂U`.

use rand::Rng;
use serde::Serialize;

use super::fem::{minimize_dirichlet, ms_energy, DiscreteEnergy};
use super::mesh::{MeshSpec, StarMesh};
use crate::error::Result;
use crate::geometry::{SectorGeometry, Vec2};
use crate::harmonic::SectorHarmonicTriple;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CompetitorKind {
    JunctionShift,
    BubblePerturbation,
    JumpErasure,
}

impl CompetitorKind {
    pub const ALL: [CompetitorKind; 3] =
        [CompetitorKind::JunctionShift, CompetitorKind::BubblePerturbation, CompetitorKind::JumpErasure];

    pub fn name(self) -> &'static str {
        match self {
            CompetitorKind::JunctionShift => "junction_shift",
            CompetitorKind::BubblePerturbation => "bubble",
            CompetitorKind::JumpErasure => "jump_erasure",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Competitor {
    /// Triple point moved to `xi`; each region is the image of the sector
    /// under the radial map fixing `∂U`, and `u_i` is transported along.
    JunctionShift { xi: [f64; 2] },
    /// `u_i + amplitude·(1 − |p − c|²/R²)³₊` in region `region`.
    BubblePerturbation { region: usize, centre: [f64; 2], radius: f64, amplitude: f64 },
    /// The jump between regions `a` and `b` removed on its first `layers`
    /// radial layers; the Dirichlet energy is minimized on the merged region.
    JumpErasure { a: usize, b: usize, layers: usize },
}

/// Evaluated competitor.
#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    pub energy: DiscreteEnergy,
    /// Largest deviation from the trace of `u` at boundary nodes.
    pub trace_residual: f64,
}

impl Competitor {
    pub fn kind(&self) -> CompetitorKind {
        match self {
            Competitor::JunctionShift { .. } => CompetitorKind::JunctionShift,
            Competitor::BubblePerturbation { .. } => CompetitorKind::BubblePerturbation,
            Competitor::JumpErasure { .. } => CompetitorKind::JumpErasure,
        }
    }

    /// Compact parameter string for tables.
    pub fn params(&self) -> String {
        match *self {
            Competitor::JunctionShift { xi } => format!("xi=({:.6e};{:.6e})", xi[0], xi[1]),
            Competitor::BubblePerturbation { region, centre, radius, amplitude } => format!(
                "region={region};centre=({:.6e};{:.6e});R={radius:.6e};c={amplitude:.6e}",
                centre[0], centre[1]
            ),
            Competitor::JumpErasure { a, b, layers } => format!("regions=({a};{b});layers={layers}"),
        }
    }

    pub fn evaluate(&self, triple: &SectorHarmonicTriple, spec: MeshSpec) -> Result<Evaluation> {
        match *self {
            Competitor::JunctionShift { xi } => {
                let mesh = StarMesh::new(spec, Vec2::new(xi[0], xi[1]))?;
                let values = transported_values(triple, &mesh);
                finish(triple, &mesh, &values)
            }
            Competitor::BubblePerturbation { centre, radius, amplitude, region } => {
                let mesh = StarMesh::new(spec, Vec2::zeros())?;
                let c = Vec2::new(centre[0], centre[1]);
                let mut values = transported_values(triple, &mesh);
                for (n, v) in values.iter_mut().enumerate() {
                    if mesh.node_region[n] == region {
                        *v += amplitude * bump(&(mesh.nodes[n] - c), radius);
                    }
                }
                finish(triple, &mesh, &values)
            }
            Competitor::JumpErasure { a, b, layers } => {
                let mesh = StarMesh::with_erased(spec, Vec2::zeros(), a, b, layers)?;
                let mut values = transported_values(triple, &mesh);
                let merged = |n: usize| mesh.node_region[n] == a || mesh.node_region[n] == b;
                let free: Vec<bool> = (0..mesh.nodes.len()).map(|n| merged(n) && !mesh.on_boundary[n]).collect();
                for n in 0..mesh.nodes.len() {
                    if free[n] && mesh.reference[n].norm() <= layers as f64 / spec.n_radial as f64 * spec.radius {
                        let p = mesh.reference[n];
                        values[n] = 0.5 * (triple.value(a, &p) + triple.value(b, &p));
                    }
                }
                minimize_dirichlet(&mesh, &mut values, &free, 1e-12)?;
                finish(triple, &mesh, &values)
            }
        }
    }
}

/// `(1 − |d|²/R²)³` inside the ball of radius `R`, zero outside.
pub fn bump(d: &Vec2, radius: f64) -> f64 {
    let s = 1.0 - d.norm_squared() / (radius * radius);
    if s > 0.0 {
        s * s * s
    } else {
        0.0
    }
}

/// `u_i` at the reference position of each node of region `i`.
pub fn transported_values(triple: &SectorHarmonicTriple, mesh: &StarMesh) -> Vec<f64> {
    (0..mesh.nodes.len()).map(|n| triple.value(mesh.node_region[n], &mesh.reference[n])).collect()
}

fn finish(triple: &SectorHarmonicTriple, mesh: &StarMesh, values: &[f64]) -> Result<Evaluation> {
    let energy = ms_energy(mesh, values)?;
    let trace_residual = (0..mesh.nodes.len())
        .filter(|&n| mesh.on_boundary[n])
        .map(|n| (values[n] - triple.value(mesh.node_region[n], &mesh.nodes[n])).abs())
        .fold(0.0, f64::max);
    Ok(Evaluation { energy, trace_residual })
}

/// Random competitor of the given kind on the disc of radius `r`.
pub fn sample<R: Rng>(kind: CompetitorKind, r: f64, spec: MeshSpec, rng: &mut R) -> Competitor {
    let g = SectorGeometry::new();
    match kind {
        CompetitorKind::JunctionShift => {
            let xi = loop {
                let p = Vec2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)) * r;
                if p.norm() < 0.5 * r {
                    break p;
                }
            };
            Competitor::JunctionShift { xi: [xi.x, xi.y] }
        }
        CompetitorKind::BubblePerturbation => {
            let region = rng.gen_range(0..3);
            let angle = SectorGeometry::bisector_angle(region) + rng.gen_range(-0.5..0.5) * std::f64::consts::PI / 3.0;
            let dist = rng.gen_range(0.3..0.6) * r;
            let centre = dist * Vec2::new(angle.cos(), angle.sin());
            // Keep the support away from both edges of the sector and from ∂U.
            let (e0, e1) = g.sector_edges(region);
            let to_edge = |d: Vec2| crate::geometry::cross(&d, &centre).abs();
            let room = to_edge(g.ray(e0)).min(to_edge(g.ray(e1))).min(r - dist);
            let amplitude = 10f64.powf(rng.gen_range(-3.0..-1.0));
            Competitor::BubblePerturbation { region, centre: [centre.x, centre.y], radius: 0.8 * room, amplitude }
        }
        CompetitorKind::JumpErasure => {
            let a = rng.gen_range(0..3);
            let b = (a + 1) % 3;
            let layers = rng.gen_range(1..=(spec.n_radial / 2).max(1));
            Competitor::JumpErasure { a, b, layers }
        }
    }
}
