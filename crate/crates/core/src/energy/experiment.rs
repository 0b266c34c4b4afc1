//! Seeded comparison of `u` against sampled competitors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::competitors::{sample, Competitor, CompetitorKind, Evaluation};
use super::fem::DiscreteEnergy;
use super::mesh::MeshSpec;
use crate::error::Result;
use crate::harmonic::SectorHarmonicTriple;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExperimentConfig {
    pub per_kind: usize,
    pub seed: u64,
    /// Mesh size is `radius / mesh_n`.
    pub mesh_n: usize,
    /// Slack is `slack_rel · energy(u)`.
    pub slack_rel: f64,
    /// Radius halvings tried when a competitor wins beyond the slack.
    pub max_halvings: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self { per_kind: 100, seed: 0, mesh_n: 32, slack_rel: 1e-3, max_halvings: 3 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CompetitorRow {
    pub id: usize,
    pub kind: CompetitorKind,
    pub params: String,
    pub dirichlet: f64,
    pub length: f64,
    pub total: f64,
    /// `energy(v) − energy(u)`, computed termwise.
    pub gap: f64,
    pub trace_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    /// Some gap is negative but within the discretization slack.
    InconclusiveDiscretization,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct BubbleFit {
    pub amplitudes: Vec<f64>,
    pub gaps: Vec<f64>,
    /// Least-squares slope of `log gap` against `log amplitude`.
    pub exponent: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub radius: f64,
    pub energy_u: DiscreteEnergy,
    pub slack: f64,
    pub rows: Vec<CompetitorRow>,
    pub min_gap: f64,
    pub min_gap_id: usize,
    pub max_trace_residual: f64,
    pub verdict: Verdict,
    /// Radius at which no competitor wins, when the first radius failed.
    pub crossover_radius: Option<f64>,
    pub bubble: BubbleFit,
}

impl EnergyReport {
    pub fn pass(&self) -> bool {
        self.verdict != Verdict::Fail && self.max_trace_residual <= 1e-12
    }
}

/// Energy of `u` through the same discretization as the competitors.
pub fn reference_energy(triple: &SectorHarmonicTriple, spec: MeshSpec) -> Result<DiscreteEnergy> {
    Ok(Competitor::JunctionShift { xi: [0.0, 0.0] }.evaluate(triple, spec)?.energy)
}

fn competitors(radius: f64, spec: MeshSpec, cfg: &ExperimentConfig) -> Vec<Competitor> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::new();
    for kind in CompetitorKind::ALL {
        for k in 0..cfg.per_kind {
            if kind == CompetitorKind::JunctionShift && k == 0 {
                out.push(Competitor::JunctionShift { xi: [0.0, 0.0] });
            } else {
                out.push(sample(kind, radius, spec, &mut rng));
            }
        }
    }
    out
}

fn run_at(triple: &SectorHarmonicTriple, radius: f64, cfg: &ExperimentConfig) -> Result<(DiscreteEnergy, Vec<CompetitorRow>)> {
    let spec = MeshSpec::with_size(radius, cfg.mesh_n);
    let eu = reference_energy(triple, spec)?;
    let list = competitors(radius, spec, cfg);
    let evals: Vec<Evaluation> = list.par_iter().map(|c| c.evaluate(triple, spec)).collect::<Result<_>>()?;
    let rows = list
        .iter()
        .zip(evals)
        .enumerate()
        .map(|(id, (c, e))| CompetitorRow {
            id,
            kind: c.kind(),
            params: c.params(),
            dirichlet: e.energy.dirichlet,
            length: e.energy.jump_length,
            total: e.energy.total,
            gap: (e.energy.dirichlet - eu.dirichlet) + (e.energy.jump_length - eu.jump_length),
            trace_residual: e.trace_residual,
        })
        .collect();
    Ok((eu, rows))
}

/// Gap of a fixed bubble in the middle of sector 0 for amplitudes
/// `10^{-1}, …, 10^{-3}`.
pub fn bubble_scaling(triple: &SectorHarmonicTriple, radius: f64, mesh_n: usize) -> Result<BubbleFit> {
    let spec = MeshSpec::with_size(radius, mesh_n);
    let eu = reference_energy(triple, spec)?;
    let a = crate::geometry::SectorGeometry::bisector_angle(0);
    let centre = 0.5 * radius * crate::geometry::Vec2::new(a.cos(), a.sin());
    let amplitudes: Vec<f64> = (0..5).map(|k| 10f64.powf(-1.0 - 0.5 * k as f64)).collect();
    let mut gaps = Vec::new();
    for &amplitude in &amplitudes {
        let c = Competitor::BubblePerturbation {
            region: 0,
            centre: [centre.x, centre.y],
            radius: 0.3 * radius,
            amplitude,
        };
        let e = c.evaluate(triple, spec)?.energy;
        gaps.push((e.dirichlet - eu.dirichlet) + (e.jump_length - eu.jump_length));
    }
    let xs: Vec<f64> = amplitudes.iter().map(|a| a.ln()).collect();
    let ys: Vec<f64> = gaps.iter().map(|g| g.abs().ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(BubbleFit { amplitudes, gaps, exponent: sxy / sxx })
}

/// Runs all competitors at `radius`; if one wins beyond the slack, retries at
/// halved radii and records the first radius at which none does.
pub fn minimality_experiment(triple: &SectorHarmonicTriple, radius: f64, cfg: &ExperimentConfig) -> Result<EnergyReport> {
    let (eu, rows) = run_at(triple, radius, cfg)?;
    let slack = cfg.slack_rel * eu.total;
    let (min_id, min_gap) = rows
        .iter()
        .map(|r| (r.id, r.gap))
        .fold((0, f64::INFINITY), |b, x| if x.1 < b.1 { x } else { b });
    let verdict = if min_gap >= 0.0 {
        Verdict::Pass
    } else if min_gap >= -slack {
        Verdict::InconclusiveDiscretization
    } else {
        Verdict::Fail
    };
    let mut crossover_radius = None;
    if verdict == Verdict::Fail {
        let mut r = radius;
        for _ in 0..cfg.max_halvings {
            r *= 0.5;
            let (e, rows) = run_at(triple, r, cfg)?;
            let worst = rows.iter().map(|x| x.gap).fold(f64::INFINITY, f64::min);
            if worst >= -cfg.slack_rel * e.total {
                crossover_radius = Some(r);
                break;
            }
        }
    }
    let max_trace_residual = rows.iter().map(|r| r.trace_residual).fold(0.0, f64::max);
    let bubble = bubble_scaling(triple, radius, cfg.mesh_n)?;
    log::info!(
        "energy: u = {:.9e}, min gap {:.3e} (competitor {min_id}), bubble exponent {:.4}",
        eu.total,
        min_gap,
        bubble.exponent
    );
    Ok(EnergyReport {
        radius,
        energy_u: eu,
        slack,
        rows,
        min_gap,
        min_gap_id: min_id,
        max_trace_residual,
        verdict,
        crossover_radius,
        bubble,
    })
}
