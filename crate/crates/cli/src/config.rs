//! Run configuration shared by all subcommands.

use std::path::{Path, PathBuf};

use calib_core::{Mode, ParamOverrides, SectorHarmonicTriple, Symmetry};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub triple: TripleConfig,
    /// Parameters left out are chosen by `select_params`.
    pub params: ParamOverrides,
    pub tolerances: Tolerances,
    pub samples: Samples,
    pub scan: ScanSettings,
    pub rho: RhoSettings,
    pub step3: Step3Settings,
    pub energy: EnergySettings,
    pub seed: u64,
    /// Output directory; `--out` takes precedence.
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TripleConfig {
    pub symmetry: Symmetry,
    /// Same modes in all three sectors.
    pub modes: Vec<Mode>,
    /// Per-sector modes; overrides `modes` when present.
    pub sector_modes: Option<[Vec<Mode>; 3]>,
    /// `u_i(0, 0)`.
    pub constants: [f64; 3],
}

impl Default for TripleConfig {
    fn default() -> Self {
        Self { symmetry: Symmetry::Symmetric, modes: Vec::new(), sector_modes: None, constants: [0.0, 1.0, 2.0] }
    }
}

impl TripleConfig {
    pub fn build(&self) -> calib_core::Result<SectorHarmonicTriple> {
        match &self.sector_modes {
            Some(m) => SectorHarmonicTriple::with_sector_modes(self.symmetry, m.clone(), self.constants),
            None => SectorHarmonicTriple::new(self.symmetry, self.modes.clone(), self.constants),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub hypotheses: f64,
    pub b: f64,
    pub c: f64,
    pub e: f64,
    pub divergence: f64,
    pub d: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { hypotheses: 1e-10, b: 1e-12, c: 1e-12, e: 1e-6, divergence: 1e-6, d: 1e-9 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Samples {
    pub hypotheses: usize,
    pub b: usize,
    pub c: usize,
    pub e_per_ray: usize,
    pub divergence_random: usize,
    pub divergence_per_surface: usize,
    pub m_perimeter: usize,
    /// Also bisect for the smallest admissible `δ` (slow).
    pub delta_bisection: bool,
}

impl Default for Samples {
    fn default() -> Self {
        Self {
            hypotheses: 64,
            b: 10_000,
            c: 10_000,
            e_per_ray: 32,
            divergence_random: 100,
            divergence_per_surface: 50,
            m_perimeter: 16,
            delta_bisection: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSettings {
    pub grid: usize,
    pub refine: usize,
    pub top: usize,
    /// Resolution of the exhaustive cross-check; skipped when absent.
    pub brute_force: Option<usize>,
}

impl Default for ScanSettings {
    fn default() -> Self {
        Self { grid: 32, refine: 3, top: 10, brute_force: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RhoMode {
    /// `ρ` over the full jump along each ray.
    AlongRay,
    /// `ρ(p, t_1, t_2)` on a `t`-grid at a fixed point.
    Slice,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RhoSettings {
    pub mode: RhoMode,
    pub n: usize,
    /// Point of the slice, in units of `u_radius`.
    pub point: [f64; 2],
}

impl Default for RhoSettings {
    fn default() -> Self {
        Self { mode: RhoMode::AlongRay, n: 64, point: [0.0, 0.0] }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Step3Settings {
    pub epsilons: Vec<f64>,
    /// `δ / ε` values.
    pub delta_fractions: Vec<f64>,
    /// Values of `ε` for which the vertex check must fail.
    pub expected_failures: Vec<f64>,
    /// `δ` used by `verify`; defaults to `ε / 2`.
    pub delta: Option<f64>,
}

impl Default for Step3Settings {
    fn default() -> Self {
        Self {
            epsilons: vec![0.02, 0.05, 0.1],
            delta_fractions: vec![0.25, 0.5, 0.75],
            expected_failures: vec![1.8],
            delta: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergySettings {
    pub per_kind: usize,
    pub mesh_n: usize,
    pub slack_rel: f64,
    pub max_halvings: usize,
    /// Radius of the experiment; defaults to the selected `u_radius`.
    pub radius: Option<f64>,
}

impl Default for EnergySettings {
    fn default() -> Self {
        Self { per_kind: 100, mesh_n: 32, slack_rel: 1e-3, max_halvings: 3, radius: None }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }
}
