//! Mumford-Shah energy of `u` on `U` against competitors with the same trace.

pub mod competitors;
pub mod experiment;
pub mod fem;
pub mod mesh;

pub use competitors::{bump, sample, transported_values, Competitor, CompetitorKind, Evaluation};
pub use experiment::{
    bubble_scaling, minimality_experiment, reference_energy, BubbleFit, CompetitorRow, EnergyReport, ExperimentConfig,
    Verdict,
};
pub use fem::{minimize_dirichlet, ms_energy, ms_energy_analytic, DiscreteEnergy};
pub use mesh::{JumpSegment, MeshSpec, StarMesh};
