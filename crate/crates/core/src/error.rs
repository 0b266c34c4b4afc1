use thiserror::Error;

use crate::geometry::Interface;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalibError {
    #[error("point ({x}, {y}) is outside the working disc of radius {radius}")]
    OutOfDomain { x: f64, y: f64, radius: f64 },

    #[error("point ({x}, {y}) lies on the branch cut {slit} of sector {sector}")]
    BranchCut { x: f64, y: f64, sector: usize, slit: Interface },

    #[error("invalid harmonic triple: {0}")]
    InvalidTriple(String),

    #[error("infeasible parameters: {0}")]
    InfeasibleParams(String),

    #[error("field line through ({x}, {y}) left the disc of radius {limit} before reaching its datum curve")]
    NoCrossing { x: f64, y: f64, limit: f64 },

    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),

    #[error("geometry violated in {set}: witness ({wx}, {wy}) has slack {slack}")]
    GeometryViolated { set: String, wx: f64, wy: f64, slack: f64 },

    #[error("mesh does not conform to the discontinuity set: {0}")]
    NonConformingMesh(String),

    #[error("linear solver failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, CalibError>;
