pub mod characteristics;
pub mod error;
pub mod geometry;
pub mod harmonic;
pub mod ingredients;
pub mod params;
pub mod quadrature;

pub use characteristics::{Aux, Branch, CharacteristicSolution};
pub use error::{CalibError, Result};
pub use geometry::{Interface, PointLabel, SectorGeometry, Vec2, SQRT3};
pub use harmonic::{ExtensionDomain, HypothesisReport, Jet, Mode, SectorHarmonicTriple, Symmetry};
pub use ingredients::FieldIngredients;
pub use params::{CalibrationParams, ParamOverrides};
pub mod field;
pub mod select;

pub use field::{CalibrationField, Column, Piece, RegionLabel, Segment};
pub use select::{select_params, InvariantReport};
pub mod verify;
pub mod energy;
