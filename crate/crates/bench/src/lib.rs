//! Shared fixtures for the benchmarks.

use calib_core::{select_params, CalibrationField, Mode, ParamOverrides, SectorHarmonicTriple, Symmetry};

/// Field of the one-mode triple with the given symmetry and default parameters.
pub fn one_mode_field(symmetry: Symmetry) -> CalibrationField {
    let t = SectorHarmonicTriple::new(symmetry, vec![Mode::new(1, 0.5)], [0.0, 1.0, 2.0]).expect("valid triple");
    let p = select_params(&t, &ParamOverrides::default()).expect("feasible parameters");
    CalibrationField::new(&t, &p).expect("field builds")
}
