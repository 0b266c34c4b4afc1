use std::time::Instant;

use calib_core::verify::{check_b, check_c, check_divergence, check_e, DivergenceConfig};
use calib_core::{select_params, CalibrationField, Mode, ParamOverrides, SectorHarmonicTriple, Symmetry};

fn triples() -> Vec<(&'static str, SectorHarmonicTriple)> {
    vec![
        ("constants", SectorHarmonicTriple::constants([0.0, 1.0, 2.0])),
        (
            "symmetric",
            SectorHarmonicTriple::new(Symmetry::Symmetric, vec![Mode::new(1, 0.5)], [0.0, 1.0, 2.0]).unwrap(),
        ),
        (
            "antisymmetric",
            SectorHarmonicTriple::new(Symmetry::Antisymmetric, vec![Mode::new(1, 0.5)], [0.0, 1.0, 2.0]).unwrap(),
        ),
    ]
}

fn build(t: &SectorHarmonicTriple) -> CalibrationField {
    let p = select_params(t, &ParamOverrides::default()).unwrap();
    CalibrationField::new(t, &p).unwrap()
}

#[test]
fn condition_b_holds() {
    for (name, t) in triples() {
        let f = build(&t);
        let r = check_b(&f, 10_000, 5).unwrap();
        assert!(r.pass, "{name}: {r:?}");
        assert!(r.samples >= 10_000);
    }
}

#[test]
fn condition_c_holds() {
    for (name, t) in triples() {
        let f = build(&t);
        let r = check_c(&f, 2000, 6).unwrap();
        assert!(r.pass, "{name}: {r:?}");
        if name == "constants" {
            assert_eq!(r.margin, 0.0);
        }
    }
}

#[test]
fn condition_e_holds() {
    for (name, t) in triples() {
        let f = build(&t);
        let r = check_e(&f, 32, 1e-9).unwrap();
        assert!(r.pass, "{name}: {r:?}");
    }
}

#[test]
fn divergence_vanishes_weakly() {
    for (name, t) in triples() {
        let f = build(&t);
        let start = Instant::now();
        let cfg = DivergenceConfig { n_random: 20, per_surface: 4, ..Default::default() };
        let r = check_divergence(&f, &cfg).unwrap();
        eprintln!("{name}: {:.3e} over {} boxes in {:?}", r.margin, r.samples, start.elapsed());
        assert_eq!(r.samples, 20 + 14 * 4);
        assert!(r.pass, "{name}: {r:?}");
    }
}
