use std::f64::consts::PI;

use calib_core::energy::{
    bubble_scaling, minimality_experiment, ms_energy, ms_energy_analytic, reference_energy, Competitor,
    ExperimentConfig, MeshSpec, StarMesh, Verdict,
};
use calib_core::{Mode, SectorHarmonicTriple, Symmetry, Vec2};

const R: f64 = 0.005;

fn constants() -> SectorHarmonicTriple {
    SectorHarmonicTriple::constants([0.0, 1.0, 2.0])
}

fn one_mode(c: f64) -> SectorHarmonicTriple {
    SectorHarmonicTriple::new(Symmetry::Symmetric, vec![Mode::new(1, c)], [0.0, 1.0, 2.0]).unwrap()
}

#[test]
fn constants_energy_is_three_radii() {
    let spec = MeshSpec::with_size(R, 16);
    let e = reference_energy(&constants(), spec).unwrap();
    assert!(e.dirichlet < 1e-25);
    assert!((e.jump_length - 3.0 * R).abs() < 1e-15);
    assert_eq!(e.total, e.dirichlet + e.jump_length);
}

#[test]
fn mesh_conforms_and_covers_polygon() {
    for xi in [Vec2::zeros(), Vec2::new(0.001, -0.0015)] {
        let m = StarMesh::new(MeshSpec::with_size(R, 16), xi).unwrap();
        let n = m.spec.n_angular * 3;
        let polygon = 0.5 * n as f64 * R * R * (2.0 * PI / n as f64).sin();
        assert!((m.area() - polygon).abs() < 1e-12 * polygon, "{} vs {polygon}", m.area());
        assert_eq!(m.jumps.len(), 3);
    }
    assert!(StarMesh::new(MeshSpec::with_size(R, 16), Vec2::new(R, 0.0)).is_err());
}

#[test]
fn one_mode_dirichlet_matches_polar_integral() {
    // |∇(c ρ³ cos 3θ')|² = 9c²ρ⁴ integrates to 3πc²r⁶ over the disc.
    let c = 0.5;
    let t = one_mode(c);
    let exact = 3.0 * PI * c * c * R.powi(6);
    let m = StarMesh::new(MeshSpec::with_size(R, 64), Vec2::zeros()).unwrap();
    let e = ms_energy_analytic(&m, |i, p| t.jet(i, p).gradient);
    assert!((e.dirichlet - exact).abs() < 5e-3 * exact, "{} vs {exact}", e.dirichlet);
    for k in 0..3 {
        assert!((e.dirichlet_by_region[k] - exact / 3.0).abs() < 5e-3 * exact);
    }
}

#[test]
fn p1_energy_converges_at_second_order() {
    let c = 0.5;
    let t = one_mode(c);
    let exact = 3.0 * PI * c * c * R.powi(6);
    let errs: Vec<f64> = [8, 16, 32, 64]
        .iter()
        .map(|&n| (reference_energy(&t, MeshSpec::with_size(R, n)).unwrap().dirichlet - exact).abs())
        .collect();
    let order = (errs[2] / errs[3]).log2();
    println!("errors {errs:?}, order {order:.3}");
    assert!(order >= 1.9, "{errs:?}");
}

#[test]
fn region_energies_add_up() {
    let t = one_mode(0.5);
    let spec = MeshSpec::with_size(R, 24);
    let m = StarMesh::new(spec, Vec2::zeros()).unwrap();
    let values: Vec<f64> = (0..m.nodes.len()).map(|n| t.value(m.node_region[n], &m.nodes[n])).collect();
    let e = ms_energy(&m, &values).unwrap();
    let s: f64 = e.dirichlet_by_region.iter().sum();
    assert!((s - e.dirichlet).abs() <= 1e-15 * e.dirichlet);
}

#[test]
fn zero_shift_is_the_identity_competitor() {
    for t in [constants(), one_mode(0.5)] {
        let spec = MeshSpec::with_size(R, 16);
        let eu = reference_energy(&t, spec).unwrap();
        let ev = Competitor::JunctionShift { xi: [0.0, 0.0] }.evaluate(&t, spec).unwrap();
        assert_eq!(ev.energy.total - eu.total, 0.0);
        assert_eq!(ev.trace_residual, 0.0);
    }
}

#[test]
fn competitors_keep_the_trace() {
    let t = one_mode(0.5);
    let spec = MeshSpec::with_size(R, 16);
    for c in [
        Competitor::JunctionShift { xi: [0.001, 0.0007] },
        Competitor::BubblePerturbation { region: 1, centre: [-0.0025, 0.0], radius: 0.0008, amplitude: 0.05 },
        Competitor::JumpErasure { a: 0, b: 1, layers: 4 },
    ] {
        let e = c.evaluate(&t, spec).unwrap();
        assert!(e.trace_residual <= 1e-12, "{c:?}: {}", e.trace_residual);
    }
}

#[test]
fn erasing_part_of_the_jump_costs_energy() {
    let t = constants();
    let spec = MeshSpec::with_size(R, 16);
    for layers in [1, 2, 4, 8] {
        let e = Competitor::JumpErasure { a: 2, b: 0, layers }.evaluate(&t, spec).unwrap();
        let removed = R * layers as f64 / 16.0;
        assert!((e.energy.jump_length - (3.0 * R - removed)).abs() < 1e-15);
        assert!(e.energy.total > 3.0 * R, "layers {layers}: {:?}", e.energy);
    }
}

#[test]
fn bubble_gap_is_quadratic() {
    for t in [constants(), one_mode(0.5)] {
        let fit = bubble_scaling(&t, R, 32).unwrap();
        println!("{fit:?}");
        assert!((1.8..=2.2).contains(&fit.exponent));
        assert!(fit.gaps.iter().all(|g| *g > 0.0));
    }
}

#[test]
fn experiment_constants_and_one_mode() {
    for t in [constants(), one_mode(0.5)] {
        let cfg = ExperimentConfig { per_kind: 20, ..ExperimentConfig::default() };
        let rep = minimality_experiment(&t, R, &cfg).unwrap();
        println!("min gap {:.3e}, verdict {:?}", rep.min_gap, rep.verdict);
        assert!(rep.pass());
        assert_ne!(rep.verdict, Verdict::Fail);
        assert_eq!(rep.rows[0].gap, 0.0);
    }
}
