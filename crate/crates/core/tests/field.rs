use calib_core::{
    select_params, CalibrationField, Mode, ParamOverrides, RegionLabel, SectorHarmonicTriple, Symmetry, Vec2,
    SQRT3,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn constants() -> SectorHarmonicTriple {
    SectorHarmonicTriple::constants([0.0, 1.0, 2.0])
}

fn one_mode(sym: Symmetry) -> SectorHarmonicTriple {
    SectorHarmonicTriple::new(sym, vec![Mode::new(1, 0.5)], [0.0, 1.0, 2.0]).unwrap()
}

fn build(t: &SectorHarmonicTriple) -> CalibrationField {
    let p = select_params(t, &ParamOverrides::default()).unwrap();
    CalibrationField::new(t, &p).unwrap()
}

fn random_in_disc(rng: &mut ChaCha8Rng, r: f64) -> Vec2 {
    loop {
        let p = Vec2::new(rng.gen_range(-r..r), rng.gen_range(-r..r));
        if p.norm() <= r {
            return p;
        }
    }
}

#[test]
fn selected_parameters_for_constants() {
    let p = select_params(&constants(), &ParamOverrides::default()).unwrap();
    assert_eq!((p.l1, p.l2), (0.5, 1.5));
    assert_eq!(p.epsilon, 0.05);
    assert_eq!(p.lambda, 0.1);
    assert!(p.mu >= 25.0);
    assert!(p.fpp < -2.0 * SQRT3 - 40.0);
    assert!(p.u_radius >= 1e-4 && p.u_radius <= 0.02);
    eprintln!("{p:?}");
}

#[test]
fn large_epsilon_is_infeasible() {
    let ov = ParamOverrides { epsilon: Some(0.6), ..Default::default() };
    let err = select_params(&constants(), &ov).unwrap_err().to_string();
    assert!(err.contains("g(0)"), "{err}");
}

#[test]
fn one_mode_fpp_uses_exact_hessian() {
    let t = one_mode(Symmetry::Symmetric);
    let p = select_params(&t, &ParamOverrides::default()).unwrap();
    // r^3 modes have vanishing Hessian at the origin.
    let bound = -2.0 * SQRT3 - 2.0 / p.epsilon;
    assert!((p.fpp - 1.1 * bound).abs() < 1e-12);
}

#[test]
fn region_examples() {
    let f = build(&constants());
    let pr = *f.params();
    let o = Vec2::zeros();
    assert_eq!(f.region_of(&o, 1.0).unwrap(), RegionLabel::G(1));
    assert_eq!(f.region_of(&o, pr.l1 + pr.lambda).unwrap(), RegionLabel::H(1));
    assert_eq!(f.region_of(&o, -2.0 * pr.epsilon).unwrap(), RegionLabel::Vertical);
    assert_eq!(f.region_of(&o, pr.l1 + pr.lambda / 4.0).unwrap(), RegionLabel::KMinusH(1));
    // Ties go to the lower region.
    assert_eq!(f.region_of(&o, pr.l1 + pr.lambda / 2.0).unwrap(), RegionLabel::KMinusH(1));
    assert_eq!(f.region_of(&o, pr.epsilon).unwrap(), RegionLabel::G(0));
}

#[test]
fn field_examples() {
    let f = build(&constants());
    let pr = *f.params();
    let o = Vec2::zeros();
    let (xy, z) = f.eval(&o, pr.l1 + pr.lambda).unwrap();
    assert_eq!(xy, Vec2::zeros());
    assert_eq!(z, pr.mu);
    let (xy, _) = f.eval(&o, pr.l1 + pr.lambda / 4.0).unwrap();
    let g0 = 1.0 - SQRT3 * pr.epsilon;
    let expected = (g0 / pr.lambda) * Vec2::new(-SQRT3 / 2.0, 0.5);
    assert!((xy - expected).norm() < 1e-14);
    assert!((f.omega(&o, 0.3) - 1.0).abs() < 1e-15);
    let t = 0.004;
    let q = Vec2::new(t, 0.0);
    // On the positive x-axis v_0 = v_2 = ε − t/2 while v_1 = ε + t.
    for z in [0.3, 1.8] {
        assert!((f.omega(&q, z) - 0.0025 / (0.05 - t / 2.0f64).powi(2)).abs() < 1e-13);
    }
    assert!((f.omega(&q, 1.2) - 0.0025 / (0.05 + t).powi(2)).abs() < 1e-13);
}

#[test]
fn trace_condition_on_graphs() {
    for t in [constants(), one_mode(Symmetry::Symmetric), one_mode(Symmetry::Antisymmetric)] {
        let f = build(&t);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let p = random_in_disc(&mut rng, f.params().u_radius);
            for i in 0..3 {
                if t.on_branch_cut(i, &p) {
                    continue;
                }
                let j = t.eval(i, &p).unwrap();
                let (xy, z) = f.eval(&p, j.value).unwrap();
                assert!((xy - 2.0 * j.gradient).norm() <= 1e-12);
                assert!((z - j.gradient.norm_squared()).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn omega_is_positive() {
    let f = build(&one_mode(Symmetry::Symmetric));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..1000 {
        let p = random_in_disc(&mut rng, f.params().u_radius);
        for j in 0..3 {
            assert!(f.omega_j(j, &p) > 0.0);
        }
    }
}

#[test]
fn normal_flux_matches_across_band_edges() {
    let f = build(&one_mode(Symmetry::Symmetric));
    let t = f.triple().clone();
    let eps = f.params().epsilon;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let p = random_in_disc(&mut rng, f.params().u_radius);
        let c = f.column(&p).unwrap();
        for i in 0..3 {
            let gu = t.eval(i, &p).unwrap().gradient;
            for sgn in [-1.0, 1.0] {
                let z = c.u[i] + sgn * eps;
                let inside = c.eval_piece(&calib_core::Piece::G { i }, z);
                let flux_in = inside.1 - inside.0.dot(&gu);
                let outside = f.omega_j(i, &p);
                assert!((flux_in - outside).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn jump_integral_examples() {
    let f = build(&constants());
    let pr = *f.params();
    let o = Vec2::zeros();
    let c = f.column(&o).unwrap();
    let g0 = 1.0 - SQRT3 * pr.epsilon;
    let i = c.integral(pr.epsilon, 2.0 - pr.epsilon);
    assert!((i - Vec2::new(0.0, g0)).norm() < 1e-13);
    for s1 in [0.96, 0.98, 1.0, 1.03] {
        let i = c.integral(s1, 1.0);
        let expected = Vec2::new(-(s1 - 1.0f64).powi(2) / pr.epsilon, 0.0);
        assert!((i - expected).norm() < 1e-14);
    }
    assert_eq!(c.integral(0.7, 0.7), Vec2::zeros());
    let a = c.integral(0.2, 0.9) + c.integral(0.9, 1.7);
    assert!((a - c.integral(0.2, 1.7)).norm() < 1e-13);
    assert!((c.integral(1.7, 0.2) + c.integral(0.2, 1.7)).norm() < 1e-15);
}

#[test]
fn full_jumps_are_unit_normals() {
    for t in [constants(), one_mode(Symmetry::Symmetric), one_mode(Symmetry::Antisymmetric)] {
        let f = build(&t);
        let g = *t.geometry();
        let r = f.params().u_radius;
        for k in 1..=8 {
            let s = r * k as f64 / 8.0;
            for (ray, (a, b), nu) in [
                (g.tau(1), (0, 1), g.nu(1)),
                (g.tau(2), (1, 2), g.nu(2)),
                (g.ex, (0, 2), g.ey),
            ] {
                let p = s * ray;
                let i = f.jump_integral(&p, t.value(a, &p), t.value(b, &p)).unwrap();
                assert!((i - nu).norm() < 1e-9, "{:?} at s={s}: {:?}", nu, i - nu);
            }
        }
    }
}
