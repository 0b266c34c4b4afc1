use calib_core::verify::{check_m_functions, m_value, smallest_admissible_delta, MFunction};
use calib_core::{select_params, CalibrationField, Mode, ParamOverrides, SectorHarmonicTriple, Symmetry, Vec2};

fn build(t: &SectorHarmonicTriple) -> CalibrationField {
    let p = select_params(t, &ParamOverrides::default()).unwrap();
    CalibrationField::new(t, &p).unwrap()
}

#[test]
fn m_functions_below_one_at_default_delta() {
    for t in [
        SectorHarmonicTriple::constants([0.0, 1.0, 2.0]),
        SectorHarmonicTriple::new(Symmetry::Symmetric, vec![Mode::new(1, 0.5)], [0.0, 1.0, 2.0]).unwrap(),
    ] {
        let f = build(&t);
        let delta = 0.5 * f.params().epsilon;
        let rep = check_m_functions(&f, delta, 16).unwrap();
        for v in &rep.at_origin {
            println!("{:?}(0,0) = {:.9} at t = {:?}", v.function, v.value, v.t);
            assert!(v.value < 1.0);
        }
        assert!(rep.pass, "{rep:?}");
    }
}

#[test]
fn feasible_set_respects_windows() {
    let f = build(&SectorHarmonicTriple::constants([0.0, 1.0, 2.0]));
    let delta = 0.5 * f.params().epsilon;
    let d = delta - 1e-12;
    for m in MFunction::ALL {
        let v = m_value(&f, m, &Vec2::zeros(), delta, 200).unwrap();
        match m {
            MFunction::M1 => assert!(v.t[0].abs() >= d && (v.t[0] - 1.0).abs() >= d),
            MFunction::M2 => assert!((v.t[1] - 1.0).abs() >= d && (v.t[1] - 2.0).abs() >= d),
            MFunction::M3 => assert!(v.t[0].abs() >= d && (v.t[1] - 2.0).abs() >= d),
        }
        assert!(v.t[0] <= v.t[1]);
    }
}

#[test]
fn m_at_origin_matches_brute_force_grid() {
    let f = build(&SectorHarmonicTriple::constants([0.0, 1.0, 2.0]));
    let eps = f.params().epsilon;
    let delta = 0.5 * eps;
    let v = m_value(&f, MFunction::M1, &Vec2::zeros(), delta, 400).unwrap();
    let c = f.column(&Vec2::zeros()).unwrap();
    let n = 3000;
    let (lo, hi) = (-eps, 2.0 + eps);
    let ts: Vec<f64> = (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect();
    let mut best: f64 = 0.0;
    for &t1 in ts.iter().filter(|t| t.abs() >= delta && (*t - 1.0).abs() >= delta) {
        for &t2 in ts.iter().filter(|&&t2| t2 >= t1).step_by(7) {
            best = best.max(c.integral(t1, t2).norm());
        }
    }
    assert!(v.value >= best - 1e-12, "{} < {best}", v.value);
    assert!(v.value - best < 1e-3);
}

#[test]
fn tiny_delta_fails_on_perimeter() {
    let t = SectorHarmonicTriple::new(Symmetry::Symmetric, vec![Mode::new(1, 0.5)], [0.0, 1.0, 2.0]).unwrap();
    let f = build(&t);
    let d = smallest_admissible_delta(&f, 4, 0.1).unwrap().unwrap();
    println!("smallest admissible delta {d:.3e}");
    assert!(d < 0.5 * f.params().epsilon);
}
