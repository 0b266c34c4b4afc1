//! Subcommand implementations. Each returns whether all checks passed.

use std::collections::BTreeMap;

use calib_core::energy::{minimality_experiment, ExperimentConfig};
use calib_core::verify::{
    brute_force_max, check_b, check_c, check_d_global, check_divergence, check_e, check_m_functions, rho_oracles,
    smallest_admissible_delta, step3_containment, ConditionResult, DivergenceConfig, MarginKind, ScanConfig,
    Step3Geometry, VerificationReport, REPORT_SCHEMA_VERSION,
};
use calib_core::{select_params, CalibrationField, Interface, SectorHarmonicTriple, Vec2};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{RhoMode, RunConfig};
use crate::output::{num, Output};
use crate::CliError;

pub const ALL_CONDITIONS: [&str; 8] = ["a", "b", "c", "d", "e", "rho", "m", "step3"];

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn build(cfg: &RunConfig) -> Result<(SectorHarmonicTriple, CalibrationField), CliError> {
    let triple = cfg.triple.build()?;
    let params = select_params(&triple, &cfg.params)?;
    let field = CalibrationField::new(&triple, &params)?;
    Ok((triple, field))
}

pub fn check(cfg: &RunConfig, out: &Output) -> Result<bool, CliError> {
    let triple = cfg.triple.build()?;
    let rep = triple.check_hypotheses(cfg.tolerances.hypotheses, cfg.samples.hypotheses);
    println!(
        "hypotheses: neumann {:.3e}, gradient modulus {:.3e}, origin gradient {:.3e}, ordering {}: {}",
        rep.neumann_residual,
        rep.gradient_modulus_residual,
        rep.origin_gradient,
        if rep.ordering_ok { "ok" } else { "violated" },
        if rep.pass { "PASS" } else { "FAIL" }
    );
    out.json(
        "report.json",
        &json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "command": "check",
            "config": to_value(cfg),
            "hypotheses": to_value(&rep),
            "pass": rep.pass,
        }),
    )?;
    Ok(rep.pass)
}

fn strict(pass: bool, margin: f64, kind: MarginKind, tolerance: f64, witness: Vec<f64>, samples: usize) -> ConditionResult {
    ConditionResult { pass, margin, kind, tolerance, witness, samples, details: BTreeMap::new() }
}

fn run_condition(
    name: &str,
    cfg: &RunConfig,
    field: &CalibrationField,
    report: &mut VerificationReport,
) -> Result<(), CliError> {
    let seed = cfg.seed;
    match name {
        "a" => {
            let dc = DivergenceConfig {
                n_random: cfg.samples.divergence_random,
                per_surface: cfg.samples.divergence_per_surface,
                tol: cfg.tolerances.divergence,
                seed: seed.wrapping_add(1),
                ..DivergenceConfig::default()
            };
            report.conditions.insert("a".into(), check_divergence(field, &dc)?);
        }
        "b" => {
            let mut r = check_b(field, cfg.samples.b, seed.wrapping_add(2))?;
            r.pass = r.margin >= -cfg.tolerances.b;
            r.tolerance = cfg.tolerances.b;
            report.conditions.insert("b".into(), r);
        }
        "c" => {
            let mut r = check_c(field, cfg.samples.c, seed.wrapping_add(3))?;
            r.pass = r.margin <= cfg.tolerances.c;
            r.tolerance = cfg.tolerances.c;
            report.conditions.insert("c".into(), r);
        }
        "d" => {
            let sc = ScanConfig {
                grid: cfg.scan.grid,
                refine_iters: cfg.scan.refine,
                top: cfg.scan.top,
                tol: cfg.tolerances.d,
                ..ScanConfig::default()
            };
            let scan = check_d_global(field, &sc)?;
            let mut r = scan.to_condition();
            r.pass = scan.pass && scan.on_jump;
            if let Some(n) = cfg.scan.brute_force {
                let (bf, at) = brute_force_max(field, n)?;
                let agree = (bf - scan.max_rho).abs() <= 1e-6;
                r = r.with_detail("brute_force_max", bf).with_detail("brute_force_grid", n as f64);
                r.pass &= agree && bf <= 1.0 + cfg.tolerances.d;
                report.extra.insert("d_brute_force_argmax".into(), to_value(&at));
            }
            report.extra.insert("d_scan".into(), to_value(&scan));
            report.conditions.insert("d".into(), r);
        }
        "e" => {
            report.conditions.insert("e".into(), check_e(field, cfg.samples.e_per_ray, cfg.tolerances.e)?);
        }
        "rho" => report.oracles.extend(rho_oracles(field)?),
        "m" => {
            let delta = cfg.step3.delta.unwrap_or(0.5 * field.params().epsilon);
            let m = check_m_functions(field, delta, cfg.samples.m_perimeter)?;
            let worst = m.worst.iter().max_by(|a, b| a.value.total_cmp(&b.value)).expect("three functions");
            let mut r = strict(
                m.pass,
                1.0 - worst.value,
                MarginKind::LowerBound,
                m.tolerance,
                vec![worst.p[0], worst.p[1], worst.t[0], worst.t[1]],
                3 * (m.perimeter_points + 1),
            )
            .with_detail("delta", delta);
            for v in &m.at_origin {
                r = r.with_detail(&format!("{:?}_origin", v.function), v.value);
            }
            if cfg.samples.delta_bisection {
                let d = smallest_admissible_delta(field, cfg.samples.m_perimeter, 0.05)?;
                report.extra.insert("smallest_admissible_delta".into(), to_value(&d));
            }
            report.extra.insert("m_functions".into(), to_value(&m));
            report.conditions.insert("m".into(), r);
        }
        "step3" => {
            let eps = field.params().epsilon;
            let delta = cfg.step3.delta.unwrap_or(0.5 * eps);
            let rep = step3_containment(&Step3Geometry::new(eps, delta)?);
            let worst = rep.checks.iter().min_by(|a, b| a.slack.total_cmp(&b.slack)).expect("checks");
            let r = strict(rep.pass, rep.min_slack, MarginKind::LowerBound, 0.0, worst.witness.to_vec(), rep.checks.len())
                .with_detail("delta", delta);
            report.extra.insert("step3".into(), to_value(&rep));
            report.conditions.insert("step3".into(), r);
        }
        other => return Err(CliError::Config(format!("unknown condition '{other}'"))),
    }
    Ok(())
}

pub fn verify(cfg: &RunConfig, conditions: Option<&[String]>, out: &Output) -> Result<bool, CliError> {
    let selected: Vec<String> = match conditions {
        Some(list) => list.iter().map(|s| s.trim().to_lowercase()).filter(|s| !s.is_empty()).collect(),
        None => ALL_CONDITIONS.iter().map(|s| s.to_string()).collect(),
    };
    if let Some(bad) = selected.iter().find(|s| !ALL_CONDITIONS.contains(&s.as_str())) {
        return Err(CliError::Config(format!("unknown condition '{bad}' (expected a subset of {})", ALL_CONDITIONS.join(","))));
    }
    let (_, field) = build(cfg)?;
    let mut report = VerificationReport::new(field.params());
    report.extra.insert("config".into(), to_value(cfg));
    let invariants = field.validate_invariants(4, 32)?;
    report.extra.insert("invariants".into(), to_value(&invariants));

    let mut errors = BTreeMap::new();
    for name in &selected {
        let start = std::time::Instant::now();
        if let Err(e) = run_condition(name, cfg, &field, &mut report) {
            if matches!(e, CliError::Config(_)) {
                return Err(e);
            }
            errors.insert(name.clone(), e.to_string());
        }
        log::info!("condition {name} done in {:.2?}", start.elapsed());
    }
    let pass = report.pass() && errors.is_empty();
    if !errors.is_empty() {
        report.extra.insert("errors".into(), to_value(&errors));
    }
    report.extra.insert("pass".into(), Value::Bool(pass));
    out.json("report.json", &report)?;

    let rows: Vec<Vec<String>> = report
        .conditions
        .iter()
        .map(|(k, c)| {
            let mut w = c.witness.iter().map(|x| num(*x)).collect::<Vec<_>>();
            w.resize(4, String::new());
            let mut row = vec![k.clone(), format!("{:?}", c.kind), num(c.margin), num(c.tolerance), c.pass.to_string()];
            row.extend(w);
            row
        })
        .collect();
    out.csv("witnesses.csv", &["condition", "kind", "margin", "tolerance", "pass", "w0", "w1", "w2", "w3"], &rows)?;
    if !report.oracles.is_empty() {
        let rows: Vec<Vec<String>> = report
            .oracles
            .iter()
            .map(|o| vec![o.name.clone(), num(o.computed), num(o.expected), num(o.tolerance), o.relative.to_string(), o.pass.to_string()])
            .collect();
        out.csv("oracles.csv", &["name", "computed", "expected", "tolerance", "relative", "pass"], &rows)?;
    }
    for (k, c) in &report.conditions {
        println!("{k:>6}: margin {:>12.4e} (tol {:.1e}) {}", c.margin, c.tolerance, if c.pass { "PASS" } else { "FAIL" });
    }
    if !report.oracles.is_empty() {
        let failed = report.oracles.iter().filter(|o| !o.pass).count();
        println!("   rho: {} oracles, {failed} failed", report.oracles.len());
    }
    for (k, e) in &errors {
        println!("{k:>6}: error: {e}");
    }
    Ok(pass)
}

pub fn rho(cfg: &RunConfig, out: &Output) -> Result<bool, CliError> {
    let (triple, field) = build(cfg)?;
    let r = field.params().u_radius;
    let n = cfg.rho.n.max(2);
    let tol = cfg.tolerances.d;
    let mut rows = Vec::new();
    let (header, pass, summary): (&[&str], bool, Value) = match cfg.rho.mode {
        RhoMode::AlongRay => {
            let g = triple.geometry();
            let mut worst: f64 = 0.0;
            for s in Interface::ALL {
                let (a, b) = s.sectors();
                let d = g.ray(s);
                for k in 0..n {
                    let dist = r * k as f64 / (n - 1) as f64;
                    for p in triple.trace_points(s, dist * d) {
                        let c = field.column(&p)?;
                        let (t1, t2) = (c.u[a], c.u[b]);
                        let rho = c.integral(t1, t2).norm();
                        worst = worst.max((rho - 1.0).abs());
                        rows.push(vec![format!("{s:?}"), num(dist), num(p.x), num(p.y), num(t1), num(t2), num(rho)]);
                    }
                }
            }
            (
                &["interface", "s", "x", "y", "t1", "t2", "rho"],
                worst <= tol,
                json!({ "max_abs_rho_minus_one": worst }),
            )
        }
        RhoMode::Slice => {
            let p = r * Vec2::new(cfg.rho.point[0], cfg.rho.point[1]);
            let c = field.column(&p)?;
            let a = triple.constants_array();
            let eps = field.params().epsilon;
            let (lo, hi) = (a[0] - 2.0 * eps, a[2] + 2.0 * eps);
            let ts: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
            let mut max: f64 = 0.0;
            for &t1 in &ts {
                for &t2 in &ts {
                    let rho = c.integral(t1, t2).norm();
                    max = max.max(rho);
                    rows.push(vec![num(p.x), num(p.y), num(t1), num(t2), num(rho)]);
                }
            }
            (&["x", "y", "t1", "t2", "rho"], max <= 1.0 + tol, json!({ "max_rho": max }))
        }
    };
    out.csv("rho.csv", header, &rows)?;
    out.json(
        "report.json",
        &json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "command": "rho",
            "config": to_value(cfg),
            "params": to_value(field.params()),
            "summary": summary,
            "pass": pass,
        }),
    )?;
    println!("rho ({:?}): {} samples, {summary}: {}", cfg.rho.mode, rows.len(), if pass { "PASS" } else { "FAIL" });
    Ok(pass)
}

pub fn energy(cfg: &RunConfig, out: &Output) -> Result<bool, CliError> {
    let (triple, field) = build(cfg)?;
    let radius = cfg.energy.radius.unwrap_or(field.params().u_radius);
    let ec = ExperimentConfig {
        per_kind: cfg.energy.per_kind,
        seed: cfg.seed,
        mesh_n: cfg.energy.mesh_n,
        slack_rel: cfg.energy.slack_rel,
        max_halvings: cfg.energy.max_halvings,
    };
    let rep = minimality_experiment(&triple, radius, &ec)?;
    let rows: Vec<Vec<String>> = rep
        .rows
        .iter()
        .map(|r| {
            vec![
                r.id.to_string(),
                r.kind.name().to_string(),
                r.params.clone(),
                num(r.dirichlet),
                num(r.length),
                num(r.total),
                num(r.gap),
            ]
        })
        .collect();
    out.csv("energy.csv", &["id", "kind", "params", "dirichlet", "length", "total", "gap"], &rows)?;
    let rows: Vec<Vec<String>> =
        rep.bubble.amplitudes.iter().zip(&rep.bubble.gaps).map(|(a, g)| vec![num(*a), num(*g)]).collect();
    out.csv("bubble.csv", &["amplitude", "gap"], &rows)?;
    let pass = rep.pass();
    out.json(
        "report.json",
        &json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "command": "energy",
            "config": to_value(cfg),
            "params": to_value(field.params()),
            "radius": radius,
            "energy_u": to_value(&rep.energy_u),
            "slack": rep.slack,
            "competitors": rep.rows.len(),
            "min_gap": rep.min_gap,
            "min_gap_id": rep.min_gap_id,
            "max_trace_residual": rep.max_trace_residual,
            "verdict": to_value(&rep.verdict),
            "crossover_radius": rep.crossover_radius,
            "bubble": to_value(&rep.bubble),
            "pass": pass,
        }),
    )?;
    println!(
        "energy: u = {:.6e}, {} competitors, min gap {:.3e} (slack {:.1e}), verdict {:?}, bubble exponent {:.4}",
        rep.energy_u.total,
        rep.rows.len(),
        rep.min_gap,
        rep.slack,
        rep.verdict,
        rep.bubble.exponent
    );
    Ok(pass)
}

pub fn step3(cfg: &RunConfig, out: &Output) -> Result<bool, CliError> {
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    let mut pass = true;
    for &eps in &cfg.step3.epsilons {
        for &frac in &cfg.step3.delta_fractions {
            let rep = step3_containment(&Step3Geometry::new(eps, frac * eps)?);
            pass &= rep.pass && rep.min_slack > 0.0;
            println!("step3: eps {eps}, delta {:.4}: min slack {:.4e} {}", frac * eps, rep.min_slack, if rep.pass { "PASS" } else { "FAIL" });
            runs.push((rep, false));
        }
    }
    for &eps in &cfg.step3.expected_failures {
        let rep = step3_containment(&Step3Geometry::with_default_delta(eps)?);
        let vertex_fails = rep.checks.iter().any(|c| c.set.contains("R2 + F") && !c.pass);
        pass &= vertex_fails;
        println!(
            "step3: eps {eps} (expected to fail): vertex check {}",
            if vertex_fails { "fails as expected" } else { "unexpectedly holds" }
        );
        runs.push((rep, true));
    }
    for (rep, expected_fail) in &runs {
        for c in &rep.checks {
            rows.push(vec![
                num(rep.epsilon),
                num(rep.delta),
                c.set.clone(),
                num(c.slack),
                c.pass.to_string(),
                expected_fail.to_string(),
            ]);
        }
    }
    out.csv("step3.csv", &["epsilon", "delta", "set", "slack", "pass", "expected_failure"], &rows)?;
    let reports: Vec<Value> = runs
        .iter()
        .map(|(r, f)| json!({ "report": to_value(r), "expected_failure": f }))
        .collect();
    out.json(
        "report.json",
        &json!({
            "schema_version": REPORT_SCHEMA_VERSION,
            "command": "step3",
            "config": to_value(cfg),
            "runs": reports,
            "pass": pass,
        }),
    )?;
    Ok(pass)
}
