//! Parameter selection and post-construction validation of the band layout.

use serde::Serialize;

use crate::error::{CalibError, Result};
use crate::field::CalibrationField;
use crate::geometry::Vec2;
use crate::harmonic::SectorHarmonicTriple;
use crate::params::{fpp_bound, CalibrationParams, ParamOverrides};

pub const DEFAULT_U_RADIUS: f64 = 0.02;
pub const MIN_U_RADIUS: f64 = 1e-4;
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;
/// Field-line steps per unit of `u_radius`.
pub const STEPS_PER_RADIUS: f64 = 64.0;

/// Extremes of the `p`-dependent quantities over a probe set of `U`.
#[derive(Debug, Clone, Serialize)]
pub struct InvariantReport {
    pub probes: usize,
    pub max_alpha: f64,
    pub min_beta: f64,
    pub min_band_gap: f64,
    pub min_omega: f64,
    pub min_g: f64,
    pub max_h_on_rays: f64,
    pub sup_sigma_phi: f64,
    pub fpp_bound: f64,
}

/// Probe points: the origin, concentric circles, and the three rays.
pub fn probe_points(radius: f64, rings: usize, per_ring: usize) -> Vec<Vec2> {
    let mut pts = vec![Vec2::zeros()];
    for k in 1..=rings {
        let r = radius * k as f64 / rings as f64;
        for j in 0..per_ring {
            let t = std::f64::consts::TAU * (j as f64 + 0.5) / per_ring as f64;
            pts.push(r * Vec2::new(t.cos(), t.sin()));
        }
    }
    let g = crate::geometry::SectorGeometry::new();
    for s in crate::geometry::Interface::ALL {
        for k in 1..=rings {
            pts.push(g.ray(s) * (radius * k as f64 / rings as f64));
        }
    }
    pts
}

/// Second `y`-derivatives of `u_0`, `u_2` at the origin.
fn origin_uyy(triple: &SectorHarmonicTriple) -> (f64, f64) {
    let o = Vec2::zeros();
    (triple.jet(0, &o).hessian[(1, 1)], triple.jet(2, &o).hessian[(1, 1)])
}

impl CalibrationField {
    /// Scans the probe set and checks every inequality of the band layout.
    pub fn validate_invariants(&self, rings: usize, per_ring: usize) -> Result<InvariantReport> {
        let pr = *self.params();
        let fail = |m: String| Err(CalibError::InfeasibleParams(m));
        let (uyy0, uyy2) = origin_uyy(self.triple());
        let bound = fpp_bound(pr.epsilon, uyy0, uyy2);
        if !(pr.fpp < bound) {
            return fail(format!("f''(0) = {} must be below {bound}", pr.fpp));
        }
        let mut rep = InvariantReport {
            probes: 0,
            max_alpha: f64::NEG_INFINITY,
            min_beta: f64::INFINITY,
            min_band_gap: f64::INFINITY,
            min_omega: f64::INFINITY,
            min_g: f64::INFINITY,
            max_h_on_rays: f64::NEG_INFINITY,
            sup_sigma_phi: 0.0,
            fpp_bound: bound,
        };
        let ing = self.ingredients();
        for p in probe_points(pr.u_radius, rings, per_ring) {
            let c = self.column(&p)?;
            rep.probes += 1;
            for (k, a) in c.aux.iter().enumerate() {
                rep.max_alpha = rep.max_alpha.max(a.alpha);
                rep.min_beta = rep.min_beta.min(a.beta);
                let phi = ing.phi(k + 1, &p);
                rep.sup_sigma_phi = rep.sup_sigma_phi.max((a.sigma * phi).norm());
            }
            let b: Vec<f64> = c.breakpoints().collect();
            for w in b.windows(2) {
                rep.min_band_gap = rep.min_band_gap.min(w[1] - w[0]);
            }
            for o in c.omega {
                rep.min_omega = rep.min_omega.min(o);
            }
            let g = ing.geometry();
            for i in 1..=2 {
                rep.min_g = rep.min_g.min(ing.g(g.tau(i).dot(&p)));
            }
        }
        let g = ing.geometry();
        for i in 1..=2 {
            for k in 0..=8 {
                let s = pr.u_radius * k as f64 / 8.0;
                let h = self.characteristics().h(i, &(s * g.tau(i)))?;
                rep.max_h_on_rays = rep.max_h_on_rays.max(h);
            }
        }
        if !(rep.max_alpha < 0.5 * pr.lambda) {
            return fail(format!("max alpha = {} is not below lambda/2", rep.max_alpha));
        }
        if !(rep.min_beta > -0.5 * pr.lambda) {
            return fail(format!("min beta = {} is not above -lambda/2", rep.min_beta));
        }
        if !(rep.min_omega > 0.0) {
            return fail(format!("omega reaches {} on U", rep.min_omega));
        }
        if !(rep.min_g > 0.0) {
            return fail(format!("g reaches {} on U", rep.min_g));
        }
        if rep.max_h_on_rays > 0.0 {
            return fail(format!("h_i(s tau_i) = {} > 0", rep.max_h_on_rays));
        }
        if !(4.0 * pr.mu > (rep.sup_sigma_phi / pr.lambda).powi(2)) {
            return fail("mu too small for the K bands".into());
        }
        Ok(rep)
    }
}

/// Fills unspecified parameters and shrinks `U` until the band layout is valid.
pub fn select_params(triple: &SectorHarmonicTriple, ov: &ParamOverrides) -> Result<CalibrationParams> {
    let a = triple.constants_array();
    let min_gap = (a[1] - a[0]).min(a[2] - a[1]);
    if !(min_gap > 0.0) {
        return Err(CalibError::InvalidTriple("constants must be strictly increasing".into()));
    }
    let epsilon = ov.epsilon.unwrap_or((0.2 * min_gap).min(0.05));
    let lambda = ov.lambda.unwrap_or((0.2 * min_gap).min(0.1));
    let (uyy0, uyy2) = origin_uyy(triple);
    let fpp = ov.fpp.unwrap_or(1.1 * fpp_bound(epsilon, uyy0, uyy2));
    let l1 = ov.l1.unwrap_or(0.5 * (a[0] + a[1]));
    let l2 = ov.l2.unwrap_or(0.5 * (a[1] + a[2]));
    let mut radius = ov.u_radius.unwrap_or(DEFAULT_U_RADIUS);
    let mu_floor = 1.0 / (4.0 * lambda * lambda);
    let mut last_err;
    loop {
        let base = CalibrationParams {
            epsilon,
            lambda,
            mu: ov.mu.unwrap_or(1.5 * mu_floor),
            l1,
            l2,
            fpp,
            u_radius: radius,
            ode_step: ov.ode_step.unwrap_or(radius / STEPS_PER_RADIUS),
            quad_tol: ov.quad_tol.unwrap_or(DEFAULT_QUAD_TOL),
        };
        base.validate_scalars()?;
        let attempt = (|| {
            let mut params = base;
            if ov.mu.is_none() {
                let sup = sup_sigma_phi(triple, &base)?;
                params.mu = 1.5 * mu_floor.max(sup * sup * mu_floor);
            }
            let field = CalibrationField::new(triple, &params)?;
            field.validate_invariants(4, 24)?;
            Ok(params)
        })();
        match attempt {
            Ok(p) => {
                log::info!("selected u_radius = {radius}");
                return Ok(p);
            }
            Err(e @ (CalibError::InfeasibleParams(_) | CalibError::NoCrossing { .. })) => {
                log::debug!("u_radius = {radius} rejected: {e}");
                last_err = e;
            }
            Err(e) => return Err(e),
        }
        if ov.u_radius.is_some() {
            return Err(last_err);
        }
        radius *= 0.5;
        if radius < MIN_U_RADIUS {
            return Err(CalibError::InfeasibleParams(format!(
                "no u_radius >= {MIN_U_RADIUS} satisfies the band layout; last failure: {last_err}"
            )));
        }
    }
}

/// `sup |σ_i φ_i|` over the probe set; `σ_i` and `φ_i` do not depend on `μ`.
fn sup_sigma_phi(triple: &SectorHarmonicTriple, params: &CalibrationParams) -> Result<f64> {
    let chars = crate::characteristics::CharacteristicSolution::new(triple, params);
    let mut sup: f64 = 0.0;
    for p in probe_points(params.u_radius, 4, 24) {
        for i in 1..=2 {
            let s = chars.sigma(i, &p)?;
            sup = sup.max((s * chars.phi(i, &p)).norm());
        }
    }
    Ok(sup)
}
