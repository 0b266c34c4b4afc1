//! Derivatives of `ρ = |I|` at the critical points on the jump set, compared
//! with their closed forms.
//!
//! First derivatives on a side of the gluing curves `{h_i = 0}` use one-sided
//! Richardson stencils along directions inside that side, evaluated on the
//! field itself. Second derivatives use central stencils on the smooth
//! continuation of the relevant branch ([`Branch::Ray`] / [`Branch::Axis`]),
//! which is the trace of the Hessian from that side.

use nalgebra::{Matrix2, Matrix3, Vector2};

use super::report::OracleResult;
use crate::characteristics::Branch;
use crate::error::{CalibError, Result};
use crate::field::{CalibrationField, Column};
use crate::geometry::{Vec2, SQRT3};

/// A point `(x, y, t_1, t_2)` of the domain of `ρ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Q {
    pub p: Vec2,
    pub t1: f64,
    pub t2: f64,
}

impl Q {
    fn shifted(&self, dp: Vec2, dt1: f64, dt2: f64) -> Q {
        Q { p: self.p + dp, t1: self.t1 + dt1, t2: self.t2 + dt2 }
    }
}

/// Evaluates `I` and `ρ` with prescribed branches of the characteristics.
pub struct RhoProbe<'a> {
    field: &'a CalibrationField,
    branches: [Branch; 2],
}

impl<'a> RhoProbe<'a> {
    pub fn new(field: &'a CalibrationField, branches: [Branch; 2]) -> Self {
        Self { field, branches }
    }

    pub fn column(&self, p: &Vec2) -> Result<Column> {
        Column::with_branches(self.field, p, self.branches)
    }

    pub fn integral(&self, q: &Q) -> Result<Vec2> {
        Ok(self.column(&q.p)?.integral(q.t1, q.t2))
    }

    pub fn rho(&self, q: &Q) -> Result<f64> {
        Ok(self.integral(q)?.norm())
    }

    /// `q_i(s) = (sτ_i, u_{i−1}(sτ_i), u_i(sτ_i))`.
    pub fn q_ray(&self, i: usize, s: f64) -> Q {
        let p = s * self.field.triple().geometry().tau(i);
        let t = self.field.triple();
        Q { p, t1: t.value(i - 1, &p), t2: t.value(i, &p) }
    }

    /// `q_0(x) = (x, 0, u_0(x, 0), u_2(x, 0))`.
    pub fn q_axis(&self, x: f64) -> Q {
        let p = Vec2::new(x, 0.0);
        let t = self.field.triple();
        Q { p, t1: t.value(0, &p), t2: t.value(2, &p) }
    }
}

fn d1_central(f: impl Fn(f64) -> Result<f64>, h: f64) -> Result<f64> {
    let d = |h: f64| -> Result<f64> { Ok((f(h)? - f(-h)?) / (2.0 * h)) };
    Ok((4.0 * d(0.5 * h)? - d(h)?) / 3.0)
}

fn d2_central(f: impl Fn(f64) -> Result<f64>, h: f64) -> Result<f64> {
    let f0 = f(0.0)?;
    let s = |h: f64| -> Result<f64> { Ok((f(h)? - 2.0 * f0 + f(-h)?) / (h * h)) };
    Ok((4.0 * s(0.5 * h)? - s(h)?) / 3.0)
}

fn d1_forward(f: impl Fn(f64) -> Result<f64>, h: f64) -> Result<f64> {
    let f0 = f(0.0)?;
    let d = |h: f64| -> Result<f64> { Ok((-3.0 * f0 + 4.0 * f(h)? - f(2.0 * h)?) / (2.0 * h)) };
    Ok((4.0 * d(0.5 * h)? - d(h)?) / 3.0)
}

fn d2_mixed(f: impl Fn(f64, f64) -> Result<f64>, h: f64, k: f64) -> Result<f64> {
    let m = |h: f64, k: f64| -> Result<f64> {
        Ok((f(h, k)? - f(h, -k)? - f(-h, k)? + f(-h, -k)?) / (4.0 * h * k))
    };
    Ok((4.0 * m(0.5 * h, 0.5 * k)? - m(h, k)?) / 3.0)
}

fn unit(angle: f64) -> Vec2 {
    Vec2::new(angle.cos(), angle.sin())
}

/// Steps used by the stencils.
#[derive(Debug, Clone, Copy)]
pub struct Steps {
    pub hp: f64,
    pub ht: f64,
}

impl Steps {
    pub fn for_field(field: &CalibrationField) -> Self {
        let pr = field.params();
        Self { hp: pr.u_radius / 40.0, ht: pr.epsilon / 50.0 }
    }
}

/// Planar gradient of `ρ` from one-sided derivatives along `angles`,
/// plus central `t`-derivatives.
pub fn gradient_one_sided(probe: &RhoProbe, q: &Q, angles: [f64; 2], st: Steps) -> Result<[f64; 4]> {
    let d = [unit(angles[0]), unit(angles[1])];
    let mut rhs = Vector2::zeros();
    for k in 0..2 {
        rhs[k] = d1_forward(|t| probe.rho(&q.shifted(t * d[k], 0.0, 0.0)), st.hp)?;
    }
    let m = Matrix2::new(d[0].x, d[0].y, d[1].x, d[1].y);
    let g = m
        .try_inverse()
        .ok_or_else(|| CalibError::OracleMismatch("degenerate stencil directions".into()))?
        * rhs;
    let gt1 = d1_central(|t| probe.rho(&q.shifted(Vec2::zeros(), t, 0.0)), st.ht)?;
    let gt2 = d1_central(|t| probe.rho(&q.shifted(Vec2::zeros(), 0.0, t)), st.ht)?;
    Ok([g[0], g[1], gt1, gt2])
}

/// Full gradient by central stencils at an interior point of a side.
pub fn gradient_central(probe: &RhoProbe, q: &Q, st: Steps) -> Result<[f64; 4]> {
    let gx = d1_central(|t| probe.rho(&q.shifted(Vec2::new(t, 0.0), 0.0, 0.0)), st.hp)?;
    let gy = d1_central(|t| probe.rho(&q.shifted(Vec2::new(0.0, t), 0.0, 0.0)), st.hp)?;
    let gt1 = d1_central(|t| probe.rho(&q.shifted(Vec2::zeros(), t, 0.0)), st.ht)?;
    let gt2 = d1_central(|t| probe.rho(&q.shifted(Vec2::zeros(), 0.0, t)), st.ht)?;
    Ok([gx, gy, gt1, gt2])
}

/// Hessian of `ρ` in the variables `(s, t_1, t_2)` where `p = q.p + s·dir`.
pub fn hessian3(probe: &RhoProbe, q: &Q, dir: Vec2, st: Steps) -> Result<Matrix3<f64>> {
    let steps = [st.hp, st.ht, st.ht];
    let at = |v: [f64; 3]| probe.rho(&q.shifted(v[0] * dir, v[1], v[2]));
    let mut h = Matrix3::zeros();
    for a in 0..3 {
        h[(a, a)] = d2_central(
            |t| {
                let mut v = [0.0; 3];
                v[a] = t;
                at(v)
            },
            steps[a],
        )?;
        for b in a + 1..3 {
            let m = d2_mixed(
                |s, t| {
                    let mut v = [0.0; 3];
                    v[a] = s;
                    v[b] = t;
                    at(v)
                },
                steps[a],
                steps[b],
            )?;
            h[(a, b)] = m;
            h[(b, a)] = m;
        }
    }
    Ok(h)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn vector_oracles(name: &str, g: [f64; 4], expected: Vec2, rel: f64, out: &mut Vec<OracleResult>) {
    let gxy = Vec2::new(g[0], g[1]);
    out.push(OracleResult::relative(format!("{name} |grad_xy|"), gxy.norm(), expected.norm(), rel));
    out.push(OracleResult::absolute(
        format!("{name} direction error"),
        (gxy - expected).norm() / expected.norm(),
        0.0,
        rel,
    ));
    out.push(OracleResult::absolute(format!("{name} |grad_t|"), max_abs(&g[2..]), 0.0, 1e-3));
}

/// All closed-form identities at `q_i(s)` and `q_0(x)`.
pub fn rho_oracles(field: &CalibrationField) -> Result<Vec<OracleResult>> {
    let pr = *field.params();
    let eps = pr.epsilon;
    let r = pr.u_radius;
    let st = Steps::for_field(field);
    let g = *field.triple().geometry();
    let ing = field.ingredients();
    let auto = RhoProbe::new(field, [Branch::Auto; 2]);
    let ray = RhoProbe::new(field, [Branch::Ray; 2]);
    let axis = RhoProbe::new(field, [Branch::Axis; 2]);
    let rel = 0.02;
    let mut out = Vec::new();
    let pi = std::f64::consts::PI;
    let angle = |v: Vec2| v.y.atan2(v.x);

    for i in 1..=2 {
        let tau = g.tau(i);
        let nu = g.nu(i);
        let ta = angle(tau);

        // Vanishing gradient along the ray, from the side where h_i < 0.
        for (k, s) in [0.0, 0.25 * r, 0.5 * r].into_iter().enumerate() {
            let q = auto.q_ray(i, s);
            let grad = if k == 0 {
                gradient_one_sided(&auto, &q, [ta + pi / 4.0, ta - pi / 4.0], st)?
            } else {
                gradient_central(&auto, &q, Steps { hp: st.hp.min(0.1 * s), ..st })?
            };
            out.push(OracleResult::absolute(
                format!("N{i}: |grad rho(q{i}(s))|, s = {s:.3e}"),
                max_abs(&grad),
                0.0,
                1e-3,
            ));
        }

        let q = ray.q_ray(i, 0.0);
        let hess = hessian3(&ray, &q, nu, st)?;
        let uyy_prev = field.triple().jet(i - 1, &Vec2::zeros()).hessian;
        let uyy_cur = field.triple().jet(i, &Vec2::zeros()).hessian;
        let dnn_prev = nu.dot(&(uyy_prev * nu));
        let dnn_cur = nu.dot(&(uyy_cur * nu));
        out.push(OracleResult::relative(
            format!("N{i}: d2_nu rho(q{i}(0))"),
            hess[(0, 0)],
            0.75 - SQRT3 / (2.0 * eps),
            rel,
        ));
        out.push(OracleResult::relative(format!("N{i}: d2_t1 rho(q{i}(0))"), hess[(1, 1)], -SQRT3 / eps, rel));
        out.push(OracleResult::relative(format!("N{i}: d2_t2 rho(q{i}(0))"), hess[(2, 2)], -SQRT3 / eps, rel));
        out.push(OracleResult::absolute(format!("N{i}: d2_t1t2 rho(q{i}(0))"), hess[(1, 2)], 0.0, 1e-3));
        out.push(OracleResult::absolute(
            format!("N{i}: d2_nu_t1 rho(q{i}(0))"),
            hess[(0, 1)],
            -2.0 * dnn_prev,
            1e-3 + rel * (2.0 * dnn_prev).abs(),
        ));
        out.push(OracleResult::absolute(
            format!("N{i}: d2_nu_t2 rho(q{i}(0))"),
            hess[(0, 2)],
            2.0 * dnn_cur,
            1e-3 + rel * (2.0 * dnn_cur).abs(),
        ));
        let det2 = hess.fixed_view::<2, 2>(0, 0).determinant();
        let det3 = hess.determinant();
        let det2_cf = 1.5 / (eps * eps) * (1.0 - 0.5 * SQRT3 * eps) - 4.0 * dnn_prev * dnn_prev;
        let det3_cf = -1.5 * SQRT3 / eps.powi(3) * (1.0 - 0.5 * SQRT3 * eps)
            + 4.0 * SQRT3 / eps * (dnn_prev * dnn_prev + dnn_cur * dnn_cur);
        out.push(OracleResult::sign(format!("N{i}: det2 Hessian(nu,t1) at q{i}(0) > 0"), det2, 1.0));
        out.push(OracleResult::sign(format!("N{i}: det3 Hessian(nu,t1,t2) at q{i}(0) < 0"), det3, -1.0));
        out.push(OracleResult::relative(format!("N{i}: det2 closed form"), det2, det2_cf, rel));
        out.push(OracleResult::relative(format!("N{i}: det3 closed form"), det3, det3_cf, rel));

        // Gradient from the side where h_i > 0.
        let q = auto.q_ray(i, 0.0);
        let grad = gradient_one_sided(&auto, &q, [ta + pi + pi / 4.0, ta + pi - pi / 4.0], st)?;
        vector_oracles(&format!("P{i}: grad rho(q{i}(0))"), grad, 1.5 * SQRT3 * tau, rel, &mut out);

        // Transport and sigma identities behind the Hessian values.
        let chars = field.characteristics();
        let xi = |t: f64| -> Result<f64> {
            let a = chars.aux_branch(i, &(t * nu), Branch::Ray)?;
            Ok(a.beta - a.alpha)
        };
        let d2xi = d2_central(xi, st.hp)?;
        out.push(OracleResult::relative(
            format!("N{i}: (1/lambda) phi^nu d2_nu (beta-alpha) at 0"),
            ing.g(0.0) * d2xi / pr.lambda,
            -2.0 * SQRT3 / eps,
            rel,
        ));
        let sig = |p: Vec2| -> Result<f64> { Ok(chars.aux_branch(i, &p, Branch::Axis)?.sigma) };
        let gs = Vec2::new(
            d1_central(|t| sig(Vec2::new(t, 0.0)), st.hp)?,
            d1_central(|t| sig(Vec2::new(0.0, t)), st.hp)?,
        );
        let gs_cf = -3.0 * ing.g_prime(0.0) / ing.g(0.0) * tau;
        out.push(OracleResult::absolute(
            format!("P{i}: grad sigma at 0, relative error"),
            (gs - gs_cf).norm() / gs_cf.norm(),
            0.0,
            rel,
        ));
        let slope = d1_central(|x| chars.psi(i, x, 0.0), st.hp)?;
        let sign = if i == 1 { -1.0 } else { 1.0 };
        out.push(OracleResult::relative(format!("slope d_x psi{i}(0,0)"), slope, sign / SQRT3, rel));
    }

    // Triple point, side h_1 > 0 and h_2 > 0.
    for (k, x) in [0.0, 0.25 * r, 0.5 * r].into_iter().enumerate() {
        let q = auto.q_axis(x);
        let grad = if k == 0 {
            gradient_one_sided(&auto, &q, [pi / 12.0, -pi / 12.0], st)?
        } else {
            gradient_central(&auto, &q, Steps { hp: st.hp.min(0.1 * x), ..st })?
        };
        out.push(OracleResult::absolute(
            format!("P1P2: |grad rho(q0(x))|, x = {x:.3e}"),
            max_abs(&grad),
            0.0,
            1e-3,
        ));
    }
    let q0 = axis.q_axis(0.0);
    let dy_ix = d1_central(|t| Ok(axis.integral(&q0.shifted(Vec2::new(0.0, t), 0.0, 0.0))?.x), st.hp)?;
    out.push(OracleResult::relative("P1P2: d_y I^x(q0(0))", dy_ix, 2.0 * SQRT3, rel));
    let hess0 = hessian3(&axis, &q0, Vec2::new(0.0, 1.0), st)?;
    out.push(OracleResult::relative(
        "P1P2: d2_y rho(q0(0))",
        hess0[(0, 0)],
        12.0 + 4.0 * SQRT3 / eps + 2.0 * SQRT3 * pr.fpp,
        rel,
    ));
    let u0yy = field.triple().jet(0, &Vec2::zeros()).hessian[(1, 1)];
    let u2yy = field.triple().jet(2, &Vec2::zeros()).hessian[(1, 1)];
    let det2_cf = -6.0 / eps * pr.fpp - 12.0 * SQRT3 / eps - 12.0 / (eps * eps) - 4.0 * u0yy * u0yy;
    let det3_cf = 6.0 * SQRT3 / (eps * eps) * pr.fpp
        + 36.0 / (eps * eps)
        + 12.0 * SQRT3 / eps.powi(3)
        + 4.0 * SQRT3 / eps * (u0yy * u0yy + u2yy * u2yy);
    let det2 = hess0.fixed_view::<2, 2>(0, 0).determinant();
    let det3 = hess0.determinant();
    out.push(OracleResult::sign("P1P2: det2 Hessian(y,t1) at q0(0) > 0", det2, 1.0));
    out.push(OracleResult::sign("P1P2: det3 Hessian(y,t1,t2) at q0(0) < 0", det3, -1.0));
    out.push(OracleResult::relative("P1P2: det2 closed form", det2, det2_cf, rel));
    out.push(OracleResult::relative("P1P2: det3 closed form", det3, det3_cf, rel));

    // Triple point from the sides h_1, h_2 < 0 and h_1 > 0 > h_2.
    let q = auto.q_axis(0.0);
    let grad = gradient_one_sided(&auto, &q, [pi - pi / 12.0, pi + pi / 12.0], st)?;
    vector_oracles("N1N2: grad rho(q0(0))", grad, 0.75 * SQRT3 * g.ex, rel, &mut out);
    let grad = gradient_one_sided(&auto, &q, [pi / 2.0 - pi / 12.0, pi / 2.0 + pi / 12.0], st)?;
    vector_oracles("N2P1: grad rho(q0(0))", grad, -0.75 * SQRT3 * g.tau(2), rel, &mut out);

    Ok(out)
}
