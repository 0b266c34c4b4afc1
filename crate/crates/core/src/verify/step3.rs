//! Planar containments that bound `I` away from the critical values of `t`.
//!
//! All sets are convex polygons or a convex cap, so containment in the unit
//! ball reduces to vertex tests; the cap is handled by its boundary.

use serde::Serialize;

use crate::error::{CalibError, Result};
use crate::geometry::{SectorGeometry, Vec2, SQRT3};

#[derive(Debug, Clone)]
pub struct Step3Geometry {
    pub epsilon: f64,
    pub delta: f64,
    /// `g(0) = 1 − √3ε`.
    pub g0: f64,
    /// Vertices of `ν_2 − (δ²/ε)e^x + R_1`.
    pub shifted_r1: [Vec2; 4],
    /// Endpoints of `D = −T_2`.
    pub d: [Vec2; 2],
    /// Vertices of `e^y − (δ²/ε)τ_2 + R_2`.
    pub shifted_r2: [Vec2; 4],
    /// Vertices of `F = E − g(0)e^y`.
    pub f: [Vec2; 4],
}

fn parallelogram(base: Vec2, a: Vec2, b: Vec2) -> [Vec2; 4] {
    [base, base + a, base + a + b, base + b]
}

impl Step3Geometry {
    /// Requires `0 < δ < ε`; `ε ≥ √3` is accepted so that the failure of the
    /// vertex check can be observed.
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && delta > 0.0 && delta < epsilon) {
            return Err(CalibError::InfeasibleParams(format!(
                "need 0 < delta < epsilon, got delta = {delta}, epsilon = {epsilon}"
            )));
        }
        let g = SectorGeometry::new();
        let g0 = 1.0 - SQRT3 * epsilon;
        let k = delta * delta / epsilon;
        let side = epsilon - k;
        let (tau1, tau2, nu1, nu2) = (g.tau(1), g.tau(2), g.nu(1), g.nu(2));
        let shifted_r1 = parallelogram(nu2 - k * g.ex, epsilon * tau1, -side * g.ex);
        let shifted_r2 = parallelogram(g.ey - k * tau2, epsilon * tau1, -side * tau2);
        let f = parallelogram(-g0 * g.ey, g0 * nu1, g0 * nu2);
        Ok(Self { epsilon, delta, g0, shifted_r1, d: [Vec2::zeros(), -g0 * nu2], shifted_r2, f })
    }

    /// `δ = ε/2`.
    pub fn with_default_delta(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, 0.5 * epsilon)
    }

    /// Signed margin of `p` in the closed half-plane `ν_2·p ≥ 1 − √3ε`.
    pub fn half_plane_margin(&self, p: &Vec2) -> f64 {
        SectorGeometry::new().nu(2).dot(p) - (1.0 - SQRT3 * self.epsilon)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ContainmentCheck {
    pub set: String,
    pub pass: bool,
    /// Positive iff the containment is strict with room to spare.
    pub slack: f64,
    pub witness: [f64; 2],
}

#[derive(Debug, Clone, Serialize)]
pub struct Step3Report {
    pub epsilon: f64,
    pub delta: f64,
    pub checks: Vec<ContainmentCheck>,
    pub min_slack: f64,
    pub pass: bool,
}

impl Step3Report {
    /// The first failed containment as an error.
    pub fn ensure(&self) -> Result<()> {
        match self.checks.iter().find(|c| !c.pass) {
            None => Ok(()),
            Some(c) => Err(CalibError::GeometryViolated {
                set: c.set.clone(),
                wx: c.witness[0],
                wy: c.witness[1],
                slack: c.slack,
            }),
        }
    }
}

fn ball_check(set: &str, pts: impl IntoIterator<Item = Vec2>) -> ContainmentCheck {
    let mut worst = Vec2::zeros();
    let mut slack = f64::INFINITY;
    for p in pts {
        let s = 1.0 - p.norm();
        if s < slack {
            slack = s;
            worst = p;
        }
    }
    ContainmentCheck { set: set.into(), pass: slack > 0.0, slack, witness: [worst.x, worst.y] }
}

/// Boundary of the closed cap `{|p| ≤ 1, ν_2·p ≥ 1 − √3ε}`: the arc and the chord.
fn cap_boundary(epsilon: f64, n: usize) -> Vec<Vec2> {
    let c = (1.0 - SQRT3 * epsilon).clamp(-1.0, 1.0);
    let half = c.acos();
    let mid = std::f64::consts::PI / 6.0;
    let arc_a = Vec2::new((mid - half).cos(), (mid - half).sin());
    let arc_b = Vec2::new((mid + half).cos(), (mid + half).sin());
    let mut pts = Vec::with_capacity(2 * n + 2);
    for k in 0..=n {
        let s = k as f64 / n as f64;
        let a = mid - half + 2.0 * half * s;
        pts.push(Vec2::new(a.cos(), a.sin()));
        pts.push(arc_a + s * (arc_b - arc_a));
    }
    pts
}

/// Runs the three containments for one `(ε, δ)`.
pub fn step3_containment(geo: &Step3Geometry) -> Step3Report {
    let mut checks = Vec::new();

    // (1) ν_2 − (δ²/ε)e^x + R_1 ⊂ C: open ball and closed half-plane, by vertices.
    let mut one = ball_check("nu2 - (delta^2/eps) e^x + R1 in C", geo.shifted_r1);
    let (hp, hp_at) = geo
        .shifted_r1
        .iter()
        .map(|p| (geo.half_plane_margin(p), *p))
        .fold((f64::INFINITY, Vec2::zeros()), |b, x| if x.0 < b.0 { x } else { b });
    if hp < -1e-12 {
        one.pass = false;
        one.slack = hp;
        one.witness = [hp_at.x, hp_at.y];
    }
    checks.push(one);

    // (2) C + D ⊂ open ball: adding D = −T_2 never increases the norm on the
    // closed cap, so the open cap stays inside the open ball.
    let n = 2048;
    let mut worst = (f64::NEG_INFINITY, Vec2::zeros());
    for c in cap_boundary(geo.epsilon, n) {
        for k in 1..=64 {
            let d = geo.d[1] * (k as f64 / 64.0);
            let growth = (c + d).norm() - c.norm();
            if growth > worst.0 {
                worst = (growth, c + d);
            }
        }
    }
    checks.push(ContainmentCheck {
        set: "C + D norm growth".into(),
        pass: worst.0 < 0.0,
        slack: -worst.0,
        witness: [worst.1.x, worst.1.y],
    });
    // The image set actually used: (ν_2 − (δ²/ε)e^x + R_1) + D.
    let sums = geo.shifted_r1.iter().flat_map(|a| geo.d.iter().map(move |d| a + d));
    checks.push(ball_check("nu2 - (delta^2/eps) e^x + R1 + D in ball", sums));

    // (3) vertices of e^y − (δ²/ε)τ_2 + R_2 + F.
    let sums = geo.shifted_r2.iter().flat_map(|a| geo.f.iter().map(move |b| a + b));
    checks.push(ball_check("e^y - (delta^2/eps) tau2 + R2 + F in ball", sums));

    let min_slack = checks.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min);
    let pass = checks.iter().all(|c| c.pass);
    Step3Report { epsilon: geo.epsilon, delta: geo.delta, checks, min_slack, pass }
}
