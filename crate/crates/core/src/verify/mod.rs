//! Numerical verification of the calibration conditions, the closed-form
//! identities at the critical points of `ρ`, and the polygon containments.

pub mod conditions;
pub mod divergence;
pub mod mfuncs;
pub mod report;
pub mod rho;
pub mod scan;
pub mod step3;

pub use conditions::{check_b, check_c, check_e};
pub use mfuncs::{check_m_functions, m_value, smallest_admissible_delta, MFunction, MReport, MValue};
pub use divergence::{check_divergence, DivergenceConfig};
pub use report::{ConditionResult, MarginKind, OracleResult, VerificationReport, REPORT_SCHEMA_VERSION};
pub use rho::{rho_oracles, RhoProbe};
pub use step3::{step3_containment, ContainmentCheck, Step3Geometry, Step3Report};
pub use scan::{brute_force_max, check_d_global, jump_distance, ScanConfig, ScanReport};

use rand::Rng;

use crate::geometry::Vec2;

/// Uniform point in the closed disc of radius `r`.
pub(crate) fn sample_disc<R: Rng>(rng: &mut R, r: f64) -> Vec2 {
    loop {
        let p = Vec2::new(rng.gen_range(-r..=r), rng.gen_range(-r..=r));
        if p.norm_squared() <= r * r {
            return p;
        }
    }
}
