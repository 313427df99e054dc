//! Closed-form scaling of exponential-model queue lengths to general
//! independent settings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which processes are modelled with phase-type distributions in the CTMC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelSetting {
    /// Exponential arrivals and services.
    MM,
    /// Phase-type arrivals, exponential services.
    PhM,
    /// Exponential arrivals, phase-type services.
    MPh,
    /// Phase-type arrivals and services.
    PhPh,
}

impl ModelSetting {
    pub fn arrival_is_phase_type(self) -> bool {
        matches!(self, ModelSetting::PhM | ModelSetting::PhPh)
    }

    pub fn service_is_phase_type(self) -> bool {
        matches!(self, ModelSetting::MPh | ModelSetting::PhPh)
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelSetting::MM => "MM",
            ModelSetting::PhM => "PhM",
            ModelSetting::MPh => "MPh",
            ModelSetting::PhPh => "PhPh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    None,
    Hertel,
    Kingman,
}

impl Scaling {
    pub fn label(self) -> &'static str {
        match self {
            Scaling::None => "none",
            Scaling::Hertel => "hertel",
            Scaling::Kingman => "kingman",
        }
    }
}

/// Inputs of the scaling formulas; the channel count is fixed to one.
#[derive(Debug, Clone, Copy)]
pub struct ScalingContext {
    pub v_a: f64,
    pub v_b: f64,
    pub rho: f64,
}

/// Multiplier 1/gamma applied to the exponential-model queue length, with
/// gamma = 2 / (c v_B^2 + v_A^2) and c = (rho/s)^(1-v_A^2) (1+v_A^2) - v_A^2.
pub fn hertel_factor(ctx: &ScalingContext) -> Result<f64> {
    if !(ctx.rho > 0.0 && ctx.rho < 1.0) {
        return Err(Error::RhoOutOfRange { rho: ctx.rho });
    }
    let va2 = ctx.v_a * ctx.v_a;
    let c = ctx.rho.powf(1.0 - va2) * (1.0 + va2) - va2;
    let gamma = 2.0 / (c * ctx.v_b * ctx.v_b + va2);
    Ok(1.0 / gamma)
}

/// Kingman's heavy-traffic multiplier (v_A^2 + v_B^2) / 2, independent of rho.
pub fn kingman_factor(v_a: f64, v_b: f64) -> f64 {
    (v_a * v_a + v_b * v_b) / 2.0
}

/// Effective variation coefficients for the scaling formulas: a process that
/// is already phase-type modelled enters the formula with coefficient 1; a
/// fully phase-type model is not scaled at all.
pub fn select_formula_cvs(setting: ModelSetting, v_a: f64, v_b: f64) -> Option<(f64, f64)> {
    match setting {
        ModelSetting::MM => Some((v_a, v_b)),
        ModelSetting::PhM => Some((1.0, v_b)),
        ModelSetting::MPh => Some((v_a, 1.0)),
        ModelSetting::PhPh => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn hertel_reference_values() {
        // direct evaluation: c = 0.5^0.36 * 1.64 - 0.64
        let ctx = ScalingContext { v_a: 0.8, v_b: 0.3, rho: 0.5 };
        let c = 0.5f64.powf(0.36) * 1.64 - 0.64;
        assert_relative_eq!(c, 0.6378297, epsilon = 1e-6);
        let factor = hertel_factor(&ctx).unwrap();
        assert_relative_eq!(factor, (c * 0.09 + 0.64) / 2.0, epsilon = 1e-12);
        assert_relative_eq!(factor, 0.3487023, epsilon = 1e-6);
    }

    #[test]
    fn hertel_is_identity_for_exponential_processes() {
        for rho in [0.1, 0.5, 0.9] {
            let ctx = ScalingContext { v_a: 1.0, v_b: 1.0, rho };
            assert_relative_eq!(hertel_factor(&ctx).unwrap(), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn hertel_with_unit_arrival_cv() {
        let ctx = ScalingContext { v_a: 1.0, v_b: 0.3, rho: 0.5 };
        assert_relative_eq!(hertel_factor(&ctx).unwrap(), (0.09 + 1.0) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn hertel_domain_error() {
        let ctx = ScalingContext { v_a: 0.8, v_b: 0.3, rho: 1.0 };
        assert!(matches!(hertel_factor(&ctx), Err(Error::RhoOutOfRange { .. })));
    }

    #[test]
    fn kingman_reference_values() {
        assert_relative_eq!(kingman_factor(0.8, 0.3), 0.365);
        assert_relative_eq!(kingman_factor(1.0, 1.0), 1.0);
        assert_relative_eq!(kingman_factor(1.0, 0.3), 0.545);
    }

    #[test]
    fn formula_cv_pairings() {
        assert_eq!(select_formula_cvs(ModelSetting::MM, 0.8, 0.3), Some((0.8, 0.3)));
        assert_eq!(select_formula_cvs(ModelSetting::PhM, 0.8, 0.3), Some((1.0, 0.3)));
        assert_eq!(select_formula_cvs(ModelSetting::MPh, 0.8, 0.3), Some((0.8, 1.0)));
        assert_eq!(select_formula_cvs(ModelSetting::PhPh, 0.8, 0.3), None);
    }

    proptest! {
        #[test]
        fn hertel_positive_and_finite_on_domain(rho in 1e-6f64..0.999999, va in 0.1f64..1.0, vb in 0.1f64..1.0) {
            let f = hertel_factor(&ScalingContext { v_a: va, v_b: vb, rho }).unwrap();
            prop_assert!(f.is_finite() && f > 0.0);
        }

        #[test]
        fn hertel_equals_kingman_at_unit_arrival_cv(rho in 1e-6f64..0.999999, vb in 0.05f64..1.5) {
            let h = hertel_factor(&ScalingContext { v_a: 1.0, v_b: vb, rho }).unwrap();
            let k = kingman_factor(1.0, vb);
            prop_assert!((h - k).abs() < 1e-12);
        }

        #[test]
        fn kingman_independent_of_rho(va in 0.1f64..1.0, vb in 0.1f64..1.0) {
            // rho does not appear; assert the factor is symmetric too
            prop_assert!((kingman_factor(va, vb) - kingman_factor(vb, va)).abs() < 1e-15);
        }
    }
}
