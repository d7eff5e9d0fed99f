//! Closed-form runtime bounds and derived quantities.

mod adiabatic;
mod lambert;
mod qsl;

pub use adiabatic::{
    adiabatic_constant_c, superoperator_sample, AdiabaticConstant, RateRule, SuperNorm,
    SuperoperatorSample,
};
pub use lambert::{
    gamma_max, kappa_max, lambert_w0, measurement_ratio, measurement_ratio_series,
    measurement_ratio_two_thirds,
};
pub use qsl::{deffner_lutz_qsl, mt_path_qsl, rc_qsl_ratio};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grover_model::GroverInstance;

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// Arctangent bracket whose square, divided by `gamma`, is `tau^2`.
pub fn infidelity_bracket(inst: &GroverInstance, gamma: f64) -> Result<f64> {
    check_positive("gamma", gamma)?;
    let n = inst.dim();
    let rn = n.sqrt();
    // (sqrt((1+g^2)(N-1)) - sqrt(N)) / g without the cancellation.
    let num = gamma * gamma * (n - 1.0) - 1.0;
    let den = gamma * (((1.0 + gamma * gamma) * (n - 1.0)).sqrt() + rn);
    Ok((1.0 / (gamma * rn)).atan() + (num / den).atan())
}

/// Smallest leading-order leakage reachable in time `T`.
pub fn min_infidelity(inst: &GroverInstance, gamma: f64, total_time: f64) -> Result<f64> {
    check_positive("total time", total_time)?;
    let b = infidelity_bracket(inst, gamma)?;
    Ok(2.0 * b * b / (gamma * total_time))
}

/// Shortest time whose minimal leakage equals `target`.
pub fn min_runtime(inst: &GroverInstance, gamma: f64, target_infidelity: f64) -> Result<f64> {
    if !(target_infidelity > 0.0 && target_infidelity < 1.0) {
        return Err(domain(format!(
            "target infidelity must lie in (0, 1), got {target_infidelity}"
        )));
    }
    let b = infidelity_bracket(inst, gamma)?;
    Ok(2.0 * b * b / (gamma * target_infidelity))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Weak,
    Moderate,
    Strong,
}

impl Regime {
    /// Weak below `alpha = 0.1`, strong above `alpha = 10`.
    pub fn classify(alpha: f64) -> Regime {
        if alpha < 0.1 {
            Regime::Weak
        } else if alpha <= 10.0 {
            Regime::Moderate
        } else {
            Regime::Strong
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    pub alpha: f64,
    pub regime: Regime,
    pub exact_tmin: f64,
    pub asymptotic_tmin: f64,
    pub rel_deviation: f64,
}

/// Large-`N` limit of the bracket at fixed `alpha = gamma sqrt(N)`.
pub fn moderate_c_exact(alpha: f64) -> f64 {
    alpha.atan()
}

/// The moderate-regime coefficient in the form `atan(1/alpha) + atan(alpha/2)`.
pub fn moderate_c_half_alpha(alpha: f64) -> f64 {
    (1.0 / alpha).atan() + (alpha / 2.0).atan()
}

/// Compares the exact minimal runtime with the asymptotic form of a regime
/// (chosen from `alpha` when `regime` is `None`).
pub fn asymptotic_tmin(
    inst: &GroverInstance,
    gamma: f64,
    target_infidelity: f64,
    regime: Option<Regime>,
) -> Result<RegimeReport> {
    let exact = min_runtime(inst, gamma, target_infidelity)?;
    let n = inst.dim();
    let alpha = gamma * n.sqrt();
    let regime = regime.unwrap_or_else(|| Regime::classify(alpha));
    let asym = match regime {
        Regime::Weak => 2.0 * gamma * n / target_infidelity,
        Regime::Moderate => {
            let c = moderate_c_exact(alpha);
            2.0 * c * c / (alpha * target_infidelity) * n.sqrt()
        }
        Regime::Strong => std::f64::consts::PI.powi(2) / (2.0 * gamma * target_infidelity),
    };
    Ok(RegimeReport {
        alpha,
        regime,
        exact_tmin: exact,
        asymptotic_tmin: asym,
        rel_deviation: (exact - asym).abs() / exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_state_example() {
        let inst = GroverInstance::new(1).unwrap();
        assert_relative_eq!(
            min_infidelity(&inst, 1.0, 100.0).unwrap(),
            0.02 * 0.615_479_708_670_387_3f64.powi(2),
            max_relative = 1e-12
        );
    }

    #[test]
    fn runtime_check_value() {
        let inst = GroverInstance::new(10).unwrap();
        let t = min_runtime(&inst, 1.0 / 32.0, 0.1).unwrap();
        // Independent value: 2 tau^2 / (gamma target) with tau from quadrature of sqrt(M).
        assert_relative_eq!(t, 394.293_454_701, max_relative = 1e-9);
    }

    #[test]
    fn classification() {
        assert_eq!(Regime::classify(0.05), Regime::Weak);
        assert_eq!(Regime::classify(0.1), Regime::Moderate);
        assert_eq!(Regime::classify(10.0), Regime::Moderate);
        assert_eq!(Regime::classify(10.5), Regime::Strong);
    }

    #[test]
    fn moderate_forms_differ_at_one() {
        assert_relative_eq!(
            moderate_c_exact(1.0),
            std::f64::consts::FRAC_PI_4,
            epsilon = 1e-15
        );
        assert_relative_eq!(
            moderate_c_half_alpha(1.0),
            1.249_045_772_398_254_4,
            epsilon = 1e-12
        );
    }

    #[test]
    fn domain_checks() {
        let inst = GroverInstance::new(3).unwrap();
        assert!(min_infidelity(&inst, 0.0, 1.0).is_err());
        assert!(min_runtime(&inst, 0.1, 1.0).is_err());
    }
}
