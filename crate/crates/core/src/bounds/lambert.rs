use std::f64::consts::{E, PI};

use crate::error::{domain, Error, Result};

/// Principal branch `W0(x)` for `x >= -1/e`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    let branch = -(-1f64).exp();
    if !x.is_finite() || x < branch - 4.0 * f64::EPSILON {
        return Err(domain(format!("lambert_w0 needs x >= -1/e, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let t = (E * x + 1.0).max(0.0);
    if t == 0.0 {
        return Ok(-1.0);
    }
    let mut w = if x < -0.25 {
        let p = (2.0 * t).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p() * (1.0 - 0.2 * x.ln_1p())
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    for _ in 0..64 {
        let wp1 = w + 1.0;
        if wp1.abs() < 1e-9 {
            break;
        }
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 1e-16 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("epsilon must lie in (0, 1), got {epsilon}")))
    }
}

/// Exact `x(eps) = 1 + eps + W0(-exp(-(1 + eps)))`, the ratio of the
/// dephasing rate to the measurement bandwidth at tolerance `eps`.
pub fn measurement_ratio(epsilon: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(1.0 + epsilon + lambert_w0(-(-(1.0 + epsilon)).exp())?)
}

/// Small-`eps` expansion `sqrt(2 eps) + 2 eps / 3` used by [`gamma_max`].
pub fn measurement_ratio_two_thirds(epsilon: f64) -> f64 {
    (2.0 * epsilon).sqrt() + 2.0 * epsilon / 3.0
}

/// Two-term series of the exact ratio, `sqrt(2 eps) + eps / 3`.
pub fn measurement_ratio_series(epsilon: f64) -> f64 {
    (2.0 * epsilon).sqrt() + epsilon / 3.0
}

/// Largest dephasing rate `(gap / pi)(sqrt(2 eps) + 2 eps / 3)` compatible
/// with resolving the gap at tolerance `eps`; rejects `eps` with `x > 1`.
pub fn gamma_max(gap: f64, epsilon: f64) -> Result<f64> {
    if !(gap.is_finite() && gap > 0.0) {
        return Err(domain(format!("gap must be positive, got {gap}")));
    }
    let x = measurement_ratio(epsilon)?;
    if x > 1.0 + 1e-12 {
        return Err(Error::Constraint(format!(
            "epsilon = {epsilon} gives x = {x} > 1"
        )));
    }
    Ok(gap / PI * measurement_ratio_two_thirds(epsilon))
}

/// Gap-tracking coefficient `gamma_max(1, 1/e)`.
pub fn kappa_max() -> f64 {
    gamma_max(1.0, (-1f64).exp()).expect("1/e is admissible")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(E).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(lambert_w0(-(-1f64).exp()).unwrap(), -1.0);
        assert!(lambert_w0(-0.4).is_err());
    }

    #[test]
    fn residual_across_range() {
        for &x in &[-0.3678, -0.3, -0.1, 1e-8, 0.5, 2.0, 10.0, 1e3, 1e10] {
            let w = lambert_w0(x).unwrap();
            assert!((w * w.exp() - x).abs() <= 1e-14 * x.abs().max(1.0), "x={x}");
            assert!(w >= -1.0);
        }
    }

    #[test]
    fn ratio_at_inverse_e() {
        let x = measurement_ratio((-1f64).exp()).unwrap();
        assert!((x - 1.0).abs() < 1e-12);
        assert!(matches!(gamma_max(1.0, 0.5), Err(Error::Constraint(_))));
    }

    #[test]
    fn kappa_value() {
        let expected = ((2.0 / E).sqrt() + 2.0 / (3.0 * E)) / PI;
        assert!((kappa_max() - expected).abs() < 1e-15);
    }
}
