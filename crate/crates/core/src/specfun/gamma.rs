use crate::error::{Error, Result};

/// log Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("ln_gamma requires finite x > 0, got {x}")));
    }
    Ok(lgamma(x))
}

/// Unchecked log Γ for internal callers that guarantee x > 0.
pub(crate) fn lgamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    libm::lgamma(x)
}

/// Γ(x) for x > 0 (overflows to +inf beyond x ≈ 171.6).
pub fn gamma(x: f64) -> Result<f64> {
    ln_gamma(x).map(f64::exp)
}

/// log B(a, b) = log Γ(a) + log Γ(b) - log Γ(a + b).
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    Ok(ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?)
}

/// Lower and upper bracket for Γ(x+1), x > 0, from the elementary inequalities
/// √(2e)((x+½)/e)^{x+½} ≤ Γ(x+1) ≤ √(2π)((x+½)/e)^{x+½}, returned in log space.
pub fn gamma_bracket_ln(x: f64) -> (f64, f64) {
    let t = x + 0.5;
    let core = t * (t.ln() - 1.0);
    let lower = 0.5 * (2.0 * std::f64::consts::E).ln() + core;
    let upper = 0.5 * (2.0 * std::f64::consts::PI).ln() + core;
    (lower, upper)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_values() {
        assert_eq!(ln_gamma(1.0).unwrap().abs() < 1e-15, true);
        assert!((ln_gamma(3.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        let mut fact = 1.0f64;
        for n in 1..30 {
            fact *= n as f64;
            let lg = ln_gamma(n as f64 + 1.0).unwrap();
            assert!((lg - fact.ln()).abs() <= 1e-14 * fact.ln().max(1.0), "n={n}");
        }
    }

    #[test]
    fn half_integer() {
        let expect = std::f64::consts::PI.sqrt().ln();
        assert!((ln_gamma(0.5).unwrap() - expect).abs() < 1e-15);
        assert!((0.572_364_942_9 - expect).abs() < 1e-10);
        // Γ(5/2) = 3√π/4
        let g = gamma(2.5).unwrap();
        assert!((g - 0.75 * std::f64::consts::PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(-1.5).is_err());
        assert!(ln_gamma(f64::NAN).is_err());
        assert!(ln_gamma(f64::INFINITY).is_err());
    }

    #[test]
    fn bracket_at_two() {
        let (lo, hi) = gamma_bracket_ln(2.0);
        let g3 = ln_gamma(3.0).unwrap();
        assert!(lo <= g3 && g3 <= hi);
    }

    #[test]
    fn bracket_dense_grid() {
        for i in 1..=20_000 {
            let x = i as f64 * 0.005;
            let (lo, hi) = gamma_bracket_ln(x);
            let g = ln_gamma(x + 1.0).unwrap();
            assert!(lo <= g + 1e-13 && g <= hi + 1e-13, "x={x}");
        }
    }

    #[test]
    fn large_arguments_do_not_overflow() {
        let v = ln_gamma(4000.5).unwrap();
        assert!(v.is_finite() && v > 0.0);
        // recurrence ln Γ(x+1) = ln Γ(x) + ln x
        for &x in &[0.1, 0.7, 3.3, 14.9, 15.1, 250.0, 2001.25] {
            let d = ln_gamma(x + 1.0).unwrap() - ln_gamma(x).unwrap() - f64::ln(x);
            assert!(d.abs() < 2e-13 * ln_gamma(x + 1.0).unwrap().abs().max(1.0), "x={x}");
        }
    }
}
