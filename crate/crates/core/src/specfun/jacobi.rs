use super::gamma::lgamma;
use crate::error::{Error, Result};

/// Exponent α of the symmetric Jacobi (Gegenbauer) weight ω_α(x) = (1-x²)^α.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct JacobiParams {
    alpha: f64,
}

impl JacobiParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= -1.0 {
            return Err(Error::domain(format!("weight exponent must be finite and > -1, got {alpha}")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// ω_α(x).
    pub fn weight(&self, x: f64) -> f64 {
        let u = 1.0 - x * x;
        if u <= 0.0 {
            return if self.alpha == 0.0 { 1.0 } else if self.alpha > 0.0 { 0.0 } else { f64::INFINITY };
        }
        u.powf(self.alpha)
    }

    /// ∫ ω_α = √π Γ(α+1)/Γ(α+3/2), which is also h_0.
    pub fn weight_integral(&self) -> f64 {
        self.ln_h(0).exp()
    }

    /// log of h_k = 2^{2α+1} Γ(k+α+1)² / (k! (2k+2α+1) Γ(k+2α+1)).
    pub fn ln_h(&self, k: usize) -> f64 {
        let a = self.alpha;
        if k == 0 {
            // same quantity written without Γ(2α+1), which is singular at α = -1/2
            return 0.5 * std::f64::consts::PI.ln() + lgamma(a + 1.0) - lgamma(a + 1.5);
        }
        let kf = k as f64;
        (2.0 * a + 1.0) * std::f64::consts::LN_2 + 2.0 * lgamma(kf + a + 1.0)
            - lgamma(kf + 1.0)
            - (2.0 * kf + 2.0 * a + 1.0).ln()
            - lgamma(kf + 2.0 * a + 1.0)
    }

    /// Coefficient a_k of x J̃_k = a_{k+1} J̃_{k+1} + a_k J̃_{k-1}; a_0 = 0.
    pub fn recurrence(&self, k: usize) -> f64 {
        let a = self.alpha;
        match k {
            0 => 0.0,
            1 => (1.0 / (2.0 * a + 3.0)).sqrt(),
            _ => {
                let kf = k as f64;
                (kf * (kf + 2.0 * a) / ((2.0 * kf + 2.0 * a + 1.0) * (2.0 * kf + 2.0 * a - 1.0))).sqrt()
            }
        }
    }

    /// Parameters of the weight ω_{α+1}, the orthogonality weight of derivatives.
    pub fn raised(&self) -> Self {
        Self { alpha: self.alpha + 1.0 }
    }
}

/// Recurrence coefficients a_0..=a_kmax, cached for repeated evaluation.
#[derive(Debug, Clone)]
pub struct JacobiRecurrence {
    params: JacobiParams,
    a: Vec<f64>,
    p0: f64,
}

impl JacobiRecurrence {
    pub fn new(params: JacobiParams, kmax: usize) -> Self {
        let a = (0..=kmax + 2).map(|k| params.recurrence(k)).collect();
        let p0 = (-0.5 * params.ln_h(0)).exp();
        Self { params, a, p0 }
    }

    pub fn params(&self) -> JacobiParams {
        self.params
    }

    pub fn kmax(&self) -> usize {
        self.a.len() - 3
    }

    /// J̃_0..=J̃_kmax at x.
    pub fn values_into(&self, x: f64, out: &mut [f64]) {
        let n = out.len().min(self.kmax() + 1);
        if n == 0 {
            return;
        }
        out[0] = self.p0;
        if n == 1 {
            return;
        }
        out[1] = x * self.p0 / self.a[1];
        for k in 1..n - 1 {
            out[k + 1] = (x * out[k] - self.a[k] * out[k - 1]) / self.a[k + 1];
        }
    }

    pub fn values(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.kmax() + 1];
        self.values_into(x, &mut out);
        out
    }

    /// Clenshaw summation of Σ c_k J̃_k(x), coefficients indexed from k = 0.
    pub fn clenshaw(&self, coeffs: &[f64], x: f64) -> f64 {
        let n = coeffs.len();
        assert!(n <= self.kmax() + 1, "series longer than the recurrence table");
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for k in (0..n).rev() {
            // b_k = c_k + (x / a_{k+1}) b_{k+1} - (a_{k+1} / a_{k+2}) b_{k+2}
            let bk = coeffs[k] + x / self.a[k + 1] * b1 - self.a[k + 1] / self.a[k + 2] * b2;
            b2 = b1;
            b1 = bk;
        }
        self.p0 * b1
    }
}

/// Coefficients of d/dx Σ c_k J̃^{(a)}_k in the J̃^{(a+1)} basis, using
/// J̃^{(a)}_k' = √(k(k+2a+1)) J̃^{(a+1)}_{k-1}.
pub fn derivative_coefficients(alpha: f64, coeffs: &[f64]) -> Vec<f64> {
    (1..coeffs.len())
        .map(|k| {
            let kf = k as f64;
            coeffs[k] * (kf * (kf + 2.0 * alpha + 1.0)).sqrt()
        })
        .collect()
}

/// Normalised Jacobi polynomial J̃_k(x) = P_k^{(α,α)}(x)/√h_k.
pub fn jacobi_normalized(k: usize, params: JacobiParams, x: f64) -> Result<f64> {
    check_x(x)?;
    let rec = JacobiRecurrence::new(params, k);
    let mut out = vec![0.0; k + 1];
    rec.values_into(x, &mut out);
    Ok(out[k])
}

/// First derivative J̃_k'(x).
pub fn jacobi_normalized_derivative(k: usize, params: JacobiParams, x: f64) -> Result<f64> {
    check_x(x)?;
    if k == 0 {
        return Ok(0.0);
    }
    let kf = k as f64;
    let scale = (kf * (kf + 2.0 * params.alpha() + 1.0)).sqrt();
    Ok(scale * jacobi_normalized(k - 1, params.raised(), x)?)
}

fn check_x(x: f64) -> Result<()> {
    if !x.is_finite() || x.abs() > 1.0 {
        return Err(Error::domain(format!("Jacobi argument must satisfy |x| <= 1, got {x}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_zero_constant() {
        for &a in &[0.0, 0.5, 1.5, 2.5] {
            let p = JacobiParams::new(a).unwrap();
            let h0 = (2f64.powf(2.0 * a + 1.0) * super::super::gamma(a + 1.0).unwrap().powi(2))
                / ((2.0 * a + 1.0) * super::super::gamma(2.0 * a + 1.0).unwrap());
            let v = jacobi_normalized(0, p, 0.3).unwrap();
            assert!((v - 1.0 / h0.sqrt()).abs() < 1e-14, "alpha={a}");
        }
    }

    #[test]
    fn legendre_endpoint() {
        let p = JacobiParams::new(0.0).unwrap();
        let v = jacobi_normalized(3, p, 1.0).unwrap();
        assert!((v - 3.5f64.sqrt()).abs() < 1e-14);
        assert!((3.5f64.sqrt() - 1.870_828_693_4).abs() < 1e-10);
    }

    #[test]
    fn derivative_against_legendre() {
        // P_3 = (5x³ - 3x)/2, P_3' = (15x² - 3)/2, normalised by √(7/2)
        let p = JacobiParams::new(0.0).unwrap();
        let x = 0.37;
        let d = jacobi_normalized_derivative(3, p, x).unwrap();
        let want = 3.5f64.sqrt() * (15.0 * x * x - 3.0) / 2.0;
        assert!((d - want).abs() < 1e-13);
    }

    #[test]
    fn clenshaw_matches_direct_sum() {
        let p = JacobiParams::new(0.75).unwrap();
        let rec = JacobiRecurrence::new(p, 40);
        let coeffs: Vec<f64> = (0..=40).map(|k| ((k * 7 % 11) as f64 - 5.0) / (k as f64 + 1.0)).collect();
        for &x in &[-1.0, -0.3, 0.0, 0.61, 1.0] {
            let vals = rec.values(x);
            let direct: f64 = coeffs.iter().zip(&vals).map(|(c, v)| c * v).sum();
            let cl = rec.clenshaw(&coeffs, x);
            assert!((direct - cl).abs() < 1e-11 * direct.abs().max(1.0), "x={x}");
        }
    }

    #[test]
    fn rejects_out_of_interval() {
        let p = JacobiParams::new(0.0).unwrap();
        assert!(jacobi_normalized(2, p, 1.0001).is_err());
        assert!(JacobiParams::new(-1.0).is_err());
    }

    #[test]
    fn stable_to_high_degree() {
        let p = JacobiParams::new(1.5).unwrap();
        let rec = JacobiRecurrence::new(p, 2000);
        for &x in &[-1.0, -0.999, 0.0, 0.5, 1.0] {
            assert!(rec.values(x).iter().all(|v| v.is_finite()));
        }
    }
}
