use std::sync::Arc;

use super::jacobi::{JacobiParams, JacobiRecurrence};
use crate::eigensolver::{eigenvalues_symtridiag, SymTridiag};
use crate::error::{Error, Result};

/// Gauss–Jacobi rule for ∫_{-1}^{1} f(x) (1-x²)^α dx.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    alpha: f64,
    nodes: Arc<[f64]>,
    weights: Arc<[f64]>,
}

impl QuadratureRule {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(self.weights.iter()).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Golub–Welsch: nodes are the eigenvalues of the Jacobi matrix, weights from
/// the Christoffel function 1/Σ_k J̃_k(x_i)².
pub fn gauss_jacobi(params: JacobiParams, m: usize) -> Result<QuadratureRule> {
    if m == 0 {
        return Err(Error::domain("quadrature order must be >= 1"));
    }
    let rec = JacobiRecurrence::new(params, m);
    let off: Vec<f64> = (1..m).map(|k| params.recurrence(k)).collect();
    let jac = SymTridiag::new(vec![0.0; m], off)?;
    let mut nodes = eigenvalues_symtridiag(&jac)?;

    // exact symmetry of the node set
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -x;
        nodes[j] = x;
    }
    if m % 2 == 1 {
        nodes[m / 2] = 0.0;
    }

    let mut vals = vec![0.0; m];
    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            rec.values_into(x, &mut vals);
            1.0 / vals.iter().map(|v| v * v).sum::<f64>()
        })
        .collect();
    for i in 0..m / 2 {
        let j = m - 1 - i;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    Ok(QuadratureRule {
        alpha: params.alpha(),
        nodes: nodes.into(),
        weights: weights.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_rule() {
        let r = gauss_jacobi(JacobiParams::new(0.0).unwrap(), 1).unwrap();
        assert_eq!(r.nodes(), &[0.0]);
        assert!((r.weights()[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn zero_order_rejected() {
        assert!(gauss_jacobi(JacobiParams::new(0.0).unwrap(), 0).is_err());
    }

    #[test]
    fn weights_sum_to_weight_integral() {
        for &a in &[0.0, 0.1, 0.5, 1.0, 2.5] {
            let p = JacobiParams::new(a).unwrap();
            for &m in &[1, 2, 7, 40, 333] {
                let r = gauss_jacobi(p, m).unwrap();
                let s: f64 = r.weights().iter().sum();
                assert!((s - p.weight_integral()).abs() < 1e-12 * p.weight_integral(), "a={a} m={m}");
                assert!(r.weights().iter().all(|&w| w > 0.0));
                assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
                for i in 0..m {
                    assert_eq!(r.nodes()[i], -r.nodes()[m - 1 - i]);
                }
            }
        }
    }

    #[test]
    fn legendre_two_point() {
        let r = gauss_jacobi(JacobiParams::new(0.0).unwrap(), 2).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert!((r.nodes()[1] - x).abs() < 1e-15);
        assert!((r.weights()[0] - 1.0).abs() < 1e-15);
    }
}
