//! Symmetric tridiagonal eigenproblems by implicit-shift QL.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::domain("tridiagonal matrix must have dimension >= 1"));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::domain(format!(
                "off-diagonal length {} does not match dimension {}",
                offdiag.len(),
                diag.len()
            )));
        }
        if diag.iter().chain(&offdiag).any(|v| !v.is_finite()) {
            return Err(Error::domain("tridiagonal matrix has non-finite entries"));
        }
        Ok(Self { diag, offdiag })
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    /// y = A v
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diag[i] * v[i];
            if i > 0 {
                s += self.offdiag[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += self.offdiag[i] * v[i + 1];
            }
            y[i] = s;
        }
        y
    }

    /// ‖A v - λ v‖₂
    pub fn residual(&self, lambda: f64, v: &[f64]) -> f64 {
        self.mul_vec(v)
            .iter()
            .zip(v)
            .map(|(av, vi)| (av - lambda * vi).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Eigenvalues in ascending order with orthonormal eigenvectors stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EigDecomposition {
    values: Vec<f64>,
    vectors: Vec<f64>,
}

impl EigDecomposition {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Eigenvector i (column i of V).
    pub fn vector(&self, i: usize) -> &[f64] {
        let n = self.dim();
        &self.vectors[i * n..(i + 1) * n]
    }

    /// max |VᵀV - I|
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                let d: f64 = self.vector(i).iter().zip(self.vector(j)).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - target).abs());
            }
        }
        worst
    }
}

/// Full eigendecomposition of a symmetric tridiagonal matrix.
pub fn eig_symtridiag(m: &SymTridiag) -> Result<EigDecomposition> {
    let n = m.dim();
    let mut d = m.diag.clone();
    let mut e = m.offdiag.clone();
    e.push(0.0);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    ql_implicit(&mut d, &mut e, Some(&mut z))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &i in &order {
        let col = &z[i * n..(i + 1) * n];
        let sign = leading_sign(col);
        vectors.extend(col.iter().map(|v| sign * v));
    }
    Ok(EigDecomposition { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn eigenvalues_symtridiag(m: &SymTridiag) -> Result<Vec<f64>> {
    let mut d = m.diag.clone();
    let mut e = m.offdiag.clone();
    e.push(0.0);
    ql_implicit(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Sign making the first entry above round-off level positive.
fn leading_sign(v: &[f64]) -> f64 {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let floor = max * f64::EPSILON * v.len() as f64;
    match v.iter().find(|x| x.abs() > floor) {
        Some(&x) if x < 0.0 => -1.0,
        _ => 1.0,
    }
}

/// Implicit QL with Wilkinson-type shifts. `e[i]` couples rows i and i+1; `e[n-1]` is scratch.
/// When `z` is given, the rotations are accumulated into its columns.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::Consistency {
                    what: format!("QL iteration did not converge for eigenvalue {l}"),
                    spread: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    let (lo, hi) = z.split_at_mut((i + 1) * n);
                    let col_i = &mut lo[i * n..];
                    let col_next = &mut hi[..n];
                    for k in 0..n {
                        let t = col_next[k];
                        col_next[k] = s * col_i[k] + c * t;
                        col_i[k] = c * col_i[k] - s * t;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Recomputes the eigenvector of `lambda` from a twisted factorisation of A - λI.
///
/// Components are built as products of pivot ratios, so entries many orders of
/// magnitude below the peak keep relative accuracy. The twist index minimises
/// the residual pivot. Returns a unit vector whose sign matches `guess`.
pub fn refine_eigenvector(m: &SymTridiag, lambda: f64, guess: &[f64]) -> Vec<f64> {
    let n = m.dim();
    if n == 1 {
        return vec![1.0f64.copysign(guess[0])];
    }
    let d: Vec<f64> = m.diag.iter().map(|a| a - lambda).collect();
    let b = &m.offdiag;
    let tiny = f64::MIN_POSITIVE.sqrt();
    let guard = |x: f64, scale: f64| {
        if x.abs() < f64::EPSILON * scale {
            (f64::EPSILON * scale).max(tiny).copysign(if x == 0.0 { 1.0 } else { x })
        } else {
            x
        }
    };
    // top[j] = v_j / v_{j+1}, from the upper rows
    let mut top = vec![0.0; n];
    let mut prev = 0.0;
    for j in 0..n - 1 {
        let piv = d[j] + if j > 0 { b[j - 1] * prev } else { 0.0 };
        let piv = guard(piv, d[j].abs() + b[j].abs());
        top[j] = -b[j] / piv;
        prev = top[j];
    }
    // bot[j] = v_j / v_{j-1}, from the lower rows
    let mut bot = vec![0.0; n];
    let mut next = 0.0;
    for j in (1..n).rev() {
        let piv = d[j] + if j + 1 < n { b[j] * next } else { 0.0 };
        let piv = guard(piv, d[j].abs() + b[j - 1].abs());
        bot[j] = -b[j - 1] / piv;
        next = bot[j];
    }
    let gamma = |r: usize| {
        let mut g = d[r];
        if r > 0 {
            g += b[r - 1] * top[r - 1];
        }
        if r + 1 < n {
            g += b[r] * bot[r + 1];
        }
        g.abs()
    };
    let twist = (0..n).min_by(|&a, &c| gamma(a).total_cmp(&gamma(c))).unwrap_or(0);

    let mut v = vec![0.0; n];
    v[twist] = 1.0;
    for j in (0..twist).rev() {
        v[j] = top[j] * v[j + 1];
    }
    for j in twist + 1..n {
        v[j] = bot[j] * v[j - 1];
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dot: f64 = v.iter().zip(guess).map(|(a, g)| a * g).sum();
    let sign = if dot < 0.0 { -1.0 } else { 1.0 };
    v.iter_mut().for_each(|x| *x *= sign / norm);
    v
}
