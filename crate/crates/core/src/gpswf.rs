//! GPSWF bases from their Jacobi expansions.
//!
//! For fixed (α, c) the coefficients β_k^n of ψ_n = Σ_k β_k^n J̃_k solve a
//! symmetric pentadiagonal system that couples k with k ± 2 only, so it splits
//! into one tridiagonal problem per parity.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::eigensolver::{eig_symtridiag, refine_eigenvector, SymTridiag};
use crate::error::{Error, Result};
use crate::specfun::{gauss_jacobi, JacobiParams, JacobiRecurrence, QuadratureRule};

/// Number of trailing coefficients per parity used to measure truncation adequacy.
pub const TAIL_BUFFER: usize = 16;
/// Maximal squared mass allowed in the trailing coefficients.
pub const TAIL_TOLERANCE: f64 = 1e-24;
/// Upper limit on the number of Jacobi modes per parity.
pub const MAX_TRUNC: usize = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Self {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// Degree of the first Jacobi mode of this parity (0 or 1).
    pub fn offset(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

/// Tridiagonal matrix of the Jacobi-coefficient eigensystem restricted to one
/// parity; row j carries the mode k = 2j + parity, for j < m.
pub fn assemble_eigensystem(alpha: f64, c: f64, m: usize, parity: Parity) -> Result<SymTridiag> {
    let params = JacobiParams::new(alpha)?;
    if !c.is_finite() || c < 0.0 {
        return Err(Error::domain(format!("bandwidth must be finite and >= 0, got {c}")));
    }
    if m < 2 {
        return Err(Error::domain(format!("truncation must be >= 2, got {m}")));
    }
    let c2 = c * c;
    let p = parity.offset();
    let diag = (0..m)
        .map(|j| {
            let k = (2 * j + p) as f64;
            let kk = k * (k + 2.0 * alpha + 1.0);
            let mix = if j == 0 && p == 0 {
                1.0 / (2.0 * alpha + 3.0)
            } else {
                (2.0 * kk + 2.0 * alpha - 1.0)
                    / ((2.0 * k + 2.0 * alpha + 3.0) * (2.0 * k + 2.0 * alpha - 1.0))
            };
            kk + c2 * mix
        })
        .collect();

    let mut off = Vec::with_capacity(m - 1);
    for j in 0..m - 1 {
        let k = 2 * j + p;
        let v = c2 * params.recurrence(k + 1) * params.recurrence(k + 2);
        check_coupling(alpha, k, v / c2.max(f64::MIN_POSITIVE), c2)?;
        off.push(v);
    }
    SymTridiag::new(diag, off)
}

/// The coupling k → k+2 and the coupling k+2 → k, each written in closed form,
/// must agree with the product form a_{k+1} a_{k+2}.
fn check_coupling(alpha: f64, k: usize, product: f64, c2: f64) -> Result<()> {
    if c2 == 0.0 {
        return Ok(());
    }
    let a = alpha;
    let kf = k as f64;
    let up = ((kf + 1.0) * (kf + 2.0) * (kf + 2.0 * a + 1.0) * (kf + 2.0 * a + 2.0)).sqrt()
        / ((2.0 * kf + 2.0 * a + 3.0) * ((2.0 * kf + 2.0 * a + 5.0) * (2.0 * kf + 2.0 * a + 1.0)).sqrt());
    let l = kf + 2.0;
    let down = (l * (l - 1.0) * (l + 2.0 * a) * (l + 2.0 * a - 1.0)).sqrt()
        / ((2.0 * l + 2.0 * a - 1.0) * ((2.0 * l + 2.0 * a + 1.0) * (2.0 * l + 2.0 * a - 3.0)).sqrt());
    for v in [up, down] {
        // the closed forms take square roots of negative factors when α < -1/2
        if v.is_finite() && (v - product).abs() > 1e-13 * product.abs() {
            return Err(Error::Consistency {
                what: format!("asymmetric coupling at k={k}"),
                spread: (v - product).abs(),
            });
        }
    }
    Ok(())
}

/// Recurrences for ω_α, ω_{α+1}, ω_{α+2}, used for ψ, ψ' and ψ''.
#[derive(Debug)]
struct Tables {
    rec: [JacobiRecurrence; 3],
}

impl Tables {
    fn new(params: JacobiParams, degree: usize) -> Self {
        let p1 = params.raised();
        let p2 = p1.raised();
        Self {
            rec: [
                JacobiRecurrence::new(params, degree),
                JacobiRecurrence::new(p1, degree),
                JacobiRecurrence::new(p2, degree),
            ],
        }
    }
}

/// GPSWFs ψ_0, ..., ψ_{nmax-1} for one (α, c).
///
/// Coefficients are stored per parity: `beta(n)[j]` is β_{2j+p}^n with p the
/// parity of n.
#[derive(Debug, Clone)]
pub struct GpswfBasis {
    params: JacobiParams,
    c: f64,
    trunc: usize,
    chi: Vec<f64>,
    beta: Vec<Vec<f64>>,
    tables: Arc<Tables>,
}

impl PartialEq for GpswfBasis {
    fn eq(&self, other: &Self) -> bool {
        self.params == other.params
            && self.c.to_bits() == other.c.to_bits()
            && self.trunc == other.trunc
            && self.chi.len() == other.chi.len()
            && self.chi.iter().zip(&other.chi).all(|(a, b)| a.to_bits() == b.to_bits())
            && self.beta.len() == other.beta.len()
            && self
                .beta
                .iter()
                .zip(&other.beta)
                .all(|(a, b)| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()))
    }
}

/// Options for [`build_basis_with`].
#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    /// Initial number of modes per parity; `None` picks nmax + ⌈c⌉ + 40.
    pub initial_trunc: Option<usize>,
    pub max_trunc: usize,
    pub tail_tolerance: f64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            initial_trunc: None,
            max_trunc: MAX_TRUNC,
            tail_tolerance: TAIL_TOLERANCE,
        }
    }
}

pub fn build_basis(alpha: f64, c: f64, nmax: usize) -> Result<GpswfBasis> {
    build_basis_with(alpha, c, nmax, BuildOptions::default())
}

pub fn build_basis_with(alpha: f64, c: f64, nmax: usize, opts: BuildOptions) -> Result<GpswfBasis> {
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::domain(format!("alpha must be >= 0, got {alpha}")));
    }
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::domain(format!("bandwidth c must be > 0, got {c}")));
    }
    if nmax == 0 {
        return Err(Error::domain("nmax must be >= 1"));
    }
    let n_even = nmax.div_ceil(2);
    let n_odd = nmax / 2;
    let min_trunc = (n_even + TAIL_BUFFER).max(2);
    let mut m = opts
        .initial_trunc
        .unwrap_or(nmax + c.ceil() as usize + 40)
        .max(min_trunc);
    loop {
        let m_cur = m.min(opts.max_trunc);
        let (even, odd) = rayon::join(
            || solve_parity(alpha, c, m_cur, Parity::Even, n_even),
            || solve_parity(alpha, c, m_cur, Parity::Odd, n_odd),
        );
        let (even, odd) = (even?, odd?);
        let mut chi = Vec::with_capacity(nmax);
        let mut beta = Vec::with_capacity(nmax);
        let (mut ie, mut io) = (even.into_iter(), odd.into_iter());
        for n in 0..nmax {
            let (x, v) = if n % 2 == 0 { ie.next() } else { io.next() }.expect("pair count");
            chi.push(x);
            beta.push(v);
        }
        let worst = beta
            .iter()
            .enumerate()
            .map(|(n, b)| (n, tail_mass(b)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nmax >= 1");
        if worst.1 <= opts.tail_tolerance {
            let basis = GpswfBasis::assemble(JacobiParams::new(alpha)?, c, m_cur, chi, beta);
            check_interleave(&basis.chi)?;
            return Ok(basis.with_sign_convention());
        }
        if m_cur >= opts.max_trunc {
            return Err(Error::Truncation {
                n: worst.0,
                tail_mass: worst.1,
                trunc: m_cur,
            });
        }
        log::debug!("tail mass {:e} at n={} with M={m_cur}; doubling", worst.1, worst.0);
        m = m_cur * 2;
    }
}

fn solve_parity(alpha: f64, c: f64, m: usize, parity: Parity, count: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let mat = assemble_eigensystem(alpha, c, m, parity)?;
    let eig = eig_symtridiag(&mat)?;
    let scale = mat.diag().iter().fold(0.0f64, |s, d| s.max(d.abs())).max(1.0);
    Ok((0..count)
        .map(|i| {
            let lambda = eig.values()[i];
            let ql = eig.vector(i);
            let twisted = refine_eigenvector(&mat, lambda, ql);
            let r_ql = mat.residual(lambda, ql);
            let r_tw = mat.residual(lambda, &twisted);
            let v = if r_tw.is_finite() && r_tw <= (10.0 * r_ql).max(1e-12 * scale) {
                twisted
            } else {
                ql.to_vec()
            };
            (lambda, v)
        })
        .collect())
}

fn tail_mass(b: &[f64]) -> f64 {
    let start = b.len().saturating_sub(TAIL_BUFFER);
    b[start..].iter().map(|x| x * x).sum()
}

fn check_interleave(chi: &[f64]) -> Result<()> {
    for (n, w) in chi.windows(2).enumerate() {
        let gap = w[1] - w[0];
        if gap <= 1e-9 * w[1].abs().max(1.0) {
            return Err(Error::Consistency {
                what: format!("chi not strictly increasing between n={n} and n={}", n + 1),
                spread: gap,
            });
        }
    }
    Ok(())
}

impl GpswfBasis {
    fn assemble(params: JacobiParams, c: f64, trunc: usize, chi: Vec<f64>, beta: Vec<Vec<f64>>) -> Self {
        let tables = Arc::new(Tables::new(params, 2 * trunc + 1));
        Self {
            params,
            c,
            trunc,
            chi,
            beta,
            tables,
        }
    }

    /// Rebuilds a basis from stored parts, validating shape and the basic invariants.
    pub fn from_parts(alpha: f64, c: f64, trunc: usize, chi: Vec<f64>, beta: Vec<Vec<f64>>) -> Result<Self> {
        let params = JacobiParams::new(alpha)?;
        if !(c.is_finite() && c > 0.0) || trunc < 2 || chi.is_empty() || chi.len() != beta.len() {
            return Err(Error::Format("inconsistent basis dimensions".into()));
        }
        for (n, b) in beta.iter().enumerate() {
            if b.len() != trunc {
                return Err(Error::Format(format!("row {n} has length {} != {trunc}", b.len())));
            }
            let norm: f64 = b.iter().map(|x| x * x).sum();
            if !norm.is_finite() || (norm - 1.0).abs() > 1e-10 {
                return Err(Error::Format(format!("row {n} is not normalized")));
            }
        }
        if chi.iter().any(|x| !x.is_finite()) {
            return Err(Error::Format("non-finite chi".into()));
        }
        check_interleave(&chi).map_err(|e| Error::Format(e.to_string()))?;
        Ok(Self::assemble(params, c, trunc, chi, beta))
    }

    pub fn alpha(&self) -> f64 {
        self.params.alpha()
    }

    pub fn params(&self) -> JacobiParams {
        self.params
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// Number of Jacobi modes per parity.
    pub fn trunc(&self) -> usize {
        self.trunc
    }

    pub fn nmax(&self) -> usize {
        self.chi.len()
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    /// Per-parity coefficients of ψ_n.
    pub fn beta(&self, n: usize) -> &[f64] {
        &self.beta[n]
    }

    pub fn betas(&self) -> &[Vec<f64>] {
        &self.beta
    }

    /// β_k^n for any degree k (zero for the opposite parity or beyond the truncation).
    pub fn beta_k(&self, n: usize, k: usize) -> f64 {
        let p = n % 2;
        if k % 2 != p {
            return 0.0;
        }
        self.beta[n].get((k - p) / 2).copied().unwrap_or(0.0)
    }

    /// All Jacobi coefficients of ψ_n indexed by degree, length 2·trunc.
    pub fn coefficients(&self, n: usize) -> Vec<f64> {
        let p = n % 2;
        let mut out = vec![0.0; 2 * self.trunc];
        for (j, b) in self.beta[n].iter().enumerate() {
            out[2 * j + p] = *b;
        }
        out
    }

    /// Highest Jacobi degree present in any ψ_n, plus one.
    pub fn degree_bound(&self) -> usize {
        2 * self.trunc
    }

    /// Gauss–Jacobi rule exact for products of two basis functions times a quadratic.
    pub fn quadrature(&self, extra: usize) -> Result<QuadratureRule> {
        gauss_jacobi(self.params, 2 * self.trunc + 2 + extra)
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if n >= self.nmax() {
            return Err(Error::Index {
                index: n,
                limit: self.nmax(),
            });
        }
        Ok(())
    }

    /// J̃ values (or those of the derivative families) for all degrees at x ≥ 0.
    fn family_values(&self, derivative: usize, x: f64, out: &mut [f64]) {
        self.tables.rec[derivative].values_into(x, out);
    }

    /// Derivative scale factors: d/dx J̃^{(a)}_k = √(k(k+2a+1)) J̃^{(a+1)}_{k-1}.
    fn deriv_factor(&self, order: usize, k: usize) -> f64 {
        let a = self.alpha();
        let kf = k as f64;
        match order {
            0 => 1.0,
            1 => (kf * (kf + 2.0 * a + 1.0)).sqrt(),
            _ => {
                if k < 2 {
                    0.0
                } else {
                    (kf * (kf + 2.0 * a + 1.0) * (kf - 1.0) * (kf + 2.0 * a + 2.0)).sqrt()
                }
            }
        }
    }

    /// ψ_n^{(d)}(x) for d ∈ {0, 1, 2}.
    pub fn eval(&self, n: usize, x: f64, derivative: usize) -> Result<f64> {
        self.check_index(n)?;
        check_arg(x)?;
        if derivative > 2 {
            return Err(Error::domain("only derivatives of order 0, 1, 2 are available"));
        }
        let mut vals = vec![0.0; self.degree_bound()];
        self.family_values(derivative, x.abs(), &mut vals);
        let v = self.dot_row(n, derivative, &vals);
        Ok(if x < 0.0 && (n + derivative) % 2 == 1 { -v } else { v })
    }

    fn dot_row(&self, n: usize, derivative: usize, vals: &[f64]) -> f64 {
        let p = n % 2;
        self.beta[n]
            .iter()
            .enumerate()
            .filter_map(|(j, b)| {
                let k = 2 * j + p;
                (k >= derivative).then(|| b * self.deriv_factor(derivative, k) * vals[k - derivative])
            })
            .sum()
    }

    /// ψ_0^{(d)}(x), ..., ψ_{count-1}^{(d)}(x) in one pass.
    pub fn eval_all(&self, x: f64, derivative: usize, count: usize) -> Result<Vec<f64>> {
        check_arg(x)?;
        if derivative > 2 {
            return Err(Error::domain("only derivatives of order 0, 1, 2 are available"));
        }
        let count = count.min(self.nmax());
        let mut vals = vec![0.0; self.degree_bound()];
        self.family_values(derivative, x.abs(), &mut vals);
        Ok((0..count)
            .map(|n| {
                let v = self.dot_row(n, derivative, &vals);
                if x < 0.0 && (n + derivative) % 2 == 1 {
                    -v
                } else {
                    v
                }
            })
            .collect())
    }

    /// Makes ψ_n(0) > 0 for even n and ψ_n'(0) > 0 for odd n; if that value is
    /// below 1e-13 the largest coefficient is made positive instead.
    fn with_sign_convention(mut self) -> Self {
        for n in 0..self.nmax() {
            let v = self.eval(n, 0.0, n % 2).expect("valid index");
            let flip = if v.abs() >= 1e-13 {
                v < 0.0
            } else {
                let big = self.beta[n].iter().fold(0.0f64, |m, &b| if b.abs() > m.abs() { b } else { m });
                big < 0.0
            };
            if flip {
                self.beta[n].iter_mut().for_each(|b| *b = -*b);
            }
        }
        self
    }
}

/// ψ_n^{(d)}(x) for d ∈ {0, 1, 2}.
pub fn eval_psi(basis: &GpswfBasis, n: usize, x: f64, derivative: usize) -> Result<f64> {
    basis.eval(n, x, derivative)
}

/// −(1−x²)ψ_n'' + 2(α+1)xψ_n' + c²x²ψ_n − χ_n ψ_n at x, with ψ_n'' from the
/// differentiated Jacobi series.
pub fn ode_residual(basis: &GpswfBasis, n: usize, x: f64) -> Result<f64> {
    let v = basis.eval(n, x, 0)?;
    let d1 = basis.eval(n, x, 1)?;
    let d2 = basis.eval(n, x, 2)?;
    let c2 = basis.c * basis.c;
    Ok(-(1.0 - x * x) * d2 + 2.0 * (basis.alpha() + 1.0) * x * d1 + c2 * x * x * v - basis.chi[n] * v)
}

/// Gram matrix ⟨ψ_m, ψ_n⟩ for m, n < count under `rule`.
pub fn gram_matrix(basis: &GpswfBasis, count: usize, rule: &QuadratureRule) -> Result<Vec<Vec<f64>>> {
    let mut g = vec![vec![0.0; count]; count];
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let psi = basis.eval_all(x, 0, count)?;
        for i in 0..count {
            for j in 0..count {
                g[i][j] += w * psi[i] * psi[j];
            }
        }
    }
    Ok(g)
}

fn check_arg(x: f64) -> Result<()> {
    if !x.is_finite() || x.abs() > 1.0 {
        return Err(Error::domain(format!("argument must satisfy |x| <= 1, got {x}")));
    }
    Ok(())
}

/// Verdict of the bracket n(n+2α+1) ≤ χ_n ≤ n(n+2α+1) + c².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiBracket {
    pub n: usize,
    pub chi: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

pub fn chi_bracket_check(basis: &GpswfBasis, n: usize) -> Result<ChiBracket> {
    basis.check_index(n)?;
    let nf = n as f64;
    let lower = nf * (nf + 2.0 * basis.alpha() + 1.0);
    let upper = lower + basis.c * basis.c;
    let chi = basis.chi[n];
    // rounding slack of the eigensolver relative to χ
    let slack = 64.0 * f64::EPSILON * chi.abs().max(1.0);
    Ok(ChiBracket {
        n,
        chi,
        lower,
        upper,
        holds: chi >= lower - slack && chi <= upper + slack,
    })
}

/// C_α of the improved lower bound χ_n ≥ n(n+2α+1) + C_α c².
pub fn chi_lower_constant(alpha: f64) -> f64 {
    let t = 2.0 * alpha + 1.0;
    2.0 * t * t + 1.0 - 2.0 * t * (1.0 + t * t).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiLowerVerdict {
    pub n: usize,
    pub q: f64,
    pub applicable: bool,
    pub c_alpha: f64,
    pub chi: f64,
    pub lower: f64,
    pub upper: f64,
    /// χ_n − lower bound.
    pub margin: f64,
    /// Upper bound − χ_n.
    pub upper_margin: f64,
    /// True when inapplicable or when both bounds hold.
    pub holds: bool,
}

pub fn chi_lower_bound_check(basis: &GpswfBasis, n: usize) -> Result<ChiLowerVerdict> {
    basis.check_index(n)?;
    let a = basis.alpha();
    let chi = basis.chi[n];
    let c2 = basis.c * basis.c;
    let q = c2 / chi;
    let applicable = a <= 0.25 && q > 0.0 && q < 3.0 / 17.0;
    let c_alpha = chi_lower_constant(a);
    let nf = n as f64;
    let base = nf * (nf + 2.0 * a + 1.0);
    let lower = base + c_alpha * c2;
    let upper = base + c2;
    let margin = chi - lower;
    let upper_margin = upper - chi;
    let slack = 64.0 * f64::EPSILON * chi.abs().max(1.0);
    Ok(ChiLowerVerdict {
        n,
        q,
        applicable,
        c_alpha,
        chi,
        lower,
        upper,
        margin,
        upper_margin,
        holds: !applicable || (margin >= -slack && upper_margin >= -slack),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalEstimateReport {
    pub n: usize,
    pub q: f64,
    pub sup_value: f64,
    pub a_squared: f64,
    pub b: f64,
    pub bound_applicable: bool,
    /// sup_value ≤ A² (only meaningful when applicable).
    pub sup_holds: bool,
    /// A² ≤ 2α + 1.
    pub a_holds: bool,
    /// 1 − B ≤ 2A².
    pub b_relation_holds: bool,
}

impl LocalEstimateReport {
    /// True when inapplicable or when every inequality holds.
    pub fn holds(&self) -> bool {
        !self.bound_applicable || (self.sup_holds && self.a_holds && self.b_relation_holds)
    }
}

/// Second moment B = ∫ x² ψ_n² ω_α, exact by quadrature.
pub fn second_moment(basis: &GpswfBasis, n: usize, rule: &QuadratureRule) -> Result<f64> {
    basis.check_index(n)?;
    let mut acc = 0.0;
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let v = basis.eval(n, x, 0)?;
        acc += w * x * x * v * v;
    }
    Ok(acc)
}

pub fn local_estimate(basis: &GpswfBasis, n: usize, grid_size: usize) -> Result<LocalEstimateReport> {
    basis.check_index(n)?;
    if grid_size < 100 {
        return Err(Error::domain(format!("grid_size must be >= 100, got {grid_size}")));
    }
    let a = basis.alpha();
    let chi = basis.chi[n];
    let q = basis.c * basis.c / chi;
    let last = (grid_size - 1) as f64;
    let mut sup_value = 0.0f64;
    for i in 0..grid_size {
        // Chebyshev–Lobatto points mapped to [0, 1]
        let x = 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / last).cos());
        let psi = basis.eval(n, x, 0)?;
        let env = ((1.0 - x * x) * (1.0 - q * x * x)).max(0.0).sqrt() * basis.params.weight(x);
        sup_value = sup_value.max(env * psi * psi);
    }
    let p0 = basis.eval(n, 0.0, 0)?;
    let d0 = basis.eval(n, 0.0, 1)?;
    let a_squared = p0 * p0 + d0 * d0 / chi;
    let b = second_moment(basis, n, &basis.quadrature(0)?)?;
    let tol = 1e-9;
    Ok(LocalEstimateReport {
        n,
        q,
        sup_value,
        a_squared,
        b,
        bound_applicable: a <= 0.25 && q > 0.0 && q < 3.0 / 17.0,
        sup_holds: sup_value <= a_squared + tol,
        a_holds: a_squared <= 2.0 * a + 1.0 + tol,
        b_relation_holds: 1.0 - b <= 2.0 * a_squared + tol,
    })
}

/// C_α of the coefficient bound |β_k^n| ≤ C_α (2√χ_n/c)^k |μ_n|.
pub fn beta_bound_constant(alpha: f64) -> f64 {
    let a = alpha;
    2f64.powf(a) * 1.5f64.powf(0.75) * (1.5 + 2.0 * a).powf(0.75 + a) / (2.0 * a + 1.5).exp()
}

/// m_α = 4.13 (1.28 + (2α+1)/1.9)^{0.55}.
pub fn m_alpha(alpha: f64) -> f64 {
    4.13 * (1.28 + (2.0 * alpha + 1.0) / 1.9).powf(0.55)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaBoundVerdict {
    pub n: usize,
    pub k: usize,
    pub q: f64,
    /// q < 1 and k(k+2α+1) + C'_α c² ≤ χ_n for the supplied C'_α.
    pub applicable: bool,
    pub c_alpha: f64,
    pub ln_beta_abs: f64,
    pub ln_bound: f64,
    /// ln bound − ln |β_k^n|.
    pub margin: f64,
    /// k ≤ n/1.9 and n ≥ m_α c.
    pub decay_regime: bool,
    pub holds: bool,
}

/// Checks |β_k^n| ≤ C_α (2√χ_n/c)^k |μ_n| in log space; `ln_mu_abs` comes from
/// the spectral module and `c_prime` is the caller's choice of C'_α.
pub fn beta_bound_check(basis: &GpswfBasis, n: usize, k: usize, ln_mu_abs: f64, c_prime: f64) -> Result<BetaBoundVerdict> {
    basis.check_index(n)?;
    let a = basis.alpha();
    let c = basis.c;
    let chi = basis.chi[n];
    let q = c * c / chi;
    let kf = k as f64;
    let applicable = q < 1.0 && kf * (kf + 2.0 * a + 1.0) + c_prime * c * c <= chi;
    let c_alpha = beta_bound_constant(a);
    let ln_bound = c_alpha.ln() + kf * (2.0 * chi.sqrt() / c).ln() + ln_mu_abs;
    let ln_beta_abs = basis.beta_k(n, k).abs().ln();
    let margin = ln_bound - ln_beta_abs;
    Ok(BetaBoundVerdict {
        n,
        k,
        q,
        applicable,
        c_alpha,
        ln_beta_abs,
        ln_bound,
        margin,
        decay_regime: kf <= n as f64 / 1.9 && n as f64 >= m_alpha(a) * c,
        holds: !applicable || margin >= -1e-9,
    })
}
