//! Eigenvalues μ_n of the weighted finite Fourier transform
//! F_c f(x) = ∫ e^{icxy} f(y) ω_α(y) dy and λ_n = (c/2π)|μ_n|² of
//! Q_c = (c/2π) F_c* F_c, with the decay-bound checks.

use std::f64::consts::{E, PI};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gpswf::GpswfBasis;
use crate::specfun::{bessel_j_scaled, bessel_j_sequence, lgamma, JacobiParams, QuadratureRule};

/// Ratios whose cancellation factor exceeds this are replaced by the recursion.
pub const MAX_CANCELLATION: f64 = 1e3;
/// Allowed relative spread of μ_n across probe points.
pub const PROBE_TOLERANCE: f64 = 1e-8;
const PROBE_COUNT: usize = 5;
const PROBE_GRID: usize = 96;

fn i_pow(k: usize) -> Complex64 {
    match k % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    }
}

/// log of √π Γ(k+α+1) / (k! √h_k), the modulus prefactor of F_c J̃_k.
fn ln_transform_prefactor(params: JacobiParams, k: usize) -> f64 {
    let a = params.alpha();
    let kf = k as f64;
    0.5 * PI.ln() + lgamma(kf + a + 1.0) - lgamma(kf + 1.0) - 0.5 * params.ln_h(k)
}

/// Real moduli r_k(x) with (F_c J̃_k)(x) = i^k r_k(x) for 0 ≤ k < count, x ≥ 0.
pub(crate) fn transform_moduli(params: JacobiParams, c: f64, x: f64, count: usize) -> Result<Vec<f64>> {
    let a = params.alpha();
    let z = c * x;
    if z == 0.0 {
        let mut out = vec![0.0; count];
        if count > 0 {
            out[0] = (ln_transform_prefactor(params, 0) - lgamma(a + 1.5)).exp();
        }
        return Ok(out);
    }
    let js = bessel_j_sequence(a + 0.5, z, count)?;
    let ln_pow = (a + 0.5) * (2.0 / z).ln();
    Ok(js
        .iter()
        .enumerate()
        .map(|(k, j)| {
            if *j == 0.0 {
                0.0
            } else {
                j.signum() * (ln_transform_prefactor(params, k) + ln_pow + j.abs().ln()).exp()
            }
        })
        .collect())
}

/// (F_c J̃_k)(x) = i^k √π Γ(k+α+1)/(k! √h_k) (2/(c|x|))^{α+1/2} J_{k+α+1/2}(c|x|),
/// extended by parity to x < 0 and by continuity to x = 0.
pub fn fc_on_jacobi(alpha: f64, c: f64, k: usize, x: f64) -> Result<Complex64> {
    let params = JacobiParams::new(alpha)?;
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::domain(format!("bandwidth c must be > 0, got {c}")));
    }
    if !x.is_finite() || x.abs() > 1.0 {
        return Err(Error::domain(format!("argument must satisfy |x| <= 1, got {x}")));
    }
    let nu = k as f64 + alpha + 0.5;
    let z = c * x.abs();
    // (2/z)^{α+1/2} J_ν(z) = (z/2)^k J_ν(z)/(z/2)^ν
    let ln_mod = ln_transform_prefactor(params, k);
    let scaled = bessel_j_scaled(nu, z)?;
    let r = if z == 0.0 {
        if k == 0 {
            (ln_mod).exp() * scaled
        } else {
            0.0
        }
    } else {
        let j = crate::specfun::bessel_j(nu, z)?;
        if j == 0.0 {
            0.0
        } else {
            j.signum() * (ln_mod + (alpha + 0.5) * (2.0 / z).ln() + j.abs().ln()).exp()
        }
    };
    let sign = if x < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
    Ok(i_pow(k) * (sign * r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuMethod {
    /// (F_c ψ_n)(x)/ψ_n(x) at probe points.
    Ratio,
    /// μ_{n}/μ_{n-1} from the exact identity μ_{n-1}⟨ψ_n', ψ_{n-1}⟩ = ic μ_n ⟨xψ_n, ψ_{n-1}⟩.
    Recursion,
}

/// Slack (ln bound − ln value) of the two super-exponential decay bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayMargins {
    pub mu: f64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub n: usize,
    pub chi: f64,
    pub mu_abs: f64,
    pub ln_mu_abs: f64,
    /// μ_n / |μ_n|; expected to be i^n.
    pub mu_phase: Complex64,
    pub lambda: f64,
    pub ln_lambda: f64,
    pub method: MuMethod,
    /// Relative spread of the probe ratios (ratio method only).
    pub probe_spread: Option<f64>,
    /// Largest cancellation factor Σ|β_k r_k| / |Σ β_k r_k| among the probes.
    pub cancellation: f64,
    /// Relative difference between ratio and recursion where both are available.
    pub cross_check: Option<f64>,
    pub bound_margins: Option<DecayMargins>,
}

impl SpectrumEntry {
    pub fn mu(&self) -> Complex64 {
        self.mu_phase * self.mu_abs
    }
}

struct RatioEstimate {
    value: f64,
    spread: f64,
    cancellation: f64,
}

/// Probe-point estimate of the real number R with μ_n = i^p R, p = n mod 2.
fn ratio_estimate(basis: &GpswfBasis, n: usize, grid: &[f64], moduli: &[Vec<f64>]) -> Result<RatioEstimate> {
    let p = n % 2;
    let beta = basis.beta(n);
    let psi: Vec<f64> = grid.iter().map(|&x| basis.eval(n, x, 0)).collect::<Result<_>>()?;
    let peak = psi.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut cands: Vec<(f64, f64)> = Vec::new();
    for (i, _) in grid.iter().enumerate() {
        if psi[i].abs() <= 0.1 * peak {
            continue;
        }
        let mut sum = 0.0;
        let mut abs = 0.0;
        for (j, b) in beta.iter().enumerate() {
            let k = 2 * j + p;
            // i^k = i^p (-1)^j
            let t = if j % 2 == 0 { 1.0 } else { -1.0 } * b * moduli[i][k];
            sum += t;
            abs += t.abs();
        }
        let kappa = if sum == 0.0 { f64::INFINITY } else { abs / sum.abs() };
        cands.push((kappa, sum / psi[i]));
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0));
    cands.truncate(PROBE_COUNT);
    if cands.is_empty() {
        return Ok(RatioEstimate {
            value: f64::NAN,
            spread: f64::INFINITY,
            cancellation: f64::INFINITY,
        });
    }
    let mean = cands.iter().map(|c| c.1).sum::<f64>() / cands.len() as f64;
    let lo = cands.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let hi = cands.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(RatioEstimate {
        value: mean,
        spread: (hi - lo) / mean.abs(),
        cancellation: cands.iter().map(|c| c.0).fold(0.0, f64::max),
    })
}

/// ⟨x ψ_{n+1}, ψ_n⟩ in coefficient space via x J̃_k = a_{k+1} J̃_{k+1} + a_k J̃_{k-1}.
fn x_moment(basis: &GpswfBasis, n: usize) -> f64 {
    let params = basis.params();
    let hi = basis.coefficients(n + 1);
    let lo = basis.coefficients(n);
    let mut acc = 0.0;
    for (k, &b) in hi.iter().enumerate() {
        if b == 0.0 {
            continue;
        }
        let up = lo.get(k + 1).copied().unwrap_or(0.0);
        let down = if k > 0 { lo[k - 1] } else { 0.0 };
        acc += b * (params.recurrence(k + 1) * up + params.recurrence(k) * down);
    }
    acc
}

/// ⟨ψ_{n+1}', ψ_n⟩ for all n < count-1 by exact quadrature.
fn derivative_moments(basis: &GpswfBasis, rule: &QuadratureRule, count: usize) -> Result<Vec<f64>> {
    let mut acc = vec![0.0; count.saturating_sub(1)];
    for (&x, &w) in rule.nodes().iter().zip(rule.weights()) {
        let v = basis.eval_all(x, 0, count)?;
        let d = basis.eval_all(x, 1, count)?;
        for n in 0..acc.len() {
            acc[n] += w * d[n + 1] * v[n];
        }
    }
    Ok(acc)
}

/// Probe grid: Chebyshev points of (0, 1].
fn probe_grid() -> Vec<f64> {
    (0..PROBE_GRID)
        .map(|i| (0.5 * PI * (i as f64 + 0.5) / PROBE_GRID as f64).sin())
        .collect()
}

/// Checks the closed-form transform against quadrature for the first few degrees.
fn validate_phase(basis: &GpswfBasis, rule: &QuadratureRule) -> Result<()> {
    let x = 0.618_033_988_749_894_9;
    let params = basis.params();
    let rec = crate::specfun::JacobiRecurrence::new(params, 5);
    let mut direct = [Complex64::new(0.0, 0.0); 6];
    for (&y, &w) in rule.nodes().iter().zip(rule.weights()) {
        let e = Complex64::from_polar(w, basis.c() * x * y);
        for (k, v) in rec.values(y).iter().enumerate() {
            direct[k] += e * v;
        }
    }
    for (k, d) in direct.iter().enumerate() {
        let g = fc_on_jacobi(basis.alpha(), basis.c(), k, x)?;
        let err = (g - d).norm();
        if err > 1e-8 * d.norm().max(1e-3) {
            return Err(Error::Consistency {
                what: format!("phase of the transform of degree {k}"),
                spread: err,
            });
        }
    }
    Ok(())
}

/// μ_n and λ_n for every retained n.
pub fn compute_spectrum(basis: &GpswfBasis) -> Result<Vec<SpectrumEntry>> {
    let nmax = basis.nmax();
    let c = basis.c();
    let params = basis.params();
    let rule = basis.quadrature(0)?;
    validate_phase(basis, &rule)?;

    let grid = probe_grid();
    let kcount = basis.degree_bound();
    let moduli: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&x| transform_moduli(params, c, x, kcount))
        .collect::<Result<_>>()?;
    let ratios: Vec<RatioEstimate> = (0..nmax)
        .into_par_iter()
        .map(|n| ratio_estimate(basis, n, &grid, &moduli))
        .collect::<Result<_>>()?;
    let dmom = derivative_moments(basis, &rule, nmax)?;

    let ln_scale = (c / (2.0 * PI)).ln();
    let mut out: Vec<SpectrumEntry> = Vec::with_capacity(nmax);
    // (ln|μ|, sign of R) for the previous index
    let mut prev: Option<(f64, f64)> = None;
    for n in 0..nmax {
        let r = &ratios[n];
        let ratio_ok = r.cancellation <= MAX_CANCELLATION && r.value.is_finite() && r.value != 0.0;
        let recursed = prev.map(|(ln_prev, sign_prev)| {
            // μ_n = μ_{n-1} · ic X / D with X = ⟨xψ_n, ψ_{n-1}⟩, D = ⟨ψ_n', ψ_{n-1}⟩;
            // writing μ = i^p R, the factor i moves into the parity phase
            let q = c * x_moment(basis, n - 1) / dmom[n - 1];
            let sign = if n % 2 == 0 { -sign_prev * q.signum() } else { sign_prev * q.signum() };
            (ln_prev + q.abs().ln(), sign)
        });
        let (ln_mu, sign, method, spread, cross) = if ratio_ok {
            if r.spread > PROBE_TOLERANCE {
                return Err(Error::Consistency {
                    what: format!("mu probe spread at n={n}"),
                    spread: r.spread,
                });
            }
            let ln_mu = r.value.abs().ln();
            let cross = recursed.map(|(l, _)| (l - ln_mu).exp_m1().abs());
            (ln_mu, r.value.signum(), MuMethod::Ratio, Some(r.spread), cross)
        } else {
            let (l, s) = recursed.ok_or_else(|| Error::Consistency {
                what: "first eigenvalue ratio is ill-conditioned".into(),
                spread: r.cancellation,
            })?;
            (l, s, MuMethod::Recursion, None, None)
        };
        prev = Some((ln_mu, sign));
        let ln_lambda = ln_scale + 2.0 * ln_mu;
        let mut entry = SpectrumEntry {
            n,
            chi: basis.chi()[n],
            mu_abs: ln_mu.exp(),
            ln_mu_abs: ln_mu,
            mu_phase: i_pow(n % 2) * sign,
            lambda: ln_lambda.exp(),
            ln_lambda,
            method,
            probe_spread: spread,
            cancellation: r.cancellation,
            cross_check: cross,
            bound_margins: None,
        };
        let v = decay_bound_check(&entry, basis.alpha(), c);
        if v.applicable {
            entry.bound_margins = Some(DecayMargins {
                mu: v.mu_margin,
                lambda: v.lambda_margin,
            });
        }
        out.push(entry);
    }
    Ok(out)
}

/// k_α = (2/e)^{1+α/2} π Γ(α+1)^{1/2}.
pub fn k_alpha(alpha: f64) -> f64 {
    (2.0 / E).powf(1.0 + 0.5 * alpha) * PI * lgamma(alpha + 1.0).mul_add(0.5, 0.0).exp()
}

/// K_α = (π/2) (2/e)^{α+2} Γ(α+1).
#[allow(non_snake_case)]
pub fn K_alpha(alpha: f64) -> f64 {
    0.5 * PI * (2.0 / E).powf(alpha + 2.0) * lgamma(alpha + 1.0).exp()
}

/// ln of the |μ_n| bound; `None` unless n > (ec+1)/2.
pub fn ln_mu_bound(alpha: f64, c: f64, n: usize) -> Option<f64> {
    let t = (2.0 * n as f64 - 1.0) / (E * c);
    (t > 1.0).then(|| {
        k_alpha(alpha).ln() - (0.5 * alpha + 1.0) * c.ln() - t.ln().ln() - (n as f64 + 0.5 * alpha) * t.ln()
    })
}

/// ln of the λ_n bound; `None` unless n > (ec+1)/2.
pub fn ln_lambda_bound(alpha: f64, c: f64, n: usize) -> Option<f64> {
    let t = (2.0 * n as f64 - 1.0) / (E * c);
    (t > 1.0).then(|| {
        K_alpha(alpha).ln() - (alpha + 1.0) * c.ln() - 2.0 * t.ln().ln() - (2.0 * n as f64 + alpha) * t.ln()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayVerdict {
    pub n: usize,
    pub applicable: bool,
    pub ln_mu_bound: f64,
    pub ln_lambda_bound: f64,
    pub mu_margin: f64,
    pub lambda_margin: f64,
    pub holds: bool,
}

pub fn decay_bound_check(entry: &SpectrumEntry, alpha: f64, c: f64) -> DecayVerdict {
    match (ln_mu_bound(alpha, c, entry.n), ln_lambda_bound(alpha, c, entry.n)) {
        (Some(bm), Some(bl)) => {
            let mu_margin = bm - entry.ln_mu_abs;
            let lambda_margin = bl - entry.ln_lambda;
            DecayVerdict {
                n: entry.n,
                applicable: true,
                ln_mu_bound: bm,
                ln_lambda_bound: bl,
                mu_margin,
                lambda_margin,
                holds: mu_margin >= 0.0 && lambda_margin >= 0.0,
            }
        }
        _ => DecayVerdict {
            n: entry.n,
            applicable: false,
            ln_mu_bound: f64::NAN,
            ln_lambda_bound: f64::NAN,
            mu_margin: f64::NAN,
            lambda_margin: f64::NAN,
            holds: true,
        },
    }
}

/// Comparison curve −(2n+1) ln((4n+4α+2)/(ec)).
pub fn comparison_curve(alpha: f64, c: f64, n: usize) -> f64 {
    let nf = n as f64;
    -(2.0 * nf + 1.0) * ((4.0 * nf + 4.0 * alpha + 2.0) / (E * c)).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DchiRecord {
    pub analytic: f64,
    pub finite_diff: f64,
    pub rel_diff: f64,
}

/// ∂_c χ_n as 2c ∫ x² ψ_n² ω_α against a central difference of fresh bases.
pub fn dchi_dc<F>(factory: F, alpha: f64, c: f64, n: usize, h: Option<f64>) -> Result<DchiRecord>
where
    F: Fn(f64, f64) -> Result<GpswfBasis>,
{
    let h = h.unwrap_or(1e-4 * c);
    if !(h > 0.0 && h < c) {
        return Err(Error::domain(format!("step must satisfy 0 < h < c, got {h}")));
    }
    let basis = factory(alpha, c)?;
    let b = crate::gpswf::second_moment(&basis, n, &basis.quadrature(0)?)?;
    let analytic = 2.0 * c * b;
    let up = factory(alpha, c + h)?;
    let down = factory(alpha, c - h)?;
    let idx = |bs: &GpswfBasis| {
        bs.chi().get(n).copied().ok_or(Error::Index {
            index: n,
            limit: bs.nmax(),
        })
    };
    let finite_diff = (idx(&up)? - idx(&down)?) / (2.0 * h);
    Ok(DchiRecord {
        analytic,
        finite_diff,
        rel_diff: (analytic - finite_diff).abs() / analytic.abs(),
    })
}

/// K_α(z) = √π 2^{α+1/2} Γ(α+1) J_{α+1/2}(z)/z^{α+1/2}, analytic at z = 0.
pub fn kernel_k_alpha(alpha: f64, z: f64) -> Result<f64> {
    Ok(PI.sqrt() * lgamma(alpha + 1.0).exp() * bessel_j_scaled(alpha + 0.5, z.abs())?)
}

/// (c/2π)∫ K_α(c(x−y)) f(y) ω_α(y) dy = (Q_c f)(x) sampled on the rule nodes.
pub fn kernel_matrix(basis: &GpswfBasis, rule: &QuadratureRule) -> Result<Vec<Vec<f64>>> {
    let c = basis.c();
    let a = basis.alpha();
    let nodes = rule.nodes();
    nodes
        .par_iter()
        .map(|&x| {
            nodes
                .iter()
                .zip(rule.weights())
                .map(|(&y, &w)| Ok(c / (2.0 * PI) * w * kernel_k_alpha(a, c * (x - y))?))
                .collect()
        })
        .collect()
}

fn weighted_l2(rule: &QuadratureRule, r: &[f64]) -> f64 {
    r.iter().zip(rule.weights()).map(|(v, w)| w * v * v).sum::<f64>().sqrt()
}

/// ‖Q_c ψ_n − λ_n ψ_n‖ for n < count, Q_c applied through its kernel.
pub fn qc_residuals(basis: &GpswfBasis, spectrum: &[SpectrumEntry], count: usize) -> Result<Vec<f64>> {
    let rule = basis.quadrature(0)?;
    let kmat = kernel_matrix(basis, &rule)?;
    let count = count.min(spectrum.len());
    let psi: Vec<Vec<f64>> = rule.nodes().iter().map(|&x| basis.eval_all(x, 0, count)).collect::<Result<_>>()?;
    Ok((0..count)
        .map(|n| {
            let r: Vec<f64> = kmat
                .iter()
                .zip(&psi)
                .map(|(row, pv)| {
                    let q: f64 = row.iter().zip(&psi).map(|(k, py)| k * py[n]).sum();
                    q - spectrum[n].lambda * pv[n]
                })
                .collect();
            weighted_l2(&rule, &r)
        })
        .collect())
}

/// ‖(c/2π) F_c* F_c ψ_n − λ_n ψ_n‖ for n < count with both transforms by quadrature.
pub fn ffstar_residuals(basis: &GpswfBasis, spectrum: &[SpectrumEntry], count: usize) -> Result<Vec<f64>> {
    let rule = basis.quadrature(0)?;
    let c = basis.c();
    let nodes = rule.nodes();
    let weights = rule.weights();
    let count = count.min(spectrum.len());
    let psi: Vec<Vec<f64>> = nodes.iter().map(|&x| basis.eval_all(x, 0, count)).collect::<Result<_>>()?;
    let m = nodes.len();
    let expo: Vec<Vec<Complex64>> = nodes
        .iter()
        .map(|&x| nodes.iter().map(|&y| Complex64::from_polar(1.0, c * x * y)).collect())
        .collect();
    Ok((0..count)
        .map(|n| {
            let fpsi: Vec<Complex64> = (0..m)
                .map(|t| (0..m).map(|j| expo[t][j] * (weights[j] * psi[j][n])).sum())
                .collect();
            let r: Vec<f64> = (0..m)
                .map(|i| {
                    let back: Complex64 = (0..m).map(|t| expo[i][t].conj() * fpsi[t] * weights[t]).sum();
                    (back * (c / (2.0 * PI))).re - spectrum[n].lambda * psi[i][n]
                })
                .collect();
            weighted_l2(&rule, &r)
        })
        .collect())
}

/// Σ_n λ_n = (c/2)(Γ(α+1)/Γ(α+3/2))².
pub fn trace_identity(alpha: f64, c: f64) -> f64 {
    0.5 * c * (2.0 * (lgamma(alpha + 1.0) - lgamma(alpha + 1.5))).exp()
}

/// Σ_{n ≥ from} of the λ_n bound; infinite when the bound does not apply at `from`.
pub fn lambda_tail_bound(alpha: f64, c: f64, from: usize) -> f64 {
    if ln_lambda_bound(alpha, c, from).is_none() {
        return f64::INFINITY;
    }
    let mut sum = 0.0;
    for n in from.. {
        let t = ln_lambda_bound(alpha, c, n).expect("bound applies past its threshold").exp();
        sum += t;
        if t <= 1e-30 * sum || t == 0.0 {
            break;
        }
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialTrace {
    pub partial: f64,
    pub trace: f64,
    pub tail_bound: f64,
    pub holds: bool,
}

/// Σ_{n<nmax} λ_n against the trace identity: 0 ≤ trace − partial ≤ tail bound + tol.
pub fn partial_trace_check(alpha: f64, c: f64, spectrum: &[SpectrumEntry], tol: f64) -> PartialTrace {
    let partial: f64 = spectrum.iter().map(|e| e.lambda).sum();
    let trace = trace_identity(alpha, c);
    let tail_bound = lambda_tail_bound(alpha, c, spectrum.len());
    let deficit = trace - partial;
    PartialTrace {
        partial,
        trace,
        tail_bound,
        holds: deficit >= -tol && deficit <= tail_bound + tol,
    }
}
