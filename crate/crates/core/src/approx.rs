//! Projection S_N f = Σ_{n<N} ⟨f, ψ_n⟩ ψ_n onto GPSWFs, the test-function
//! corpus, Sobolev norms and the approximation-bound checkers.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gpswf::GpswfBasis;
pub use crate::gpswf::m_alpha;
use crate::specfun::{gauss_jacobi, JacobiParams, JacobiRecurrence};
use crate::spectral::{kernel_k_alpha, transform_moduli, SpectrumEntry};

/// Name of the generator behind the Brownian coefficients, recorded in reports.
pub const RNG_NAME: &str = "ChaCha20 (rand_chacha 0.9) uniforms + Box-Muller";
pub const DEFAULT_BROWNIAN_TERMS: usize = 4000;
pub const SUP_GRID: usize = 2001;
/// Sup-norm tail allowed for the Weierstrass–Mandelbrot truncation.
const WM_TAIL: f64 = 1e-12;
/// Cancellation factor above which the spectral identity replaces the direct sum.
const DIRECT_SUM_LIMIT: f64 = 1e6;

/// Declarative description of a corpus function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetSpec {
    Brownian { s: f64, seed: u64, k_terms: Option<usize> },
    WeierstrassMandelbrot { s: f64, lambda: f64, k_terms: Option<usize> },
    PeriodicExponential { k: i64 },
    /// The normalized Jacobi polynomial J̃_k for the basis weight.
    JacobiMode { k: usize, alpha: f64 },
    UserSampled { grid: Vec<f64>, values: Vec<f64> },
}

#[derive(Clone)]
enum Repr {
    /// Σ_{k≥1} amp_k cos(kπx)
    Cosine(Vec<f64>),
    /// Σ amp_j sin(freq_j x)
    Sine { freqs: Vec<f64>, amps: Vec<f64> },
    Exp(i64),
    Jacobi { k: usize, rec: Arc<JacobiRecurrence> },
    Sampled { grid: Vec<f64>, values: Vec<f64> },
    Func(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A function on [-1, 1] with enough structure for closed-form coefficients.
#[derive(Clone)]
pub struct TargetFunction {
    label: String,
    spec: Option<TargetSpec>,
    repr: Repr,
}

impl std::fmt::Debug for TargetFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TargetFunction").field("label", &self.label).finish()
    }
}

/// Standard Gaussians X_1..X_count from the documented generator.
pub fn gaussian_draws(seed: u64, count: usize) -> Vec<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count + 1);
    while out.len() < count {
        // 1 - u lies in (0, 1], so the logarithm is finite
        let u1: f64 = 1.0 - rng.random::<f64>();
        let u2: f64 = rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        out.push(r * c);
        out.push(r * s);
    }
    out.truncate(count);
    out
}

/// B_s(x) = Σ_{k=1}^{K} X_k k^{-s} cos(kπx) with X_k standard Gaussian.
pub fn brownian(s: f64, seed: u64, k_terms: usize) -> Result<TargetFunction> {
    if k_terms == 0 {
        return Err(Error::domain("Brownian truncation must be >= 1"));
    }
    if !s.is_finite() {
        return Err(Error::domain("Brownian exponent must be finite"));
    }
    let xs = gaussian_draws(seed, k_terms);
    let mut f = brownian_from_draws(s, &xs);
    f.spec = Some(TargetSpec::Brownian {
        s,
        seed,
        k_terms: Some(k_terms),
    });
    f.label = format!("brownian(s={s}, seed={seed}, K={k_terms})");
    Ok(f)
}

/// Brownian series with explicit draws X_1, X_2, ... (e.g. all zero).
pub fn brownian_from_draws(s: f64, draws: &[f64]) -> TargetFunction {
    let amps = draws
        .iter()
        .enumerate()
        .map(|(i, x)| x * ((i + 1) as f64).powf(-s))
        .collect();
    TargetFunction {
        label: format!("brownian(s={s}, explicit draws)"),
        spec: None,
        repr: Repr::Cosine(amps),
    }
}

/// Smallest K with λ^{-K(2-s)}/(1 - λ^{-(2-s)}) ≤ 1e-12.
pub fn wm_terms(s: f64, lambda: f64) -> usize {
    let r = lambda.powf(-(2.0 - s));
    let k = ((WM_TAIL * (1.0 - r)).ln() / r.ln()).ceil();
    k.max(1.0) as usize
}

/// M_{s,λ}(x) = Σ_{k=0}^{K-1} sin(λ^k x)/λ^{k(2-s)}.
pub fn weierstrass_mandelbrot(s: f64, lambda: f64, k_terms: Option<usize>) -> Result<TargetFunction> {
    if !lambda.is_finite() || lambda <= 1.0 {
        return Err(Error::domain(format!("lambda must be > 1, got {lambda}")));
    }
    if !s.is_finite() || s > 1.0 {
        return Err(Error::domain(format!("WM exponent must be <= 1, got {s}")));
    }
    let k = k_terms.unwrap_or_else(|| wm_terms(s, lambda));
    if k == 0 {
        return Err(Error::domain("WM truncation must be >= 1"));
    }
    let freqs: Vec<f64> = (0..k).map(|j| lambda.powi(j as i32)).collect();
    let amps = (0..k).map(|j| lambda.powf(-(j as f64) * (2.0 - s))).collect();
    Ok(TargetFunction {
        label: format!("wm(s={s}, lambda={lambda}, K={k})"),
        spec: Some(TargetSpec::WeierstrassMandelbrot {
            s,
            lambda,
            k_terms: Some(k),
        }),
        repr: Repr::Sine { freqs, amps },
    })
}

pub fn periodic_exponential(k: i64) -> TargetFunction {
    TargetFunction {
        label: format!("exp(i·{k}πx)"),
        spec: Some(TargetSpec::PeriodicExponential { k }),
        repr: Repr::Exp(k),
    }
}

pub fn jacobi_mode(alpha: f64, k: usize) -> Result<TargetFunction> {
    let params = JacobiParams::new(alpha)?;
    Ok(TargetFunction {
        label: format!("jacobi(k={k}, alpha={alpha})"),
        spec: Some(TargetSpec::JacobiMode { k, alpha }),
        repr: Repr::Jacobi {
            k,
            rec: Arc::new(JacobiRecurrence::new(params, k + 2)),
        },
    })
}

/// Piecewise-linear interpolant of samples on an increasing grid covering [-1, 1].
pub fn user_sampled(grid: Vec<f64>, values: Vec<f64>) -> Result<TargetFunction> {
    if grid.len() < 2 || grid.len() != values.len() {
        return Err(Error::Config("sampled function needs matching grid and values of length >= 2".into()));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) || grid[0] > -1.0 || *grid.last().unwrap() < 1.0 {
        return Err(Error::Config("sample grid must increase and cover [-1, 1]".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("sampled values must be finite".into()));
    }
    Ok(TargetFunction {
        label: format!("sampled({} points)", grid.len()),
        spec: Some(TargetSpec::UserSampled {
            grid: grid.clone(),
            values: values.clone(),
        }),
        repr: Repr::Sampled { grid, values },
    })
}

impl TargetFunction {
    pub fn from_spec(spec: &TargetSpec) -> Result<Self> {
        match spec {
            TargetSpec::Brownian { s, seed, k_terms } => brownian(*s, *seed, k_terms.unwrap_or(DEFAULT_BROWNIAN_TERMS)),
            TargetSpec::WeierstrassMandelbrot { s, lambda, k_terms } => weierstrass_mandelbrot(*s, *lambda, *k_terms),
            TargetSpec::PeriodicExponential { k } => Ok(periodic_exponential(*k)),
            TargetSpec::JacobiMode { k, alpha } => jacobi_mode(*alpha, *k),
            TargetSpec::UserSampled { grid, values } => user_sampled(grid.clone(), values.clone()),
        }
    }

    pub fn from_fn(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            spec: None,
            repr: Repr::Func(Arc::new(f)),
        }
    }

    /// ψ_n of a basis as a target.
    pub fn from_basis_function(basis: &GpswfBasis, n: usize) -> Result<Self> {
        basis.eval(n, 0.0, 0)?;
        let b = basis.clone();
        Ok(Self::from_fn(format!("psi_{n}"), move |x| b.eval(n, x, 0).unwrap_or(f64::NAN)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn spec(&self) -> Option<&TargetSpec> {
        self.spec.as_ref()
    }

    pub fn is_real(&self) -> bool {
        !matches!(self.repr, Repr::Exp(k) if k != 0)
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match &self.repr {
            Repr::Cosine(amps) => Complex64::new(
                amps.iter()
                    .enumerate()
                    .map(|(i, a)| a * ((i + 1) as f64 * PI * x).cos())
                    .sum(),
                0.0,
            ),
            Repr::Sine { freqs, amps } => {
                Complex64::new(freqs.iter().zip(amps).map(|(w, a)| a * (w * x).sin()).sum(), 0.0)
            }
            Repr::Exp(k) => Complex64::from_polar(1.0, *k as f64 * PI * x),
            Repr::Jacobi { k, rec } => {
                let mut v = vec![0.0; k + 1];
                rec.values_into(x.clamp(-1.0, 1.0), &mut v);
                Complex64::new(v[*k], 0.0)
            }
            Repr::Sampled { grid, values } => {
                let i = grid.partition_point(|g| *g <= x).clamp(1, grid.len() - 1);
                let t = (x - grid[i - 1]) / (grid[i] - grid[i - 1]);
                Complex64::new(values[i - 1] + t * (values[i] - values[i - 1]), 0.0)
            }
            Repr::Func(f) => Complex64::new(f(x), 0.0),
        }
    }

    /// ⟨f, ψ_n⟩ for n < count in closed form, when the representation allows it.
    pub fn closed_form_coefficients(&self, basis: &GpswfBasis, count: usize) -> Option<Result<Vec<Complex64>>> {
        let count = count.min(basis.nmax());
        match &self.repr {
            Repr::Cosine(amps) => Some(cosine_coefficients(basis, amps, count)),
            Repr::Sine { freqs, amps } => Some(sine_coefficients(basis, freqs, amps, count)),
            Repr::Exp(k) => Some(
                periodic_coefficients(basis, None, *k, count).map(|v| v.into_iter().map(|p| p.value).collect()),
            ),
            Repr::Jacobi { k, .. } if (self.jacobi_alpha() - basis.alpha()).abs() == 0.0 => {
                Some(Ok((0..count).map(|n| Complex64::new(basis.beta_k(n, *k), 0.0)).collect()))
            }
            _ => None,
        }
    }

    fn jacobi_alpha(&self) -> f64 {
        match &self.repr {
            Repr::Jacobi { rec, .. } => rec.params().alpha(),
            _ => f64::NAN,
        }
    }

    /// ‖f‖²_{L²(ω_α)} in closed form, when available.
    pub fn norm_sq(&self, alpha: f64) -> Option<Result<f64>> {
        match &self.repr {
            Repr::Cosine(amps) => Some(cosine_norm_sq(alpha, amps)),
            Repr::Sine { freqs, amps } => Some(sine_norm_sq(alpha, freqs, amps)),
            Repr::Exp(_) => Some(JacobiParams::new(alpha).map(|p| p.weight_integral())),
            Repr::Jacobi { .. } if self.jacobi_alpha() == alpha => Some(Ok(1.0)),
            _ => None,
        }
    }

    /// Σ_{j≤m} ‖f^{(j)}‖²_ω, for a single Jacobi mode or a periodic exponential.
    pub fn derivative_norm_sq(&self, alpha: f64, m: usize) -> Option<Result<f64>> {
        match &self.repr {
            Repr::Exp(k) => {
                let w = (*k as f64 * PI).powi(2);
                Some(JacobiParams::new(alpha).map(|p| p.weight_integral() * (0..=m).map(|j| w.powi(j as i32)).sum::<f64>()))
            }
            Repr::Jacobi { k, .. } => Some(jacobi_derivative_norm_sq(alpha, self.jacobi_alpha(), *k, m)),
            _ => None,
        }
    }

    /// Periodic coefficients b_k(f) = (1/√2) ∫ f(x) e^{-iπkx} dx, when known in closed form.
    pub fn periodic_fourier(&self) -> Option<Vec<(i64, Complex64)>> {
        match &self.repr {
            Repr::Exp(k) => Some(vec![(*k, Complex64::new(2f64.sqrt(), 0.0))]),
            Repr::Cosine(amps) => Some(
                amps.iter()
                    .enumerate()
                    .flat_map(|(i, a)| {
                        let k = (i + 1) as i64;
                        let b = Complex64::new(a / 2f64.sqrt(), 0.0);
                        [(-k, b), (k, b)]
                    })
                    .collect(),
            ),
            _ => None,
        }
    }
}

/// Σ_{j≤m} ‖J̃_k^{(j)}‖²_{ω_α} for J̃_k of weight exponent `mode_alpha`.
fn jacobi_derivative_norm_sq(alpha: f64, mode_alpha: f64, k: usize, m: usize) -> Result<f64> {
    let params = JacobiParams::new(alpha)?;
    let mp = JacobiParams::new(mode_alpha)?;
    let rule = gauss_jacobi(params, k + 2)?;
    let mut total = 0.0;
    for j in 0..=m.min(k) {
        // J̃_k^{(j)} = Π_{i<j} √((k-i)(k-i+2(α+i)+1)) J̃^{(α+j)}_{k-j}
        let mut scale = 1.0;
        let mut p = mp;
        for i in 0..j {
            let kk = (k - i) as f64;
            scale *= (kk * (kk + 2.0 * p.alpha() + 1.0)).sqrt();
            p = p.raised();
        }
        let rec = JacobiRecurrence::new(p, k - j);
        let sq = rule.integrate(|x| {
            let v = rec.values(x)[k - j] * scale;
            v * v
        });
        total += sq;
    }
    Ok(total)
}

fn cosine_coefficients(basis: &GpswfBasis, amps: &[f64], count: usize) -> Result<Vec<Complex64>> {
    let partial: Vec<Vec<f64>> = amps
        .par_iter()
        .enumerate()
        .map(|(i, &a)| -> Result<Vec<f64>> {
            if a == 0.0 {
                return Ok(vec![0.0; count]);
            }
            let k = (i + 1) as i64;
            let v = periodic_direct(basis, k as f64 * PI, count)?;
            Ok(v.iter().map(|z| a * z.re).collect())
        })
        .collect::<Result<_>>()?;
    Ok(sum_columns(&partial, count).into_iter().map(|v| Complex64::new(v, 0.0)).collect())
}

fn sine_coefficients(basis: &GpswfBasis, freqs: &[f64], amps: &[f64], count: usize) -> Result<Vec<Complex64>> {
    let partial: Vec<Vec<f64>> = freqs
        .par_iter()
        .zip(amps)
        .map(|(&w, &a)| -> Result<Vec<f64>> {
            let v = periodic_direct(basis, w, count)?;
            Ok(v.iter().map(|z| a * z.im).collect())
        })
        .collect::<Result<_>>()?;
    Ok(sum_columns(&partial, count).into_iter().map(|v| Complex64::new(v, 0.0)).collect())
}

fn sum_columns(rows: &[Vec<f64>], count: usize) -> Vec<f64> {
    let mut out = vec![0.0; count];
    for r in rows {
        for (o, v) in out.iter_mut().zip(r) {
            *o += v;
        }
    }
    out
}

/// ∫ cos(z x) ω_α(x) dx.
fn cos_moment(alpha: f64, z: f64) -> Result<f64> {
    kernel_k_alpha(alpha, z)
}

fn cosine_norm_sq(alpha: f64, amps: &[f64]) -> Result<f64> {
    // cos a cos b = (cos(a-b) + cos(a+b))/2, E[d] = ∫ cos(dπx) ω_α
    let kmax = amps.len();
    let table: Vec<f64> = (0..=2 * kmax).map(|d| cos_moment(alpha, d as f64 * PI)).collect::<Result<_>>()?;
    let total: f64 = (0..kmax)
        .into_par_iter()
        .map(|i| {
            let mut s = 0.0;
            for j in 0..kmax {
                let (k, l) = (i + 1, j + 1);
                s += amps[i] * amps[j] * 0.5 * (table[k.abs_diff(l)] + table[k + l]);
            }
            s
        })
        .sum();
    Ok(total)
}

fn sine_norm_sq(alpha: f64, freqs: &[f64], amps: &[f64]) -> Result<f64> {
    // sin a sin b = (cos(a-b) - cos(a+b))/2
    let mut total = 0.0;
    for i in 0..freqs.len() {
        for j in 0..freqs.len() {
            let d = cos_moment(alpha, (freqs[i] - freqs[j]).abs())?;
            let s = cos_moment(alpha, freqs[i] + freqs[j])?;
            total += amps[i] * amps[j] * 0.5 * (d - s);
        }
    }
    Ok(total)
}

/// ⟨e^{iωx}, ψ_n⟩ = Σ_m β_m^n i^m r_m(ω) for n < count, with the cancellation factor.
fn periodic_direct_with_kappa(basis: &GpswfBasis, omega: f64, count: usize) -> Result<Vec<(Complex64, f64)>> {
    let w = omega.abs();
    let r = transform_moduli(basis.params(), w, 1.0, basis.degree_bound())?;
    Ok((0..count)
        .map(|n| {
            let p = n % 2;
            let (mut sum, mut abs) = (0.0, 0.0);
            for (j, b) in basis.beta(n).iter().enumerate() {
                let t = if j % 2 == 0 { 1.0 } else { -1.0 } * b * r[2 * j + p];
                sum += t;
                abs += t.abs();
            }
            let mut v = if p == 0 { Complex64::new(sum, 0.0) } else { Complex64::new(0.0, sum) };
            if omega < 0.0 {
                v = v.conj();
            }
            let kappa = if sum == 0.0 { if abs == 0.0 { 1.0 } else { f64::INFINITY } } else { abs / sum.abs() };
            (v, kappa)
        })
        .collect())
}

fn periodic_direct(basis: &GpswfBasis, omega: f64, count: usize) -> Result<Vec<Complex64>> {
    Ok(periodic_direct_with_kappa(basis, omega, count)?.into_iter().map(|v| v.0).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicCoefficient {
    pub value: Complex64,
    /// Cancellation factor of the Jacobi sum.
    pub cancellation: f64,
    /// The value came from μ_n ψ_n(kπ/c) rather than the Jacobi sum.
    pub via_spectrum: bool,
}

/// ⟨e^{ikπx}, ψ_n⟩ for n < count. With a spectrum and |k|π ≤ c, ill-conditioned
/// sums are replaced by the exact value μ_n ψ_n(kπ/c).
pub fn periodic_coefficients(
    basis: &GpswfBasis,
    spectrum: Option<&[SpectrumEntry]>,
    k: i64,
    count: usize,
) -> Result<Vec<PeriodicCoefficient>> {
    let count = count.min(basis.nmax());
    let omega = k as f64 * PI;
    let direct = periodic_direct_with_kappa(basis, omega, count)?;
    direct
        .into_iter()
        .enumerate()
        .map(|(n, (value, cancellation))| {
            if let Some(sp) = spectrum {
                let x = omega / basis.c();
                if cancellation > DIRECT_SUM_LIMIT && x.abs() <= 1.0 && n < sp.len() {
                    let v = sp[n].mu() * basis.eval(n, x, 0)?;
                    return Ok(PeriodicCoefficient {
                        value: v,
                        cancellation,
                        via_spectrum: true,
                    });
                }
            }
            Ok(PeriodicCoefficient {
                value,
                cancellation,
                via_spectrum: false,
            })
        })
        .collect()
}

/// ⟨e^{ikπx}, ψ_n⟩ by the closed-form Jacobi sum.
pub fn periodic_coefficient(basis: &GpswfBasis, k: i64, n: usize) -> Result<Complex64> {
    if n >= basis.nmax() {
        return Err(Error::Index {
            index: n,
            limit: basis.nmax(),
        });
    }
    Ok(periodic_direct(basis, k as f64 * PI, n + 1)?[n])
}

/// C_n = ⟨M_{s,λ}, ψ_n⟩ from the Bessel double series; 0 for even n.
pub fn wm_coefficients_closed_form(basis: &GpswfBasis, s: f64, lambda: f64, n: usize, k_terms: Option<usize>) -> Result<f64> {
    if n >= basis.nmax() {
        return Err(Error::Index {
            index: n,
            limit: basis.nmax(),
        });
    }
    if n % 2 == 0 {
        return Ok(0.0);
    }
    let f = weierstrass_mandelbrot(s, lambda, k_terms)?;
    let c = f.closed_form_coefficients(basis, n + 1).expect("sine series")?;
    Ok(c[n].re)
}

/// ‖M_{s,λ}‖²_{L²(ω_α)} in closed form.
pub fn wm_norm_sq(alpha: f64, s: f64, lambda: f64, k_terms: Option<usize>) -> Result<f64> {
    weierstrass_mandelbrot(s, lambda, k_terms)?.norm_sq(alpha).expect("sine series")
}

/// How the L²(ω_α) error was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorRoute {
    /// Gauss–Jacobi quadrature of |f − S_N f|².
    Quadrature,
    /// ‖f‖² − Σ_{n<N} |⟨f, ψ_n⟩|² with closed-form norm and coefficients.
    Parseval,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub n_terms: usize,
    pub coefficients: Vec<Complex64>,
    pub l2w_error: f64,
    pub sup_error: f64,
    pub norm_sq: f64,
    pub route: ErrorRoute,
}

impl ProjectionResult {
    pub fn coefficient_mass(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Minimal quadrature order for [`project`]: twice the modes per parity plus 32.
pub fn quad_floor(basis: &GpswfBasis) -> usize {
    2 * basis.trunc() + 32
}

fn equispaced(count: usize) -> Vec<f64> {
    (0..count).map(|i| -1.0 + 2.0 * i as f64 / (count - 1) as f64).collect()
}

fn check_n(basis: &GpswfBasis, n: usize) -> Result<()> {
    if n > basis.nmax() {
        return Err(Error::Index {
            index: n,
            limit: basis.nmax(),
        });
    }
    Ok(())
}

/// Sup of |f − S_N f| over the 2001-point grid for each N in `ns`.
fn sup_errors(basis: &GpswfBasis, f: &TargetFunction, coeffs: &[Complex64], ns: &[usize]) -> Result<Vec<f64>> {
    let nmax_used = ns.iter().copied().max().unwrap_or(0);
    let grid = equispaced(SUP_GRID);
    let per_point: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&x| -> Result<Vec<f64>> {
            let psi = basis.eval_all(x, 0, nmax_used)?;
            let fx = f.eval(x);
            let mut partial = Complex64::new(0.0, 0.0);
            let mut errs = Vec::with_capacity(ns.len());
            let mut sorted: Vec<(usize, usize)> = ns.iter().copied().enumerate().collect();
            sorted.sort_by_key(|p| p.1);
            let mut tmp = vec![0.0; ns.len()];
            let mut done = 0;
            for (idx, n) in sorted {
                while done < n {
                    partial += coeffs[done] * psi[done];
                    done += 1;
                }
                tmp[idx] = (fx - partial).norm();
            }
            errs.extend(tmp);
            Ok(errs)
        })
        .collect::<Result<_>>()?;
    Ok((0..ns.len())
        .map(|i| per_point.iter().map(|e| e[i]).fold(0.0, f64::max))
        .collect())
}

/// S_N f with coefficients and the L² error by Gauss–Jacobi quadrature of order `quad_order`.
pub fn project(basis: &GpswfBasis, f: &TargetFunction, n: usize, quad_order: usize) -> Result<ProjectionResult> {
    check_n(basis, n)?;
    let floor = quad_floor(basis);
    if quad_order < floor {
        return Err(Error::Config(format!("quadrature order {quad_order} below the floor {floor}")));
    }
    let rule = gauss_jacobi(basis.params(), quad_order)?;
    let samples: Vec<(Complex64, Vec<f64>)> = rule
        .nodes()
        .par_iter()
        .map(|&x| Ok((f.eval(x), basis.eval_all(x, 0, n)?)))
        .collect::<Result<_>>()?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    let mut norm_sq = 0.0;
    for ((fx, psi), w) in samples.iter().zip(rule.weights()) {
        norm_sq += w * fx.norm_sqr();
        for (c, p) in coeffs.iter_mut().zip(psi) {
            *c += fx * (w * p);
        }
    }
    let mut err_sq = 0.0;
    for ((fx, psi), w) in samples.iter().zip(rule.weights()) {
        let s: Complex64 = coeffs.iter().zip(psi).map(|(c, p)| c * p).sum();
        err_sq += w * (fx - s).norm_sqr();
    }
    let sup = sup_errors(basis, f, &coeffs, &[n])?[0];
    Ok(ProjectionResult {
        n_terms: n,
        coefficients: coeffs,
        l2w_error: err_sq.sqrt(),
        sup_error: sup,
        norm_sq,
        route: ErrorRoute::Quadrature,
    })
}

/// Projections for every N in `ns` from closed-form coefficients and norm,
/// with the L² error from Parseval's identity.
pub fn project_closed_form(basis: &GpswfBasis, f: &TargetFunction, ns: &[usize]) -> Result<Vec<ProjectionResult>> {
    let nmax_used = ns.iter().copied().max().unwrap_or(0);
    check_n(basis, nmax_used)?;
    let coeffs = f
        .closed_form_coefficients(basis, nmax_used)
        .ok_or_else(|| Error::Config(format!("{} has no closed-form coefficients", f.label())))??;
    let norm_sq = f
        .norm_sq(basis.alpha())
        .ok_or_else(|| Error::Config(format!("{} has no closed-form norm", f.label())))??;
    let sups = sup_errors(basis, f, &coeffs, ns)?;
    Ok(ns
        .iter()
        .zip(sups)
        .map(|(&n, sup)| {
            let mass: f64 = coeffs[..n].iter().map(|c| c.norm_sqr()).sum();
            ProjectionResult {
                n_terms: n,
                coefficients: coeffs[..n].to_vec(),
                l2w_error: (norm_sq - mass).max(0.0).sqrt(),
                sup_error: sup,
                norm_sq,
                route: ErrorRoute::Parseval,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SobolevStyle {
    /// Σ_n (1 + (n(n+2α+1))^{2s}) |v̂_n|², the displayed coefficient norm.
    JacobiCoefficient,
    /// Σ_k (1 + (kπ)²)^s |b_k|².
    PeriodicFourier,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevNorm {
    pub s: f64,
    pub value: f64,
    pub style: SobolevStyle,
}

/// Weighted coefficient sum; `coeffs` holds (index, |coefficient|) pairs and
/// `alpha` is used by the Jacobi style only.
pub fn sobolev_norm(coeffs: &[(i64, f64)], s: f64, alpha: f64, style: SobolevStyle) -> Result<SobolevNorm> {
    if !s.is_finite() || s < 0.0 {
        return Err(Error::domain(format!("smoothness must be >= 0, got {s}")));
    }
    let mut value = 0.0f64;
    for &(k, v) in coeffs {
        let w = match style {
            SobolevStyle::JacobiCoefficient => {
                if k < 0 {
                    return Err(Error::domain("Jacobi coefficient indices must be >= 0"));
                }
                let kf = k as f64;
                1.0 + (kf * (kf + 2.0 * alpha + 1.0)).powf(2.0 * s)
            }
            SobolevStyle::PeriodicFourier => (1.0 + (k as f64 * PI).powi(2)).powf(s),
        };
        value += w * v * v;
        if !value.is_finite() {
            return Err(Error::Magnitude(format!("weighted sum overflows at index {k}")));
        }
    }
    Ok(SobolevNorm { s, value, style })
}

/// ln Σ_{n>N} χ_n^{-2m}, with the bracket midpoint beyond the computed χ.
fn ln_chi_tail(basis: &GpswfBasis, n: usize, m: f64) -> f64 {
    let a = basis.alpha();
    let c2 = basis.c() * basis.c();
    let chi = |j: usize| -> f64 {
        basis.chi().get(j).copied().unwrap_or_else(|| {
            let jf = j as f64;
            jf * (jf + 2.0 * a + 1.0) + 0.5 * c2
        })
    };
    let first = chi(n + 1);
    // terms are scaled by χ_{N+1}^{2m} to remain representable
    let mut sum = 0.0;
    let last = n + 1 + 200_000;
    for j in n + 1..last {
        let t = (first / chi(j)).powf(2.0 * m);
        sum += t;
        if t < 1e-17 * sum {
            break;
        }
        if j + 1 == last {
            // ∫_L^∞ (first/x²)^{2m} dx
            let l = last as f64;
            sum += first.powf(2.0 * m) * l.powf(1.0 - 4.0 * m) / (4.0 * m - 1.0);
        }
    }
    sum.ln() - 2.0 * m * first.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothBoundRow {
    pub n_terms: usize,
    pub error_sq: f64,
    pub ln_tail: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothBoundVerdict {
    pub m: f64,
    pub rows: Vec<SmoothBoundRow>,
    pub max_ratio: f64,
    pub tail_decreasing: bool,
    /// log-log slope of the error over the second half of the rows.
    pub slope: Option<f64>,
    pub bounded: bool,
    pub rate_holds: bool,
}

/// Ratio ‖f − S_N f‖² / (Σ_{n>N} χ_n^{-2m} ‖f‖²_{m+2,α}) across N; the
/// unspecified constant is replaced by the caller's `limit` on the ratio.
pub fn error_bound_check_smooth(
    basis: &GpswfBasis,
    projections: &[ProjectionResult],
    norm_m2_sq: f64,
    m: f64,
    limit: f64,
) -> SmoothBoundVerdict {
    let rows: Vec<SmoothBoundRow> = projections
        .iter()
        .map(|p| {
            let ln_tail = ln_chi_tail(basis, p.n_terms, m);
            let error_sq = p.l2w_error * p.l2w_error;
            SmoothBoundRow {
                n_terms: p.n_terms,
                error_sq,
                ln_tail,
                ratio: (error_sq.ln() - ln_tail - norm_m2_sq.ln()).exp(),
            }
        })
        .collect();
    let max_ratio = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let tail_decreasing = rows.windows(2).all(|w| w[1].n_terms <= w[0].n_terms || w[1].ln_tail < w[0].ln_tail);
    let half = &rows[rows.len() / 2..];
    let pts: Vec<(f64, f64)> = half
        .iter()
        .filter(|r| r.error_sq > 0.0)
        .map(|r| ((r.n_terms as f64).ln(), 0.5 * r.error_sq.ln()))
        .collect();
    let slope = linear_fit(&pts).map(|(s, _)| s);
    SmoothBoundVerdict {
        m,
        rows,
        max_ratio,
        tail_decreasing,
        slope,
        bounded: max_ratio <= limit,
        rate_holds: slope.is_none_or(|s| s <= -2.0 * m + 0.2),
    }
}

/// Least-squares line y = slope·x + intercept.
pub fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MainBoundRow {
    pub n_terms: usize,
    pub applicable: bool,
    pub error: f64,
    pub algebraic: f64,
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainBoundVerdict {
    pub s: f64,
    pub threshold: f64,
    pub rows: Vec<MainBoundRow>,
    /// Fitted A, a of the exponential part A e^{-aN} ‖f‖.
    pub fit: Option<(f64, f64)>,
    pub holds: bool,
}

/// Errors below this are treated as rounding noise when fitting the exponential part.
const FIT_FLOOR: f64 = 1e-13;

/// Checks ‖f − S_N f‖ ≤ (1+(N/2)²)^{-s/2} ‖f‖_{H^s} + A e^{-aN} ‖f‖ for N > m_α c,
/// with A and a fitted from the measured errors.
pub fn error_bound_check_main(
    basis: &GpswfBasis,
    projections: &[ProjectionResult],
    hs_norm: f64,
    l2_norm: f64,
    s: f64,
) -> MainBoundVerdict {
    let threshold = m_alpha(basis.alpha()) * basis.c();
    let algebraic = |n: usize| (1.0 + (n as f64 / 2.0).powi(2)).powf(-0.5 * s) * hs_norm;
    let applicable: Vec<&ProjectionResult> = projections.iter().filter(|p| p.n_terms as f64 > threshold).collect();
    let pts: Vec<(f64, f64)> = applicable
        .iter()
        .filter(|p| p.l2w_error > FIT_FLOOR)
        .map(|p| (p.n_terms as f64, (p.l2w_error / l2_norm).ln()))
        .collect();
    let fit = linear_fit(&pts).map(|(slope, _)| {
        let a = -slope;
        // smallest A making the envelope hold at every fitted point
        let ln_a = pts.iter().map(|(n, y)| y + a * n).fold(f64::NEG_INFINITY, f64::max);
        (ln_a.exp(), a)
    });
    let rows: Vec<MainBoundRow> = projections
        .iter()
        .map(|p| {
            let app = p.n_terms as f64 > threshold;
            let alg = algebraic(p.n_terms);
            let expo = fit.map_or(0.0, |(a_coef, a)| a_coef * (-a * p.n_terms as f64).exp() * l2_norm);
            MainBoundRow {
                n_terms: p.n_terms,
                applicable: app,
                error: p.l2w_error,
                algebraic: alg,
                envelope: alg + expo + FIT_FLOOR,
            }
        })
        .collect();
    let holds = fit.is_some_and(|(_, a)| a > 0.0)
        && rows.iter().filter(|r| r.applicable).all(|r| r.error <= r.envelope * (1.0 + 1e-12));
    MainBoundVerdict {
        s,
        threshold,
        rows,
        fit,
        holds,
    }
}
