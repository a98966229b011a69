//! Bessel functions of the first kind J_ν(x) for real order ν ≥ -1/2 and x ≥ 0.
//!
//! Three regimes:
//! * ascending series when x²/4 ≤ ν + 1 (no cancellation);
//! * Miller backward recurrence normalised by the Neumann sum
//!   (x/2)^ν₀ = Σ_k (ν₀+2k) Γ(ν₀+k)/k! J_{ν₀+2k}(x) for x below [`HANKEL_MIN_X`];
//! * Hankel asymptotics for the two lowest orders, forward recurrence while the
//!   order is below x, and a matched backward recurrence above it.

use super::gamma::lgamma;
use crate::error::{Error, Result};

/// Arguments at or above this use the Hankel expansion for the base orders.
const HANKEL_MIN_X: f64 = 30.0;

/// Rescaling step for the backward recurrence, 2^600.
const SCALE_EXP: i32 = 600;

/// J_ν(x).
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    check_args(nu, x)?;
    if x == 0.0 {
        return at_origin(nu);
    }
    if 0.25 * x * x <= nu + 1.0 {
        return Ok(ascending_series(nu, x));
    }
    let (base, n) = split_order(nu);
    Ok(ladder(base, x, n)[n])
}

/// J_ν(x) / (x/2)^ν, finite at x = 0 where it equals 1/Γ(ν+1).
pub fn bessel_j_scaled(nu: f64, x: f64) -> Result<f64> {
    check_args(nu, x)?;
    if x == 0.0 {
        return Ok((-lgamma(nu + 1.0)).exp());
    }
    if 0.25 * x * x <= nu + 1.0 {
        return Ok(ascending_sum(nu, x) * (-lgamma(nu + 1.0)).exp());
    }
    let (base, n) = split_order(nu);
    let j = ladder(base, x, n)[n];
    Ok(j * (-nu * (0.5 * x).ln()).exp())
}

/// J_{ν+k}(x) for k = 0..count.
pub fn bessel_j_sequence(nu: f64, x: f64, count: usize) -> Result<Vec<f64>> {
    check_args(nu, x)?;
    if count == 0 {
        return Ok(Vec::new());
    }
    if x == 0.0 {
        let mut out = vec![0.0; count];
        out[0] = at_origin(nu)?;
        return Ok(out);
    }
    let (base, n) = split_order(nu);
    let full = ladder(base, x, n + count - 1);
    Ok(full[n..n + count].to_vec())
}

fn check_args(nu: f64, x: f64) -> Result<()> {
    if !nu.is_finite() || nu < -0.5 {
        return Err(Error::domain(format!("Bessel order must be >= -1/2, got {nu}")));
    }
    if !x.is_finite() || x < 0.0 {
        return Err(Error::domain(format!("Bessel argument must be finite and >= 0, got {x}")));
    }
    Ok(())
}

fn at_origin(nu: f64) -> Result<f64> {
    if nu == 0.0 {
        Ok(1.0)
    } else if nu > 0.0 {
        Ok(0.0)
    } else {
        Err(Error::domain(format!("J_{nu}(x) is singular at x = 0")))
    }
}

/// Splits ν into a base order in [-1/2, 1) and an integer offset.
fn split_order(nu: f64) -> (f64, usize) {
    if nu < 0.0 {
        (nu, 0)
    } else {
        let n = nu.floor();
        (nu - n, n as usize)
    }
}

fn ascending_sum(nu: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..500 {
        let kf = k as f64;
        term *= q / (kf * (nu + kf));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

fn ascending_series(nu: f64, x: f64) -> f64 {
    let log_pref = nu * (0.5 * x).ln() - lgamma(nu + 1.0);
    ascending_sum(nu, x) * log_pref.exp()
}

/// J_{base+n}(x) for n = 0..=top, with x > 0 and base in [-1/2, 1).
pub(crate) fn ladder(base: f64, x: f64, top: usize) -> Vec<f64> {
    if x < HANKEL_MIN_X {
        miller_neumann(base, x, top)
    } else {
        hankel_forward(base, x, top)
    }
}

fn miller_start(x: f64, top: usize) -> usize {
    let reach = (top as f64).max(x.ceil());
    (reach + 15.0 * x.max(1.0).cbrt() + 20.0).ceil() as usize
}

/// Backward recurrence from `start` down to order index 0, returning raw
/// values and the rescale count active when each entry was produced.
struct Backward {
    raw: Vec<f64>,
    scale: Vec<i32>,
    final_scale: i32,
    neumann: f64,
}

fn backward(base: f64, x: f64, start: usize, neumann: bool) -> Backward {
    let big = 2f64.powi(SCALE_EXP);
    let small = 2f64.powi(-SCALE_EXP);
    let mut raw = vec![0.0; start + 2];
    let mut scale = vec![0; start + 2];
    raw[start] = 1e-200;
    let mut g = 0;

    // Neumann weights c_k = (ν₀+2k) Γ(ν₀+k)/k!, index n = 2k.
    let weight = |k: usize, gk: f64| {
        if k == 0 {
            (lgamma(base + 1.0)).exp()
        } else {
            (base + 2.0 * k as f64) * gk
        }
    };
    // Γ(ν₀+k)/k! for all k up to start/2, filled forward.
    let mut gks = Vec::new();
    if neumann {
        let kmax = start / 2 + 1;
        gks.resize(kmax + 1, 0.0);
        if kmax >= 1 {
            gks[1] = lgamma(base + 1.0).exp();
            for k in 1..kmax {
                gks[k + 1] = gks[k] * (base + k as f64) / (k as f64 + 1.0);
            }
        }
    }
    let mut sum = 0.0;
    if neumann && start % 2 == 0 {
        sum += weight(start / 2, gks[start / 2]) * raw[start];
    }
    for n in (1..=start).rev() {
        let order = base + n as f64;
        let next = 2.0 * order / x * raw[n] - raw[n + 1];
        raw[n - 1] = next;
        scale[n - 1] = g;
        if next.abs() > big {
            raw[n - 1] *= small;
            raw[n] *= small;
            sum *= small;
            g += 1;
            scale[n - 1] = g;
            scale[n] = g;
        }
        if neumann && (n - 1) % 2 == 0 {
            let k = (n - 1) / 2;
            let gk = if k == 0 { 0.0 } else { gks[k] };
            sum += weight(k, gk) * raw[n - 1];
        }
    }
    // raw[start] and raw[start+1] keep their original frame
    Backward {
        raw,
        scale,
        final_scale: g,
        neumann: sum,
    }
}

fn unscale(b: &Backward, n: usize, factor: f64) -> f64 {
    let d = b.final_scale - b.scale[n];
    let mut v = b.raw[n] * factor;
    for _ in 0..d {
        v *= 2f64.powi(-SCALE_EXP);
        if v == 0.0 {
            break;
        }
    }
    v
}

fn miller_neumann(base: f64, x: f64, top: usize) -> Vec<f64> {
    let start = miller_start(x, top);
    let b = backward(base, x, start, true);
    let factor = (base * (0.5 * x).ln()).exp() / b.neumann;
    (0..=top).map(|n| unscale(&b, n, factor)).collect()
}

fn hankel_forward(base: f64, x: f64, top: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(top + 1);
    out.push(hankel(base, x));
    if top == 0 {
        return out;
    }
    out.push(hankel(base + 1.0, x));
    let mut n = 1;
    while n < top && base + (n as f64) < x {
        let order = base + n as f64;
        let next = 2.0 * order / x * out[n] - out[n - 1];
        out.push(next);
        n += 1;
    }
    if n == top {
        return out;
    }
    // Orders above x: backward recurrence matched to the forward value.
    let start = miller_start(x, top);
    let b = backward(base, x, start, false);
    let pick = if out[n].abs() >= out[n - 1].abs() { n } else { n - 1 };
    let anchor = unscale(&b, pick, 1.0);
    let factor = out[pick] / anchor;
    for m in n + 1..=top {
        out.push(unscale(&b, m, factor));
    }
    out
}

/// Hankel asymptotic expansion of J_μ(x), accurate for x ≥ 30 and μ < 2.
fn hankel(mu: f64, x: f64) -> f64 {
    let m4 = 4.0 * mu * mu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200 {
        let odd = (2 * k - 1) as f64;
        term *= (m4 - odd * odd) / (k as f64 * 8.0 * x);
        let mag = term.abs();
        if mag > prev {
            break;
        }
        prev = mag;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if mag < 1e-18 * p.abs() {
            break;
        }
    }
    let phase = (0.5 * mu + 0.25) * std::f64::consts::PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    // cos(x - phase), sin(x - phase)
    let cw = cx * cp + sx * sp;
    let sw = sx * cp - cx * sp;
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * cw - q * sw)
}
