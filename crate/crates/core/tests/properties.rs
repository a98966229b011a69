use gpswf::approx::{self, sobolev_norm, SobolevStyle, TargetFunction};
use gpswf::eigensolver::{eig_symtridiag, SymTridiag};
use gpswf::experiments::{decode_basis, encode_basis};
use gpswf::gpswf::{build_basis, chi_bracket_check, GpswfBasis};
use gpswf::specfun::{gauss_jacobi, ln_beta, JacobiParams, JacobiRecurrence};
use gpswf::spectral::compute_spectrum;
use proptest::prelude::*;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn tridiagonal_eigenpairs(diag in prop::collection::vec(-100.0f64..100.0, 50), off in prop::collection::vec(-50.0f64..50.0, 49)) {
        let t = SymTridiag::new(diag, off).unwrap();
        let e = eig_symtridiag(&t).unwrap();
        let scale = t.diag().iter().chain(t.offdiag()).map(|v| v.abs()).fold(1.0, f64::max);
        for i in 0..50 {
            prop_assert!(t.residual(e.values()[i], e.vector(i)) <= 1e-10 * scale);
        }
        prop_assert!(e.values().windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(e.orthonormality_defect() <= 1e-10);
    }

    #[test]
    fn quadrature_exact_for_even_monomials(alpha in 0.0f64..4.0, m in 2usize..40) {
        let rule = gauss_jacobi(JacobiParams::new(alpha).unwrap(), m).unwrap();
        for j in 0..m {
            // ∫ x^{2j} (1−x²)^α dx = B(j+1/2, α+1)
            let exact = ln_beta(j as f64 + 0.5, alpha + 1.0).unwrap().exp();
            let got = rule.integrate(|x| x.powi(2 * j as i32));
            prop_assert!((got - exact).abs() <= 1e-12 * exact.max(1e-300) * (1.0 + j as f64), "j={} {} {}", j, got, exact);
        }
    }

    #[test]
    fn basis_invariants(alpha in 0.0f64..3.0, c in 0.2f64..25.0) {
        let b = build_basis(alpha, c, 20).unwrap();
        for n in 0..20 {
            prop_assert!(chi_bracket_check(&b, n).unwrap().holds);
            let norm: f64 = b.beta(n).iter().map(|v| v * v).sum();
            prop_assert!((norm - 1.0).abs() < 1e-13);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            for &x in &[0.13, 0.5, 0.91] {
                prop_assert_eq!(b.eval(n, -x, 0).unwrap(), sign * b.eval(n, x, 0).unwrap());
            }
        }
        prop_assert!(b.chi().windows(2).all(|w| w[0] < w[1]));
        let sp = compute_spectrum(&b).unwrap();
        prop_assert!(sp.iter().all(|e| e.lambda > 0.0 && e.lambda <= 1.0 + 1e-12));
        prop_assert!(sp.windows(2).all(|w| w[0].ln_lambda > w[1].ln_lambda));
    }

    #[test]
    fn cache_payload_round_trips(alpha in 0.0f64..3.0, c in 0.5f64..10.0, nmax in 1usize..12) {
        let b = build_basis(alpha, c, nmax).unwrap();
        let (v, back): (u32, GpswfBasis) = decode_basis(&encode_basis(&b, 7)).unwrap();
        prop_assert_eq!(v, 7);
        prop_assert_eq!(back, b);
    }

    #[test]
    fn periodic_sobolev_at_zero_is_coefficient_mass(coeffs in prop::collection::vec((-50i64..50, -3.0f64..3.0), 1..30)) {
        let v = sobolev_norm(&coeffs, 0.0, 0.0, SobolevStyle::PeriodicFourier).unwrap();
        let mass: f64 = coeffs.iter().map(|(_, b)| b * b).sum();
        prop_assert!((v.value - mass).abs() <= 1e-15 * mass.max(1.0));
    }
}

proptest! {
    #![proptest_config(cfg(12))]

    #[test]
    fn projection_parseval_and_monotone(seed in 0u64..1000, k in -6i64..6) {
        let b = build_basis(0.5, 6.0, 40).unwrap();
        let f = approx::brownian(1.2, seed, 30).unwrap();
        let order = approx::quad_floor(&b) + 200;
        let mut last = f64::INFINITY;
        for n in [5, 10, 20, 40] {
            let p = approx::project(&b, &f, n, order).unwrap();
            prop_assert!(p.coefficient_mass() <= p.norm_sq * (1.0 + 1e-12));
            prop_assert!(p.l2w_error <= last * (1.0 + 1e-9));
            last = p.l2w_error;
        }
        let e = approx::periodic_exponential(k);
        let p = approx::project(&b, &e, 40, order).unwrap();
        prop_assert!(p.coefficient_mass() <= p.norm_sq * (1.0 + 1e-12));
    }
}

#[test]
fn jacobi_orthonormality() {
    for &alpha in &[0.0, 0.5, 1.5] {
        let params = JacobiParams::new(alpha).unwrap();
        let rule = gauss_jacobi(params, 24).unwrap();
        let rec = JacobiRecurrence::new(params, 20);
        let vals: Vec<Vec<f64>> = rule.nodes().iter().map(|&x| rec.values(x)).collect();
        for i in 0..=20 {
            for j in 0..=20 {
                let g: f64 = vals.iter().zip(rule.weights()).map(|(v, w)| w * v[i] * v[j]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() <= 1e-12, "alpha={alpha} ({i},{j}) {g}");
            }
        }
    }
}

#[test]
fn beta_function_moment() {
    // ∫ x⁸ √(1−x²) dx = B(4.5, 1.5)
    let rule = gauss_jacobi(JacobiParams::new(0.5).unwrap(), 5).unwrap();
    let got = rule.integrate(|x| x.powi(8));
    let exact = ln_beta(4.5, 1.5).unwrap().exp();
    assert!((got - exact).abs() < 1e-15, "{got} {exact}");
    assert!((exact - 7.0 * std::f64::consts::PI / 256.0).abs() < 1e-15);
}

#[test]
fn main_bound_for_an_entire_function() {
    let b = build_basis(0.5, 1.0, 40).unwrap();
    let f = approx::periodic_exponential(3);
    let ns: Vec<usize> = (8..=30).step_by(2).collect();
    // the Parseval route bottoms out near sqrt(eps), so integrate the residual instead
    let order = approx::quad_floor(&b) + 64;
    let projs: Vec<_> = ns.iter().map(|&n| approx::project(&b, &f, n, order).unwrap()).collect();
    let hs: f64 = f
        .periodic_fourier()
        .unwrap()
        .iter()
        .map(|(k, v)| (1.0 + (*k as f64 * std::f64::consts::PI).powi(2)) * v.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let l2 = f.norm_sq(0.5).unwrap().unwrap().sqrt();
    let v = approx::error_bound_check_main(&b, &projs, hs, l2, 1.0);
    assert!(v.holds, "{v:?}");
    assert!(v.fit.unwrap().1 > 0.0);
}

#[test]
fn smooth_bound_ratio_for_jacobi_mode() {
    let b = build_basis(0.0, 3.0, 80).unwrap();
    let f = TargetFunction::from_spec(&approx::TargetSpec::JacobiMode { k: 6, alpha: 0.0 }).unwrap();
    let ns: Vec<usize> = (4..=30).step_by(2).collect();
    let projs = approx::project_closed_form(&b, &f, &ns).unwrap();
    let m = 1.0;
    let norm = f.derivative_norm_sq(0.0, 3).unwrap().unwrap();
    let v = approx::error_bound_check_smooth(&b, &projs, norm, m, 1e6);
    assert!(v.bounded && v.tail_decreasing, "{v:?}");
}
