//! Frozen reference values from independent computations.
//!
//! χ_n for integer α = m comes from the associated prolate eigenvalue:
//! substituting S = (1−x²)^{m/2} u maps the prolate equation of order m onto
//! the GPSWF equation, so χ_n = λ_{m, m+n}(c) − m(m+1) (SciPy `pro_cv`).
//! λ_n comes from a 40-digit dense eigensolve in the orthonormal Jacobi basis
//! with μ_n obtained by adaptive quadrature of the defining integral.

use gpswf::gpswf::build_basis;
use gpswf::spectral::compute_spectrum;

const NS: [usize; 5] = [0, 1, 2, 5, 9];

const CHI: [(f64, f64, [f64; 5]); 9] = [
    (0.0, 1.0, [0.31900005514689334, 2.5930845799771327, 6.533471800523824, 30.505404625322107, 90.50175683631427]),
    (0.0, 4.0, [3.172067422197472, 9.805943840988842, 15.306299996189054, 38.36713791897159, 98.11380568405409]),
    (0.0, 10.0, [9.228304297249906, 28.133463732826797, 45.86895265023473, 89.73926723888567, 143.87200803747766]),
    (1.0, 1.0, [0.19554835541300175, 4.424699143775136, 10.46791533039147, 40.491577951282395, 108.49684145514364]),
    (1.0, 4.0, [2.3995930671655064, 9.948719383823484, 17.46526053986633, 48.02143812814028, 116.01504493828685]),
    (1.0, 10.0, [8.287768767391487, 27.33891804161454, 45.30151547659264, 92.62199607064986, 160.36687855036254]),
    (2.0, 1.0, [0.14094899185769982, 6.331101512992021, 14.402353049518851, 50.466398085669084, 126.48591149420321]),
    (2.0, 4.0, [1.903860949601798, 10.812958507566513, 20.293486618161165, 57.53577534348759, 133.82141405806374]),
    (2.0, 10.0, [7.463084318743563, 26.93817832184915, 45.5248465577212, 97.5984691327835, 176.3934979101852]),
];

const LAMBDA: [(f64, f64, [f64; 5]); 3] = [
    (0.0, 1.0, [0.57258178063789512, 0.062791274149803334, 0.0012374793284659967, 9.491436733967156848e-11, 1.646621398343321113e-22]),
    (0.0, 4.0, [0.99588549042966734, 0.91210742406502460, 0.51905483745431135, 0.00038129172172421884, 4.4938297023178238e-11]),
    (1.0, 4.0, [0.72927447733474016, 0.31367276550216725, 0.078209912897369596, 0.000028182749181572102, 3.1975700604550338e-12]),
];

#[test]
fn chi_matches_associated_prolate_eigenvalues() {
    for (alpha, c, want) in CHI {
        let b = build_basis(alpha, c, 10).unwrap();
        for (n, w) in NS.iter().zip(want) {
            let got = b.chi()[*n];
            assert!((got - w).abs() <= 1e-11 * w.abs().max(1.0), "alpha={alpha} c={c} n={n}: {got} vs {w}");
        }
    }
}

#[test]
fn lambda_matches_high_precision_oracle() {
    for (alpha, c, want) in LAMBDA {
        let b = build_basis(alpha, c, 10).unwrap();
        let sp = compute_spectrum(&b).unwrap();
        for (n, w) in NS.iter().zip(want) {
            let got = sp[*n].lambda;
            assert!((got - w).abs() <= 1e-10 * w, "alpha={alpha} c={c} n={n}: {got:e} vs {w:e}");
        }
    }
}

#[test]
fn legendre_limit_of_small_bandwidth() {
    let b = build_basis(0.5, 1e-4, 6).unwrap();
    for n in 0..6 {
        let nf = n as f64;
        assert!((b.chi()[n] - nf * (nf + 2.0)).abs() < 1e-7);
    }
}
