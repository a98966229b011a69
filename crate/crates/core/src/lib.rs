//! Generalized prolate spheroidal wave functions (GPSWFs) on [-1, 1] with the
//! Gegenbauer weight ω_α(x) = (1-x²)^α.
//!
//! The crate builds GPSWF bases from their Jacobi expansions, computes the
//! eigenvalues χ_n, μ_n and λ_n, checks the known eigenvalue and
//! eigenfunction bounds, and projects functions onto truncated GPSWF series.
//!
//! ```
//! use gpswf::gpswf::build_basis;
//! use gpswf::spectral::compute_spectrum;
//!
//! let basis = build_basis(0.5, 4.0, 12).unwrap();
//! let spectrum = compute_spectrum(&basis).unwrap();
//! assert!(spectrum[0].lambda > spectrum[1].lambda);
//! ```

pub mod approx;
pub mod eigensolver;
pub mod error;
pub mod experiments;
pub mod gpswf;
pub mod spectral;
pub mod specfun;

pub use error::{Error, Result};
