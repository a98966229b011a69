//! Scalar special functions and symmetric Jacobi polynomial machinery.

mod bessel;
mod gamma;
mod jacobi;
mod quadrature;

pub use bessel::{bessel_j, bessel_j_scaled, bessel_j_sequence};
pub use gamma::{gamma, gamma_bracket_ln, ln_beta, ln_gamma};
pub use jacobi::{
    derivative_coefficients, jacobi_normalized, jacobi_normalized_derivative, JacobiParams,
    JacobiRecurrence,
};
pub use quadrature::{gauss_jacobi, QuadratureRule};

pub(crate) use gamma::lgamma;

/// Upper bound |x|^ν / (2^ν Γ(ν+1)) on |J_ν(x)|, in log space.
pub fn bessel_bound_ln(nu: f64, x: f64) -> f64 {
    nu * (0.5 * x.abs()).ln() - lgamma(nu + 1.0)
}
