//! Shared numerical kernels: exact and log-domain combinatorics, complex gamma.

mod combinatorics;
mod gamma;

pub(crate) use combinatorics::ln_binomial_unchecked;
pub use combinatorics::{
    binomial_exact, binomial_upper_tail, ln_binomial, ln_factorial, ln_poisson_pmf, poisson_upper_tail,
};
pub use gamma::{complex_gamma, ComplexValue};

/// Arbitrary-precision rational in lowest terms with a positive denominator.
pub type BigRational = num_rational::BigRational;

/// Sums `terms` in order of increasing magnitude.
pub fn sum_by_magnitude(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    terms.iter().sum()
}
