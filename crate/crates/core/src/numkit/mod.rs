//! Numerical kit: dense matrices, special functions, seeded randomness and
//! Gamma sampling.

mod gamma;
mod matrix;
mod rng;
mod special;

pub use gamma::{gamma_log_pdf, reparam_admissible, reparam_gamma, reparam_gamma_dalpha, sample_gamma};
pub use matrix::Matrix;
pub use rng::Rng;
pub use special::{digamma, gamma_cdf, lgamma, regularized_lower_gamma, trigamma};

pub(crate) use special::{digamma_unchecked, lgamma_unchecked, trigamma_unchecked};
