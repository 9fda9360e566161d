//! Gamma density, the shape-only reparameterization transform and its
//! derivative, and an exact Gamma sampler built on the same transform.

use super::rng::Rng;
use super::special::lgamma_unchecked;
use crate::error::{Error, Result};

const ONE_THIRD: f64 = 1.0 / 3.0;

/// Log density of Gamma(shape `alpha`, rate `beta`) at `z`:
/// `(α−1)·ln z − β·z + α·ln β − ln Γ(α)`.
pub fn gamma_log_pdf(z: f64, alpha: f64, beta: f64) -> Result<f64> {
    for (what, value) in [("gamma z", z), ("gamma shape", alpha), ("gamma rate", beta)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Domain { what, value });
        }
    }
    Ok((alpha - 1.0) * z.ln() - beta * z + alpha * beta.ln() - lgamma_unchecked(alpha))
}

fn transform_base(epsilon: f64, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha >= 1.0) || !alpha.is_finite() {
        return Err(Error::Domain {
            what: "reparameterization shape (needs alpha >= 1)",
            value: alpha,
        });
    }
    let spread = (9.0 * alpha - 3.0).sqrt();
    let base = 1.0 + epsilon / spread;
    if !(base > 0.0) {
        return Err(Error::Domain {
            what: "reparameterization base 1 + eps/sqrt(9 alpha - 3)",
            value: base,
        });
    }
    Ok((base, spread))
}

/// Maps standard normal noise `epsilon` to a Gamma(α, 1) proposal:
/// `z = (α − 1/3)·(1 + ε/√(9α−3))³`.
pub fn reparam_gamma(epsilon: f64, alpha: f64) -> Result<f64> {
    let (base, _) = transform_base(epsilon, alpha)?;
    Ok((alpha - ONE_THIRD) * base * base * base)
}

/// ∂z/∂α of [`reparam_gamma`] with ε held fixed.
///
/// With s = √(9α−3) and b = 1 + ε/s this simplifies to `b²·(1 − ε/(2s))`.
pub fn reparam_gamma_dalpha(epsilon: f64, alpha: f64) -> Result<f64> {
    let (base, spread) = transform_base(epsilon, alpha)?;
    Ok(base * base * (1.0 - epsilon / (2.0 * spread)))
}

/// True when `epsilon` yields a valid (positive) transform at `alpha ≥ 1`.
pub fn reparam_admissible(epsilon: f64, alpha: f64) -> bool {
    1.0 + epsilon / (9.0 * alpha - 3.0).sqrt() > 0.0
}

/// Exact draw from Gamma(shape `alpha`, rate `beta`).
///
/// For α ≥ 1 this is the Marsaglia–Tsang rejection loop around
/// [`reparam_gamma`]; for α < 1 a Gamma(α + 1) draw is scaled by `u^{1/α}`.
pub fn sample_gamma(rng: &mut Rng, alpha: f64, beta: f64) -> Result<f64> {
    for (what, value) in [("gamma shape", alpha), ("gamma rate", beta)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Domain { what, value });
        }
    }
    if alpha < 1.0 {
        let boosted = sample_unit_rate(rng, alpha + 1.0);
        let u = rng.uniform_open();
        return Ok(boosted * u.powf(1.0 / alpha) / beta);
    }
    Ok(sample_unit_rate(rng, alpha) / beta)
}

fn sample_unit_rate(rng: &mut Rng, alpha: f64) -> f64 {
    let d = alpha - ONE_THIRD;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let eps = rng.normal();
        let base = 1.0 + c * eps;
        if base <= 0.0 {
            continue;
        }
        let v = base * base * base;
        let u = rng.uniform_open();
        let eps2 = eps * eps;
        // squeeze first, then the exact log test
        if u < 1.0 - 0.0331 * eps2 * eps2 || u.ln() < 0.5 * eps2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}
