//! Log-gamma, digamma, trigamma and the regularized incomplete gamma.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn check_positive(what: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what, value: x })
    }
}

/// Natural log of Γ(x) for x > 0.
///
/// Lanczos approximation (g = 7, nine terms) for x ≥ 1/2 and the reflection
/// formula below that. Absolute error stays under 1e-12 on [0.1, 100].
pub fn lgamma(x: f64) -> Result<f64> {
    check_positive("lgamma argument", x)?;
    Ok(lgamma_unchecked(x))
}

pub(crate) fn lgamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Γ(x)Γ(1−x) = π / sin(πx), positive on (0, 1/2)
        return (PI / (PI * x).sin()).ln() - lgamma_unchecked(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (k, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + k as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

// Shift point for the asymptotic expansions below.
const ASYMPTOTIC_FROM: f64 = 10.0;

/// ψ(x) = d/dx ln Γ(x) for x > 0, via upward recurrence and the asymptotic
/// series. Absolute error below 1e-13 on [0.1, 100].
pub fn digamma(x: f64) -> Result<f64> {
    check_positive("digamma argument", x)?;
    Ok(digamma_unchecked(x))
}

pub(crate) fn digamma_unchecked(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < ASYMPTOTIC_FROM {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let series = inv2
        * (1.0 / 12.0
            - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 / 132.0))));
    acc + x.ln() - 0.5 / x - series
}

/// ψ′(x), the derivative of the digamma function, for x > 0.
pub fn trigamma(x: f64) -> Result<f64> {
    check_positive("trigamma argument", x)?;
    Ok(trigamma_unchecked(x))
}

pub(crate) fn trigamma_unchecked(mut x: f64) -> f64 {
    let mut acc = 0.0;
    while x < ASYMPTOTIC_FROM {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // 1/x + 1/2x² + Σ B₂ₖ / x^{2k+1}
    let tail = inv2
        * inv
        * (1.0 / 6.0
            - inv2 * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * 5.0 / 66.0))));
    acc + inv + 0.5 * inv2 + tail
}

/// Regularized lower incomplete gamma P(a, x).
///
/// Power series below x < a + 1, modified Lentz continued fraction for the
/// upper function otherwise.
pub fn regularized_lower_gamma(a: f64, x: f64) -> Result<f64> {
    check_positive("incomplete gamma shape", a)?;
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain {
            what: "incomplete gamma argument",
            value: x,
        });
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let log_prefactor = a * x.ln() - x - lgamma_unchecked(a);
    if x < a + 1.0 {
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut denom = a;
        for _ in 0..10_000 {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        Ok((sum * log_prefactor.exp()).min(1.0))
    } else {
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..10_000 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        Ok((1.0 - log_prefactor.exp() * h).max(0.0))
    }
}

/// CDF of Gamma(shape `alpha`, rate `beta`) at `z`.
pub fn gamma_cdf(z: f64, alpha: f64, beta: f64) -> Result<f64> {
    check_positive("gamma rate", beta)?;
    if z <= 0.0 {
        return Ok(0.0);
    }
    regularized_lower_gamma(alpha, beta * z)
}
