//! Reconstruction and separation indices, dictionary-recovery scoring,
//! goodness-of-fit, and the numerical KL oracle.

pub mod quadrature;

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::{lgamma, Matrix};

/// Cap on |SI-SDR| in dB, reported for exact (or fully failed) estimates.
pub const SI_SDR_CAP_DB: f64 = 200.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VafReport {
    /// Per row (channel); NaN for channels that are identically zero.
    pub per_channel: Vec<f64>,
    pub global: f64,
}

/// Uncentered variance accounted for, `100·(1 − Σ(x − x̂)² / Σx²)`, per row
/// and over the whole matrix.
pub fn vaf(x: &Matrix, xhat: &Matrix) -> Result<VafReport> {
    if x.shape() != xhat.shape() {
        return Err(Error::Dimension {
            op: "vaf",
            left: x.shape(),
            right: xhat.shape(),
        });
    }
    let index = |truth: &[f64], est: &[f64]| {
        let total: f64 = truth.iter().map(|v| v * v).sum();
        let resid: f64 = truth.iter().zip(est).map(|(a, b)| (a - b) * (a - b)).sum();
        (total, 100.0 * (1.0 - resid / total))
    };
    let per_channel = (0..x.rows())
        .map(|i| {
            let (total, value) = index(x.row(i), xhat.row(i));
            if total == 0.0 {
                warn!("vaf: channel {i} is identically zero; VAF undefined");
                f64::NAN
            } else {
                value
            }
        })
        .collect();
    let (total, global) = index(x.data(), xhat.data());
    if total == 0.0 {
        return Err(Error::Domain {
            what: "vaf reference energy",
            value: 0.0,
        });
    }
    Ok(VafReport { per_channel, global })
}

/// Scale-invariant signal-to-distortion ratio in dB, clamped to
/// ±[`SI_SDR_CAP_DB`].
pub fn si_sdr(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    if reference.len() != estimate.len() {
        return Err(Error::Dimension {
            op: "si_sdr",
            left: (reference.len(), 1),
            right: (estimate.len(), 1),
        });
    }
    let ref_energy: f64 = reference.iter().map(|v| v * v).sum();
    if ref_energy == 0.0 {
        return Err(Error::Domain {
            what: "si_sdr reference energy",
            value: 0.0,
        });
    }
    let dot: f64 = reference.iter().zip(estimate).map(|(a, b)| a * b).sum();
    let gain = dot / ref_energy;
    let (mut target, mut residual) = (0.0, 0.0);
    for (&s, &e) in reference.iter().zip(estimate) {
        let t = gain * s;
        target += t * t;
        residual += (e - t) * (e - t);
    }
    let db = 10.0 * (target / residual).log10();
    Ok(if db.is_nan() {
        -SI_SDR_CAP_DB
    } else {
        db.clamp(-SI_SDR_CAP_DB, SI_SDR_CAP_DB)
    })
}

fn normalized_columns(w: &Matrix, name: &str) -> Vec<Option<Vec<f64>>> {
    (0..w.cols())
        .map(|j| {
            let col = w.column(j);
            let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                warn!("dictionary_match: column {j} of {name} is zero; scored as cosine 0");
                None
            } else {
                Some(col.iter().map(|v| v / norm).collect())
            }
        })
        .collect()
}

/// Pairwise column cosines, `learned` columns by `truth` columns.
pub fn column_cosines(learned: &Matrix, truth: &Matrix) -> Result<Matrix> {
    if learned.rows() != truth.rows() {
        return Err(Error::Dimension {
            op: "column_cosines",
            left: learned.shape(),
            right: truth.shape(),
        });
    }
    let a = normalized_columns(learned, "learned");
    let b = normalized_columns(truth, "truth");
    Ok(Matrix::from_fn(a.len(), b.len(), |i, j| match (&a[i], &b[j]) {
        (Some(u), Some(v)) => u.iter().zip(v).map(|(p, q)| p * q).sum(),
        _ => 0.0,
    }))
}

/// Mean cosine of the best one-to-one matching between learned and true
/// atoms, found by the Hungarian algorithm on the cosine matrix.
pub fn dictionary_match(learned: &Matrix, truth: &Matrix) -> Result<f64> {
    if learned.shape() != truth.shape() {
        return Err(Error::Dimension {
            op: "dictionary_match",
            left: learned.shape(),
            right: truth.shape(),
        });
    }
    let r = truth.cols();
    if r == 0 {
        return Ok(0.0);
    }
    let cos = column_cosines(learned, truth)?;
    let assignment = max_weight_assignment(&cos);
    Ok(assignment
        .iter()
        .enumerate()
        .map(|(i, &j)| cos[(i, j)])
        .sum::<f64>()
        / r as f64)
}

/// Row → column assignment of a square matrix maximizing the summed
/// weight (Kuhn–Munkres with potentials, O(n³)).
pub fn max_weight_assignment(weights: &Matrix) -> Vec<usize> {
    let n = weights.rows();
    assert_eq!(n, weights.cols(), "assignment needs a square matrix");
    // minimize cost = −weight; arrays are 1-based with slot 0 as sentinel
    let cost = |i: usize, j: usize| -weights[(i - 1, j - 1)];
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for row in 1..=n {
        owner[0] = row;
        let mut col0 = 0;
        let mut min_slack = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[col0] = true;
            let i0 = owner[col0];
            let mut delta = f64::INFINITY;
            let mut col1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let slack = cost(i0, j) - u[i0] - v[j];
                if slack < min_slack[j] {
                    min_slack[j] = slack;
                    way[j] = col0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    col1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            col0 = col1;
            if owner[col0] == 0 {
                break;
            }
        }
        loop {
            let prev = way[col0];
            owner[col0] = owner[prev];
            col0 = prev;
            if col0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[owner[j] - 1] = j - 1;
    }
    assignment
}

/// KL(Gamma(α₁, β₁) ‖ Gamma(α₂, β₂)) by direct numerical integration of
/// `f₁·ln(f₁/f₂)` over (0, ∞).
///
/// The half-line is split at `c = max(α₁/β₁, 1/β₁)`. On (0, c] the
/// substitution `x = c·s^{1/α₁}` absorbs the `x^{α₁−1}` factor so the
/// integrand is bounded apart from a log term; on [c, ∞) the map
/// `x = c + L·t/(1 − t)` with `L = max(√α₁, 1)/β₁` folds the tail into
/// [0, 1). Each piece is integrated to an absolute error below 1e-10.
pub fn kl_quadrature_oracle(alpha1: f64, beta1: f64, alpha2: f64, beta2: f64) -> Result<f64> {
    for (what, value) in [
        ("oracle alpha1", alpha1),
        ("oracle beta1", beta1),
        ("oracle alpha2", alpha2),
        ("oracle beta2", beta2),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Domain { what, value });
        }
    }
    let lg1 = lgamma(alpha1)?;
    let lg2 = lgamma(alpha2)?;
    let log_ratio = |x: f64| {
        (alpha1 - alpha2) * x.ln() - (beta1 - beta2) * x + alpha1 * beta1.ln() - alpha2 * beta2.ln() - lg1
            + lg2
    };
    let log_density = |x: f64| (alpha1 - 1.0) * x.ln() - beta1 * x + alpha1 * beta1.ln() - lg1;

    let split = (alpha1 / beta1).max(1.0 / beta1);
    // f₁(x) dx = exp(α₁ ln(β₁c) − β₁x − ln Γ(α₁+1)) ds
    let log_head_weight = alpha1 * (beta1 * split).ln() - lg1 - alpha1.ln();
    let head = |s: f64| {
        let x = split * s.powf(1.0 / alpha1);
        if x == 0.0 {
            return 0.0;
        }
        (log_head_weight - beta1 * x).exp() * log_ratio(x)
    };
    let scale = alpha1.sqrt().max(1.0) / beta1;
    let tail = |t: f64| {
        let u = 1.0 - t;
        let x = split + scale * t / u;
        let jacobian = scale / (u * u);
        let log_f = log_density(x);
        if log_f < -745.0 || !x.is_finite() {
            return 0.0;
        }
        log_f.exp() * jacobian * log_ratio(x)
    };
    const PIECE_TOL: f64 = 1e-10;
    let (head_value, _) = quadrature::integrate(head, 0.0, 1.0, PIECE_TOL)?;
    let (tail_value, _) = quadrature::integrate(tail, 0.0, 1.0, PIECE_TOL)?;
    Ok(head_value + tail_value)
}

/// Kolmogorov–Smirnov statistic sup |F_n − F| of `samples` against `cdf`.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Config("ks_distance needs at least one sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted.iter().enumerate().fold(0.0, |acc: f64, (i, &x)| {
        let f = cdf(x);
        acc.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    }))
}
