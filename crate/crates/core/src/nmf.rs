//! Lee–Seung multiplicative-update NMF.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{Matrix, Rng};

/// Floor applied to every update denominator.
pub const DENOMINATOR_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Objective {
    /// ‖X − WH‖²_F
    Frobenius,
    /// Generalized KL divergence D(X ‖ WH).
    Kl,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NmfResult {
    pub w: Matrix,
    pub h: Matrix,
    /// Objective at initialization followed by one value per iteration.
    pub trace: Vec<f64>,
}

fn random_factor(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.uniform_range(0.1, 1.1))
}

pub fn objective_value(x: &Matrix, approx: &Matrix, objective: Objective) -> f64 {
    match objective {
        Objective::Frobenius => x
            .data()
            .iter()
            .zip(approx.data())
            .map(|(a, b)| (a - b) * (a - b))
            .sum(),
        Objective::Kl => x
            .data()
            .iter()
            .zip(approx.data())
            .map(|(&a, &b)| {
                let log_term = if a > 0.0 { a * (a / b).ln() } else { 0.0 };
                log_term - a + b
            })
            .sum(),
    }
}

/// `base ⊙ numer ⊘ max(denom, floor)`, in place.
fn multiplicative_update(base: &mut Matrix, numer: &Matrix, denom: &Matrix) {
    for ((b, &n), &d) in base.data_mut().iter_mut().zip(numer.data()).zip(denom.data()) {
        *b *= n / d.max(DENOMINATOR_FLOOR);
    }
}

fn update_h(x: &Matrix, w: &Matrix, h: &mut Matrix, objective: Objective) -> Result<()> {
    let wt = w.transpose();
    match objective {
        Objective::Frobenius => {
            let numer = wt.matmul(x)?;
            let denom = wt.matmul(w)?.matmul(h)?;
            multiplicative_update(h, &numer, &denom);
        }
        Objective::Kl => {
            let ratio = kl_ratio(x, &w.matmul(h)?);
            let numer = wt.matmul(&ratio)?;
            let column_sums: Vec<f64> = (0..w.cols()).map(|k| w.column(k).iter().sum()).collect();
            let denom = Matrix::from_fn(h.rows(), h.cols(), |k, _| column_sums[k]);
            multiplicative_update(h, &numer, &denom);
        }
    }
    Ok(())
}

fn update_w(x: &Matrix, w: &mut Matrix, h: &Matrix, objective: Objective) -> Result<()> {
    let ht = h.transpose();
    match objective {
        Objective::Frobenius => {
            let numer = x.matmul(&ht)?;
            let denom = w.matmul(&h.matmul(&ht)?)?;
            multiplicative_update(w, &numer, &denom);
        }
        Objective::Kl => {
            let ratio = kl_ratio(x, &w.matmul(h)?);
            let numer = ratio.matmul(&ht)?;
            let row_sums: Vec<f64> = (0..h.rows()).map(|k| h.row(k).iter().sum()).collect();
            let denom = Matrix::from_fn(w.rows(), w.cols(), |_, k| row_sums[k]);
            multiplicative_update(w, &numer, &denom);
        }
    }
    Ok(())
}

fn kl_ratio(x: &Matrix, approx: &Matrix) -> Matrix {
    let mut ratio = x.clone();
    for (r, &a) in ratio.data_mut().iter_mut().zip(approx.data()) {
        *r /= a.max(DENOMINATOR_FLOOR);
    }
    ratio
}

/// Factorizes `x ≈ W H` with `rank` atoms, alternating H and W updates.
pub fn nmf(x: &Matrix, rank: usize, iters: usize, seed: u64, objective: Objective) -> Result<NmfResult> {
    x.ensure_nonnegative("NMF input")?;
    if rank == 0 || iters == 0 {
        return Err(Error::Config(format!(
            "NMF needs rank >= 1 and iters >= 1 (got rank {rank}, iters {iters})"
        )));
    }
    let mut rng = Rng::seed_from_u64(seed);
    let mut w = random_factor(x.rows(), rank, &mut rng);
    let mut h = random_factor(rank, x.cols(), &mut rng);
    let mut trace = Vec::with_capacity(iters + 1);
    trace.push(objective_value(x, &w.matmul(&h)?, objective));
    for _ in 0..iters {
        update_h(x, &w, &mut h, objective)?;
        update_w(x, &mut w, &h, objective)?;
        trace.push(objective_value(x, &w.matmul(&h)?, objective));
    }
    Ok(NmfResult { w, h, trace })
}

/// Frobenius H-updates with `w` frozen. Returns H and its objective trace.
pub fn solve_activations(x: &Matrix, w: &Matrix, iters: usize, seed: u64) -> Result<(Matrix, Vec<f64>)> {
    x.ensure_nonnegative("activation target")?;
    w.ensure_nonnegative("fixed dictionary")?;
    if x.rows() != w.rows() {
        return Err(Error::Dimension {
            op: "solve_activations",
            left: x.shape(),
            right: w.shape(),
        });
    }
    let mut rng = Rng::seed_from_u64(seed);
    let mut h = random_factor(w.cols(), x.cols(), &mut rng);
    let mut trace = Vec::with_capacity(iters + 1);
    trace.push(objective_value(x, &w.matmul(&h)?, Objective::Frobenius));
    let wt = w.transpose();
    let numer = wt.matmul(x)?;
    let gram = wt.matmul(w)?;
    for _ in 0..iters {
        let denom = gram.matmul(&h)?;
        multiplicative_update(&mut h, &numer, &denom);
        trace.push(objective_value(x, &w.matmul(&h)?, Objective::Frobenius));
    }
    Ok((h, trace))
}

/// True when no step of `trace` rises by more than `rel_slack` of the
/// previous value.
pub fn is_non_increasing(trace: &[f64], rel_slack: f64) -> bool {
    trace.windows(2).all(|p| p[1] <= p[0] + rel_slack * p[0].abs())
}
