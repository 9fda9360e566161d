use super::model::{sigmoid, ModelGradients, VaeNmfModel};
use crate::error::{Error, Result};
use crate::numkit::{
    digamma_unchecked, lgamma_unchecked, reparam_admissible, reparam_gamma, reparam_gamma_dalpha,
    trigamma_unchecked, Matrix, Rng,
};

/// Batch-mean loss split into its parts; `total = recon + kl + penalty`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LossBreakdown {
    pub recon: f64,
    pub kl: f64,
    pub penalty: f64,
    pub total: f64,
}

impl LossBreakdown {
    pub fn new(recon: f64, kl: f64, penalty: f64) -> Self {
        Self {
            recon,
            kl,
            penalty,
            total: recon + kl + penalty,
        }
    }
}

/// KL(Gamma(α₁, β₁) ‖ Gamma(α₂, β₂)) for rate-parameterized Gammas.
pub fn kl_gamma(alpha1: f64, beta1: f64, alpha2: f64, beta2: f64) -> Result<f64> {
    for (what, value) in [
        ("kl alpha1", alpha1),
        ("kl beta1", beta1),
        ("kl alpha2", alpha2),
        ("kl beta2", beta2),
    ] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Domain { what, value });
        }
    }
    Ok((alpha1 - alpha2) * digamma_unchecked(alpha1) - lgamma_unchecked(alpha1)
        + lgamma_unchecked(alpha2)
        + alpha2 * (beta1.ln() - beta2.ln())
        + alpha1 * (beta2 - beta1) / beta1)
}

/// KL against the prior at unit rates, and its derivative in α₁.
fn kl_unit_rate(alpha: f64, prior: f64) -> (f64, f64) {
    let value = if alpha == prior {
        0.0
    } else {
        (alpha - prior) * digamma_unchecked(alpha) - lgamma_unchecked(alpha) + lgamma_unchecked(prior)
    };
    (value, (alpha - prior) * trigamma_unchecked(alpha))
}

/// Σ f(wᵢⱼ) with f(w) = w² for negative w and 0 otherwise.
pub fn negative_mass(w: &Matrix) -> f64 {
    w.data().iter().filter(|&&v| v < 0.0).fold(0.0, |acc, v| acc + v * v)
}

/// Quadratic penalty on negative decoder weights, `(γ/2)·Σ f(wᵢⱼ)`.
pub fn negweight_penalty(w: &Matrix, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !w.is_finite() {
        return Err(Error::NonFinite("decoder weights"));
    }
    Ok(0.5 * gamma * negative_mass(w))
}

/// ∂/∂W of [`negweight_penalty`]: γ·w on negative entries, 0 elsewhere.
pub fn negweight_penalty_grad(w: &Matrix, gamma: f64) -> Matrix {
    w.map(|v| if v < 0.0 { gamma * v } else { 0.0 })
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma >= 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "penalty weight",
            value: gamma,
        })
    }
}

/// Source of the standard normal noise fed through the reparameterization.
pub enum Noise<'a> {
    /// Draw fresh ε, redrawing any value whose transform base is ≤ 0.
    Draw(&'a mut Rng),
    /// Reuse a previous r × B draw.
    Replay(&'a Matrix),
}

/// Loss, optional gradients and the ε that produced them.
#[derive(Clone, Debug)]
pub struct BatchEvaluation {
    pub loss: LossBreakdown,
    pub gradients: Option<ModelGradients>,
    pub noise: Matrix,
}

/// Single-sample Monte Carlo estimate of the penalized negative VLB for a
/// batch (columns of `batch`).
pub fn loss(model: &VaeNmfModel, batch: &Matrix, rng: &mut Rng, gamma: f64) -> Result<LossBreakdown> {
    Ok(evaluate(model, batch, Noise::Draw(rng), gamma, false)?.loss)
}

/// [`loss`] with fixed ε.
pub fn loss_with_noise(model: &VaeNmfModel, batch: &Matrix, noise: &Matrix, gamma: f64) -> Result<LossBreakdown> {
    Ok(evaluate(model, batch, Noise::Replay(noise), gamma, false)?.loss)
}

/// Pathwise gradients of the batch loss with the drawn ε held fixed.
pub fn param_gradients(
    model: &VaeNmfModel,
    batch: &Matrix,
    rng: &mut Rng,
    gamma: f64,
) -> Result<(LossBreakdown, ModelGradients)> {
    let eval = evaluate(model, batch, Noise::Draw(rng), gamma, true)?;
    Ok((eval.loss, eval.gradients.expect("requested")))
}

/// Forward pass over a batch and, when `with_gradients`, the matching
/// backward pass.
pub fn evaluate(
    model: &VaeNmfModel,
    batch: &Matrix,
    mut noise: Noise<'_>,
    gamma: f64,
    with_gradients: bool,
) -> Result<BatchEvaluation> {
    check_gamma(gamma)?;
    let (m, r) = (model.input_dim, model.rank);
    if batch.rows() != m || batch.cols() == 0 {
        return Err(Error::Dimension {
            op: "loss batch",
            left: (m, 1),
            right: batch.shape(),
        });
    }
    let n = batch.cols();
    if let Noise::Replay(eps) = &noise {
        if eps.shape() != (r, n) {
            return Err(Error::Dimension {
                op: "noise replay",
                left: (r, n),
                right: eps.shape(),
            });
        }
    }
    let w = &model.decoder.w;
    let enc = &model.encoder;
    let scale = 1.0 / n as f64;
    let mut used = Matrix::zeros(r, n);
    let mut grads = with_gradients.then(|| ModelGradients::zeros_like(model));
    let (mut recon_sum, mut kl_sum) = (0.0, 0.0);

    for b in 0..n {
        let x = batch.column(b);
        let trace = model.encode_trace(&x)?;
        let mut z = vec![0.0; r];
        let mut dz_dalpha = vec![0.0; r];
        for i in 0..r {
            let alpha = trace.alpha[i];
            let eps = match &mut noise {
                Noise::Draw(rng) => loop {
                    let e = rng.normal();
                    if reparam_admissible(e, alpha) {
                        break e;
                    }
                },
                Noise::Replay(eps) => eps[(i, b)],
            };
            used[(i, b)] = eps;
            z[i] = reparam_gamma(eps, alpha)?;
            if with_gradients {
                dz_dalpha[i] = reparam_gamma_dalpha(eps, alpha)?;
            }
        }
        let xhat = w.matvec(&z)?;
        let residual: Vec<f64> = xhat.iter().zip(&x).map(|(a, b)| a - b).collect();
        recon_sum += 0.5 * residual.iter().map(|v| v * v).sum::<f64>();

        let mut dkl = vec![0.0; r];
        for (i, &alpha) in trace.alpha.iter().enumerate() {
            let (value, slope) = kl_unit_rate(alpha, model.prior_alpha);
            kl_sum += value;
            dkl[i] = slope;
        }

        let Some(g) = grads.as_mut() else { continue };

        // decoder: ∂/∂W ½‖Wz − x‖² = (Wz − x) zᵀ
        for (row, &res) in residual.iter().enumerate() {
            for (col, &zc) in z.iter().enumerate() {
                g.decoder[(row, col)] += scale * res * zc;
            }
        }
        let grad_z = w.matvec_transposed(&residual)?;
        let grad_head: Vec<f64> = (0..r)
            .map(|i| scale * (grad_z[i] * dz_dalpha[i] + dkl[i]) * sigmoid(trace.head[i]))
            .collect();
        let grad_pre2 = backprop_layer(
            &grad_head,
            &trace.hidden2,
            &enc.alpha_head_weights,
            &mut g.encoder.alpha_head_weights,
            &mut g.encoder.alpha_head_bias,
        );
        let grad_pre2: Vec<f64> = relu_mask(&grad_pre2, &trace.pre2);
        let grad_pre1 = backprop_layer(
            &grad_pre2,
            &trace.hidden1,
            &enc.layer2_weights,
            &mut g.encoder.layer2_weights,
            &mut g.encoder.layer2_bias,
        );
        let grad_pre1 = relu_mask(&grad_pre1, &trace.pre1);
        backprop_layer(
            &grad_pre1,
            &x,
            &enc.layer1_weights,
            &mut g.encoder.layer1_weights,
            &mut g.encoder.layer1_bias,
        );
    }

    let penalty = negweight_penalty(w, gamma)?;
    if let Some(g) = grads.as_mut() {
        for (gw, &wv) in g.decoder.data_mut().iter_mut().zip(w.data()) {
            if wv < 0.0 {
                *gw += gamma * wv;
            }
        }
    }
    let loss = LossBreakdown::new(recon_sum * scale, kl_sum * scale, penalty);
    if !loss.total.is_finite() {
        return Err(Error::NonFinite("loss"));
    }
    Ok(BatchEvaluation {
        loss,
        gradients: grads,
        noise: used,
    })
}

/// Accumulates weight/bias gradients for `out = W·input + b` and returns
/// the gradient with respect to `input`.
fn backprop_layer(
    grad_out: &[f64],
    input: &[f64],
    weights: &Matrix,
    grad_weights: &mut Matrix,
    grad_bias: &mut [f64],
) -> Vec<f64> {
    for (o, &go) in grad_out.iter().enumerate() {
        if go == 0.0 {
            continue;
        }
        grad_bias[o] += go;
        for (k, &inp) in input.iter().enumerate() {
            grad_weights[(o, k)] += go * inp;
        }
    }
    weights
        .matvec_transposed(grad_out)
        .expect("encoder shapes validated")
}

fn relu_mask(grad: &[f64], pre: &[f64]) -> Vec<f64> {
    grad.iter()
        .zip(pre)
        .map(|(&g, &p)| if p > 0.0 { g } else { 0.0 })
        .collect()
}
