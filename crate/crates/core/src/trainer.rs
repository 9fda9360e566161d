//! Adam, seeded mini-batching, and the VAE-NMF training loop.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma_vae::{evaluate, LossBreakdown, Noise, VaeNmfModel};
use crate::numkit::{Matrix, Rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub rank: usize,
    pub hidden: [usize; 2],
    pub batch_size: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// Weight of the negative-decoder-weight penalty.
    pub gamma: f64,
    pub prior_alpha: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            rank: 4,
            hidden: [400, 400],
            batch_size: 128,
            learning_rate: 1e-3,
            weight_decay: 5e-4,
            gamma: 10.0,
            prior_alpha: 2.0,
            epochs: 200,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.rank == 0 {
            return fail("rank must be at least 1".into());
        }
        if self.hidden.contains(&0) {
            return fail(format!("hidden sizes must be positive, got {:?}", self.hidden));
        }
        if self.batch_size == 0 {
            return fail("batch size must be at least 1".into());
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning rate must be positive, got {}", self.learning_rate));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return fail(format!("weight decay must be nonnegative, got {}", self.weight_decay));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return fail(format!("gamma must be nonnegative, got {}", self.gamma));
        }
        if !(self.prior_alpha > 0.0 && self.prior_alpha.is_finite()) {
            return fail(format!("prior alpha must be positive, got {}", self.prior_alpha));
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1".into());
        }
        Ok(())
    }
}

/// Adam moment accumulators, one buffer per parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
    pub step: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub const BETA1: f64 = 0.9;
    pub const BETA2: f64 = 0.999;
    pub const EPSILON: f64 = 1e-8;

    pub fn new(shapes: impl IntoIterator<Item = usize>) -> Self {
        let zeros: Vec<Vec<f64>> = shapes.into_iter().map(|n| vec![0.0; n]).collect();
        Self {
            second_moment: zeros.clone(),
            first_moment: zeros,
            step: 0,
            beta1: Self::BETA1,
            beta2: Self::BETA2,
            epsilon: Self::EPSILON,
        }
    }

    pub fn for_model(model: &VaeNmfModel) -> Self {
        Self::new(model.parameter_slices().iter().map(|s| s.len()))
    }
}

/// One Adam update with bias correction. Weight decay is coupled: the
/// gradient becomes `g + weight_decay·p` before the moments are updated.
pub fn adam_step(
    params: &mut [&mut [f64]],
    grads: &[&[f64]],
    state: &mut AdamState,
    lr: f64,
    weight_decay: f64,
) -> Result<()> {
    if params.len() != grads.len() || params.len() != state.first_moment.len() {
        return Err(Error::Dimension {
            op: "adam_step tensors",
            left: (params.len(), 1),
            right: (grads.len(), state.first_moment.len()),
        });
    }
    for (t, (p, g)) in params.iter().zip(grads).enumerate() {
        if p.len() != g.len() || p.len() != state.first_moment[t].len() {
            return Err(Error::Dimension {
                op: "adam_step tensor",
                left: (p.len(), t),
                right: (g.len(), state.first_moment[t].len()),
            });
        }
    }
    state.step += 1;
    let (b1, b2) = (state.beta1, state.beta2);
    let correction1 = 1.0 - b1.powf(state.step as f64);
    let correction2 = 1.0 - b2.powf(state.step as f64);
    for (t, (p, g)) in params.iter_mut().zip(grads).enumerate() {
        let m = &mut state.first_moment[t];
        let v = &mut state.second_moment[t];
        for k in 0..p.len() {
            let grad = g[k] + weight_decay * p[k];
            m[k] = b1 * m[k] + (1.0 - b1) * grad;
            v[k] = b2 * v[k] + (1.0 - b2) * grad * grad;
            let m_hat = m[k] / correction1;
            let v_hat = v[k] / correction2;
            p[k] -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
        }
    }
    Ok(())
}

/// Seeded permutation of `0..n` cut into consecutive batches; the last
/// batch keeps the remainder.
pub fn make_batches(n: usize, batch_size: usize, rng: &mut Rng) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut order);
    order.chunks(batch_size.max(1)).map(<[usize]>::to_vec).collect()
}

#[derive(Clone, Debug, Default)]
pub struct TrainHistory {
    /// Sample-weighted mean loss per completed epoch.
    pub epochs: Vec<LossBreakdown>,
    pub wall_time_secs: f64,
    /// Σ f(wᵢⱼ) of the decoder after the last epoch, before any clamping.
    pub final_negative_mass: f64,
}

/// Stateful training loop over a fixed data matrix (columns are samples).
pub struct Trainer<'a> {
    data: &'a Matrix,
    config: TrainConfig,
    model: VaeNmfModel,
    adam: AdamState,
    shuffle_rng: Rng,
    noise_rng: Rng,
}

impl<'a> Trainer<'a> {
    pub fn new(data: &'a Matrix, config: TrainConfig) -> Result<Self> {
        config.validate()?;
        data.ensure_nonnegative("training data")?;
        let (m, n) = data.shape();
        if config.rank >= m.min(n) {
            return Err(Error::Config(format!(
                "rank {} must be below min(rows, cols) = {}",
                config.rank,
                m.min(n)
            )));
        }
        let mut root = Rng::seed_from_u64(config.seed);
        let mut init_rng = root.fork();
        let shuffle_rng = root.fork();
        let noise_rng = root.fork();
        let model = VaeNmfModel::new(m, config.hidden, config.rank, config.prior_alpha, &mut init_rng)?;
        let adam = AdamState::for_model(&model);
        Ok(Self {
            data,
            config,
            model,
            adam,
            shuffle_rng,
            noise_rng,
        })
    }

    pub fn model(&self) -> &VaeNmfModel {
        &self.model
    }

    pub fn into_model(self) -> VaeNmfModel {
        self.model
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    /// Loss, gradients and one Adam update on the given sample indices.
    pub fn step(&mut self, indices: &[usize]) -> Result<LossBreakdown> {
        let batch = self.data.select_columns(indices);
        let eval = evaluate(
            &self.model,
            &batch,
            Noise::Draw(&mut self.noise_rng),
            self.config.gamma,
            true,
        )?;
        if !eval.loss.total.is_finite() {
            return Err(Error::NonFinite("loss"));
        }
        let grads = eval.gradients.expect("requested");
        if !grads.slices().iter().all(|g| g.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFinite("gradients"));
        }
        adam_step(
            &mut self.model.parameter_slices_mut(),
            &grads.slices(),
            &mut self.adam,
            self.config.learning_rate,
            self.config.weight_decay,
        )?;
        Ok(eval.loss)
    }

    /// One pass over a fresh permutation; returns the sample-weighted mean.
    pub fn epoch(&mut self) -> Result<LossBreakdown> {
        let batches = make_batches(self.data.cols(), self.config.batch_size, &mut self.shuffle_rng);
        let (mut recon, mut kl, mut penalty) = (0.0, 0.0, 0.0);
        for batch in &batches {
            let loss = self.step(batch)?;
            let weight = batch.len() as f64;
            recon += loss.recon * weight;
            kl += loss.kl * weight;
            penalty += loss.penalty * weight;
        }
        let n = self.data.cols() as f64;
        Ok(LossBreakdown::new(recon / n, kl / n, penalty / n))
    }
}

/// Trains a model; `on_epoch` sees each epoch index (from 1) and its loss.
pub fn train_with_observer(
    data: &Matrix,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(usize, &LossBreakdown),
) -> Result<(VaeNmfModel, TrainHistory)> {
    let started = Instant::now();
    let mut trainer = Trainer::new(data, config.clone())?;
    let mut history = TrainHistory::default();
    for epoch in 1..=config.epochs {
        let loss = trainer.epoch()?;
        on_epoch(epoch, &loss);
        history.epochs.push(loss);
    }
    let model = trainer.into_model();
    history.final_negative_mass = crate::gamma_vae::negative_mass(&model.decoder.w);
    history.wall_time_secs = started.elapsed().as_secs_f64();
    Ok((model, history))
}

pub fn train(data: &Matrix, config: &TrainConfig) -> Result<(VaeNmfModel, TrainHistory)> {
    train_with_observer(data, config, |_, _| {})
}
