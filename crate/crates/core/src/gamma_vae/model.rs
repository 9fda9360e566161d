use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{sample_gamma, Matrix, Rng};

/// Encoder weights: two ReLU hidden layers and a linear shape head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderParams {
    pub layer1_weights: Matrix,
    pub layer1_bias: Vec<f64>,
    pub layer2_weights: Matrix,
    pub layer2_bias: Vec<f64>,
    pub alpha_head_weights: Matrix,
    pub alpha_head_bias: Vec<f64>,
}

impl EncoderParams {
    pub fn zeros(input_dim: usize, hidden: [usize; 2], rank: usize) -> Self {
        Self {
            layer1_weights: Matrix::zeros(hidden[0], input_dim),
            layer1_bias: vec![0.0; hidden[0]],
            layer2_weights: Matrix::zeros(hidden[1], hidden[0]),
            layer2_bias: vec![0.0; hidden[1]],
            alpha_head_weights: Matrix::zeros(rank, hidden[1]),
            alpha_head_bias: vec![0.0; rank],
        }
    }

    fn glorot(input_dim: usize, hidden: [usize; 2], rank: usize, rng: &mut Rng) -> Self {
        let mut layer = |fan_out: usize, fan_in: usize| {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            Matrix::from_fn(fan_out, fan_in, |_, _| rng.uniform_range(-limit, limit))
        };
        Self {
            layer1_weights: layer(hidden[0], input_dim),
            layer1_bias: vec![0.0; hidden[0]],
            layer2_weights: layer(hidden[1], hidden[0]),
            layer2_bias: vec![0.0; hidden[1]],
            alpha_head_weights: layer(rank, hidden[1]),
            alpha_head_bias: vec![0.0; rank],
        }
    }

    fn slices(&self) -> [&[f64]; 6] {
        [
            self.layer1_weights.data(),
            &self.layer1_bias,
            self.layer2_weights.data(),
            &self.layer2_bias,
            self.alpha_head_weights.data(),
            &self.alpha_head_bias,
        ]
    }

    fn slices_mut(&mut self) -> [&mut [f64]; 6] {
        [
            self.layer1_weights.data_mut(),
            &mut self.layer1_bias,
            self.layer2_weights.data_mut(),
            &mut self.layer2_bias,
            self.alpha_head_weights.data_mut(),
            &mut self.alpha_head_bias,
        ]
    }
}

/// Approximate posterior q(z|x): independent Gamma(αᵢ, 1) per latent dim.
#[derive(Clone, Debug, PartialEq)]
pub struct GammaPosterior {
    pub alpha: Vec<f64>,
}

impl GammaPosterior {
    /// The rate is fixed at one.
    pub const BETA: f64 = 1.0;

    /// Posterior mean α/β.
    pub fn mean(&self) -> Vec<f64> {
        self.alpha.iter().map(|a| a / Self::BETA).collect()
    }
}

/// Linear decoder dictionary `W` (m × r); reconstructions are `W z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderDict {
    pub w: Matrix,
}

/// Dictionary with negative entries clamped to zero, plus the squared mass
/// that was removed.
#[derive(Clone, Debug, PartialEq)]
pub struct ExportedDictionary {
    pub dict: DecoderDict,
    /// Σ f(wᵢⱼ) before clamping, with f(w) = w² for w < 0.
    pub clamped_mass: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Readout {
    /// E[z] = α.
    Mean,
    /// One Gamma draw per entry.
    Sample,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VaeNmfModel {
    pub encoder: EncoderParams,
    pub decoder: DecoderDict,
    pub prior_alpha: f64,
    pub input_dim: usize,
    pub rank: usize,
    pub hidden: [usize; 2],
}

/// Cached activations of one encoder pass.
pub(crate) struct EncoderTrace {
    pub pre1: Vec<f64>,
    pub hidden1: Vec<f64>,
    pub pre2: Vec<f64>,
    pub hidden2: Vec<f64>,
    pub head: Vec<f64>,
    pub alpha: Vec<f64>,
}

pub(crate) fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn affine(weights: &Matrix, bias: &[f64], input: &[f64]) -> Vec<f64> {
    let mut out = weights.matvec(input).expect("encoder shapes validated");
    for (o, b) in out.iter_mut().zip(bias) {
        *o += b;
    }
    out
}

fn relu(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&a| a.max(0.0)).collect()
}

impl VaeNmfModel {
    /// Fresh model: Glorot-uniform encoder, zero biases, and a nonnegative
    /// decoder drawn from |N(0, 0.1²)|.
    pub fn new(
        input_dim: usize,
        hidden: [usize; 2],
        rank: usize,
        prior_alpha: f64,
        rng: &mut Rng,
    ) -> Result<Self> {
        if input_dim == 0 || rank == 0 || hidden.contains(&0) {
            return Err(Error::Config(format!(
                "model dimensions must be positive (input {input_dim}, hidden {hidden:?}, rank {rank})"
            )));
        }
        if !(prior_alpha > 0.0 && prior_alpha.is_finite()) {
            return Err(Error::Domain {
                what: "prior shape",
                value: prior_alpha,
            });
        }
        let encoder = EncoderParams::glorot(input_dim, hidden, rank, rng);
        let w = Matrix::from_fn(input_dim, rank, |_, _| (0.1 * rng.normal()).abs());
        Ok(Self {
            encoder,
            decoder: DecoderDict { w },
            prior_alpha,
            input_dim,
            rank,
            hidden,
        })
    }

    /// Checks that every parameter shape agrees with the declared dims.
    pub fn validate(&self) -> Result<()> {
        let e = &self.encoder;
        let [h1, h2] = self.hidden;
        let expected = [
            ("layer1_weights", e.layer1_weights.shape(), (h1, self.input_dim)),
            ("layer1_bias", (e.layer1_bias.len(), 1), (h1, 1)),
            ("layer2_weights", e.layer2_weights.shape(), (h2, h1)),
            ("layer2_bias", (e.layer2_bias.len(), 1), (h2, 1)),
            ("alpha_head_weights", e.alpha_head_weights.shape(), (self.rank, h2)),
            ("alpha_head_bias", (e.alpha_head_bias.len(), 1), (self.rank, 1)),
            ("decoder.w", self.decoder.w.shape(), (self.input_dim, self.rank)),
        ];
        for (name, found, want) in expected {
            if found != want {
                return Err(Error::Schema {
                    field: name.to_string(),
                    msg: format!("shape {found:?}, expected {want:?}"),
                });
            }
        }
        if !(self.prior_alpha > 0.0) {
            return Err(Error::Schema {
                field: "prior_alpha".into(),
                msg: format!("must be positive, got {}", self.prior_alpha),
            });
        }
        if !self.parameter_slices().iter().all(|s| s.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFinite("model parameters"));
        }
        Ok(())
    }

    pub(crate) fn encode_trace(&self, x: &[f64]) -> Result<EncoderTrace> {
        if x.len() != self.input_dim {
            return Err(Error::Dimension {
                op: "encode",
                left: (self.input_dim, 1),
                right: (x.len(), 1),
            });
        }
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("encoder input"));
        }
        let e = &self.encoder;
        let pre1 = affine(&e.layer1_weights, &e.layer1_bias, x);
        let hidden1 = relu(&pre1);
        let pre2 = affine(&e.layer2_weights, &e.layer2_bias, &hidden1);
        let hidden2 = relu(&pre2);
        let head = affine(&e.alpha_head_weights, &e.alpha_head_bias, &hidden2);
        let alpha = head.iter().map(|&a| 1.0 + softplus(a)).collect();
        Ok(EncoderTrace {
            pre1,
            hidden1,
            pre2,
            hidden2,
            head,
            alpha,
        })
    }

    /// Posterior shapes for one input column; every αᵢ ≥ 1.
    pub fn encode(&self, x: &[f64]) -> Result<GammaPosterior> {
        Ok(GammaPosterior {
            alpha: self.encode_trace(x)?.alpha,
        })
    }

    /// Linear reconstruction `W z`.
    pub fn decode(&self, z: &[f64]) -> Result<Vec<f64>> {
        if !z.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("latent vector"));
        }
        self.decoder.w.matvec(z)
    }

    /// Activations Z (r × n) for the columns of `x`.
    pub fn infer_activations(&self, x: &Matrix, readout: Readout, rng: &mut Rng) -> Result<Matrix> {
        if x.rows() != self.input_dim {
            return Err(Error::Dimension {
                op: "infer_activations",
                left: (self.input_dim, self.rank),
                right: x.shape(),
            });
        }
        let mut z = Matrix::zeros(self.rank, x.cols());
        for j in 0..x.cols() {
            let posterior = self.encode(&x.column(j))?;
            let column = match readout {
                Readout::Mean => posterior.mean(),
                Readout::Sample => posterior
                    .alpha
                    .iter()
                    .map(|&a| sample_gamma(rng, a, GammaPosterior::BETA))
                    .collect::<Result<Vec<_>>>()?,
            };
            z.set_column(j, &column)?;
        }
        Ok(z)
    }

    /// Decoder dictionary with negative entries clamped to zero.
    pub fn export_dictionary(&self) -> ExportedDictionary {
        let w = &self.decoder.w;
        ExportedDictionary {
            dict: DecoderDict {
                w: w.map(|v| v.max(0.0)),
            },
            clamped_mass: super::loss::negative_mass(w),
        }
    }

    /// Parameters in a fixed order: the six encoder tensors, then `W`.
    pub fn parameter_slices(&self) -> [&[f64]; 7] {
        let [a, b, c, d, e, f] = self.encoder.slices();
        [a, b, c, d, e, f, self.decoder.w.data()]
    }

    pub fn parameter_slices_mut(&mut self) -> [&mut [f64]; 7] {
        let [a, b, c, d, e, f] = self.encoder.slices_mut();
        [a, b, c, d, e, f, self.decoder.w.data_mut()]
    }

    pub fn parameter_count(&self) -> usize {
        self.parameter_slices().iter().map(|s| s.len()).sum()
    }
}

/// Gradient of the batch loss, shaped like the model parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelGradients {
    pub encoder: EncoderParams,
    pub decoder: Matrix,
}

impl ModelGradients {
    pub fn zeros_like(model: &VaeNmfModel) -> Self {
        Self {
            encoder: EncoderParams::zeros(model.input_dim, model.hidden, model.rank),
            decoder: Matrix::zeros(model.input_dim, model.rank),
        }
    }

    /// Same order as [`VaeNmfModel::parameter_slices`].
    pub fn slices(&self) -> [&[f64]; 7] {
        let [a, b, c, d, e, f] = self.encoder.slices();
        [a, b, c, d, e, f, self.decoder.data()]
    }
}
