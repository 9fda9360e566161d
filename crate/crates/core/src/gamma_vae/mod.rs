//! VAE-NMF: a ReLU encoder emitting Gamma shapes, the reparameterized
//! Gamma latent layer, and a linear decoder `x̂ = W z` whose negative
//! weights are penalized quadratically.

mod loss;
mod model;

pub use loss::{
    evaluate, kl_gamma, loss, loss_with_noise, negative_mass, negweight_penalty,
    negweight_penalty_grad, param_gradients, BatchEvaluation, LossBreakdown, Noise,
};
pub use model::{
    DecoderDict, EncoderParams, ExportedDictionary, GammaPosterior, ModelGradients, Readout,
    VaeNmfModel,
};
