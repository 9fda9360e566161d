//! Nonnegative dictionary learning with a Gamma-latent variational
//! autoencoder (VAE-NMF), a multiplicative-update NMF baseline, and the
//! signal, metric and I/O plumbing around them.

// Domain guards are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dataio;
pub mod error;
pub mod gamma_vae;
pub mod metrics;
pub mod nmf;
pub mod numkit;
pub mod signal;
pub mod trainer;

pub use error::{Error, Result};
pub use gamma_vae::{DecoderDict, GammaPosterior, LossBreakdown, Readout, VaeNmfModel};
pub use numkit::{Matrix, Rng};
pub use trainer::{TrainConfig, TrainHistory};
