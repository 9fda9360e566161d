//! STFT analysis/synthesis and NMF Wiener-mask enhancement.
//!
//! The analysis pads `frame_len − hop` zeros in front of the signal and
//! enough zeros behind it that every original sample sits under a complete
//! set of overlapping frames. Synthesis is weighted overlap-add divided by
//! the summed squared window, then the padding is cut away, so
//! `istft(stft(x))` returns exactly `x.len()` samples and reconstructs all of
//! them, edges included.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nmf::solve_activations;
use crate::numkit::Matrix;

/// Floor in the Wiener mask denominator.
pub const MASK_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StftConfig {
    pub frame_len: usize,
    pub hop: usize,
    pub sample_rate: u32,
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            frame_len: 512,
            hop: 256,
            sample_rate: 16_000,
        }
    }
}

impl StftConfig {
    pub fn bins(&self) -> usize {
        self.frame_len / 2 + 1
    }

    /// Periodic Hann window of `frame_len` samples.
    pub fn window(&self) -> Vec<f64> {
        let n = self.frame_len as f64;
        (0..self.frame_len)
            .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n).cos())
            .collect()
    }

    /// Rejects non-power-of-two frames, bad hops, and hops at which the
    /// window does not overlap-add to a constant.
    pub fn validate(&self) -> Result<()> {
        if self.frame_len < 2 || !self.frame_len.is_power_of_two() {
            return Err(Error::Config(format!(
                "frame length must be a power of two >= 2, got {}",
                self.frame_len
            )));
        }
        if self.hop == 0 || self.hop > self.frame_len {
            return Err(Error::Config(format!(
                "hop must be in 1..={}, got {}",
                self.frame_len, self.hop
            )));
        }
        let window = self.window();
        let overlap_sum = |offset: usize| -> f64 { window.iter().skip(offset).step_by(self.hop).sum() };
        let reference = overlap_sum(0);
        if (0..self.hop).any(|k| (overlap_sum(k) - reference).abs() > 1e-9 * reference) {
            return Err(Error::Config(format!(
                "Hann window is not constant-overlap-add at frame {} / hop {}",
                self.frame_len, self.hop
            )));
        }
        Ok(())
    }

    fn front_padding(&self) -> usize {
        self.frame_len - self.hop
    }

    fn frame_count(&self, signal_len: usize) -> usize {
        (signal_len + self.front_padding()).div_ceil(self.hop)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Spectrogram {
    /// bins × frames, nonnegative.
    pub magnitudes: Matrix,
    /// bins × frames, radians.
    pub phases: Matrix,
    pub config: StftConfig,
    /// Length of the analysed signal, restored by [`istft`].
    pub signal_len: usize,
}

impl Spectrogram {
    pub fn frames(&self) -> usize {
        self.magnitudes.cols()
    }

    /// Same phases, new magnitudes.
    pub fn with_magnitudes(&self, magnitudes: Matrix) -> Result<Spectrogram> {
        if magnitudes.shape() != self.magnitudes.shape() {
            return Err(Error::Dimension {
                op: "with_magnitudes",
                left: self.magnitudes.shape(),
                right: magnitudes.shape(),
            });
        }
        Ok(Spectrogram {
            magnitudes,
            ..self.clone()
        })
    }
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(len)
    } else {
        planner.plan_fft_forward(len)
    }
}

pub fn stft(samples: &[f64], config: &StftConfig) -> Result<Spectrogram> {
    config.validate()?;
    if samples.len() < config.frame_len {
        return Err(Error::Config(format!(
            "signal of {} samples is shorter than one frame ({})",
            samples.len(),
            config.frame_len
        )));
    }
    if !samples.iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("stft input"));
    }
    let n = config.frame_len;
    let pad = config.front_padding();
    let frames = config.frame_count(samples.len());
    let bins = config.bins();
    let window = config.window();
    let fft = plan(n, false);

    let mut magnitudes = Matrix::zeros(bins, frames);
    let mut phases = Matrix::zeros(bins, frames);
    let mut buffer = vec![Complex64::default(); n];
    for f in 0..frames {
        let start = f * config.hop;
        for (i, slot) in buffer.iter_mut().enumerate() {
            let sample = (start + i)
                .checked_sub(pad)
                .and_then(|p| samples.get(p))
                .copied()
                .unwrap_or(0.0);
            *slot = Complex64::new(sample * window[i], 0.0);
        }
        fft.process(&mut buffer);
        for (k, c) in buffer.iter().take(bins).enumerate() {
            magnitudes[(k, f)] = c.norm();
            phases[(k, f)] = c.arg();
        }
    }
    Ok(Spectrogram {
        magnitudes,
        phases,
        config: *config,
        signal_len: samples.len(),
    })
}

pub fn istft(spec: &Spectrogram) -> Result<Vec<f64>> {
    let config = &spec.config;
    config.validate()?;
    let bins = config.bins();
    let frames = config.frame_count(spec.signal_len);
    for m in [&spec.magnitudes, &spec.phases] {
        if m.shape() != (bins, frames) {
            return Err(Error::Dimension {
                op: "istft",
                left: (bins, frames),
                right: m.shape(),
            });
        }
    }
    let n = config.frame_len;
    let window = config.window();
    let ifft = plan(n, true);
    let padded_len = (frames - 1) * config.hop + n;
    let mut acc = vec![0.0; padded_len];
    let mut weight = vec![0.0; padded_len];
    let mut buffer = vec![Complex64::default(); n];
    for f in 0..frames {
        for k in 0..bins {
            let c = Complex64::from_polar(spec.magnitudes[(k, f)], spec.phases[(k, f)]);
            buffer[k] = c;
            if k > 0 && k < n - k {
                buffer[n - k] = c.conj();
            }
        }
        // DC and Nyquist of a real signal are real
        buffer[0].im = 0.0;
        buffer[n / 2].im = 0.0;
        ifft.process(&mut buffer);
        let start = f * config.hop;
        for i in 0..n {
            acc[start + i] += window[i] * buffer[i].re / n as f64;
            weight[start + i] += window[i] * window[i];
        }
    }
    let pad = config.front_padding();
    Ok((pad..pad + spec.signal_len)
        .map(|p| if weight[p] > 1e-10 { acc[p] / weight[p] } else { 0.0 })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnhanceConfig {
    pub stft: StftConfig,
    /// Multiplicative updates for the activation solve.
    pub iters: usize,
    /// Seed of the activation initialization.
    pub seed: u64,
}

impl Default for EnhanceConfig {
    fn default() -> Self {
        Self {
            stft: StftConfig::default(),
            iters: 200,
            seed: 0,
        }
    }
}

/// Wiener mask `S ⊘ (S + N + floor)` from the two partial reconstructions.
pub fn wiener_mask(speech: &Matrix, noise: &Matrix) -> Result<Matrix> {
    if speech.shape() != noise.shape() {
        return Err(Error::Dimension {
            op: "wiener_mask",
            left: speech.shape(),
            right: noise.shape(),
        });
    }
    let mut mask = speech.clone();
    for (m, &n) in mask.data_mut().iter_mut().zip(noise.data()) {
        *m /= *m + n + MASK_FLOOR;
    }
    Ok(mask)
}

/// Separates the speech part of `noisy` using fixed speech and noise
/// dictionaries over the magnitude spectrogram; the output keeps the noisy
/// phase and has the input's length.
pub fn enhance(noisy: &[f64], speech_dict: &Matrix, noise_dict: &Matrix, config: &EnhanceConfig) -> Result<Vec<f64>> {
    let bins = config.stft.bins();
    for d in [speech_dict, noise_dict] {
        if d.rows() != bins {
            return Err(Error::Dimension {
                op: "enhance dictionary",
                left: (bins, d.cols()),
                right: d.shape(),
            });
        }
    }
    let spec = stft(noisy, &config.stft)?;
    let joint = speech_dict.hstack(noise_dict)?;
    let (h, _) = solve_activations(&spec.magnitudes, &joint, config.iters, config.seed)?;
    let rs = speech_dict.cols();
    let speech = speech_dict.matmul(&h.row_range(0, rs))?;
    let noise = noise_dict.matmul(&h.row_range(rs, h.rows()))?;
    let mask = wiener_mask(&speech, &noise)?;
    let enhanced = spec.with_magnitudes(mask.hadamard(&spec.magnitudes)?)?;
    istft(&enhanced)
}
