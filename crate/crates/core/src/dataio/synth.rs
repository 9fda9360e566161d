//! Seeded synthetic datasets: muscle-synergy-like EMG envelopes and
//! two-source tonal mixtures with disjoint frequency bands.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nmf::{nmf, Objective};
use crate::numkit::{Matrix, Rng};
use crate::signal::{stft, StftConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// Channels (rows of X).
    pub channels: usize,
    /// True number of synergies.
    pub rank: usize,
    /// Time samples (columns of X).
    pub samples: usize,
    /// Moving-average span applied to the rectified activation noise.
    pub smoothing_span: usize,
    /// Scale of the additive rectified Gaussian noise.
    pub noise_sigma: f64,
    /// Peak value of every activation row.
    pub amplitude: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            channels: 10,
            rank: 4,
            samples: 2000,
            smoothing_span: 25,
            noise_sigma: 0.05,
            amplitude: 20.0,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.channels == 0 || self.rank == 0 || self.samples == 0 || self.smoothing_span == 0 {
            return Err(Error::Config("synthetic counts must all be at least 1".into()));
        }
        if self.rank > self.channels {
            return Err(Error::Config(format!(
                "rank {} exceeds channel count {}",
                self.rank, self.channels
            )));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config(format!("noise sigma must be >= 0, got {}", self.noise_sigma)));
        }
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(Error::Config(format!("amplitude must be > 0, got {}", self.amplitude)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticEmg {
    /// channels × samples
    pub x: Matrix,
    /// channels × rank, columns with distinct primary support
    pub w_true: Matrix,
    /// rank × samples
    pub h_true: Matrix,
}

/// Channel `i` belongs primarily to synergy `i mod r` (weight in
/// [0.5, 1]); each other synergy touches it with probability 0.2 at a
/// weight in [0.05, 0.3]. Activations are rectified, thresholded Gaussian
/// noise smoothed by a moving average and scaled to peak at `amplitude`.
pub fn synth_emg(spec: &SyntheticSpec) -> Result<SyntheticEmg> {
    spec.validate()?;
    let (m, r, n) = (spec.channels, spec.rank, spec.samples);
    let mut rng = Rng::seed_from_u64(spec.seed);

    let w_true = Matrix::from_fn(m, r, |i, j| {
        let draw = rng.uniform();
        if i % r == j {
            rng.uniform_range(0.5, 1.0)
        } else if draw < 0.2 {
            rng.uniform_range(0.05, 0.3)
        } else {
            0.0
        }
    });

    let span = spec.smoothing_span.min(n);
    let mut h_true = Matrix::zeros(r, n);
    for k in 0..r {
        let raw: Vec<f64> = (0..n + span).map(|_| (rng.normal() - 0.5).max(0.0)).collect();
        let mut window: f64 = raw[..span].iter().sum();
        let mut row = Vec::with_capacity(n);
        for t in 0..n {
            row.push(window / span as f64);
            window += raw[t + span] - raw[t];
        }
        let peak = row.iter().copied().fold(0.0, f64::max);
        let scale = if peak > 0.0 { spec.amplitude / peak } else { 0.0 };
        for (t, v) in row.into_iter().enumerate() {
            h_true[(k, t)] = (v * scale).max(0.0);
        }
    }

    let mut x = w_true.matmul(&h_true)?;
    for v in x.data_mut() {
        *v = (*v + spec.noise_sigma * rng.normal().abs()).max(0.0);
    }
    Ok(SyntheticEmg { x, w_true, h_true })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectraSpec {
    pub sample_rate: u32,
    pub duration_secs: f64,
    pub tones_per_source: usize,
    /// Frequency band (Hz) of each source; the two must not overlap.
    pub bands: [(f64, f64); 2],
    /// Rank of each oracle dictionary.
    pub dict_rank: usize,
    pub nmf_iters: usize,
    pub stft: StftConfig,
    pub seed: u64,
}

impl Default for SpectraSpec {
    fn default() -> Self {
        Self {
            sample_rate: 16_000,
            duration_secs: 4.0,
            tones_per_source: 8,
            bands: [(200.0, 1800.0), (2600.0, 6000.0)],
            dict_rank: 40,
            nmf_iters: 300,
            stft: StftConfig::default(),
            seed: 0,
        }
    }
}

impl SpectraSpec {
    pub fn validate(&self) -> Result<()> {
        let nyquist = f64::from(self.sample_rate) / 2.0;
        let [(a0, a1), (b0, b1)] = self.bands;
        if !(0.0 < a0 && a0 < a1 && 0.0 < b0 && b0 < b1 && a1.max(b1) < nyquist) {
            return Err(Error::Config(format!(
                "bands {:?} must be increasing and below Nyquist ({nyquist} Hz)",
                self.bands
            )));
        }
        if a1 >= b0 && b1 >= a0 {
            return Err(Error::Config(format!("bands {:?} overlap", self.bands)));
        }
        if self.tones_per_source == 0 || self.dict_rank == 0 || self.nmf_iters == 0 {
            return Err(Error::Config("tone count, dictionary rank and NMF iterations must be >= 1".into()));
        }
        if !(self.duration_secs > 0.0) {
            return Err(Error::Config(format!("duration must be positive, got {}", self.duration_secs)));
        }
        if self.stft.sample_rate != self.sample_rate {
            return Err(Error::Config("STFT sample rate differs from the signal rate".into()));
        }
        self.stft.validate()
    }

    pub fn len(&self) -> usize {
        (self.duration_secs * f64::from(self.sample_rate)).round() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticMixture {
    pub mix: Vec<f64>,
    /// Target ("speech") source and interfering ("noise") source; they sum
    /// exactly to `mix` and carry equal energy.
    pub sources: [Vec<f64>; 2],
    /// NMF dictionaries of each clean magnitude spectrogram (bins × rank).
    pub dictionaries: [Matrix; 2],
    pub sample_rate: u32,
}

/// Sum of amplitude-modulated tones inside `band`. Each tone is gated by a
/// raised, squared sinusoid at 0.5–3 Hz so tones switch on and off
/// independently.
fn tonal_source(len: usize, rate: f64, band: (f64, f64), tones: usize, rng: &mut Rng) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for _ in 0..tones {
        let freq = rng.uniform_range(band.0, band.1);
        let amp = rng.uniform_range(0.5, 1.0);
        let phase = rng.uniform_range(0.0, 2.0 * PI);
        let mod_freq = rng.uniform_range(0.5, 3.0);
        let mod_phase = rng.uniform_range(0.0, 2.0 * PI);
        for (t, o) in out.iter_mut().enumerate() {
            let time = t as f64 / rate;
            let gate = (2.0 * PI * mod_freq * time + mod_phase).sin().max(0.0).powi(2);
            *o += amp * gate * (2.0 * PI * freq * time + phase).sin();
        }
    }
    out
}

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Two tonal sources mixed at 0 dB, peak-normalized to 0.9, with oracle
/// dictionaries learned by Frobenius NMF on each clean source.
pub fn synth_spectra(spec: &SpectraSpec) -> Result<SyntheticMixture> {
    spec.validate()?;
    let len = spec.len();
    let rate = f64::from(spec.sample_rate);
    let mut rng = Rng::seed_from_u64(spec.seed);
    let target = tonal_source(len, rate, spec.bands[0], spec.tones_per_source, &mut rng);
    let mut interferer = tonal_source(len, rate, spec.bands[1], spec.tones_per_source, &mut rng);
    let gain = (energy(&target) / energy(&interferer)).sqrt();
    interferer.iter_mut().for_each(|v| *v *= gain);

    let mix: Vec<f64> = target.iter().zip(&interferer).map(|(a, b)| a + b).collect();
    let peak = mix.iter().fold(0.0f64, |p, v| p.max(v.abs()));
    let norm = 0.9 / peak;
    let scale = |x: &[f64]| x.iter().map(|v| v * norm).collect::<Vec<_>>();
    let sources = [scale(&target), scale(&interferer)];
    let mix = scale(&mix);

    let mut dictionaries = Vec::with_capacity(2);
    for (k, source) in sources.iter().enumerate() {
        let magnitudes = stft(source, &spec.stft)?.magnitudes;
        let result = nmf(&magnitudes, spec.dict_rank, spec.nmf_iters, spec.seed.wrapping_add(k as u64 + 1), Objective::Frobenius)?;
        dictionaries.push(result.w);
    }
    let [a, b]: [Matrix; 2] = dictionaries.try_into().expect("two dictionaries");
    Ok(SyntheticMixture {
        mix,
        sources,
        dictionaries: [a, b],
        sample_rate: spec.sample_rate,
    })
}
