use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "gammadict", version, about = "Nonnegative dictionary learning with VAE-NMF and NMF")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Learn a dictionary from a CSV matrix (columns are samples).
    #[command(args_override_self = true)]
    Train(TrainArgs),
    /// Generate synthetic datasets with ground truth.
    #[command(subcommand)]
    Synth(SynthCommand),
    /// Infer activations (and optionally the clamped dictionary) with a trained model.
    #[command(args_override_self = true)]
    Extract(ExtractArgs),
    /// Wiener-mask enhancement of a WAV file with speech and noise dictionaries.
    #[command(args_override_self = true)]
    Enhance(EnhanceArgs),
    /// Compare a reference and an estimate.
    #[command(args_override_self = true)]
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// File of `key = value` lines supplying flag values; command-line flags win.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Print a single-line JSON summary instead of tables.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    VaeNmf,
    Nmf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ObjectiveArg {
    Frobenius,
    Kl,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Nonnegative data matrix, CSV, one sample per column.
    #[arg(long)]
    pub input: PathBuf,
    /// Model JSON (vae-nmf); for nmf, the stem of the W/H CSV outputs.
    #[arg(long)]
    pub model_out: PathBuf,
    #[arg(long, value_enum, default_value_t = Algo::VaeNmf)]
    pub algo: Algo,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..))]
    pub rank: u64,
    /// Weight of the negative-decoder-weight penalty.
    #[arg(long, default_value_t = 10.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    pub epochs: u64,
    #[arg(long, env = "GAMMADICT_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Encoder hidden layer widths.
    #[arg(long, default_value = "400,400", value_parser = parse_hidden)]
    pub hidden: [usize; 2],
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch_size: u64,
    #[arg(long, default_value_t = 1e-3)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 5e-4)]
    pub weight_decay: f64,
    /// Shape of the Gamma prior on activations.
    #[arg(long, default_value_t = 2.0)]
    pub prior_alpha: f64,
    /// Multiplicative-update iterations (nmf only).
    #[arg(long, default_value_t = 500)]
    pub iters: usize,
    /// Divergence minimized by nmf.
    #[arg(long, value_enum, default_value_t = ObjectiveArg::Frobenius)]
    pub objective: ObjectiveArg,
    /// Dictionary CSV for nmf [default: <model-out stem>.W.csv].
    #[arg(long)]
    pub w_out: Option<PathBuf>,
    /// Activation CSV for nmf [default: <model-out stem>.H.csv].
    #[arg(long)]
    pub h_out: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// Synergy-style EMG: X.csv, W_true.csv, H_true.csv.
    #[command(args_override_self = true)]
    Emg(EmgArgs),
    /// Two-source tonal mixture: mix.wav, speech.wav, noise.wav, dict_speech.csv, dict_noise.csv.
    #[command(args_override_self = true)]
    Spectra(SpectraArgs),
}

#[derive(Debug, Args)]
pub struct EmgArgs {
    #[arg(long, default_value_t = 10)]
    pub channels: usize,
    #[arg(long, default_value_t = 4)]
    pub rank: usize,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    /// Moving-average length shaping the activation bursts.
    #[arg(long, default_value_t = 25)]
    pub smoothing_span: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise_sigma: f64,
    /// Peak value of each activation row.
    #[arg(long, default_value_t = 20.0)]
    pub amplitude: f64,
    #[arg(long, env = "GAMMADICT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct SpectraArgs {
    #[arg(long, default_value_t = 16_000)]
    pub sample_rate: u32,
    /// Length in seconds.
    #[arg(long, default_value_t = 4.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 8)]
    pub tones: usize,
    /// Band of the target source, `low,high` in Hz.
    #[arg(long, default_value = "200,1800", value_parser = parse_band)]
    pub speech_band: (f64, f64),
    /// Band of the interfering source, `low,high` in Hz.
    #[arg(long, default_value = "2600,6000", value_parser = parse_band)]
    pub noise_band: (f64, f64),
    /// Rank of each oracle NMF dictionary.
    #[arg(long, default_value_t = 40)]
    pub dict_rank: usize,
    #[arg(long, default_value_t = 300)]
    pub nmf_iters: usize,
    #[command(flatten)]
    pub stft: StftArgs,
    #[arg(long, env = "GAMMADICT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct StftArgs {
    #[arg(long, default_value_t = 512)]
    pub frame_len: usize,
    #[arg(long, default_value_t = 256)]
    pub hop: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Mean,
    Sample,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Data matrix, CSV, one sample per column.
    #[arg(long)]
    pub input: PathBuf,
    /// Posterior mean or one posterior draw per sample.
    #[arg(long, value_enum, default_value_t = Mode::Mean)]
    pub mode: Mode,
    /// Activation matrix output.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the dictionary with negative entries clamped to zero.
    #[arg(long)]
    pub dict_out: Option<PathBuf>,
    #[arg(long, env = "GAMMADICT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EnhanceArgs {
    /// Mono 16-bit PCM input.
    #[arg(long)]
    pub noisy: PathBuf,
    #[arg(long)]
    pub dict_speech: PathBuf,
    #[arg(long)]
    pub dict_noise: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Clean target; when given, SI-SDR before and after is reported.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[command(flatten)]
    pub stft: StftArgs,
    /// Multiplicative updates for the activation solve.
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    #[arg(long, env = "GAMMADICT_SEED", default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Vaf,
    Sisdr,
    Dictmatch,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Reference, CSV or WAV (by extension).
    #[arg(long = "ref")]
    pub reference: PathBuf,
    /// Estimate, CSV or WAV (by extension).
    #[arg(long)]
    pub est: PathBuf,
    #[arg(long, value_enum)]
    pub metric: Metric,
    #[command(flatten)]
    pub common: Common,
}

fn parse_pair(text: &str) -> Result<(&str, &str), String> {
    text.split_once(',')
        .map(|(a, b)| (a.trim(), b.trim()))
        .ok_or_else(|| format!("expected two comma-separated values, got `{text}`"))
}

fn parse_hidden(text: &str) -> Result<[usize; 2], String> {
    let (a, b) = parse_pair(text)?;
    let parse = |s: &str| match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("hidden sizes must be positive integers, got `{text}`")),
        Ok(v) => Ok(v),
    };
    Ok([parse(a)?, parse(b)?])
}

fn parse_band(text: &str) -> Result<(f64, f64), String> {
    let (a, b) = parse_pair(text)?;
    let parse = |s: &str| s.parse::<f64>().map_err(|e| format!("`{s}`: {e}"));
    Ok((parse(a)?, parse(b)?))
}
