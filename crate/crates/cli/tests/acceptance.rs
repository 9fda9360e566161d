//! Acceptance suite: each criterion prints one PASS/FAIL line and the
//! process exits non-zero if any fails.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use gammadict_core::dataio::{synth_emg, synth_spectra, SpectraSpec, SyntheticEmg, SyntheticSpec};
use gammadict_core::gamma_vae::{evaluate, kl_gamma, loss_with_noise, negative_mass, Noise};
use gammadict_core::metrics::{dictionary_match, kl_quadrature_oracle, ks_distance, si_sdr, vaf};
use gammadict_core::nmf::{is_non_increasing, nmf, Objective};
use gammadict_core::numkit::{digamma, gamma_cdf, lgamma, sample_gamma};
use gammadict_core::signal::{enhance, istft, stft, EnhanceConfig, StftConfig};
use gammadict_core::trainer::train;
use gammadict_core::{Matrix, Readout, Rng, TrainConfig, VaeNmfModel};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

/// Desk-scale training configuration shared by the EMG criteria.
fn desk_config(seed: u64) -> TrainConfig {
    TrainConfig {
        hidden: [32, 32],
        batch_size: 32,
        epochs: 200,
        gamma: 10.0,
        seed,
        ..TrainConfig::default()
    }
}

fn emg() -> &'static SyntheticEmg {
    static DATA: OnceLock<SyntheticEmg> = OnceLock::new();
    DATA.get_or_init(|| synth_emg(&SyntheticSpec::default()).expect("default spec is valid"))
}

/// Models trained on the default EMG set with seeds 0..5.
fn emg_models() -> &'static [VaeNmfModel] {
    static MODELS: OnceLock<Vec<VaeNmfModel>> = OnceLock::new();
    MODELS.get_or_init(|| {
        (0..5)
            .map(|seed| train(&emg().x, &desk_config(seed)).expect("training succeeds").0)
            .collect()
    })
}

fn gradient_check() -> Verdict {
    let started = Instant::now();
    let mut rng = Rng::seed_from_u64(2024);
    let mut model = VaeNmfModel::new(6, [8, 8], 3, 2.0, &mut rng).unwrap();
    model.decoder.w = Matrix::from_fn(6, 3, |_, _| rng.normal() * 0.5);
    let batch = Matrix::from_fn(6, 4, |_, _| 2.0 * rng.uniform());
    let gamma = 10.0;
    let eval = evaluate(&model, &batch, Noise::Draw(&mut rng), gamma, true).unwrap();
    let grads = eval.gradients.unwrap();
    let step = 1e-5;
    let (mut checked, mut worst_abs, mut worst_rel) = (0, 0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for t in 0..7 {
        for k in 0..model.parameter_slices()[t].len() {
            let mut plus = model.clone();
            plus.parameter_slices_mut()[t][k] += step;
            let mut minus = model.clone();
            minus.parameter_slices_mut()[t][k] -= step;
            let lp = loss_with_noise(&plus, &batch, &eval.noise, gamma).unwrap().total;
            let lm = loss_with_noise(&minus, &batch, &eval.noise, gamma).unwrap().total;
            let fd = (lp - lm) / (2.0 * step);
            let exact = grads.slices()[t][k];
            let abs = (fd - exact).abs();
            let rel = abs / exact.abs().max(f64::MIN_POSITIVE);
            worst_abs = worst_abs.max(abs);
            if exact.abs() > 1e-3 {
                worst_rel = worst_rel.max(rel);
            }
            if abs > 1e-7 && rel > 1e-4 {
                failures.push(format!("tensor {t}[{k}]: {exact} vs {fd}"));
            }
            checked += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        failures.is_empty() && secs < 5.0,
        format!(
            "{checked} entries, worst absolute error {worst_abs:.1e}, worst relative error {worst_rel:.1e} \
             where |g| > 1e-3, {secs:.2}s{}",
            failures.first().map(|f| format!(", first mismatch {f}")).unwrap_or_default()
        ),
    )
}

/// The KL closed form with the alternative last term α₁(β₁/β₂ − 1).
fn kl_alternative_form(a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    (a1 - a2) * digamma(a1).unwrap() - lgamma(a1).unwrap() + lgamma(a2).unwrap() + a2 * (b1.ln() - b2.ln())
        + a1 * (b1 / b2 - 1.0)
}

fn kl_arbitration() -> Verdict {
    let alphas = [0.5, 1.0, 2.0, 5.0];
    let betas = [0.5, 1.0, 2.0];
    let (mut cases, mut standard_ok, mut alt_ok, mut alt_ok_equal_rates) = (0, 0, 0, 0);
    let mut worst = 0.0f64;
    for &a1 in &alphas {
        for &b1 in &betas {
            for &a2 in &alphas {
                for &b2 in &betas {
                    let oracle = kl_quadrature_oracle(a1, b1, a2, b2).unwrap();
                    let err = (kl_gamma(a1, b1, a2, b2).unwrap() - oracle).abs();
                    worst = worst.max(err);
                    cases += 1;
                    standard_ok += usize::from(err < 1e-6);
                    if (kl_alternative_form(a1, b1, a2, b2) - oracle).abs() < 1e-6 {
                        alt_ok += 1;
                        alt_ok_equal_rates += usize::from(b1 == b2);
                    }
                }
            }
        }
    }
    verdict(
        cases == 144 && standard_ok == cases,
        format!(
            "standard form matched {standard_ok}/{cases} (worst {worst:.1e}); alternative last term α₁(β₁/β₂ − 1) matched \
             {alt_ok}/{cases}, {alt_ok_equal_rates} of them with equal rates, so it deviates whenever rates differ"
        ),
    )
}

fn sampler_exactness() -> Verdict {
    let started = Instant::now();
    let mut cases: Vec<(f64, f64)> = Vec::new();
    for alpha in [1.0, 2.5, 7.0] {
        for beta in [1.0, 2.0] {
            cases.push((alpha, beta));
        }
    }
    cases.push((0.5, 1.0));
    let mut rng = Rng::seed_from_u64(31);
    let mut worst = 0.0f64;
    let mut report = Vec::new();
    for (alpha, beta) in cases {
        let draws: Vec<f64> = (0..100_000).map(|_| sample_gamma(&mut rng, alpha, beta).unwrap()).collect();
        let d = ks_distance(&draws, |x| gamma_cdf(x, alpha, beta).unwrap()).unwrap();
        worst = worst.max(d);
        report.push(format!("({alpha},{beta}):{d:.4}"));
    }
    let secs = started.elapsed().as_secs_f64();
    verdict(
        worst < 0.01 && secs < 10.0,
        format!("KS {} in {secs:.2}s", report.join(" ")),
    )
}

fn nonnegativity() -> Verdict {
    let model = &emg_models()[0];
    let w = &model.decoder.w;
    let mass = negative_mass(w);
    let bound = 1e-3 * w.sum_of_squares();
    let exported = model.export_dictionary();
    let negatives = exported.dict.w.data().iter().filter(|&&v| v < 0.0).count();
    verdict(
        mass < bound && negatives == 0,
        format!("pre-clamp negative mass {mass:.3e} (bound {bound:.3e}), {negatives} negative entries after export"),
    )
}

fn synergy_vaf() -> Verdict {
    let data = emg();
    let baseline = nmf(&data.x, 4, 500, 0, Objective::Frobenius).unwrap();
    let nmf_vaf = vaf(&data.x, &baseline.w.matmul(&baseline.h).unwrap()).unwrap().global;
    let model = &emg_models()[0];
    let z = model.infer_activations(&data.x, Readout::Mean, &mut Rng::seed_from_u64(0)).unwrap();
    let dict = model.export_dictionary().dict.w;
    let vae_vaf = vaf(&data.x, &dict.matmul(&z).unwrap()).unwrap().global;
    let ordering = if vae_vaf <= nmf_vaf { "VAE-NMF <= NMF" } else { "VAE-NMF > NMF" };
    verdict(
        nmf_vaf > 90.0 && vae_vaf > 90.0,
        format!("NMF {nmf_vaf:.2}%, VAE-NMF {vae_vaf:.2}% ({ordering}, not gated)"),
    )
}

fn dictionary_recovery() -> Verdict {
    let scores: Vec<f64> = emg_models()
        .iter()
        .map(|m| dictionary_match(&m.export_dictionary().dict.w, &emg().w_true).unwrap())
        .collect();
    let passing = scores.iter().filter(|&&s| s >= 0.80).count();
    let listed: Vec<String> = scores.iter().map(|s| format!("{s:.3}")).collect();
    verdict(passing >= 4, format!("match per seed [{}], {passing}/5 >= 0.80", listed.join(", ")))
}

fn enhancement() -> Verdict {
    let mut pass = true;
    let mut report = Vec::new();
    for seed in 0..3u64 {
        let spec = SpectraSpec { seed, ..SpectraSpec::default() };
        let mixture = synth_spectra(&spec).unwrap();
        let config = EnhanceConfig { stft: spec.stft, ..EnhanceConfig::default() };
        let target = &mixture.sources[0];
        let unprocessed = si_sdr(target, &mixture.mix).unwrap();
        let oracle = enhance(&mixture.mix, &mixture.dictionaries[0], &mixture.dictionaries[1], &config).unwrap();
        let oracle_sdr = si_sdr(target, &oracle).unwrap();
        let dicts: Vec<Matrix> = mixture
            .sources
            .iter()
            .zip(0u64..)
            .map(|(source, k)| {
                let magnitudes = stft(source, &spec.stft).unwrap().magnitudes;
                let config = TrainConfig { rank: 8, ..desk_config(2 * seed + k) };
                train(&magnitudes, &config).unwrap().0.export_dictionary().dict.w
            })
            .collect();
        let learned = enhance(&mixture.mix, &dicts[0], &dicts[1], &config).unwrap();
        let vae_sdr = si_sdr(target, &learned).unwrap();
        let improvement = vae_sdr - unprocessed;
        pass &= improvement >= 5.0 && vae_sdr >= oracle_sdr - 1.0;
        report.push(format!(
            "seed {seed}: mix {unprocessed:.2} dB, VAE-NMF {vae_sdr:.2} dB (+{improvement:.2}), oracle NMF {oracle_sdr:.2} dB"
        ));
    }
    verdict(pass, report.join("; "))
}

fn nmf_monotonicity() -> Verdict {
    let mut failures = Vec::new();
    for seed in 0..20u64 {
        let mut rng = Rng::seed_from_u64(seed);
        let (m, n) = (8 + rng.index(8), 10 + rng.index(10));
        let x = Matrix::from_fn(m, n, |_, _| rng.uniform() * 3.0);
        for objective in [Objective::Frobenius, Objective::Kl] {
            let result = nmf(&x, 3, 200, seed, objective).unwrap();
            if !is_non_increasing(&result.trace, 1e-12) {
                failures.push(format!("seed {seed} {objective:?}"));
            }
        }
    }
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            "40 traces of 201 values, all non-increasing".to_string()
        } else {
            format!("increasing traces: {}", failures.join(", "))
        },
    )
}

fn stft_reconstruction() -> Verdict {
    let config = StftConfig::default();
    let mut rng = Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let len = 4000 + rng.index(4000);
        let x: Vec<f64> = (0..len).map(|_| rng.normal()).collect();
        let y = istft(&stft(&x, &config).unwrap()).unwrap();
        assert_eq!(y.len(), x.len());
        let interior = config.frame_len..len - config.frame_len;
        let err: f64 = interior.clone().map(|i| (y[i] - x[i]).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = interior.map(|i| x[i] * x[i]).sum::<f64>().sqrt();
        worst = worst.max(err / norm);
    }
    verdict(worst < 1e-10, format!("worst relative interior error {worst:.2e} over 10 signals"))
}

fn run_cli(args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_gammadict"))
        .args(args)
        .env_remove("GAMMADICT_SEED")
        .stdout(std::process::Stdio::null())
        .status()
        .expect("binary runs");
    assert!(status.success(), "gammadict {args:?} failed with {status}");
}

fn same_files(a: &Path, b: &Path, names: &[&str]) -> bool {
    names.iter().all(|n| fs::read(a.join(n)).unwrap() == fs::read(b.join(n)).unwrap())
}

fn determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let dir = |name: &str| tmp.path().join(name);
    let s = |p: &Path| p.to_str().unwrap().to_string();

    let emg_files = ["X.csv", "W_true.csv", "H_true.csv"];
    for out in ["emg_a", "emg_b"] {
        run_cli(&["synth", "emg", "--samples", "400", "--seed", "5", "--out-dir", &s(&dir(out))]);
    }
    let emg_same = same_files(&dir("emg_a"), &dir("emg_b"), &emg_files);

    let spectra_files = ["mix.wav", "speech.wav", "noise.wav", "dict_speech.csv", "dict_noise.csv"];
    for out in ["sp_a", "sp_b"] {
        run_cli(&[
            "synth", "spectra", "--duration", "1", "--dict-rank", "6", "--nmf-iters", "40", "--seed", "3",
            "--out-dir", &s(&dir(out)),
        ]);
    }
    let spectra_same = same_files(&dir("sp_a"), &dir("sp_b"), &spectra_files);

    let input = s(&dir("emg_a").join("X.csv"));
    for model in ["model_a.json", "model_b.json"] {
        run_cli(&[
            "train", "--input", &input, "--model-out", &s(&dir(model)), "--hidden", "16,16", "--epochs", "30",
            "--batch-size", "32", "--seed", "11",
        ]);
    }
    let model_same = fs::read(dir("model_a.json")).unwrap() == fs::read(dir("model_b.json")).unwrap();

    let lib_same = synth_emg(&SyntheticSpec { seed: 8, ..SyntheticSpec::default() }).unwrap()
        == synth_emg(&SyntheticSpec { seed: 8, ..SyntheticSpec::default() }).unwrap();
    let small = SpectraSpec { duration_secs: 0.5, dict_rank: 4, nmf_iters: 20, seed: 4, ..SpectraSpec::default() };
    let lib_spectra_same = synth_spectra(&small).unwrap() == synth_spectra(&small).unwrap();

    verdict(
        emg_same && spectra_same && model_same && lib_same && lib_spectra_same,
        format!(
            "model files identical: {model_same}; emg files: {emg_same}; spectra files: {spectra_same}; \
             library generators: {}",
            lib_same && lib_spectra_same
        ),
    )
}

type Criterion = (&'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 10] = [
        ("gradient correctness", gradient_check),
        ("Gamma KL closed form vs quadrature", kl_arbitration),
        ("sampler exactness", sampler_exactness),
        ("dictionary nonnegativity", nonnegativity),
        ("synergy VAF", synergy_vaf),
        ("dictionary recovery", dictionary_recovery),
        ("spectrogram enhancement", enhancement),
        ("NMF monotonicity", nmf_monotonicity),
        ("STFT reconstruction", stft_reconstruction),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (idx, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|panic| {
            let msg = panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        failed += usize::from(!outcome.pass);
        println!(
            "AC{:<2} {} {name}: {} [{:.1}s]",
            idx + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail,
            started.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
