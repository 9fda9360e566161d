use std::fs;
use std::path::{Path, PathBuf};

use gammadict_core::dataio::{
    load_model, read_csv_matrix, read_wav, save_model, synth_emg, synth_spectra, write_csv_matrix, write_wav,
    SpectraSpec, SyntheticSpec,
};
use gammadict_core::metrics::{dictionary_match, si_sdr, vaf};
use gammadict_core::nmf::{nmf, Objective};
use gammadict_core::signal::{enhance, EnhanceConfig, StftConfig};
use gammadict_core::{Matrix, Readout, Rng, TrainConfig};
use serde_json::json;

use crate::cli::{
    Algo, EmgArgs, EnhanceArgs, EvaluateArgs, ExtractArgs, Metric, Mode, ObjectiveArg, SpectraArgs, StftArgs,
    TrainArgs,
};
use crate::exit::Failure;
use crate::format::sig6;

type Outcome = Result<(), Failure>;

fn ensure_dir(dir: &Path) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| Failure::io(format!("cannot create {}: {e}", dir.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn print_json(value: serde_json::Value) {
    println!("{value}");
}

pub fn train(args: &TrainArgs) -> Outcome {
    let x = read_csv_matrix(&args.input)?;
    match args.algo {
        Algo::VaeNmf => train_vae(args, &x),
        Algo::Nmf => train_nmf(args, &x),
    }
}

fn train_vae(args: &TrainArgs, x: &Matrix) -> Outcome {
    let config = TrainConfig {
        rank: args.rank as usize,
        hidden: args.hidden,
        batch_size: args.batch_size as usize,
        learning_rate: args.learning_rate,
        weight_decay: args.weight_decay,
        gamma: args.gamma,
        prior_alpha: args.prior_alpha,
        epochs: args.epochs as usize,
        seed: args.seed,
    };
    let quiet = args.common.json;
    if !quiet {
        println!("{:>6}  {:>12}  {:>12}  {:>12}  {:>12}", "epoch", "total", "recon", "kl", "penalty");
    }
    let (model, history) = gammadict_core::trainer::train_with_observer(x, &config, |epoch, loss| {
        log::debug!("epoch {epoch}: {loss:?}");
        if !quiet {
            println!(
                "{epoch:>6}  {:>12}  {:>12}  {:>12}  {:>12}",
                sig6(loss.total),
                sig6(loss.recon),
                sig6(loss.kl),
                sig6(loss.penalty)
            );
        }
    })?;
    save_model(&args.model_out, &model, Some(&config))?;

    let exported = model.export_dictionary();
    let z = model.infer_activations(x, Readout::Mean, &mut Rng::seed_from_u64(args.seed))?;
    let fit = vaf(x, &exported.dict.w.matmul(&z)?)?;
    let last = history.epochs.last().expect("at least one epoch");
    let relative_mass = history.final_negative_mass / model.decoder.w.sum_of_squares().max(f64::MIN_POSITIVE);
    if quiet {
        print_json(json!({
            "command": "train",
            "algo": "vae-nmf",
            "epochs": history.epochs.len(),
            "loss": { "total": last.total, "recon": last.recon, "kl": last.kl, "penalty": last.penalty },
            "negative_mass": history.final_negative_mass,
            "relative_negative_mass": relative_mass,
            "vaf": fit.global,
            "model": args.model_out,
        }));
    } else {
        println!("negative mass {} (relative {})", sig6(history.final_negative_mass), sig6(relative_mass));
        println!("VAF {} %", sig6(fit.global));
        println!("model written to {}", args.model_out.display());
    }
    Ok(())
}

fn train_nmf(args: &TrainArgs, x: &Matrix) -> Outcome {
    let objective = match args.objective {
        ObjectiveArg::Frobenius => Objective::Frobenius,
        ObjectiveArg::Kl => Objective::Kl,
    };
    let result = nmf(x, args.rank as usize, args.iters, args.seed, objective)?;
    let w_out = args.w_out.clone().unwrap_or_else(|| with_suffix(&args.model_out, ".W.csv"));
    let h_out = args.h_out.clone().unwrap_or_else(|| with_suffix(&args.model_out, ".H.csv"));
    write_csv_matrix(&w_out, &result.w)?;
    write_csv_matrix(&h_out, &result.h)?;
    let fit = vaf(x, &result.w.matmul(&result.h)?)?;
    let last = *result.trace.last().expect("trace holds the initial objective");
    if args.common.json {
        print_json(json!({
            "command": "train",
            "algo": "nmf",
            "iters": args.iters,
            "objective": last,
            "vaf": fit.global,
            "w": w_out,
            "h": h_out,
        }));
    } else {
        println!("{:>6}  {:>12}", "iter", "objective");
        for (i, value) in result.trace.iter().enumerate() {
            println!("{i:>6}  {:>12}", sig6(*value));
        }
        println!("VAF {} %", sig6(fit.global));
        println!("dictionary written to {}, activations to {}", w_out.display(), h_out.display());
    }
    Ok(())
}

pub fn synth_emg_cmd(args: &EmgArgs) -> Outcome {
    let spec = SyntheticSpec {
        channels: args.channels,
        rank: args.rank,
        samples: args.samples,
        smoothing_span: args.smoothing_span,
        noise_sigma: args.noise_sigma,
        amplitude: args.amplitude,
        seed: args.seed,
    };
    let data = synth_emg(&spec)?;
    ensure_dir(&args.out_dir)?;
    let files = [("X.csv", &data.x), ("W_true.csv", &data.w_true), ("H_true.csv", &data.h_true)];
    for (name, matrix) in files {
        write_csv_matrix(args.out_dir.join(name), matrix)?;
    }
    let names: Vec<&str> = files.iter().map(|(n, _)| *n).collect();
    if args.common.json {
        print_json(json!({ "command": "synth-emg", "shape": [data.x.rows(), data.x.cols()], "files": names, "out_dir": args.out_dir }));
    } else {
        println!("{}x{} EMG matrix and ground truth written to {}", data.x.rows(), data.x.cols(), args.out_dir.display());
    }
    Ok(())
}

fn stft_config(args: &StftArgs, sample_rate: u32) -> StftConfig {
    StftConfig {
        frame_len: args.frame_len,
        hop: args.hop,
        sample_rate,
    }
}

pub fn synth_spectra_cmd(args: &SpectraArgs) -> Outcome {
    let spec = SpectraSpec {
        sample_rate: args.sample_rate,
        duration_secs: args.duration,
        tones_per_source: args.tones,
        bands: [args.speech_band, args.noise_band],
        dict_rank: args.dict_rank,
        nmf_iters: args.nmf_iters,
        stft: stft_config(&args.stft, args.sample_rate),
        seed: args.seed,
    };
    let mixture = synth_spectra(&spec)?;
    ensure_dir(&args.out_dir)?;
    let dir = &args.out_dir;
    write_wav(dir.join("mix.wav"), &mixture.mix, mixture.sample_rate)?;
    write_wav(dir.join("speech.wav"), &mixture.sources[0], mixture.sample_rate)?;
    write_wav(dir.join("noise.wav"), &mixture.sources[1], mixture.sample_rate)?;
    write_csv_matrix(dir.join("dict_speech.csv"), &mixture.dictionaries[0])?;
    write_csv_matrix(dir.join("dict_noise.csv"), &mixture.dictionaries[1])?;
    if args.common.json {
        print_json(json!({
            "command": "synth-spectra",
            "samples": mixture.mix.len(),
            "sample_rate": mixture.sample_rate,
            "files": ["mix.wav", "speech.wav", "noise.wav", "dict_speech.csv", "dict_noise.csv"],
            "out_dir": dir,
        }));
    } else {
        println!("{} samples at {} Hz with oracle dictionaries written to {}", mixture.mix.len(), mixture.sample_rate, dir.display());
    }
    Ok(())
}

pub fn extract(args: &ExtractArgs) -> Outcome {
    let (model, _) = load_model(&args.model)?;
    let x = read_csv_matrix(&args.input)?;
    let readout = match args.mode {
        Mode::Mean => Readout::Mean,
        Mode::Sample => Readout::Sample,
    };
    let z = model.infer_activations(&x, readout, &mut Rng::seed_from_u64(args.seed))?;
    write_csv_matrix(&args.out, &z)?;
    let exported = model.export_dictionary();
    if let Some(path) = &args.dict_out {
        write_csv_matrix(path, &exported.dict.w)?;
    }
    if args.common.json {
        print_json(json!({
            "command": "extract",
            "shape": [z.rows(), z.cols()],
            "clamped_mass": exported.clamped_mass,
            "out": args.out,
            "dict_out": args.dict_out,
        }));
    } else {
        println!("{}x{} activations written to {}", z.rows(), z.cols(), args.out.display());
        if let Some(path) = &args.dict_out {
            println!("dictionary written to {} (clamped mass {})", path.display(), sig6(exported.clamped_mass));
        }
    }
    Ok(())
}

pub fn enhance_cmd(args: &EnhanceArgs) -> Outcome {
    let speech = read_csv_matrix(&args.dict_speech)?;
    let noise = read_csv_matrix(&args.dict_noise)?;
    let (noisy, rate) = read_wav(&args.noisy)?;
    let config = EnhanceConfig {
        stft: stft_config(&args.stft, rate),
        iters: args.iters,
        seed: args.seed,
    };
    let enhanced = enhance(&noisy, &speech, &noise, &config)?;
    write_wav(&args.out, &enhanced, rate)?;

    let scores = match &args.reference {
        Some(path) => {
            let (reference, _) = read_wav(path)?;
            Some((si_sdr(&reference, &noisy)?, si_sdr(&reference, &enhanced)?))
        }
        None => None,
    };
    if args.common.json {
        let mut summary = json!({ "command": "enhance", "samples": enhanced.len(), "out": args.out });
        if let Some((before, after)) = scores {
            summary["si_sdr_input"] = json!(before);
            summary["si_sdr_output"] = json!(after);
            summary["improvement"] = json!(after - before);
        }
        print_json(summary);
    } else {
        println!("{} samples written to {}", enhanced.len(), args.out.display());
        if let Some((before, after)) = scores {
            println!("SI-SDR input {} dB, output {} dB, improvement {} dB", sig6(before), sig6(after), sig6(after - before));
        }
    }
    Ok(())
}

fn read_any(path: &Path) -> Result<Matrix, Failure> {
    let is_wav = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("wav"));
    if is_wav {
        let (samples, _) = read_wav(path)?;
        Ok(Matrix::new(1, samples.len(), samples)?)
    } else {
        Ok(read_csv_matrix(path)?)
    }
}

pub fn evaluate(args: &EvaluateArgs) -> Outcome {
    let reference = read_any(&args.reference)?;
    let estimate = read_any(&args.est)?;
    let (name, value, extra) = match args.metric {
        Metric::Vaf => {
            let report = vaf(&reference, &estimate)?;
            ("vaf", report.global, Some(json!(report.per_channel)))
        }
        Metric::Sisdr => ("sisdr", si_sdr(reference.data(), estimate.data())?, None),
        Metric::Dictmatch => ("dictmatch", dictionary_match(&estimate, &reference)?, None),
    };
    if args.common.json {
        let mut summary = json!({ "command": "evaluate", "metric": name, "value": value });
        if let Some(per_channel) = extra {
            summary["per_channel"] = per_channel;
        }
        print_json(summary);
    } else {
        println!("{name} {}", sig6(value));
    }
    Ok(())
}
