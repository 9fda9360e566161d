use gammadict_core::dataio::{load_model, save_model, synth_emg, SyntheticSpec};
use gammadict_core::gamma_vae::loss_with_noise;
use gammadict_core::trainer::{train, Trainer};
use gammadict_core::{Matrix, Readout, Rng, TrainConfig};

fn desk(seed: u64) -> TrainConfig {
    TrainConfig {
        hidden: [32, 32],
        batch_size: 32,
        seed,
        ..TrainConfig::default()
    }
}

#[test]
fn fifty_adam_steps_lower_the_loss_for_most_seeds() {
    let data = synth_emg(&SyntheticSpec::default()).unwrap();
    let probe_idx: Vec<usize> = (0..2000).step_by(8).collect();
    let probe = data.x.select_columns(&probe_idx);
    let mut noise_rng = Rng::seed_from_u64(99);
    let eps = Matrix::from_fn(4, probe.cols(), |_, _| noise_rng.normal().clamp(-2.0, 2.0));

    let mut improved = 0;
    for seed in 0..50 {
        let mut trainer = Trainer::new(&data.x, desk(seed)).unwrap();
        let before = loss_with_noise(trainer.model(), &probe, &eps, 10.0).unwrap().total;
        let mut batch_rng = Rng::seed_from_u64(1000 + seed);
        for _ in 0..50 {
            let batch: Vec<usize> = (0..32).map(|_| batch_rng.index(2000)).collect();
            trainer.step(&batch).unwrap();
        }
        let after = loss_with_noise(trainer.model(), &probe, &eps, 10.0).unwrap().total;
        improved += usize::from(after < before);
    }
    assert!(improved >= 45, "only {improved}/50 seeds improved");
}

#[test]
fn desk_run_ends_below_its_first_epoch() {
    let data = synth_emg(&SyntheticSpec::default()).unwrap();
    let (model, history) = train(&data.x, &desk(0)).unwrap();
    assert_eq!(history.epochs.len(), 200);
    let first = history.epochs[0].total;
    let last = history.epochs[199].total;
    assert!(last < first, "{last} vs {first}");
    assert!(history.epochs.iter().all(|e| e.total.is_finite() && e.kl >= 0.0));
    assert_eq!(history.final_negative_mass, gammadict_core::gamma_vae::negative_mass(&model.decoder.w));
}

#[test]
fn identical_seeds_give_identical_bits_through_a_file() {
    let data = synth_emg(&SyntheticSpec { samples: 300, ..SyntheticSpec::default() }).unwrap();
    let config = TrainConfig { epochs: 5, ..desk(3) };
    let (a, ha) = train(&data.x, &config).unwrap();
    let (b, hb) = train(&data.x, &config).unwrap();
    assert_eq!(a, b);
    assert_eq!(ha.epochs, hb.epochs);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    save_model(&path, &a, Some(&config)).unwrap();
    let (loaded, echoed) = load_model(&path).unwrap();
    assert_eq!(loaded, a);
    assert_eq!(echoed, Some(config));
    let mut rng = Rng::seed_from_u64(0);
    assert_eq!(
        loaded.infer_activations(&data.x, Readout::Mean, &mut rng).unwrap(),
        a.infer_activations(&data.x, Readout::Mean, &mut rng).unwrap()
    );
}

#[test]
fn different_seeds_differ() {
    let data = synth_emg(&SyntheticSpec { samples: 300, ..SyntheticSpec::default() }).unwrap();
    let (a, _) = train(&data.x, &TrainConfig { epochs: 2, ..desk(1) }).unwrap();
    let (b, _) = train(&data.x, &TrainConfig { epochs: 2, ..desk(2) }).unwrap();
    assert_ne!(a.decoder, b.decoder);
}
