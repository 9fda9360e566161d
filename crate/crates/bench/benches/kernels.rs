use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gammadict_bench::{noise_signal, uniform_matrix};
use gammadict_core::gamma_vae::{evaluate, Noise};
use gammadict_core::nmf::{nmf, Objective};
use gammadict_core::numkit::sample_gamma;
use gammadict_core::signal::{istft, stft, StftConfig};
use gammadict_core::{Rng, VaeNmfModel};
use std::hint::black_box;

fn matmul(c: &mut Criterion) {
    let mut group = c.benchmark_group("matmul");
    for n in [32, 128, 257] {
        let a = uniform_matrix(n, n, 1);
        let b = uniform_matrix(n, n, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| black_box(a.matmul(&b).unwrap()))
        });
    }
    group.finish();
}

fn loss_and_gradients(c: &mut Criterion) {
    let mut group = c.benchmark_group("vae_batch");
    for hidden in [32, 400] {
        let mut rng = Rng::seed_from_u64(3);
        let model = VaeNmfModel::new(10, [hidden, hidden], 4, 2.0, &mut rng).unwrap();
        let batch = uniform_matrix(10, 128, 4);
        group.bench_with_input(BenchmarkId::new("hidden", hidden), &hidden, |bench, _| {
            bench.iter(|| black_box(evaluate(&model, &batch, Noise::Draw(&mut rng), 10.0, true).unwrap()))
        });
    }
    group.finish();
}

fn nmf_iterations(c: &mut Criterion) {
    let x = uniform_matrix(257, 250, 5);
    let mut group = c.benchmark_group("nmf_10_iters");
    for objective in [Objective::Frobenius, Objective::Kl] {
        group.bench_function(format!("{objective:?}"), |bench| {
            bench.iter(|| black_box(nmf(&x, 40, 10, 0, objective).unwrap()))
        });
    }
    group.finish();
}

fn stft_round_trip(c: &mut Criterion) {
    let config = StftConfig::default();
    let signal = noise_signal(16_000, 6);
    c.bench_function("stft_1s", |bench| bench.iter(|| black_box(stft(&signal, &config).unwrap())));
    let spec = stft(&signal, &config).unwrap();
    c.bench_function("istft_1s", |bench| bench.iter(|| black_box(istft(&spec).unwrap())));
}

fn gamma_sampling(c: &mut Criterion) {
    let mut rng = Rng::seed_from_u64(7);
    c.bench_function("sample_gamma_2.5", |bench| bench.iter(|| black_box(sample_gamma(&mut rng, 2.5, 1.0).unwrap())));
    c.bench_function("sample_gamma_0.5", |bench| bench.iter(|| black_box(sample_gamma(&mut rng, 0.5, 1.0).unwrap())));
}

criterion_group!(benches, matmul, loss_and_gradients, nmf_iterations, stft_round_trip, gamma_sampling);
criterion_main!(benches);
