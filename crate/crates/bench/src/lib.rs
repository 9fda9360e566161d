//! Benchmark fixtures; the benches themselves live in `benches/`.

use gammadict_core::{Matrix, Rng};

/// Deterministic nonnegative matrix with entries in [0, 1).
pub fn uniform_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| rng.uniform())
}

/// Deterministic white-noise signal.
pub fn noise_signal(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.normal()).collect()
}
