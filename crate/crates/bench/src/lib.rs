//! Seeded inputs shared by the benchmarks.

use mcpfilt_core::simgen::complex_normal;
use mcpfilt_core::{CVec, Complex64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn random_vector(dim: usize, var: f64, seed: u64) -> CVec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CVec::from_fn(dim, |_, _| complex_normal(&mut rng, var))
}

/// `n` regressor/observation pairs from a `k`-sparse channel.
pub fn sparse_stream(dim: usize, k: usize, n: usize, seed: u64) -> (Vec<CVec>, Vec<Complex64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = CVec::zeros(dim);
    for j in 0..k.min(dim) {
        w[(j * 7) % dim] = complex_normal(&mut rng, 1.0);
    }
    let xs: Vec<CVec> = (0..n)
        .map(|_| CVec::from_fn(dim, |_, _| complex_normal(&mut rng, 1.0 / dim as f64)))
        .collect();
    let ds = xs
        .iter()
        .map(|x| w.dotc(x) + complex_normal(&mut rng, 1e-2))
        .collect();
    (xs, ds)
}
