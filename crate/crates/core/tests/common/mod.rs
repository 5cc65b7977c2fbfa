#![allow(dead_code)]

use apocalift::linalg::{Mat, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Mat {
    Mat::from_fn(m, n, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn uniform_vec(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0))
}

pub fn orthonormal(rng: &mut ChaCha8Rng, m: usize, k: usize) -> Mat {
    uniform(rng, m, k).qr().q().columns(0, k).into_owned()
}

/// Random `m × n` matrix of rank exactly `s` (generically).
pub fn rank_s(rng: &mut ChaCha8Rng, m: usize, n: usize, s: usize) -> Mat {
    uniform(rng, m, s) * uniform(rng, n, s).transpose()
}

/// Singular values from the Gram matrix eigenvalues, nonincreasing.
/// Independent of the crate's decomposition backend; accurate down to about `1e-8 σ₁`.
pub fn gram_singular_values(x: &Mat) -> Vec<f64> {
    let gram = x.transpose() * x;
    let mut sv: Vec<f64> = gram.symmetric_eigen().eigenvalues.iter().map(|l| l.max(0.0).sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

pub fn gram_rank(x: &Mat) -> usize {
    let sv = gram_singular_values(x);
    let top = sv.first().copied().unwrap_or(0.0);
    sv.iter().filter(|&&s| s > 1e-6 * top).count()
}
