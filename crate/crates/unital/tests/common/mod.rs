#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use unital::linalg::{c, C64, CMatrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random matrix with entries uniform in the complex square [-1, 1]^2.
pub fn rand_cmatrix(rows: usize, cols: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c(
            2.0 * rng.random::<f64>() - 1.0,
            2.0 * rng.random::<f64>() - 1.0,
        )
    })
}

/// Random complex-symmetric matrix, (M + M^T)/2 of a random one.
pub fn rand_symmetric(n: usize, rng: &mut impl Rng) -> CMatrix {
    let m = rand_cmatrix(n, n, rng);
    CMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)]) * 0.5)
}

/// Random Hermitian matrix, (M + M^dag)/2 of a random one.
pub fn rand_hermitian(n: usize, rng: &mut impl Rng) -> CMatrix {
    rand_cmatrix(n, n, rng).hermitized()
}

pub fn assert_close(a: &CMatrix, b: &CMatrix, tol: f64, what: &str) {
    assert_eq!((a.rows, a.cols), (b.rows, b.cols), "{what}: shape mismatch");
    let diff = (a - b).max_abs();
    assert!(diff <= tol, "{what}: differ by {diff:.3e} > {tol:.1e}");
}

pub fn assert_near(a: f64, b: f64, tol: f64, what: &str) {
    assert!(
        (a - b).abs() <= tol,
        "{what}: {a:.12} vs {b:.12} (|diff| = {:.3e} > {tol:.1e})",
        (a - b).abs()
    );
}

/// Complex inner product <a, b> (conjugate-linear in the first slot).
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Random mixture of `m` Haar unitaries with uniform-random normalized weights.
pub fn rand_mixture(d: usize, m: usize, rng: &mut ChaCha8Rng) -> unital::channel::MixtureOfUnitaries {
    let raw: Vec<f64> = (0..m).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    let unitaries = (0..m)
        .map(|_| unital::linalg::haar_unitary(d, rng))
        .collect();
    unital::channel::MixtureOfUnitaries::new(weights, unitaries).unwrap()
}
