//! Seeded sampling helpers.
//!
//! Every randomized routine draws trial `t` from its own ChaCha stream
//! `(seed, t)`, so results do not depend on evaluation order.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{Complex, ComplexMatrix, HermitianMatrix};

pub type TrialRng = ChaCha8Rng;

/// Generator for trial `counter` under `seed`.
pub fn trial_rng(seed: u64, counter: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(counter);
    rng
}

/// Standard complex Gaussian: real and imaginary parts independent `N(0, 1)`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

/// Uniformly distributed unit vector in `ℂ^n`.
pub fn unit_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex> {
    loop {
        let v = gaussian_vector(rng, n);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| complex_gaussian(rng))
}

/// GUE-style draw: `(G + G*)/2` with `G` complex Gaussian.
pub fn gue<R: Rng + ?Sized>(rng: &mut R, n: usize) -> HermitianMatrix {
    let g = random_matrix(rng, n, n);
    let sum = &g + &g.adjoint();
    HermitianMatrix::new(sum.scale(Complex::new(0.5, 0.0))).expect("symmetric by construction")
}

/// `G G*` with `G` an `n × rank` complex Gaussian matrix.
pub fn wishart<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> HermitianMatrix {
    HermitianMatrix::gram(&random_matrix(rng, n, rank)).expect("Gram matrices are Hermitian")
}
