//! Random matrices and vectors for Monte Carlo checks and optimizer restarts.
//!
//! Every stream is a ChaCha8 generator keyed by `(seed, stream)`, so parallel
//! tasks get independent, reproducible draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::{matrix_exp, ComplexMatrix, C64};

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, m: usize) -> Vec<C64> {
    (0..m).map(|_| gaussian_complex(rng)).collect()
}

/// Complex Ginibre matrix (unit-variance entries).
pub fn random_matrix<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, |_, _| gaussian_complex(rng))
}

/// Ginibre matrix with its trace removed.
pub fn random_trace_free<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let m = random_matrix(rng, n);
    let mean = m.trace() / n as f64;
    m.sub_scalar(mean)
}

/// Random traceless direction rescaled to Frobenius norm `spread`.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R, n: usize, spread: f64) -> ComplexMatrix {
    let b = random_trace_free(rng, n);
    b.scale_real(spread / b.norm())
}

/// Haar-distributed unitary via QR of a Ginibre matrix with phase fix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    let g = random_matrix(rng, n).into_dmatrix();
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let fixed = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        q[(i, j)] * phase
    });
    ComplexMatrix::from_dmatrix(fixed).expect("square")
}

/// Conjugates `a` by `exp(B)` for a random traceless `B` of norm `spread`.
pub fn random_conjugate<R: Rng + ?Sized>(rng: &mut R, a: &ComplexMatrix, spread: f64) -> ComplexMatrix {
    let b = random_direction(rng, a.dim(), spread);
    let g = matrix_exp(&b).expect("finite");
    let gi = matrix_exp(&-b).expect("finite");
    g.matmul(a).matmul(&gi)
}
