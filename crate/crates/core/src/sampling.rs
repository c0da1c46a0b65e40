//! Seeded random test points and vectors.
//!
//! Every residual suite derives one RNG stream per trial from a suite seed,
//! so the sampled points do not depend on evaluation order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, CMat, CVec};

pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Uniform point in the disk of the given radius.
pub fn disk_point<R: Rng>(rng: &mut R, radius: f64) -> Complex64 {
    let r = radius * rng.random::<f64>().sqrt();
    Complex64::from_polar(r, std::f64::consts::TAU * rng.random::<f64>())
}

/// Uniform point in the annulus `inner ≤ |z| ≤ outer`.
pub fn annulus_point<R: Rng>(rng: &mut R, inner: f64, outer: f64) -> Complex64 {
    let r2 = inner * inner + (outer * outer - inner * inner) * rng.random::<f64>();
    Complex64::from_polar(r2.sqrt(), std::f64::consts::TAU * rng.random::<f64>())
}

pub fn circle_point<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, std::f64::consts::TAU * rng.random::<f64>())
}

pub fn gaussian_vec<R: Rng>(rng: &mut R, n: usize) -> CVec {
    CVec::from_fn(n, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

pub fn gaussian_mat<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    CMat::from_fn(rows, cols, |_, _| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
}

/// `count` validation points: half on the unit circle, half inside the
/// disk of radius 0.99.
pub fn validation_points(count: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = trial_rng(seed, 0);
    (0..count)
        .map(|k| if k % 2 == 0 { circle_point(&mut rng) } else { disk_point(&mut rng, 0.99) })
        .collect()
}
