//! Seeded random operators for sampling-based checks.

use super::linalg::{c, evolution, hermitize, trace, zeros, Mat, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex matrix with entries uniform in the unit square around 0.
pub fn random_matrix<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Mat {
    let mut m = zeros(rows, cols);
    for z in m.iter_mut() {
        *z = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    }
    m
}

pub fn random_hermitian<R: Rng>(dim: usize, rng: &mut R) -> Mat {
    hermitize(&random_matrix(dim, dim, rng))
}

pub fn random_real_symmetric<R: Rng>(dim: usize, rng: &mut R) -> Mat {
    let m = random_matrix(dim, dim, rng).map(|z| c(z.re));
    hermitize(&m)
}

/// G G† / tr(G G†) for a random square G.
pub fn random_density<R: Rng>(dim: usize, rng: &mut R) -> Mat {
    let g = random_matrix(dim, dim, rng);
    let r = &g * g.adjoint();
    let t = trace(&r);
    r / t
}

pub fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> Mat {
    evolution(&random_hermitian(dim, rng), 1.7)
}
