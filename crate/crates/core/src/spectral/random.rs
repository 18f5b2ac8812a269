//! Seeded random trigonometric polynomials, used by tests and the self-test.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::field::{ScalarField, SpectralField, VectorField};
use super::grid::Grid;

fn random_spectrum(grid: &Arc<Grid>, kmax: i64, rng: &mut ChaCha8Rng) -> SpectralField {
    let n = grid.n() as i64;
    let mut coeffs = vec![Complex64::default(); grid.len()];
    for (i, c) in coeffs.iter_mut().enumerate() {
        let m = grid.modes(i);
        if m.iter().all(|&mi| mi.abs() <= kmax && mi != n / 2) {
            *c = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let sym: Vec<Complex64> = (0..grid.len())
        .map(|i| (coeffs[i] + coeffs[grid.mirror(i)].conj()) * 0.5)
        .collect();
    SpectralField::from_coeffs(grid, sym).expect("length matches grid")
}

/// Random real field with modes `|m_d| <= kmax`, normalized to unit max.
pub fn random_band_limited_scalar(grid: &Arc<Grid>, kmax: i64, seed: u64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    normalized(random_spectrum(grid, kmax, &mut rng).ifft())
}

pub fn random_band_limited_vector(grid: &Arc<Grid>, kmax: i64, seed: u64) -> VectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = normalized(random_spectrum(grid, kmax, &mut rng).ifft());
    let b = normalized(random_spectrum(grid, kmax, &mut rng).ifft());
    let c = normalized(random_spectrum(grid, kmax, &mut rng).ifft());
    VectorField::new(a, b, c).expect("components share a grid")
}

fn normalized(f: ScalarField) -> ScalarField {
    let m = f.max_abs();
    if m > 0.0 {
        f.scale(1.0 / m)
    } else {
        f
    }
}
