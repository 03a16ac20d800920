//! Shared helpers for integration tests: the direct DFT-sum oracle and
//! seeded random fields.

// not every test target uses every helper
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use wavereg::{Grid, RealField};

/// Direct O(N^2) DFT-sum application of symbol values: forward sum, symbol
/// multiply, inverse sum, real part. Independent of the FFT code path.
pub fn dft_oracle_apply(field: &[f64], values: &[Complex64]) -> Vec<f64> {
    let n = field.len();
    let nf = n as f64;
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
    for (k, slot) in spectrum.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &f) in field.iter().enumerate() {
            let angle = -2.0 * PI * (j as f64) * (k as f64) / nf;
            acc += f * Complex64::from_polar(1.0, angle);
        }
        *slot = acc * values[k];
    }
    (0..n)
        .map(|j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &s) in spectrum.iter().enumerate() {
                let angle = 2.0 * PI * (j as f64) * (k as f64) / nf;
                acc += s * Complex64::from_polar(1.0, angle);
            }
            acc.re / nf
        })
        .collect()
}

/// Uniform random field in [-1, 1), reproducible from the seed.
pub fn random_field(grid: &Grid, seed: u64) -> RealField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    RealField::from_samples(
        (0..grid.n_modes())
            .map(|_| rng.random_range(-1.0..1.0))
            .collect(),
    )
}

/// Random band-limited field: the lowest `modes` harmonics with decaying
/// random coefficients, rescaled to the requested amplitude.
pub fn random_smooth_field(grid: &Grid, seed: u64, modes: usize, amplitude: f64) -> RealField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<(f64, f64)> = (0..modes)
        .map(|k| {
            let decay = 1.0 / (1.0 + k as f64);
            (
                rng.random_range(-1.0..1.0) * decay,
                rng.random_range(-1.0..1.0) * decay,
            )
        })
        .collect();
    let wavenumbers: Vec<f64> = (1..=modes).map(|k| grid.wavenumbers()[k]).collect();
    let mut field = RealField::from_fn(grid, |x| {
        coeffs
            .iter()
            .zip(&wavenumbers)
            .map(|((a, b), xi)| a * (xi * x).cos() + b * (xi * x).sin())
            .sum()
    });
    let max = field.max_abs();
    if max > 0.0 {
        for v in field.samples_mut() {
            *v *= amplitude / max;
        }
    }
    field
}

/// L2 norm of the difference of two sample sets (plain vector norm).
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()))
}
