//! Periodic grid, discrete Fourier transform plumbing and Fourier-multiplier
//! application.
//!
//! All fields live on a uniform periodic grid over `[x_left, x_right)` with
//! wavenumbers `xi_k = 2 pi k / L` in the standard FFT index order
//! `{0, 1, .., n/2-1, -n/2, .., -1}`. Multiplier symbols are classified by
//! parity: even-real symbols (such as `K = tanh(h0 xi)/(h0 xi)`) and
//! odd-imaginary symbols (such as `K d/dx = i tanh(h0 xi)/h0`) both map real
//! fields to real fields; realness of the output is enforced by construction.

use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Threshold below which `tanh(z)/z` and `z/tanh(z)` switch to their Taylor
/// expansions around the removable singularity at z = 0.
const SERIES_GUARD: f64 = 1e-4;

/// Relative imaginary residue above which a multiplier application is
/// rejected as a symbol/parity mismatch.
const PARITY_RESIDUE_TOL: f64 = 1e-12;

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

/// Uniform periodic spatial grid with its discrete wavenumber set.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    x_left: f64,
    x_right: f64,
    n_modes: usize,
    dx: f64,
    wavenumbers: Vec<f64>,
}

impl Grid {
    /// Build a grid over `[x_left, x_right)` with `n_modes` points.
    ///
    /// `n_modes` must be even and at least 4 (powers of two are recommended
    /// for FFT efficiency but not required).
    pub fn new(x_left: f64, x_right: f64, n_modes: usize) -> Result<Self> {
        if !x_left.is_finite() || !x_right.is_finite() {
            return Err(Error::Config(format!(
                "grid bounds must be finite, got [{x_left}, {x_right}]"
            )));
        }
        if x_left >= x_right {
            return Err(Error::Config(format!(
                "grid bounds must satisfy x_left < x_right, got [{x_left}, {x_right}]"
            )));
        }
        if n_modes < 4 || !n_modes.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "n_modes must be even and >= 4, got {n_modes}"
            )));
        }
        let length = x_right - x_left;
        let dx = length / n_modes as f64;
        let wavenumbers = (0..n_modes)
            .map(|k| {
                let signed = if k < n_modes / 2 {
                    k as i64
                } else {
                    k as i64 - n_modes as i64
                };
                2.0 * std::f64::consts::PI * signed as f64 / length
            })
            .collect();
        Ok(Grid {
            x_left,
            x_right,
            n_modes,
            dx,
            wavenumbers,
        })
    }

    pub fn x_left(&self) -> f64 {
        self.x_left
    }

    pub fn x_right(&self) -> f64 {
        self.x_right
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Domain length `x_right - x_left`.
    pub fn length(&self) -> f64 {
        self.x_right - self.x_left
    }

    /// Wavenumbers in FFT index order; `wavenumbers()[0] == 0`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Index of the unpaired Nyquist mode (`n_modes / 2`).
    pub fn nyquist_index(&self) -> usize {
        self.n_modes / 2
    }

    /// Grid point `x_j = x_left + j dx`.
    pub fn point(&self, j: usize) -> f64 {
        self.x_left + j as f64 * self.dx
    }

    /// All grid points.
    pub fn points(&self) -> Vec<f64> {
        (0..self.n_modes).map(|j| self.point(j)).collect()
    }

    /// Index of the grid point closest to the domain center.
    pub fn center_index(&self) -> usize {
        self.n_modes / 2
    }
}

// ---------------------------------------------------------------------------
// RealField
// ---------------------------------------------------------------------------

/// Real-valued samples on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    samples: Vec<f64>,
}

impl RealField {
    pub fn from_samples(samples: Vec<f64>) -> Self {
        RealField { samples }
    }

    pub fn zeros(n: usize) -> Self {
        RealField {
            samples: vec![0.0; n],
        }
    }

    /// Sample a function of x on the grid points.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Self {
        RealField {
            samples: (0..grid.n_modes()).map(|j| f(grid.point(j))).collect(),
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Largest sample value (not the absolute value).
    pub fn max(&self) -> f64 {
        self.samples
            .iter()
            .fold(f64::NEG_INFINITY, |m, v| m.max(*v))
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().fold(f64::INFINITY, |m, v| m.min(*v))
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    /// Index of the first maximal sample.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (j, v) in self.samples.iter().enumerate() {
            if *v > self.samples[best] {
                best = j;
            }
        }
        best
    }
}

// ---------------------------------------------------------------------------
// Multiplier symbols
// ---------------------------------------------------------------------------

/// Symbol parity classes that map real fields to real fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// sigma(-xi) = sigma(xi), real-valued.
    EvenReal,
    /// sigma(-xi) = -sigma(xi), purely imaginary.
    OddImaginary,
}

/// A Fourier multiplier: a symbol `sigma(xi)` applied diagonally in frequency.
#[derive(Clone)]
pub struct MultiplierSymbol {
    name: String,
    parity: Parity,
    eval: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
}

impl std::fmt::Debug for MultiplierSymbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MultiplierSymbol")
            .field("name", &self.name)
            .field("parity", &self.parity)
            .finish()
    }
}

impl MultiplierSymbol {
    pub fn new(
        name: impl Into<String>,
        parity: Parity,
        eval: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        MultiplierSymbol {
            name: name.into(),
            parity,
            eval: Arc::new(eval),
        }
    }

    /// Even-real symbol from a real-valued evaluator.
    pub fn even_real(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, Parity::EvenReal, move |xi| {
            Complex64::new(f(xi), 0.0)
        })
    }

    /// Odd-imaginary symbol from an evaluator for the imaginary part.
    pub fn odd_imaginary(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self::new(name, Parity::OddImaginary, move |xi| {
            Complex64::new(0.0, f(xi))
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn eval(&self, xi: f64) -> Complex64 {
        (self.eval)(xi)
    }

    /// The operator K = tanh(h0 D)/(h0 D).
    pub fn k(h0: f64) -> Self {
        Self::even_real("K", move |xi| symbol_k(xi, h0))
    }

    /// K^{-1} = h0 D / tanh(h0 D).
    pub fn k_inv(h0: f64) -> Self {
        Self::even_real("K^-1", move |xi| symbol_k_inv(xi, h0))
    }

    /// Positive square root of K.
    pub fn k_sqrt(h0: f64) -> Self {
        Self::even_real("K^1/2", move |xi| symbol_k_sqrt(xi, h0))
    }

    /// Positive square root of K^{-1}.
    pub fn k_inv_sqrt(h0: f64) -> Self {
        Self::even_real("K^-1/2", move |xi| symbol_k_inv_sqrt(xi, h0))
    }

    /// The bounded operator K d/dx = i tanh(h0 xi)/h0.
    pub fn k_dx(h0: f64) -> Self {
        Self::odd_imaginary("K*dx", move |xi| (h0 * xi).tanh() / h0)
    }

    /// Spectral derivative d/dx = i xi.
    pub fn derivative() -> Self {
        Self::odd_imaginary("dx", |xi| xi)
    }

    pub fn identity() -> Self {
        Self::even_real("1", |_| 1.0)
    }

    /// Symbol values on a grid, with the realness convention applied: the
    /// value at the unpaired Nyquist mode is forced to zero for odd-imaginary
    /// symbols.
    pub fn values_on(&self, grid: &Grid) -> Vec<Complex64> {
        let mut values: Vec<Complex64> = grid
            .wavenumbers()
            .iter()
            .map(|&xi| self.eval(xi))
            .collect();
        if self.parity == Parity::OddImaginary {
            values[grid.nyquist_index()] = Complex64::new(0.0, 0.0);
        }
        values
    }
}

/// Symbol of K: `tanh(h0 xi)/(h0 xi)`, equal to 1 at xi = 0.
pub fn symbol_k(xi: f64, h0: f64) -> f64 {
    let z = h0 * xi;
    if z.abs() < SERIES_GUARD {
        let z2 = z * z;
        1.0 - z2 / 3.0 + 2.0 * z2 * z2 / 15.0
    } else {
        z.tanh() / z
    }
}

/// Symbol of K^{-1}: `h0 xi / tanh(h0 xi)`, equal to 1 at xi = 0.
pub fn symbol_k_inv(xi: f64, h0: f64) -> f64 {
    let z = h0 * xi;
    if z.abs() < SERIES_GUARD {
        let z2 = z * z;
        1.0 + z2 / 3.0 - z2 * z2 / 45.0
    } else {
        z / z.tanh()
    }
}

pub fn symbol_k_sqrt(xi: f64, h0: f64) -> f64 {
    symbol_k(xi, h0).sqrt()
}

pub fn symbol_k_inv_sqrt(xi: f64, h0: f64) -> f64 {
    symbol_k_inv(xi, h0).sqrt()
}

/// Symbol of K d/dx: `i tanh(h0 xi)/h0`, purely imaginary, odd, bounded by
/// 1/h0 in modulus.
pub fn symbol_k_dx(xi: f64, h0: f64) -> Complex64 {
    Complex64::new(0.0, (h0 * xi).tanh() / h0)
}

// ---------------------------------------------------------------------------
// Transforms
// ---------------------------------------------------------------------------

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plan_forward(n: usize) -> Arc<dyn Fft<f64>> {
    planner().lock().unwrap().plan_fft_forward(n)
}

fn plan_inverse(n: usize) -> Arc<dyn Fft<f64>> {
    planner().lock().unwrap().plan_fft_inverse(n)
}

/// Forward DFT of a real field (unnormalized, rustfft convention).
pub fn forward_fft(field: &RealField, grid: &Grid) -> Vec<Complex64> {
    debug_assert_eq!(field.len(), grid.n_modes());
    let mut buf: Vec<Complex64> = field
        .samples()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    plan_forward(grid.n_modes()).process(&mut buf);
    buf
}

/// Inverse DFT (normalized by 1/n), discarding the imaginary part. Returns
/// the field and the maximal absolute imaginary residue before discarding.
pub fn inverse_fft_real(mut spectrum: Vec<Complex64>, grid: &Grid) -> (RealField, f64) {
    let n = grid.n_modes();
    debug_assert_eq!(spectrum.len(), n);
    plan_inverse(n).process(&mut spectrum);
    let scale = 1.0 / n as f64;
    let mut residue = 0.0_f64;
    let samples = spectrum
        .iter()
        .map(|z| {
            residue = residue.max((z.im * scale).abs());
            z.re * scale
        })
        .collect();
    (RealField::from_samples(samples), residue)
}

/// Apply precomputed symbol values to a field. Realness is enforced by
/// discarding the (roundoff-level) imaginary part of the inverse transform.
pub(crate) fn apply_values(field: &RealField, values: &[Complex64], grid: &Grid) -> RealField {
    let mut spectrum = forward_fft(field, grid);
    for (s, v) in spectrum.iter_mut().zip(values) {
        *s *= v;
    }
    inverse_fft_real(spectrum, grid).0
}

/// Apply a Fourier multiplier to a real field.
///
/// The output is exactly real as stored. A relative imaginary residue above
/// 1e-12 indicates that the symbol does not respect its declared parity and
/// is reported as an internal invariant violation.
pub fn apply_multiplier(
    field: &RealField,
    symbol: &MultiplierSymbol,
    grid: &Grid,
) -> Result<RealField> {
    if field.len() != grid.n_modes() {
        return Err(Error::Config(format!(
            "field length {} does not match grid n_modes {}",
            field.len(),
            grid.n_modes()
        )));
    }
    let values = symbol.values_on(grid);
    let mut spectrum = forward_fft(field, grid);
    for (s, v) in spectrum.iter_mut().zip(&values) {
        *s *= v;
    }
    let (out, residue) = inverse_fft_real(spectrum, grid);
    let scale = out.max_abs().max(field.max_abs());
    if scale > 0.0 && residue > PARITY_RESIDUE_TOL * scale {
        return Err(Error::Internal(format!(
            "symbol '{}' declared {:?} left imaginary residue {residue:.3e} (relative {:.3e})",
            symbol.name(),
            symbol.parity(),
            residue / scale,
        )));
    }
    Ok(out)
}

/// Discrete inner product `dx * sum_j f_j g_j` (the periodic rectangle rule,
/// spectrally accurate for smooth periodic integrands).
pub fn inner_product(f: &RealField, g: &RealField, grid: &Grid) -> f64 {
    debug_assert_eq!(f.len(), grid.n_modes());
    debug_assert_eq!(g.len(), grid.n_modes());
    let dot: f64 = f
        .samples()
        .iter()
        .zip(g.samples())
        .map(|(a, b)| a * b)
        .sum();
    grid.dx() * dot
}

/// L2 norm `sqrt(dx * sum f_j^2)`.
pub fn l2_norm(f: &RealField, grid: &Grid) -> f64 {
    inner_product(f, f, grid).sqrt()
}

/// Translate a field by `shift` using the spectral shift theorem. Exact for
/// band-limited periodic fields; the Nyquist mode keeps only the real part
/// of its phase factor so the output stays real.
pub fn spectral_shift(field: &RealField, shift: f64, grid: &Grid) -> RealField {
    let mut spectrum = forward_fft(field, grid);
    for (s, &xi) in spectrum.iter_mut().zip(grid.wavenumbers()) {
        *s *= Complex64::from_polar(1.0, -xi * shift);
    }
    let nyq = grid.nyquist_index();
    spectrum[nyq] = Complex64::new(spectrum[nyq].re, 0.0);
    inverse_fft_real(spectrum, grid).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn grid_examples() {
        let g = Grid::new(-60.0, 60.0, 1024).unwrap();
        assert_eq!(g.dx(), 120.0 / 1024.0);
        assert!((g.wavenumbers()[1] - 2.0 * PI / 120.0).abs() < 1e-15);
        assert_eq!(g.wavenumbers()[0], 0.0);

        let g = Grid::new(-PI, PI, 4).unwrap();
        let expect = [0.0, 1.0, -2.0, -1.0];
        for (w, e) in g.wavenumbers().iter().zip(expect) {
            assert!((w - e).abs() < 1e-14, "{w} vs {e}");
        }

        let g = Grid::new(-140.0, 140.0, 8192).unwrap();
        assert_eq!(g.dx(), 280.0 / 8192.0);
        // dx * n_modes recovers the length exactly
        assert_eq!(g.dx() * g.n_modes() as f64, 280.0);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(Grid::new(-1.0, 1.0, 5).is_err());
        assert!(Grid::new(-1.0, 1.0, 2).is_err());
        assert!(Grid::new(1.0, -1.0, 8).is_err());
        assert!(Grid::new(f64::NAN, 1.0, 8).is_err());
        assert!(Grid::new(-1.0, f64::INFINITY, 8).is_err());
    }

    #[test]
    fn wavenumbers_pair_up() {
        let g = Grid::new(-3.0, 5.0, 16).unwrap();
        let w = g.wavenumbers();
        for k in 1..8 {
            assert_eq!(w[k], -w[16 - k]);
        }
        assert!(w[g.nyquist_index()] < 0.0);
    }

    #[test]
    fn symbol_k_values() {
        assert_eq!(symbol_k(0.0, 1.0), 1.0);
        assert!((symbol_k(1.0, 1.0) - 1.0_f64.tanh()).abs() < 1e-15);
        assert_eq!(symbol_k(1.0, 1.0), symbol_k(-1.0, 1.0));
        // inverse identity and square roots
        for &xi in &[0.0, 1e-6, 0.3, 2.0, 50.0, -7.5] {
            assert!((symbol_k(xi, 1.0) * symbol_k_inv(xi, 1.0) - 1.0).abs() < 1e-13);
            let s = symbol_k_sqrt(xi, 1.0);
            assert!((s * s - symbol_k(xi, 1.0)).abs() < 1e-15);
            assert!(symbol_k(xi, 1.0) > 0.0 && symbol_k(xi, 1.0) <= 1.0);
            assert!(symbol_k_inv(xi, 1.0) >= 1.0 - 1e-15);
        }
        // K^{-1} grows like h0|xi|
        assert!((symbol_k_inv(100.0, 1.0) - 100.0).abs() < 1e-10);
    }

    #[test]
    fn symbol_series_guard_is_smooth() {
        // values straddling the series/direct switch agree
        for &h0xi in &[0.9e-4_f64, 1.1e-4] {
            let direct = h0xi.tanh() / h0xi;
            assert!((symbol_k(h0xi, 1.0) - direct).abs() < 1e-15);
            let direct_inv = h0xi / h0xi.tanh();
            assert!((symbol_k_inv(h0xi, 1.0) - direct_inv).abs() < 1e-15);
        }
    }

    #[test]
    fn symbol_k_dx_values() {
        assert_eq!(symbol_k_dx(0.0, 1.0), Complex64::new(0.0, 0.0));
        for &xi in &[0.1, 1.0, 10.0, 1e4] {
            assert!(symbol_k_dx(xi, 1.0).norm() <= 1.0);
            // factorization (i xi) * K(xi)
            let factored = Complex64::new(0.0, xi) * symbol_k(xi, 1.0);
            assert!((symbol_k_dx(xi, 1.0) - factored).norm() < 1e-14);
            // odd
            assert_eq!(symbol_k_dx(-xi, 1.0), -symbol_k_dx(xi, 1.0));
        }
    }

    #[test]
    fn multiplier_eigenfunction() {
        let grid = Grid::new(-60.0, 60.0, 64).unwrap();
        let xi1 = grid.wavenumbers()[1];
        let f = RealField::from_fn(&grid, |x| (xi1 * x).cos());
        let out = apply_multiplier(&f, &MultiplierSymbol::k(1.0), &grid).unwrap();
        let lambda = symbol_k(xi1, 1.0);
        for (o, v) in out.samples().iter().zip(f.samples()) {
            assert!((o - lambda * v).abs() < 1e-13);
        }
    }

    #[test]
    fn identity_symbol_is_identity() {
        let grid = Grid::new(-1.0, 3.0, 32).unwrap();
        let f = RealField::from_fn(&grid, |x| (x * 1.7).sin() + 0.3 * x.cos());
        let out = apply_multiplier(&f, &MultiplierSymbol::identity(), &grid).unwrap();
        for (o, v) in out.samples().iter().zip(f.samples()) {
            assert!((o - v).abs() < 1e-13);
        }
    }

    #[test]
    fn parity_mismatch_is_reported() {
        // constant i declared even-real: sigma(-xi) != conj(sigma(xi)), so the
        // output of a real field is purely imaginary and must be rejected
        let bogus = MultiplierSymbol::new("bogus", Parity::EvenReal, |_| {
            Complex64::new(0.0, 1.0)
        });
        let grid = Grid::new(-PI, PI, 16).unwrap();
        let f = RealField::from_fn(&grid, |x| x.sin() + 0.2 * (3.0 * x).cos());
        let err = apply_multiplier(&f, &bogus, &grid).unwrap_err();
        assert!(matches!(err, Error::Internal(_)));
    }

    #[test]
    fn inner_product_examples() {
        let grid = Grid::new(-60.0, 60.0, 256).unwrap();
        let one = RealField::from_fn(&grid, |_| 1.0);
        assert!((inner_product(&one, &one, &grid) - 120.0).abs() < 1e-12);

        let xi1 = grid.wavenumbers()[1];
        let c = RealField::from_fn(&grid, |x| (xi1 * x).cos());
        let s = RealField::from_fn(&grid, |x| (xi1 * x).sin());
        assert!(inner_product(&c, &s, &grid).abs() < 1e-13);

        let grid = Grid::new(-PI, PI, 16).unwrap();
        let xi1 = grid.wavenumbers()[1];
        let c = RealField::from_fn(&grid, |x| (xi1 * x).cos());
        assert!((inner_product(&c, &c, &grid) - PI).abs() < 1e-13);
    }

    #[test]
    fn spectral_shift_translates() {
        let grid = Grid::new(-10.0, 10.0, 128).unwrap();
        let f = RealField::from_fn(&grid, |x| (-x * x).exp());
        let shifted = spectral_shift(&f, 2.5, &grid);
        let expect = RealField::from_fn(&grid, |x| {
            let mut y = x - 2.5;
            // wrap into the periodic cell
            while y < -10.0 {
                y += 20.0;
            }
            (-y * y).exp()
        });
        for (a, b) in shifted.samples().iter().zip(expect.samples()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn field_mismatch_is_config_error() {
        let grid = Grid::new(-1.0, 1.0, 16).unwrap();
        let f = RealField::zeros(8);
        assert!(matches!(
            apply_multiplier(&f, &MultiplierSymbol::identity(), &grid),
            Err(Error::Config(_))
        ));
    }
}
