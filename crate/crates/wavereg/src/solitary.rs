//! Petviashvili fixed-point computation of solitary waves.
//!
//! Traveling profiles `eta(x - ct)`, `u(x - ct)` of the regularized system
//! satisfy
//!
//! ```text
//! c eta = h0 u + K(eta u),      c u = g eta + K(u^2/2),
//! ```
//!
//! i.e. `L v = N(v)` with the constant matrix `L = [[c, -h0], [-g, c]]` and
//! `N = (K(eta u), K(u^2/2))`. The dispersive system replaces the lower-left
//! entry by `-g K(xi)` mode-wise. `L` is invertible iff `c^2 > g h0` (resp.
//! `c^2 > g h0 K(xi)` for every xi, which reduces to the same bound since
//! `K <= 1`).
//!
//! The iteration is `v_{n+1} = S_n^2 L^{-1} N(v_n)` with the stabilization
//! factor `S_n = <v_n, L v_n> / <v_n, N(v_n)>`; it is stopped once the L2
//! difference of consecutive iterates falls below `tol`. Profiles are
//! recentered to the argmax of eta each iteration to pin the translational
//! degree of freedom.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{
    apply_values, forward_fft, inner_product, inverse_fft_real, symbol_k, Grid, MultiplierSymbol,
    RealField,
};
use crate::systems::{PhysParams, State, SystemKind};

/// Default stopping tolerance for the iteration (L2 norm of the increment).
pub const DEFAULT_TOL: f64 = 1.8e-13;

/// Default iteration budget.
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// A computed traveling-wave profile with its convergence metadata.
#[derive(Debug, Clone)]
pub struct SolitaryWave {
    pub c: f64,
    pub grid: Arc<Grid>,
    pub eta: RealField,
    pub u: RealField,
    pub iterations: usize,
    /// L2 difference of the last two iterates.
    pub final_increment: f64,
    /// Max-norm residual of the traveling-wave equations at the solution.
    pub residual_inf: f64,
}

impl SolitaryWave {
    /// The profile as a time-zero state, ready for the time stepper.
    pub fn into_state(self) -> State {
        State {
            grid: self.grid,
            eta: self.eta,
            u: self.u,
            time: 0.0,
        }
    }
}

/// One row of an amplitude-speed sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub c: f64,
    /// eta at the domain center (the crest for a converged wave).
    pub amplitude_eta: f64,
    pub amplitude_u: f64,
    pub converged: bool,
}

/// Execution mode for embarrassingly parallel driver loops. `Parallel` uses
/// rayon when the `parallel` feature is enabled and falls back to sequential
/// execution otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    Parallel,
}

struct TravelingWaveOps {
    grid: Arc<Grid>,
    c: f64,
    h0: f64,
    g: f64,
    k_values: Vec<Complex64>,
    /// None for the regularized system (constant-matrix inverse); the
    /// mode-wise sigma table for the dispersive one.
    sigma: Option<Vec<f64>>,
}

impl TravelingWaveOps {
    fn new(c: f64, grid: &Arc<Grid>, kind: SystemKind, params: &PhysParams) -> Result<Self> {
        params.validate()?;
        let threshold = params.g * params.h0;
        if !(c * c > threshold) {
            return Err(Error::InvalidSpeed { c, threshold });
        }
        let sigma = match kind {
            SystemKind::RegularizedSw => None,
            SystemKind::FullyDispersiveHp => Some(
                grid.wavenumbers()
                    .iter()
                    .map(|&xi| symbol_k(xi, params.h0))
                    .collect(),
            ),
            SystemKind::ClassicalSw => {
                return Err(Error::Config(
                    "solitary waves are computed for the regularized and dispersive systems only"
                        .into(),
                ))
            }
        };
        Ok(TravelingWaveOps {
            grid: grid.clone(),
            c,
            h0: params.h0,
            g: params.g,
            k_values: MultiplierSymbol::k(params.h0).values_on(grid),
            sigma,
        })
    }

    /// N(v) = (K(eta u), K(u^2/2)).
    fn apply_n(&self, eta: &RealField, u: &RealField) -> (RealField, RealField) {
        let n = self.grid.n_modes();
        let mut eta_u = RealField::zeros(n);
        let mut half_u2 = RealField::zeros(n);
        for j in 0..n {
            let uj = u.samples()[j];
            eta_u.samples_mut()[j] = eta.samples()[j] * uj;
            half_u2.samples_mut()[j] = 0.5 * uj * uj;
        }
        (
            apply_values(&eta_u, &self.k_values, &self.grid),
            apply_values(&half_u2, &self.k_values, &self.grid),
        )
    }

    /// L v, applied in physical space (regularized) or mode-wise (dispersive).
    fn apply_l(&self, eta: &RealField, u: &RealField) -> (RealField, RealField) {
        let n = self.grid.n_modes();
        match &self.sigma {
            None => {
                let mut a = RealField::zeros(n);
                let mut b = RealField::zeros(n);
                for j in 0..n {
                    a.samples_mut()[j] = self.c * eta.samples()[j] - self.h0 * u.samples()[j];
                    b.samples_mut()[j] = -self.g * eta.samples()[j] + self.c * u.samples()[j];
                }
                (a, b)
            }
            Some(sigma) => {
                let eta_hat = forward_fft(eta, &self.grid);
                let u_hat = forward_fft(u, &self.grid);
                let mut a = Vec::with_capacity(n);
                let mut b = Vec::with_capacity(n);
                for k in 0..n {
                    a.push(self.c * eta_hat[k] - self.h0 * u_hat[k]);
                    b.push(-self.g * sigma[k] * eta_hat[k] + self.c * u_hat[k]);
                }
                (
                    inverse_fft_real(a, &self.grid).0,
                    inverse_fft_real(b, &self.grid).0,
                )
            }
        }
    }

    /// L^{-1} w.
    fn apply_l_inv(&self, a: &RealField, b: &RealField) -> (RealField, RealField) {
        let n = self.grid.n_modes();
        match &self.sigma {
            None => {
                let det = self.c * self.c - self.g * self.h0;
                let mut eta = RealField::zeros(n);
                let mut u = RealField::zeros(n);
                for j in 0..n {
                    eta.samples_mut()[j] =
                        (self.c * a.samples()[j] + self.h0 * b.samples()[j]) / det;
                    u.samples_mut()[j] = (self.g * a.samples()[j] + self.c * b.samples()[j]) / det;
                }
                (eta, u)
            }
            Some(sigma) => {
                let a_hat = forward_fft(a, &self.grid);
                let b_hat = forward_fft(b, &self.grid);
                let mut eta = Vec::with_capacity(n);
                let mut u = Vec::with_capacity(n);
                for k in 0..n {
                    let det = self.c * self.c - self.g * self.h0 * sigma[k];
                    eta.push((self.c * a_hat[k] + self.h0 * b_hat[k]) / det);
                    u.push((self.g * sigma[k] * a_hat[k] + self.c * b_hat[k]) / det);
                }
                (
                    inverse_fft_real(eta, &self.grid).0,
                    inverse_fft_real(u, &self.grid).0,
                )
            }
        }
    }
}

/// KdV-regime seed: `eta0 = a0 sech^2(x sqrt(3 a0)/2)` with `a0 = 2(c-1)`,
/// `u0 = eta0 / c`.
fn default_seed(c: f64, grid: &Grid) -> (RealField, RealField) {
    let a0 = 2.0 * (c - 1.0);
    let rate = (3.0 * a0).sqrt() / 2.0;
    let center = grid.x_left() + 0.5 * grid.length();
    let eta = RealField::from_fn(grid, |x| {
        let s = 1.0 / ((x - center) * rate).cosh();
        a0 * s * s
    });
    let u = RealField::from_samples(eta.samples().iter().map(|v| v / c).collect());
    (eta, u)
}

fn recenter(eta: &mut RealField, u: &mut RealField, target: usize) {
    let shift = eta.argmax() as isize - target as isize;
    if shift != 0 {
        let n = eta.len() as isize;
        let rot = shift.rem_euclid(n) as usize;
        eta.samples_mut().rotate_left(rot);
        u.samples_mut().rotate_left(rot);
    }
}

/// Compute a solitary wave of speed `c` by Petviashvili iteration.
///
/// `init` seeds the iteration (defaults to the KdV-regime approximation).
/// Fails with [`Error::InvalidSpeed`] for `c^2 <= g h0`, with
/// [`Error::NonConvergence`] when `max_iter` is exhausted, and with
/// [`Error::DegenerateIterate`] when the stabilization denominator collapses
/// (e.g. from a zero seed).
pub fn petviashvili_solve(
    c: f64,
    grid: &Arc<Grid>,
    kind: SystemKind,
    params: &PhysParams,
    init: Option<(RealField, RealField)>,
    tol: f64,
    max_iter: usize,
) -> Result<SolitaryWave> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tol must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::Config("max_iter must be >= 1".into()));
    }
    let ops = TravelingWaveOps::new(c, grid, kind, params)?;

    let (mut eta, mut u) = match init {
        Some((e, v)) => {
            if e.len() != grid.n_modes() || v.len() != grid.n_modes() {
                return Err(Error::Config(
                    "initial guess length does not match the grid".into(),
                ));
            }
            (e, v)
        }
        None => default_seed(c, grid),
    };
    let center = grid.center_index();
    recenter(&mut eta, &mut u, center);

    let mut increment = f64::INFINITY;
    for iteration in 1..=max_iter {
        let (n_eta, n_u) = ops.apply_n(&eta, &u);
        let (l_eta, l_u) = ops.apply_l(&eta, &u);
        let numerator = inner_product(&eta, &l_eta, grid) + inner_product(&u, &l_u, grid);
        let denominator = inner_product(&eta, &n_eta, grid) + inner_product(&u, &n_u, grid);
        if denominator.abs() < 1e-30 {
            return Err(Error::DegenerateIterate {
                denominator: denominator.abs(),
            });
        }
        let s = numerator / denominator;
        let s2 = s * s;
        let (mut next_eta, mut next_u) = ops.apply_l_inv(&n_eta, &n_u);
        for v in next_eta.samples_mut() {
            *v *= s2;
        }
        for v in next_u.samples_mut() {
            *v *= s2;
        }
        recenter(&mut next_eta, &mut next_u, center);

        let mut diff2 = 0.0;
        for j in 0..grid.n_modes() {
            let de = next_eta.samples()[j] - eta.samples()[j];
            let du = next_u.samples()[j] - u.samples()[j];
            diff2 += de * de + du * du;
        }
        increment = (grid.dx() * diff2).sqrt();
        eta = next_eta;
        u = next_u;

        if increment < tol {
            let residual_inf = residual_profiles(c, &eta, &u, grid, kind, params)?;
            return Ok(SolitaryWave {
                c,
                grid: grid.clone(),
                eta,
                u,
                iterations: iteration,
                final_increment: increment,
                residual_inf,
            });
        }
    }
    Err(Error::NonConvergence {
        max_iter,
        increment,
        tol,
    })
}

/// Max-norm residual of the traveling-wave system for explicit profiles.
fn residual_profiles(
    c: f64,
    eta: &RealField,
    u: &RealField,
    grid: &Arc<Grid>,
    kind: SystemKind,
    params: &PhysParams,
) -> Result<f64> {
    let ops = TravelingWaveOps::new(c, grid, kind, params)?;
    let (n_eta, n_u) = ops.apply_n(eta, u);
    let (l_eta, l_u) = ops.apply_l(eta, u);
    let mut worst = 0.0_f64;
    for j in 0..grid.n_modes() {
        worst = worst.max((l_eta.samples()[j] - n_eta.samples()[j]).abs());
        worst = worst.max((l_u.samples()[j] - n_u.samples()[j]).abs());
    }
    Ok(worst)
}

/// Strong-form residual `max(|c eta - h0 u - K(eta u)|, |c u - g sigma eta - K(u^2/2)|)`
/// of a computed wave, re-evaluated by direct substitution.
pub fn residual(wave: &SolitaryWave, kind: SystemKind, params: &PhysParams) -> Result<f64> {
    residual_profiles(wave.c, &wave.eta, &wave.u, &wave.grid, kind, params)
}

/// Amplitude-speed sweep with warm starts: each speed is seeded with the
/// previous converged profile. Non-converged rows are flagged and the sweep
/// continues.
pub fn sweep(
    c_values: &[f64],
    grid: &Arc<Grid>,
    kind: SystemKind,
    params: &PhysParams,
    tol: f64,
    max_iter: usize,
) -> Result<Vec<SweepRow>> {
    if c_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "sweep speeds must be strictly ascending".into(),
        ));
    }
    let center = grid.center_index();
    let mut rows = Vec::with_capacity(c_values.len());
    let mut warm: Option<(RealField, RealField)> = None;
    for &c in c_values {
        match petviashvili_solve(c, grid, kind, params, warm.take(), tol, max_iter) {
            Ok(wave) => {
                rows.push(SweepRow {
                    c,
                    amplitude_eta: wave.eta.samples()[center],
                    amplitude_u: wave.u.samples()[center],
                    converged: true,
                });
                warm = Some((wave.eta, wave.u));
            }
            Err(Error::InvalidSpeed { c, threshold }) => {
                return Err(Error::InvalidSpeed { c, threshold })
            }
            Err(_) => {
                rows.push(SweepRow {
                    c,
                    amplitude_eta: f64::NAN,
                    amplitude_u: f64::NAN,
                    converged: false,
                });
                warm = None;
            }
        }
    }
    Ok(rows)
}

/// Amplitude-speed sweep with independent cold starts per speed, so rows can
/// be computed in parallel workers.
pub fn sweep_independent(
    c_values: &[f64],
    grid: &Arc<Grid>,
    kind: SystemKind,
    params: &PhysParams,
    tol: f64,
    max_iter: usize,
    exec: Execution,
) -> Result<Vec<SweepRow>> {
    if c_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(
            "sweep speeds must be strictly ascending".into(),
        ));
    }
    let center = grid.center_index();
    let solve_one = |&c: &f64| -> SweepRow {
        match petviashvili_solve(c, grid, kind, params, None, tol, max_iter) {
            Ok(wave) => SweepRow {
                c,
                amplitude_eta: wave.eta.samples()[center],
                amplitude_u: wave.u.samples()[center],
                converged: true,
            },
            Err(_) => SweepRow {
                c,
                amplitude_eta: f64::NAN,
                amplitude_u: f64::NAN,
                converged: false,
            },
        }
    };
    // reject invalid speeds up front so the error does not hide in a row flag
    for &c in c_values {
        let threshold = params.g * params.h0;
        if !(c * c > threshold) {
            return Err(Error::InvalidSpeed { c, threshold });
        }
    }
    let rows = match exec {
        Execution::Sequential => c_values.iter().map(solve_one).collect(),
        Execution::Parallel => {
            #[cfg(feature = "parallel")]
            {
                use rayon::prelude::*;
                c_values.par_iter().map(solve_one).collect()
            }
            #[cfg(not(feature = "parallel"))]
            {
                c_values.iter().map(solve_one).collect()
            }
        }
    };
    Ok(rows)
}
