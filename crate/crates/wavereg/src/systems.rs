//! The three evolution systems behind one interface: classical shallow water,
//! its regularized variant (bounded operator K in the nonlinear fluxes), and
//! the fully dispersive analogue (K also in the linear pressure term).
//!
//! With surface elevation eta and velocity u the systems read
//!
//! ```text
//! classical:    eta_t + h0 u_x + (eta u)_x   = 0,   u_t + g eta_x   + (u^2/2)_x   = 0
//! regularized:  eta_t + h0 u_x + K(eta u)_x  = 0,   u_t + g eta_x   + K(u^2/2)_x = 0
//! dispersive:   eta_t + h0 u_x + K(eta u)_x  = 0,   u_t + g K eta_x + K(u^2/2)_x = 0
//! ```

use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{
    apply_values, forward_fft, inverse_fft_real, symbol_k, Grid, MultiplierSymbol, RealField,
};

/// Physical parameters in nondimensional form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    /// Undisturbed depth.
    pub h0: f64,
    /// Gravitational acceleration.
    pub g: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        PhysParams { h0: 1.0, g: 1.0 }
    }
}

impl PhysParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.h0 > 0.0) || !(self.g > 0.0) {
            return Err(Error::Config(format!(
                "physical parameters must be positive, got h0 = {}, g = {}",
                self.h0, self.g
            )));
        }
        Ok(())
    }
}

/// Selector among the three systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SystemKind {
    ClassicalSw,
    RegularizedSw,
    FullyDispersiveHp,
}

impl SystemKind {
    pub fn all() -> [SystemKind; 3] {
        [
            SystemKind::ClassicalSw,
            SystemKind::RegularizedSw,
            SystemKind::FullyDispersiveHp,
        ]
    }

    pub fn label(&self) -> &'static str {
        match self {
            SystemKind::ClassicalSw => "classical",
            SystemKind::RegularizedSw => "regularized",
            SystemKind::FullyDispersiveHp => "hp",
        }
    }

    /// Linear dispersion weight sigma in `u_t + g sigma(D) eta_x`.
    pub(crate) fn sigma(&self, xi: f64, params: &PhysParams) -> f64 {
        match self {
            SystemKind::FullyDispersiveHp => symbol_k(xi, params.h0),
            _ => 1.0,
        }
    }

    /// Whether the nonlinear fluxes are smoothed by K.
    pub(crate) fn regularized_flux(&self) -> bool {
        !matches!(self, SystemKind::ClassicalSw)
    }
}

impl std::fmt::Display for SystemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for SystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "classical" | "sw" => Ok(SystemKind::ClassicalSw),
            "regularized" | "rsw" => Ok(SystemKind::RegularizedSw),
            "hp" | "dispersive" | "fully-dispersive" => Ok(SystemKind::FullyDispersiveHp),
            other => Err(Error::Config(format!(
                "unknown system '{other}' (expected classical | regularized | hp)"
            ))),
        }
    }
}

/// Paired surface elevation and velocity on one grid.
#[derive(Debug, Clone)]
pub struct State {
    pub grid: Arc<Grid>,
    pub eta: RealField,
    pub u: RealField,
    pub time: f64,
}

impl State {
    pub fn new(grid: Arc<Grid>, eta: RealField, u: RealField, time: f64) -> Result<Self> {
        if eta.len() != grid.n_modes() || u.len() != grid.n_modes() {
            return Err(Error::Config(format!(
                "state fields (lengths {}, {}) do not match grid n_modes {}",
                eta.len(),
                u.len(),
                grid.n_modes()
            )));
        }
        Ok(State { grid, eta, u, time })
    }

    pub fn zero(grid: Arc<Grid>) -> Self {
        let n = grid.n_modes();
        State {
            grid,
            eta: RealField::zeros(n),
            u: RealField::zeros(n),
            time: 0.0,
        }
    }

    /// Total-depth positivity monitor: `h0 + eta > 0` at every sample.
    /// Reported, never enforced.
    pub fn depth_positive(&self, h0: f64) -> bool {
        self.eta.min() + h0 > 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.eta.is_finite() && self.u.is_finite()
    }
}

/// How the initial velocity is derived from the initial elevation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityRule {
    /// u0 = eta0 (quasi-right-moving data for the shallow-water systems).
    Equal,
    /// u0 = K^{1/2} eta0 (quasi-right-moving data for the dispersive system).
    SqrtK,
}

impl std::fmt::Display for VelocityRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VelocityRule::Equal => "equal",
            VelocityRule::SqrtK => "sqrtk",
        })
    }
}

impl FromStr for VelocityRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "equal" => Ok(VelocityRule::Equal),
            "sqrtk" | "sqrt_k" => Ok(VelocityRule::SqrtK),
            other => Err(Error::Config(format!(
                "unknown velocity rule '{other}' (expected equal | sqrtk)"
            ))),
        }
    }
}

/// Gaussian initial condition `eta0 = amp exp(-x^2/width)` with the velocity
/// set by `rule`; time starts at 0.
pub fn gaussian_ic(
    amp: f64,
    width: f64,
    grid: &Arc<Grid>,
    rule: VelocityRule,
    params: &PhysParams,
) -> Result<State> {
    if !(width > 0.0) {
        return Err(Error::Config(format!(
            "gaussian width must be positive, got {width}"
        )));
    }
    params.validate()?;
    let eta = RealField::from_fn(grid, |x| amp * (-x * x / width).exp());
    let u = match rule {
        VelocityRule::Equal => eta.clone(),
        VelocityRule::SqrtK => {
            let values = MultiplierSymbol::k_sqrt(params.h0).values_on(grid);
            apply_values(&eta, &values, grid)
        }
    };
    State::new(grid.clone(), eta, u, 0.0)
}

// ---------------------------------------------------------------------------
// Nonlinear tendency
// ---------------------------------------------------------------------------

/// Precomputed per-grid tables for one system's nonlinear tendency.
pub(crate) struct SystemOps {
    /// Flux symbol: `i xi` (classical) or `i tanh(h0 xi)/h0` (regularized,
    /// dispersive); zero at the Nyquist mode.
    flux: Vec<Complex64>,
    /// 2/3-rule mask applied to the product factors when dealiasing is on.
    dealias_mask: Option<Vec<f64>>,
}

impl SystemOps {
    pub(crate) fn new(grid: &Grid, kind: SystemKind, params: &PhysParams, dealias: bool) -> Self {
        let flux = if kind.regularized_flux() {
            MultiplierSymbol::k_dx(params.h0).values_on(grid)
        } else {
            MultiplierSymbol::derivative().values_on(grid)
        };
        let dealias_mask = dealias.then(|| {
            let xi_max = grid
                .wavenumbers()
                .iter()
                .fold(0.0_f64, |m, x| m.max(x.abs()));
            grid.wavenumbers()
                .iter()
                .map(|&xi| if xi.abs() > (2.0 / 3.0) * xi_max { 0.0 } else { 1.0 })
                .collect()
        });
        SystemOps { flux, dealias_mask }
    }

    /// `(d_eta, d_u) = (-F(eta u), -F(u^2/2))` with F the flux symbol;
    /// products are formed pointwise in physical space.
    pub(crate) fn tendency(
        &self,
        grid: &Grid,
        eta: &RealField,
        u: &RealField,
    ) -> (RealField, RealField) {
        let (eta_f, u_f);
        let (eta, u) = match &self.dealias_mask {
            Some(mask) => {
                eta_f = filter(eta, mask, grid);
                u_f = filter(u, mask, grid);
                (&eta_f, &u_f)
            }
            None => (eta, u),
        };
        let n = grid.n_modes();
        let mut eta_u = RealField::zeros(n);
        let mut half_u2 = RealField::zeros(n);
        for j in 0..n {
            let uj = u.samples()[j];
            eta_u.samples_mut()[j] = eta.samples()[j] * uj;
            half_u2.samples_mut()[j] = 0.5 * uj * uj;
        }
        let mut d_eta = apply_values(&eta_u, &self.flux, grid);
        let mut d_u = apply_values(&half_u2, &self.flux, grid);
        for v in d_eta.samples_mut() {
            *v = -*v;
        }
        for v in d_u.samples_mut() {
            *v = -*v;
        }
        (d_eta, d_u)
    }
}

fn filter(f: &RealField, mask: &[f64], grid: &Grid) -> RealField {
    let mut spectrum = forward_fft(f, grid);
    for (s, m) in spectrum.iter_mut().zip(mask) {
        *s *= m;
    }
    inverse_fft_real(spectrum, grid).0
}

/// Nonlinear tendency of a state: the flux divergence terms only.
///
/// Classical: `(-d/dx (eta u), -d/dx (u^2/2))`; regularized and dispersive:
/// the same with `K d/dx` in place of `d/dx`.
pub fn nonlinear_tendency(
    state: &State,
    kind: SystemKind,
    params: &PhysParams,
) -> (RealField, RealField) {
    let ops = SystemOps::new(&state.grid, kind, params, false);
    ops.tendency(&state.grid, &state.eta, &state.u)
}

// ---------------------------------------------------------------------------
// Linear propagator
// ---------------------------------------------------------------------------

/// Exact mode-wise propagator `exp(t A(xi))` of the linear part
/// `eta_t = -i h0 xi u`, `u_t = -i g sigma(xi) xi eta`.
///
/// The closed form is `cos(w t) I + (sin(w t)/w) A` with
/// `w = |xi| sqrt(g h0 sigma)`; at w = 0 this degenerates to `I + t A`.
/// Returned row-major: `[[m11, m12], [m21, m22]]`.
pub fn linear_propagator(
    t: f64,
    xi: f64,
    kind: SystemKind,
    params: &PhysParams,
) -> [[Complex64; 2]; 2] {
    let sigma = kind.sigma(xi, params);
    let omega = xi.abs() * (params.g * params.h0 * sigma).sqrt();
    let cos = (omega * t).cos();
    let sinc = if omega == 0.0 {
        t
    } else {
        (omega * t).sin() / omega
    };
    let a12 = Complex64::new(0.0, -params.h0 * xi);
    let a21 = Complex64::new(0.0, -params.g * sigma * xi);
    [
        [Complex64::new(cos, 0.0), sinc * a12],
        [sinc * a21, Complex64::new(cos, 0.0)],
    ]
}

/// Per-grid tables of the linear propagator for a fixed time increment.
pub(crate) struct PropagatorTable {
    cos: Vec<f64>,
    m12: Vec<Complex64>,
    m21: Vec<Complex64>,
}

impl PropagatorTable {
    pub(crate) fn new(grid: &Grid, t: f64, kind: SystemKind, params: &PhysParams) -> Self {
        let n = grid.n_modes();
        let mut cos = Vec::with_capacity(n);
        let mut m12 = Vec::with_capacity(n);
        let mut m21 = Vec::with_capacity(n);
        for &xi in grid.wavenumbers() {
            let m = linear_propagator(t, xi, kind, params);
            cos.push(m[0][0].re);
            m12.push(m[0][1]);
            m21.push(m[1][0]);
        }
        // The off-diagonal entries are odd-imaginary in xi; zero them at the
        // unpaired Nyquist mode so real fields stay real.
        let nyq = grid.nyquist_index();
        m12[nyq] = Complex64::new(0.0, 0.0);
        m21[nyq] = Complex64::new(0.0, 0.0);
        PropagatorTable { cos, m12, m21 }
    }

    pub(crate) fn apply(
        &self,
        grid: &Grid,
        eta: &RealField,
        u: &RealField,
    ) -> (RealField, RealField) {
        let mut eta_hat = forward_fft(eta, grid);
        let mut u_hat = forward_fft(u, grid);
        for k in 0..grid.n_modes() {
            let e = eta_hat[k];
            let v = u_hat[k];
            eta_hat[k] = self.cos[k] * e + self.m12[k] * v;
            u_hat[k] = self.m21[k] * e + self.cos[k] * v;
        }
        (
            inverse_fft_real(eta_hat, grid).0,
            inverse_fft_real(u_hat, grid).0,
        )
    }
}

/// Evolve a state under the linear part alone for time `t` (exact, mode-wise).
pub fn propagate_linear(state: &State, t: f64, kind: SystemKind, params: &PhysParams) -> State {
    let table = PropagatorTable::new(&state.grid, t, kind, params);
    let (eta, u) = table.apply(&state.grid, &state.eta, &state.u);
    State {
        grid: state.grid.clone(),
        eta,
        u,
        time: state.time + t,
    }
}
