//! Conserved-quantity and validity monitors.
//!
//! The monitored energy depends on the system:
//!
//! * classical: `1/2 int (g eta^2 + h0 u^2 + eta u^2)`, the classical energy;
//! * regularized: `1/2 int (g eta K^-1 eta + h0 u K^-1 u + eta u^2)`, the
//!   Hamiltonian of the regularized system;
//! * dispersive: `1/2 int (g eta^2 + h0 u K^-1 u + eta u^2)`, the functional
//!   conserved by the dispersive system's Hamiltonian structure (identity
//!   weight on eta, `K^-1` on u).
//!
//! All integrals use the periodic rectangle rule.

use serde::Serialize;

use crate::spectral::{apply_values, inner_product, MultiplierSymbol, RealField};
use crate::systems::{PhysParams, State, SystemKind};

/// One row of the diagnostics time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyReport {
    pub time: f64,
    pub hamiltonian: f64,
    /// The weighted norm `(1/sqrt 2) ||K^{-1/2} v||_{L2}` (unit parameters).
    pub energy_norm: f64,
    /// `int eta dx`.
    pub mass: f64,
    /// `max eta`.
    pub amplitude: f64,
    /// `max |d eta / dx|`, computed spectrally.
    pub max_gradient: f64,
    /// Whether `h0 + eta > 0` at every sample point.
    pub depth_positive: bool,
}

/// Total energy of a state under the given system.
pub fn hamiltonian(state: &State, params: &PhysParams, kind: SystemKind) -> f64 {
    let grid = &state.grid;
    let k_inv = MultiplierSymbol::k_inv(params.h0);
    let weighted_eta = match kind {
        SystemKind::RegularizedSw => apply_values(&state.eta, &k_inv.values_on(grid), grid),
        _ => state.eta.clone(),
    };
    let weighted_u = match kind {
        SystemKind::ClassicalSw => state.u.clone(),
        _ => apply_values(&state.u, &k_inv.values_on(grid), grid),
    };
    let u_sq = RealField::from_samples(state.u.samples().iter().map(|v| v * v).collect());
    0.5 * (params.g * inner_product(&state.eta, &weighted_eta, grid)
        + params.h0 * inner_product(&state.u, &weighted_u, grid)
        + inner_product(&state.eta, &u_sq, grid))
}

/// The energy norm `(1/sqrt 2) ||K^{-1/2} v||_{L2}` with unit parameters,
/// whose square is the quadratic part of the regularized Hamiltonian.
pub fn energy_norm(state: &State) -> f64 {
    let grid = &state.grid;
    let values = MultiplierSymbol::k_inv_sqrt(1.0).values_on(grid);
    let we = apply_values(&state.eta, &values, grid);
    let wu = apply_values(&state.u, &values, grid);
    (0.5 * (inner_product(&we, &we, grid) + inner_product(&wu, &wu, grid))).sqrt()
}

/// Assemble the full diagnostics row for a state.
pub fn report(state: &State, params: &PhysParams, kind: SystemKind) -> EnergyReport {
    let grid = &state.grid;
    let ones = RealField::from_samples(vec![1.0; grid.n_modes()]);
    let gradient = apply_values(
        &state.eta,
        &MultiplierSymbol::derivative().values_on(grid),
        grid,
    );
    EnergyReport {
        time: state.time,
        hamiltonian: hamiltonian(state, params, kind),
        energy_norm: energy_norm(state),
        mass: inner_product(&state.eta, &ones, grid),
        amplitude: state.eta.max(),
        max_gradient: gradient.max_abs(),
        depth_positive: state.depth_positive(params.h0),
    }
}

/// Column order of [`EnergyReport`] in the diagnostics CSV.
pub const REPORT_COLUMNS: &str = "time,hamiltonian,energy_norm,mass,amplitude,max_gradient,depth_positive";

impl EnergyReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            crate::io::fmt17(self.time),
            crate::io::fmt17(self.hamiltonian),
            crate::io::fmt17(self.energy_norm),
            crate::io::fmt17(self.mass),
            crate::io::fmt17(self.amplitude),
            crate::io::fmt17(self.max_gradient),
            self.depth_positive
        )
    }
}
