//! Pseudo-spectral solvers for three shallow-water systems (classical,
//! regularized with the bounded flux operator K, and fully dispersive) with
//! Hamiltonian diagnostics and Petviashvili computation of solitary waves.
//!
//! The library layers are:
//!
//! * [`spectral`]: periodic grids, FFT plumbing, Fourier-multiplier symbols;
//! * [`systems`]: the three systems' tendencies, exact linear propagators
//!   and initial conditions;
//! * [`stepper`]: split-step time integration with blow-up and
//!   near-breaking detection;
//! * [`diagnostics`]: Hamiltonian, energy norm, mass and validity monitors;
//! * [`solitary`]: traveling-wave solves and amplitude-speed sweeps;
//! * [`io`] / [`cli`]: run configs, CSV/JSON serialization and the
//!   `wavereg` binary.
//!
//! With the default `parallel` feature, independent solves (sweep rows with
//! warm starts disabled, side-by-side model comparisons) run on a rayon
//! pool; without it every code path is sequential.

// `!(x > 0.0)` in validation guards is deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod io;
pub mod solitary;
pub mod spectral;
pub mod stepper;
pub mod systems;

pub use error::{Error, Result};
pub use solitary::{
    petviashvili_solve, residual, sweep, sweep_independent, Execution, SolitaryWave, SweepRow,
};
pub use spectral::{
    apply_multiplier, inner_product, symbol_k, symbol_k_dx, symbol_k_inv, symbol_k_inv_sqrt,
    symbol_k_sqrt, Grid, MultiplierSymbol, Parity, RealField,
};
pub use stepper::{evolve, near_breaking, strang_step, EvolveOutcome, StepConfig};
pub use systems::{
    gaussian_ic, linear_propagator, nonlinear_tendency, propagate_linear, PhysParams, State,
    SystemKind, VelocityRule,
};

pub use diagnostics::{energy_norm, hamiltonian, report, EnergyReport};
