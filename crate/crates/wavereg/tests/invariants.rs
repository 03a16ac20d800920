//! Evolution- and solver-level invariants beyond the acceptance gate:
//! energy drift for the dispersive and classical systems, solve ranges,
//! and the monotone amplitude-speed relation.

mod common;

use std::sync::Arc;
use wavereg::{
    evolve, gaussian_ic, hamiltonian, petviashvili_solve, solitary, sweep, Grid, PhysParams,
    StepConfig, SystemKind, VelocityRule,
};

fn gaussian_benchmark_run(kind: SystemKind) -> (f64, f64) {
    // max |H(t) - H(0)| and max relative mass drift over the Gaussian run
    let grid = Arc::new(Grid::new(-60.0, 60.0, 1024).unwrap());
    let params = PhysParams::default();
    let state = gaussian_ic(0.3, 40.0, &grid, VelocityRule::Equal, &params).unwrap();
    let h0 = hamiltonian(&state, &params, kind);
    let m0 = wavereg::report(&state, &params, kind).mass;
    let mut drift = 0.0_f64;
    let mut mass_drift = 0.0_f64;
    let cfg = StepConfig::new(0.05, 15.0);
    evolve(state, &cfg, kind, &params, |s| {
        drift = drift.max((hamiltonian(s, &params, kind) - h0).abs());
        mass_drift = mass_drift.max((wavereg::report(s, &params, kind).mass - m0).abs());
    })
    .unwrap();
    (drift, mass_drift / m0.abs())
}

#[test]
fn dispersive_energy_drift_below_gate() {
    let (drift, _) = gaussian_benchmark_run(SystemKind::FullyDispersiveHp);
    assert!(drift < 1e-10, "hp energy drift {drift:.3e}");
}

#[test]
fn classical_energy_drift_while_smooth() {
    let (drift, _) = gaussian_benchmark_run(SystemKind::ClassicalSw);
    assert!(drift < 1e-8, "classical energy drift {drift:.3e}");
}

#[test]
fn solve_ranges_cover_the_reported_speeds() {
    let grid = Arc::new(Grid::new(-140.0, 140.0, 4096).unwrap());
    let params = PhysParams::default();
    // dispersive waves across (1, 1.29]
    for &c in &[1.02, 1.05, 1.1, 1.2, 1.29] {
        let wave = petviashvili_solve(
            c,
            &grid,
            SystemKind::FullyDispersiveHp,
            &params,
            None,
            solitary::DEFAULT_TOL,
            solitary::DEFAULT_MAX_ITER,
        )
        .unwrap_or_else(|e| panic!("hp solve failed at c = {c}: {e}"));
        assert!(wave.eta.max() > 0.0);
    }
}

#[test]
fn amplitude_strictly_increasing_in_speed() {
    let grid = Arc::new(Grid::new(-140.0, 140.0, 4096).unwrap());
    let params = PhysParams::default();
    let speeds: Vec<f64> = (0..6).map(|i| 1.05 + 0.05 * i as f64).collect();
    let rows = sweep(
        &speeds,
        &grid,
        SystemKind::RegularizedSw,
        &params,
        solitary::DEFAULT_TOL,
        solitary::DEFAULT_MAX_ITER,
    )
    .unwrap();
    assert_eq!(rows.len(), 6);
    for pair in rows.windows(2) {
        assert!(pair[0].converged && pair[1].converged);
        assert!(
            pair[1].amplitude_eta > pair[0].amplitude_eta,
            "amplitude not increasing: {} -> {}",
            pair[0].amplitude_eta,
            pair[1].amplitude_eta
        );
    }
    // u amplitudes trail eta amplitudes across the range
    for row in &rows {
        assert!(row.amplitude_u < row.amplitude_eta);
        assert!(row.amplitude_u > 0.0);
    }
}

#[test]
fn classical_gradient_grows_past_breaking() {
    let grid = Arc::new(Grid::new(-60.0, 60.0, 1024).unwrap());
    let params = PhysParams::default();
    let state = gaussian_ic(0.3, 40.0, &grid, VelocityRule::Equal, &params).unwrap();
    let g0 = wavereg::report(&state, &params, SystemKind::ClassicalSw).max_gradient;
    let cfg = StepConfig::new(0.05, 18.0);
    let out = evolve(state, &cfg, SystemKind::ClassicalSw, &params, |_| {}).unwrap();
    assert!(out.near_breaking_at.is_some());
    let g_end = wavereg::report(&out.state, &params, SystemKind::ClassicalSw).max_gradient;
    assert!(
        g_end > 10.0 * g0,
        "past-breaking gradient {g_end} vs initial {g0}"
    );
}

#[test]
fn depth_positivity_preserved_on_benchmark_run() {
    let grid = Arc::new(Grid::new(-60.0, 60.0, 1024).unwrap());
    let params = PhysParams::default();
    for kind in SystemKind::all() {
        let state = gaussian_ic(0.3, 40.0, &grid, VelocityRule::Equal, &params).unwrap();
        let mut always_positive = true;
        let cfg = StepConfig::new(0.05, 15.0);
        evolve(state, &cfg, kind, &params, |s| {
            always_positive &= s.depth_positive(params.h0);
        })
        .unwrap();
        assert!(always_positive, "{kind}: total depth lost positivity");
    }
}
