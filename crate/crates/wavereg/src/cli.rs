//! Command-line front end: `evolve`, `solitary`, `sweep`, `compare`.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 numerical blow-up.
//! `WAVEREG_THREADS` caps the worker count of parallel sections.

use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::diagnostics::{report, EnergyReport};
use crate::error::{Error, Result};
use crate::io::{
    atomic_write, diagnostics_csv, fmt17, load_run_config, profile_csv, profile_on_grid,
    sweep_csv, EulerReference, Ic, Manifest, RunConfig,
};
use crate::solitary::{
    petviashvili_solve, sweep, sweep_independent, Execution, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::spectral::Grid;
use crate::stepper::{evolve, EvolveOutcome, StepConfig, DEFAULT_SUBSTEPS};
use crate::systems::{gaussian_ic, PhysParams, State, SystemKind, VelocityRule};

#[derive(Parser, Debug)]
#[command(
    name = "wavereg",
    version,
    about = "Pseudo-spectral shallow-water solvers: evolution, solitary waves, sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evolve an initial condition; write snapshots, diagnostics and a manifest
    Evolve(EvolveArgs),
    /// Compute one solitary wave; write its profile CSV and a JSON summary
    Solitary(SolitaryArgs),
    /// Amplitude-speed sweep over a range of wave speeds
    Sweep(SweepArgs),
    /// Run several configs and write pairwise difference series
    Compare(CompareArgs),
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    /// Run configuration file (flat key = value text)
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out_dir: PathBuf,

    // Field-by-field overrides of the configuration.
    #[arg(long)]
    pub system: Option<SystemKind>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_left: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub x_right: Option<f64>,
    #[arg(long)]
    pub n_modes: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub t_end: Option<f64>,
    /// gaussian | solitary | file
    #[arg(long)]
    pub ic: Option<String>,
    #[arg(long)]
    pub gaussian_amp: Option<f64>,
    #[arg(long)]
    pub gaussian_width: Option<f64>,
    #[arg(long)]
    pub velocity_rule: Option<VelocityRule>,
    #[arg(long)]
    pub solitary_c: Option<f64>,
    #[arg(long)]
    pub solitary_tol: Option<f64>,
    #[arg(long)]
    pub solitary_max_iter: Option<usize>,
    #[arg(long)]
    pub ic_file: Option<PathBuf>,
    /// Comma-separated snapshot times
    #[arg(long)]
    pub snapshot_times: Option<String>,
    #[arg(long)]
    pub diagnostics_stride: Option<usize>,
    #[arg(long)]
    pub dealias: Option<bool>,
    #[arg(long)]
    pub substeps: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SolitaryArgs {
    /// Wave speed (Froude number); requires c^2 > 1
    #[arg(long)]
    pub c: f64,
    /// regularized | hp
    #[arg(long, default_value = "regularized")]
    pub system: SystemKind,
    #[arg(long, default_value_t = -140.0, allow_negative_numbers = true)]
    pub x_left: f64,
    #[arg(long, default_value_t = 140.0, allow_negative_numbers = true)]
    pub x_right: f64,
    #[arg(long, default_value_t = 8192)]
    pub n_modes: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Profile CSV path; the JSON summary lands next to it
    #[arg(long, default_value = "solitary.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[arg(long)]
    pub c_min: f64,
    #[arg(long)]
    pub c_max: f64,
    #[arg(long)]
    pub step: f64,
    /// regularized | hp
    #[arg(long, default_value = "regularized")]
    pub system: SystemKind,
    #[arg(long, default_value_t = -140.0, allow_negative_numbers = true)]
    pub x_left: f64,
    #[arg(long, default_value_t = 140.0, allow_negative_numbers = true)]
    pub x_right: f64,
    #[arg(long, default_value_t = 8192)]
    pub n_modes: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Disable warm starts so rows are independent (enables parallel workers)
    #[arg(long)]
    pub independent: bool,
    /// Euler reference profile as c=path (repeatable); adds an epsilon column
    #[arg(long = "euler-ref")]
    pub euler_refs: Vec<String>,
    #[arg(long, default_value = "sweep.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    /// Run configuration (repeat two or more times)
    #[arg(long, required = true, num_args = 1)]
    pub config: Vec<PathBuf>,
    #[arg(long, default_value = "compare_out")]
    pub out_dir: PathBuf,
}

/// Run a parsed command; the caller maps errors to exit codes.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Evolve(args) => run_evolve(args),
        Command::Solitary(args) => run_solitary(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Compare(args) => run_compare(args),
    }
}

/// Map an error to the stable exit-code contract.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::BlowUp { .. } => 2,
        _ => 1,
    }
}

// ---------------------------------------------------------------------------
// evolve
// ---------------------------------------------------------------------------

fn resolve_config(args: &EvolveArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => load_run_config(path)?,
        None => RunConfig {
            system: args
                .system
                .ok_or_else(|| Error::Config("--system required without --config".into()))?,
            x_left: args
                .x_left
                .ok_or_else(|| Error::Config("--x-left required without --config".into()))?,
            x_right: args
                .x_right
                .ok_or_else(|| Error::Config("--x-right required without --config".into()))?,
            n_modes: args
                .n_modes
                .ok_or_else(|| Error::Config("--n-modes required without --config".into()))?,
            dt: args
                .dt
                .ok_or_else(|| Error::Config("--dt required without --config".into()))?,
            t_end: args
                .t_end
                .ok_or_else(|| Error::Config("--t-end required without --config".into()))?,
            ic: Ic::Gaussian {
                amp: 0.3,
                width: 40.0,
                velocity_rule: VelocityRule::Equal,
            },
            snapshot_times: Vec::new(),
            diagnostics_stride: 1,
            dealias: false,
            substeps: DEFAULT_SUBSTEPS,
        },
    };
    if let Some(v) = args.system {
        cfg.system = v;
    }
    if let Some(v) = args.x_left {
        cfg.x_left = v;
    }
    if let Some(v) = args.x_right {
        cfg.x_right = v;
    }
    if let Some(v) = args.n_modes {
        cfg.n_modes = v;
    }
    if let Some(v) = args.dt {
        cfg.dt = v;
    }
    if let Some(v) = args.t_end {
        cfg.t_end = v;
    }
    if let Some(kind) = &args.ic {
        cfg.ic = match kind.to_ascii_lowercase().as_str() {
            "gaussian" => Ic::Gaussian {
                amp: args.gaussian_amp.unwrap_or(0.3),
                width: args.gaussian_width.unwrap_or(40.0),
                velocity_rule: args.velocity_rule.unwrap_or(VelocityRule::Equal),
            },
            "solitary" => Ic::Solitary {
                c: args
                    .solitary_c
                    .ok_or_else(|| Error::Config("--solitary-c required for ic=solitary".into()))?,
                tol: args.solitary_tol.unwrap_or(DEFAULT_TOL),
                max_iter: args.solitary_max_iter.unwrap_or(DEFAULT_MAX_ITER),
            },
            "file" => Ic::FromFile {
                path: args
                    .ic_file
                    .clone()
                    .ok_or_else(|| Error::Config("--ic-file required for ic=file".into()))?,
            },
            other => return Err(Error::Config(format!("unknown ic '{other}'"))),
        };
    } else {
        // piecemeal overrides of an existing ic
        match &mut cfg.ic {
            Ic::Gaussian {
                amp,
                width,
                velocity_rule,
            } => {
                if let Some(v) = args.gaussian_amp {
                    *amp = v;
                }
                if let Some(v) = args.gaussian_width {
                    *width = v;
                }
                if let Some(v) = args.velocity_rule {
                    *velocity_rule = v;
                }
            }
            Ic::Solitary { c, tol, max_iter } => {
                if let Some(v) = args.solitary_c {
                    *c = v;
                }
                if let Some(v) = args.solitary_tol {
                    *tol = v;
                }
                if let Some(v) = args.solitary_max_iter {
                    *max_iter = v;
                }
            }
            Ic::FromFile { path } => {
                if let Some(v) = &args.ic_file {
                    *path = v.clone();
                }
            }
        }
    }
    if let Some(v) = &args.snapshot_times {
        let mut times = Vec::new();
        for part in v.split(',') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            times.push(part.parse::<f64>().map_err(|_| {
                Error::Config(format!("cannot parse snapshot time '{part}'"))
            })?);
        }
        cfg.snapshot_times = times;
    }
    if let Some(v) = args.diagnostics_stride {
        cfg.diagnostics_stride = v;
    }
    if let Some(v) = args.dealias {
        cfg.dealias = v;
    }
    if let Some(v) = args.substeps {
        cfg.substeps = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn initial_state(cfg: &RunConfig, grid: &Arc<Grid>, params: &PhysParams) -> Result<State> {
    match &cfg.ic {
        Ic::Gaussian {
            amp,
            width,
            velocity_rule,
        } => gaussian_ic(*amp, *width, grid, *velocity_rule, params),
        Ic::Solitary { c, tol, max_iter } => Ok(petviashvili_solve(
            *c, grid, cfg.system, params, None, *tol, *max_iter,
        )?
        .into_state()),
        Ic::FromFile { path } => {
            let (eta, u) = profile_on_grid(path, grid)?;
            State::new(grid.clone(), eta, u, 0.0)
        }
    }
}

fn fmt_time(t: f64) -> String {
    format!("{t}")
}

struct EvolveProducts {
    reports: Vec<EnergyReport>,
    snapshots: Vec<(f64, State)>,
    near_breaking_at: Option<f64>,
    final_state: Option<State>,
}

/// Chain evolve segments so every snapshot time is landed on exactly.
fn run_segments(
    state: State,
    cfg: &RunConfig,
    params: &PhysParams,
) -> (EvolveProducts, Option<Error>) {
    let mut products = EvolveProducts {
        reports: Vec::new(),
        snapshots: Vec::new(),
        near_breaking_at: None,
        final_state: None,
    };

    let mut targets: Vec<f64> = cfg.snapshot_times.clone();
    targets.push(cfg.t_end);
    targets.sort_by(|a, b| a.partial_cmp(b).unwrap());
    targets.dedup_by(|a, b| (*a - *b).abs() < 1e-12);

    let mut current = state;
    for &target in &targets {
        let mut step_cfg = StepConfig::new(cfg.dt, target);
        step_cfg.dealias = cfg.dealias;
        step_cfg.substeps = cfg.substeps;
        let reports = &mut products.reports;
        let kind = cfg.system;
        let outcome: std::result::Result<EvolveOutcome, Error> =
            evolve(current.clone(), &step_cfg, kind, params, |s| {
                let duplicate = reports
                    .last()
                    .is_some_and(|r: &EnergyReport| (r.time - s.time).abs() < 1e-12);
                if !duplicate {
                    reports.push(report(s, params, kind));
                }
            });
        match outcome {
            Ok(out) => {
                if products.near_breaking_at.is_none() {
                    products.near_breaking_at = out.near_breaking_at;
                }
                products.snapshots.push((target, out.state.clone()));
                current = out.state;
            }
            Err(err) => return (products, Some(err)),
        }
    }
    products.final_state = Some(current);
    (products, None)
}

fn run_evolve(args: EvolveArgs) -> Result<()> {
    let started = Instant::now();
    let cfg = resolve_config(&args)?;
    let grid = cfg.grid()?;
    let params = PhysParams::default();
    let state = initial_state(&cfg, &grid, &params)?;

    let (products, failure) = run_segments(state, &cfg, &params);

    std::fs::create_dir_all(&args.out_dir)?;
    let mut manifest = Manifest::new("evolve", cfg.to_config_text());
    manifest.near_breaking_time = products.near_breaking_at;

    // diagnostics per stride (always keeping the first and last rows)
    let kept: Vec<EnergyReport> = products
        .reports
        .iter()
        .enumerate()
        .filter(|(i, _)| i.is_multiple_of(cfg.diagnostics_stride) || *i + 1 == products.reports.len())
        .map(|(_, r)| *r)
        .collect();
    let diag_path = args.out_dir.join("diagnostics.csv");
    atomic_write(&diag_path, diagnostics_csv(&kept).as_bytes())?;
    manifest.outputs.push("diagnostics.csv".into());

    for (t, snap) in &products.snapshots {
        let name = format!("snapshot_t{}.csv", fmt_time(*t));
        atomic_write(
            &args.out_dir.join(&name),
            profile_csv(&grid, &snap.eta, &snap.u).as_bytes(),
        )?;
        manifest.outputs.push(name);
    }

    if let Some(err) = failure {
        if let Error::BlowUp { time } = err {
            manifest.blow_up_time = Some(time);
        }
        manifest.wall_time_s = started.elapsed().as_secs_f64();
        atomic_write(
            &args.out_dir.join("manifest.json"),
            manifest.to_json()?.as_bytes(),
        )?;
        eprintln!("wavereg evolve: {err}");
        return Err(err);
    }

    manifest.wall_time_s = started.elapsed().as_secs_f64();
    atomic_write(
        &args.out_dir.join("manifest.json"),
        manifest.to_json()?.as_bytes(),
    )?;
    if let Some(t) = products.near_breaking_at {
        eprintln!("wavereg evolve: near-breaking flag tripped at t = {t}");
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// solitary
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SolitarySummary {
    c: f64,
    system: String,
    eta_center: f64,
    u_center: f64,
    iterations: usize,
    final_increment: f64,
    residual_inf: f64,
    x_left: f64,
    x_right: f64,
    n_modes: usize,
    tol: f64,
}

fn run_solitary(args: SolitaryArgs) -> Result<()> {
    let grid = Arc::new(Grid::new(args.x_left, args.x_right, args.n_modes)?);
    let params = PhysParams::default();
    let wave = petviashvili_solve(
        args.c,
        &grid,
        args.system,
        &params,
        None,
        args.tol,
        args.max_iter,
    )
    .map_err(|e| {
        eprintln!("wavereg solitary: {e}");
        e
    })?;

    let center = grid.center_index();
    let summary = SolitarySummary {
        c: wave.c,
        system: args.system.label().to_string(),
        eta_center: wave.eta.samples()[center],
        u_center: wave.u.samples()[center],
        iterations: wave.iterations,
        final_increment: wave.final_increment,
        residual_inf: wave.residual_inf,
        x_left: args.x_left,
        x_right: args.x_right,
        n_modes: args.n_modes,
        tol: args.tol,
    };

    atomic_write(
        &args.out,
        profile_csv(&grid, &wave.eta, &wave.u).as_bytes(),
    )?;
    let json_path = args.out.with_extension("json");
    atomic_write(
        &json_path,
        serde_json::to_string_pretty(&summary)?.as_bytes(),
    )?;
    println!(
        "c = {}: eta(0) = {}, u(0) = {}, {} iterations, residual {:.3e}",
        fmt17(wave.c),
        fmt17(summary.eta_center),
        fmt17(summary.u_center),
        wave.iterations,
        wave.residual_inf
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn parse_euler_spec(spec: &str) -> Result<(f64, PathBuf)> {
    let (c, path) = spec.split_once('=').ok_or_else(|| {
        Error::Config(format!("--euler-ref expects c=path, got '{spec}'"))
    })?;
    let c: f64 = c
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("bad speed in --euler-ref '{spec}'")))?;
    Ok((c, PathBuf::from(path.trim())))
}

fn run_sweep(args: SweepArgs) -> Result<()> {
    if !(args.step > 0.0) {
        return Err(Error::Config(format!(
            "sweep step must be positive, got {}",
            args.step
        )));
    }
    let grid = Arc::new(Grid::new(args.x_left, args.x_right, args.n_modes)?);
    let params = PhysParams::default();

    let mut speeds = Vec::new();
    let mut c = args.c_min;
    while c <= args.c_max + 1e-12 {
        speeds.push(c);
        c = args.c_min + (speeds.len() as f64) * args.step;
    }

    let references: Vec<EulerReference> = args
        .euler_refs
        .iter()
        .map(|spec| {
            let (c, path) = parse_euler_spec(spec)?;
            EulerReference::load(c, &path)
        })
        .collect::<Result<_>>()?;

    let rows = if speeds.is_empty() {
        Vec::new()
    } else if args.independent {
        with_thread_cap(|| {
            sweep_independent(
                &speeds,
                &grid,
                args.system,
                &params,
                args.tol,
                args.max_iter,
                Execution::Parallel,
            )
        })?
    } else {
        sweep(&speeds, &grid, args.system, &params, args.tol, args.max_iter)?
    };

    let epsilon: Option<Vec<Option<f64>>> = if references.is_empty() {
        None
    } else {
        let mut eps = Vec::with_capacity(rows.len());
        for row in &rows {
            let matched = references.iter().find(|r| (r.c - row.c).abs() < 1e-9);
            eps.push(match matched {
                Some(reference) if row.converged => {
                    let wave = petviashvili_solve(
                        row.c,
                        &grid,
                        args.system,
                        &params,
                        None,
                        args.tol,
                        args.max_iter,
                    )?;
                    Some(reference.epsilon(&wave.eta, &grid))
                }
                _ => None,
            });
        }
        Some(eps)
    };

    atomic_write(&args.out, sweep_csv(&rows, epsilon.as_deref()).as_bytes())?;

    let failed = rows.iter().filter(|r| !r.converged).count();
    if failed > 0 {
        eprintln!("wavereg sweep: {failed}/{} rows did not converge", rows.len());
        if failed == rows.len() && !rows.is_empty() {
            return Err(Error::NonConvergence {
                max_iter: args.max_iter,
                increment: f64::NAN,
                tol: args.tol,
            });
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

fn run_compare(args: CompareArgs) -> Result<()> {
    let started = Instant::now();
    if args.config.len() < 2 {
        return Err(Error::Config(
            "compare needs at least two --config files".into(),
        ));
    }
    let configs: Vec<RunConfig> = args
        .config
        .iter()
        .map(|p| load_run_config(p))
        .collect::<Result<_>>()?;

    let first = &configs[0];
    for (i, cfg) in configs.iter().enumerate().skip(1) {
        if cfg.x_left != first.x_left
            || cfg.x_right != first.x_right
            || cfg.n_modes != first.n_modes
        {
            return Err(Error::Config(format!(
                "config #{i} grid [{}, {}] x {} does not match config #0",
                cfg.x_left, cfg.x_right, cfg.n_modes
            )));
        }
        if cfg.dt != first.dt || cfg.t_end != first.t_end {
            return Err(Error::Config(format!(
                "config #{i} time stepping (dt, t_end) does not match config #0"
            )));
        }
    }

    let params = PhysParams::default();
    let grid = first.grid()?;
    let labels: Vec<String> = configs
        .iter()
        .enumerate()
        .map(|(i, c)| format!("{i}_{}", c.system.label()))
        .collect();

    // run every config, recording the state after each observation step
    let runs: Vec<Result<(Vec<State>, Option<f64>)>> = with_thread_cap(|| {
        map_jobs(&configs, |cfg| {
            let state = initial_state(cfg, &grid, &params)?;
            let mut step_cfg = StepConfig::new(cfg.dt, cfg.t_end);
            step_cfg.dealias = cfg.dealias;
            step_cfg.substeps = cfg.substeps;
            let mut series = Vec::new();
            let out = evolve(state, &step_cfg, cfg.system, &params, |s| {
                series.push(s.clone());
            })?;
            Ok((series, out.near_breaking_at))
        })
    });

    let mut series = Vec::new();
    let mut near_breaking = Vec::new();
    for run in runs {
        let (s, nb) = run?;
        series.push(s);
        near_breaking.push(nb);
    }

    std::fs::create_dir_all(&args.out_dir)?;
    let mut manifest = Manifest::new(
        "compare",
        configs
            .iter()
            .map(|c| c.to_config_text())
            .collect::<Vec<_>>()
            .join("\n---\n"),
    );
    let mut plot = String::from("set datafile separator ','\nset key autotitle columnhead\n");

    for i in 0..configs.len() {
        for j in (i + 1)..configs.len() {
            let pair = format!("{}_vs_{}", labels[i], labels[j]);
            let mut ts = String::from("time,l2_diff,linf_eta,linf_u\n");
            for (a, b) in series[i].iter().zip(&series[j]) {
                let mut l2 = 0.0;
                let mut linf_eta = 0.0_f64;
                let mut linf_u = 0.0_f64;
                for m in 0..grid.n_modes() {
                    let de = a.eta.samples()[m] - b.eta.samples()[m];
                    let du = a.u.samples()[m] - b.u.samples()[m];
                    l2 += de * de + du * du;
                    linf_eta = linf_eta.max(de.abs());
                    linf_u = linf_u.max(du.abs());
                }
                l2 = (grid.dx() * l2).sqrt();
                ts.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt17(a.time),
                    fmt17(l2),
                    fmt17(linf_eta),
                    fmt17(linf_u)
                ));
            }
            let ts_name = format!("diff_{pair}.csv");
            atomic_write(&args.out_dir.join(&ts_name), ts.as_bytes())?;
            manifest.outputs.push(ts_name.clone());

            // final-snapshot difference profile
            let (a, b) = (&series[i][series[i].len() - 1], &series[j][series[j].len() - 1]);
            let mut prof = String::from("x,d_eta,d_u\n");
            for m in 0..grid.n_modes() {
                prof.push_str(&format!(
                    "{},{},{}\n",
                    fmt17(grid.point(m)),
                    fmt17(a.eta.samples()[m] - b.eta.samples()[m]),
                    fmt17(a.u.samples()[m] - b.u.samples()[m])
                ));
            }
            let prof_name = format!("diff_profile_{pair}.csv");
            atomic_write(&args.out_dir.join(&prof_name), prof.as_bytes())?;
            manifest.outputs.push(prof_name.clone());

            plot.push_str(&format!(
                "plot 'diff_{pair}.csv' using 1:2 with lines title 'L2 {pair}'\npause -1\n"
            ));
        }
    }

    // final profiles of every run, for overlay plots
    for (label, s) in labels.iter().zip(&series) {
        let last = &s[s.len() - 1];
        let name = format!("final_{label}.csv");
        atomic_write(
            &args.out_dir.join(&name),
            profile_csv(&grid, &last.eta, &last.u).as_bytes(),
        )?;
        manifest.outputs.push(name);
    }

    atomic_write(&args.out_dir.join("plot.gp"), plot.as_bytes())?;
    manifest.outputs.push("plot.gp".into());
    manifest.near_breaking_time = near_breaking.into_iter().flatten().next();
    manifest.wall_time_s = started.elapsed().as_secs_f64();
    atomic_write(
        &args.out_dir.join("manifest.json"),
        manifest.to_json()?.as_bytes(),
    )?;
    Ok(())
}

// ---------------------------------------------------------------------------
// worker-pool plumbing
// ---------------------------------------------------------------------------

/// Run `f` under a rayon pool capped by `WAVEREG_THREADS` (parallel builds);
/// plain invocation otherwise.
fn with_thread_cap<R: Send>(f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    {
        let cap = std::env::var("WAVEREG_THREADS")
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
            .filter(|&n| n >= 1);
        if let Some(n) = cap {
            if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n).build() {
                return pool.install(f);
            }
        }
        f()
    }
    #[cfg(not(feature = "parallel"))]
    {
        f()
    }
}

/// Map jobs over items, in parallel when the feature allows it.
fn map_jobs<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Send + Sync) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

impl clap::ValueEnum for SystemKind {
    fn value_variants<'a>() -> &'a [Self] {
        &[
            SystemKind::ClassicalSw,
            SystemKind::RegularizedSw,
            SystemKind::FullyDispersiveHp,
        ]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.label()))
    }
}

impl clap::ValueEnum for VelocityRule {
    fn value_variants<'a>() -> &'a [Self] {
        &[VelocityRule::Equal, VelocityRule::SqrtK]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(match self {
            VelocityRule::Equal => "equal",
            VelocityRule::SqrtK => "sqrtk",
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euler_spec_parsing() {
        let (c, path) = parse_euler_spec("1.15=refs/euler.csv").unwrap();
        assert_eq!(c, 1.15);
        assert_eq!(path, PathBuf::from("refs/euler.csv"));
        assert!(parse_euler_spec("nope").is_err());
        assert!(parse_euler_spec("x=path").is_err());
    }

    #[test]
    fn exit_codes_stable() {
        assert_eq!(exit_code(&Error::BlowUp { time: 1.0 }), 2);
        assert_eq!(exit_code(&Error::Config("x".into())), 1);
        assert_eq!(
            exit_code(&Error::InvalidSpeed {
                c: 0.9,
                threshold: 1.0
            }),
            1
        );
    }

    #[test]
    fn fmt_time_compact() {
        assert_eq!(fmt_time(15.0), "15");
        assert_eq!(fmt_time(7.5), "7.5");
        assert_eq!(fmt_time(0.0), "0");
    }
}
