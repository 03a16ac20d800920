//! Run configuration, result serialization and reference-data ingestion.
//!
//! Configs are flat `key = value` text ('#' starts a comment). Floats in CSV
//! output carry 17 significant digits, which round-trips binary64 exactly.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::diagnostics::{EnergyReport, REPORT_COLUMNS};
use crate::error::{Error, Result};
use crate::solitary::SweepRow;
use crate::spectral::{Grid, RealField};
use crate::stepper::DEFAULT_SUBSTEPS;
use crate::systems::{SystemKind, VelocityRule};

/// 17-significant-digit decimal rendering: lossless for binary64.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Write a file atomically (write to a sibling temp file, then rename).
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&dir)?;
    let stem = path
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = dir.join(format!(".{stem}.tmp{}", std::process::id()));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

/// Initial-condition selector.
#[derive(Debug, Clone, PartialEq)]
pub enum Ic {
    Gaussian {
        amp: f64,
        width: f64,
        velocity_rule: VelocityRule,
    },
    Solitary {
        c: f64,
        tol: f64,
        max_iter: usize,
    },
    FromFile {
        path: PathBuf,
    },
}

/// A complete evolve-run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemKind,
    pub x_left: f64,
    pub x_right: f64,
    pub n_modes: usize,
    pub dt: f64,
    pub t_end: f64,
    pub ic: Ic,
    pub snapshot_times: Vec<f64>,
    pub diagnostics_stride: usize,
    pub dealias: bool,
    pub substeps: usize,
}

impl RunConfig {
    pub fn grid(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::new(self.x_left, self.x_right, self.n_modes)?))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::Config(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        for &t in &self.snapshot_times {
            if !(0.0..=self.t_end).contains(&t) {
                return Err(Error::Config(format!(
                    "snapshot time {t} outside [0, {}]",
                    self.t_end
                )));
            }
        }
        if self.diagnostics_stride < 1 {
            return Err(Error::Config("diagnostics_stride must be >= 1".into()));
        }
        if self.substeps < 1 {
            return Err(Error::Config("substeps must be >= 1".into()));
        }
        if let Ic::FromFile { path } = &self.ic {
            if !path.exists() {
                return Err(Error::Config(format!(
                    "ic_file '{}' does not exist",
                    path.display()
                )));
            }
        }
        Ok(())
    }

    /// Render as config-file text; parsing it back reproduces the config.
    pub fn to_config_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "system = {}", self.system);
        let _ = writeln!(s, "x_left = {}", fmt17(self.x_left));
        let _ = writeln!(s, "x_right = {}", fmt17(self.x_right));
        let _ = writeln!(s, "n_modes = {}", self.n_modes);
        let _ = writeln!(s, "dt = {}", fmt17(self.dt));
        let _ = writeln!(s, "t_end = {}", fmt17(self.t_end));
        match &self.ic {
            Ic::Gaussian {
                amp,
                width,
                velocity_rule,
            } => {
                let _ = writeln!(s, "ic = gaussian");
                let _ = writeln!(s, "gaussian_amp = {}", fmt17(*amp));
                let _ = writeln!(s, "gaussian_width = {}", fmt17(*width));
                let _ = writeln!(s, "velocity_rule = {velocity_rule}");
            }
            Ic::Solitary { c, tol, max_iter } => {
                let _ = writeln!(s, "ic = solitary");
                let _ = writeln!(s, "solitary_c = {}", fmt17(*c));
                let _ = writeln!(s, "solitary_tol = {}", fmt17(*tol));
                let _ = writeln!(s, "solitary_max_iter = {max_iter}");
            }
            Ic::FromFile { path } => {
                let _ = writeln!(s, "ic = file");
                let _ = writeln!(s, "ic_file = {}", path.display());
            }
        }
        if !self.snapshot_times.is_empty() {
            let times: Vec<String> = self.snapshot_times.iter().map(|t| fmt17(*t)).collect();
            let _ = writeln!(s, "snapshot_times = {}", times.join(", "));
        }
        let _ = writeln!(s, "diagnostics_stride = {}", self.diagnostics_stride);
        let _ = writeln!(s, "dealias = {}", self.dealias);
        let _ = writeln!(s, "substeps = {}", self.substeps);
        s
    }
}

struct KvLine {
    line: usize,
    key: String,
    value: String,
}

fn parse_kv(text: &str) -> Result<Vec<KvLine>> {
    let mut out = Vec::new();
    let mut seen = BTreeSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if stripped.is_empty() {
            continue;
        }
        let (key, value) = stripped.split_once('=').ok_or(Error::ConfigParse {
            line,
            message: format!("expected 'key = value', got '{stripped}'"),
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if !seen.insert(key.clone()) {
            return Err(Error::ConfigParse {
                line,
                message: format!("duplicate key '{key}'"),
            });
        }
        out.push(KvLine { line, key, value });
    }
    Ok(out)
}

fn parse_value<T: FromStr>(kv: &KvLine, what: &str) -> Result<T> {
    kv.value.parse::<T>().map_err(|_| Error::ConfigParse {
        line: kv.line,
        message: format!("cannot parse {what} from '{}'", kv.value),
    })
}

/// Parse a run configuration from flat key = value text.
pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    let kvs = parse_kv(text)?;
    let find = |key: &str| kvs.iter().find(|kv| kv.key == key);
    let require = |key: &str| {
        find(key).ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
    };

    let known: BTreeSet<&str> = [
        "system",
        "x_left",
        "x_right",
        "n_modes",
        "dt",
        "t_end",
        "ic",
        "gaussian_amp",
        "gaussian_width",
        "velocity_rule",
        "solitary_c",
        "solitary_tol",
        "solitary_max_iter",
        "ic_file",
        "snapshot_times",
        "diagnostics_stride",
        "dealias",
        "substeps",
    ]
    .into();
    for kv in &kvs {
        if !known.contains(kv.key.as_str()) {
            return Err(Error::ConfigParse {
                line: kv.line,
                message: format!("unknown key '{}'", kv.key),
            });
        }
    }

    let system: SystemKind = {
        let kv = require("system")?;
        kv.value.parse().map_err(|e| Error::ConfigParse {
            line: kv.line,
            message: format!("{e}"),
        })?
    };
    let x_left: f64 = parse_value(require("x_left")?, "a number")?;
    let x_right: f64 = parse_value(require("x_right")?, "a number")?;
    let n_modes: usize = parse_value(require("n_modes")?, "an integer")?;
    let dt: f64 = parse_value(require("dt")?, "a number")?;
    let t_end: f64 = parse_value(require("t_end")?, "a number")?;

    let ic_kv = require("ic")?;
    let ic = match ic_kv.value.to_ascii_lowercase().as_str() {
        "gaussian" => Ic::Gaussian {
            amp: parse_value(require("gaussian_amp")?, "a number")?,
            width: parse_value(require("gaussian_width")?, "a number")?,
            velocity_rule: match find("velocity_rule") {
                Some(kv) => kv.value.parse().map_err(|e| Error::ConfigParse {
                    line: kv.line,
                    message: format!("{e}"),
                })?,
                None => VelocityRule::Equal,
            },
        },
        "solitary" => Ic::Solitary {
            c: parse_value(require("solitary_c")?, "a number")?,
            tol: match find("solitary_tol") {
                Some(kv) => parse_value(kv, "a number")?,
                None => crate::solitary::DEFAULT_TOL,
            },
            max_iter: match find("solitary_max_iter") {
                Some(kv) => parse_value(kv, "an integer")?,
                None => crate::solitary::DEFAULT_MAX_ITER,
            },
        },
        "file" | "from_file" => Ic::FromFile {
            path: PathBuf::from(&require("ic_file")?.value),
        },
        other => {
            return Err(Error::ConfigParse {
                line: ic_kv.line,
                message: format!("unknown ic '{other}' (expected gaussian | solitary | file)"),
            })
        }
    };

    let snapshot_times = match find("snapshot_times") {
        Some(kv) => {
            let mut times = Vec::new();
            for part in kv.value.split(',') {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                times.push(part.parse::<f64>().map_err(|_| Error::ConfigParse {
                    line: kv.line,
                    message: format!("cannot parse snapshot time '{part}'"),
                })?);
            }
            times
        }
        None => Vec::new(),
    };

    let diagnostics_stride = match find("diagnostics_stride") {
        Some(kv) => parse_value(kv, "an integer")?,
        None => 1,
    };
    let dealias = match find("dealias") {
        Some(kv) => parse_value(kv, "a boolean")?,
        None => false,
    };
    let substeps = match find("substeps") {
        Some(kv) => parse_value(kv, "an integer")?,
        None => DEFAULT_SUBSTEPS,
    };

    let cfg = RunConfig {
        system,
        x_left,
        x_right,
        n_modes,
        dt,
        t_end,
        ic,
        snapshot_times,
        diagnostics_stride,
        dealias,
        substeps,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_run_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config '{}': {e}", path.display())))?;
    parse_run_config(&text)
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Profile snapshot: columns x, eta, u.
pub fn profile_csv(grid: &Grid, eta: &RealField, u: &RealField) -> String {
    let mut s = String::with_capacity(64 * grid.n_modes());
    s.push_str("x,eta,u\n");
    for j in 0..grid.n_modes() {
        let _ = writeln!(
            s,
            "{},{},{}",
            fmt17(grid.point(j)),
            fmt17(eta.samples()[j]),
            fmt17(u.samples()[j])
        );
    }
    s
}

/// Read a profile CSV back into columns (x, eta, u).
pub fn read_profile_csv(path: &Path) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read profile '{}': {e}", path.display())))?;
    let mut x = Vec::new();
    let mut eta = Vec::new();
    let mut u = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if idx == 0 {
            if line.trim() != "x,eta,u" {
                return Err(Error::Config(format!(
                    "profile '{}' must start with header 'x,eta,u'",
                    path.display()
                )));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(Error::Config(format!(
                "profile '{}' line {}: expected 3 columns",
                path.display(),
                idx + 1
            )));
        }
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|_| {
                Error::Config(format!(
                    "profile '{}' line {}: bad number '{s}'",
                    path.display(),
                    idx + 1
                ))
            })
        };
        x.push(parse(cols[0])?);
        eta.push(parse(cols[1])?);
        u.push(parse(cols[2])?);
    }
    Ok((x, eta, u))
}

/// Check that profile x-samples match a grid and return the fields.
pub fn profile_on_grid(
    path: &Path,
    grid: &Grid,
) -> Result<(RealField, RealField)> {
    let (x, eta, u) = read_profile_csv(path)?;
    if x.len() != grid.n_modes() {
        return Err(Error::Config(format!(
            "ic_file '{}' has {} samples but the grid has {} points",
            path.display(),
            x.len(),
            grid.n_modes()
        )));
    }
    for (j, &xj) in x.iter().enumerate() {
        if (xj - grid.point(j)).abs() > 1e-9 * grid.dx().max(1.0) {
            return Err(Error::Config(format!(
                "ic_file '{}' x[{j}] = {xj} does not match grid point {}",
                path.display(),
                grid.point(j)
            )));
        }
    }
    Ok((RealField::from_samples(eta), RealField::from_samples(u)))
}

pub fn diagnostics_csv(rows: &[EnergyReport]) -> String {
    let mut s = String::new();
    s.push_str(REPORT_COLUMNS);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// Sweep CSV; the epsilon column is present only when reference data was
/// supplied, empty where no reference matches the row's speed.
pub fn sweep_csv(rows: &[SweepRow], epsilon: Option<&[Option<f64>]>) -> String {
    let mut s = String::new();
    s.push_str("c,amplitude_eta,amplitude_u,converged");
    if epsilon.is_some() {
        s.push_str(",epsilon");
    }
    s.push('\n');
    for (i, r) in rows.iter().enumerate() {
        let _ = write!(
            s,
            "{},{},{},{}",
            fmt17(r.c),
            fmt17(r.amplitude_eta),
            fmt17(r.amplitude_u),
            r.converged
        );
        if let Some(eps) = epsilon {
            match eps.get(i).copied().flatten() {
                Some(e) => {
                    let _ = write!(s, ",{}", fmt17(e));
                }
                None => s.push(','),
            }
        }
        s.push('\n');
    }
    s
}

// ---------------------------------------------------------------------------
// Euler reference profiles
// ---------------------------------------------------------------------------

/// Externally computed reference elevation profile for one wave speed.
#[derive(Debug, Clone)]
pub struct EulerReference {
    pub c: f64,
    pub x: Vec<f64>,
    pub eta: Vec<f64>,
}

impl EulerReference {
    /// Load from a CSV with header `x,eta`; x must be strictly increasing.
    pub fn load(c: f64, path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read reference '{}': {e}", path.display()))
        })?;
        let mut x = Vec::new();
        let mut eta = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if idx == 0 {
                if line.trim() != "x,eta" {
                    return Err(Error::Config(format!(
                        "reference '{}' must start with header 'x,eta'",
                        path.display()
                    )));
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (a, b) = line.split_once(',').ok_or_else(|| {
                Error::Config(format!(
                    "reference '{}' line {}: expected 2 columns",
                    path.display(),
                    idx + 1
                ))
            })?;
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|_| {
                    Error::Config(format!(
                        "reference '{}' line {}: bad number '{s}'",
                        path.display(),
                        idx + 1
                    ))
                })
            };
            x.push(parse(a)?);
            eta.push(parse(b)?);
        }
        if x.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "reference '{}' x-samples must be strictly increasing",
                path.display()
            )));
        }
        if x.len() < 2 {
            return Err(Error::Config(format!(
                "reference '{}' needs at least two samples",
                path.display()
            )));
        }
        Ok(EulerReference { c, x, eta })
    }

    /// Resample onto a solver grid by monotone linear interpolation; zero
    /// outside the reference range (solitary profiles decay).
    pub fn resample(&self, grid: &Grid) -> RealField {
        let mut out = Vec::with_capacity(grid.n_modes());
        for j in 0..grid.n_modes() {
            let xq = grid.point(j);
            if xq < self.x[0] || xq > *self.x.last().unwrap() {
                out.push(0.0);
                continue;
            }
            let k = match self
                .x
                .binary_search_by(|v| v.partial_cmp(&xq).unwrap())
            {
                Ok(k) => {
                    out.push(self.eta[k]);
                    continue;
                }
                Err(k) => k,
            };
            let (x0, x1) = (self.x[k - 1], self.x[k]);
            let (y0, y1) = (self.eta[k - 1], self.eta[k]);
            out.push(y0 + (y1 - y0) * (xq - x0) / (x1 - x0));
        }
        RealField::from_samples(out)
    }

    /// Relative L2 difference `||eta_ref - eta|| / ||eta_ref||` on the grid.
    pub fn epsilon(&self, eta: &RealField, grid: &Grid) -> f64 {
        let reference = self.resample(grid);
        let mut num = 0.0;
        let mut den = 0.0;
        for j in 0..grid.n_modes() {
            let d = reference.samples()[j] - eta.samples()[j];
            num += d * d;
            den += reference.samples()[j] * reference.samples()[j];
        }
        (num / den).sqrt()
    }
}

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

/// JSON record making a run re-executable: replaying `config_text` yields
/// identical CSV outputs.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config_text: String,
    pub wall_time_s: f64,
    pub blow_up_time: Option<f64>,
    pub near_breaking_time: Option<f64>,
    pub outputs: Vec<String>,
}

impl Manifest {
    pub fn new(command: impl Into<String>, config_text: String) -> Self {
        Manifest {
            tool: "wavereg",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            config_text,
            wall_time_s: 0.0,
            blow_up_time: None,
            near_breaking_time: None,
            outputs: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt17_round_trips() {
        for &v in &[0.3, -1.0 / 3.0, 1.8e-13, 0.2153082668048, 6.02e23, -0.0] {
            let s = fmt17(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{v} -> {s} -> {back}");
        }
    }

    #[test]
    fn config_round_trip() {
        let text = "\
# comment
system = regularized
x_left = -60
x_right = 60
n_modes = 1024
dt = 0.05
t_end = 15
ic = gaussian
gaussian_amp = 0.3
gaussian_width = 40   # trailing comment
velocity_rule = equal
snapshot_times = 7.5, 15
diagnostics_stride = 2
";
        let cfg = parse_run_config(text).unwrap();
        assert_eq!(cfg.system, SystemKind::RegularizedSw);
        assert_eq!(cfg.n_modes, 1024);
        assert_eq!(cfg.snapshot_times, vec![7.5, 15.0]);
        assert_eq!(cfg.diagnostics_stride, 2);
        assert!(!cfg.dealias);
        assert_eq!(cfg.substeps, DEFAULT_SUBSTEPS);

        let rendered = cfg.to_config_text();
        let again = parse_run_config(&rendered).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn config_errors_carry_line_numbers() {
        let err = parse_run_config("system = regularized\nyelp\n").unwrap_err();
        match err {
            Error::ConfigParse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other}"),
        }
        let err = parse_run_config("system = regularized\nsystem = hp\n").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 2, .. }));
        let err = parse_run_config("bogus_key = 1\n").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 1, .. }));
    }

    #[test]
    fn snapshot_times_validated() {
        let text = "\
system = hp
x_left = -60
x_right = 60
n_modes = 64
dt = 0.05
t_end = 10
ic = gaussian
gaussian_amp = 0.1
gaussian_width = 40
snapshot_times = 11
";
        assert!(parse_run_config(text).is_err());
    }

    #[test]
    fn euler_reference_resample_and_epsilon() {
        let reference = EulerReference {
            c: 1.15,
            x: vec![-1.0, 0.0, 1.0],
            eta: vec![0.0, 1.0, 0.0],
        };
        let grid = Grid::new(-2.0, 2.0, 8).unwrap();
        let resampled = reference.resample(&grid);
        // hat function sampled at x = -2,-1.5,...: zero outside [-1,1]
        assert_eq!(resampled.samples()[0], 0.0);
        assert_eq!(resampled.samples()[4], 1.0); // x = 0
        assert_eq!(resampled.samples()[3], 0.5); // x = -0.5
        let eps = reference.epsilon(&resampled, &grid);
        assert_eq!(eps, 0.0);
        let zero = RealField::zeros(8);
        assert!((reference.epsilon(&zero, &grid) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn atomic_write_creates_parents() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a/b/out.csv");
        atomic_write(&path, b"x,eta,u\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "x,eta,u\n");
    }
}
