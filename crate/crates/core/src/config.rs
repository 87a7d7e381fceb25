//! Plain-text run configuration: `section.key = value` lines, `#` comments.

use crate::diagnostics::DiagnosticsOptions;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::PulseParams;
use crate::solver::{Scheme, SolverConfig};
use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub grid: Grid,
    pub pulse: PulseParams,
    pub solver: SolverConfig,
    pub diagnostics: DiagnosticsOptions,
    /// Lagrangian seed positions.
    pub seeds: Vec<[f64; 3]>,
    /// Release time of the seeds.
    pub tau: f64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    /// The 64^3 benchmark pulse.
    fn default() -> Self {
        RunConfig {
            grid: Grid::new(64, 1.0).unwrap(),
            pulse: PulseParams::default(),
            solver: SolverConfig {
                dt_init: 2.5e-4,
                t_end: 0.5,
                scheme: Scheme::Imex,
                diagnostics_every: 100,
                snapshot_every: 1,
                ..Default::default()
            },
            diagnostics: DiagnosticsOptions::default(),
            seeds: ring_seeds(1.0, 0.125, 16),
            tau: 0.0,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// `count` seeds spread over a sphere of radius `radius` around the box center
/// (golden-angle spiral).
pub fn ring_seeds(length: f64, radius: f64, count: usize) -> Vec<[f64; 3]> {
    let c = 0.5 * length;
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let th = golden * i as f64;
            [c + radius * r * th.cos(), c + radius * r * th.sin(), c + radius * z]
        })
        .collect()
}

const KEYS: [&str; 27] = [
    "grid.n",
    "grid.L",
    "pulse.delta",
    "pulse.alpha",
    "pulse.gamma",
    "pulse.mu",
    "pulse.lambda",
    "pulse.epsilon",
    "pulse.phi_amp",
    "pulse.v_amp",
    "solver.dt_init",
    "solver.cfl_safety",
    "solver.t_end",
    "solver.dealias",
    "solver.scheme",
    "solver.checkpoint_every",
    "solver.diagnostics_every",
    "solver.snapshot_every",
    "solver.positivity_floor",
    "diagnostics.c1",
    "diagnostics.q",
    "diagnostics.r",
    "diagnostics.besov",
    "lagrangian.seeds",
    "lagrangian.tau",
    "output.dir",
    "pulse.profile",
];

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

fn real(v: &str, line: usize) -> Result<f64> {
    v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| err(line, format!("'{v}' is not a finite number")))
}

fn count(v: &str, line: usize) -> Result<usize> {
    v.parse::<usize>().map_err(|_| err(line, format!("'{v}' is not a nonnegative integer")))
}

fn flag(v: &str, line: usize) -> Result<bool> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(err(line, format!("'{v}' is not true or false"))),
    }
}

fn seeds(v: &str, line: usize) -> Result<Vec<[f64; 3]>> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(';')
        .map(|p| {
            let xs: Vec<&str> = p.split(',').map(str::trim).collect();
            if xs.len() != 3 {
                return Err(err(line, format!("seed '{}' needs three coordinates", p.trim())));
            }
            Ok([real(xs[0], line)?, real(xs[1], line)?, real(xs[2], line)?])
        })
        .collect()
}

impl RunConfig {
    /// Parses a configuration; keys not given keep their defaults.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut c = RunConfig::default();
        let (mut n, mut l) = ((c.grid.n(), 0usize), (c.grid.length(), 0usize));
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| err(line, "expected 'key = value'"))?;
            let (key, v) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(err(line, format!("unknown key '{key}'")));
            }
            if !seen.insert(key.to_string()) {
                return Err(err(line, format!("duplicate key '{key}'")));
            }
            let p = &mut c.pulse;
            let s = &mut c.solver;
            let d = &mut c.diagnostics;
            match key {
                "grid.n" => n = (count(v, line)?, line),
                "grid.L" => l = (real(v, line)?, line),
                "pulse.delta" => p.delta = real(v, line)?,
                "pulse.alpha" => p.alpha = real(v, line)?,
                "pulse.gamma" => p.gamma = real(v, line)?,
                "pulse.mu" => p.mu = real(v, line)?,
                "pulse.lambda" => p.lambda = real(v, line)?,
                "pulse.epsilon" => p.epsilon = real(v, line)?,
                "pulse.phi_amp" => p.phi_amp = real(v, line)?,
                "pulse.v_amp" => p.v_amp = real(v, line)?,
                "pulse.profile" => {
                    if v != "gaussian" {
                        return Err(err(line, format!("unsupported profile '{v}' (only gaussian)")));
                    }
                }
                "solver.dt_init" => s.dt_init = real(v, line)?,
                "solver.cfl_safety" => s.cfl_safety = real(v, line)?,
                "solver.t_end" => s.t_end = real(v, line)?,
                "solver.dealias" => s.dealias = flag(v, line)?,
                "solver.scheme" => {
                    s.scheme = match v {
                        "explicit_rk4" => Scheme::ExplicitRk4,
                        "imex" => Scheme::Imex,
                        _ => return Err(err(line, format!("unknown scheme '{v}'"))),
                    }
                }
                "solver.checkpoint_every" => s.checkpoint_every = count(v, line)?,
                "solver.diagnostics_every" => s.diagnostics_every = count(v, line)?,
                "solver.snapshot_every" => s.snapshot_every = count(v, line)?,
                "solver.positivity_floor" => s.positivity_floor = real(v, line)?,
                "diagnostics.c1" => d.c1 = real(v, line)?,
                "diagnostics.q" => d.q = real(v, line)?,
                "diagnostics.r" => d.r = real(v, line)?,
                "diagnostics.besov" => d.besov = flag(v, line)?,
                "lagrangian.seeds" => c.seeds = seeds(v, line)?,
                "lagrangian.tau" => c.tau = real(v, line)?,
                "output.dir" => c.output_dir = PathBuf::from(v),
                _ => unreachable!(),
            }
            // validate in place so errors point at the offending line
            let check = match key.split('.').next() {
                Some("pulse") => c.pulse.validate(),
                Some("solver") => c.solver.validate(),
                Some("diagnostics") => validate_diag(&c.diagnostics),
                _ => Ok(()),
            };
            check.map_err(|e| err(line, e.to_string()))?;
        }
        let at = n.1.max(l.1);
        c.grid = Grid::new(n.0, l.0).map_err(|e| err(at, e.to_string()))?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        RunConfig::parse(&text)
    }

    /// Text form that parses back to the same configuration.
    pub fn to_text(&self) -> String {
        let p = &self.pulse;
        let s = &self.solver;
        let d = &self.diagnostics;
        let mut o = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(o, "{k} = {v}");
        };
        kv("grid.n", self.grid.n().to_string());
        kv("grid.L", format!("{:?}", self.grid.length()));
        for (k, v) in [
            ("pulse.delta", p.delta),
            ("pulse.alpha", p.alpha),
            ("pulse.gamma", p.gamma),
            ("pulse.mu", p.mu),
            ("pulse.lambda", p.lambda),
            ("pulse.epsilon", p.epsilon),
            ("pulse.phi_amp", p.phi_amp),
            ("pulse.v_amp", p.v_amp),
            ("solver.dt_init", s.dt_init),
            ("solver.cfl_safety", s.cfl_safety),
            ("solver.t_end", s.t_end),
        ] {
            kv(k, format!("{v:?}"));
        }
        kv("solver.dealias", s.dealias.to_string());
        kv("solver.scheme", match s.scheme {
            Scheme::ExplicitRk4 => "explicit_rk4".into(),
            Scheme::Imex => "imex".into(),
        });
        kv("solver.checkpoint_every", s.checkpoint_every.to_string());
        kv("solver.diagnostics_every", s.diagnostics_every.to_string());
        kv("solver.snapshot_every", s.snapshot_every.to_string());
        kv("solver.positivity_floor", format!("{:?}", s.positivity_floor));
        kv("diagnostics.c1", format!("{:?}", d.c1));
        kv("diagnostics.q", format!("{:?}", d.q));
        kv("diagnostics.r", format!("{:?}", d.r));
        kv("diagnostics.besov", d.besov.to_string());
        kv(
            "lagrangian.seeds",
            self.seeds.iter().map(|x| format!("{:?},{:?},{:?}", x[0], x[1], x[2])).collect::<Vec<_>>().join("; "),
        );
        kv("lagrangian.tau", format!("{:?}", self.tau));
        kv("output.dir", self.output_dir.display().to_string());
        o
    }
}

fn validate_diag(d: &DiagnosticsOptions) -> Result<()> {
    if !(d.c1 > 0.0) {
        return Err(Error::InvalidArgument("c1 must be positive".into()));
    }
    if !(d.q >= 1.0) {
        return Err(Error::InvalidArgument("q must be at least 1".into()));
    }
    if !(d.r > 0.0) {
        return Err(Error::InvalidArgument("r must be positive".into()));
    }
    Ok(())
}
