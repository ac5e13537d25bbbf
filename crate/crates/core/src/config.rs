//! Flat `section.key = value` run configuration and its manifest form.
//!
//! Every key has a default; a config file only lists overrides. The manifest
//! written with each run lists every key with round-trip precision, so
//! feeding it back reproduces the run exactly.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::dynamics::PropagationConfig;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, TrapParams};
use crate::scan::{Backend, InputState, ScanConfig, DEFAULT_LEVEL};

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub trap: TrapParams,
    pub grid: GridSpec,
    pub propagation: PropagationConfig,
    pub backend: Backend,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_step: f64,
    pub level: f64,
    pub edge_tol: f64,
    pub input: InputState,
    pub output_dir: PathBuf,
    /// Worker threads for scans; 0 lets the pool decide.
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let scan = ScanConfig::default();
        Self {
            trap: scan.trap,
            grid: scan.grid,
            propagation: PropagationConfig::default(),
            backend: scan.backend,
            omega_min: scan.omega_min,
            omega_max: scan.omega_max,
            omega_step: scan.omega_step,
            level: DEFAULT_LEVEL,
            edge_tol: scan.edge_tol,
            input: InputState::default(),
            output_dir: PathBuf::from("runs"),
            workers: 0,
        }
    }
}

pub const KEYS: [&str; 25] = [
    "trap.depth",
    "trap.width",
    "trap.separation",
    "trap.omega_rabi",
    "trap.gamma",
    "trap.f",
    "trap.omega",
    "trap.mass",
    "grid.x_min",
    "grid.x_max",
    "grid.n_points",
    "propagation.dt",
    "propagation.t_final",
    "propagation.sample_every",
    "propagation.g",
    "scan.backend",
    "scan.omega_min",
    "scan.omega_max",
    "scan.omega_step",
    "scan.level",
    "scan.edge_tol",
    "scan.input_c1",
    "scan.input_c2",
    "output.dir",
    "run.workers",
];

fn real(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{key} expects a number, got {value:?}")))
}

fn count(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| Error::Config(format!("{key} expects a non-negative integer, got {value:?}")))
}

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "trap.depth" => self.trap.depth = real(key, v)?,
            "trap.width" => self.trap.width = real(key, v)?,
            "trap.separation" => self.trap.separation = real(key, v)?,
            "trap.omega_rabi" => self.trap.omega_rabi = real(key, v)?,
            "trap.gamma" => self.trap.gamma = real(key, v)?,
            "trap.f" => self.trap.f = real(key, v)?,
            "trap.omega" => self.trap.omega = real(key, v)?,
            "trap.mass" => self.trap.mass = real(key, v)?,
            "grid.x_min" => self.grid.x_min = real(key, v)?,
            "grid.x_max" => self.grid.x_max = real(key, v)?,
            "grid.n_points" => self.grid.n_points = count(key, v)?,
            "propagation.dt" => self.propagation.dt = real(key, v)?,
            "propagation.t_final" => self.propagation.t_final = real(key, v)?,
            "propagation.sample_every" => self.propagation.sample_every = count(key, v)?,
            "propagation.g" => self.propagation.g = real(key, v)?,
            "scan.backend" => self.backend = v.parse()?,
            "scan.omega_min" => self.omega_min = real(key, v)?,
            "scan.omega_max" => self.omega_max = real(key, v)?,
            "scan.omega_step" => self.omega_step = real(key, v)?,
            "scan.level" => self.level = real(key, v)?,
            "scan.edge_tol" => self.edge_tol = real(key, v)?,
            "scan.input_c1" => self.input.c1 = real(key, v)?,
            "scan.input_c2" => self.input.c2 = real(key, v)?,
            "output.dir" => self.output_dir = PathBuf::from(v),
            "run.workers" => self.workers = count(key, v)?,
            other => return Err(Error::Config(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    /// Value of `key` in manifest form.
    pub fn get(&self, key: &str) -> Option<String> {
        let r = |x: f64| format!("{x:?}");
        Some(match key {
            "trap.depth" => r(self.trap.depth),
            "trap.width" => r(self.trap.width),
            "trap.separation" => r(self.trap.separation),
            "trap.omega_rabi" => r(self.trap.omega_rabi),
            "trap.gamma" => r(self.trap.gamma),
            "trap.f" => r(self.trap.f),
            "trap.omega" => r(self.trap.omega),
            "trap.mass" => r(self.trap.mass),
            "grid.x_min" => r(self.grid.x_min),
            "grid.x_max" => r(self.grid.x_max),
            "grid.n_points" => self.grid.n_points.to_string(),
            "propagation.dt" => r(self.propagation.dt),
            "propagation.t_final" => r(self.propagation.t_final),
            "propagation.sample_every" => self.propagation.sample_every.to_string(),
            "propagation.g" => r(self.propagation.g),
            "scan.backend" => self.backend.to_string(),
            "scan.omega_min" => r(self.omega_min),
            "scan.omega_max" => r(self.omega_max),
            "scan.omega_step" => r(self.omega_step),
            "scan.level" => r(self.level),
            "scan.edge_tol" => r(self.edge_tol),
            "scan.input_c1" => r(self.input.c1),
            "scan.input_c2" => r(self.input.c2),
            "output.dir" => self.output_dir.display().to_string(),
            "run.workers" => self.workers.to_string(),
            _ => return None,
        })
    }

    /// Parses `key = value` lines over the defaults; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: format!("expected key = value, got {line:?}"),
            })?;
            self.set(key, value).map_err(|e| Error::Parse {
                line: i + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Every key, one per line, with round-trip precision.
    pub fn to_manifest(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{key} = {}", self.get(key).expect("known key"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        self.trap.validate()?;
        self.grid.validate()?;
        if !(self.propagation.dt > 0.0) {
            return Err(Error::Config(format!(
                "propagation.dt must be > 0 (got {})",
                self.propagation.dt
            )));
        }
        if !(self.propagation.t_final > 0.0) {
            return Err(Error::Config(format!(
                "propagation.t_final must be > 0 (got {})",
                self.propagation.t_final
            )));
        }
        if self.propagation.sample_every == 0 {
            return Err(Error::Config("propagation.sample_every must be positive".into()));
        }
        self.scan_config().validate()
    }

    pub fn scan_config(&self) -> ScanConfig {
        ScanConfig {
            backend: self.backend,
            omega_min: self.omega_min,
            omega_max: self.omega_max,
            omega_step: self.omega_step,
            input: self.input,
            trap: self.trap,
            grid: self.grid,
            propagation: self.propagation,
            level: self.level,
            edge_tol: self.edge_tol,
        }
    }
}
