//! Command-line front end.
//!
//! Configuration is layered: built-in defaults, then a preset (for
//! `reproduce`), then `--config FILE`, then `--set key=value` and the
//! shortcut flags. Each invocation writes into a fresh run directory under
//! `output.dir`, starting with `manifest.txt`, which can be fed back through
//! `--config` to repeat the run.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::config::RunConfig;
use crate::dynamics::{evolve, initial_state, Projection};
use crate::error::{Error, Result};
use crate::fourmode::{
    crossing_frequencies, floquet_scan, omega_grid, resonance_frequencies, Crossing,
};
use crate::grid::{double_well, Grid};
use crate::io::{fmt_f64, write_csv, write_csv_records, write_json};
use crate::scan::{
    compare_backends, frequency_scan, gamma_width_scan, nonlinear_scan, Backend, InputState,
    ScanResult,
};
use crate::spinor::spin_expectation;
use crate::stationary::{
    coefficients_for, gap_scan, minimize_gap, LevelPair, StationarySet, MODE_LABELS,
};

pub const WORKERS_ENV: &str = "SOCDW_WORKERS";

const OUTPUTS: &str = "\
Outputs (under <output.dir>/<command>-NNN/):
  manifest.txt        resolved configuration (re-run with --config manifest.txt)
  states              energies.json, modes.csv, spins.csv, potential_static.csv, potential_mod.csv
  coeffs              coeffs.json (Delta, delta1, delta2, j1, j2, v1, v2, u, w, E0, structure_residual)
  evolve              trajectory.csv: t,norm,p_left,p_left_avg,Sx,Sy,Sz,|c1m|²,|c1p|²,|c2m|²,|c2p|²,residual
  floquet             floquet.csv: omega,lambda1..lambda4,unitarity_residual
  crossings           crossings.csv: omega,branch_a,branch_b,class
  scan                points.csv (omega,p_left_avg), features.json
  gamma-scan          gaps.csv, widths.csv, collapse.json
  nonlinear-scan      points_g<g>.csv, features_g<g>.json
  compare             points_continuous.csv, points_fourmode.csv, comparison.json
CSV numbers are written with 17 significant digits.";

#[derive(Debug, Parser)]
#[command(name = "socdw", version, about = "Driven spin-orbit-coupled double well: stationary states, split-step dynamics, four-mode Floquet analysis and frequency scans", after_help = OUTPUTS)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file with `section.key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Override one key (repeatable), e.g. `--set grid.n_points=512`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    /// Base output directory (`output.dir`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads for scans (`run.workers`).
    #[arg(long, env = WORKERS_ENV, global = true)]
    pub workers: Option<usize>,
    /// Spin-orbit coupling γ (`trap.gamma`).
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    /// Modulation amplitude (`trap.f`).
    #[arg(long, global = true)]
    pub f: Option<f64>,
    /// Modulation frequency (`trap.omega`).
    #[arg(long, global = true)]
    pub omega: Option<f64>,
    /// Nonlinearity (`propagation.g`).
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub g: Option<f64>,
    /// Final time (`propagation.t_final`).
    #[arg(long, global = true)]
    pub t_final: Option<f64>,
    #[arg(long, global = true)]
    pub backend: Option<BackendArg>,
    #[arg(long, global = true)]
    pub omega_min: Option<f64>,
    #[arg(long, global = true)]
    pub omega_max: Option<f64>,
    #[arg(long, global = true)]
    pub omega_step: Option<f64>,
    /// Initial state: lower (|1−⟩), upper (|2−⟩) or qubit ((|1−⟩+|2−⟩)/√2).
    #[arg(long, global = true)]
    pub input: Option<InputArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BackendArg {
    Continuous,
    Fourmode,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum InputArg {
    Lower,
    Upper,
    Qubit,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Bound states, localized modes, spins and potentials.
    States,
    /// Four-mode coefficients.
    Coeffs,
    /// Propagate the continuous model and record a trajectory.
    Evolve,
    /// Tracked Floquet phases over the ω window (four-mode model).
    Floquet,
    /// Crossings of tracked Floquet branches, with classification.
    Crossings {
        /// Frequency resolution before bisection.
        #[arg(long, default_value_t = 5e-4)]
        resolution: f64,
    },
    /// Time-averaged left probability versus ω, with peaks, dips and widths.
    Scan,
    /// Pair gaps versus γ and the rightmost suppression width δω(γ).
    GammaScan {
        /// Comma-separated γ values for the width table.
        #[arg(long, value_delimiter = ',', default_values_t = [0.6, 0.8, 1.0, 1.2, 1.4, 1.5, 1.6, 1.8])]
        gammas: Vec<f64>,
        /// γ step of the gap table over [gap-min, gap-max].
        #[arg(long, default_value_t = 0.05)]
        gap_step: f64,
        #[arg(long, default_value_t = 0.2)]
        gap_min: f64,
        #[arg(long, default_value_t = 2.0)]
        gap_max: f64,
    },
    /// Scans repeated for several nonlinearities (continuous backend).
    NonlinearScan {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-0.02, 0.0, 0.02])]
        g_list: Vec<f64>,
    },
    /// Scan both backends on one ω grid and pair their features.
    Compare,
    /// Preset runs producing the data behind one figure.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::States => "states",
            Command::Coeffs => "coeffs",
            Command::Evolve => "evolve",
            Command::Floquet => "floquet",
            Command::Crossings { .. } => "crossings",
            Command::Scan => "scan",
            Command::GammaScan { .. } => "gamma-scan",
            Command::NonlinearScan { .. } => "nonlinear-scan",
            Command::Compare => "compare",
            Command::Reproduce { figure } => match figure {
                Figure::Fig1 => "fig1",
                Figure::Fig2 => "fig2",
                Figure::Fig3 => "fig3",
                Figure::Fig4 => "fig4",
                Figure::Fig5 => "fig5",
            },
        }
    }
}

/// Preset key values applied before the user's configuration.
pub fn preset(figure: Figure) -> &'static [(&'static str, &'static str)] {
    match figure {
        Figure::Fig1 => &[("trap.gamma", "0.8")],
        Figure::Fig2 => &[
            ("trap.f", "0.143"),
            ("scan.omega_min", "0.5"),
            ("scan.omega_max", "2.0"),
            ("scan.omega_step", "0.005"),
        ],
        Figure::Fig3 => &[
            ("trap.f", "0.143"),
            ("scan.backend", "fourmode"),
            ("scan.omega_min", "0.5"),
            ("scan.omega_max", "2.0"),
            ("scan.omega_step", "0.005"),
        ],
        Figure::Fig4 => &[
            ("trap.gamma", "0.8"),
            ("trap.f", "0.0774"),
            ("scan.omega_min", "0.6"),
            ("scan.omega_max", "0.7"),
            ("scan.omega_step", "0.0025"),
        ],
        Figure::Fig5 => &[
            ("trap.f", "0.143"),
            ("scan.omega_min", "0.9"),
            ("scan.omega_max", "1.6"),
            ("scan.omega_step", "0.005"),
        ],
    }
}

/// Builds the resolved configuration from all layers.
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Command::Reproduce { figure } = cli.command {
        for (k, v) in preset(figure) {
            cfg.set(k, v)?;
        }
    }
    let c = &cli.common;
    if let Some(path) = &c.config {
        cfg.apply_text(&fs::read_to_string(path)?)?;
    }
    for kv in &c.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        cfg.set(k, v)?;
    }
    let reals = [
        ("trap.gamma", c.gamma),
        ("trap.f", c.f),
        ("trap.omega", c.omega),
        ("propagation.g", c.g),
        ("propagation.t_final", c.t_final),
        ("scan.omega_min", c.omega_min),
        ("scan.omega_max", c.omega_max),
        ("scan.omega_step", c.omega_step),
    ];
    for (k, v) in reals {
        if let Some(v) = v {
            cfg.set(k, &format!("{v:?}"))?;
        }
    }
    if let Some(b) = c.backend {
        cfg.backend = match b {
            BackendArg::Continuous => Backend::Continuous,
            BackendArg::Fourmode => Backend::Fourmode,
        };
    }
    if let Some(i) = c.input {
        cfg.input = match i {
            InputArg::Lower => InputState::lower(),
            InputArg::Upper => InputState::upper(),
            InputArg::Qubit => InputState::qubit(),
        };
    }
    if let Some(dir) = &c.out {
        cfg.output_dir = dir.clone();
    }
    if let Some(w) = c.workers {
        cfg.workers = w;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// First unused `<base>/<name>-NNN`.
fn fresh_run_dir(base: &Path, name: &str) -> Result<PathBuf> {
    fs::create_dir_all(base)?;
    for i in 1.. {
        let dir = base.join(format!("{name}-{i:03}"));
        if fs::create_dir(&dir).is_ok() {
            return Ok(dir);
        }
        if !dir.exists() {
            // creation failed for another reason
            fs::create_dir(&dir)?;
        }
    }
    unreachable!()
}

/// Parses `argv`, runs the command, and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(dir) => {
            println!("{}", dir.display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Runs a parsed command; returns the run directory.
pub fn execute(cli: &Cli) -> Result<PathBuf> {
    let cfg = resolve(cli)?;
    if cfg.workers > 0 {
        // Only the first call configures the global pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global();
    }
    let name = cli.command.name();
    let dir = fresh_run_dir(&cfg.output_dir, name)?;
    fs::write(
        dir.join("manifest.txt"),
        format!("# command: {name}\n{}", cfg.to_manifest()),
    )?;
    log::info!("{name}: writing to {}", dir.display());
    match &cli.command {
        Command::States => states(&cfg, &dir)?,
        Command::Coeffs => coeffs(&cfg, &dir)?,
        Command::Evolve => evolve_cmd(&cfg, &dir, "trajectory.csv")?,
        Command::Floquet => floquet(&cfg, &dir, "floquet.csv")?,
        Command::Crossings { resolution } => crossings(&cfg, &dir, *resolution, "crossings.csv")?,
        Command::Scan => scan(&cfg, &dir, "")?,
        Command::GammaScan {
            gammas,
            gap_step,
            gap_min,
            gap_max,
        } => gamma_scan(&cfg, &dir, gammas, *gap_min, *gap_max, *gap_step, "")?,
        Command::NonlinearScan { g_list } => nonlinear(&cfg, &dir, g_list, "")?,
        Command::Compare => compare(&cfg, &dir)?,
        Command::Reproduce { figure } => reproduce(*figure, &cfg, &dir)?,
    }
    Ok(dir)
}

#[derive(Serialize)]
struct StateRecord {
    label: String,
    energy: f64,
    pair: u8,
    level: u8,
    signature: [i8; 3],
    symmetry_defect: [f64; 3],
    residual: f64,
    spin: [f64; 3],
}

#[derive(Serialize)]
struct ModeRecord {
    label: &'static str,
    left_mass: f64,
    spin: [f64; 3],
}

#[derive(Serialize)]
struct StatesReport {
    gamma: f64,
    e0: f64,
    states: Vec<StateRecord>,
    modes: Vec<ModeRecord>,
}

fn states(cfg: &RunConfig, dir: &Path) -> Result<()> {
    let grid = Grid::new(cfg.grid)?;
    let set = StationarySet::compute(&grid, &cfg.trap)?;
    let dx = grid.dx;
    let report = StatesReport {
        gamma: cfg.trap.gamma,
        e0: set.e0,
        states: set
            .states
            .iter()
            .map(|s| StateRecord {
                label: format!("{}{}", s.pair, s.level),
                energy: s.energy,
                pair: s.pair,
                level: s.level,
                signature: s.signature,
                symmetry_defect: s.symmetry_defect,
                residual: s.residual,
                spin: spin_expectation(&s.field, dx),
            })
            .collect(),
        modes: MODE_LABELS
            .iter()
            .enumerate()
            .map(|(i, &label)| ModeRecord {
                label,
                left_mass: set.basis.left_mass[i],
                spin: spin_expectation(&set.basis.modes[i], dx),
            })
            .collect(),
    };
    write_json(&dir.join("energies.json"), &report)?;

    let mut header = vec!["x".to_string()];
    for l in MODE_LABELS {
        for part in ["re1", "im1", "re2", "im2"] {
            header.push(format!("{l}_{part}"));
        }
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = (0..grid.len())
        .map(|j| {
            let mut row = vec![grid.x[j]];
            for m in &set.basis.modes {
                row.extend([m.psi1[j].re, m.psi1[j].im, m.psi2[j].re, m.psi2[j].im]);
            }
            row
        })
        .collect();
    write_csv(&dir.join("modes.csv"), &header_refs, &rows)?;

    let spins: Vec<Vec<String>> = report
        .modes
        .iter()
        .map(|m| {
            let mut r = vec![m.label.to_string()];
            r.extend(m.spin.iter().map(|&v| fmt_f64(v)));
            r
        })
        .collect();
    write_csv_records(&dir.join("spins.csv"), &["mode", "Sx", "Sy", "Sz"], &spins)?;
    double_well(&grid, &cfg.trap)?.write_csv(
        &grid,
        &dir.join("potential_static.csv"),
        &dir.join("potential_mod.csv"),
    )?;
    Ok(())
}

fn coeffs(cfg: &RunConfig, dir: &Path) -> Result<()> {
    let grid = Grid::new(cfg.grid)?;
    let (_, c) = coefficients_for(&grid, &cfg.trap)?;
    write_json(&dir.join("coeffs.json"), &c)
}

fn evolve_cmd(cfg: &RunConfig, dir: &Path, file: &str) -> Result<()> {
    let grid = Grid::new(cfg.grid)?;
    let (set, _) = coefficients_for(&grid, &cfg.trap)?;
    let pot = double_well(&grid, &cfg.trap)?;
    let psi0 = initial_state(&set.basis, cfg.input.amplitudes()?, grid.dx);
    let traj = evolve(
        &psi0,
        &grid,
        &cfg.trap,
        &pot,
        &cfg.propagation,
        Some(Projection {
            basis: &set.basis,
            e0: set.e0,
        }),
    )?;
    log::info!(
        "P_<({}) = {:.6}, max norm drift {:.2e}",
        cfg.propagation.t_final,
        traj.final_average(),
        traj.max_norm_drift()
    );
    traj.write_csv(&dir.join(file))
}

fn floquet(cfg: &RunConfig, dir: &Path, file: &str) -> Result<()> {
    let grid = Grid::new(cfg.grid)?;
    let (_, c) = coefficients_for(&grid, &cfg.trap)?;
    let omegas = omega_grid(cfg.omega_min, cfg.omega_max, cfg.omega_step);
    let results = floquet_scan(&c, cfg.trap.f, &omegas)?;
    let rows: Vec<Vec<f64>> = results
        .iter()
        .map(|r| {
            let mut row = vec![r.omega];
            row.extend(r.phases);
            row.push(r.unitarity_residual);
            row
        })
        .collect();
    write_csv(
        &dir.join(file),
        &["omega", "lambda1", "lambda2", "lambda3", "lambda4", "unitarity_residual"],
        &rows,
    )
}

fn crossing_rows(list: &[Crossing]) -> Vec<Vec<String>> {
    list.iter()
        .map(|c| {
            vec![
                fmt_f64(c.omega),
                (c.branch_a + 1).to_string(),
                (c.branch_b + 1).to_string(),
                c.class.label().to_string(),
            ]
        })
        .collect()
}

fn crossings(cfg: &RunConfig, dir: &Path, resolution: f64, file: &str) -> Result<()> {
    let grid = Grid::new(cfg.grid)?;
    let (_, c) = coefficients_for(&grid, &cfg.trap)?;
    let list = crossing_frequencies(&c, cfg.trap.f, cfg.omega_min, cfg.omega_max, resolution)?;
    write_csv_records(
        &dir.join(file),
        &["omega", "branch_a", "branch_b", "class"],
        &crossing_rows(&list),
    )
}

fn write_scan(result: &ScanResult, dir: &Path, suffix: &str) -> Result<()> {
    write_csv(
        &dir.join(format!("points{suffix}.csv")),
        &["omega", "p_left_avg"],
        &result.csv_rows(),
    )?;
    write_json(&dir.join(format!("features{suffix}.json")), result)
}

fn scan(cfg: &RunConfig, dir: &Path, suffix: &str) -> Result<()> {
    let result = frequency_scan(&cfg.scan_config())?;
    write_scan(&result, dir, suffix)
}

fn gamma_scan(
    cfg: &RunConfig,
    dir: &Path,
    gammas: &[f64],
    gap_min: f64,
    gap_max: f64,
    gap_step: f64,
    suffix: &str,
) -> Result<()> {
    let grid = Grid::new(cfg.grid)?;
    let table_gammas = omega_grid(gap_min, gap_max, gap_step);
    let table = gap_scan(&table_gammas, &grid, &cfg.trap)?;
    let rows: Vec<Vec<f64>> = table
        .iter()
        .map(|r| vec![r.gamma, r.lower_gap, r.upper_gap])
        .collect();
    write_csv(
        &dir.join(format!("gaps{suffix}.csv")),
        &["gamma", "lower_gap", "upper_gap"],
        &rows,
    )?;
    #[derive(Serialize)]
    struct Collapse {
        lower_gamma: f64,
        upper_gamma: f64,
    }
    let collapse = Collapse {
        lower_gamma: minimize_gap(&table, LevelPair::Lower, &grid, &cfg.trap, 1e-4)?,
        upper_gamma: minimize_gap(&table, LevelPair::Upper, &grid, &cfg.trap, 1e-4)?,
    };
    write_json(&dir.join(format!("collapse{suffix}.json")), &collapse)?;

    let widths = gamma_width_scan(&cfg.scan_config(), gammas);
    let rows: Vec<Vec<String>> = widths
        .iter()
        .map(|w| {
            let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
            vec![
                fmt_f64(w.gamma),
                opt(w.width),
                opt(w.center),
                w.truncated.to_string(),
                fmt_f64(cfg.propagation.t_final),
                w.error.clone().unwrap_or_default(),
            ]
        })
        .collect();
    write_csv_records(
        &dir.join(format!("widths{suffix}.csv")),
        &["gamma", "width", "center", "truncated", "t_final", "error"],
        &rows,
    )
}

fn nonlinear(cfg: &RunConfig, dir: &Path, g_list: &[f64], prefix: &str) -> Result<()> {
    let mut sc = cfg.scan_config();
    sc.backend = Backend::Continuous;
    for (g, result) in nonlinear_scan(&sc, g_list)? {
        write_scan(&result, dir, &format!("{prefix}_g{g}"))?;
    }
    Ok(())
}

fn compare(cfg: &RunConfig, dir: &Path) -> Result<()> {
    let (cont, fm, cmp) = compare_backends(&cfg.scan_config())?;
    write_scan(&cont, dir, "_continuous")?;
    write_scan(&fm, dir, "_fourmode")?;
    write_json(&dir.join("comparison.json"), &cmp)
}

fn reproduce(figure: Figure, cfg: &RunConfig, dir: &Path) -> Result<()> {
    let at = |gamma: f64| {
        let mut c = cfg.clone();
        c.trap.gamma = gamma;
        c
    };
    match figure {
        Figure::Fig1 => states(cfg, dir),
        Figure::Fig2 => {
            for gamma in [0.8, 1.5] {
                let c = at(gamma);
                let tag = format!("_gamma{gamma}");
                floquet(&c, dir, &format!("floquet{tag}.csv"))?;
                crossings(&c, dir, 5e-4, &format!("crossings{tag}.csv"))?;
                scan(&c, dir, &tag)?;
            }
            Ok(())
        }
        Figure::Fig3 => gamma_scan(
            cfg,
            dir,
            &omega_grid(0.6, 2.0, 0.1),
            0.2,
            2.0,
            0.05,
            "",
        ),
        Figure::Fig4 => {
            scan(cfg, dir, "")?;
            let grid = Grid::new(cfg.grid)?;
            let (_, c) = coefficients_for(&grid, &cfg.trap)?;
            let res = resonance_frequencies(&c, 3);
            write_json(&dir.join("resonances.json"), &res)?;
            for omega in [0.652, 0.640] {
                let mut run = cfg.clone();
                run.trap.omega = omega;
                evolve_cmd(&run, dir, &format!("trajectory_omega{omega}.csv"))?;
            }
            Ok(())
        }
        Figure::Fig5 => {
            nonlinear(&at(0.8), dir, &[-0.02, 0.02], "_gamma0.8")?;
            nonlinear(&at(1.5), dir, &[0.2], "_gamma1.5")
        }
    }
}
