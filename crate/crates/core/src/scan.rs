//! Frequency, γ and g sweeps over either backend, with peak/dip/width
//! extraction at a fixed `P₍<₎` level.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, initial_state, PropagationConfig};
use crate::error::{Error, Result};
use crate::fourmode::{assemble, integrate_modes, omega_grid, p_left_fourmode};
use crate::grid::{double_well, Grid, GridSpec, PotentialPair, TrapParams};
use crate::stationary::{coefficients_for, FourModeCoefficients, StationarySet};

/// The paper-convention level at which suppression features are measured.
pub const DEFAULT_LEVEL: f64 = 0.7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Continuous,
    Fourmode,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Continuous => "continuous",
            Backend::Fourmode => "fourmode",
        })
    }
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(Backend::Continuous),
            "fourmode" => Ok(Backend::Fourmode),
            other => Err(Error::Config(format!(
                "backend must be continuous or fourmode (got {other})"
            ))),
        }
    }
}

/// Initial state `c₁|1−⟩ + c₂|2−⟩` (normalized before use).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputState {
    pub c1: f64,
    pub c2: f64,
}

impl Default for InputState {
    fn default() -> Self {
        Self { c1: 1.0, c2: 0.0 }
    }
}

impl InputState {
    pub fn lower() -> Self {
        Self::default()
    }

    pub fn upper() -> Self {
        Self { c1: 0.0, c2: 1.0 }
    }

    /// `(|1−⟩ + |2−⟩)/√2`.
    pub fn qubit() -> Self {
        Self { c1: 1.0, c2: 1.0 }
    }

    /// Normalized amplitudes in the order `(1−, 1+, 2−, 2+)`.
    pub fn amplitudes(&self) -> Result<[Complex64; 4]> {
        let n = (self.c1 * self.c1 + self.c2 * self.c2).sqrt();
        if !(n > 0.0) {
            return Err(Error::Config("scan.input_c1 and scan.input_c2 must not both be zero".into()));
        }
        let z = Complex64::new(0.0, 0.0);
        Ok([
            Complex64::new(self.c1 / n, 0.0),
            z,
            Complex64::new(self.c2 / n, 0.0),
            z,
        ])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    pub backend: Backend,
    pub omega_min: f64,
    pub omega_max: f64,
    pub omega_step: f64,
    pub input: InputState,
    pub trap: TrapParams,
    pub grid: GridSpec,
    pub propagation: PropagationConfig,
    /// Level defining peaks and widths.
    pub level: f64,
    /// Bisection tolerance for feature edges; `0` disables refinement.
    pub edge_tol: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            backend: Backend::Continuous,
            omega_min: 0.5,
            omega_max: 2.0,
            omega_step: 0.005,
            input: InputState::default(),
            trap: TrapParams {
                f: 0.143,
                ..TrapParams::default()
            },
            grid: GridSpec::default(),
            propagation: PropagationConfig::default(),
            level: DEFAULT_LEVEL,
            edge_tol: 0.0,
        }
    }
}

impl ScanConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_min > 0.0) || !(self.omega_max > self.omega_min) {
            return Err(Error::Config(format!(
                "scan.omega_min and scan.omega_max must satisfy 0 < omega_min < omega_max (got {}, {})",
                self.omega_min, self.omega_max
            )));
        }
        if !(self.omega_step > 0.0) {
            return Err(Error::Config("scan.omega_step must be > 0".into()));
        }
        if self.omega_step > 0.005 {
            log::warn!(
                "scan.omega_step = {} exceeds 0.005; narrow features may be unresolved",
                self.omega_step
            );
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config("scan.level must lie in (0, 1)".into()));
        }
        self.grid.validate()?;
        self.trap.validate()?;
        self.input.amplitudes()?;
        Ok(())
    }

    pub fn omegas(&self) -> Vec<f64> {
        omega_grid(self.omega_min, self.omega_max, self.omega_step)
    }
}

/// Everything needed to evaluate `P₍<₎(t_final)` at any ω for one trap.
pub struct ScanContext {
    pub cfg: ScanConfig,
    pub grid: Grid,
    pub set: StationarySet,
    pub coeffs: FourModeCoefficients,
    potentials: PotentialPair,
}

impl ScanContext {
    pub fn new(cfg: &ScanConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = Grid::new(cfg.grid)?;
        let (set, coeffs) = coefficients_for(&grid, &cfg.trap)?;
        let potentials = double_well(&grid, &cfg.trap)?;
        Ok(Self {
            cfg: *cfg,
            grid,
            set,
            coeffs,
            potentials,
        })
    }

    /// `P₍<₎(t_final)` at drive frequency `omega`.
    pub fn p_left(&self, omega: f64) -> Result<f64> {
        let amps = self.cfg.input.amplitudes()?;
        let t_final = self.cfg.propagation.t_final;
        match self.cfg.backend {
            Backend::Continuous => {
                let trap = self.cfg.trap.with_drive(self.cfg.trap.f, omega);
                let psi0 = initial_state(&self.set.basis, amps, self.grid.dx);
                let traj = evolve(
                    &psi0,
                    &self.grid,
                    &trap,
                    &self.potentials,
                    &self.cfg.propagation,
                    None,
                )?;
                Ok(traj.final_average())
            }
            Backend::Fourmode => {
                let sys = assemble(&self.coeffs, self.cfg.trap.f, omega);
                let sample = self.cfg.propagation.sample_interval();
                let traj = integrate_modes(amps, &sys, t_final, sample)?;
                Ok(*p_left_fourmode(&traj).last().expect("non-empty trajectory"))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub omega: f64,
    pub p_left_avg: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Peak,
    Dip,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Feature {
    #[serde(rename = "type")]
    pub kind: FeatureKind,
    /// Extremum location (parabolic refinement of the sampled extremum).
    pub center: f64,
    /// Sampled extremal value.
    pub value: f64,
    pub level: f64,
    /// Full width of the above-level region (peaks only).
    pub width: Option<f64>,
    pub left_edge: f64,
    pub right_edge: f64,
    /// The region runs into the scan boundary, so its width is a lower bound.
    pub truncated: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScanResult {
    pub backend: Backend,
    pub t_final: f64,
    pub points: Vec<ScanPoint>,
    pub features: Vec<Feature>,
    /// Frequencies whose evaluation failed, with the error message.
    pub failures: Vec<(f64, String)>,
}

impl ScanResult {
    pub fn peaks(&self) -> impl Iterator<Item = &Feature> {
        self.features.iter().filter(|f| f.kind == FeatureKind::Peak)
    }

    pub fn dips(&self) -> impl Iterator<Item = &Feature> {
        self.features.iter().filter(|f| f.kind == FeatureKind::Dip)
    }

    /// The highest-valued peak.
    pub fn main_peak(&self) -> Option<&Feature> {
        self.peaks().max_by(|a, b| a.value.total_cmp(&b.value))
    }

    /// Rightmost peak whose region closes inside the scan window, falling
    /// back to a truncated one.
    pub fn rightmost_peak(&self) -> Option<&Feature> {
        rightmost(&self.features)
    }

    pub fn csv_rows(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| vec![p.omega, p.p_left_avg]).collect()
    }
}

/// Vertex of the parabola through three equally spaced samples, clamped to
/// the outer two.
fn parabolic_vertex(x: [f64; 3], y: [f64; 3]) -> f64 {
    let denom = y[0] - 2.0 * y[1] + y[2];
    if denom == 0.0 {
        return x[1];
    }
    let h = x[1] - x[0];
    (x[1] + 0.5 * h * (y[0] - y[2]) / denom).clamp(x[0], x[2])
}

fn refined_extremum(points: &[ScanPoint], i: usize) -> f64 {
    if i == 0 || i + 1 >= points.len() {
        return points[i].omega;
    }
    parabolic_vertex(
        [points[i - 1].omega, points[i].omega, points[i + 1].omega],
        [points[i - 1].p_left_avg, points[i].p_left_avg, points[i + 1].p_left_avg],
    )
}

fn crossing(a: &ScanPoint, b: &ScanPoint, level: f64) -> f64 {
    let dp = b.p_left_avg - a.p_left_avg;
    if dp == 0.0 {
        return 0.5 * (a.omega + b.omega);
    }
    a.omega + (level - a.p_left_avg) / dp * (b.omega - a.omega)
}

/// Peaks (maximal regions with `P ≥ level`) and dips (the minimum between two
/// adjacent peaks, when it falls below `level`). Points must be sorted by ω.
pub fn detect_features(points: &[ScanPoint], level: f64) -> Vec<Feature> {
    let n = points.len();
    let mut regions = Vec::new();
    let mut i = 0;
    while i < n {
        if points[i].p_left_avg >= level {
            let start = i;
            while i + 1 < n && points[i + 1].p_left_avg >= level {
                i += 1;
            }
            regions.push((start, i));
        }
        i += 1;
    }

    let mut features = Vec::new();
    for &(s, e) in &regions {
        let imax = (s..=e)
            .max_by(|&a, &b| points[a].p_left_avg.total_cmp(&points[b].p_left_avg))
            .expect("non-empty region");
        let left = if s > 0 { crossing(&points[s - 1], &points[s], level) } else { points[s].omega };
        let right = if e + 1 < n { crossing(&points[e], &points[e + 1], level) } else { points[e].omega };
        features.push(Feature {
            kind: FeatureKind::Peak,
            center: refined_extremum(points, imax),
            value: points[imax].p_left_avg,
            level,
            width: Some(right - left),
            left_edge: left,
            right_edge: right,
            truncated: s == 0 || e + 1 == n,
        });
    }
    for pair in regions.windows(2) {
        let (a_end, b_start) = (pair[0].1, pair[1].0);
        let imin = (a_end + 1..b_start)
            .min_by(|&a, &b| points[a].p_left_avg.total_cmp(&points[b].p_left_avg))
            .expect("gap between regions");
        features.push(Feature {
            kind: FeatureKind::Dip,
            center: refined_extremum(points, imin),
            value: points[imin].p_left_avg,
            level,
            width: None,
            left_edge: crossing(&points[a_end], &points[a_end + 1], level),
            right_edge: crossing(&points[b_start - 1], &points[b_start], level),
            truncated: false,
        });
    }
    features.sort_by(|a, b| a.center.total_cmp(&b.center));
    features
}

fn rightmost(features: &[Feature]) -> Option<&Feature> {
    let peaks = || features.iter().filter(|f| f.kind == FeatureKind::Peak);
    peaks()
        .filter(|f| !f.truncated)
        .max_by(|a, b| a.center.total_cmp(&b.center))
        .or_else(|| peaks().max_by(|a, b| a.center.total_cmp(&b.center)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Rightmost,
    Main,
}

/// Full width of the selected above-level region.
pub fn width_at_level(points: &[ScanPoint], level: f64, which: Which) -> Result<f64> {
    let feats = detect_features(points, level);
    let pick = match which {
        Which::Rightmost => rightmost(&feats),
        Which::Main => feats
            .iter()
            .filter(|f| f.kind == FeatureKind::Peak)
            .max_by(|a, b| a.value.total_cmp(&b.value)),
    };
    pick.and_then(|f| f.width).ok_or(Error::NoFeature { level })
}

/// Moves an edge found by interpolation onto the level by bisection between
/// the bracketing samples.
fn bisect_edge(ctx: &ScanContext, mut lo: f64, mut hi: f64, above_at_lo: bool, tol: f64) -> Result<f64> {
    let level = ctx.cfg.level;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if (ctx.p_left(mid)? >= level) == above_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn refine_peak_edges(ctx: &ScanContext, feature: &mut Feature) -> Result<()> {
    let step = ctx.cfg.omega_step;
    let tol = ctx.cfg.edge_tol;
    let (lo_b, hi_b) = (ctx.cfg.omega_min, ctx.cfg.omega_max);
    if feature.left_edge > lo_b {
        let a = (feature.left_edge - step).max(lo_b);
        let b = (feature.left_edge + step).min(hi_b);
        feature.left_edge = bisect_edge(ctx, a, b, false, tol)?;
    }
    if feature.right_edge < hi_b {
        let a = (feature.right_edge - step).max(lo_b);
        let b = (feature.right_edge + step).min(hi_b);
        feature.right_edge = bisect_edge(ctx, a, b, true, tol)?;
    }
    feature.width = Some(feature.right_edge - feature.left_edge);
    Ok(())
}

/// Scan with an existing context (stationary set reused).
pub fn frequency_scan_with(ctx: &ScanContext) -> ScanResult {
    let omegas = ctx.cfg.omegas();
    let evaluated: Vec<(f64, Result<f64>)> = omegas.par_iter().map(|&w| (w, ctx.p_left(w))).collect();
    let mut points = Vec::with_capacity(evaluated.len());
    let mut failures = Vec::new();
    for (omega, r) in evaluated {
        match r {
            Ok(p) => points.push(ScanPoint { omega, p_left_avg: p }),
            Err(e) => {
                log::warn!("scan point ω = {omega} failed: {e}");
                failures.push((omega, e.to_string()));
            }
        }
    }
    let mut features = detect_features(&points, ctx.cfg.level);
    if ctx.cfg.edge_tol > 0.0 {
        for f in features.iter_mut().filter(|f| f.kind == FeatureKind::Peak) {
            if let Err(e) = refine_peak_edges(ctx, f) {
                log::warn!("edge refinement failed near ω = {}: {e}", f.center);
            }
        }
    }
    ScanResult {
        backend: ctx.cfg.backend,
        t_final: ctx.cfg.propagation.t_final,
        points,
        features,
        failures,
    }
}

pub fn frequency_scan(cfg: &ScanConfig) -> Result<ScanResult> {
    Ok(frequency_scan_with(&ScanContext::new(cfg)?))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GammaWidthRow {
    pub gamma: f64,
    /// Width of the rightmost above-level region, if any.
    pub width: Option<f64>,
    pub center: Option<f64>,
    pub truncated: bool,
    pub error: Option<String>,
}

/// Rightmost-peak width `δω(γ)`, recomputing the stationary set for each γ.
pub fn gamma_width_scan(cfg: &ScanConfig, gammas: &[f64]) -> Vec<GammaWidthRow> {
    gammas
        .iter()
        .map(|&gamma| {
            let mut c = *cfg;
            c.trap.gamma = gamma;
            match frequency_scan(&c) {
                Ok(scan) => {
                    let peak = scan.rightmost_peak();
                    GammaWidthRow {
                        gamma,
                        width: peak.and_then(|p| p.width),
                        center: peak.map(|p| p.center),
                        truncated: peak.is_some_and(|p| p.truncated),
                        error: None,
                    }
                }
                Err(e) => GammaWidthRow {
                    gamma,
                    width: None,
                    center: None,
                    truncated: false,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect()
}

/// Continuous-backend scans for each `g`, with the `g = 0` baseline included.
pub fn nonlinear_scan(cfg: &ScanConfig, g_list: &[f64]) -> Result<Vec<(f64, ScanResult)>> {
    if cfg.backend != Backend::Continuous {
        return Err(Error::Config("nonlinear scans require the continuous backend".into()));
    }
    let mut gs: Vec<f64> = g_list.to_vec();
    if !gs.contains(&0.0) {
        gs.insert(0, 0.0);
    }
    let ctx = ScanContext::new(cfg)?;
    let mut out = Vec::with_capacity(gs.len());
    for g in gs {
        let mut c = ctx.cfg;
        c.propagation.g = g;
        let sub = ScanContext {
            cfg: c,
            grid: ctx.grid.clone(),
            set: ctx.set.clone(),
            coeffs: ctx.coeffs,
            potentials: ctx.potentials.clone(),
        };
        out.push((g, frequency_scan_with(&sub)));
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatchedFeature {
    #[serde(rename = "type")]
    pub kind: FeatureKind,
    pub continuous: f64,
    pub fourmode: f64,
    /// `(continuous − fourmode)/fourmode`.
    pub mismatch: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BackendComparison {
    pub matched: Vec<MatchedFeature>,
    pub unmatched_continuous: Vec<Feature>,
    pub unmatched_fourmode: Vec<Feature>,
}

/// Pairs same-kind features by nearest center (within `max_distance`).
pub fn match_features(continuous: &[Feature], fourmode: &[Feature], max_distance: f64) -> BackendComparison {
    let mut used = vec![false; fourmode.len()];
    let mut matched = Vec::new();
    let mut unmatched_continuous = Vec::new();
    for fc in continuous {
        let best = fourmode
            .iter()
            .enumerate()
            .filter(|(i, f)| !used[*i] && f.kind == fc.kind)
            .map(|(i, f)| (i, (f.center - fc.center).abs()))
            .filter(|(_, d)| *d <= max_distance)
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((i, _)) => {
                used[i] = true;
                matched.push(MatchedFeature {
                    kind: fc.kind,
                    continuous: fc.center,
                    fourmode: fourmode[i].center,
                    mismatch: (fc.center - fourmode[i].center) / fourmode[i].center,
                });
            }
            None => unmatched_continuous.push(*fc),
        }
    }
    let unmatched_fourmode = fourmode
        .iter()
        .zip(&used)
        .filter(|(_, u)| !**u)
        .map(|(f, _)| *f)
        .collect();
    BackendComparison {
        matched,
        unmatched_continuous,
        unmatched_fourmode,
    }
}

/// Scans both backends on the same ω grid and pairs their features.
pub fn compare_backends(cfg: &ScanConfig) -> Result<(ScanResult, ScanResult, BackendComparison)> {
    let mut c = *cfg;
    c.backend = Backend::Continuous;
    let ctx = ScanContext::new(&c)?;
    let cont = frequency_scan_with(&ctx);
    let fm_ctx = ScanContext {
        cfg: ScanConfig {
            backend: Backend::Fourmode,
            ..c
        },
        grid: ctx.grid.clone(),
        set: ctx.set.clone(),
        coeffs: ctx.coeffs,
        potentials: ctx.potentials.clone(),
    };
    let fm = frequency_scan_with(&fm_ctx);
    let max_distance = 0.1 * 0.5 * (cfg.omega_min + cfg.omega_max);
    let cmp = match_features(&cont.features, &fm.features, max_distance);
    Ok((cont, fm, cmp))
}
