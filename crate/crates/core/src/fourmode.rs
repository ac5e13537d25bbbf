//! Four-mode reduced model `i dc/dt = (H₀ + H_δ)c + f sin(ωt) V c` in the
//! localized basis `(c₁₋, c₁₊, c₂₋, c₂₊)`, its Floquet analysis, and the
//! resonance formulas.

use std::f64::consts::{PI, TAU};

use nalgebra::{Matrix4, Schur};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stationary::FourModeCoefficients;

type C = Complex64;
type Mat = [[f64; 4]; 4];
type CMat = [[C; 4]; 4];

const ZERO: C = C::new(0.0, 0.0);

/// Unitarity tolerance for a monodromy matrix.
pub const TOL_UNITARITY: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourModeSystem {
    pub h0: [f64; 4],
    pub h_delta: Mat,
    pub v: Mat,
    pub f: f64,
    pub omega: f64,
    pub coeffs: FourModeCoefficients,
}

pub fn assemble(coeffs: &FourModeCoefficients, f: f64, omega: f64) -> FourModeSystem {
    let d = coeffs.delta;
    let mut h_delta = [[0.0; 4]; 4];
    h_delta[0][1] = coeffs.j1;
    h_delta[1][0] = coeffs.j1;
    h_delta[2][3] = coeffs.j2;
    h_delta[3][2] = coeffs.j2;
    FourModeSystem {
        h0: [-d, -d, d, d],
        h_delta,
        v: coeffs.structured_overlap(),
        f,
        omega,
        coeffs: *coeffs,
    }
}

impl FourModeSystem {
    pub fn period(&self) -> f64 {
        TAU / self.omega
    }

    /// `H(t)` as a real symmetric matrix.
    pub fn hamiltonian(&self, t: f64) -> Mat {
        let s = self.f * (self.omega * t).sin();
        let mut h = [[0.0; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                h[r][c] = self.h_delta[r][c] + s * self.v[r][c];
            }
            h[r][r] += self.h0[r];
        }
        h
    }

    /// Bound on `‖H(t)‖` (max absolute row sum).
    pub fn norm_bound(&self) -> f64 {
        (0..4)
            .map(|r| {
                self.h0[r].abs()
                    + (0..4)
                        .map(|c| self.h_delta[r][c].abs() + self.f.abs() * self.v[r][c].abs())
                        .sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Largest RK4 step: `min(2π/ω, 2π/Δ)/200`, tightened to keep `h‖H‖ ≤ 0.01`.
    pub fn max_step(&self) -> f64 {
        let mut h = self.period() / 200.0;
        if self.coeffs.delta.abs() > 0.0 {
            h = h.min(TAU / self.coeffs.delta.abs() / 200.0);
        }
        let bound = self.norm_bound();
        if bound > 0.0 {
            h = h.min(0.01 / bound);
        }
        h
    }
}

fn matvec(h: &Mat, c: &[C; 4]) -> [C; 4] {
    let mut out = [ZERO; 4];
    for r in 0..4 {
        let mut acc = ZERO;
        for k in 0..4 {
            acc += c[k] * h[r][k];
        }
        // −i H c
        out[r] = C::new(acc.im, -acc.re);
    }
    out
}

fn axpy4(c: &[C; 4], s: f64, k: &[C; 4]) -> [C; 4] {
    let mut out = *c;
    for i in 0..4 {
        out[i] += k[i] * s;
    }
    out
}

fn rk4_step(sys: &FourModeSystem, c: &mut [C; 4], t: f64, h: f64) {
    let hm = sys.hamiltonian(t + 0.5 * h);
    let k1 = matvec(&sys.hamiltonian(t), c);
    let k2 = matvec(&hm, &axpy4(c, 0.5 * h, &k1));
    let k3 = matvec(&hm, &axpy4(c, 0.5 * h, &k2));
    let k4 = matvec(&sys.hamiltonian(t + h), &axpy4(c, h, &k3));
    for i in 0..4 {
        c[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
    }
}

fn norm_sqr4(c: &[C; 4]) -> f64 {
    c.iter().map(|v| v.norm_sqr()).sum()
}

/// Amplitudes sampled at a fixed interval.
#[derive(Clone, Debug, Default)]
pub struct ModeTrajectory {
    pub times: Vec<f64>,
    pub amplitudes: Vec<[C; 4]>,
    pub max_norm_drift: f64,
}

impl ModeTrajectory {
    pub fn populations(&self, mode: usize) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c[mode].norm_sqr()).collect()
    }
}

/// RK4 integration of the amplitudes from `c0` to `t_final`, sampled every `sample_dt`.
pub fn integrate_modes(
    c0: [C; 4],
    sys: &FourModeSystem,
    t_final: f64,
    sample_dt: f64,
) -> Result<ModeTrajectory> {
    if !(t_final > 0.0) || !(sample_dt > 0.0) {
        return Err(Error::Config("t_final and sample_dt must be > 0".into()));
    }
    let substeps = (sample_dt / sys.max_step()).ceil().max(1.0) as usize;
    let h = sample_dt / substeps as f64;
    let samples = (t_final / sample_dt).round() as usize;
    let n0 = norm_sqr4(&c0);
    let mut c = c0;
    let mut traj = ModeTrajectory {
        times: Vec::with_capacity(samples + 1),
        amplitudes: Vec::with_capacity(samples + 1),
        max_norm_drift: 0.0,
    };
    traj.times.push(0.0);
    traj.amplitudes.push(c);
    for s in 0..samples {
        let t0 = s as f64 * sample_dt;
        for k in 0..substeps {
            rk4_step(sys, &mut c, t0 + k as f64 * h, h);
        }
        let drift = (norm_sqr4(&c) - n0).abs();
        traj.max_norm_drift = traj.max_norm_drift.max(drift);
        if drift > 1e-6 {
            return Err(Error::StepSize(format!(
                "four-mode norm drift {drift:.3e} at t = {:.3}",
                t0 + sample_dt
            )));
        }
        traj.times.push(t0 + sample_dt);
        traj.amplitudes.push(c);
    }
    Ok(traj)
}

/// Propagator over one drive period, with columns the evolved basis vectors.
#[derive(Clone, Debug)]
pub struct Monodromy {
    pub matrix: Matrix4<C>,
    /// `max |(M†M − I)_ij|`.
    pub unitarity_residual: f64,
}

pub fn monodromy(sys: &FourModeSystem) -> Result<Monodromy> {
    monodromy_with_steps(sys, (sys.period() / sys.max_step()).ceil() as usize)
}

pub fn monodromy_with_steps(sys: &FourModeSystem, steps: usize) -> Result<Monodromy> {
    let h = sys.period() / steps as f64;
    let mut cols: CMat = [[ZERO; 4]; 4];
    for (i, col) in cols.iter_mut().enumerate() {
        col[i] = C::new(1.0, 0.0);
    }
    for k in 0..steps {
        let t = k as f64 * h;
        for col in cols.iter_mut() {
            rk4_step(sys, col, t, h);
        }
    }
    let matrix = Matrix4::from_fn(|r, c| cols[c][r]);
    let residual = (matrix.adjoint() * matrix - Matrix4::identity())
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    if residual > 1e-6 {
        return Err(Error::StepSize(format!(
            "monodromy unitarity residual {residual:.3e} at ω = {}",
            sys.omega
        )));
    }
    Ok(Monodromy {
        matrix,
        unitarity_residual: residual,
    })
}

#[derive(Clone, Debug)]
pub struct FloquetResult {
    pub omega: f64,
    /// `λ = −arg μ ∈ (−π, π]`.
    pub phases: [f64; 4],
    /// Columns are the Floquet eigenvectors, in the order of `phases`.
    pub vectors: Matrix4<C>,
    pub unitarity_residual: f64,
    /// Set when two eigenvalues coincide or tracking could not decide.
    pub ambiguous: bool,
}

/// Wraps an angle to `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

pub fn floquet_phases(m: &Monodromy, omega: f64) -> FloquetResult {
    let (q, t) = Schur::new(m.matrix).unpack();
    let mut phases = [0.0; 4];
    for (i, p) in phases.iter_mut().enumerate() {
        *p = wrap_phase(-t[(i, i)].arg());
    }
    let mut ambiguous = false;
    for a in 0..4 {
        for b in a + 1..4 {
            if (t[(a, a)] - t[(b, b)]).norm() < 1e-10 {
                ambiguous = true;
            }
        }
    }
    FloquetResult {
        omega,
        phases,
        vectors: q,
        unitarity_residual: m.unitarity_residual,
        ambiguous,
    }
}

/// Floquet phases of the system at one frequency.
pub fn floquet_at(coeffs: &FourModeCoefficients, f: f64, omega: f64) -> Result<FloquetResult> {
    let sys = assemble(coeffs, f, omega);
    Ok(floquet_phases(&monodromy(&sys)?, omega))
}

fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    p.iter().for_each(|&i| seen[i] = true);
                    if seen.iter().all(|&s| s) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Reorders `next` so branch `i` continues branch `i` of `prev`, by maximal
/// total eigenvector overlap.
pub fn match_branches(prev: &FloquetResult, next: &mut FloquetResult) {
    let overlap = prev.vectors.adjoint() * next.vectors;
    let mut best = (f64::NEG_INFINITY, [0, 1, 2, 3]);
    let mut second = f64::NEG_INFINITY;
    for p in permutations4() {
        let score: f64 = (0..4).map(|i| overlap[(i, p[i])].norm_sqr()).sum();
        if score > best.0 {
            second = best.0;
            best = (score, p);
        } else if score > second {
            second = score;
        }
    }
    if best.0 - second < 1e-6 {
        next.ambiguous = true;
    }
    let p = best.1;
    let phases = [next.phases[p[0]], next.phases[p[1]], next.phases[p[2]], next.phases[p[3]]];
    let vectors = Matrix4::from_fn(|r, c| next.vectors[(r, p[c])]);
    next.phases = phases;
    next.vectors = vectors;
}

/// Sequential branch tracking over an ordered scan.
pub fn track_branches(results: &mut [FloquetResult]) {
    for i in 1..results.len() {
        let (head, tail) = results.split_at_mut(i);
        match_branches(&head[i - 1], &mut tail[0]);
    }
}

/// Floquet phases over a frequency grid, computed in parallel and then tracked.
pub fn floquet_scan(coeffs: &FourModeCoefficients, f: f64, omegas: &[f64]) -> Result<Vec<FloquetResult>> {
    let mut results: Vec<FloquetResult> = omegas
        .par_iter()
        .map(|&w| floquet_at(coeffs, f, w))
        .collect::<Result<_>>()?;
    track_branches(&mut results);
    Ok(results)
}

pub fn omega_grid(min: f64, max: f64, step: f64) -> Vec<f64> {
    let n = ((max - min) / step).round() as usize;
    (0..=n).map(|i| min + i as f64 * step).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CrossingClass {
    LowerPair,
    UpperPair,
    InterPair,
}

impl CrossingClass {
    pub fn label(self) -> &'static str {
        match self {
            CrossingClass::LowerPair => "lower-pair",
            CrossingClass::UpperPair => "upper-pair",
            CrossingClass::InterPair => "inter-pair",
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Crossing {
    pub omega: f64,
    /// Tracked branch indices (0-based).
    pub branch_a: usize,
    pub branch_b: usize,
    pub class: CrossingClass,
    /// `|wrap(λ_a − λ_b)|` at the refined location.
    pub gap: f64,
}

/// Weight of a Floquet vector on the lower doublet `(1−, 1+)`.
pub fn lower_weight(fr: &FloquetResult, branch: usize) -> f64 {
    fr.vectors[(0, branch)].norm_sqr() + fr.vectors[(1, branch)].norm_sqr()
}

fn classify(fr: &FloquetResult, a: usize, b: usize) -> CrossingClass {
    match (lower_weight(fr, a) > 0.5, lower_weight(fr, b) > 0.5) {
        (true, true) => CrossingClass::LowerPair,
        (false, false) => CrossingClass::UpperPair,
        _ => CrossingClass::InterPair,
    }
}

fn branch_gap(fr: &FloquetResult, a: usize, b: usize) -> f64 {
    wrap_phase(fr.phases[a] - fr.phases[b])
}

/// Floquet result at `omega`, with branches aligned to `reference`.
fn tracked_at(coeffs: &FourModeCoefficients, f: f64, omega: f64, reference: &FloquetResult) -> Result<FloquetResult> {
    let mut fr = floquet_at(coeffs, f, omega)?;
    match_branches(reference, &mut fr);
    Ok(fr)
}

/// Frequencies in `[omega_min, omega_max]` where two tracked Floquet branches
/// cross, located by sign change of the wrapped branch difference and refined
/// by bisection to `1e-6`. Tangential touches with a minimum gap below `1e-4`
/// are reported as well.
pub fn crossing_frequencies(
    coeffs: &FourModeCoefficients,
    f: f64,
    omega_min: f64,
    omega_max: f64,
    resolution: f64,
) -> Result<Vec<Crossing>> {
    let omegas = omega_grid(omega_min, omega_max, resolution);
    let scan = floquet_scan(coeffs, f, &omegas)?;
    crossings_in_scan(coeffs, f, &scan)
}

pub fn crossings_in_scan(coeffs: &FourModeCoefficients, f: f64, scan: &[FloquetResult]) -> Result<Vec<Crossing>> {
    let mut out = Vec::new();
    for a in 0..4 {
        for b in a + 1..4 {
            let gaps: Vec<f64> = scan.iter().map(|fr| branch_gap(fr, a, b)).collect();
            for i in 0..scan.len().saturating_sub(1) {
                let (g0, g1) = (gaps[i], gaps[i + 1]);
                if g0 == 0.0 || g0.signum() != g1.signum() {
                    if g0.abs() > PI / 2.0 || g1.abs() > PI / 2.0 {
                        continue; // branch-cut wrap, not a crossing
                    }
                    out.push(bisect_crossing(coeffs, f, &scan[i], &scan[i + 1], a, b)?);
                } else if i > 0 && gaps[i].abs() < gaps[i - 1].abs() && gaps[i].abs() < g1.abs() && gaps[i].abs() < 1e-2 {
                    if let Some(c) = tangential(coeffs, f, &scan[i - 1], &scan[i + 1], a, b)? {
                        out.push(c);
                    }
                }
            }
        }
    }
    out.sort_by(|x, y| x.omega.total_cmp(&y.omega));
    // sign-change and tangential detection can report the same point twice
    let mut merged: Vec<Crossing> = Vec::with_capacity(out.len());
    for c in out {
        match merged
            .iter_mut()
            .find(|m| m.branch_a == c.branch_a && m.branch_b == c.branch_b && (m.omega - c.omega).abs() < 1e-4)
        {
            Some(m) if c.gap < m.gap => *m = c,
            Some(_) => {}
            None => merged.push(c),
        }
    }
    Ok(merged)
}

fn bisect_crossing(
    coeffs: &FourModeCoefficients,
    f: f64,
    left: &FloquetResult,
    right: &FloquetResult,
    a: usize,
    b: usize,
) -> Result<Crossing> {
    let mut lo = left.clone();
    let mut hi_omega = right.omega;
    let g_lo = branch_gap(&lo, a, b);
    let mut mid_fr = lo.clone();
    while hi_omega - lo.omega > 1e-6 {
        let mid = 0.5 * (lo.omega + hi_omega);
        mid_fr = tracked_at(coeffs, f, mid, &lo)?;
        let g = branch_gap(&mid_fr, a, b);
        if g.signum() == g_lo.signum() && g != 0.0 {
            lo = mid_fr.clone();
        } else {
            hi_omega = mid;
        }
    }
    Ok(Crossing {
        omega: 0.5 * (lo.omega + hi_omega),
        branch_a: a,
        branch_b: b,
        class: classify(&lo, a, b),
        gap: branch_gap(&mid_fr, a, b).abs(),
    })
}

fn tangential(
    coeffs: &FourModeCoefficients,
    f: f64,
    left: &FloquetResult,
    right: &FloquetResult,
    a: usize,
    b: usize,
) -> Result<Option<Crossing>> {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (left.omega, right.omega);
    let eval = |w: f64| -> Result<(f64, FloquetResult)> {
        let fr = tracked_at(coeffs, f, w, left)?;
        Ok((branch_gap(&fr, a, b).abs(), fr))
    };
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let (mut f1, mut r1) = eval(x1)?;
    let (mut f2, mut r2) = eval(x2)?;
    while hi - lo > 1e-6 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            r2 = r1.clone();
            x1 = hi - phi * (hi - lo);
            (f1, r1) = eval(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            r1 = r2.clone();
            x2 = lo + phi * (hi - lo);
            (f2, r2) = eval(x2)?;
        }
    }
    let (gap, fr, w) = if f1 < f2 { (f1, r1, x1) } else { (f2, r2, x2) };
    if gap >= 1e-4 {
        return Ok(None);
    }
    Ok(Some(Crossing {
        omega: w,
        branch_a: a,
        branch_b: b,
        class: classify(&fr, a, b),
        gap,
    }))
}

/// Parametric resonances `2Δ/n`, n = 1..n_max (the level spacing of the
/// reduced model is 2Δ).
pub fn resonance_frequencies(coeffs: &FourModeCoefficients, n_max: usize) -> Vec<f64> {
    (1..=n_max).map(|n| 2.0 * coeffs.delta / n as f64).collect()
}

/// `ν = ±[δ₂ ± (δ₂² + f²w²)^{1/2}]/2`, sorted ascending (`u` neglected).
pub fn averaged_spectrum(coeffs: &FourModeCoefficients, f: f64) -> [f64; 4] {
    let d2 = coeffs.delta2;
    let r = (d2 * d2 + f * f * coeffs.w * coeffs.w).sqrt();
    let mut nu = [0.5 * (d2 + r), 0.5 * (d2 - r), -0.5 * (d2 + r), -0.5 * (d2 - r)];
    nu.sort_by(f64::total_cmp);
    nu
}

/// Smallest non-zero pairwise gap `|ν_i − ν_j|` (angular frequency).
pub fn predicted_beat(nu: &[f64; 4]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..4 {
        for j in i + 1..4 {
            let d = (nu[i] - nu[j]).abs();
            if d > 1e-12 {
                best = best.min(d);
            }
        }
    }
    best
}

/// Running time average of `|c₁₋|² + |c₂₋|²`.
pub fn p_left_fourmode(traj: &ModeTrajectory) -> Vec<f64> {
    let left: Vec<f64> = traj
        .amplitudes
        .iter()
        .map(|c| c[0].norm_sqr() + c[2].norm_sqr())
        .collect();
    crate::dynamics::time_averaged_left(&traj.times, &left)
}

/// A spectral line of a sampled signal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralPeak {
    /// Angular frequency.
    pub frequency: f64,
    pub amplitude: f64,
}

/// Spectral lines of a uniformly sampled real signal (Hann window, mean
/// removed, zero-padded ×8, parabolic interpolation), strongest first.
pub fn spectral_peaks(signal: &[f64], sample_dt: f64, max_peaks: usize) -> Vec<SpectralPeak> {
    let n = signal.len();
    if n < 4 {
        return Vec::new();
    }
    let mean = signal.iter().sum::<f64>() / n as f64;
    let padded = (8 * n).next_power_of_two();
    let mut buf = vec![ZERO; padded];
    for (i, &s) in signal.iter().enumerate() {
        let w = 0.5 - 0.5 * (TAU * i as f64 / (n - 1) as f64).cos();
        buf[i] = C::new((s - mean) * w, 0.0);
    }
    FftPlanner::new().plan_fft_forward(padded).process(&mut buf);
    let mag: Vec<f64> = buf[..padded / 2].iter().map(|v| v.norm()).collect();
    let dw = TAU / (padded as f64 * sample_dt);
    let mut peaks: Vec<SpectralPeak> = (1..mag.len() - 1)
        .filter(|&i| mag[i] > mag[i - 1] && mag[i] >= mag[i + 1])
        .map(|i| {
            let (a, b, c) = (mag[i - 1].ln(), mag[i].ln(), mag[i + 1].ln());
            let denom = a - 2.0 * b + c;
            let shift = if denom.abs() > 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            SpectralPeak {
                frequency: (i as f64 + shift) * dw,
                amplitude: mag[i],
            }
        })
        .collect();
    peaks.sort_by(|x, y| y.amplitude.total_cmp(&x.amplitude));
    peaks.truncate(max_peaks);
    peaks
}

/// Slowest spectral line of `|c_mode(t)|²` with at least `rel_threshold` of the
/// strongest line's amplitude.
pub fn beat_frequency(traj: &ModeTrajectory, mode: usize, rel_threshold: f64) -> Option<f64> {
    let pop = traj.populations(mode);
    let dt = traj.times.get(1).copied()? - traj.times[0];
    let peaks = spectral_peaks(&pop, dt, 16);
    let top = peaks.first()?.amplitude;
    peaks
        .iter()
        .filter(|p| p.amplitude >= rel_threshold * top)
        .map(|p| p.frequency)
        .fold(None, |m: Option<f64>, f| Some(m.map_or(f, |m| m.min(f))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn coeffs() -> FourModeCoefficients {
        FourModeCoefficients::from_scalars(0.96, 0.02, 0.01, 9.9, 9.8, 4e-4, 0.3)
    }

    #[test]
    fn assembled_matrices_are_symmetric() {
        let sys = assemble(&coeffs(), 0.143, 1.0);
        for r in 0..4 {
            for c in 0..4 {
                assert_eq!(sys.v[r][c], sys.v[c][r]);
                assert_eq!(sys.h_delta[r][c], sys.h_delta[c][r]);
            }
        }
        assert_eq!(sys.h0, [-0.96, -0.96, 0.96, 0.96]);
    }

    #[test]
    fn pure_w_coupling_placement() {
        let c = FourModeCoefficients::from_scalars(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0);
        let v = assemble(&c, 0.1, 1.0).v;
        assert_eq!(v[0][3], -1.0);
        assert_eq!(v[3][0], -1.0);
        assert_eq!(v[1][2], 1.0);
        assert_eq!(v[2][1], 1.0);
    }

    #[test]
    fn undriven_rabi_flopping() {
        let sys = assemble(&coeffs(), 0.0, 1.0);
        let c0 = [C::new(1.0, 0.0), ZERO, ZERO, ZERO];
        let traj = integrate_modes(c0, &sys, 200.0, 0.5).unwrap();
        for (t, c) in traj.times.iter().zip(&traj.amplitudes) {
            assert_abs_diff_eq!(c[0].norm_sqr(), (0.02 * t).cos().powi(2), epsilon = 1e-8);
            assert_abs_diff_eq!(c[1].norm_sqr(), (0.02 * t).sin().powi(2), epsilon = 1e-8);
        }
    }

    #[test]
    fn undriven_floquet_phases_closed_form() {
        let c = coeffs();
        let omega = 0.73;
        let fr = floquet_at(&c, 0.0, omega).unwrap();
        let t = TAU / omega;
        let mut expected: Vec<f64> = [-c.delta - c.delta1, -c.delta + c.delta1, c.delta - c.delta2, c.delta + c.delta2]
            .iter()
            .map(|e| wrap_phase(e * t))
            .collect();
        expected.sort_by(f64::total_cmp);
        let mut got = fr.phases.to_vec();
        got.sort_by(f64::total_cmp);
        for (g, e) in got.iter().zip(&expected) {
            assert_abs_diff_eq!(g, e, epsilon = 1e-8);
        }
    }

    #[test]
    fn monodromy_converged_and_unitary() {
        let sys = assemble(&coeffs(), 0.143, 1.1);
        let m = monodromy(&sys).unwrap();
        assert!(m.unitarity_residual < TOL_UNITARITY);
        assert_abs_diff_eq!(m.matrix.determinant().norm(), 1.0, epsilon = 1e-8);
        let steps = (sys.period() / sys.max_step()).ceil() as usize;
        let fine = monodromy_with_steps(&sys, 2 * steps).unwrap();
        let diff = (m.matrix - fine.matrix).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn wrap_phase_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert_abs_diff_eq!(wrap_phase(3.0 * PI / 2.0), -PI / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn resonances_and_spectrum() {
        let c = coeffs();
        let r = resonance_frequencies(&c, 3);
        assert_eq!(r.len(), 3);
        assert_abs_diff_eq!(r[2], 2.0 * 0.96 / 3.0, epsilon = 1e-15);
        let nu0 = averaged_spectrum(&c, 0.0);
        assert_eq!(nu0, [-0.01, 0.0, 0.0, 0.01]);
        let mut zero_d2 = c;
        zero_d2.delta2 = 0.0;
        let nu = averaged_spectrum(&zero_d2, 0.1);
        assert_abs_diff_eq!(nu[0], -0.015, epsilon = 1e-15);
        assert_abs_diff_eq!(nu[3], 0.015, epsilon = 1e-15);
    }

    #[test]
    fn fourmode_left_probability() {
        let traj = ModeTrajectory {
            times: vec![0.0, 1.0, 2.0],
            amplitudes: vec![[C::new(1.0, 0.0), ZERO, ZERO, ZERO]; 3],
            max_norm_drift: 0.0,
        };
        assert!(p_left_fourmode(&traj).iter().all(|&p| p == 1.0));
        let h = C::new(0.5, 0.0);
        let mixed = ModeTrajectory {
            amplitudes: vec![[h, h, h, h]; 3],
            ..traj
        };
        assert!(p_left_fourmode(&mixed).iter().all(|&p| (p - 0.5).abs() < 1e-15));
    }

    #[test]
    fn spectral_peak_of_cosine() {
        let dt = 0.1;
        let s: Vec<f64> = (0..20000).map(|i| (0.37 * i as f64 * dt).cos()).collect();
        let p = spectral_peaks(&s, dt, 1);
        assert_abs_diff_eq!(p[0].frequency, 0.37, epsilon = 1e-4);
    }
}
