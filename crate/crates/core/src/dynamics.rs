//! Split-step propagation of the driven spinor equation
//! `i∂Ψ/∂t = [H₀ + f sin(ωt) Ṽ]Ψ + g(Ψ†Ψ)Ψ` and the observables recorded along
//! a run.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{double_well, Grid, PotentialPair, TrapParams};
use crate::io::write_csv;
use crate::spinor::{spin_expectation, SpinorField};
use crate::stationary::{Hamiltonian, WellBasis};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropagationConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Steps between recorded samples.
    pub sample_every: usize,
    /// Nonlinearity coefficient.
    pub g: f64,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            dt: 0.0025,
            t_final: 1000.0,
            sample_every: 40,
            g: 0.0,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self, grid: &Grid, trap: &TrapParams) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!("propagation.dt must be > 0 (got {})", self.dt)));
        }
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::Config(format!(
                "propagation.t_final must be > 0 (got {})",
                self.t_final
            )));
        }
        if self.sample_every == 0 {
            return Err(Error::Config("propagation.sample_every must be positive".into()));
        }
        if !self.g.is_finite() {
            return Err(Error::Config("propagation.g must be finite".into()));
        }
        let phase = self.dt * max_kinetic_symbol(grid, trap);
        if phase >= std::f64::consts::PI {
            // The exact kinetic phase is unconditionally stable; only the
            // temporal resolution of the highest modes suffers.
            log::warn!(
                "dt = {} gives a kinetic phase of {:.3} rad per step on the highest mode (>= π)",
                self.dt,
                phase
            );
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn sample_interval(&self) -> f64 {
        self.dt * self.sample_every as f64
    }
}

/// `max_k (k²/2m + γ|k|)` on the grid.
pub fn max_kinetic_symbol(grid: &Grid, trap: &TrapParams) -> f64 {
    grid.k
        .iter()
        .map(|&k| k * k / (2.0 * trap.mass) + trap.gamma * k.abs())
        .fold(0.0, f64::max)
}

/// Strang-split propagator for one trap and drive.
pub struct Propagator<'g> {
    grid: &'g Grid,
    trap: TrapParams,
    cfg: PropagationConfig,
    half_kin: [Vec<Complex64>; 2],
    full_kin: [Vec<Complex64>; 2],
    static_phase: Vec<Complex64>,
    /// Grid points where the modulation profile is non-negligible.
    modulated: Vec<(usize, f64)>,
    rabi: (f64, f64),
    phase_buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl<'g> Propagator<'g> {
    pub fn new(
        grid: &'g Grid,
        trap: &TrapParams,
        pot: &PotentialPair,
        cfg: &PropagationConfig,
    ) -> Result<Self> {
        cfg.validate(grid, trap)?;
        let dt = cfg.dt;
        let n = grid.len();
        let inv_n = 1.0 / n as f64;
        // σ_z = +1 component carries −γk; the 1/n of the inverse FFT is folded in.
        let kin = |sign: f64, frac: f64| -> Vec<Complex64> {
            (0..n)
                .map(|j| {
                    let e = grid.k[j] * grid.k[j] / (2.0 * trap.mass) + sign * trap.gamma * grid.k_deriv[j];
                    Complex64::from_polar(inv_n, -e * dt * frac)
                })
                .collect()
        };
        let static_phase: Vec<Complex64> = pot
            .v_static
            .iter()
            .map(|&v| Complex64::from_polar(1.0, -v * dt))
            .collect();
        let scale = pot.v_mod.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let modulated = pot
            .v_mod
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > 1e-15 * scale)
            .map(|(j, &v)| (j, v))
            .collect();
        let om = trap.omega_rabi * dt;
        Ok(Self {
            grid,
            trap: *trap,
            cfg: *cfg,
            half_kin: [kin(-1.0, 0.5), kin(1.0, 0.5)],
            full_kin: [kin(-1.0, 1.0), kin(1.0, 1.0)],
            phase_buf: static_phase.clone(),
            static_phase,
            modulated,
            rabi: (om.cos(), om.sin()),
            scratch: vec![Complex64::new(0.0, 0.0); grid.fft_scratch_len()],
        })
    }

    /// Builds the double-well potentials from `trap`.
    pub fn for_trap(grid: &'g Grid, trap: &TrapParams, cfg: &PropagationConfig) -> Result<Self> {
        let pot = double_well(grid, trap)?;
        Self::new(grid, trap, &pot, cfg)
    }

    pub fn config(&self) -> &PropagationConfig {
        &self.cfg
    }

    fn kick(&mut self, psi: &mut SpinorField, full: bool) {
        let table = if full { &self.full_kin } else { &self.half_kin };
        for (buf, phase) in [&mut psi.psi1, &mut psi.psi2].into_iter().zip(table) {
            self.grid.forward(buf, &mut self.scratch);
            for (v, p) in buf.iter_mut().zip(phase) {
                *v *= p;
            }
            self.grid.inverse(buf, &mut self.scratch);
        }
    }

    fn drift(&mut self, psi: &mut SpinorField, t_mid: f64) {
        let dt = self.cfg.dt;
        self.phase_buf.copy_from_slice(&self.static_phase);
        let s = self.trap.f * (self.trap.omega * t_mid).sin();
        if s != 0.0 {
            for &(j, v) in &self.modulated {
                self.phase_buf[j] *= Complex64::from_polar(1.0, -s * v * dt);
            }
        }
        if self.cfg.g != 0.0 {
            for (j, p) in self.phase_buf.iter_mut().enumerate() {
                let rho = psi.psi1[j].norm_sqr() + psi.psi2[j].norm_sqr();
                *p *= Complex64::from_polar(1.0, -self.cfg.g * rho * dt);
            }
        }
        let (c, sn) = self.rabi;
        let mis = Complex64::new(0.0, -sn);
        for (j, p) in self.phase_buf.iter().enumerate() {
            let (a, b) = (psi.psi1[j], psi.psi2[j]);
            psi.psi1[j] = p * (a * c + mis * b);
            psi.psi2[j] = p * (b * c + mis * a);
        }
    }

    /// One Strang step from `t` to `t + dt`.
    pub fn step(&mut self, psi: &mut SpinorField, t: f64) {
        self.kick(psi, false);
        self.drift(psi, t + 0.5 * self.cfg.dt);
        self.kick(psi, false);
    }

    /// `steps` Strang steps from `t`, merging adjacent half-kicks.
    pub fn advance(&mut self, psi: &mut SpinorField, t: f64, steps: usize) {
        if steps == 0 {
            return;
        }
        let dt = self.cfg.dt;
        self.kick(psi, false);
        for s in 0..steps {
            self.drift(psi, t + (s as f64 + 0.5) * dt);
            self.kick(psi, s + 1 < steps);
        }
    }
}

/// Probability at `x < 0`, with half weight at `x = 0` and at the periodic
/// endpoint, divided by the total norm.
pub fn left_probability(psi: &SpinorField, grid: &Grid) -> f64 {
    let rho = psi.density();
    let origin = grid.origin();
    let total: f64 = rho.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let left = 0.5 * rho[0] + rho[1..origin].iter().sum::<f64>() + 0.5 * rho[origin];
    (left / total).clamp(0.0, 1.0)
}

/// Running mean `(1/t)∫₀ᵗ p dt'` by the trapezoidal rule; the first entry is `p(t₀)`.
pub fn time_averaged_left(times: &[f64], p: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for i in 0..p.len() {
        if i == 0 {
            out.push(p[0]);
            continue;
        }
        acc += 0.5 * (p[i] + p[i - 1]) * (times[i] - times[i - 1]);
        out.push(acc / (times[i] - times[0]));
    }
    out
}

/// `c_{iα} = e^{iE₀t}⟨iα|ψ⟩` and the continuum residual `1 − Σ|c|²`.
pub fn mode_amplitudes(
    psi: &SpinorField,
    basis: &WellBasis,
    t: f64,
    e0: f64,
    dx: f64,
) -> ([Complex64; 4], f64) {
    let rot = Complex64::from_polar(1.0, e0 * t);
    let mut c = [Complex64::new(0.0, 0.0); 4];
    for (ci, mode) in c.iter_mut().zip(&basis.modes) {
        *ci = rot * mode.inner(psi, dx);
    }
    let captured: f64 = c.iter().map(|v| v.norm_sqr()).sum();
    (c, (1.0 - captured).clamp(0.0, 1.0))
}

/// `⟨ψ|H₀|ψ⟩`.
pub fn energy(h: &Hamiltonian<'_>, psi: &SpinorField) -> f64 {
    psi.inner(&h.apply(psi), h.grid().dx).re
}

/// Normalized `Σ c_{iα}|iα⟩` in the order `(1−, 1+, 2−, 2+)`.
pub fn initial_state(basis: &WellBasis, coeffs: [Complex64; 4], dx: f64) -> SpinorField {
    let mut psi = SpinorField::zeros(basis.modes[0].len());
    for (c, mode) in coeffs.iter().zip(&basis.modes) {
        if *c != Complex64::new(0.0, 0.0) {
            psi.axpy(*c, mode);
        }
    }
    psi.normalize(dx);
    psi
}

/// Sampled observables of one run.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub norm: Vec<f64>,
    pub p_left: Vec<f64>,
    pub p_left_avg: Vec<f64>,
    pub spins: Vec<[f64; 3]>,
    pub mode_amplitudes: Option<Vec<[Complex64; 4]>>,
    pub continuum_residual: Option<Vec<f64>>,
}

pub const TRAJECTORY_HEADER: [&str; 12] = [
    "t", "norm", "p_left", "p_left_avg", "Sx", "Sy", "Sz", "|c1m|²", "|c1p|²", "|c2m|²", "|c2p|²",
    "residual",
];

impl Trajectory {
    /// `P₍<₎` at the last sample.
    pub fn final_average(&self) -> f64 {
        self.p_left_avg.last().copied().unwrap_or(f64::NAN)
    }

    pub fn max_norm_drift(&self) -> f64 {
        self.norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `(S_x, S_y, S_z)` per sample.
    pub fn spin_trajectory(&self) -> &[[f64; 3]] {
        &self.spins
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.times.len())
            .map(|i| {
                let mut row = vec![
                    self.times[i],
                    self.norm[i],
                    self.p_left[i],
                    self.p_left_avg[i],
                    self.spins[i][0],
                    self.spins[i][1],
                    self.spins[i][2],
                ];
                match (&self.mode_amplitudes, &self.continuum_residual) {
                    (Some(c), Some(r)) => {
                        row.extend(c[i].iter().map(|v| v.norm_sqr()));
                        row.push(r[i]);
                    }
                    _ => row.extend([f64::NAN; 5]),
                }
                row
            })
            .collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_csv(path, &TRAJECTORY_HEADER, &self.rows())
    }
}

/// Projection target for mode amplitudes.
#[derive(Clone, Copy)]
pub struct Projection<'a> {
    pub basis: &'a WellBasis,
    pub e0: f64,
}

/// Evolves `psi0` to `cfg.t_final`, sampling every `cfg.sample_every` steps.
pub fn evolve(
    psi0: &SpinorField,
    grid: &Grid,
    trap: &TrapParams,
    pot: &PotentialPair,
    cfg: &PropagationConfig,
    projection: Option<Projection<'_>>,
) -> Result<Trajectory> {
    let mut prop = Propagator::new(grid, trap, pot, cfg)?;
    let dx = grid.dx;
    let mut psi = psi0.clone();
    let total = cfg.n_steps();
    let mut traj = Trajectory::default();
    let mut modes = Vec::new();
    let mut residual = Vec::new();

    let mut record = |psi: &SpinorField, t: f64, traj: &mut Trajectory| {
        traj.times.push(t);
        traj.norm.push(psi.norm_sqr(dx));
        traj.p_left.push(left_probability(psi, grid));
        traj.spins.push(spin_expectation(psi, dx));
        if let Some(p) = projection {
            let (c, r) = mode_amplitudes(psi, p.basis, t, p.e0, dx);
            modes.push(c);
            residual.push(r);
        }
    };

    record(&psi, 0.0, &mut traj);
    let mut done = 0;
    while done < total {
        let chunk = cfg.sample_every.min(total - done);
        prop.advance(&mut psi, done as f64 * cfg.dt, chunk);
        done += chunk;
        if !psi.is_finite() {
            return Err(Error::NonFinite { step: done });
        }
        record(&psi, done as f64 * cfg.dt, &mut traj);
    }
    traj.p_left_avg = time_averaged_left(&traj.times, &traj.p_left);
    if projection.is_some() {
        traj.mode_amplitudes = Some(modes);
        traj.continuum_residual = Some(residual);
    }
    Ok(traj)
}

/// Final state only, without sampling.
pub fn propagate_to(
    psi0: &SpinorField,
    grid: &Grid,
    trap: &TrapParams,
    pot: &PotentialPair,
    cfg: &PropagationConfig,
) -> Result<SpinorField> {
    let mut prop = Propagator::new(grid, trap, pot, cfg)?;
    let mut psi = psi0.clone();
    prop.advance(&mut psi, 0.0, cfg.n_steps());
    if !psi.is_finite() {
        return Err(Error::NonFinite { step: cfg.n_steps() });
    }
    Ok(psi)
}
