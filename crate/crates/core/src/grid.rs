//! Spatial grid, its discrete Fourier counterpart, and the trap potentials.
//!
//! The grid is periodic with `n` points `x_j = x_min + j·dx`, `dx = (x_max − x_min)/n`.
//! With `x_min = −x_max` the point `x_min` is identified with `x_max`, so the
//! reflection `x → −x` maps index `j` to `(n − j) mod n` exactly.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::write_csv;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: -8.0,
            x_max: 8.0,
            n_points: 256,
        }
    }
}

impl GridSpec {
    pub fn symmetric(half_width: f64, n_points: usize) -> Self {
        Self {
            x_min: -half_width,
            x_max: half_width,
            n_points,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points < 4 || self.n_points % 2 != 0 {
            return Err(Error::Config(format!(
                "grid.n_points must be even and >= 4 (got {})",
                self.n_points
            )));
        }
        if !(self.x_max > 0.0) || (self.x_min + self.x_max).abs() > 1e-12 * self.x_max {
            return Err(Error::Config(format!(
                "grid.x_min = -grid.x_max required (grid symmetric about the origin), got [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / self.n_points as f64
    }
}

/// Uniform periodic grid with precomputed wavenumbers and FFT plans.
#[derive(Clone)]
pub struct Grid {
    spec: GridSpec,
    pub x: Vec<f64>,
    /// Wavenumbers in FFT order; the Nyquist entry is `−π/dx`.
    pub k: Vec<f64>,
    /// Symbol of the first derivative (`k` with the Nyquist entry zeroed), so
    /// that `d/dx` stays real and odd under reflection.
    pub k_deriv: Vec<f64>,
    pub dx: f64,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("spec", &self.spec)
            .field("dx", &self.dx)
            .finish()
    }
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.n_points;
        let dx = spec.dx();
        let x = (0..n).map(|j| spec.x_min + j as f64 * dx).collect();
        let dk = 2.0 * PI / (n as f64 * dx);
        let k: Vec<f64> = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as i64 } else { j as i64 - n as i64 };
                m as f64 * dk
            })
            .collect();
        let mut k_deriv = k.clone();
        k_deriv[n / 2] = 0.0;

        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        Ok(Self {
            spec,
            x,
            k,
            k_deriv,
            dx,
            fft,
            ifft,
        })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn k_max(&self) -> f64 {
        PI / self.dx
    }

    /// Index of `−x_j`.
    #[inline]
    pub fn mirror(&self, j: usize) -> usize {
        let n = self.len();
        (n - j) % n
    }

    /// Index of `x = 0`.
    pub fn origin(&self) -> usize {
        self.len() / 2
    }

    pub fn fft_scratch_len(&self) -> usize {
        self.fft
            .get_inplace_scratch_len()
            .max(self.ifft.get_inplace_scratch_len())
    }

    /// Unnormalized forward transform.
    pub fn forward(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.fft.process_with_scratch(buf, scratch);
    }

    /// Unnormalized inverse transform (caller divides by `n`).
    pub fn inverse(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.ifft.process_with_scratch(buf, scratch);
    }

    /// Multiplies `buf` by `symbol(k)` in Fourier space.
    pub fn apply_symbol<F>(&self, buf: &mut [Complex64], symbol: F)
    where
        F: Fn(usize) -> Complex64,
    {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft_scratch_len()];
        self.forward(buf, &mut scratch);
        let inv_n = 1.0 / self.len() as f64;
        for (j, v) in buf.iter_mut().enumerate() {
            *v *= symbol(j) * inv_n;
        }
        self.inverse(buf, &mut scratch);
    }

    /// Trapezoidal integral of a sampled function (periodic grid, so plain sum · dx).
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().sum::<f64>() * self.dx
    }
}

/// Trap and drive parameters of the model
/// `H = p²/2m − γσ_z p + Ωσ_x + V(x) + f sin(ωt) Ṽ(x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapParams {
    /// Well depth U.
    pub depth: f64,
    /// Well width a of the super-Gaussian.
    pub width: f64,
    /// Distance d between the well centers (wells at ±d/2).
    pub separation: f64,
    /// Ω, half the Zeeman splitting.
    pub omega_rabi: f64,
    /// γ, spin-orbit coupling strength.
    pub gamma: f64,
    /// Modulation amplitude f.
    pub f: f64,
    /// Modulation frequency ω.
    pub omega: f64,
    /// Mass in the kinetic term p²/2m.
    pub mass: f64,
}

impl Default for TrapParams {
    fn default() -> Self {
        Self {
            depth: 12.0,
            width: 0.5,
            separation: 2.5,
            omega_rabi: 1.0,
            gamma: 0.8,
            f: 0.0,
            omega: 1.0,
            mass: 0.5,
        }
    }
}

impl TrapParams {
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_drive(mut self, f: f64, omega: f64) -> Self {
        self.f = f;
        self.omega = omega;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("trap.depth", self.depth),
            ("trap.width", self.width),
            ("trap.separation", self.separation),
            ("trap.omega", self.omega),
            ("trap.mass", self.mass),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::Config(format!("{name} must be > 0 (got {value})")));
            }
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::Config(format!("trap.gamma must be >= 0 (got {})", self.gamma)));
        }
        if !(self.f >= 0.0) {
            return Err(Error::Config(format!("trap.f must be >= 0 (got {})", self.f)));
        }
        if !self.omega_rabi.is_finite() {
            return Err(Error::Config("trap.omega_rabi must be finite".into()));
        }
        if self.f > 0.3 {
            log::warn!(
                "modulation amplitude f = {} is not small; four-mode comparisons lose validity",
                self.f
            );
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

/// Super-Gaussian well `−U exp(−x⁶/a⁶)`.
#[inline]
pub fn single_well(x: f64, depth: f64, width: f64) -> f64 {
    let s = x / width;
    let s2 = s * s;
    -depth * (-(s2 * s2 * s2)).exp()
}

/// Static trap `V = V₋ + V₊` and modulation profile `Ṽ = V₊ − V₋` on a grid.
#[derive(Clone, Debug)]
pub struct PotentialPair {
    pub v_static: Vec<f64>,
    pub v_mod: Vec<f64>,
    pub v_left: Vec<f64>,
    pub v_right: Vec<f64>,
}

impl PotentialPair {
    /// Instantaneous potential `V + s·Ṽ` at `x_j`, where `s = f sin ωt`.
    #[inline]
    pub fn total(&self, j: usize, s: f64) -> f64 {
        self.v_static[j] + s * self.v_mod[j]
    }

    pub fn write_csv(&self, grid: &Grid, static_path: &Path, mod_path: &Path) -> Result<()> {
        let rows = |v: &[f64]| -> Vec<Vec<f64>> {
            grid.x.iter().zip(v).map(|(&x, &y)| vec![x, y]).collect()
        };
        write_csv(static_path, &["x", "value"], &rows(&self.v_static))?;
        write_csv(mod_path, &["x", "value"], &rows(&self.v_mod))?;
        Ok(())
    }
}

pub fn double_well(grid: &Grid, trap: &TrapParams) -> Result<PotentialPair> {
    trap.validate()?;
    let half = trap.separation / 2.0;
    let v_left: Vec<f64> = grid
        .x
        .iter()
        .map(|&x| single_well(x + half, trap.depth, trap.width))
        .collect();
    let v_right: Vec<f64> = grid
        .x
        .iter()
        .map(|&x| single_well(x - half, trap.depth, trap.width))
        .collect();

    let v0 = 2.0 * single_well(half, trap.depth, trap.width);
    if v0 < -trap.depth {
        return Err(Error::DegenerateTrap {
            v0,
            neg_depth: -trap.depth,
        });
    }
    let edge = single_well(grid.x[0] + half, trap.depth, trap.width)
        + single_well(grid.x[0] - half, trap.depth, trap.width);
    if edge.abs() / trap.depth >= 1e-12 {
        log::warn!(
            "potential at the grid boundary is not negligible: |V(x_min)|/U = {:.3e}",
            edge.abs() / trap.depth
        );
    }

    let v_static = v_left.iter().zip(&v_right).map(|(l, r)| l + r).collect();
    let v_mod = v_left.iter().zip(&v_right).map(|(l, r)| r - l).collect();
    Ok(PotentialPair {
        v_static,
        v_mod,
        v_left,
        v_right,
    })
}
