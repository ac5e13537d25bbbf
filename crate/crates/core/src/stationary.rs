//! Bound states of the static Hamiltonian
//! `H₀ = p²/2m − γσ_z p + Ωσ_x + V(x)`, their symmetry adaptation, the
//! left/right well basis, and the four-mode coefficients.
//!
//! Derivatives are spectral. For the eigenproblem the spin frame is rotated by
//! `U = (1 − iσ_x)/√2`, which maps `σ_z → −σ_y` and turns `H₀` into the real
//! symmetric matrix `p²/2m + γσ_y p + Ωσ_x + V`; eigenvectors are rotated back
//! with `U†`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::left_probability;
use crate::error::{Error, Result};
use crate::grid::{double_well, Grid, PotentialPair, TrapParams};
use crate::spinor::{SpinorField, Symmetry};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Degeneracy threshold for a pair, relative to |Δ|.
pub const TOL_DEGENERATE: f64 = 1e-6;
/// Symmetry defect tolerance after adaptation.
pub const TOL_SYMMETRY: f64 = 1e-6;

/// Spectral first- and second-derivative matrices on an even periodic grid.
///
/// The first derivative drops the Nyquist mode; the second keeps it with
/// symbol `−(π/dx)²`, matching [`Grid::k_deriv`] and [`Grid::k`].
pub fn derivative_matrices(n: usize, length: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let scale = 2.0 * PI / length;
    let nf = n as f64;
    let mut d1 = DMatrix::zeros(n, n);
    let mut d2 = DMatrix::zeros(n, n);
    let diag2 = -scale * scale * (nf * nf / 12.0 + 1.0 / 6.0);
    for j in 0..n {
        d2[(j, j)] = diag2;
        for l in 0..n {
            if j == l {
                continue;
            }
            let m = j as i64 - l as i64;
            let sign = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            let theta = PI * m as f64 / nf;
            d1[(j, l)] = 0.5 * scale * sign / theta.tan();
            d2[(j, l)] = -0.5 * scale * scale * sign / theta.sin().powi(2);
        }
    }
    (d1, d2)
}

/// Discretized static Hamiltonian on a grid.
#[derive(Clone, Debug)]
pub struct Hamiltonian<'g> {
    grid: &'g Grid,
    trap: TrapParams,
    potential: Vec<f64>,
}

pub fn discretize_hamiltonian<'g>(grid: &'g Grid, trap: &TrapParams) -> Result<Hamiltonian<'g>> {
    let pot = double_well(grid, trap)?;
    Ok(Hamiltonian {
        grid,
        trap: *trap,
        potential: pot.v_static,
    })
}

impl<'g> Hamiltonian<'g> {
    /// Uses an explicit potential instead of the double well (for tests with `V = 0`).
    pub fn with_potential(grid: &'g Grid, trap: &TrapParams, potential: Vec<f64>) -> Self {
        assert_eq!(potential.len(), grid.len());
        Self {
            grid,
            trap: *trap,
            potential,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.grid
    }

    pub fn trap(&self) -> &TrapParams {
        &self.trap
    }

    pub fn dim(&self) -> usize {
        2 * self.grid.len()
    }

    /// Matrix-free `H₀ψ` with exact spectral derivatives.
    pub fn apply(&self, psi: &SpinorField) -> SpinorField {
        let g = self.grid;
        let inv_2m = 0.5 / self.trap.mass;
        let gamma = self.trap.gamma;
        let mut a = psi.psi1.clone();
        let mut b = psi.psi2.clone();
        g.apply_symbol(&mut a, |j| {
            ONE * (inv_2m * g.k[j] * g.k[j] - gamma * g.k_deriv[j])
        });
        g.apply_symbol(&mut b, |j| {
            ONE * (inv_2m * g.k[j] * g.k[j] + gamma * g.k_deriv[j])
        });
        let omega = self.trap.omega_rabi;
        for j in 0..g.len() {
            a[j] += self.potential[j] * psi.psi1[j] + omega * psi.psi2[j];
            b[j] += self.potential[j] * psi.psi2[j] + omega * psi.psi1[j];
        }
        SpinorField::new(a, b)
    }

    /// Real symmetric matrix of `U H₀ U†`, dimension `2n`.
    pub fn dense_rotated(&self) -> DMatrix<f64> {
        let n = self.grid.len();
        let length = n as f64 * self.grid.dx;
        let (d1, d2) = derivative_matrices(n, length);
        let inv_2m = 0.5 / self.trap.mass;
        let (gamma, omega) = (self.trap.gamma, self.trap.omega_rabi);
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        for j in 0..n {
            for l in 0..n {
                let kin = -inv_2m * d2[(j, l)];
                h[(j, l)] = kin;
                h[(n + j, n + l)] = kin;
                h[(j, n + l)] = -gamma * d1[(j, l)];
                h[(n + j, l)] = gamma * d1[(j, l)];
            }
            h[(j, j)] += self.potential[j];
            h[(n + j, n + j)] += self.potential[j];
            h[(j, n + j)] += omega;
            h[(n + j, j)] += omega;
        }
        h
    }

    /// Complex Hermitian matrix of `H₀` in the original spin frame.
    pub fn dense(&self) -> DMatrix<Complex64> {
        let n = self.grid.len();
        let length = n as f64 * self.grid.dx;
        let (d1, d2) = derivative_matrices(n, length);
        let inv_2m = 0.5 / self.trap.mass;
        let (gamma, omega) = (self.trap.gamma, self.trap.omega_rabi);
        let mut h = DMatrix::from_element(2 * n, 2 * n, Complex64::new(0.0, 0.0));
        for j in 0..n {
            for l in 0..n {
                let kin = -inv_2m * d2[(j, l)];
                // −γσ_z p = iγσ_z d/dx
                h[(j, l)] = Complex64::new(kin, gamma * d1[(j, l)]);
                h[(n + j, n + l)] = Complex64::new(kin, -gamma * d1[(j, l)]);
            }
            h[(j, j)] += self.potential[j];
            h[(n + j, n + j)] += self.potential[j];
            h[(j, n + j)] += omega;
            h[(n + j, j)] += omega;
        }
        h
    }

    /// Lowest `count` eigenvalues only.
    pub fn lowest_energies(&self, count: usize) -> Vec<f64> {
        let mut ev: Vec<f64> = self.dense_rotated().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev.truncate(count);
        ev
    }
}

/// Largest `|H − H†|` element.
pub fn hermiticity_residual(h: &DMatrix<Complex64>) -> f64 {
    let n = h.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for l in j..n {
            worst = worst.max((h[(j, l)] - h[(l, j)].conj()).norm());
        }
    }
    worst
}

/// Unadapted eigenpair of `H₀`.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub energy: f64,
    pub field: SpinorField,
    /// `‖H₀ψ − εψ‖`.
    pub residual: f64,
}

/// Bottom of the free lower band `min_p [p²/2m − (γ²p² + Ω²)^{1/2}]`.
///
/// With spin-orbit coupling and Zeeman splitting the continuum starts below
/// zero, so "bound" means below this edge rather than `ε < 0`.
pub fn continuum_threshold(trap: &TrapParams) -> f64 {
    let mg2 = trap.mass * trap.gamma * trap.gamma;
    let om = trap.omega_rabi.abs();
    if mg2 > om {
        -0.5 * mg2 - om * om / (2.0 * mg2)
    } else {
        -om
    }
}

/// The `count` lowest eigenpairs, ascending; all must lie below the continuum.
pub fn bound_states(h: &Hamiltonian<'_>, count: usize) -> Result<Vec<EigenPair>> {
    let n = h.grid.len();
    let dx = h.grid.dx;
    let eig = SymmetricEigen::new(h.dense_rotated());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let edge = continuum_threshold(&h.trap);
    let bound = eig.eigenvalues.iter().filter(|&&e| e < edge).count();
    if bound < count {
        return Err(Error::InsufficientBoundStates {
            found: bound,
            needed: count,
        });
    }

    let inv = 1.0 / dx.sqrt();
    let pairs = order
        .iter()
        .take(count)
        .map(|&idx| {
            let col = eig.eigenvectors.column(idx);
            // ψ = U†φ, U† = (1 + iσ_x)/√2
            let mut field = SpinorField::zeros(n);
            for j in 0..n {
                let (p1, p2) = (col[j], col[n + j]);
                field.psi1[j] = Complex64::new(p1, p2) * (FRAC_1_SQRT_2 * inv);
                field.psi2[j] = Complex64::new(p2, p1) * (FRAC_1_SQRT_2 * inv);
            }
            field.normalize(dx);
            let energy = eig.eigenvalues[idx];
            let mut r = h.apply(&field);
            r.axpy(Complex64::new(-energy, 0.0), &field);
            EigenPair {
                energy,
                residual: r.norm_sqr(dx).sqrt(),
                field,
            }
        })
        .collect();
    Ok(pairs)
}

/// A symmetry-adapted bound state `|ij⟩`.
#[derive(Clone, Debug)]
pub struct EigenState {
    pub energy: f64,
    pub field: SpinorField,
    /// 1 = lower pair, 2 = upper pair.
    pub pair: u8,
    /// 1 = lower level within the pair, 2 = upper.
    pub level: u8,
    /// Eigenvalues of α̂₁, α̂₂, α̂₃ on this state (α̂₂ is fixed to +1).
    pub signature: [i8; 3],
    /// `‖α̂_nψ − s_nψ‖` for n = 1, 2, 3.
    pub symmetry_defect: [f64; 3],
    pub residual: f64,
}

impl EigenState {
    pub fn alpha3_even(&self) -> bool {
        self.signature[2] > 0
    }
}

fn alpha3_matrix_element(a: &SpinorField, b: &SpinorField, grid: &Grid) -> Complex64 {
    a.inner(&b.apply_symmetry(Symmetry::Alpha3, grid), grid.dx)
}

/// Rotates a (near-)degenerate pair so both members are α̂₃ eigenstates.
fn diagonalize_alpha3(a: &SpinorField, b: &SpinorField, grid: &Grid) -> (SpinorField, SpinorField) {
    let aa = alpha3_matrix_element(a, a, grid).re;
    let bb = alpha3_matrix_element(b, b, grid).re;
    let ab = alpha3_matrix_element(a, b, grid);
    // Hermitian 2×2 [[aa, ab], [ab*, bb]]
    let half_diff = 0.5 * (aa - bb);
    let r = (half_diff * half_diff + ab.norm_sqr()).sqrt();
    if ab.norm() < 1e-14 {
        return (a.clone(), b.clone());
    }
    let mean = 0.5 * (aa + bb);
    let lam = mean + r;
    // eigenvector (ab, lam − aa)
    let v0 = ab;
    let v1 = Complex64::new(lam - aa, 0.0);
    let nv = (v0.norm_sqr() + v1.norm_sqr()).sqrt();
    let (c0, c1) = (v0 / nv, v1 / nv);
    // orthogonal partner (−c1*, c0*)
    let even = SpinorField::combine(c0, a, c1, b);
    let odd = SpinorField::combine(-c1.conj(), a, c0.conj(), b);
    (even, odd)
}

/// Fixes phases so each state is α̂₂-invariant and records the α̂₃ signature.
///
/// α̂₂-invariant states of a localized pair carry opposite α̂₃ (hence α̂₁)
/// signatures, which is what makes `(|e⟩ ± |o⟩)/√2` one-sided.
pub fn symmetry_adapt(pairs: &[EigenPair], grid: &Grid) -> Result<Vec<EigenState>> {
    assert_eq!(pairs.len(), 4, "symmetry adaptation expects four states");
    let dx = grid.dx;
    let e: Vec<f64> = pairs.iter().map(|p| p.energy).collect();
    let delta = 0.25 * (e[2] + e[3] - e[0] - e[1]);
    let tol_deg = TOL_DEGENERATE * delta.abs();

    let mut fields: Vec<SpinorField> = pairs.iter().map(|p| p.field.clone()).collect();
    for pair in 0..2 {
        let (lo, hi) = (2 * pair, 2 * pair + 1);
        if (e[hi] - e[lo]).abs() < tol_deg {
            log::debug!("pair {} degenerate (gap {:.3e}); diagonalizing α̂₃", pair + 1, e[hi] - e[lo]);
            let (a, b) = diagonalize_alpha3(&fields[lo], &fields[hi], grid);
            fields[lo] = a;
            fields[hi] = b;
        }
    }

    let mut out = Vec::with_capacity(4);
    for (idx, (field, src)) in fields.into_iter().zip(pairs).enumerate() {
        let image = field.apply_symmetry(Symmetry::Alpha2, grid);
        let mut sym = SpinorField::combine(ONE, &field, ONE, &image);
        if sym.norm_sqr(dx) < 1e-6 {
            sym = SpinorField::combine(I, &field, -I, &image);
        }
        if sym.norm_sqr(dx) < 1e-6 {
            return Err(Error::NullSymmetrization { index: idx });
        }
        sym.normalize(dx);

        let s2 = sym.inner(&sym.apply_symmetry(Symmetry::Alpha2, grid), dx).re;
        let s3 = alpha3_matrix_element(&sym, &sym, grid).re;
        if (s3.abs() - 1.0).abs() > 1e-4 {
            return Err(Error::SymmetryStructure(format!(
                "state {idx} is not an α̂₃ eigenstate (⟨α̂₃⟩ = {s3:.6})"
            )));
        }
        let sign3: i8 = if s3 > 0.0 { 1 } else { -1 };
        if s3 < 0.0 {
            log::debug!("state {idx}: symmetry signature −1 under α̂₁ and α̂₃");
        }
        let signature = [sign3, if s2 > 0.0 { 1 } else { -1 }, sign3];
        let mut defect = [0.0; 3];
        for (n, op) in Symmetry::ALL.into_iter().enumerate() {
            let target = sym.scaled(Complex64::new(signature[n] as f64, 0.0));
            defect[n] = sym.apply_symmetry(op, grid).distance(&target, dx);
        }
        out.push(EigenState {
            energy: src.energy,
            field: sym,
            pair: (idx / 2 + 1) as u8,
            level: (idx % 2 + 1) as u8,
            signature,
            symmetry_defect: defect,
            residual: src.residual,
        });
    }
    Ok(out)
}

/// Localized modes in the order `|1−⟩, |1+⟩, |2−⟩, |2+⟩`.
#[derive(Clone, Debug)]
pub struct WellBasis {
    pub modes: [SpinorField; 4],
    pub left_mass: [f64; 4],
    /// `⟨i−|H₀|i+⟩ = (ε_even − ε_odd)/2` for i = 1, 2.
    pub tunneling: [f64; 2],
    pub weakly_localized: bool,
}

pub const MODE_LABELS: [&str; 4] = ["1-", "1+", "2-", "2+"];

/// Builds `|i±⟩ = (|e⟩ ± |o⟩)/√2` from the α̂₃-even/odd member of each pair,
/// with the sign of `|o⟩` chosen so that `|i−⟩` sits in the left well.
/// Flips the stored odd state accordingly.
pub fn well_basis(states: &mut [EigenState], grid: &Grid) -> Result<WellBasis> {
    let dx = grid.dx;
    let mut modes = Vec::with_capacity(4);
    let mut left_mass = [0.0; 4];
    let mut tunneling = [0.0; 2];
    let mut weak = false;
    for pair in 0..2 {
        let (lo, hi) = (2 * pair, 2 * pair + 1);
        let (ie, io) = match (states[lo].alpha3_even(), states[hi].alpha3_even()) {
            (true, false) => (lo, hi),
            (false, true) => (hi, lo),
            _ => {
                return Err(Error::SymmetryStructure(format!(
                    "pair {} has equal α̂₃ signatures; cannot form localized combinations",
                    pair + 1
                )))
            }
        };
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let mut minus = SpinorField::combine(h, &states[ie].field, -h, &states[io].field);
        if left_probability(&minus, grid) < 0.5 {
            states[io].field.scale(-ONE);
            minus = SpinorField::combine(h, &states[ie].field, -h, &states[io].field);
        }
        let plus = SpinorField::combine(h, &states[ie].field, h, &states[io].field);
        let (lm, lp) = (left_probability(&minus, grid), left_probability(&plus, grid));
        if lm.max(lp) < 0.6 {
            log::warn!("weak localization in pair {}: left mass {:.3}", pair + 1, lm);
            weak = true;
        }
        left_mass[2 * pair] = lm;
        left_mass[2 * pair + 1] = lp;
        tunneling[pair] = 0.5 * (states[ie].energy - states[io].energy);
        let _ = dx;
        modes.push(minus);
        modes.push(plus);
    }
    let modes: [SpinorField; 4] = modes.try_into().expect("four modes");
    Ok(WellBasis {
        modes,
        left_mass,
        tunneling,
        weakly_localized: weak,
    })
}

/// Bound states, well basis, and mean energy for one trap.
#[derive(Clone, Debug)]
pub struct StationarySet {
    pub states: Vec<EigenState>,
    pub basis: WellBasis,
    pub e0: f64,
}

impl StationarySet {
    pub fn compute(grid: &Grid, trap: &TrapParams) -> Result<Self> {
        let h = discretize_hamiltonian(grid, trap)?;
        let pairs = bound_states(&h, 4)?;
        let mut states = symmetry_adapt(&pairs, grid)?;
        let basis = well_basis(&mut states, grid)?;
        let e0 = states.iter().map(|s| s.energy).sum::<f64>() / 4.0;
        Ok(Self { states, basis, e0 })
    }

    pub fn energies(&self) -> [f64; 4] {
        [
            self.states[0].energy,
            self.states[1].energy,
            self.states[2].energy,
            self.states[3].energy,
        ]
    }

    /// Gram matrix of the eigenstates or of the well basis.
    pub fn gram(fields: &[&SpinorField], dx: f64) -> Vec<Vec<Complex64>> {
        fields
            .iter()
            .map(|a| fields.iter().map(|b| a.inner(b, dx)).collect())
            .collect()
    }
}

/// Reduced-model scalars.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FourModeCoefficients {
    #[serde(rename = "Delta")]
    pub delta: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// Signed tunneling `⟨i−|H₀|i+⟩`; `|j_i| = δ_i`.
    pub j1: f64,
    pub j2: f64,
    pub v1: f64,
    pub v2: f64,
    pub u: f64,
    pub w: f64,
    #[serde(rename = "E0")]
    pub e0: f64,
    pub structure_residual: f64,
}

impl FourModeCoefficients {
    /// Coefficients with the tunneling signs taken positive.
    pub fn from_scalars(delta: f64, delta1: f64, delta2: f64, v1: f64, v2: f64, u: f64, w: f64) -> Self {
        Self {
            delta,
            delta1,
            delta2,
            j1: delta1,
            j2: delta2,
            v1,
            v2,
            u,
            w,
            e0: 0.0,
            structure_residual: 0.0,
        }
    }

    /// The overlap pattern `⟨iα|Ṽ|jβ⟩` implied by the scalars.
    pub fn structured_overlap(&self) -> [[f64; 4]; 4] {
        let (v1, v2, u, w) = (self.v1, self.v2, self.u, self.w);
        [
            [v1, 0.0, u, -w],
            [0.0, -v1, w, -u],
            [u, w, v2, 0.0],
            [-w, -u, 0.0, -v2],
        ]
    }
}

/// Full `⟨iα|Ṽ|jβ⟩` in the order `(1−, 1+, 2−, 2+)`.
pub fn overlap_matrix(basis: &WellBasis, pot: &PotentialPair, grid: &Grid) -> [[Complex64; 4]; 4] {
    let mut m = [[Complex64::new(0.0, 0.0); 4]; 4];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, entry) in row.iter_mut().enumerate() {
            *entry = basis.modes[r].matrix_element(&pot.v_mod, &basis.modes[c], grid.dx);
        }
    }
    m
}

pub fn four_mode_coefficients(
    set: &StationarySet,
    pot: &PotentialPair,
    grid: &Grid,
) -> Result<FourModeCoefficients> {
    let m = overlap_matrix(&set.basis, pot, grid);
    let e = set.energies();
    let mut coeffs = FourModeCoefficients {
        delta: 0.25 * (e[3] + e[2] - e[1] - e[0]),
        delta1: 0.5 * (e[1] - e[0]),
        delta2: 0.5 * (e[3] - e[2]),
        j1: set.basis.tunneling[0],
        j2: set.basis.tunneling[1],
        v1: m[0][0].re,
        v2: m[2][2].re,
        u: m[0][2].re,
        w: -m[0][3].re,
        e0: set.e0,
        structure_residual: 0.0,
    };
    let expected = coeffs.structured_overlap();
    let mut residual = 0.0f64;
    for r in 0..4 {
        for c in 0..4 {
            residual = residual.max((m[r][c] - expected[r][c]).norm());
        }
    }
    coeffs.structure_residual = residual;
    let scale = [coeffs.v1, coeffs.v2, coeffs.u, coeffs.w]
        .iter()
        .fold(0.0f64, |a, b| a.max(b.abs()));
    if residual > 1e-6 * scale {
        return Err(Error::SymmetryStructure(format!(
            "overlap matrix deviates from the four-mode pattern by {residual:.3e} (scale {scale:.3e})"
        )));
    }
    Ok(coeffs)
}

/// Everything the reduced model needs from one trap.
pub fn coefficients_for(grid: &Grid, trap: &TrapParams) -> Result<(StationarySet, FourModeCoefficients)> {
    let set = StationarySet::compute(grid, trap)?;
    let pot = double_well(grid, trap)?;
    let coeffs = four_mode_coefficients(&set, &pot, grid)?;
    Ok((set, coeffs))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub gamma: f64,
    pub lower_gap: f64,
    pub upper_gap: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelPair {
    Lower,
    Upper,
}

fn gaps_at(grid: &Grid, trap: &TrapParams, gamma: f64) -> Result<GapRow> {
    let t = trap.with_gamma(gamma);
    let h = discretize_hamiltonian(grid, &t)?;
    let e = h.lowest_energies(4);
    let edge = continuum_threshold(&t);
    if e.len() < 4 || e[3] >= edge {
        return Err(Error::InsufficientBoundStates {
            found: e.iter().filter(|&&v| v < edge).count(),
            needed: 4,
        });
    }
    Ok(GapRow {
        gamma,
        lower_gap: (e[1] - e[0]).abs(),
        upper_gap: (e[3] - e[2]).abs(),
    })
}

/// `(|ε₁₂ − ε₁₁|, |ε₂₂ − ε₂₁|)` for each γ, computed in parallel.
pub fn gap_scan(gammas: &[f64], grid: &Grid, trap: &TrapParams) -> Result<Vec<GapRow>> {
    gammas.par_iter().map(|&g| gaps_at(grid, trap, g)).collect()
}

/// γ minimizing one pair's gap: discrete argmin of `table`, then golden-section
/// refinement on the neighbouring bracket down to `tol`.
pub fn minimize_gap(
    table: &[GapRow],
    which: LevelPair,
    grid: &Grid,
    trap: &TrapParams,
    tol: f64,
) -> Result<f64> {
    let pick = |r: &GapRow| match which {
        LevelPair::Lower => r.lower_gap,
        LevelPair::Upper => r.upper_gap,
    };
    let best = (0..table.len())
        .min_by(|&a, &b| pick(&table[a]).total_cmp(&pick(&table[b])))
        .ok_or_else(|| Error::Config("empty gap table".into()))?;
    let mut lo = table[best.saturating_sub(1)].gamma;
    let mut hi = table[(best + 1).min(table.len() - 1)].gamma;
    let eval = |g: f64| gaps_at(grid, trap, g).map(|r| pick(&r));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let (mut fa, mut fb) = (eval(a)?, eval(b)?);
    while hi - lo > tol {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = eval(a)?;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = eval(b)?;
        }
    }
    Ok(0.5 * (lo + hi))
}
