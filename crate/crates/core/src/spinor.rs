//! Two-component spinor fields on a [`Grid`] and the antiunitary/unitary
//! symmetries of the static Hamiltonian.

use num_complex::Complex64;

use crate::grid::Grid;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Pseudo-spin spinor `(Ψ₁, Ψ₂)` sampled on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinorField {
    pub psi1: Vec<Complex64>,
    pub psi2: Vec<Complex64>,
}

/// Symmetry operators of `H₀`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symmetry {
    /// `PT`: ψ(x) → ψ*(−x).
    Alpha1,
    /// `σ_x T`: ψ(x) → σ_x ψ*(x).
    Alpha2,
    /// `σ_x P`: ψ(x) → σ_x ψ(−x).
    Alpha3,
}

impl Symmetry {
    pub const ALL: [Symmetry; 3] = [Symmetry::Alpha1, Symmetry::Alpha2, Symmetry::Alpha3];
}

impl SpinorField {
    pub fn zeros(n: usize) -> Self {
        Self {
            psi1: vec![ZERO; n],
            psi2: vec![ZERO; n],
        }
    }

    pub fn new(psi1: Vec<Complex64>, psi2: Vec<Complex64>) -> Self {
        assert_eq!(psi1.len(), psi2.len(), "spinor components differ in length");
        Self { psi1, psi2 }
    }

    /// `g(x)·(c₁, c₂)ᵀ` for a scalar profile.
    pub fn from_profile(profile: &[Complex64], c1: Complex64, c2: Complex64) -> Self {
        Self {
            psi1: profile.iter().map(|&g| g * c1).collect(),
            psi2: profile.iter().map(|&g| g * c2).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.psi1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi1.is_empty()
    }

    /// `Ψ†Ψ` at every grid point.
    pub fn density(&self) -> Vec<f64> {
        self.psi1
            .iter()
            .zip(&self.psi2)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .collect()
    }

    pub fn norm_sqr(&self, dx: f64) -> f64 {
        self.psi1
            .iter()
            .zip(&self.psi2)
            .map(|(a, b)| a.norm_sqr() + b.norm_sqr())
            .sum::<f64>()
            * dx
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &SpinorField, dx: f64) -> Complex64 {
        let mut acc = ZERO;
        for j in 0..self.len() {
            acc += self.psi1[j].conj() * other.psi1[j] + self.psi2[j].conj() * other.psi2[j];
        }
        acc * dx
    }

    /// `⟨self|W|other⟩` for a scalar diagonal operator `W(x)`.
    pub fn matrix_element(&self, weight: &[f64], other: &SpinorField, dx: f64) -> Complex64 {
        let mut acc = ZERO;
        for (j, &w) in weight.iter().enumerate() {
            acc += (self.psi1[j].conj() * other.psi1[j] + self.psi2[j].conj() * other.psi2[j]) * w;
        }
        acc * dx
    }

    pub fn scale(&mut self, s: Complex64) {
        for v in self.psi1.iter_mut().chain(self.psi2.iter_mut()) {
            *v *= s;
        }
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(s);
        out
    }

    /// `self += s·other`.
    pub fn axpy(&mut self, s: Complex64, other: &SpinorField) {
        for (a, b) in self.psi1.iter_mut().zip(&other.psi1) {
            *a += s * b;
        }
        for (a, b) in self.psi2.iter_mut().zip(&other.psi2) {
            *a += s * b;
        }
    }

    /// `a·x + b·y`.
    pub fn combine(a: Complex64, x: &SpinorField, b: Complex64, y: &SpinorField) -> Self {
        let mut out = x.scaled(a);
        out.axpy(b, y);
        out
    }

    /// Normalizes to unit norm; returns the norm before normalization.
    pub fn normalize(&mut self, dx: f64) -> f64 {
        let n = self.norm_sqr(dx).sqrt();
        if n > 0.0 {
            self.scale(Complex64::new(1.0 / n, 0.0));
        }
        n
    }

    /// `‖self − other‖` in the grid L² norm.
    pub fn distance(&self, other: &SpinorField, dx: f64) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.len() {
            acc += (self.psi1[j] - other.psi1[j]).norm_sqr() + (self.psi2[j] - other.psi2[j]).norm_sqr();
        }
        (acc * dx).sqrt()
    }

    pub fn apply_symmetry(&self, op: Symmetry, grid: &Grid) -> SpinorField {
        let n = self.len();
        let mut out = SpinorField::zeros(n);
        for j in 0..n {
            let m = grid.mirror(j);
            let (a, b) = match op {
                Symmetry::Alpha1 => (self.psi1[m].conj(), self.psi2[m].conj()),
                Symmetry::Alpha2 => (self.psi2[j].conj(), self.psi1[j].conj()),
                Symmetry::Alpha3 => (self.psi2[m], self.psi1[m]),
            };
            out.psi1[j] = a;
            out.psi2[j] = b;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.psi1
            .iter()
            .chain(&self.psi2)
            .all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

/// Mean spin `(S_x, S_y, S_z) = ⟨σ⟩/2`, normalized by the field's norm.
pub fn spin_expectation(field: &SpinorField, dx: f64) -> [f64; 3] {
    let mut cross = ZERO;
    let mut up = 0.0;
    let mut down = 0.0;
    for (a, b) in field.psi1.iter().zip(&field.psi2) {
        cross += a.conj() * b;
        up += a.norm_sqr();
        down += b.norm_sqr();
    }
    let norm = (up + down) * dx;
    if norm == 0.0 {
        return [0.0; 3];
    }
    let cross = cross * dx;
    [cross.re / norm, cross.im / norm, 0.5 * (up - down) * dx / norm]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn gaussian(grid: &Grid, x0: f64, k0: f64) -> Vec<Complex64> {
        grid.x
            .iter()
            .map(|&x| Complex64::from_polar((-(x - x0).powi(2)).exp(), k0 * x))
            .collect()
    }

    #[test]
    fn sigma_x_eigenvector_has_full_x_spin() {
        let grid = Grid::new(GridSpec::default()).unwrap();
        let g = gaussian(&grid, 0.3, 0.0);
        let mut f = SpinorField::from_profile(&g, Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        f.normalize(grid.dx);
        let s = spin_expectation(&f, grid.dx);
        assert_abs_diff_eq!(s[0], 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(s[1], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s[2], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn sigma_y_and_sigma_z_eigenvectors() {
        let grid = Grid::new(GridSpec::default()).unwrap();
        let g = gaussian(&grid, 0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let fy = SpinorField::from_profile(&g, one, i);
        assert_abs_diff_eq!(spin_expectation(&fy, grid.dx)[1], 0.5, epsilon = 1e-14);
        let fz = SpinorField::from_profile(&g, Complex64::new(0.0, 0.0), one);
        assert_abs_diff_eq!(spin_expectation(&fz, grid.dx)[2], -0.5, epsilon = 1e-14);
    }

    proptest! {
        #[test]
        fn symmetries_are_involutions_and_form_klein_group(
            x0 in -2.0f64..2.0, k0 in -3.0f64..3.0, re in -1.0f64..1.0, im in -1.0f64..1.0
        ) {
            let grid = Grid::new(GridSpec::symmetric(8.0, 64)).unwrap();
            let g = gaussian(&grid, x0, k0);
            let f = SpinorField::from_profile(&g, Complex64::new(1.0, 0.2), Complex64::new(re, im));
            for op in Symmetry::ALL {
                let twice = f.apply_symmetry(op, &grid).apply_symmetry(op, &grid);
                prop_assert!(twice.distance(&f, grid.dx) < 1e-14);
            }
            // α₁α₂ = α₃
            let a12 = f.apply_symmetry(Symmetry::Alpha2, &grid).apply_symmetry(Symmetry::Alpha1, &grid);
            let a3 = f.apply_symmetry(Symmetry::Alpha3, &grid);
            prop_assert!(a12.distance(&a3, grid.dx) < 1e-14);
            // norm preserved
            let n0 = f.norm_sqr(grid.dx);
            for op in Symmetry::ALL {
                prop_assert!((f.apply_symmetry(op, &grid).norm_sqr(grid.dx) - n0).abs() < 1e-12 * n0);
            }
        }

        #[test]
        fn spin_components_bounded(
            re1 in -1.0f64..1.0, im1 in -1.0f64..1.0, re2 in -1.0f64..1.0, im2 in -1.0f64..1.0
        ) {
            prop_assume!(re1.abs() + im1.abs() + re2.abs() + im2.abs() > 1e-3);
            let grid = Grid::new(GridSpec::symmetric(8.0, 64)).unwrap();
            let g = gaussian(&grid, 0.5, 1.0);
            let f = SpinorField::from_profile(&g, Complex64::new(re1, im1), Complex64::new(re2, im2));
            let s = spin_expectation(&f, grid.dx);
            let len = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
            prop_assert!(len <= 0.5 + 1e-12);
        }
    }
}
