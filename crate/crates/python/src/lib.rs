//! Python bindings: trap parameters, stationary states and coefficients,
//! continuous propagation, four-mode Floquet analysis, and frequency scans.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use socdw::dynamics::{evolve as evolve_core, initial_state, PropagationConfig, Projection};
use socdw::fourmode::{crossing_frequencies, floquet_at, resonance_frequencies};
use socdw::grid::{double_well, Grid, GridSpec, TrapParams};
use socdw::scan::{frequency_scan, Backend, FeatureKind, InputState, ScanConfig};
use socdw::spinor::spin_expectation;
use socdw::stationary::{coefficients_for, FourModeCoefficients, MODE_LABELS};

fn to_py(e: socdw::Error) -> PyErr {
    match e {
        socdw::Error::Config(_) | socdw::Error::Parse { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Double-well trap with spin-orbit coupling and out-of-phase depth modulation.
#[pyclass(name = "Trap", get_all, set_all, from_py_object)]
#[derive(Clone, Copy)]
struct PyTrap {
    depth: f64,
    width: f64,
    separation: f64,
    omega_rabi: f64,
    gamma: f64,
    f: f64,
    omega: f64,
    mass: f64,
    x_max: f64,
    n_points: usize,
}

#[pymethods]
impl PyTrap {
    #[new]
    #[pyo3(signature = (gamma = 0.8, f = 0.0, omega = 1.0, **overrides))]
    fn new(gamma: f64, f: f64, omega: f64, overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let d = TrapParams::default();
        let g = GridSpec::default();
        let mut t = Self {
            depth: d.depth,
            width: d.width,
            separation: d.separation,
            omega_rabi: d.omega_rabi,
            gamma,
            f,
            omega,
            mass: d.mass,
            x_max: g.x_max,
            n_points: g.n_points,
        };
        if let Some(kw) = overrides {
            for (k, v) in kw.iter() {
                let key: String = k.extract()?;
                match key.as_str() {
                    "depth" => t.depth = v.extract()?,
                    "width" => t.width = v.extract()?,
                    "separation" => t.separation = v.extract()?,
                    "omega_rabi" => t.omega_rabi = v.extract()?,
                    "mass" => t.mass = v.extract()?,
                    "x_max" => t.x_max = v.extract()?,
                    "n_points" => t.n_points = v.extract()?,
                    other => return Err(PyValueError::new_err(format!("unknown trap parameter {other:?}"))),
                }
            }
        }
        t.trap().validate().map_err(to_py)?;
        t.grid_spec().validate().map_err(to_py)?;
        Ok(t)
    }

    fn __repr__(&self) -> String {
        format!(
            "Trap(gamma={}, f={}, omega={}, depth={}, width={}, separation={}, omega_rabi={})",
            self.gamma, self.f, self.omega, self.depth, self.width, self.separation, self.omega_rabi
        )
    }

    /// Four bound states and the localized basis.
    fn states<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let grid = self.grid()?;
        let (set, _) = coefficients_for(&grid, &self.trap()).map_err(to_py)?;
        let out = PyDict::new(py);
        out.set_item("energies", set.energies().to_vec())?;
        out.set_item("e0", set.e0)?;
        out.set_item("x", grid.x.clone())?;
        let modes = PyDict::new(py);
        for (label, (m, left)) in MODE_LABELS.iter().zip(set.basis.modes.iter().zip(set.basis.left_mass)) {
            let d = PyDict::new(py);
            d.set_item("spin", spin_expectation(m, grid.dx).to_vec())?;
            d.set_item("left_mass", left)?;
            d.set_item("density", m.density())?;
            modes.set_item(*label, d)?;
        }
        out.set_item("modes", modes)?;
        Ok(out)
    }

    fn coefficients(&self) -> PyResult<Coefficients> {
        let grid = self.grid()?;
        let (_, c) = coefficients_for(&grid, &self.trap()).map_err(to_py)?;
        Ok(Coefficients(c))
    }

    /// Continuous propagation from `c1|1−⟩ + c2|2−⟩`.
    #[pyo3(signature = (t_final = 1000.0, dt = 0.0025, sample_every = 40, g = 0.0, c1 = 1.0, c2 = 0.0))]
    fn evolve<'py>(
        &self,
        py: Python<'py>,
        t_final: f64,
        dt: f64,
        sample_every: usize,
        g: f64,
        c1: f64,
        c2: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let grid = self.grid()?;
        let trap = self.trap();
        let (set, _) = coefficients_for(&grid, &trap).map_err(to_py)?;
        let pot = double_well(&grid, &trap).map_err(to_py)?;
        let amps = InputState { c1, c2 }.amplitudes().map_err(to_py)?;
        let psi0 = initial_state(&set.basis, amps, grid.dx);
        let cfg = PropagationConfig { dt, t_final, sample_every, g };
        let proj = Projection { basis: &set.basis, e0: set.e0 };
        let traj = py
            .detach(|| evolve_core(&psi0, &grid, &trap, &pot, &cfg, Some(proj)))
            .map_err(to_py)?;
        let out = PyDict::new(py);
        out.set_item("t", traj.times.clone())?;
        out.set_item("norm", traj.norm.clone())?;
        out.set_item("p_left", traj.p_left.clone())?;
        out.set_item("p_left_avg", traj.p_left_avg.clone())?;
        for (i, name) in ["sx", "sy", "sz"].iter().enumerate() {
            out.set_item(*name, traj.spins.iter().map(|s| s[i]).collect::<Vec<_>>())?;
        }
        if let Some(modes) = &traj.mode_amplitudes {
            for (i, label) in MODE_LABELS.iter().enumerate() {
                let pop: Vec<f64> = modes.iter().map(|c| c[i].norm_sqr()).collect();
                out.set_item(format!("pop_{label}"), pop)?;
            }
        }
        Ok(out)
    }

    /// Frequency scan of the time-averaged left probability.
    #[pyo3(signature = (omega_min = 0.5, omega_max = 2.0, omega_step = 0.005, backend = "fourmode", c1 = 1.0, c2 = 0.0, t_final = 1000.0, g = 0.0, level = 0.7))]
    #[allow(clippy::too_many_arguments)]
    fn scan<'py>(
        &self,
        py: Python<'py>,
        omega_min: f64,
        omega_max: f64,
        omega_step: f64,
        backend: &str,
        c1: f64,
        c2: f64,
        t_final: f64,
        g: f64,
        level: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let backend: Backend = backend.parse().map_err(to_py)?;
        let cfg = ScanConfig {
            backend,
            omega_min,
            omega_max,
            omega_step,
            input: InputState { c1, c2 },
            trap: self.trap(),
            grid: self.grid_spec(),
            propagation: PropagationConfig { t_final, g, ..PropagationConfig::default() },
            level,
            edge_tol: 0.0,
        };
        let r = py.detach(|| frequency_scan(&cfg)).map_err(to_py)?;
        let out = PyDict::new(py);
        out.set_item("omega", r.points.iter().map(|p| p.omega).collect::<Vec<_>>())?;
        out.set_item("p_left_avg", r.points.iter().map(|p| p.p_left_avg).collect::<Vec<_>>())?;
        let feats: Vec<(String, f64, f64, Option<f64>, bool)> = r
            .features
            .iter()
            .map(|f| {
                let kind = match f.kind {
                    FeatureKind::Peak => "peak",
                    FeatureKind::Dip => "dip",
                };
                (kind.to_string(), f.center, f.value, f.width, f.truncated)
            })
            .collect();
        out.set_item("features", feats)?;
        Ok(out)
    }
}

impl PyTrap {
    fn trap(&self) -> TrapParams {
        TrapParams {
            depth: self.depth,
            width: self.width,
            separation: self.separation,
            omega_rabi: self.omega_rabi,
            gamma: self.gamma,
            f: self.f,
            omega: self.omega,
            mass: self.mass,
        }
    }

    fn grid_spec(&self) -> GridSpec {
        GridSpec { x_min: -self.x_max, x_max: self.x_max, n_points: self.n_points }
    }

    fn grid(&self) -> PyResult<Grid> {
        Grid::new(self.grid_spec()).map_err(to_py)
    }
}

/// Four-mode model coefficients.
#[pyclass(from_py_object)]
#[derive(Clone, Copy)]
struct Coefficients(FourModeCoefficients);

#[pymethods]
impl Coefficients {
    #[new]
    #[pyo3(signature = (delta, delta1, delta2, v1, v2, u, w))]
    fn new(delta: f64, delta1: f64, delta2: f64, v1: f64, v2: f64, u: f64, w: f64) -> Self {
        Self(FourModeCoefficients::from_scalars(delta, delta1, delta2, v1, v2, u, w))
    }

    #[getter]
    fn delta(&self) -> f64 {
        self.0.delta
    }
    #[getter]
    fn delta1(&self) -> f64 {
        self.0.delta1
    }
    #[getter]
    fn delta2(&self) -> f64 {
        self.0.delta2
    }
    #[getter]
    fn v1(&self) -> f64 {
        self.0.v1
    }
    #[getter]
    fn v2(&self) -> f64 {
        self.0.v2
    }
    #[getter]
    fn u(&self) -> f64 {
        self.0.u
    }
    #[getter]
    fn w(&self) -> f64 {
        self.0.w
    }
    #[getter]
    fn e0(&self) -> f64 {
        self.0.e0
    }

    fn __repr__(&self) -> String {
        let c = &self.0;
        format!(
            "Coefficients(delta={:.6}, delta1={:.3e}, delta2={:.3e}, v1={:.4}, v2={:.4}, u={:.3e}, w={:.5})",
            c.delta, c.delta1, c.delta2, c.v1, c.v2, c.u, c.w
        )
    }

    /// Parametric resonances `2Δ/n`.
    #[pyo3(signature = (n_max = 4))]
    fn resonances(&self, n_max: usize) -> Vec<f64> {
        resonance_frequencies(&self.0, n_max)
    }

    /// Floquet phases `(λ₁..λ₄)` and the monodromy unitarity residual.
    fn floquet(&self, f: f64, omega: f64) -> PyResult<(Vec<f64>, f64)> {
        let r = floquet_at(&self.0, f, omega).map_err(to_py)?;
        Ok((r.phases.to_vec(), r.unitarity_residual))
    }

    /// Branch crossings `(omega, branch_a, branch_b, class)` in a window.
    #[pyo3(signature = (f, omega_min, omega_max, resolution = 5e-4))]
    fn crossings(
        &self,
        py: Python<'_>,
        f: f64,
        omega_min: f64,
        omega_max: f64,
        resolution: f64,
    ) -> PyResult<Vec<(f64, usize, usize, String)>> {
        let list = py
            .detach(|| crossing_frequencies(&self.0, f, omega_min, omega_max, resolution))
            .map_err(to_py)?;
        Ok(list
            .into_iter()
            .map(|c| (c.omega, c.branch_a + 1, c.branch_b + 1, c.class.label().to_string()))
            .collect())
    }
}

#[pymodule]
#[pyo3(name = "socdw")]
fn socdw_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyTrap>()?;
    m.add_class::<Coefficients>()?;
    Ok(())
}
