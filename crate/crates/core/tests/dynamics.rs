use num_complex::Complex64;
use proptest::prelude::*;
use socdw::dynamics::{evolve, initial_state, propagate_to, PropagationConfig, Projection};
use socdw::fourmode::{assemble, integrate_modes};
use socdw::grid::{double_well, Grid, GridSpec, TrapParams};
use socdw::spinor::SpinorField;
use socdw::stationary::coefficients_for;

type C = Complex64;

fn grid() -> Grid {
    Grid::new(GridSpec::default()).unwrap()
}

fn short(t_final: f64, g: f64) -> PropagationConfig {
    PropagationConfig {
        t_final,
        g,
        ..PropagationConfig::default()
    }
}

#[test]
fn continuous_modes_track_reduced_model_at_short_times() {
    let g = grid();
    let trap = TrapParams::default().with_gamma(0.8).with_drive(0.143, 1.0);
    let (set, coeffs) = coefficients_for(&g, &trap).unwrap();
    let pot = double_well(&g, &trap).unwrap();
    let c0 = [C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)];
    let psi0 = initial_state(&set.basis, c0, g.dx);
    let cfg = short(60.0, 0.0);
    let traj = evolve(
        &psi0,
        &g,
        &trap,
        &pot,
        &cfg,
        Some(Projection {
            basis: &set.basis,
            e0: set.e0,
        }),
    )
    .unwrap();
    let sys = assemble(&coeffs, trap.f, trap.omega);
    let reduced = integrate_modes(c0, &sys, cfg.t_final, cfg.sample_interval()).unwrap();
    let cont = traj.mode_amplitudes.as_ref().unwrap();
    assert_eq!(cont.len(), reduced.amplitudes.len());
    let mut worst: f64 = 0.0;
    for (a, b) in cont.iter().zip(&reduced.amplitudes) {
        for m in 0..4 {
            worst = worst.max((a[m].norm_sqr() - b[m].norm_sqr()).abs());
        }
    }
    assert!(worst < 0.02, "population mismatch {worst}");
    let residual = traj.continuum_residual.as_ref().unwrap();
    assert!(residual.iter().all(|r| *r < 0.05));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn norm_is_conserved(
        gamma in 0.3f64..1.8,
        f in 0.0f64..0.3,
        omega in 0.5f64..2.0,
        g in -0.2f64..0.2,
        mix in 0.0f64..1.0,
    ) {
        let grid = grid();
        let trap = TrapParams::default().with_gamma(gamma).with_drive(f, omega);
        let (set, _) = coefficients_for(&grid, &trap).unwrap();
        let pot = double_well(&grid, &trap).unwrap();
        let c = [C::new(mix.sqrt(), 0.0), C::new(0.0, 0.0), C::new(0.0, (1.0 - mix).sqrt()), C::new(0.0, 0.0)];
        let psi0 = initial_state(&set.basis, c, grid.dx);
        let traj = evolve(&psi0, &grid, &trap, &pot, &short(25.0, g), None).unwrap();
        prop_assert!(traj.max_norm_drift() < 1e-10, "drift {}", traj.max_norm_drift());
        for (p, s) in traj.p_left.iter().zip(&traj.spins) {
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(p));
            let len = (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt();
            prop_assert!(len <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn linear_evolution_is_linear(
        gamma in 0.3f64..1.8,
        a_re in -1.0f64..1.0,
        b_im in -1.0f64..1.0,
    ) {
        let grid = grid();
        let trap = TrapParams::default().with_gamma(gamma).with_drive(0.143, 1.1);
        let (set, _) = coefficients_for(&grid, &trap).unwrap();
        let pot = double_well(&grid, &trap).unwrap();
        let cfg = short(10.0, 0.0);
        let x = &set.basis.modes[0];
        let y = &set.basis.modes[3];
        let (a, b) = (C::new(a_re, 0.3), C::new(0.2, b_im));
        let combined = propagate_to(&SpinorField::combine(a, x, b, y), &grid, &trap, &pot, &cfg).unwrap();
        let px = propagate_to(x, &grid, &trap, &pot, &cfg).unwrap();
        let py = propagate_to(y, &grid, &trap, &pot, &cfg).unwrap();
        let superposed = SpinorField::combine(a, &px, b, &py);
        prop_assert!(combined.distance(&superposed, grid.dx) < 1e-10);
    }
}
