//! End-to-end runs of the solver on small problems.

use bbm_core::experiments::{run_solitary_propagation, SolitaryConfig};
use bbm_core::fem::interpolate;
use bbm_core::functionals::{relaxation_coefficients, Field};
use bbm_core::semidisc::{BoundaryCondition, MixedSpaces, MixedState, SchemeKind, SemidiscOperator};
use bbm_core::timeint::{classic_rk4, Integrator, RelaxationConfig};
use bbm_core::waves::{petviashvili_residual, petviashvili_solve, PetviashviliConfig};
use bbm_core::Error;
use proptest::prelude::*;

fn short_run(degree: usize, scheme: SchemeKind) -> SolitaryConfig {
    let mut c = SolitaryConfig::standard_case(degree, scheme);
    c.dx = 0.2;
    c.time.dt = 0.2;
    c.time.t_end = 5.0;
    c
}

#[test]
fn every_degree_conserves_mass_momentum_energy() {
    for r in 1..=4 {
        let res = run_solitary_propagation(&short_run(r, SchemeKind::Conservative)).unwrap();
        let d = res.evolution.drift;
        assert!(d.mass < 1e-12 && d.momentum < 1e-12 && d.energy < 1e-12, "r={r}: {d:?}");
        assert!(res.evolution.conserved.energy && !res.evolution.conserved.impulse);
    }
}

#[test]
fn standard_scheme_impulse_error_is_temporal() {
    let drift = |dt: f64| {
        let mut c = short_run(2, SchemeKind::Standard);
        c.time.dt = dt;
        let res = run_solitary_propagation(&c).unwrap();
        assert_eq!(res.evolution.gamma.steps, 0);
        res.evolution.drift
    };
    let (coarse, fine) = (drift(0.1), drift(0.05));
    assert!(coarse.mass < 1e-12 && coarse.momentum < 1e-12, "{coarse:?}");
    // the impulse is a semidiscrete invariant, so only the RK error remains
    assert!(fine.impulse < coarse.impulse / 16.0, "{coarse:?} {fine:?}");
}

#[test]
fn solitary_wave_is_a_steady_profile() {
    let mut c = SolitaryConfig::standard_case(3, SchemeKind::Conservative);
    c.time.t_end = 10.0;
    let res = run_solitary_propagation(&c).unwrap();
    let last = res.track.last().unwrap();
    assert!(last.e_shape < 1e-4, "{last:?}");
    assert!(last.t >= 10.0 - 1e-9);
}

#[test]
fn petviashvili_ignores_boundary_conditions() {
    let amp = |bc| {
        let sp = MixedSpaces::build(-40.0, 40.0, 400, 2, bc).unwrap();
        let w = petviashvili_solve(&sp, &PetviashviliConfig::new(1.6)).unwrap();
        assert!(petviashvili_residual(&w).unwrap() <= 1e-9);
        let h = &w.residual_history;
        for win in h[3..].windows(6) {
            assert!(win[5] < win[0], "{h:?}");
        }
        w.amplitude
    };
    let (p, r) = (amp(BoundaryCondition::Periodic), amp(BoundaryCondition::Reflective));
    assert!((p - r).abs() < 1e-8, "{p} vs {r}");
}

#[test]
fn large_steps_break_relaxation() {
    let mut c = SolitaryConfig::standard_case(1, SchemeKind::Conservative);
    c.time.dt = 2.0;
    c.time.t_end = 50.0;
    match run_solitary_propagation(&c) {
        Err(Error::Relaxation { t, .. }) => assert!(t < 50.0),
        other => panic!(
            "expected a relaxation failure, got {:?}",
            other.map(|r| r.evolution.drift)
        ),
    }
}

#[test]
fn relaxed_time_advances_by_gamma_steps() {
    let sp = MixedSpaces::build(-20.0, 20.0, 100, 1, BoundaryCondition::Periodic).unwrap();
    let y0 = MixedState::project(
        &sp,
        0.0,
        |x| 0.3 / x.cosh().powi(2),
        |x| -0.6 * x.tanh() / x.cosh().powi(2),
        |x| 0.3 / x.cosh().powi(2),
        |x| -0.6 * x.tanh() / x.cosh().powi(2),
    )
    .unwrap();
    let op = SemidiscOperator::setup(sp, SchemeKind::Conservative, None).unwrap();
    let integ = Integrator::new(&op, classic_rk4(), RelaxationConfig::default()).unwrap();
    let (y, recs) = integ.integrate(y0, 1.0, 0.1, 1, |_, _| Ok(())).unwrap();
    let sum: f64 = recs[1..].iter().map(|r| 0.1 * r.gamma).sum();
    assert!((y.t - sum).abs() < 1e-13);
    assert!(y.t >= 1.0 - 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conservative_slopes_do_not_change_energy(
        a in proptest::collection::vec(-0.3f64..0.3, 4),
        r in 1usize..=3,
        periodic in any::<bool>(),
    ) {
        let bc = if periodic { BoundaryCondition::Periodic } else { BoundaryCondition::Reflective };
        let sp = MixedSpaces::build(0.0, 1.0, 12, r, bc).unwrap();
        let tau = std::f64::consts::TAU;
        let eta = |x: f64| a[0] * (tau * x).cos() + a[1] * (2.0 * tau * x).cos();
        let vel = |x: f64| a[2] * (tau * x).sin() + a[3] * (3.0 * tau * x).sin();
        let mut y = MixedState::zeros(&sp);
        y.h = interpolate(&sp.h, eta);
        y.u = interpolate(&sp.u, vel);
        let op = SemidiscOperator::setup(sp.clone(), SchemeKind::Conservative, None).unwrap();
        let d = op.rhs(&y).unwrap();
        let c = relaxation_coefficients(
            Field::new(&sp.h, &y.h),
            Field::new(&sp.u, &y.u),
            Field::new(&sp.h, &d.h),
            Field::new(&sp.u, &d.u),
        )
        .unwrap();
        let scale = d.h.iter().chain(&d.u).map(|v| v.abs()).fold(1.0, f64::max);
        prop_assert!(c.gamma.abs() <= 1e-11 * scale, "Γ = {}", c.gamma);
    }
}
