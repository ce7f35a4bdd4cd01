//! End-to-end integrator behavior beyond single identities: convergence
//! order, reversibility, the blowup guard, and the visitor contract.

use std::sync::Arc;

use bel_core::error::Error;
use bel_core::grid::{Grid, GridSpec};
use bel_core::rng::{random_divfree_field, random_phys_field};
use bel_core::solver::{Integrator, SolverConfig};
use bel_core::{Fft3, PhysVector, SpecVector};

fn grid() -> Arc<Grid> {
    Grid::new(GridSpec::isotropic_spacing([16, 8, 8], 0.5)).unwrap()
}

fn config(dt: f64) -> SolverConfig {
    SolverConfig {
        omega: 1.0,
        dt: Some(dt),
        ..SolverConfig::default()
    }
}

fn final_state(solver: &mut Integrator, u0: &SpecVector, horizon: f64) -> SpecVector {
    let mut out = solver.solve(u0, horizon, &[horizon]).unwrap();
    out.states.remove(0).1
}

#[test]
fn step_halving_shows_fourth_order_convergence() {
    let g = grid();
    let u0 = random_divfree_field(&g, 77);
    let horizon = 0.2;

    let reference = final_state(&mut Integrator::new(g.clone(), config(0.0025)), &u0, horizon);
    let coarse = final_state(&mut Integrator::new(g.clone(), config(0.02)), &u0, horizon);
    let halved = final_state(&mut Integrator::new(g.clone(), config(0.01)), &u0, horizon);

    let err_coarse = coarse.sub(&reference).l2_norm();
    let err_halved = halved.sub(&reference).l2_norm();
    let order = (err_coarse / err_halved).log2();
    assert!(
        (order - 4.0).abs() < 0.3,
        "observed order {order} (errors {err_coarse:.3e} / {err_halved:.3e})"
    );
}

#[test]
fn reversed_flow_with_opposite_rotation_returns_to_start() {
    // If u solves the system with rotation speed omega, then
    // v(t) = -u(T - t) solves it with rotation speed -omega; integrating
    // the negated final state backward must recover the negated start.
    let g = grid();
    let mut u0 = random_divfree_field(&g, 101);
    u0.dealias_truncate();
    bel_core::leray::project(&mut u0);
    let horizon = 0.1;

    let forward = final_state(&mut Integrator::new(g.clone(), config(0.005)), &u0, horizon);
    let mut back_start = forward.clone();
    back_start.scale(-1.0);
    let mut backward_cfg = config(0.005);
    backward_cfg.omega = -1.0;
    let returned = final_state(
        &mut Integrator::new(g.clone(), backward_cfg),
        &back_start,
        horizon,
    );

    let mut expected = u0.clone();
    expected.scale(-1.0);
    let gap = returned.sub(&expected).l2_norm() / u0.l2_norm();
    assert!(gap < 1e-8, "round trip misses the start by {gap}");
}

#[test]
fn blowup_guard_aborts_once_the_ratio_is_crossed() {
    // An impossible ratio below 1 must trip on the very first step of an
    // energy-conserving flow; this exercises the abort path without
    // needing a genuinely singular trajectory.
    let g = grid();
    let u0 = random_divfree_field(&g, 55);
    let mut cfg = config(0.001);
    cfg.blowup_ratio = 0.5;
    let mut solver = Integrator::new(g, cfg);
    match solver.solve(&u0, 0.01, &[]) {
        Err(Error::BlowUp { ratio, .. }) => {
            assert!(ratio > 0.5 && ratio < 2.0, "reported ratio {ratio}");
        }
        Ok(_) => panic!("expected the blowup guard to trip"),
        Err(other) => panic!("expected BlowUp, got {other}"),
    }
}

#[test]
fn invalid_steps_and_horizons_are_rejected() {
    let g = grid();
    let u0 = random_divfree_field(&g, 5);
    let mut bad_dt = Integrator::new(g.clone(), config(-0.1));
    assert!(matches!(
        bad_dt.solve(&u0, 1.0, &[]),
        Err(Error::InvalidParam(_))
    ));
    let mut solver = Integrator::new(g, config(0.01));
    assert!(matches!(
        solver.solve(&u0, -1.0, &[]),
        Err(Error::InvalidParam(_))
    ));
}

#[test]
fn visitor_receives_exact_target_times_and_can_abort() {
    let g = grid();
    let u0 = random_divfree_field(&g, 13);
    let mut solver = Integrator::new(g.clone(), config(0.003));
    let targets = [0.0, 0.01, 0.034, 0.05];

    let mut seen = Vec::new();
    let diag = solver
        .solve_visit(&u0, 0.05, &targets, |t, state| {
            seen.push((t, state.l2_norm()));
            Ok(())
        })
        .unwrap();
    let times: Vec<f64> = seen.iter().map(|&(t, _)| t).collect();
    assert_eq!(times, targets.to_vec());
    assert_eq!(diag.snapshots.len(), targets.len());
    for (info, &(t, l2)) in diag.snapshots.iter().zip(&seen) {
        assert_eq!(info.t, t);
        assert_eq!(info.l2, l2);
    }

    // A visitor error aborts the sweep and surfaces unchanged.
    let result = solver.solve_visit(&u0, 0.05, &targets, |t, _| {
        if t > 0.0 {
            Err(Error::InvalidData(format!("stop at {t}")))
        } else {
            Ok(())
        }
    });
    assert!(matches!(result, Err(Error::InvalidData(_))));
}

#[test]
fn initial_snapshot_equals_the_projected_dealiased_input() {
    // Callers that compare later states against t = 0 mirror the
    // stepper's preparation (dealias, then project); the solver must
    // visit exactly that state at time zero.
    let g = grid();
    let mut fft = Fft3::new(g.clone());
    // Deliberately aliased, compressible input.
    let raw = PhysVector {
        comps: [
            random_phys_field(&g, 1),
            random_phys_field(&g, 2),
            random_phys_field(&g, 3),
        ],
    };
    let u0 = fft.forward_vector(&raw);

    let mut prepared = u0.clone();
    prepared.dealias_truncate();
    bel_core::leray::project(&mut prepared);

    let mut solver = Integrator::new(g, config(0.01));
    let mut gap = f64::NAN;
    solver
        .solve_visit(&u0, 0.0, &[0.0], |_, state| {
            gap = state.sub(&prepared).l2_norm();
            Ok(())
        })
        .unwrap();
    assert!(gap == 0.0, "prepared state differs by {gap}");
}
