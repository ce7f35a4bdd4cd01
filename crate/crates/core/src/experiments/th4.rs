//! Experiment `th4`: along the vanishing schedule t_n = eps 2^(-k n) the
//! solution moves away from its datum by an amount that does not vanish,
//! so the data-to-solution map is discontinuous at t = 0 in the sup-block
//! norm.
//!
//! The data is the flat-amplitude series; the measured quantity is
//! G_n = the sup-block norm of the second component of S_(t_n)(u0) - u0.
//! As t_n drops geometrically, G_n must stay above a fixed fraction of
//! its first value, scale linearly when eps is doubled, and dominate its
//! own block-n lower bound.

use crate::besov::besov_norm_scalar;
use crate::construct::{build_series, SeriesWeight};
use crate::error::Result;
use crate::experiments::{provenance_json, scalar_lp, usable_n, ExperimentConfig};
use crate::grid::Grid;
use crate::littlewood_paley::FilterBank;
use crate::report::{ExperimentReport, Table, Verdict};
use crate::solver::{Integrator, SolverConfig};

/// G_n must stay above this fraction of its value at the smallest n.
const FLOOR_FRACTION: f64 = 0.1;
/// Window for the ratio G_n(2 eps) / G_n(eps) around the linear value 2.
const LINEAR_RATIO_LO: f64 = 1.7;
const LINEAR_RATIO_HI: f64 = 2.3;
/// The block-n measurement can exceed the sup over blocks only by
/// round-off.
const LOWER_BOUND_SLACK: f64 = 1.0 + 1e-9;
/// Like the Hoelder schedule, the mechanism is convective; rotation off
/// by default.
const DEFAULT_OMEGA: f64 = 0.0;

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let grid = Grid::from_preset(cfg.preset);
    let bank = FilterBank::new(grid.clone());
    // The discontinuity statement lives in the sup-block norm.
    let mut params = cfg.besov;
    params.r = f64::INFINITY;
    let (s, p) = (params.s, params.p);
    let (usable, skipped) = usable_n(&grid, &cfg.n_values())?;

    let (data, build) = build_series(
        &grid,
        usable[0]..=usable[usable.len() - 1],
        s,
        SeriesWeight::Flat,
    )?;

    let config = SolverConfig {
        omega: cfg.omega_or(DEFAULT_OMEGA),
        ..SolverConfig::default()
    };
    let mut integrator = Integrator::new(grid.clone(), config);
    let mut u0_ref = integrator.fft_mut().forward_vector(&data);
    u0_ref.dealias_truncate();
    crate::leray::project(&mut u0_ref);

    let mut table = Table::new(
        "displacement",
        &["epsilon", "n", "t_n", "sup_norm", "block_lower_bound", "tightness"],
    );
    let mut report = ExperimentReport::new(
        "th4",
        "norm discontinuity floor along a vanishing-time schedule",
    );

    // Two sweeps: the configured eps and its double, for the linearity
    // check.
    let epsilons = [cfg.epsilon, 2.0 * cfg.epsilon];
    let mut sup_norms: Vec<Vec<f64>> = Vec::new();
    for (which, &eps) in epsilons.iter().enumerate() {
        // t_n decreases with n; request snapshots in time order.
        let schedule: Vec<(u32, f64)> = usable
            .iter()
            .map(|&n| (n, eps * (-(cfg.k_exponent as f64) * n as f64).exp2()))
            .collect();
        let mut times: Vec<f64> = schedule.iter().map(|&(_, t)| t).collect();
        times.sort_by(|a, b| a.partial_cmp(b).expect("schedule times are finite"));
        let horizon = *times.last().expect("usable n list is never empty");
        let mut targets = vec![0.0];
        targets.extend_from_slice(&times);

        // Reduce each snapshot to its two numbers as it streams out.
        let mut measured = vec![(f64::NAN, f64::NAN); schedule.len()];
        {
            let mut fft = crate::fft::Fft3::new(grid.clone());
            let bank_ref = &bank;
            let u0_second = &u0_ref.comps[1];
            let schedule_ref = &schedule;
            let measured_ref = &mut measured;
            integrator.solve_visit(&u0_ref, horizon, &targets, |t, state| {
                if t == 0.0 {
                    return Ok(());
                }
                let mut diff_second = state.comps[1].clone();
                diff_second.axpy(-1.0, u0_second);
                for (idx, &(n, t_n)) in schedule_ref.iter().enumerate() {
                    if t_n != t {
                        continue;
                    }
                    let sup_norm =
                        besov_norm_scalar(&mut fft, bank_ref, &diff_second, &params)?.value;
                    let block = bank_ref.block(&diff_second, n as i32);
                    let block_bound =
                        (n as f64 * s).exp2() * scalar_lp(&mut fft, &block, p)?;
                    measured_ref[idx] = (sup_norm, block_bound);
                }
                Ok(())
            })?;
        }

        let label = if which == 0 { "eps" } else { "eps_doubled" };
        let mut values = Vec::new();
        for (idx, &(n, t_n)) in schedule.iter().enumerate() {
            let (sup_norm, block_bound) = measured[idx];
            table.push(vec![
                eps.into(),
                n.into(),
                t_n.into(),
                sup_norm.into(),
                block_bound.into(),
                (sup_norm / block_bound).into(),
            ]);
            report.verdicts.push(Verdict::le(
                &format!("block_lower_bound_{label}_n{n}"),
                block_bound / sup_norm,
                LOWER_BOUND_SLACK,
                "the weighted block-n measurement cannot exceed the sup over blocks",
            ));
            values.push(sup_norm);
        }

        let floor = values
            .iter()
            .map(|&v| v / values[0])
            .fold(f64::MAX, f64::min);
        report.verdicts.push(Verdict::ge(
            &format!("displacement_floor_{label}"),
            floor,
            FLOOR_FRACTION,
            "smallest G_n relative to the first; the displacement must not vanish with t_n",
        ));
        sup_norms.push(values);
    }

    for (k, &n) in usable.iter().enumerate() {
        report.verdicts.push(Verdict::in_range(
            &format!("linear_in_eps_n{n}"),
            sup_norms[1][k] / sup_norms[0][k],
            LINEAR_RATIO_LO,
            LINEAR_RATIO_HI,
            "doubling eps doubles the schedule times, so the displacement must double",
        ));
    }

    report.tables.push(table);
    report.config_echo = cfg.echo();
    let mut prov = provenance_json(&grid, &[&build]);
    prov["skipped_n"] = serde_json::json!(skipped);
    report.provenance = prov;
    Ok(report)
}
