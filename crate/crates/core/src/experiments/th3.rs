//! Experiment `th3`: along the schedule t_n^(1-alpha) = n^3 2^(-n) the
//! time-Hoelder quotient of the solution map grows with n, so the map is
//! not Hoelder continuous in time at exponent alpha.
//!
//! The mechanism is a block-level lower-bound chain on the second
//! component of S_t(u0) - u0 at block n: the leading advection term
//! grows like n^(-2) 2^n (so its schedule-weighted product grows like n),
//! while the commutator, the gradient-pressure part, the rotation term,
//! and the expansion remainder are all lower order. The table reports
//! every chain member; the verdicts gate the leading-term growth, the
//! boundedness of the corrections, and the monotonicity of the
//! schedule-weighted leading quantity.

use crate::besov::{besov_norm, besov_norm_scalar};
use crate::construct::{build_series, SeriesWeight};
use crate::error::Result;
use crate::experiments::{gradient_linf, provenance_json, scalar_lp, usable_n, ExperimentConfig};
use crate::fit::fit_log2_vs_index;
use crate::grid::Grid;
use crate::leray;
use crate::littlewood_paley::FilterBank;
use crate::ops::{advect, advect_vector};
use crate::report::{ExperimentReport, SlopeRecord, Table, Verdict};
use crate::solver::{Integrator, SolverConfig};

/// Window around 1 for the slope of log2(n^2 * leading term) in n.
const LEAD_SLOPE_TOL: f64 = 0.2;
/// Correction terms must stay below this multiple of their analytic
/// bound (a gradient-amplitude product for the commutator, the squared
/// field norm for the gradient-pressure part).
const CORRECTION_FACTOR: f64 = 8.0;
/// The rotating term masks the convective mechanism at these amplitudes,
/// so the schedule statement is measured on the non-rotating system.
const DEFAULT_OMEGA: f64 = 0.0;

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let grid = Grid::from_preset(cfg.preset);
    let bank = FilterBank::new(grid.clone());
    let params = cfg.besov;
    let (s, p) = (params.s, params.p);
    let alpha = cfg.alpha;
    let (usable, skipped) = usable_n(&grid, &cfg.n_values())?;

    let (data, build) = build_series(
        &grid,
        usable[0]..=usable[usable.len() - 1],
        s,
        SeriesWeight::Weighted,
    )?;

    let omega = cfg.omega_or(DEFAULT_OMEGA);
    let config = SolverConfig {
        omega,
        ..SolverConfig::default()
    };
    let mut integrator = Integrator::new(grid.clone(), config);
    let u0_hat = integrator.fft_mut().forward_vector(&data);

    // Schedule: t_n = (n^3 2^(-n))^(1/(1-alpha)); not monotone in n, so
    // snapshots are requested in time order and matched back to n.
    let schedule: Vec<(u32, f64)> = usable
        .iter()
        .map(|&n| {
            let base = (n as f64).powi(3) * (-(n as f64)).exp2();
            (n, base.powf(1.0 / (1.0 - alpha)))
        })
        .collect();
    let mut times: Vec<f64> = schedule.iter().map(|&(_, t)| t).collect();
    times.sort_by(|a, b| a.partial_cmp(b).expect("schedule times are finite"));
    let horizon = *times.last().expect("usable n list is never empty");
    let mut targets = vec![0.0];
    targets.extend_from_slice(&times);

    // Reference state, prepared the way the stepper preps its input so
    // that the t = 0 snapshot matches it exactly.
    let mut u0_ref = u0_hat;
    u0_ref.dealias_truncate();
    leray::project(&mut u0_ref);
    let rhs0_second = integrator.rhs(&u0_ref).comps[1].clone();

    // Chain ingredients that do not depend on n; only second components
    // are retained, which keeps the resident set small on large grids.
    let adv_second = advect(integrator.fft_mut(), &u0_ref, &u0_ref.comps[1]);
    let pressure_second =
        leray::complemented(&advect_vector(integrator.fft_mut(), &u0_ref, &u0_ref)).comps[1]
            .clone();
    let grad_sup = gradient_linf(integrator.fft_mut(), &u0_ref);
    let field_norm = besov_norm(integrator.fft_mut(), &bank, &u0_ref, &params)?.value;
    let commutator_bound = grad_sup * field_norm;
    let pressure_bound = field_norm * field_norm;

    let mut table = Table::new(
        "chain",
        &[
            "n",
            "t_n",
            "leading_term",
            "commutator",
            "pressure_block",
            "rotation_block",
            "remainder",
            "weighted_lead",
            "chain_lower_bound",
            "hoelder_quotient",
        ],
    );
    let mut report = ExperimentReport::new(
        "th3",
        "time-Hoelder defect of the solution map at a critical schedule",
    );

    // Per-n chain terms that depend only on the initial state.
    struct ChainTerms {
        lead: f64,
        comm: f64,
        pressure: f64,
        rotation: f64,
    }
    let mut chain = Vec::with_capacity(schedule.len());
    for &(n, _) in &schedule {
        let weight = (n as f64 * s).exp2();
        let block_second = bank.block(&u0_ref.comps[1], n as i32);
        let inner = advect(integrator.fft_mut(), &u0_ref, &block_second);
        let lead = weight * scalar_lp(integrator.fft_mut(), &inner, p)?;
        let comm_field = bank.block(&adv_second, n as i32).sub(&inner);
        let comm = weight * scalar_lp(integrator.fft_mut(), &comm_field, p)?;
        let pressure_block = bank.block(&pressure_second, n as i32);
        let pressure = weight * scalar_lp(integrator.fft_mut(), &pressure_block, p)?;
        // Second component of the rotation term e3 x u is u1.
        let rotation_block = bank.block(&u0_ref.comps[0], n as i32);
        let rotation =
            omega.abs() * weight * scalar_lp(integrator.fft_mut(), &rotation_block, p)?;
        chain.push(ChainTerms {
            lead,
            comm,
            pressure,
            rotation,
        });
    }
    drop(adv_second);
    drop(pressure_second);

    // Snapshot-dependent terms, reduced as the trajectory streams out.
    let mut remainders = vec![f64::NAN; schedule.len()];
    let mut quotients_by_case = vec![f64::NAN; schedule.len()];
    {
        let mut fft = crate::fft::Fft3::new(grid.clone());
        let bank_ref = &bank;
        let u0_second = &u0_ref.comps[1];
        let rhs0_ref = &rhs0_second;
        let schedule_ref = &schedule;
        let rem_ref = &mut remainders;
        let quo_ref = &mut quotients_by_case;
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
                let weight = (n as f64 * s).exp2();
                let mut w_second = diff_second.clone();
                w_second.axpy(-t_n, rhs0_ref);
                let remainder_block = bank_ref.block(&w_second, n as i32);
                rem_ref[idx] = t_n.powf(-alpha)
                    * weight
                    * scalar_lp(&mut fft, &remainder_block, p)?;
                quo_ref[idx] = t_n.powf(-alpha)
                    * besov_norm_scalar(&mut fft, bank_ref, &diff_second, &params)?.value;
            }
            Ok(())
        })?;
    }

    let mut weighted_leads = Vec::new();
    let mut scaled_leads = Vec::new();
    let mut quotients = Vec::new();
    for (idx, &(n, t_n)) in schedule.iter().enumerate() {
        let ChainTerms {
            lead,
            comm,
            pressure,
            rotation,
        } = chain[idx];
        let remainder = remainders[idx];
        let quotient = quotients_by_case[idx];
        let schedule_weight = t_n.powf(1.0 - alpha);
        let weighted_lead = schedule_weight * lead;
        let lower_bound = schedule_weight * (lead - comm - pressure - rotation) - remainder;

        table.push(vec![
            n.into(),
            t_n.into(),
            lead.into(),
            comm.into(),
            pressure.into(),
            rotation.into(),
            remainder.into(),
            weighted_lead.into(),
            lower_bound.into(),
            quotient.into(),
        ]);

        report.verdicts.push(Verdict::le(
            &format!("commutator_bounded_n{n}"),
            comm / commutator_bound,
            CORRECTION_FACTOR,
            "weighted commutator against the gradient-sup times field-norm product",
        ));
        report.verdicts.push(Verdict::le(
            &format!("pressure_bounded_n{n}"),
            pressure / pressure_bound,
            CORRECTION_FACTOR,
            "weighted gradient-pressure block against the squared field norm",
        ));

        weighted_leads.push(weighted_lead);
        scaled_leads.push((n as f64).powi(2) * lead);
        quotients.push(quotient);
    }

    let ns: Vec<f64> = schedule.iter().map(|&(n, _)| n as f64).collect();
    // The first block of the series is an edge case for the growth verdicts:
    // the advecting field is dominated by its own lowest block, so at the
    // series start the measured block is advected by itself and the
    // cosine-squared self term keeps its full zero-frequency weight, while
    // every interior block sees two half-weight sidebands instead (a factor
    // sqrt(3/2) on the leading term, plus larger profile-derivative
    // corrections at the lowest carrier). When the schedule offers at least
    // three points the asymptotic fits therefore use the interior blocks;
    // the table and the per-block correction verdicts keep every row.
    let edge = if ns.len() >= 3 { 1 } else { 0 };
    if ns.len() - edge >= 2 {
        let lead_fit = fit_log2_vs_index(&ns[edge..], &scaled_leads[edge..])?;
        report
            .slopes
            .push(SlopeRecord::new("scaled_lead_vs_n", &lead_fit));
        report.verdicts.push(Verdict::in_range(
            "lead_growth_slope",
            lead_fit.slope,
            1.0 - LEAD_SLOPE_TOL,
            1.0 + LEAD_SLOPE_TOL,
            "log2 of n^2 times the leading term per unit n over interior blocks; the floor grows like 2^n",
        ));

        let min_ratio = weighted_leads[edge..]
            .windows(2)
            .map(|w| w[1] / w[0])
            .fold(f64::MAX, f64::min);
        report.verdicts.push(Verdict::flag(
            "schedule_weighted_lead_increasing",
            min_ratio > 1.0,
            min_ratio,
            "min consecutive ratio > 1",
            "schedule-weighted leading term over interior blocks; the chain floor grows linearly in n",
        ));

        if let Ok(q_fit) = fit_log2_vs_index(&ns, &quotients) {
            report
                .slopes
                .push(SlopeRecord::new("hoelder_quotient_vs_n", &q_fit));
        }
    }

    report.tables.push(table);
    report.config_echo = cfg.echo();
    let mut prov = provenance_json(&grid, &[&build]);
    prov["skipped_n"] = serde_json::json!(skipped);
    prov["growth_verdict_ns"] = serde_json::json!(&ns[edge..]);
    prov["commutator_bound"] = serde_json::json!(commutator_bound);
    prov["pressure_bound"] = serde_json::json!(pressure_bound);
    report.provenance = prov;
    Ok(report)
}
