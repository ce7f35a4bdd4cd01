//! The `check` suite: every structural identity and solver guarantee the
//! experiments rely on, measured on seeded random fields and reported
//! with the same verdict plumbing as the experiments.
//!
//! Groups: dyadic partition identities, projector identities, inequality
//! constants measured as ratios (with scale-stability rather than a
//! specific constant), and integrator diagnostics (energy neutrality,
//! convergence order, the closed-form rotation propagator, reversibility,
//! right-hand-side equivalences, and the quadratic smallness of the
//! nonlinearity).

use crate::besov::{besov_norm, besov_norm_scalar, BesovParams};
use crate::error::Result;
use crate::experiments::ExperimentConfig;
use crate::fft::Fft3;
use crate::field::{PhysField, SpecVector};
use crate::fit::fit_log2_vs_index;
use crate::grid::Grid;
use crate::leray;
use crate::littlewood_paley::FilterBank;
use crate::ops::{advect_vector, pointwise_mul};
use crate::report::{ExperimentReport, SlopeRecord, Table, Verdict};
use crate::rng::{random_band_field, random_divfree_field};
use crate::solver::{linear_propagator, Integrator, SolverConfig};

/// Exact-identity tolerances: partition of unity and block
/// almost-orthogonality hold to round-off.
const PARTITION_TOL: f64 = 1e-12;
const ANNIHILATION_TOL: f64 = 1e-12;
/// Projector identities accumulate a few more rounding steps.
const PROJECTION_TOL: f64 = 1e-10;
const Q_SYMMETRY_TOL: f64 = 1e-10;
/// Bernstein: the gradient-to-block-norm ratio doubles per scale.
const BERNSTEIN_SLOPE_TOL: f64 = 0.1;
/// Measured inequality ratios must stay below this stand-in for the
/// unquantified generic constants, and vary across scales by at most the
/// stability factor.
const INEQUALITY_RATIO_MAX: f64 = 16.0;
const INEQUALITY_STABILITY_MAX: f64 = 4.0;
/// Integrator diagnostics.
const ENERGY_DRIFT_TOL: f64 = 1e-6;
const ENERGY_DT: f64 = 2e-3;
const ENERGY_HORIZON: f64 = 0.1;
const RK4_DTS: [f64; 3] = [0.01, 0.005, 0.0025];
const RK4_HORIZON: f64 = 0.1;
const RK4_ORDER_TOL: f64 = 0.3;
const PROPAGATOR_TOL: f64 = 1e-8;
const PROPAGATOR_DT: f64 = 0.02;
const PROPAGATOR_HORIZON: f64 = 1.0;
const REVERSAL_TOL: f64 = 1e-6;
const REVERSAL_STEPS: usize = 10;
const DUAL_ROUTE_TOL: f64 = 1e-10;
const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Finite-difference probe of the nonlinearity's quadratic scaling.
const NONLINEARITY_EPS: [f64; 2] = [1e-4, 5e-5];
const NONLINEARITY_ORDER_TOL: f64 = 0.1;

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let grid = Grid::from_preset(cfg.preset);
    let mut fft = Fft3::new(grid.clone());
    let bank = FilterBank::new(grid.clone());
    let seed = cfg.seed;

    let mut report = ExperimentReport::new(
        "check",
        "partition, projection, inequality, and integrator self-checks",
    );
    let mut identities = Table::new("identities", &["name", "residual"]);
    let mut bernstein = Table::new("bernstein", &["p", "j", "ratio"]);
    let mut inequalities = Table::new("inequalities", &["name", "lhs", "bound", "ratio"]);
    let mut integration = Table::new("integration", &["name", "value"]);

    let mut residual = |name: &str, value: f64, tol: f64, detail: &str| -> Verdict {
        identities.push(vec![name.into(), value.into()]);
        Verdict::le(name, value, tol, detail)
    };

    // Dyadic partition of unity over the dealias box.
    report.verdicts.push(residual(
        "partition_of_unity",
        bank.partition_residual(),
        PARTITION_TOL,
        "max deviation of the telescoped multiplier sum from 1 over retained modes",
    ));

    // Blocks two or more scales apart annihilate each other.
    let h = random_band_field(&grid, seed);
    let h_norm = h.l2_norm();
    let mut annihilation: f64 = 0.0;
    let range: Vec<i32> = bank.j_range().collect();
    for &j in &range {
        for &jp in &range {
            if (j - jp).abs() < 2 {
                continue;
            }
            let nested = bank.block(&bank.block(&h, jp), j).l2_norm();
            annihilation = annihilation.max(nested / h_norm);
        }
    }
    report.verdicts.push(residual(
        "block_annihilation",
        annihilation,
        ANNIHILATION_TOL,
        "max relative energy of a block applied two or more scales away",
    ));

    // Projector identities on a general (not divergence-free) field.
    let w = SpecVector {
        comps: [
            random_band_field(&grid, seed ^ 0x11),
            random_band_field(&grid, seed ^ 0x22),
            random_band_field(&grid, seed ^ 0x33),
        ],
    };
    let w_norm = w.l2_norm();
    let pw = leray::projected(&w);
    report.verdicts.push(residual(
        "projection_divergence",
        pw.div_residual_rel(),
        PROJECTION_TOL,
        "relative divergence of the projected field",
    ));
    report.verdicts.push(residual(
        "projection_idempotent",
        leray::projected(&pw).sub(&pw).l2_norm() / pw.l2_norm(),
        PROJECTION_TOL,
        "projecting twice changes nothing",
    ));
    let qw = leray::complemented(&w);
    let mut recombined = pw.clone();
    recombined.axpy(1.0, &qw);
    report.verdicts.push(residual(
        "projection_complement",
        recombined.sub(&w).l2_norm() / w_norm,
        PROJECTION_TOL,
        "projection plus complement reproduces the field",
    ));

    let scalar = random_band_field(&grid, seed ^ 0x44);
    let gradient = SpecVector {
        comps: [
            scalar.derivative(0),
            scalar.derivative(1),
            scalar.derivative(2),
        ],
    };
    report.verdicts.push(residual(
        "gradient_annihilation",
        leray::projected(&gradient).l2_norm() / gradient.l2_norm(),
        PROJECTION_TOL,
        "gradients carry no divergence-free part",
    ));

    let y = SpecVector {
        comps: [
            random_band_field(&grid, seed ^ 0x55),
            random_band_field(&grid, seed ^ 0x66),
            random_band_field(&grid, seed ^ 0x77),
        ],
    };
    report.verdicts.push(residual(
        "projection_self_adjoint",
        (pw.inner(&y) - w.inner(&leray::projected(&y))).abs() / (w_norm * y.l2_norm()),
        PROJECTION_TOL,
        "the projector is symmetric in the L2 pairing",
    ));
    report.verdicts.push(residual(
        "riesz_route_agreement",
        leray::project_via_riesz(&w).sub(&pw).l2_norm() / w_norm,
        PROJECTION_TOL,
        "componentwise Riesz assembly matches the direct projector",
    ));

    // Symmetry of the gradient part of the advection product.
    let u = random_divfree_field(&grid, seed ^ 0x88);
    let v = random_divfree_field(&grid, seed ^ 0x99);
    let adv_uv = advect_vector(&mut fft, &u, &v);
    let adv_vu = advect_vector(&mut fft, &v, &u);
    let q_diff = leray::complemented(&adv_uv)
        .sub(&leray::complemented(&adv_vu))
        .l2_norm();
    report.verdicts.push(residual(
        "q_symmetry",
        q_diff / adv_uv.l2_norm(),
        Q_SYMMETRY_TOL,
        "the gradient parts of u advecting v and v advecting u coincide for divergence-free fields",
    ));

    // Bernstein: gradient norms of a block scale like 2^j, at every p.
    let js: Vec<i32> = (2..bank.j_max()).collect();
    for &p in &[1.0, 2.0, f64::INFINITY] {
        let mut ratios = Vec::new();
        for &j in &js {
            let block = bank.block_vector(&u, j);
            let block_phys = fft.inverse_vector(&block);
            let block_norm = block_phys.lp_norm(p)?;
            let grad_norm = gradient_magnitude(&mut fft, &block).lp_norm(p)?;
            let ratio = grad_norm / block_norm;
            bernstein.push(vec![p.into(), j.into(), ratio.into()]);
            ratios.push(ratio);
        }
        let xs: Vec<f64> = js.iter().map(|&j| j as f64).collect();
        let fit = fit_log2_vs_index(&xs, &ratios)?;
        let p_label = if p.is_infinite() {
            "inf".to_string()
        } else {
            format!("{}", p as u32)
        };
        report
            .slopes
            .push(SlopeRecord::new(&format!("bernstein_slope_p{p_label}"), &fit));
        report.verdicts.push(Verdict::in_range(
            &format!("bernstein_slope_p{p_label}"),
            fit.slope,
            1.0 - BERNSTEIN_SLOPE_TOL,
            1.0 + BERNSTEIN_SLOPE_TOL,
            "log2 of the gradient-to-block norm ratio per scale; one derivative costs one octave",
        ));
    }

    // Product law, measured as a ratio at three scales. The generic
    // constant is not quantified, so the verdicts pin a ceiling and
    // scale-stability instead.
    let sigma = BesovParams {
        s: 2.0,
        p: 2.0,
        r: 2.0,
    };
    let h2 = random_band_field(&grid, seed ^ 0xaa);
    let mut product_ratios = Vec::new();
    for j in 1..=3 {
        let f = bank.block(&h, j);
        let g = bank.block(&h2, j);
        let product = pointwise_mul(&mut fft, &f, &g);
        let lhs = besov_norm_scalar(&mut fft, &bank, &product, &sigma)?.value;
        let f_sup = fft.inverse(&f).linf_norm();
        let g_sup = fft.inverse(&g).linf_norm();
        let f_besov = besov_norm_scalar(&mut fft, &bank, &f, &sigma)?.value;
        let g_besov = besov_norm_scalar(&mut fft, &bank, &g, &sigma)?.value;
        let bound = f_sup * g_besov + g_sup * f_besov;
        let ratio = lhs / bound;
        inequalities.push(vec![
            format!("product_law_j{j}").as_str().into(),
            lhs.into(),
            bound.into(),
            ratio.into(),
        ]);
        product_ratios.push(ratio);
    }
    let ratio_max = product_ratios.iter().fold(f64::MIN, |m, &v| m.max(v));
    let ratio_min = product_ratios.iter().fold(f64::MAX, |m, &v| m.min(v));
    report.verdicts.push(Verdict::le(
        "product_law_ratio",
        ratio_max,
        INEQUALITY_RATIO_MAX,
        "product norm against the sup-norm cross bound, worst scale",
    ));
    report.verdicts.push(Verdict::le(
        "product_law_stability",
        ratio_max / ratio_min,
        INEQUALITY_STABILITY_MAX,
        "the measured ratio may not drift across scales",
    ));

    // Bilinear gradient-part estimate on divergence-free fields.
    let q_lhs = besov_norm(&mut fft, &bank, &leray::complemented(&adv_uv), &cfg.besov)?.value;
    let u_besov = besov_norm(&mut fft, &bank, &u, &cfg.besov)?.value;
    let v_besov = besov_norm(&mut fft, &bank, &v, &cfg.besov)?.value;
    let q_ratio = q_lhs / (u_besov * v_besov);
    inequalities.push(vec![
        "bilinear_gradient_part".into(),
        q_lhs.into(),
        (u_besov * v_besov).into(),
        q_ratio.into(),
    ]);
    report.verdicts.push(Verdict::le(
        "bilinear_gradient_part_ratio",
        q_ratio,
        INEQUALITY_RATIO_MAX,
        "gradient part of the advection product against the product of field norms",
    ));

    // Integrator diagnostics. All on the same seeded field, normalized in
    // amplitude so step sizes mean the same thing on every preset.
    let base = random_divfree_field(&grid, seed ^ 0xbb);
    let base_linf = fft.inverse_vector(&base).linf_norm();
    let mut unit = base.clone();
    unit.scale(1.0 / base_linf);

    for omega in [0.0, 1.0] {
        let mut integrator = Integrator::new(
            grid.clone(),
            SolverConfig {
                omega,
                dt: Some(ENERGY_DT),
                ..SolverConfig::default()
            },
        );
        let out = integrator.solve(&unit, ENERGY_HORIZON, &[ENERGY_HORIZON])?;
        let drift = (out.states[0].1.l2_norm() - out.diagnostics.initial_l2).abs()
            / out.diagnostics.initial_l2;
        let name = format!("energy_drift_omega{omega:.0}");
        integration.push(vec![name.as_str().into(), drift.into()]);
        report.verdicts.push(Verdict::le(
            &name,
            drift,
            ENERGY_DRIFT_TOL,
            "relative L2 change over the horizon; both force terms are energy-neutral",
        ));
    }

    // Order of convergence from three step sizes.
    let mut half = base.clone();
    half.scale(0.5 / base_linf);
    let mut finals = Vec::new();
    for &dt in &RK4_DTS {
        let mut integrator = Integrator::new(
            grid.clone(),
            SolverConfig {
                omega: 1.0,
                dt: Some(dt),
                ..SolverConfig::default()
            },
        );
        let mut out = integrator.solve(&half, RK4_HORIZON, &[RK4_HORIZON])?;
        finals.push(out.states.remove(0).1);
    }
    let e1 = finals[0].sub(&finals[1]).l2_norm();
    let e2 = finals[1].sub(&finals[2]).l2_norm();
    let order = (e1 / e2).log2();
    integration.push(vec!["rk4_coarse_error".into(), e1.into()]);
    integration.push(vec!["rk4_fine_error".into(), e2.into()]);
    integration.push(vec!["rk4_order".into(), order.into()]);
    report.verdicts.push(Verdict::in_range(
        "rk4_order",
        order,
        4.0 - RK4_ORDER_TOL,
        4.0 + RK4_ORDER_TOL,
        "log2 error drop per step halving; the classical scheme is fourth order",
    ));

    // Rotation-only stepping against the closed-form propagator.
    let mut rotation_only = Integrator::new(
        grid.clone(),
        SolverConfig {
            omega: 1.0,
            advection: false,
            dt: Some(PROPAGATOR_DT),
            ..SolverConfig::default()
        },
    );
    let out = rotation_only.solve(&unit, PROPAGATOR_HORIZON, &[PROPAGATOR_HORIZON])?;
    let exact = linear_propagator(&unit, 1.0, PROPAGATOR_HORIZON);
    let propagator_residual = out.states[0].1.sub(&exact).l2_norm() / unit.l2_norm();
    integration.push(vec!["propagator_residual".into(), propagator_residual.into()]);
    report.verdicts.push(Verdict::le(
        "propagator_agreement",
        propagator_residual,
        PROPAGATOR_TOL,
        "stepped rotation-only flow against its closed form after a unit horizon",
    ));

    // Reversibility of the full stepper.
    let mut reversal = Integrator::new(
        grid.clone(),
        SolverConfig {
            omega: 1.0,
            ..SolverConfig::default()
        },
    );
    let mut state = unit.clone();
    for _ in 0..REVERSAL_STEPS {
        reversal.step_rk4(&mut state, ENERGY_DT);
    }
    for _ in 0..REVERSAL_STEPS {
        reversal.step_rk4(&mut state, -ENERGY_DT);
    }
    let reversal_residual = state.sub(&unit).l2_norm() / unit.l2_norm();
    integration.push(vec!["reversal_residual".into(), reversal_residual.into()]);
    report.verdicts.push(Verdict::le(
        "time_reversal",
        reversal_residual,
        REVERSAL_TOL,
        "stepping forward then backward returns the initial state",
    ));

    // The divergence-form right-hand side equals the advection form plus
    // rotation, projected; both see alias-free products inside the box.
    let mut full = Integrator::new(
        grid.clone(),
        SolverConfig {
            omega: 1.0,
            ..SolverConfig::default()
        },
    );
    let rhs_div_form = full.rhs(&unit);
    let mut advective = advect_vector(full.fft_mut(), &unit, &unit);
    let (u1, u2) = (unit.comps[0].clone(), unit.comps[1].clone());
    advective.comps[0].axpy(-1.0, &u2);
    advective.comps[1].axpy(1.0, &u1);
    let mut rhs_advective = leray::projected(&advective);
    rhs_advective.scale(-1.0);
    rhs_advective.dealias_truncate();
    let dual_residual = rhs_div_form.sub(&rhs_advective).l2_norm() / rhs_div_form.l2_norm();
    integration.push(vec!["rhs_dual_route".into(), dual_residual.into()]);
    report.verdicts.push(Verdict::le(
        "rhs_dual_route",
        dual_residual,
        DUAL_ROUTE_TOL,
        "conservative and advective tendency computations coincide on divergence-free fields",
    ));

    let orthogonality =
        unit.inner(&rhs_div_form).abs() / (unit.l2_norm() * rhs_div_form.l2_norm());
    integration.push(vec!["rhs_orthogonality".into(), orthogonality.into()]);
    report.verdicts.push(Verdict::le(
        "rhs_orthogonality",
        orthogonality,
        ORTHOGONALITY_TOL,
        "the tendency is L2-orthogonal to the state, the differential form of energy neutrality",
    ));

    // The nonlinear part of the tendency shrinks quadratically with the
    // field amplitude.
    let mut linear_only = Integrator::new(
        grid.clone(),
        SolverConfig {
            omega: 1.0,
            advection: false,
            ..SolverConfig::default()
        },
    );
    let mut deviations = Vec::new();
    for &eps in &NONLINEARITY_EPS {
        let mut scaled = unit.clone();
        scaled.scale(eps);
        let deviation = full
            .rhs(&scaled)
            .sub(&linear_only.rhs(&scaled))
            .l2_norm();
        deviations.push(deviation);
    }
    let nonlinearity_order = (deviations[0] / deviations[1]).log2();
    integration.push(vec!["nonlinearity_small_amplitude".into(), deviations[0].into()]);
    integration.push(vec!["nonlinearity_half_amplitude".into(), deviations[1].into()]);
    integration.push(vec!["nonlinearity_order".into(), nonlinearity_order.into()]);
    report.verdicts.push(Verdict::in_range(
        "nonlinearity_order",
        nonlinearity_order,
        2.0 - NONLINEARITY_ORDER_TOL,
        2.0 + NONLINEARITY_ORDER_TOL,
        "log2 drop of the nonlinear tendency per amplitude halving; the term is quadratic",
    ));

    report.tables.push(identities);
    report.tables.push(bernstein);
    report.tables.push(inequalities);
    report.tables.push(integration);
    report.config_echo = cfg.echo();
    report.provenance = serde_json::json!({ "grid": grid.spec(), "seed": seed });
    Ok(report)
}

/// Pointwise Frobenius magnitude of the gradient as a physical field.
fn gradient_magnitude(fft: &mut Fft3, u: &SpecVector) -> PhysField {
    let grid = u.grid().clone();
    let mut sq = vec![0.0f64; grid.phys_len()];
    for comp in &u.comps {
        for axis in 0..3 {
            let d = fft.inverse(&comp.derivative(axis));
            for (acc, v) in sq.iter_mut().zip(d.data()) {
                *acc += v * v;
            }
        }
    }
    for v in &mut sq {
        *v = v.sqrt();
    }
    PhysField::from_raw(grid, sq)
}
