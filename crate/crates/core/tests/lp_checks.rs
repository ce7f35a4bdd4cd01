//! Ladder-level checks of the dyadic frequency decomposition: where the
//! ladder tops out, that it telescopes to the identity, and that blocks
//! annihilate content living two octaves away.

use std::sync::Arc;

use bel_core::fft::Fft3;
use bel_core::grid::{Grid, GridSpec, Preset};
use bel_core::rng::{random_band_field, random_divfree_field};
use bel_core::{FilterBank, SpecField};

/// Identities that hold mode by mode.
const EXACT_TOL: f64 = 1e-12;

/// Comparisons that accumulate rounding across a lattice sum.
const SUM_TOL: f64 = 1e-10;

#[test]
fn ladder_height_tracks_the_dealias_band() {
    // The last block j satisfies 0.75 * 2^(j+1) <= band along the long
    // axis (the annulus must start inside the alias-free region), with
    // the ladder never shorter than blocks -1 and 0.
    for (spec, expected) in [
        (GridSpec::isotropic_spacing([16, 16, 16], 0.5), 1),
        (GridSpec::isotropic_spacing([16, 8, 8], 0.25), 0),
        (Preset::Ci.grid_spec(), 4),
        (Preset::Desk.grid_spec(), 6),
    ] {
        let grid = Grid::new(spec).unwrap();
        let bank = FilterBank::new(grid.clone());
        let band = grid.dealias_band(0);
        assert_eq!(bank.j_max(), expected, "band {band}");
        if bank.j_max() > 0 {
            assert!(0.75 * 2f64.powi(bank.j_max()) <= band);
        }
        assert!(0.75 * 2f64.powi(bank.j_max() + 1) > band);
    }
}

#[test]
fn multiplier_ladder_telescopes_to_one() {
    // Holds on the long-axis grids the presets use, where the corner of
    // the dealias box still falls under the top block's plateau. (An
    // isotropic cube can place its corners beyond the last annulus; the
    // presets avoid that regime by construction.)
    for spec in [
        GridSpec::isotropic_spacing([16, 8, 8], 0.25),
        Preset::Ci.grid_spec(),
    ] {
        let grid = Grid::new(spec).unwrap();
        let bank = FilterBank::new(grid);
        assert!(
            bank.partition_residual() < EXACT_TOL,
            "partition residual {}",
            bank.partition_residual()
        );
    }
}

#[test]
fn blocks_reassemble_the_field_on_the_dealias_box() {
    let grid = Grid::new(GridSpec::isotropic_spacing([32, 16, 16], 0.25)).unwrap();
    let bank = FilterBank::new(grid.clone());
    let mut f = random_band_field(&grid, 5);
    f.dealias_truncate();
    let mut sum = SpecField::zeros(&grid);
    for j in bank.j_range() {
        sum.axpy(1.0, &bank.block(&f, j));
    }
    let gap = sum.sub(&f).l2_norm() / f.l2_norm();
    assert!(gap < SUM_TOL, "reassembly gap {gap}");
}

#[test]
fn distant_annuli_annihilate_shell_supported_content() {
    // Content on the shell |xi| ~ 2^1 must be invisible to blocks at
    // least two octaves away on either side.
    let grid = Grid::new(GridSpec::isotropic_spacing([128, 16, 16], 0.25)).unwrap();
    let bank = FilterBank::new(grid.clone());
    assert_eq!(bank.j_max(), 3);
    let f = random_band_field(&grid, 11);
    let shell = f.multiplied(|xi| {
        let rho = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        if (1.8..2.2).contains(&rho) {
            1.0
        } else {
            0.0
        }
    });
    assert!(shell.l2_norm() > 0.0, "shell restriction must be nonempty");
    for j in [-1, 3] {
        let leak = bank.block(&shell, j).l2_norm() / shell.l2_norm();
        assert!(leak < EXACT_TOL, "block {j} leaks {leak}");
    }
}

#[test]
fn single_block_content_is_reproduced_by_its_block() {
    // A field whose support sits where only multiplier j = 1 is active
    // (the flat top of the bump) passes through that block unchanged.
    let grid = Grid::new(GridSpec::isotropic_spacing([64, 16, 16], 0.25)).unwrap();
    let bank = FilterBank::new(grid.clone());
    let f = random_band_field(&grid, 13);
    let top = f.multiplied(|xi| {
        let rho = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        // multiplier(1, rho) = low(rho/4) - low(rho/2) = 1 exactly on
        // [4/3 * 2, 3/4 * 4] = [8/3, 3]; stay safely inside.
        if (2.7..2.95).contains(&rho) {
            1.0
        } else {
            0.0
        }
    });
    assert!(top.l2_norm() > 0.0);
    let gap = bank.block(&top, 1).sub(&top).l2_norm() / top.l2_norm();
    assert!(gap < EXACT_TOL, "pass-through gap {gap}");
}

#[test]
fn homogeneous_and_inhomogeneous_blocks_agree_above_the_crossover() {
    // For j >= 1 the inhomogeneous multiplier is the difference of two
    // low-pass profiles evaluated where they coincide with the single
    // band-pass bump, so both ladders see the same annuli.
    let grid = Grid::new(GridSpec::isotropic_spacing([64, 16, 16], 0.25)).unwrap();
    let bank = FilterBank::new(grid.clone());
    let f = random_band_field(&grid, 17);
    for j in 1..=bank.j_max() {
        let a = bank.block(&f, j);
        let b = bank.homogeneous_block(&f, j);
        let gap = a.sub(&b).l2_norm() / f.l2_norm();
        assert!(gap < 1e-6, "ladders disagree at j = {j}: {gap}");
    }
}

#[test]
fn norm_rows_carry_the_dyadic_weighting() {
    let grid = Grid::new(GridSpec::isotropic_spacing([32, 16, 16], 0.25)).unwrap();
    let bank = FilterBank::new(grid.clone());
    let mut fft = Fft3::new(grid.clone());
    let f = random_band_field(&grid, 19);
    let params = bel_core::BesovParams::new(1.75, 2.0, 2.0).unwrap();
    let result = bel_core::besov::besov_norm_scalar(&mut fft, &bank, &f, &params).unwrap();
    for row in &result.rows {
        let expected = 2f64.powf(params.s * row.j as f64) * row.block_lp;
        assert!(
            (row.weighted - expected).abs() <= 1e-12 * expected.max(1e-300),
            "row j = {} weight mismatch",
            row.j
        );
    }
    let reassembled = bel_core::besov::lr_norm(result.rows.iter().map(|r| r.weighted), params.r);
    assert!((reassembled - result.value).abs() <= 1e-12 * result.value);
}

#[test]
fn advection_by_a_uniform_stream_commutes_with_blocks() {
    // A constant advecting field is a pure frequency shift generator;
    // it commutes with every Fourier multiplier.
    let grid = Grid::new(GridSpec::isotropic_spacing([16, 16, 16], 0.5)).unwrap();
    let bank = FilterBank::new(grid.clone());
    let mut fft = Fft3::new(grid.clone());

    // Mean mode only in each component: a uniform stream (trivially
    // divergence free). The exact physical magnitude is irrelevant.
    let mut u = random_divfree_field(&grid, 23);
    for (c, comp) in u.comps.iter_mut().enumerate() {
        for v in comp.data_mut() {
            *v = num_complex::Complex64::new(0.0, 0.0);
        }
        comp.data_mut()[0] = num_complex::Complex64::new(1.3 + 0.4 * c as f64, 0.0);
    }

    let mut v = random_band_field(&grid, 29);
    v.dealias_truncate();
    for j in bank.j_range() {
        let adv = bel_core::ops::advect(&mut fft, &u, &v);
        let lhs = bank.block(&adv, j);
        let rhs = bel_core::ops::advect(&mut fft, &u, &bank.block(&v, j));
        let scale = rhs.l2_norm().max(v.l2_norm());
        let gap = lhs.sub(&rhs).l2_norm() / scale;
        assert!(gap < SUM_TOL, "commutator with uniform stream at j = {j}: {gap}");
    }
}
