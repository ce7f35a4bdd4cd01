//! Field-level structure of the constructed initial data: exact
//! incompressibility, planarity, frequency localization, and provenance
//! that survives grid changes.

use std::sync::Arc;

use bel_core::construct::{build_fn, build_gn, build_series, Carrier, SeriesWeight};
use bel_core::fft::Fft3;
use bel_core::grid::{Grid, GridSpec, Preset};
use bel_core::FilterBank;

const EXACT_TOL: f64 = 1e-12;
const ISOLATION_TOL: f64 = 1e-10;

fn test_grid() -> Arc<Grid> {
    // Long axis 1 so carriers up to n = 4 fit at the preset spacing.
    Grid::new(GridSpec::isotropic_spacing([2048, 32, 32], 1.0 / 16.0)).unwrap()
}

#[test]
fn oscillatory_blocks_are_divergence_free_and_planar() {
    let grid = test_grid();
    let mut fft = Fft3::new(grid.clone());
    for (label, build) in [
        ("single block", build_fn(&grid, 3, 3.0).unwrap()),
        ("companion", build_gn(&grid, 3).unwrap()),
        (
            "series",
            build_series(&grid, 3..=4, 3.0, SeriesWeight::Weighted).unwrap(),
        ),
    ] {
        let (field, _) = build;
        assert_eq!(
            field.comps[2].linf_norm(),
            0.0,
            "{label}: third component must vanish identically"
        );
        let hat = fft.forward_vector(&field);
        assert!(
            hat.div_residual_rel() < EXACT_TOL,
            "{label}: divergence residual {}",
            hat.div_residual_rel()
        );
    }
}

#[test]
fn oscillatory_block_energy_sits_on_its_dyadic_shell() {
    let grid = test_grid();
    let mut fft = Fft3::new(grid.clone());
    let n = 3u32;
    let (field, prov) = build_fn(&grid, n, 3.0).unwrap();
    let hat = fft.forward_vector(&field);

    // The modulated envelope occupies |xi - lambda e1| <= support < 1/2,
    // an annulus well inside block n's nominal shell.
    let lambda = prov.terms[0].carrier_snapped;
    let lo = lambda - 0.5;
    let hi = lambda + 0.5;
    let total: f64 = (0..3).map(|c| hat.comps[c].energy_where(|_| true)).sum();
    let outside: f64 = (0..3)
        .map(|c| {
            hat.comps[c].energy_where(|xi| {
                let rho = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
                !(lo..=hi).contains(&rho)
            })
        })
        .sum();
    assert!(
        outside <= EXACT_TOL * total,
        "energy off the carrier shell: {}",
        outside / total
    );

    // And the dyadic block at index n reproduces the field while its
    // neighbors two octaves away see nothing.
    let bank = FilterBank::new(grid.clone());
    let j = n as i32;
    let through = bank.block_vector(&hat, j);
    let gap: f64 = (0..3)
        .map(|c| through.comps[c].sub(&hat.comps[c]).l2_norm().powi(2))
        .sum::<f64>()
        .sqrt()
        / total.sqrt();
    assert!(gap < ISOLATION_TOL, "block {j} pass-through gap {gap}");
    for far in [j - 2, j + 2] {
        if far < -1 || far > bank.j_max() {
            continue;
        }
        let leak: f64 = (0..3)
            .map(|c| bank.block(&hat.comps[c], far).l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
            / total.sqrt();
        assert!(leak < ISOLATION_TOL, "block {far} leak {leak}");
    }
}

#[test]
fn companion_field_is_low_frequency_only() {
    let grid = test_grid();
    let mut fft = Fft3::new(grid.clone());
    let (field, _) = build_gn(&grid, 4).unwrap();
    let hat = fft.forward_vector(&field);
    let total: f64 = (0..3).map(|c| hat.comps[c].energy_where(|_| true)).sum();
    let high: f64 = (0..3)
        .map(|c| {
            hat.comps[c].energy_where(|xi| {
                let rho = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
                rho > 0.5
            })
        })
        .sum();
    assert!(
        high <= EXACT_TOL * total,
        "companion energy above |xi| = 1/2: {}",
        high / total
    );
}

#[test]
fn provenance_reproduces_the_build() {
    let grid = test_grid();
    let s = 2.5;
    let (_, prov) = build_series(&grid, 3..=4, s, SeriesWeight::Weighted).unwrap();
    assert_eq!(prov.family, "series_weighted");
    assert_eq!(prov.s, s);
    assert!(prov.amplitude_rule.contains("n^(-2)"));
    assert_eq!(prov.terms.len(), 2);
    for term in &prov.terms {
        let carrier = Carrier::for_grid(&grid, term.n).unwrap();
        assert_eq!(term.carrier_index, carrier.k_index);
        assert_eq!(term.carrier_snapped, carrier.lambda);
        assert_eq!(
            term.coefficient,
            SeriesWeight::Weighted.coefficient(term.n, s)
        );
        // Snapping stays within half a lattice cell of the nominal
        // frequency.
        assert!((term.carrier_snapped - term.carrier_nominal).abs() <= grid.dxi(0) / 2.0);
    }
}

#[test]
fn builds_scale_to_the_largest_preset_block_index() {
    // The widest grid the experiments use must accept every preset block
    // index without carrier rejections or profile substitution drift.
    let grid = Grid::new(GridSpec::isotropic_spacing([8192, 32, 32], 1.0 / 16.0)).unwrap();
    let n_values = Preset::Desk.n_values();
    let (field, prov) = build_series(
        &grid,
        *n_values.first().unwrap()..=*n_values.last().unwrap(),
        3.0,
        SeriesWeight::Flat,
    )
    .unwrap();
    assert_eq!(prov.terms.len(), n_values.len());
    assert!(field.comps[0].linf_norm().is_finite());
    let band = grid.dealias_band(0);
    for term in &prov.terms {
        assert!(term.carrier_snapped + 1.0 <= band);
    }
}
