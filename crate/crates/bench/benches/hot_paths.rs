//! Hot-path timings on a mid-sized long-axis grid: the transforms, a
//! dyadic block, a full vector norm, the tendency, and one integrator
//! step. Sample counts are small because a single iteration already
//! averages over hundreds of thousands of lattice points.

use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};

use bel_core::besov::{besov_norm, BesovParams};
use bel_core::rng::random_divfree_field;
use bel_core::solver::{Integrator, SolverConfig};
use bel_core::{Fft3, FilterBank, Grid, GridSpec};

fn bench_grid() -> Arc<Grid> {
    Grid::new(GridSpec::isotropic_spacing([256, 32, 32], 1.0 / 16.0)).unwrap()
}

fn hot_paths(c: &mut Criterion) {
    bel_core::init_thread_pool();
    let grid = bench_grid();
    let mut fft = Fft3::new(grid.clone());
    let bank = FilterBank::new(grid.clone());
    let params = BesovParams::new(3.0, 2.0, 2.0).unwrap();
    let u = random_divfree_field(&grid, 11);
    let u_phys = fft.inverse_vector(&u);

    let mut group = c.benchmark_group("hot_paths");
    group.sample_size(10);

    group.bench_function("fft_round_trip_scalar", |b| {
        b.iter(|| {
            let hat = fft.forward(&u_phys.comps[0]);
            black_box(fft.inverse(&hat))
        })
    });

    group.bench_function("dyadic_block", |b| {
        b.iter(|| black_box(bank.block(&u.comps[0], 2)))
    });

    group.bench_function("besov_norm_vector", |b| {
        b.iter(|| besov_norm(&mut fft, &bank, &u, &params).unwrap().value)
    });

    let mut integrator = Integrator::new(
        grid.clone(),
        SolverConfig {
            omega: 1.0,
            dt: Some(1e-3),
            ..SolverConfig::default()
        },
    );
    group.bench_function("tendency", |b| b.iter(|| black_box(integrator.rhs(&u))));

    group.bench_function("rk4_step", |b| {
        b.iter(|| {
            let mut state = u.clone();
            integrator.step_rk4(&mut state, 1e-3);
            black_box(state.l2_norm())
        })
    });

    group.finish();
}

criterion_group!(benches, hot_paths);
criterion_main!(benches);
