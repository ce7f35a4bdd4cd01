//! Naive-DFT oracle machinery shared by the oracle tests and the
//! acceptance gate: slow, obviously-correct reimplementations that share
//! no code with the production fast paths.

#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use bel_core::{Fft3, FilterBank, Grid, GridSpec, PhysField, PhysVector};

/// Agreement threshold for the naive-DFT oracles on the 16^3 grids.
pub const ORACLE_TOL: f64 = 1e-12;

pub fn oracle_grid() -> Arc<Grid> {
    Grid::new(GridSpec::isotropic_spacing([16, 16, 16], 0.25)).unwrap()
}

/// Block grid: coarser frequency spacing so the ladder has blocks
/// -1, 0, and 1 on a 16^3 lattice.
pub fn block_grid() -> Arc<Grid> {
    Grid::new(GridSpec::isotropic_spacing([16, 16, 16], 0.5)).unwrap()
}

/// A deterministic, structureless test field: several incommensurate
/// lattice modes plus a smooth envelope, nothing aligned with any axis.
pub fn test_field(grid: &Arc<Grid>) -> PhysField {
    PhysField::from_fn(grid, |x1, x2, x3| {
        (0.25 * x1 + 0.5 * x2).cos() * (0.75 * x3).sin()
            + 0.37 * (0.5 * x1 - 0.25 * x3).sin()
            + 0.11 * (x1 * 0.25).cos() * (x2 * 0.25).cos() * (x3 * 0.25).cos()
            + 0.05
    })
}

/// Naive O(N^6) summation DFT producing the same half-complex layout and
/// normalization as the production transform.
pub fn naive_forward(grid: &Arc<Grid>, f: &PhysField) -> Vec<Complex64> {
    let [n1, n2, n3] = grid.n();
    let h1 = grid.h1();
    let nu = (grid.cell_volume() / (n1 * n2 * n3) as f64).sqrt();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.spec_len()];
    let data = f.data();
    for k3 in 0..n3 {
        for k2 in 0..n2 {
            for k1 in 0..h1 {
                let mut acc = Complex64::new(0.0, 0.0);
                for i3 in 0..n3 {
                    for i2 in 0..n2 {
                        for i1 in 0..n1 {
                            let phase = -2.0
                                * PI
                                * ((k1 * i1) as f64 / n1 as f64
                                    + (k2 * i2) as f64 / n2 as f64
                                    + (k3 * i3) as f64 / n3 as f64);
                            let v = data[i1 + n1 * (i2 + n2 * i3)];
                            acc += Complex64::from_polar(v, phase);
                        }
                    }
                }
                out[k1 + h1 * (k2 + n2 * k3)] = acc * nu;
            }
        }
    }
    out
}

/// Naive full-lattice inverse of half-complex coefficients (Hermitian
/// extension done explicitly), matching the production normalization.
pub fn naive_inverse(grid: &Arc<Grid>, coeffs: &[Complex64]) -> Vec<f64> {
    let [n1, n2, n3] = grid.n();
    let h1 = grid.h1();
    let nu = (grid.cell_volume() / (n1 * n2 * n3) as f64).sqrt();
    let full = |k1: usize, k2: usize, k3: usize| -> Complex64 {
        if k1 < h1 {
            coeffs[k1 + h1 * (k2 + n2 * k3)]
        } else {
            let m1 = (n1 - k1) % n1;
            let m2 = (n2 - k2) % n2;
            let m3 = (n3 - k3) % n3;
            coeffs[m1 + h1 * (m2 + n2 * m3)].conj()
        }
    };
    let mut out = vec![0.0f64; n1 * n2 * n3];
    for i3 in 0..n3 {
        for i2 in 0..n2 {
            for i1 in 0..n1 {
                let mut acc = Complex64::new(0.0, 0.0);
                for k3 in 0..n3 {
                    for k2 in 0..n2 {
                        for k1 in 0..n1 {
                            let phase = 2.0
                                * PI
                                * ((k1 * i1) as f64 / n1 as f64
                                    + (k2 * i2) as f64 / n2 as f64
                                    + (k3 * i3) as f64 / n3 as f64);
                            acc += full(k1, k2, k3) * Complex64::from_polar(1.0, phase);
                        }
                    }
                }
                out[i1 + n1 * (i2 + n2 * i3)] = acc.re / (nu * (n1 * n2 * n3) as f64);
            }
        }
    }
    out
}

fn signed_index(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Frequency vector of a stored half-complex mode.
pub fn naive_xi(grid: &Arc<Grid>, k1: usize, k2: usize, k3: usize) -> [f64; 3] {
    [
        k1 as f64 * grid.dxi(0),
        signed_index(k2, grid.n()[1]) as f64 * grid.dxi(1),
        signed_index(k3, grid.n()[2]) as f64 * grid.dxi(2),
    ]
}

pub fn for_each_naive_mode(grid: &Arc<Grid>, mut f: impl FnMut(usize, [f64; 3], [i64; 3])) {
    let [_, n2, n3] = grid.n();
    let h1 = grid.h1();
    for k3 in 0..n3 {
        for k2 in 0..n2 {
            for k1 in 0..h1 {
                let xi = naive_xi(grid, k1, k2, k3);
                let ks = [
                    k1 as i64,
                    signed_index(k2, n2),
                    signed_index(k3, n3),
                ];
                f(k1 + h1 * (k2 + n2 * k3), xi, ks);
            }
        }
    }
}

/// Reimplementation of the dyadic multiplier from its defining formula,
/// sharing nothing with the production ladder.
fn oracle_smooth_e(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

fn oracle_low(rho: f64) -> f64 {
    let t = (4.0 / 3.0 - rho) * 12.0 / 7.0;
    let a = oracle_smooth_e(t);
    let b = oracle_smooth_e(1.0 - t);
    a / (a + b)
}

pub fn oracle_multiplier(j: i32, rho: f64) -> f64 {
    if j == -1 {
        oracle_low(rho)
    } else {
        oracle_low(rho / 2f64.powi(j + 1)) - oracle_low(rho / 2f64.powi(j))
    }
}

pub fn naive_block(grid: &Arc<Grid>, coeffs: &[Complex64], j: i32) -> Vec<Complex64> {
    let mut out = coeffs.to_vec();
    for_each_naive_mode(grid, |idx, xi, _| {
        let rho = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        out[idx] *= oracle_multiplier(j, rho);
    });
    out
}

pub fn naive_dealias(grid: &Arc<Grid>, coeffs: &mut [Complex64]) {
    for_each_naive_mode(grid, |idx, _, ks| {
        let inside = (0..3).all(|a| ks[a].abs() <= grid.dealias_k(a));
        if !inside {
            coeffs[idx] = Complex64::new(0.0, 0.0);
        }
    });
}

/// Naive advection u . grad v: spectral derivatives by explicit
/// multiplication, products on the physical lattice, naive transforms
/// both ways, then dealiasing.
pub fn naive_advect(
    grid: &Arc<Grid>,
    u_hat: &[Vec<Complex64>; 3],
    v_hat: &[Complex64],
) -> Vec<Complex64> {
    let n_phys = grid.n()[0] * grid.n()[1] * grid.n()[2];
    let mut acc = vec![0.0f64; n_phys];
    for axis in 0..3 {
        let mut dv = v_hat.to_vec();
        for_each_naive_mode(grid, |idx, xi, _| {
            let v = dv[idx];
            dv[idx] = Complex64::new(-xi[axis] * v.im, xi[axis] * v.re);
        });
        let dv_phys = naive_inverse(grid, &dv);
        let u_phys = naive_inverse(grid, &u_hat[axis]);
        for (a, (x, y)) in acc.iter_mut().zip(u_phys.iter().zip(&dv_phys)) {
            *a += x * y;
        }
    }
    let field = PhysField::from_raw(grid.clone(), acc);
    let mut out = naive_forward(grid, &field);
    naive_dealias(grid, &mut out);
    out
}

pub fn relative_peak_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        worst = worst.max((x - y).norm());
        scale = scale.max(y.norm());
    }
    worst / scale
}

/// Worst relative gap between the production dyadic blocks and the
/// independent multiplier formula applied to naive-DFT coefficients,
/// over every block of the 16^3 ladder.
pub fn block_oracle_max_gap() -> f64 {
    let grid = block_grid();
    let mut fft = Fft3::new(grid.clone());
    let bank = FilterBank::new(grid.clone());
    let f = test_field(&grid);
    let f_hat = fft.forward(&f);
    let naive_coeffs = naive_forward(&grid, &f);

    let mut worst = 0.0f64;
    for j in bank.j_range() {
        let fast = bank.block(&f_hat, j);
        let slow = naive_block(&grid, &naive_coeffs, j);
        worst = worst.max(relative_peak_gap(fast.data(), &slow));
    }
    worst
}

/// Relative gap between the production commutator route (block of the
/// advection minus advection of the block) and the same quantity built
/// from naive transforms end to end, on band-limited inputs.
pub fn commutator_oracle_gap() -> f64 {
    let grid = block_grid();
    let mut fft = Fft3::new(grid.clone());
    let bank = FilterBank::new(grid.clone());

    // Divergence-free advecting field and a generic transported scalar,
    // both dealiased up front so each route sees band-limited inputs.
    let u_phys = PhysVector {
        comps: [
            PhysField::from_fn(&grid, |_, x2, x3| 0.3 * x2.sin() + 0.1 * (x3 * 0.5).cos()),
            PhysField::from_fn(&grid, |x1, _, x3| 0.2 * x3.sin() - 0.1 * (x1 * 0.5).sin()),
            PhysField::from_fn(&grid, |x1, x2, _| 0.25 * x1.sin() + 0.15 * (x2 * 0.5).cos()),
        ],
    };
    let mut u_hat = fft.forward_vector(&u_phys);
    u_hat.dealias_truncate();
    let mut v_hat = fft.forward(&test_field(&grid));
    v_hat.dealias_truncate();

    let u_naive = [
        u_hat.comps[0].data().to_vec(),
        u_hat.comps[1].data().to_vec(),
        u_hat.comps[2].data().to_vec(),
    ];

    let j = 0;
    // Production route: block of the advection minus advection of the
    // block.
    let adv = bel_core::ops::advect(&mut fft, &u_hat, &v_hat);
    let fast = bank.block(&adv, j).sub(&bel_core::ops::advect(
        &mut fft,
        &u_hat,
        &bank.block(&v_hat, j),
    ));

    // Naive route, same inputs.
    let adv_naive = naive_advect(&grid, &u_naive, v_hat.data());
    let blocked_adv = naive_block(&grid, &adv_naive, j);
    let v_blocked = naive_block(&grid, v_hat.data(), j);
    let adv_of_block = naive_advect(&grid, &u_naive, &v_blocked);
    let slow: Vec<Complex64> = blocked_adv
        .iter()
        .zip(&adv_of_block)
        .map(|(a, b)| a - b)
        .collect();

    relative_peak_gap(fast.data(), &slow)
}
