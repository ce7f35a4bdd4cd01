//! Seeded random fields for tests and checks.
//!
//! All generators draw from a counter-based stream cipher seeded by an
//! explicit `u64`, and fill arrays in a fixed sequential order, so the
//! same seed yields bit-identical fields on every run regardless of the
//! worker-pool size.

use std::sync::Arc;

use num_complex::Complex64;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::field::{PhysField, SpecField, SpecVector};
use crate::grid::Grid;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform samples in `[-1, 1)` at every grid point.
pub fn random_phys_field(grid: &Arc<Grid>, seed: u64) -> PhysField {
    let mut r = rng(seed);
    let dist = Uniform::new(-1.0f64, 1.0);
    let mut data = vec![0.0; grid.phys_len()];
    for v in &mut data {
        *v = dist.sample(&mut r);
    }
    PhysField::from_raw(grid.clone(), data)
}

/// Random spectral scalar supported inside the dealias box, with the
/// Hermitian structure of a real field (self-conjugate `k1 = 0` plane,
/// zero mean, nothing on the `k1` Nyquist plane).
pub fn random_band_field(grid: &Arc<Grid>, seed: u64) -> SpecField {
    let mut r = rng(seed);
    let dist = Uniform::new(-1.0f64, 1.0);
    let [_, n2, n3] = grid.n();
    let h1 = grid.h1();
    let k = [grid.dealias_k(0), grid.dealias_k(1), grid.dealias_k(2)];
    let mut data = vec![Complex64::new(0.0, 0.0); grid.spec_len()];

    let signed = |idx: usize, n: usize| -> i64 {
        if idx <= n / 2 {
            idx as i64
        } else {
            idx as i64 - n as i64
        }
    };

    for i3 in 0..n3 {
        let k3 = signed(i3, n3);
        if k3.abs() > k[2] {
            continue;
        }
        for i2 in 0..n2 {
            let k2 = signed(i2, n2);
            if k2.abs() > k[1] {
                continue;
            }
            // Interior k1: free complex coefficients (the implicit k1 < 0
            // half is their conjugate by layout).
            for i1 in 1..h1 - 1 {
                if (i1 as i64) <= k[0] {
                    data[i1 + h1 * (i2 + n2 * i3)] =
                        Complex64::new(dist.sample(&mut r), dist.sample(&mut r));
                }
            }
            // k1 = 0 plane: fill only the canonical half and mirror the
            // conjugate so the plane describes a real field.
            let j2 = (n2 - i2) % n2;
            let j3 = (n3 - i3) % n3;
            let here = (i2, i3);
            let mirror = (j2, j3);
            let idx = h1 * (i2 + n2 * i3);
            if here == mirror {
                // Self-conjugate mode: real coefficient; keep DC at zero.
                if here != (0, 0) {
                    data[idx] = Complex64::new(dist.sample(&mut r), 0.0);
                }
            } else if here < mirror {
                let z = Complex64::new(dist.sample(&mut r), dist.sample(&mut r));
                data[idx] = z;
                data[h1 * (j2 + n2 * j3)] = z.conj();
            }
        }
    }
    SpecField::from_raw(grid.clone(), data)
}

/// Random divergence-free band-limited vector field, built as the curl of
/// a random vector potential so incompressibility holds by construction.
pub fn random_divfree_field(grid: &Arc<Grid>, seed: u64) -> SpecVector {
    let a = [
        random_band_field(grid, seed ^ 0x1),
        random_band_field(grid, seed ^ 0x2),
        random_band_field(grid, seed ^ 0x3),
    ];
    let mut out = SpecVector::zeros(grid);
    let g = grid.clone();
    // curl(a)_m = i (xi x a)_m
    let a_data = [a[0].data(), a[1].data(), a[2].data()];
    let [c0, c1, c2] = &mut out.comps;
    let (d0, d1, d2) = (c0.data_mut(), c1.data_mut(), c2.data_mut());
    g.for_each_mode(|idx, xi| {
        let i = Complex64::new(0.0, 1.0);
        d0[idx] = i * (xi[1] * a_data[2][idx] - xi[2] * a_data[1][idx]);
        d1[idx] = i * (xi[2] * a_data[0][idx] - xi[0] * a_data[2][idx]);
        d2[idx] = i * (xi[0] * a_data[1][idx] - xi[1] * a_data[0][idx]);
    });
    out
}
