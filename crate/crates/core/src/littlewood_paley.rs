//! Dyadic frequency decomposition.
//!
//! A smooth radial bump `low_pass` equals 1 for `rho <= 3/4` and 0 for
//! `rho >= 4/3`; the band multiplier for block `j >= 0` is the difference
//! `low_pass(rho / 2^(j+1)) - low_pass(rho / 2^j)`, and block `-1` is the
//! low-pass itself. Written as differences, the sum over blocks
//! telescopes, so the partition-of-unity identity holds to roundoff by
//! construction rather than by cancellation of independently evaluated
//! bumps.
//!
//! On a finite grid the ladder stops at `j_max`, the largest block whose
//! annulus begins inside the dealias band of the first axis (the long
//! axis, where oscillatory data lives); higher blocks would be mostly or
//! entirely clipped and would poison scaling diagnostics.

use std::sync::Arc;

use crate::field::{SpecField, SpecVector};
use crate::grid::Grid;

/// `exp(-1/t)` for positive `t`, zero otherwise; smooth at 0.
fn cutoff_seed(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth monotone step: 0 for `t <= 0`, 1 for `t >= 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = cutoff_seed(t);
    let b = cutoff_seed(1.0 - t);
    a / (a + b)
}

/// Radial low-pass bump: 1 on `[0, 3/4]`, 0 on `[4/3, inf)`.
pub fn low_pass(rho: f64) -> f64 {
    smooth_step((4.0 / 3.0 - rho) * (12.0 / 7.0))
}

/// Radial band bump `low_pass(rho/2) - low_pass(rho)`, supported on the
/// open annulus `(3/4, 8/3)`.
pub fn band_pass(rho: f64) -> f64 {
    low_pass(rho / 2.0) - low_pass(rho)
}

/// The dyadic ladder attached to one grid.
pub struct FilterBank {
    grid: Arc<Grid>,
    j_max: i32,
    j_floor: i32,
}

impl FilterBank {
    pub fn new(grid: Arc<Grid>) -> Self {
        let band = grid.dealias_band(0);
        // Largest j whose annulus starts inside the axis-1 dealias band.
        let mut j_max = 0;
        while 0.75 * 2f64.powi(j_max + 1) <= band {
            j_max += 1;
        }
        // Smallest j whose annulus contains the smallest nonzero lattice
        // frequency (relevant for homogeneous sums).
        let min_freq = (0..3).map(|a| grid.dxi(a)).fold(f64::INFINITY, f64::min);
        let j_floor = (-80..=j_max)
            .find(|&j| band_pass(min_freq / 2f64.powi(j)) > 0.0)
            .unwrap_or(-1);
        FilterBank { grid, j_max, j_floor }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Largest usable inhomogeneous block index.
    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    /// Smallest block index that catches any lattice mode (homogeneous
    /// ladder only; the inhomogeneous ladder starts at -1).
    pub fn j_floor(&self) -> i32 {
        self.j_floor
    }

    /// All inhomogeneous block indices, `-1..=j_max`.
    pub fn j_range(&self) -> impl Iterator<Item = i32> {
        -1..=self.j_max
    }

    /// True when block `j`'s annulus extends past the axis-1 dealias
    /// band, so the grid clips part of its nominal support.
    pub fn truncated(&self, j: i32) -> bool {
        j >= 0 && (8.0 / 3.0) * 2f64.powi(j) > self.grid.dealias_band(0)
    }

    /// Inhomogeneous block multiplier at radius `rho`.
    pub fn multiplier(&self, j: i32, rho: f64) -> f64 {
        match j {
            j if j < -1 => 0.0,
            -1 => low_pass(rho),
            _ => low_pass(rho / 2f64.powi(j + 1)) - low_pass(rho / 2f64.powi(j)),
        }
    }

    /// Homogeneous block multiplier (pure band bump at every `j`).
    pub fn homogeneous_multiplier(&self, j: i32, rho: f64) -> f64 {
        band_pass(rho / 2f64.powi(j))
    }

    pub fn block(&self, f: &SpecField, j: i32) -> SpecField {
        f.multiplied(|xi| self.multiplier(j, radius(xi)))
    }

    pub fn homogeneous_block(&self, f: &SpecField, j: i32) -> SpecField {
        f.multiplied(|xi| self.homogeneous_multiplier(j, radius(xi)))
    }

    pub fn block_vector(&self, f: &SpecVector, j: i32) -> SpecVector {
        SpecVector {
            comps: [
                self.block(&f.comps[0], j),
                self.block(&f.comps[1], j),
                self.block(&f.comps[2], j),
            ],
        }
    }

    pub fn homogeneous_block_vector(&self, f: &SpecVector, j: i32) -> SpecVector {
        SpecVector {
            comps: [
                self.homogeneous_block(&f.comps[0], j),
                self.homogeneous_block(&f.comps[1], j),
                self.homogeneous_block(&f.comps[2], j),
            ],
        }
    }

    /// Worst deviation of the telescoped multiplier sum from 1 over the
    /// dealias box (the identity the ladder must satisfy there).
    pub fn partition_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        let grid = self.grid.clone();
        let h1 = grid.h1();
        let [_, n2, n3] = grid.n();
        for i3 in 0..n3 {
            for i2 in 0..n2 {
                for i1 in 0..h1 {
                    let k = [
                        i1 as i64,
                        signed(i2, n2),
                        signed(i3, n3),
                    ];
                    if !grid.in_dealias_box(k) {
                        continue;
                    }
                    let xi = [
                        k[0] as f64 * grid.dxi(0),
                        k[1] as f64 * grid.dxi(1),
                        k[2] as f64 * grid.dxi(2),
                    ];
                    let rho = radius(xi);
                    let mut s = 0.0;
                    for j in -1..=self.j_max {
                        s += self.multiplier(j, rho);
                    }
                    worst = worst.max((s - 1.0).abs());
                }
            }
        }
        worst
    }
}

fn radius(xi: [f64; 3]) -> f64 {
    (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt()
}

fn signed(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}
