//! Scalar and vector fields on a fixed grid, in physical or spectral
//! representation.
//!
//! Every field owns its samples and a handle to the [`Grid`] it lives on;
//! mixing grids is a programming error and panics. Physical scalars store
//! `N1*N2*N3` reals (x1 fastest); spectral scalars store the half-complex
//! layout `H1*N2*N3` with `H1 = N1/2 + 1` (k1 fastest). Norms on spectral
//! data weight conjugate pairs so that they agree with quadrature norms of
//! the corresponding physical field.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::Grid;

#[derive(Clone)]
pub struct PhysField {
    grid: Arc<Grid>,
    data: Vec<f64>,
}

#[derive(Clone)]
pub struct SpecField {
    grid: Arc<Grid>,
    data: Vec<Complex64>,
}

/// Three-component physical vector field.
#[derive(Clone)]
pub struct PhysVector {
    pub comps: [PhysField; 3],
}

/// Three-component spectral vector field.
#[derive(Clone)]
pub struct SpecVector {
    pub comps: [SpecField; 3],
}

fn assert_same_grid(a: &Arc<Grid>, b: &Arc<Grid>) {
    assert!(Arc::ptr_eq(a, b), "fields belong to different grids");
}

impl PhysField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        PhysField {
            grid: grid.clone(),
            data: vec![0.0; grid.phys_len()],
        }
    }

    pub fn from_raw(grid: Arc<Grid>, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), grid.phys_len(), "physical data length mismatch");
        PhysField { grid, data }
    }

    /// Sample `f(x1, x2, x3)` at every grid point.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64, f64) -> f64 + Sync) -> Self {
        let [n1, n2, _] = grid.n();
        let mut data = vec![0.0; grid.phys_len()];
        let dx = [grid.dx(0), grid.dx(1), grid.dx(2)];
        data.par_chunks_exact_mut(n1)
            .enumerate()
            .for_each(|(line_idx, line)| {
                let i2 = line_idx % n2;
                let i3 = line_idx / n2;
                let x2 = i2 as f64 * dx[1];
                let x3 = i3 as f64 * dx[2];
                for (i1, v) in line.iter_mut().enumerate() {
                    *v = f(i1 as f64 * dx[0], x2, x3);
                }
            });
        PhysField { grid: grid.clone(), data }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Quadrature Lp norm; `p` must be at least 1 or infinite.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_from_magnitudes(self.data.iter().copied().map(f64::abs), p, self.grid.cell_volume())
    }

    pub fn linf_norm(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn scale(&mut self, a: f64) {
        self.data.par_chunks_mut(1 << 16).for_each(|chunk| {
            for v in chunk {
                *v *= a;
            }
        });
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &PhysField) {
        assert_same_grid(&self.grid, &other.grid);
        self.data
            .par_chunks_mut(1 << 16)
            .zip(other.data.par_chunks(1 << 16))
            .for_each(|(dst, src)| {
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            });
    }

    /// Pointwise product, written into a caller-provided output buffer.
    pub fn mul_into(&self, other: &PhysField, out: &mut PhysField) {
        assert_same_grid(&self.grid, &other.grid);
        assert_same_grid(&self.grid, &out.grid);
        out.data
            .par_chunks_mut(1 << 16)
            .zip(self.data.par_chunks(1 << 16))
            .zip(other.data.par_chunks(1 << 16))
            .for_each(|((dst, a), b)| {
                for ((d, x), y) in dst.iter_mut().zip(a).zip(b) {
                    *d = x * y;
                }
            });
    }
}

impl SpecField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        SpecField {
            grid: grid.clone(),
            data: vec![Complex64::new(0.0, 0.0); grid.spec_len()],
        }
    }

    pub fn from_raw(grid: Arc<Grid>, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), grid.spec_len(), "spectral data length mismatch");
        SpecField { grid, data }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Pair-weighted l2 norm; equals the quadrature L2 norm of the
    /// physical counterpart by the transform normalization.
    pub fn l2_norm(&self) -> f64 {
        let h1 = self.grid.h1();
        let grid = &self.grid;
        let sum: f64 = self
            .data
            .chunks_exact(h1)
            .map(|line| {
                let mut s = 0.0;
                for (i1, v) in line.iter().enumerate() {
                    s += grid.pair_weight(i1) * v.norm_sqr();
                }
                s
            })
            .sum();
        sum.sqrt()
    }

    /// Pair-weighted real inner product; equals the quadrature L2 inner
    /// product of the physical counterparts.
    pub fn inner(&self, other: &SpecField) -> f64 {
        assert_eq!(self.data.len(), other.data.len(), "grid mismatch");
        let h1 = self.grid.h1();
        let grid = &self.grid;
        self.data
            .chunks_exact(h1)
            .zip(other.data.chunks_exact(h1))
            .map(|(a, b)| {
                let mut s = 0.0;
                for (i1, (x, y)) in a.iter().zip(b).enumerate() {
                    s += grid.pair_weight(i1) * (x.re * y.re + x.im * y.im);
                }
                s
            })
            .sum()
    }

    /// Pair-weighted energy restricted to modes selected by `pred(xi)`.
    pub fn energy_where(&self, pred: impl Fn([f64; 3]) -> bool) -> f64 {
        let mut sum = 0.0;
        let h1 = self.grid.h1();
        let grid = self.grid.clone();
        grid.for_each_mode(|idx, xi| {
            if pred(xi) {
                sum += grid.pair_weight(idx % h1) * self.data[idx].norm_sqr();
            }
        });
        sum
    }

    /// Partial derivative along `axis`: multiply by `i * xi_axis`.
    pub fn derivative(&self, axis: usize) -> SpecField {
        assert!(axis < 3);
        let mut out = self.clone();
        out.derivative_in_place(axis);
        out
    }

    pub fn derivative_in_place(&mut self, axis: usize) {
        let grid = self.grid.clone();
        let data = &mut self.data;
        grid.for_each_mode(|idx, xi| {
            let v = data[idx];
            data[idx] = Complex64::new(-xi[axis] * v.im, xi[axis] * v.re);
        });
    }

    /// Apply a multiplier that depends only on the frequency vector.
    pub fn multiplied(&self, m: impl Fn([f64; 3]) -> f64) -> SpecField {
        let mut out = self.clone();
        let grid = out.grid.clone();
        let data = &mut out.data;
        grid.for_each_mode(|idx, xi| {
            data[idx] *= m(xi);
        });
        out
    }

    /// Zero every mode outside the dealias box.
    pub fn dealias_truncate(&mut self) {
        let grid = self.grid.clone();
        let data = &mut self.data;
        let [n1, n2, _] = grid.n();
        let h1 = grid.h1();
        let k = [grid.dealias_k(0), grid.dealias_k(1), grid.dealias_k(2)];
        data.par_chunks_exact_mut(h1)
            .enumerate()
            .for_each(|(line_idx, line)| {
                let i2 = line_idx % n2;
                let i3 = line_idx / n2;
                let k2 = signed(i2, n2);
                let k3 = signed(i3, grid.n()[2]);
                if k2.abs() > k[1] || k3.abs() > k[2] {
                    line.fill(Complex64::new(0.0, 0.0));
                } else {
                    for (i1, v) in line.iter_mut().enumerate() {
                        if (i1 as i64) > k[0] {
                            *v = Complex64::new(0.0, 0.0);
                        }
                    }
                }
                let _ = n1;
            });
    }

    /// Largest coefficient magnitude outside the dealias box.
    pub fn above_band_max(&self) -> f64 {
        let mut m = 0.0f64;
        let grid = self.grid.clone();
        let h1 = grid.h1();
        let [_, n2, n3] = grid.n();
        for (line_idx, line) in self.data.chunks_exact(h1).enumerate() {
            let i2 = line_idx % n2;
            let i3 = line_idx / n2;
            let k2 = signed(i2, n2);
            let k3 = signed(i3, n3);
            let line_out = k2.abs() > grid.dealias_k(1) || k3.abs() > grid.dealias_k(2);
            for (i1, v) in line.iter().enumerate() {
                if line_out || (i1 as i64) > grid.dealias_k(0) {
                    m = m.max(v.norm());
                }
            }
        }
        m
    }

    pub fn scale(&mut self, a: f64) {
        self.data.par_chunks_mut(1 << 16).for_each(|chunk| {
            for v in chunk {
                *v *= a;
            }
        });
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: f64, other: &SpecField) {
        assert_same_grid(&self.grid, &other.grid);
        self.data
            .par_chunks_mut(1 << 16)
            .zip(other.data.par_chunks(1 << 16))
            .for_each(|(dst, src)| {
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            });
    }

    pub fn sub(&self, other: &SpecField) -> SpecField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Overwrite with `src`, reusing this field's allocation.
    pub fn copy_from(&mut self, src: &SpecField) {
        assert_same_grid(&self.grid, &src.grid);
        self.data.copy_from_slice(&src.data);
    }

    /// Residual of the Hermitian constraints the half-complex layout must
    /// satisfy on its self-conjugate planes (`k1 = 0` and `k1` Nyquist):
    /// `coef(k1, k2, k3) - conj(coef(k1, -k2, -k3))`, maximum magnitude.
    pub fn hermitian_residual(&self) -> f64 {
        let [_, n2, n3] = self.grid.n();
        let h1 = self.grid.h1();
        let mut worst = 0.0f64;
        for plane in [0usize, h1 - 1] {
            for i3 in 0..n3 {
                let j3 = (n3 - i3) % n3;
                for i2 in 0..n2 {
                    let j2 = (n2 - i2) % n2;
                    let a = self.data[plane + h1 * (i2 + n2 * i3)];
                    let b = self.data[plane + h1 * (j2 + n2 * j3)];
                    worst = worst.max((a - b.conj()).norm());
                }
            }
        }
        worst
    }
}

impl PhysVector {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        PhysVector {
            comps: [
                PhysField::zeros(grid),
                PhysField::zeros(grid),
                PhysField::zeros(grid),
            ],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.comps[0].grid()
    }

    /// Lp norm of the pointwise Euclidean magnitude.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        let [c1, c2, c3] = [
            self.comps[0].data(),
            self.comps[1].data(),
            self.comps[2].data(),
        ];
        let mags = c1
            .iter()
            .zip(c2)
            .zip(c3)
            .map(|((a, b), c)| (a * a + b * b + c * c).sqrt());
        lp_from_magnitudes(mags, p, self.grid().cell_volume())
    }

    pub fn linf_norm(&self) -> f64 {
        self.lp_norm(f64::INFINITY).expect("inf norm is always valid")
    }
}

impl SpecVector {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        SpecVector {
            comps: [
                SpecField::zeros(grid),
                SpecField::zeros(grid),
                SpecField::zeros(grid),
            ],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.comps[0].grid()
    }

    pub fn l2_norm(&self) -> f64 {
        self.comps
            .iter()
            .map(|c| {
                let n = c.l2_norm();
                n * n
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Componentwise pair-weighted real inner product.
    pub fn inner(&self, other: &SpecVector) -> f64 {
        self.comps
            .iter()
            .zip(other.comps.iter())
            .map(|(a, b)| a.inner(b))
            .sum()
    }

    /// Divergence `sum_i i xi_i u_i`.
    pub fn divergence(&self) -> SpecField {
        let grid = self.grid().clone();
        let mut out = SpecField::zeros(&grid);
        let [u1, u2, u3] = [
            self.comps[0].data(),
            self.comps[1].data(),
            self.comps[2].data(),
        ];
        let data = &mut out.data;
        grid.for_each_mode(|idx, xi| {
            let s = Complex64::new(0.0, xi[0]) * u1[idx]
                + Complex64::new(0.0, xi[1]) * u2[idx]
                + Complex64::new(0.0, xi[2]) * u3[idx];
            data[idx] = s;
        });
        out
    }

    /// Relative divergence residual: `||div u||_2 / |||xi| u||_2`.
    /// Zero fields report zero.
    pub fn div_residual_rel(&self) -> f64 {
        let num = self.divergence().l2_norm();
        let den_sq: f64 = self
            .comps
            .iter()
            .map(|c| {
                let g = c.multiplied(|xi| {
                    (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt()
                });
                let n = g.l2_norm();
                n * n
            })
            .sum();
        let den = den_sq.sqrt();
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    pub fn scale(&mut self, a: f64) {
        for c in &mut self.comps {
            c.scale(a);
        }
    }

    pub fn axpy(&mut self, a: f64, other: &SpecVector) {
        for (dst, src) in self.comps.iter_mut().zip(&other.comps) {
            dst.axpy(a, src);
        }
    }

    pub fn sub(&self, other: &SpecVector) -> SpecVector {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// Overwrite with `src`, reusing the existing allocations.
    pub fn copy_from(&mut self, src: &SpecVector) {
        for (dst, s) in self.comps.iter_mut().zip(&src.comps) {
            dst.copy_from(s);
        }
    }

    pub fn dealias_truncate(&mut self) {
        for c in &mut self.comps {
            c.dealias_truncate();
        }
    }
}

fn signed(idx: usize, n: usize) -> i64 {
    if idx <= n / 2 {
        idx as i64
    } else {
        idx as i64 - n as i64
    }
}

/// Shared quadrature-Lp reduction over precomputed pointwise magnitudes.
fn lp_from_magnitudes(
    mags: impl Iterator<Item = f64>,
    p: f64,
    cell_volume: f64,
) -> Result<f64> {
    if p.is_infinite() && p > 0.0 {
        return Ok(mags.fold(0.0f64, f64::max));
    }
    if !(p >= 1.0) || p.is_nan() {
        return Err(Error::InvalidParam(format!(
            "Lp norm requires p >= 1 or p = inf, got {p}"
        )));
    }
    let sum: f64 = if p == 2.0 {
        mags.map(|m| m * m).sum()
    } else if p == 1.0 {
        mags.sum()
    } else {
        mags.map(|m| m.powf(p)).sum()
    };
    Ok((sum * cell_volume).powf(1.0 / p))
}
