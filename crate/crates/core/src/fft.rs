//! Three-dimensional transforms between physical samples and spectral
//! coefficients.
//!
//! Axis 1 uses a real-to-complex transform (real fields have Hermitian
//! spectra, so only `k1 >= 0` is stored); axes 2 and 3 use complex
//! transforms over strided lines. Plans and large scratch buffers are
//! cached in [`Fft3`], which is therefore `&mut` in every call; fields
//! themselves stay immutable.
//!
//! Normalization: stored coefficients are scaled so that the plain l2 norm
//! of the spectral data (with conjugate-pair weights for the half-complex
//! layout) equals the quadrature L2 norm of the physical samples. The
//! round trip is the identity to machine precision.

use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::field::{PhysField, SpecField};
use crate::grid::Grid;

pub struct Fft3 {
    grid: Arc<Grid>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    axis2_fwd: Arc<dyn Fft<f64>>,
    axis2_inv: Arc<dyn Fft<f64>>,
    axis3_fwd: Arc<dyn Fft<f64>>,
    axis3_inv: Arc<dyn Fft<f64>>,
    spec_buf: Vec<Complex64>,
    forward_scale: f64,
    inverse_scale: f64,
}

impl Fft3 {
    pub fn new(grid: Arc<Grid>) -> Self {
        let [n1, n2, n3] = grid.n();
        let mut real_planner = RealFftPlanner::<f64>::new();
        let r2c = real_planner.plan_fft_forward(n1);
        let c2r = real_planner.plan_fft_inverse(n1);
        let mut planner = FftPlanner::<f64>::new();
        let axis2_fwd = planner.plan_fft_forward(n2);
        let axis2_inv = planner.plan_fft_inverse(n2);
        let axis3_fwd = planner.plan_fft_forward(n3);
        let axis3_inv = planner.plan_fft_inverse(n3);

        let n_total = (n1 * n2 * n3) as f64;
        let cell = grid.cell_volume();
        // Forward scale nu makes the transform an l2 isometry against the
        // quadrature norm: sum |coef|^2 (pair-weighted) = sum |f|^2 * cell.
        let forward_scale = (cell / n_total).sqrt();
        let inverse_scale = 1.0 / (forward_scale * n_total);

        Fft3 {
            spec_buf: vec![Complex64::new(0.0, 0.0); grid.spec_len()],
            grid,
            r2c,
            c2r,
            axis2_fwd,
            axis2_inv,
            axis3_fwd,
            axis3_inv,
            forward_scale,
            inverse_scale,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// Physical samples to spectral coefficients.
    pub fn forward(&mut self, f: &PhysField) -> SpecField {
        assert!(
            Arc::ptr_eq(f.grid(), &self.grid),
            "field belongs to a different grid"
        );
        let [n1, n2, n3] = self.grid.n();
        let h1 = self.grid.h1();
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.spec_len()];

        // Axis 1: real-to-complex over contiguous lines.
        let r2c = &self.r2c;
        let scratch_len = r2c.get_scratch_len();
        let src = f.data();
        use rayon::prelude::*;
        src.par_chunks_exact(n1)
            .zip(out.par_chunks_exact_mut(h1))
            .for_each_init(
                || {
                    (
                        vec![0.0f64; n1],
                        vec![Complex64::new(0.0, 0.0); scratch_len],
                    )
                },
                |(line, scratch), (input, output)| {
                    line.copy_from_slice(input);
                    r2c.process_with_scratch(line, output, scratch)
                        .expect("axis-1 transform length mismatch");
                },
            );

        self.complex_axes_forward(&mut out, h1, n2, n3);

        let nu = self.forward_scale;
        out.par_chunks_mut(1 << 16).for_each(|chunk| {
            for v in chunk {
                *v *= nu;
            }
        });
        SpecField::from_raw(self.grid.clone(), out)
    }

    /// Spectral coefficients to physical samples.
    pub fn inverse(&mut self, f: &SpecField) -> PhysField {
        assert!(
            Arc::ptr_eq(f.grid(), &self.grid),
            "field belongs to a different grid"
        );
        let [n1, n2, n3] = self.grid.n();
        let h1 = self.grid.h1();

        let scale = self.inverse_scale;
        for (dst, src) in self.spec_buf.iter_mut().zip(f.data()) {
            *dst = src * scale;
        }
        // Inverse transforms along axes 3 and 2 (unnormalized; the scale
        // above already accounts for the 1/N factors of all three axes).
        let mut buf = std::mem::take(&mut self.spec_buf);
        self.complex_axes_inverse(&mut buf, h1, n2, n3);

        // Axis 1: complex-to-real over contiguous lines. The transform is
        // entitled to assume real DC/Nyquist bins; any residual imaginary
        // part there is floating-point noise from the axis-2/3 passes, so
        // it is zeroed rather than folded into the output.
        let mut out = vec![0.0f64; self.grid.phys_len()];
        let c2r = &self.c2r;
        let scratch_len = c2r.get_scratch_len();
        use rayon::prelude::*;
        buf.par_chunks_exact_mut(h1)
            .zip(out.par_chunks_exact_mut(n1))
            .for_each_init(
                || vec![Complex64::new(0.0, 0.0); scratch_len],
                |scratch, (line, output)| {
                    line[0].im = 0.0;
                    line[h1 - 1].im = 0.0;
                    c2r.process_with_scratch(line, output, scratch)
                        .expect("axis-1 inverse transform failed");
                },
            );
        self.spec_buf = buf;
        PhysField::from_raw(self.grid.clone(), out)
    }

    pub fn forward_vector(&mut self, u: &crate::field::PhysVector) -> crate::field::SpecVector {
        crate::field::SpecVector {
            comps: [
                self.forward(&u.comps[0]),
                self.forward(&u.comps[1]),
                self.forward(&u.comps[2]),
            ],
        }
    }

    pub fn inverse_vector(&mut self, u: &crate::field::SpecVector) -> crate::field::PhysVector {
        crate::field::PhysVector {
            comps: [
                self.inverse(&u.comps[0]),
                self.inverse(&u.comps[1]),
                self.inverse(&u.comps[2]),
            ],
        }
    }

    fn complex_axes_forward(&self, buf: &mut [Complex64], h1: usize, n2: usize, n3: usize) {
        Self::axis2_pass(&*self.axis2_fwd, buf, h1, n2, n3);
        Self::axis3_pass(&*self.axis3_fwd, buf, h1, n2, n3);
    }

    fn complex_axes_inverse(&self, buf: &mut [Complex64], h1: usize, n2: usize, n3: usize) {
        Self::axis3_pass(&*self.axis3_inv, buf, h1, n2, n3);
        Self::axis2_pass(&*self.axis2_inv, buf, h1, n2, n3);
    }

    /// Strided lines over the second axis; each `i3` slab is independent.
    fn axis2_pass(fft: &dyn Fft<f64>, buf: &mut [Complex64], h1: usize, n2: usize, n3: usize) {
        use rayon::prelude::*;
        let slab = h1 * n2;
        debug_assert_eq!(buf.len(), slab * n3);
        let scratch_len = fft.get_inplace_scratch_len();
        buf.par_chunks_exact_mut(slab).for_each_init(
            || {
                (
                    vec![Complex64::new(0.0, 0.0); n2],
                    vec![Complex64::new(0.0, 0.0); scratch_len],
                )
            },
            |(line, scratch), slab_data| {
                for i1 in 0..h1 {
                    for i2 in 0..n2 {
                        line[i2] = slab_data[i2 * h1 + i1];
                    }
                    fft.process_with_scratch(line, scratch);
                    for i2 in 0..n2 {
                        slab_data[i2 * h1 + i1] = line[i2];
                    }
                }
            },
        );
    }

    /// Strided lines over the third axis (stride `h1 * n2`).
    fn axis3_pass(fft: &dyn Fft<f64>, buf: &mut [Complex64], h1: usize, n2: usize, n3: usize) {
        let stride = h1 * n2;
        let mut line = vec![Complex64::new(0.0, 0.0); n3];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for i2 in 0..n2 {
            for i1 in 0..h1 {
                let base = i2 * h1 + i1;
                for i3 in 0..n3 {
                    line[i3] = buf[base + i3 * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for i3 in 0..n3 {
                    buf[base + i3 * stride] = line[i3];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn small_grid() -> Arc<Grid> {
        Grid::new(GridSpec::isotropic_spacing([16, 8, 8], 1.0)).unwrap()
    }

    #[test]
    fn constant_field_transforms_to_pure_dc() {
        let grid = small_grid();
        let mut fft = Fft3::new(grid.clone());
        let f = PhysField::from_fn(&grid, |_, _, _| 1.0);
        let s = fft.forward(&f);
        let mut off_dc = 0.0f64;
        grid.for_each_mode(|idx, xi| {
            let mag = s.data()[idx].norm();
            if xi == [0.0, 0.0, 0.0] {
                assert!(mag > 0.0);
            } else {
                off_dc = off_dc.max(mag);
            }
        });
        assert!(off_dc < 1e-12, "off-DC leakage {off_dc}");
        // Parseval: quadrature L2 of the constant 1 equals sqrt(box volume).
        let l2 = s.l2_norm();
        assert!((l2 - grid.box_volume().sqrt()).abs() / l2 < 1e-13);
    }

    #[test]
    fn cosine_occupies_exactly_one_stored_mode() {
        let grid = small_grid();
        let mut fft = Fft3::new(grid.clone());
        let k = 3.0;
        let f = PhysField::from_fn(&grid, |x1, _, _| (k * x1).cos());
        let s = fft.forward(&f);
        let mut stray = 0.0f64;
        let mut peak = 0.0f64;
        grid.for_each_mode(|idx, xi| {
            let mag = s.data()[idx].norm();
            if xi == [k, 0.0, 0.0] {
                peak = mag;
            } else {
                stray = stray.max(mag);
            }
        });
        assert!(peak > 0.0);
        assert!(stray / peak < 1e-13, "stray/peak = {}", stray / peak);
    }

    #[test]
    fn round_trip_is_identity() {
        let grid = small_grid();
        let mut fft = Fft3::new(grid.clone());
        let f = PhysField::from_fn(&grid, |x1, x2, x3| {
            (1.3 * x1).sin() * (2.0 * x2).cos() + 0.5 * (x3 + 0.2 * x1).cos()
        });
        let s = fft.forward(&f);
        let back = fft.inverse(&s);
        let mut num = 0.0f64;
        let mut den = 0.0f64;
        for (a, b) in f.data().iter().zip(back.data()) {
            num = num.max((a - b).abs());
            den = den.max(a.abs());
        }
        assert!(num / den < 1e-12, "round-trip relative error {}", num / den);
    }
}
