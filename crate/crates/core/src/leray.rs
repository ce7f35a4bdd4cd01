//! Divergence-free projection and related frequency-side operators.
//!
//! The projector acts mode by mode as `I - xi xi^T / |xi|^2`, removing
//! the component parallel to the frequency vector; the zero mode is left
//! unchanged (a spatial constant has no divergence to remove). The
//! complement keeps only the parallel part and zeroes the zero mode.

use num_complex::Complex64;

use crate::field::{SpecField, SpecVector};

/// In-place divergence-free projection.
pub fn project(u: &mut SpecVector) {
    let grid = u.grid().clone();
    let [c1, c2, c3] = &mut u.comps;
    let (d1, d2, d3) = (c1.data_mut(), c2.data_mut(), c3.data_mut());
    grid.for_each_mode(|idx, xi| {
        let rho_sq = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if rho_sq == 0.0 {
            return;
        }
        let dot = xi[0] * d1[idx] + xi[1] * d2[idx] + xi[2] * d3[idx];
        let f = dot / rho_sq;
        d1[idx] -= xi[0] * f;
        d2[idx] -= xi[1] * f;
        d3[idx] -= xi[2] * f;
    });
}

/// In-place complement of the projection (gradient part only).
pub fn complement(u: &mut SpecVector) {
    let grid = u.grid().clone();
    let [c1, c2, c3] = &mut u.comps;
    let (d1, d2, d3) = (c1.data_mut(), c2.data_mut(), c3.data_mut());
    grid.for_each_mode(|idx, xi| {
        let rho_sq = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        if rho_sq == 0.0 {
            d1[idx] = Complex64::new(0.0, 0.0);
            d2[idx] = Complex64::new(0.0, 0.0);
            d3[idx] = Complex64::new(0.0, 0.0);
            return;
        }
        let dot = xi[0] * d1[idx] + xi[1] * d2[idx] + xi[2] * d3[idx];
        let f = dot / rho_sq;
        d1[idx] = xi[0] * f;
        d2[idx] = xi[1] * f;
        d3[idx] = xi[2] * f;
    });
}

pub fn projected(u: &SpecVector) -> SpecVector {
    let mut out = u.clone();
    project(&mut out);
    out
}

pub fn complemented(u: &SpecVector) -> SpecVector {
    let mut out = u.clone();
    complement(&mut out);
    out
}

/// Riesz-type operator along `axis`: multiply by `-i xi_axis / |xi|`,
/// zero at the zero mode.
pub fn riesz(f: &SpecField, axis: usize) -> SpecField {
    assert!(axis < 3);
    let mut out = f.clone();
    let grid = out.grid().clone();
    let data = out.data_mut();
    grid.for_each_mode(|idx, xi| {
        let rho = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
        if rho == 0.0 {
            data[idx] = Complex64::new(0.0, 0.0);
        } else {
            let v = data[idx];
            let m = xi[axis] / rho;
            // multiply by -i m
            data[idx] = Complex64::new(m * v.im, -m * v.re);
        }
    });
    out
}

/// Component `(i, k)` of the projector applied via the Riesz route
/// `delta_ik + R_i R_k`, for cross-checking the direct formula.
pub fn project_via_riesz(u: &SpecVector) -> SpecVector {
    let grid = u.grid().clone();
    let mut out = SpecVector::zeros(&grid);
    for i in 0..3 {
        let mut acc = u.comps[i].clone();
        for k in 0..3 {
            let rk = riesz(&u.comps[k], k);
            let rirk = riesz(&rk, i);
            acc.axpy(1.0, &rirk);
        }
        out.comps[i] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridSpec};
    use crate::rng::{random_band_field, random_divfree_field};
    use std::sync::Arc;

    fn grid() -> Arc<Grid> {
        Grid::new(GridSpec::isotropic_spacing([16, 8, 8], 0.5)).unwrap()
    }

    #[test]
    fn projection_output_is_divergence_free_and_idempotent() {
        let g = grid();
        let mut u = SpecVector {
            comps: [
                random_band_field(&g, 1),
                random_band_field(&g, 2),
                random_band_field(&g, 3),
            ],
        };
        project(&mut u);
        assert!(u.div_residual_rel() < 1e-14);
        let twice = projected(&u);
        let diff = twice.sub(&u);
        assert!(diff.l2_norm() / u.l2_norm() < 1e-14);
    }

    #[test]
    fn projection_fixes_divergence_free_fields() {
        let g = grid();
        let u = random_divfree_field(&g, 11);
        let pu = projected(&u);
        assert!(pu.sub(&u).l2_norm() / u.l2_norm() < 1e-13);
    }

    #[test]
    fn complement_annihilates_and_completes() {
        let g = grid();
        let u = SpecVector {
            comps: [
                random_band_field(&g, 5),
                random_band_field(&g, 6),
                random_band_field(&g, 7),
            ],
        };
        let p = projected(&u);
        let q = complemented(&u);
        // Q of a projected field vanishes.
        assert!(complemented(&p).l2_norm() / u.l2_norm() < 1e-14);
        // P + Q differs from the identity only in the zero mode, which
        // the random field leaves empty.
        let mut sum = p.clone();
        sum.axpy(1.0, &q);
        assert!(sum.sub(&u).l2_norm() / u.l2_norm() < 1e-14);
    }

    #[test]
    fn riesz_route_matches_direct_projection() {
        let g = grid();
        let u = SpecVector {
            comps: [
                random_band_field(&g, 8),
                random_band_field(&g, 9),
                random_band_field(&g, 10),
            ],
        };
        let direct = projected(&u);
        let via = project_via_riesz(&u);
        // The Riesz route leaves the zero mode alone too (R kills it),
        // matching the direct convention away from machine noise.
        assert!(via.sub(&direct).l2_norm() / u.l2_norm() < 1e-13);
    }
}
