//! Nonlinear pointwise operations that route through physical space.
//!
//! These are the plain, unfused forms used by diagnostics and norm
//! computations (the integrator has its own fused right-hand-side path).
//! Every product is dealiased by truncation after returning to the
//! spectral side.

use crate::fft::Fft3;
use crate::field::{PhysField, SpecField, SpecVector};

/// Dealiased pointwise product of two spectral scalars.
pub fn pointwise_mul(fft: &mut Fft3, a: &SpecField, b: &SpecField) -> SpecField {
    let pa = fft.inverse(a);
    let pb = fft.inverse(b);
    let mut prod = PhysField::zeros(fft.grid());
    pa.mul_into(&pb, &mut prod);
    let mut out = fft.forward(&prod);
    out.dealias_truncate();
    out
}

/// Dealiased advection `u . grad v` of a spectral scalar by a spectral
/// vector field.
pub fn advect(fft: &mut Fft3, u: &SpecVector, v: &SpecField) -> SpecField {
    let u_phys = [
        fft.inverse(&u.comps[0]),
        fft.inverse(&u.comps[1]),
        fft.inverse(&u.comps[2]),
    ];
    advect_with_phys(fft, &u_phys, v)
}

/// Advection of each component: `(u . grad) v`.
pub fn advect_vector(fft: &mut Fft3, u: &SpecVector, v: &SpecVector) -> SpecVector {
    let u_phys = [
        fft.inverse(&u.comps[0]),
        fft.inverse(&u.comps[1]),
        fft.inverse(&u.comps[2]),
    ];
    SpecVector {
        comps: [
            advect_with_phys(fft, &u_phys, &v.comps[0]),
            advect_with_phys(fft, &u_phys, &v.comps[1]),
            advect_with_phys(fft, &u_phys, &v.comps[2]),
        ],
    }
}

fn advect_with_phys(fft: &mut Fft3, u_phys: &[PhysField; 3], v: &SpecField) -> SpecField {
    let grid = fft.grid().clone();
    let mut acc = PhysField::zeros(&grid);
    let mut prod = PhysField::zeros(&grid);
    for axis in 0..3 {
        let dv = fft.inverse(&v.derivative(axis));
        u_phys[axis].mul_into(&dv, &mut prod);
        acc.axpy(1.0, &prod);
    }
    let mut out = fft.forward(&acc);
    out.dealias_truncate();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid, GridSpec};
    use std::sync::Arc;

    fn setup() -> (Arc<Grid>, Fft3) {
        let g = Grid::new(GridSpec::isotropic_spacing([32, 16, 16], 0.5)).unwrap();
        let fft = Fft3::new(g.clone());
        (g, fft)
    }

    #[test]
    fn product_of_cosines_splits_into_sum_and_difference_modes() {
        let (g, mut fft) = setup();
        let a = fft.forward(&PhysField::from_fn(&g, |x1, _, _| (2.0 * x1).cos()));
        let b = fft.forward(&PhysField::from_fn(&g, |x1, _, _| (3.0 * x1).cos()));
        let prod = pointwise_mul(&mut fft, &a, &b);
        // cos(2x) cos(3x) = (cos(x) + cos(5x)) / 2; both lie in band.
        let expect = fft.forward(&PhysField::from_fn(&g, |x1, _, _| {
            0.5 * (x1.cos() + (5.0 * x1).cos())
        }));
        let mut worst = 0.0f64;
        for (x, y) in prod.data().iter().zip(expect.data()) {
            worst = worst.max((x - y).norm());
        }
        assert!(worst < 1e-12, "product mismatch {worst}");
    }

    #[test]
    fn advection_by_a_constant_field_is_a_directional_derivative() {
        let (g, mut fft) = setup();
        let mut u = SpecVector::zeros(&g);
        // Constant velocity (3, 0, 0): pure DC mode. The stored DC
        // coefficient is value / inverse of the forward scale at DC.
        let one = fft.forward(&PhysField::from_fn(&g, |_, _, _| 1.0));
        u.comps[0] = one;
        u.comps[0].scale(3.0);
        let v = fft.forward(&PhysField::from_fn(&g, |x1, x2, _| (x1 + x2).sin()));
        let adv = advect(&mut fft, &u, &v);
        let expect = fft.forward(&PhysField::from_fn(&g, |x1, x2, _| {
            3.0 * (x1 + x2).cos()
        }));
        let mut worst = 0.0f64;
        for (x, y) in adv.data().iter().zip(expect.data()) {
            worst = worst.max((x - y).norm());
        }
        assert!(worst < 1e-12, "advection mismatch {worst}");
    }
}
