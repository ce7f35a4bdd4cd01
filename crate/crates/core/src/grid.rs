//! Anisotropic periodic grid: per-axis frequency lattice, physical sampling,
//! and the dealiasing rule for quadratic products.
//!
//! The box along axis `i` has period `2*pi / freq_spacing[i]` and carries
//! `points_per_axis[i]` equispaced samples. Spectral data lives on the
//! frequency lattice `k * freq_spacing[i]`, `|k| <= N_i/2`, stored in the
//! half-complex layout along axis 1 (real fields have Hermitian-symmetric
//! transforms, so only `k1 >= 0` is kept).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Serializable description of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Samples per axis (N1, N2, N3); each must be even and at least 4.
    pub points_per_axis: [usize; 3],
    /// Frequency lattice spacing per axis (inverse length units).
    pub freq_spacing: [f64; 3],
    /// Fraction of the Nyquist index kept by dealiasing, as a rational
    /// (numerator, denominator). Default 2/3, the standard rule for
    /// quadratic nonlinearities.
    #[serde(default = "default_dealias")]
    pub dealias_fraction: (u32, u32),
}

fn default_dealias() -> (u32, u32) {
    (2, 3)
}

impl GridSpec {
    pub fn new(points_per_axis: [usize; 3], freq_spacing: [f64; 3]) -> Self {
        Self {
            points_per_axis,
            freq_spacing,
            dealias_fraction: default_dealias(),
        }
    }

    /// Uniform frequency spacing on all three axes.
    pub fn isotropic_spacing(points_per_axis: [usize; 3], dxi: f64) -> Self {
        Self::new(points_per_axis, [dxi; 3])
    }
}

/// Resolution presets. The first axis carries the high-frequency content of
/// every construction, so only N1 grows with the preset; the transverse axes
/// hold a low-frequency envelope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Ci,
    Desk,
    Paper,
}

impl Preset {
    pub fn grid_spec(self) -> GridSpec {
        match self {
            Preset::Ci => GridSpec::isotropic_spacing([1024, 32, 32], 1.0 / 16.0),
            Preset::Desk => GridSpec::isotropic_spacing([4096, 64, 64], 1.0 / 16.0),
            Preset::Paper => GridSpec::isotropic_spacing([16384, 128, 128], 1.0 / 64.0),
        }
    }

    /// Default dyadic indices exercised by experiments on this preset.
    pub fn n_values(self) -> Vec<u32> {
        match self {
            Preset::Ci => vec![3],
            Preset::Desk | Preset::Paper => vec![3, 4, 5],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Ci => "ci",
            Preset::Desk => "desk",
            Preset::Paper => "paper",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ci" => Ok(Preset::Ci),
            "desk" => Ok(Preset::Desk),
            "paper" => Ok(Preset::Paper),
            other => Err(Error::InvalidParam(format!(
                "unknown preset '{other}' (expected ci, desk, or paper)"
            ))),
        }
    }
}

/// Validated grid with derived geometry. Immutable and shared via `Arc`.
#[derive(Debug)]
pub struct Grid {
    spec: GridSpec,
    dx: [f64; 3],
    period: [f64; 3],
    nyquist: [f64; 3],
    dealias_k: [i64; 3],
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Arc<Grid>> {
        for (axis, &n) in spec.points_per_axis.iter().enumerate() {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "points_per_axis[{axis}] = {n}; each axis needs an even count of at least 4"
                )));
            }
        }
        for (axis, &dxi) in spec.freq_spacing.iter().enumerate() {
            if !(dxi > 0.0) || !dxi.is_finite() {
                return Err(Error::InvalidGrid(format!(
                    "freq_spacing[{axis}] = {dxi}; spacings must be positive and finite"
                )));
            }
        }
        let (num, den) = spec.dealias_fraction;
        if num == 0 || den == 0 || num > den {
            return Err(Error::InvalidGrid(format!(
                "dealias_fraction {num}/{den} must lie in (0, 1]"
            )));
        }

        let mut dx = [0.0; 3];
        let mut period = [0.0; 3];
        let mut nyquist = [0.0; 3];
        let mut dealias_k = [0i64; 3];
        for axis in 0..3 {
            let n = spec.points_per_axis[axis];
            let dxi = spec.freq_spacing[axis];
            period[axis] = 2.0 * std::f64::consts::PI / dxi;
            dx[axis] = period[axis] / n as f64;
            nyquist[axis] = (n as f64 / 2.0) * dxi;
            // Keep |k| <= floor(fraction * N/2), evaluated in exact integer
            // arithmetic so the boundary is unambiguous.
            dealias_k[axis] = ((n as u64 / 2) * num as u64 / den as u64) as i64;
            if dealias_k[axis] < 1 {
                return Err(Error::InvalidGrid(format!(
                    "dealias band on axis {axis} keeps no modes; grid too small"
                )));
            }
        }

        Ok(Arc::new(Grid {
            spec,
            dx,
            period,
            nyquist,
            dealias_k,
        }))
    }

    pub fn from_preset(preset: Preset) -> Arc<Grid> {
        Grid::new(preset.grid_spec()).expect("presets are valid by construction")
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    #[inline]
    pub fn n(&self) -> [usize; 3] {
        self.spec.points_per_axis
    }

    /// Complex points along axis 1 in the half-complex spectral layout.
    #[inline]
    pub fn h1(&self) -> usize {
        self.spec.points_per_axis[0] / 2 + 1
    }

    #[inline]
    pub fn phys_len(&self) -> usize {
        let [n1, n2, n3] = self.n();
        n1 * n2 * n3
    }

    #[inline]
    pub fn spec_len(&self) -> usize {
        let [_, n2, n3] = self.n();
        self.h1() * n2 * n3
    }

    #[inline]
    pub fn dxi(&self, axis: usize) -> f64 {
        self.spec.freq_spacing[axis]
    }

    #[inline]
    pub fn dx(&self, axis: usize) -> f64 {
        self.dx[axis]
    }

    #[inline]
    pub fn period(&self, axis: usize) -> f64 {
        self.period[axis]
    }

    /// Largest representable frequency magnitude along an axis.
    #[inline]
    pub fn nyquist(&self, axis: usize) -> f64 {
        self.nyquist[axis]
    }

    /// Largest frequency index kept by the dealiasing rule.
    #[inline]
    pub fn dealias_k(&self, axis: usize) -> i64 {
        self.dealias_k[axis]
    }

    /// Largest frequency magnitude kept by the dealiasing rule.
    #[inline]
    pub fn dealias_band(&self, axis: usize) -> f64 {
        self.dealias_k[axis] as f64 * self.dxi(axis)
    }

    /// Quadrature cell volume (product of sample spacings).
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        self.dx[0] * self.dx[1] * self.dx[2]
    }

    /// Volume of the periodic box.
    #[inline]
    pub fn box_volume(&self) -> f64 {
        self.period[0] * self.period[1] * self.period[2]
    }

    /// Signed frequency index for a storage index along a full (wrapped)
    /// axis: indices above N/2 represent negative frequencies.
    #[inline]
    pub fn k_signed(&self, axis: usize, idx: usize) -> i64 {
        let n = self.spec.points_per_axis[axis];
        if idx <= n / 2 {
            idx as i64
        } else {
            idx as i64 - n as i64
        }
    }

    /// Frequency coordinate for a spectral storage index `(i1, i2, i3)`;
    /// axis 1 is half-complex so `i1` maps directly to `k1 = i1 >= 0`.
    #[inline]
    pub fn xi_at(&self, i1: usize, i2: usize, i3: usize) -> [f64; 3] {
        [
            i1 as f64 * self.dxi(0),
            self.k_signed(1, i2) as f64 * self.dxi(1),
            self.k_signed(2, i3) as f64 * self.dxi(2),
        ]
    }

    /// Multiplicity of a half-complex plane under Hermitian symmetry:
    /// interior `k1` planes stand for a conjugate pair, the `k1 = 0` and
    /// Nyquist planes for themselves.
    #[inline]
    pub fn pair_weight(&self, i1: usize) -> f64 {
        if i1 == 0 || i1 == self.n()[0] / 2 {
            1.0
        } else {
            2.0
        }
    }

    /// Visit every stored spectral mode in a fixed deterministic order,
    /// passing the flat storage index and the frequency vector.
    #[inline]
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, [f64; 3])) {
        let [_, n2, n3] = self.n();
        let h1 = self.h1();
        let dxi1 = self.dxi(0);
        let mut idx = 0;
        for i3 in 0..n3 {
            let x3 = self.k_signed(2, i3) as f64 * self.dxi(2);
            for i2 in 0..n2 {
                let x2 = self.k_signed(1, i2) as f64 * self.dxi(1);
                for i1 in 0..h1 {
                    f(idx, [i1 as f64 * dxi1, x2, x3]);
                    idx += 1;
                }
            }
        }
    }

    /// True if the signed index triple lies inside the dealias box.
    #[inline]
    pub fn in_dealias_box(&self, k: [i64; 3]) -> bool {
        k[0].abs() <= self.dealias_k[0]
            && k[1].abs() <= self.dealias_k[1]
            && k[2].abs() <= self.dealias_k[2]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_geometry_matches_definitions() {
        let g = Grid::new(GridSpec::isotropic_spacing([16, 16, 16], 1.0)).unwrap();
        for axis in 0..3 {
            assert!((g.period(axis) - 2.0 * std::f64::consts::PI).abs() < 1e-15);
            assert_eq!(g.nyquist(axis), 8.0);
            // period * freq_spacing = 2*pi by definition.
            assert!((g.period(axis) * g.dxi(axis) - 2.0 * std::f64::consts::PI).abs() < 1e-15);
        }
    }

    #[test]
    fn desk_scale_grid_geometry() {
        let g = Grid::new(GridSpec::isotropic_spacing([4096, 64, 64], 1.0 / 16.0)).unwrap();
        for axis in 0..3 {
            assert!((g.period(axis) - 32.0 * std::f64::consts::PI).abs() < 1e-12);
        }
        assert_eq!(g.nyquist(0), 128.0);
        assert_eq!(g.nyquist(1), 2.0);
        assert_eq!(g.nyquist(2), 2.0);
    }

    #[test]
    fn odd_axis_count_rejected() {
        assert!(Grid::new(GridSpec::isotropic_spacing([15, 16, 16], 1.0)).is_err());
        assert!(Grid::new(GridSpec::isotropic_spacing([16, 16, 16], 0.0)).is_err());
        assert!(Grid::new(GridSpec::isotropic_spacing([16, 16, 16], -1.0)).is_err());
    }

    #[test]
    fn dealias_indices_use_integer_arithmetic() {
        let g = Grid::new(GridSpec::isotropic_spacing([1024, 32, 32], 1.0 / 16.0)).unwrap();
        // floor(2/3 * 512) = 341, floor(2/3 * 16) = 10.
        assert_eq!(g.dealias_k(0), 341);
        assert_eq!(g.dealias_k(1), 10);
        assert!((g.dealias_band(0) - 341.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn signed_indices_wrap() {
        let g = Grid::new(GridSpec::isotropic_spacing([16, 8, 8], 1.0)).unwrap();
        assert_eq!(g.k_signed(1, 0), 0);
        assert_eq!(g.k_signed(1, 3), 3);
        assert_eq!(g.k_signed(1, 4), 4);
        assert_eq!(g.k_signed(1, 5), -3);
        assert_eq!(g.k_signed(1, 7), -1);
    }

    #[test]
    fn preset_round_trip_names() {
        for p in [Preset::Ci, Preset::Desk, Preset::Paper] {
            let back: Preset = p.as_str().parse().unwrap();
            assert_eq!(p, back);
        }
        assert!("full".parse::<Preset>().is_err());
    }
}
