//! Oscillatory divergence-free initial data.
//!
//! Every family is built from one smooth low-frequency bump profile and a
//! high-frequency carrier wave:
//!
//! * `theta(x) = phi(x1) phi(x2) phi(x3)`, a tensor product of one
//!   1D profile `phi` whose Fourier coefficients follow a radial bump
//!   (plateau 1, then a smooth falloff to 0);
//! * a carrier `cos(lambda_n x1)` with nominal frequency
//!   `lambda_n = (17/12) 2^n`, snapped to the nearest lattice frequency
//!   so the wave is exactly periodic on the grid;
//! * the perpendicular gradient `(-d2 psi, d1 psi, 0)` of the scalar
//!   `psi = theta cos(lambda_n x1)`, which is divergence-free by
//!   construction and has zero third component.
//!
//! Fields are assembled pointwise from 1D tables with analytically
//! differentiated factors, so they are exact band-limited functions on
//! the lattice: incompressibility and spectral support claims hold to
//! roundoff, independent of any transform convention.

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{PhysField, PhysVector};
use crate::grid::Grid;
use crate::littlewood_paley::smooth_step;

/// Radial shape of the 1D profile's Fourier coefficients: 1 on
/// `[0, plateau]`, smooth monotone falloff, 0 from `support` on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub plateau: f64,
    pub support: f64,
}

impl ProfileSpec {
    /// Narrow profile used when the grid resolves it.
    pub fn narrow() -> Self {
        ProfileSpec { plateau: 1.0 / 64.0, support: 1.0 / 8.0 }
    }

    /// Wider fallback for coarse frequency spacings.
    pub fn relaxed() -> Self {
        ProfileSpec { plateau: 1.0 / 16.0, support: 1.0 / 4.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.plateau > 0.0 && self.plateau < self.support) {
            return Err(Error::InvalidParam(format!(
                "profile needs 0 < plateau < support, got plateau {} support {}",
                self.plateau, self.support
            )));
        }
        // The tensor-product bump must stay well inside the unit ball in
        // frequency so that low and high frequency content never mix:
        // 3 support^2 < 1/4 keeps |xi| of the bump below 1/2.
        if 3.0 * self.support * self.support >= 0.25 {
            return Err(Error::InvalidParam(format!(
                "profile support {} too wide: 3 support^2 must stay below 1/4",
                self.support
            )));
        }
        Ok(())
    }

    /// Pick the profile for a grid: the narrow one when every axis
    /// resolves its plateau, otherwise the relaxed one. The returned flag
    /// records whether the substitution happened.
    pub fn for_grid(grid: &Grid) -> Result<(Self, bool)> {
        let dxi_max = (0..3).map(|a| grid.dxi(a)).fold(0.0f64, f64::max);
        let narrow = Self::narrow();
        if dxi_max <= narrow.plateau {
            narrow.validate()?;
            return Ok((narrow, false));
        }
        let relaxed = Self::relaxed();
        if dxi_max <= relaxed.plateau {
            relaxed.validate()?;
            return Ok((relaxed, true));
        }
        Err(Error::ProfileTooCoarse { dxi_max, plateau: relaxed.plateau })
    }

    /// Fourier coefficient shape at radius `rho`.
    pub fn hat(&self, rho: f64) -> f64 {
        smooth_step((self.support - rho) / (self.support - self.plateau))
    }
}

/// A carrier frequency snapped onto the axis-1 lattice.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Carrier {
    pub n: u32,
    /// Nominal frequency `(17/12) 2^n`.
    pub nominal: f64,
    /// Lattice index of the snapped frequency along axis 1.
    pub k_index: i64,
    /// Snapped frequency `k_index * dxi_1`.
    pub lambda: f64,
}

impl Carrier {
    /// Snap the block-`n` carrier to the grid, requiring it to sit inside
    /// the axis-1 dealias band with a unit margin for the profile demand.
    pub fn for_grid(grid: &Grid, n: u32) -> Result<Self> {
        let nominal = (17.0 / 12.0) * 2f64.powi(n as i32);
        let dxi = grid.dxi(0);
        let k_index = (nominal / dxi).round() as i64;
        let lambda = k_index as f64 * dxi;
        let band = grid.dealias_band(0);
        if lambda + 1.0 > band {
            let minimal_n1 = minimal_points_for(grid, lambda + 1.0);
            return Err(Error::CarrierOutsideBand {
                n,
                carrier: lambda,
                band,
                minimal_n1,
            });
        }
        Ok(Carrier { n, nominal, k_index, lambda })
    }
}

/// Smallest even axis-1 point count whose dealias band reaches `target`
/// at this grid's spacing and dealias fraction.
fn minimal_points_for(grid: &Grid, target: f64) -> usize {
    let spec = grid.spec();
    let mut n1 = grid.n()[0];
    loop {
        n1 += 2;
        let mut candidate = spec.clone();
        candidate.points_per_axis[0] = n1;
        match Grid::new(candidate) {
            Ok(g) if g.dealias_band(0) >= target => return n1,
            _ if n1 > 1 << 26 => return n1,
            _ => continue,
        }
    }
}

/// How a multi-block series weights its terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesWeight {
    /// `n^(-2) 2^(-n(s+1))`: summable profile, finite norm for every
    /// third index.
    Weighted,
    /// `2^(-n(s+1))`: flat dyadic profile, finite only for the infinite
    /// third index.
    Flat,
}

impl SeriesWeight {
    pub fn coefficient(&self, n: u32, s: f64) -> f64 {
        let dyadic = (-(n as f64) * (s + 1.0)).exp2();
        match self {
            SeriesWeight::Weighted => dyadic / ((n as f64) * (n as f64)),
            SeriesWeight::Flat => dyadic,
        }
    }
}

/// One term of a build: which carrier it used and with what coefficient.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermRecord {
    pub n: u32,
    pub coefficient: f64,
    pub carrier_nominal: f64,
    pub carrier_snapped: f64,
    pub carrier_index: i64,
}

/// Everything needed to reproduce a constructed field.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BuildProvenance {
    pub family: String,
    pub s: f64,
    pub profile: ProfileSpec,
    pub relaxed_profile_substituted: bool,
    pub amplitude_rule: String,
    pub terms: Vec<TermRecord>,
}

/// 1D tables of the profile and its derivative along one axis.
struct Axis1D {
    phi: Vec<f64>,
    dphi: Vec<f64>,
}

/// Exact samples of `phi(x) = (dxi / 2 pi) sum_k hat(|k| dxi) e^(i k dxi x)`
/// and its derivative at the `n` lattice points of one axis.
fn profile_tables(profile: &ProfileSpec, n: usize, dxi: f64) -> Axis1D {
    let k_top = (profile.support / dxi).ceil() as usize + 1;
    assert!(
        2 * k_top < n,
        "profile of support {} does not fit axis with {} points at spacing {}",
        profile.support,
        n,
        dxi
    );
    let amp = dxi / (2.0 * PI);
    let mut phi = vec![0.0; n];
    let mut dphi = vec![0.0; n];
    for i in 0..n {
        let mut v = profile.hat(0.0);
        let mut dv = 0.0;
        for k in 1..=k_top {
            let hat = profile.hat(k as f64 * dxi);
            if hat == 0.0 {
                continue;
            }
            let angle = 2.0 * PI * ((k * i) % n) as f64 / n as f64;
            v += 2.0 * hat * angle.cos();
            dv -= 2.0 * hat * (k as f64 * dxi) * angle.sin();
        }
        phi[i] = amp * v;
        dphi[i] = amp * dv;
    }
    Axis1D { phi, dphi }
}

/// Carrier tables `cos(lambda x1)` and the analytic derivative factors of
/// the modulated profile `A(x) = phi(x) cos(lambda x)`.
fn modulated_tables(axis: &Axis1D, k_index: i64, lambda: f64, n: usize) -> Axis1D {
    let mut a = vec![0.0; n];
    let mut da = vec![0.0; n];
    let k = k_index as usize % n;
    for i in 0..n {
        let angle = 2.0 * PI * ((k * i) % n) as f64 / n as f64;
        let (c, s) = (angle.cos(), angle.sin());
        a[i] = axis.phi[i] * c;
        da[i] = axis.dphi[i] * c - lambda * axis.phi[i] * s;
    }
    Axis1D { phi: a, dphi: da }
}

/// Fill a perpendicular-gradient field from separable axis tables:
/// `comp1 = -S(x1) phi'(x2) phi(x3)`, `comp2 = S'(x1) phi(x2) phi(x3)`,
/// `comp3 = 0`, where `(S, S')` is the (possibly modulated, possibly
/// summed) axis-1 factor.
fn fill_perp_grad(grid: &Arc<Grid>, s1: &Axis1D, a2: &Axis1D, a3: &Axis1D) -> PhysVector {
    let [n1, n2, _] = grid.n();
    let mut out = PhysVector::zeros(grid);
    let fill = |data: &mut [f64], t1: &[f64], t2: &[f64], t3: &[f64], sign: f64| {
        use rayon::prelude::*;
        data.par_chunks_exact_mut(n1)
            .enumerate()
            .for_each(|(line, chunk)| {
                let i2 = line % n2;
                let i3 = line / n2;
                let outer = sign * t2[i2] * t3[i3];
                for (i1, v) in chunk.iter_mut().enumerate() {
                    *v = outer * t1[i1];
                }
            });
    };
    fill(out.comps[0].data_mut(), &s1.phi, &a2.dphi, &a3.phi, -1.0);
    fill(out.comps[1].data_mut(), &s1.dphi, &a2.phi, &a3.phi, 1.0);
    out
}

/// The scalar bump `theta(x) = phi(x1) phi(x2) phi(x3)`.
pub fn build_theta(grid: &Arc<Grid>, profile: &ProfileSpec) -> PhysField {
    let [n1, n2, _] = grid.n();
    let t1 = profile_tables(profile, grid.n()[0], grid.dxi(0));
    let t2 = profile_tables(profile, grid.n()[1], grid.dxi(1));
    let t3 = profile_tables(profile, grid.n()[2], grid.dxi(2));
    let mut out = PhysField::zeros(grid);
    use rayon::prelude::*;
    out.data_mut()
        .par_chunks_exact_mut(n1)
        .enumerate()
        .for_each(|(line, chunk)| {
            let i2 = line % n2;
            let i3 = line / n2;
            let outer = t2.phi[i2] * t3.phi[i3];
            for (i1, v) in chunk.iter_mut().enumerate() {
                *v = outer * t1.phi[i1];
            }
        });
    out
}

/// Closed-form 1D L2 norm of the profile on its torus, from the
/// coefficient-side sum (an independent route used by tests).
pub fn profile_l2_1d(profile: &ProfileSpec, dxi: f64) -> f64 {
    let k_top = (profile.support / dxi).ceil() as usize + 1;
    let mut sum = profile.hat(0.0).powi(2);
    for k in 1..=k_top {
        sum += 2.0 * profile.hat(k as f64 * dxi).powi(2);
    }
    (dxi / (2.0 * PI) * sum).sqrt()
}

/// Shared builder: a sum of modulated terms plus optionally one
/// unmodulated term, all sharing the same profile.
fn build_sum(
    grid: &Arc<Grid>,
    profile: &ProfileSpec,
    modulated: &[(Carrier, f64)],
    unmodulated: f64,
) -> PhysVector {
    let [n1, _, _] = grid.n();
    let axis1 = profile_tables(profile, n1, grid.dxi(0));
    let axis2 = profile_tables(profile, grid.n()[1], grid.dxi(1));
    let axis3 = profile_tables(profile, grid.n()[2], grid.dxi(2));

    let mut s1 = Axis1D { phi: vec![0.0; n1], dphi: vec![0.0; n1] };
    if unmodulated != 0.0 {
        for i in 0..n1 {
            s1.phi[i] += unmodulated * axis1.phi[i];
            s1.dphi[i] += unmodulated * axis1.dphi[i];
        }
    }
    for (carrier, coef) in modulated {
        let m = modulated_tables(&axis1, carrier.k_index, carrier.lambda, n1);
        for i in 0..n1 {
            s1.phi[i] += coef * m.phi[i];
            s1.dphi[i] += coef * m.dphi[i];
        }
    }
    fill_perp_grad(grid, &s1, &axis2, &axis3)
}

fn provenance(
    family: &str,
    s: f64,
    profile: ProfileSpec,
    substituted: bool,
    amplitude_rule: &str,
    terms: Vec<TermRecord>,
) -> BuildProvenance {
    BuildProvenance {
        family: family.to_string(),
        s,
        profile,
        relaxed_profile_substituted: substituted,
        amplitude_rule: amplitude_rule.to_string(),
        terms,
    }
}

/// Single oscillatory block: `2^(-n(s+1)) perp_grad(theta cos(lambda_n x1))`.
pub fn build_fn(grid: &Arc<Grid>, n: u32, s: f64) -> Result<(PhysVector, BuildProvenance)> {
    let (profile, substituted) = ProfileSpec::for_grid(grid)?;
    let carrier = Carrier::for_grid(grid, n)?;
    let coef = (-(n as f64) * (s + 1.0)).exp2();
    let field = build_sum(grid, &profile, &[(carrier, coef)], 0.0);
    let prov = provenance(
        "fn",
        s,
        profile,
        substituted,
        "2^(-n(s+1)) perp_grad(theta cos(lambda_n x1))",
        vec![TermRecord {
            n,
            coefficient: coef,
            carrier_nominal: carrier.nominal,
            carrier_snapped: carrier.lambda,
            carrier_index: carrier.k_index,
        }],
    );
    Ok((field, prov))
}

/// Low-frequency companion block: `2^(-n) perp_grad(theta)`.
pub fn build_gn(grid: &Arc<Grid>, n: u32) -> Result<(PhysVector, BuildProvenance)> {
    let (profile, substituted) = ProfileSpec::for_grid(grid)?;
    let coef = (-(n as f64)).exp2();
    let field = build_sum(grid, &profile, &[], coef);
    let prov = provenance(
        "gn",
        f64::NAN,
        profile,
        substituted,
        "2^(-n) perp_grad(theta)",
        vec![TermRecord {
            n,
            coefficient: coef,
            carrier_nominal: 0.0,
            carrier_snapped: 0.0,
            carrier_index: 0,
        }],
    );
    Ok((field, prov))
}

/// Superposition of oscillatory blocks over an inclusive range of `n`.
pub fn build_series(
    grid: &Arc<Grid>,
    n_range: std::ops::RangeInclusive<u32>,
    s: f64,
    weight: SeriesWeight,
) -> Result<(PhysVector, BuildProvenance)> {
    let (profile, substituted) = ProfileSpec::for_grid(grid)?;
    let mut terms = Vec::new();
    let mut modulated = Vec::new();
    for n in n_range {
        let carrier = Carrier::for_grid(grid, n)?;
        let coef = weight.coefficient(n, s);
        modulated.push((carrier, coef));
        terms.push(TermRecord {
            n,
            coefficient: coef,
            carrier_nominal: carrier.nominal,
            carrier_snapped: carrier.lambda,
            carrier_index: carrier.k_index,
        });
    }
    let field = build_sum(grid, &profile, &modulated, 0.0);
    let rule = match weight {
        SeriesWeight::Weighted => "sum_n n^(-2) 2^(-n(s+1)) perp_grad(theta cos(lambda_n x1))",
        SeriesWeight::Flat => "sum_n 2^(-n(s+1)) perp_grad(theta cos(lambda_n x1))",
    };
    let family = match weight {
        SeriesWeight::Weighted => "series_weighted",
        SeriesWeight::Flat => "series_flat",
    };
    let prov = provenance(family, s, profile, substituted, rule, terms);
    Ok((field, prov))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{GridSpec, Preset};
    use approx::assert_relative_eq;

    #[test]
    fn narrow_profile_is_substituted_on_coarse_grids() {
        let desk = Grid::from_preset(Preset::Desk);
        let (p, substituted) = ProfileSpec::for_grid(&desk).unwrap();
        assert!(substituted);
        assert_eq!(p, ProfileSpec::relaxed());
    }

    #[test]
    fn too_coarse_spacing_is_rejected() {
        let g = Grid::new(GridSpec::isotropic_spacing([64, 16, 16], 0.125)).unwrap();
        match ProfileSpec::for_grid(&g) {
            Err(Error::ProfileTooCoarse { dxi_max, .. }) => assert_eq!(dxi_max, 0.125),
            other => panic!("expected ProfileTooCoarse, got {other:?}"),
        }
    }

    #[test]
    fn relaxed_profile_lattice_values() {
        let p = ProfileSpec::relaxed();
        let dxi = 1.0 / 16.0;
        assert_eq!(p.hat(0.0), 1.0);
        assert_eq!(p.hat(dxi), 1.0);
        let v2 = p.hat(2.0 * dxi);
        let v3 = p.hat(3.0 * dxi);
        assert_relative_eq!(v2 + v3, 1.0, max_relative = 1e-14);
        assert!(v2 > 0.8 && v2 < 0.84, "falloff value {v2}");
        assert_eq!(p.hat(4.0 * dxi), 0.0);
    }

    #[test]
    fn carrier_snaps_to_lattice() {
        let desk = Grid::from_preset(Preset::Desk);
        let c = Carrier::for_grid(&desk, 3).unwrap();
        assert_eq!(c.k_index, 181);
        assert_relative_eq!(c.lambda, 181.0 / 16.0);
        assert_relative_eq!(c.nominal, 17.0 / 12.0 * 8.0);
    }

    #[test]
    fn carrier_outside_band_names_a_sufficient_grid() {
        let g = Grid::new(GridSpec::isotropic_spacing([256, 32, 32], 1.0 / 16.0)).unwrap();
        // Band edge: 85 * (1/16) / ... points 256 -> half 128 -> k 85 -> 5.3.
        match Carrier::for_grid(&g, 3) {
            Err(Error::CarrierOutsideBand { n, minimal_n1, carrier, .. }) => {
                assert_eq!(n, 3);
                let bigger = Grid::new(GridSpec {
                    points_per_axis: [minimal_n1, 32, 32],
                    freq_spacing: [1.0 / 16.0; 3],
                    dealias_fraction: (2, 3),
                })
                .unwrap();
                assert!(bigger.dealias_band(0) >= carrier + 1.0);
                // And it is minimal: two fewer points no longer fit.
                let smaller = Grid::new(GridSpec {
                    points_per_axis: [minimal_n1 - 2, 32, 32],
                    freq_spacing: [1.0 / 16.0; 3],
                    dealias_fraction: (2, 3),
                })
                .unwrap();
                assert!(smaller.dealias_band(0) < carrier + 1.0);
            }
            other => panic!("expected CarrierOutsideBand, got {other:?}"),
        }
    }

    #[test]
    fn theta_l2_matches_coefficient_side_oracle() {
        let g = Grid::new(GridSpec::isotropic_spacing([64, 64, 64], 1.0 / 16.0)).unwrap();
        let (p, _) = ProfileSpec::for_grid(&g).unwrap();
        let theta = build_theta(&g, &p);
        let quadrature = theta.lp_norm(2.0).unwrap();
        let oracle = profile_l2_1d(&p, 1.0 / 16.0).powi(3);
        assert_relative_eq!(quadrature, oracle, max_relative = 1e-10);
        assert!(theta.data()[0] > 0.0, "bump is positive at the origin");
    }

    #[test]
    fn series_weights_follow_their_rules() {
        let s = 3.0;
        assert_relative_eq!(
            SeriesWeight::Flat.coefficient(3, s),
            2f64.powi(-12),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            SeriesWeight::Weighted.coefficient(3, s),
            2f64.powi(-12) / 9.0,
            max_relative = 1e-15
        );
    }

    #[test]
    fn empty_series_is_zero() {
        let g = Grid::new(GridSpec::isotropic_spacing([64, 16, 16], 1.0 / 16.0)).unwrap();
        #[allow(clippy::reversed_empty_ranges)]
        let (field, prov) = build_series(&g, 5..=4, 3.0, SeriesWeight::Flat).unwrap();
        assert!(prov.terms.is_empty());
        assert_eq!(field.linf_norm(), 0.0);
    }
}
