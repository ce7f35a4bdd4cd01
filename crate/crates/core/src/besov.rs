//! Besov-type norms assembled from dyadic block profiles.
//!
//! The profile of a field is the sequence `||block_j f||_Lp` over the
//! ladder; the norm with parameters `(s, p, r)` is the little-lr norm of
//! `2^(j s) * profile_j`. Profiles are the expensive part (one inverse
//! transform per block and component unless `p = 2`), so they are exposed
//! separately and can be reweighted for many `(s, r)` pairs at no cost.
//!
//! `p` and `r` may be infinite; in JSON they serialize as the string
//! `"inf"` since JSON has no infinity literal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::Fft3;
use crate::field::{SpecField, SpecVector};
use crate::littlewood_paley::FilterBank;

/// Serialize a possibly-infinite exponent as a number or `"inf"`.
pub mod maybe_inf {
    use serde::de::{self, Visitor};
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, ser: S) -> std::result::Result<S::Ok, S::Error> {
        if v.is_infinite() && *v > 0.0 {
            ser.serialize_str("inf")
        } else {
            ser.serialize_f64(*v)
        }
    }

    struct MaybeInf;

    impl<'de> Visitor<'de> for MaybeInf {
        type Value = f64;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            f.write_str("a number or the string \"inf\"")
        }

        fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<f64, E> {
            Ok(v)
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<f64, E> {
            Ok(v as f64)
        }

        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<f64, E> {
            if v == "inf" {
                Ok(f64::INFINITY)
            } else {
                Err(E::custom(format!(
                    "expected a number or \"inf\", got {v:?}"
                )))
            }
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<f64, D::Error> {
        de.deserialize_any(MaybeInf)
    }
}

/// Parameters `(s, p, r)` of a Besov-type norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BesovParams {
    pub s: f64,
    #[serde(with = "maybe_inf")]
    pub p: f64,
    #[serde(with = "maybe_inf")]
    pub r: f64,
}

impl Default for BesovParams {
    fn default() -> Self {
        BesovParams { s: 3.0, p: 2.0, r: 2.0 }
    }
}

impl BesovParams {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self> {
        let params = BesovParams { s, p, r };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.s.is_finite() {
            return Err(Error::InvalidParam(format!(
                "regularity index must be finite, got {}",
                self.s
            )));
        }
        for (name, v) in [("p", self.p), ("r", self.r)] {
            if v.is_nan() || v < 1.0 {
                return Err(Error::InvalidParam(format!(
                    "exponent {name} must be >= 1 or inf, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Whether `(s, p, r)` lies in the well-posedness range: either
    /// `s > 3/p + 1` with `p` strictly between 1 and infinity, or the
    /// endpoint `s = 3/p + 1` with third index 1.
    pub fn admissible(&self) -> bool {
        let critical = 3.0 / self.p + 1.0;
        let p_interior = self.p > 1.0 && self.p.is_finite();
        (p_interior && self.s > critical)
            || (p_interior && self.s == critical && self.r == 1.0)
    }
}

/// One ladder rung of a norm evaluation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BesovRow {
    pub j: i32,
    pub block_lp: f64,
    pub weighted: f64,
}

/// A fully assembled norm with its per-block breakdown.
#[derive(Debug, Clone, Serialize)]
pub struct BesovResult {
    pub params: BesovParams,
    pub value: f64,
    pub rows: Vec<BesovRow>,
}

/// Per-block Lp magnitudes of a scalar field over the inhomogeneous
/// ladder. Independent of `s` and `r`; reusable across reweightings.
pub fn block_profile_scalar(
    fft: &mut Fft3,
    bank: &FilterBank,
    f: &SpecField,
    p: f64,
) -> Result<Vec<(i32, f64)>> {
    if p == 2.0 {
        return Ok(l2_profile(bank, &[f], -1, false));
    }
    let mut rows = Vec::new();
    for j in bank.j_range() {
        let block = bank.block(f, j);
        rows.push((j, fft.inverse(&block).lp_norm(p)?));
    }
    Ok(rows)
}

/// Per-block Lp magnitudes of a vector field (pointwise Euclidean
/// magnitude inside the Lp integral).
pub fn block_profile(
    fft: &mut Fft3,
    bank: &FilterBank,
    u: &SpecVector,
    p: f64,
) -> Result<Vec<(i32, f64)>> {
    if p == 2.0 {
        let comps: Vec<&SpecField> = u.comps.iter().collect();
        return Ok(l2_profile(bank, &comps, -1, false));
    }
    let mut rows = Vec::new();
    for j in bank.j_range() {
        rows.push((j, block_lp_vector(fft, bank, u, j, p, false)?));
    }
    Ok(rows)
}

/// Homogeneous-ladder profile (band bumps at every `j`, down to the
/// smallest block that touches a lattice mode).
pub fn homogeneous_block_profile(
    fft: &mut Fft3,
    bank: &FilterBank,
    u: &SpecVector,
    p: f64,
) -> Result<Vec<(i32, f64)>> {
    if p == 2.0 {
        let comps: Vec<&SpecField> = u.comps.iter().collect();
        return Ok(l2_profile(bank, &comps, bank.j_floor(), true));
    }
    let mut rows = Vec::new();
    for j in bank.j_floor()..=bank.j_max() {
        rows.push((j, block_lp_vector(fft, bank, u, j, p, true)?));
    }
    Ok(rows)
}

/// All spectral block l2 magnitudes in one pass over the stored modes.
///
/// A mode of radius rho meets at most a handful of annuli (the bump
/// support spans under two octaves), so each mode's pair-weighted energy
/// is routed to its few candidate blocks directly instead of
/// materializing every block. Equivalent to the block-by-block route up
/// to summation order.
fn l2_profile(
    bank: &FilterBank,
    comps: &[&SpecField],
    j_lo: i32,
    homogeneous: bool,
) -> Vec<(i32, f64)> {
    let j_max = bank.j_max();
    let grid = comps[0].grid().clone();
    let h1 = grid.h1();
    // log2 of the bump support edges 3/4 and 8/3.
    let log2_hi = (8.0f64 / 3.0).log2();
    let log2_lo = (3.0f64 / 4.0).log2();
    let mut acc = vec![0.0f64; (j_max - j_lo + 1) as usize];
    for f in comps {
        let data = f.data();
        grid.for_each_mode(|idx, xi| {
            let v = data[idx];
            let e = grid.pair_weight(idx % h1) * v.norm_sqr();
            if e == 0.0 {
                return;
            }
            let rho = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
            // The low-pass block is not an annulus: it catches everything
            // below the bump's outer edge, the mean mode included.
            if !homogeneous && rho < 8.0 / 3.0 {
                let m = crate::littlewood_paley::low_pass(rho);
                acc[(-1 - j_lo) as usize] += e * m * m;
            }
            if rho == 0.0 {
                return;
            }
            let l = rho.log2();
            // Annulus j is active when 3/4 < rho / 2^j < 8/3; widen by one
            // on each side and let the multiplier zero out the excess.
            let annulus_floor = if homogeneous { j_lo } else { 0 };
            let first = ((l - log2_hi).ceil() as i32 - 1).max(annulus_floor);
            let last = ((l - log2_lo).floor() as i32 + 1).min(j_max);
            for j in first..=last {
                let m = if homogeneous {
                    bank.homogeneous_multiplier(j, rho)
                } else {
                    bank.multiplier(j, rho)
                };
                if m > 0.0 {
                    acc[(j - j_lo) as usize] += e * m * m;
                }
            }
        });
    }
    acc.iter()
        .enumerate()
        .map(|(k, &sq)| (j_lo + k as i32, sq.sqrt()))
        .collect()
}

fn block_lp_vector(
    fft: &mut Fft3,
    bank: &FilterBank,
    u: &SpecVector,
    j: i32,
    p: f64,
    homogeneous: bool,
) -> Result<f64> {
    let block = if homogeneous {
        bank.homogeneous_block_vector(u, j)
    } else {
        bank.block_vector(u, j)
    };
    if p == 2.0 {
        return Ok(block.l2_norm());
    }
    let phys = crate::field::PhysVector {
        comps: [
            fft.inverse(&block.comps[0]),
            fft.inverse(&block.comps[1]),
            fft.inverse(&block.comps[2]),
        ],
    };
    phys.lp_norm(p)
}

/// Weight a profile by `2^(j s)` and take the little-lr norm, summing in
/// descending magnitude order.
pub fn assemble(profile: &[(i32, f64)], s: f64, r: f64) -> BesovResult {
    let rows: Vec<BesovRow> = profile
        .iter()
        .map(|&(j, block_lp)| BesovRow {
            j,
            block_lp,
            weighted: (j as f64 * s).exp2() * block_lp,
        })
        .collect();
    let value = lr_norm(rows.iter().map(|r| r.weighted), r);
    BesovResult {
        params: BesovParams { s, p: f64::NAN, r },
        value,
        rows,
    }
}

/// Little-lr norm of a nonnegative sequence, accumulated from the largest
/// entry down and scaled by the peak for stability.
pub fn lr_norm(values: impl Iterator<Item = f64>, r: f64) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(|a, b| b.partial_cmp(a).expect("norm values are never NaN"));
    let peak = v.first().copied().unwrap_or(0.0);
    if peak == 0.0 {
        return 0.0;
    }
    if r.is_infinite() {
        return peak;
    }
    let mut sum = 0.0;
    for x in &v {
        sum += (x / peak).powf(r);
    }
    peak * sum.powf(1.0 / r)
}

/// Full norm of a vector field: profile plus assembly.
pub fn besov_norm(
    fft: &mut Fft3,
    bank: &FilterBank,
    u: &SpecVector,
    params: &BesovParams,
) -> Result<BesovResult> {
    params.validate()?;
    let profile = block_profile(fft, bank, u, params.p)?;
    let mut out = assemble(&profile, params.s, params.r);
    out.params = *params;
    Ok(out)
}

pub fn besov_norm_scalar(
    fft: &mut Fft3,
    bank: &FilterBank,
    f: &SpecField,
    params: &BesovParams,
) -> Result<BesovResult> {
    params.validate()?;
    let profile = block_profile_scalar(fft, bank, f, params.p)?;
    let mut out = assemble(&profile, params.s, params.r);
    out.params = *params;
    Ok(out)
}

/// Homogeneous-norm counterpart of [`besov_norm`].
pub fn homogeneous_besov_norm(
    fft: &mut Fft3,
    bank: &FilterBank,
    u: &SpecVector,
    params: &BesovParams,
) -> Result<BesovResult> {
    params.validate()?;
    let profile = homogeneous_block_profile(fft, bank, u, params.p)?;
    let mut out = assemble(&profile, params.s, params.r);
    out.params = *params;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn admissibility_table() {
        // (s, p, r, expected)
        let cases = [
            (3.0, 2.0, 2.0, true),   // default: 3 > 2.5
            (2.5, 2.0, 2.0, false),  // endpoint with r != 1
            (2.5, 2.0, 1.0, true),   // endpoint with r = 1
            (2.4, 2.0, 1.0, false),  // below the endpoint
            (3.0, 1.0, 1.0, false),  // p = 1 excluded
            (4.0, f64::INFINITY, 1.0, false), // p = inf excluded
            (5.0, 4.0, f64::INFINITY, true),  // 5 > 1.75
        ];
        for (s, p, r, expect) in cases {
            let params = BesovParams { s, p, r };
            assert_eq!(params.admissible(), expect, "({s}, {p}, {r})");
        }
    }

    #[test]
    fn inf_exponents_serialize_as_strings() {
        let params = BesovParams { s: 3.0, p: f64::INFINITY, r: 2.0 };
        let json = serde_json::to_string(&params).unwrap();
        assert!(json.contains("\"inf\""));
        let back: BesovParams = serde_json::from_str(&json).unwrap();
        assert_eq!(back, params);
        let parsed: BesovParams =
            serde_json::from_str(r#"{"s": 3, "p": 2, "r": "inf"}"#).unwrap();
        assert!(parsed.r.is_infinite());
        assert!(serde_json::from_str::<BesovParams>(r#"{"s":3,"p":"nope","r":1}"#).is_err());
    }

    #[test]
    fn lr_norm_matches_closed_forms() {
        let v = [3.0, 4.0];
        assert_relative_eq!(lr_norm(v.iter().copied(), 2.0), 5.0, max_relative = 1e-15);
        assert_relative_eq!(lr_norm(v.iter().copied(), 1.0), 7.0, max_relative = 1e-15);
        assert_eq!(lr_norm(v.iter().copied(), f64::INFINITY), 4.0);
        assert_eq!(lr_norm(std::iter::empty(), 2.0), 0.0);
    }

    #[test]
    fn assemble_weights_blocks_geometrically() {
        let profile = vec![(-1, 1.0), (0, 1.0), (1, 1.0), (2, 1.0)];
        let out = assemble(&profile, 2.0, f64::INFINITY);
        // Weights are 2^(2 j): 0.25, 1, 4, 16.
        assert_relative_eq!(out.value, 16.0, max_relative = 1e-15);
        assert_relative_eq!(out.rows[0].weighted, 0.25, max_relative = 1e-15);
        let sum = assemble(&profile, 2.0, 1.0);
        assert_relative_eq!(sum.value, 21.25, max_relative = 1e-15);
    }

    #[test]
    fn invalid_exponents_are_rejected() {
        assert!(BesovParams::new(3.0, 0.5, 2.0).is_err());
        assert!(BesovParams::new(f64::INFINITY, 2.0, 2.0).is_err());
        assert!(BesovParams::new(3.0, 2.0, 0.0).is_err());
        assert!(BesovParams::new(3.0, 2.0, 1.0).is_ok());
    }

    /// The one-pass spectral l2 profile and the materialize-every-block
    /// route must agree to round-off, including the mean mode and the
    /// lowest lattice frequencies that only the low-pass block catches.
    #[test]
    fn one_pass_l2_profile_matches_block_route() {
        let grid = crate::grid::Grid::new(crate::grid::GridSpec::isotropic_spacing(
            [64, 16, 16],
            1.0 / 16.0,
        ))
        .unwrap();
        let bank = FilterBank::new(grid.clone());
        let mut u = crate::rng::random_divfree_field(&grid, 21);
        // Give the mean and near-zero modes some energy as well.
        u.comps[0].data_mut()[0] = num_complex::Complex64::new(0.7, 0.0);

        let comps: Vec<&SpecField> = u.comps.iter().collect();
        let fast = l2_profile(&bank, &comps, -1, false);
        for (j, lp) in fast {
            let direct = bank.block_vector(&u, j).l2_norm();
            assert_relative_eq!(lp, direct, max_relative = 1e-12, epsilon = 1e-15);
        }

        let fast_scalar = l2_profile(&bank, &[&u.comps[1]], -1, false);
        for (j, lp) in fast_scalar {
            let direct = bank.block(&u.comps[1], j).l2_norm();
            assert_relative_eq!(lp, direct, max_relative = 1e-12, epsilon = 1e-15);
        }

        let fast_hom = l2_profile(&bank, &comps, bank.j_floor(), true);
        for (j, lp) in fast_hom {
            let direct = bank.homogeneous_block_vector(&u, j).l2_norm();
            assert_relative_eq!(lp, direct, max_relative = 1e-12, epsilon = 1e-15);
        }
    }
}
