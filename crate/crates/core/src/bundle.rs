//! On-disk field bundles.
//!
//! A bundle is a directory holding `meta.json` plus one raw data file per
//! component. Component files are little-endian 64-bit floats. Physical
//! bundles store samples in x1-fastest order; spectral bundles store the
//! full frequency lattice in k1-fastest order with interleaved (re, im)
//! pairs, so a reader needs no knowledge of the half-complex transform
//! layout. On read, the redundant Hermitian half is folded back and checked
//! for consistency.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::{PhysField, PhysVector, SpecField, SpecVector};
use crate::grid::{Grid, GridSpec};

/// Format tag stored in `meta.json`; bump on any layout change.
pub const BUNDLE_FORMAT: &str = "field-bundle-v1";

/// Largest tolerated relative mismatch, against the component's peak
/// magnitude, between a stored upper-half mode and the conjugate of its
/// mirror when folding a spectral bundle back to half-complex storage.
/// Files written by this crate reproduce the mirror exactly; the margin
/// only forgives round-off in externally produced files.
pub const HERMITIAN_READ_TOL: f64 = 1e-9;

const PHYSICAL_LAYOUT: &str = "x1-fastest";
const SPECTRAL_LAYOUT: &str = "k1-fastest-full-lattice";
const NORMALIZATION: &str = "spectral coefficients are l2-isometric against the quadrature L2 norm (forward scale sqrt(cell_volume / n_total))";

/// Contents of `meta.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleMeta {
    pub format: String,
    pub grid: GridSpec,
    pub components: usize,
    /// "physical" or "spectral".
    pub representation: String,
    pub normalization: String,
    pub layout: String,
    pub component_files: Vec<String>,
    pub provenance: Value,
}

/// Field payload of a bundle, in whichever representation it was stored.
pub enum BundleData {
    Physical(PhysVector),
    Spectral(SpecVector),
}

pub struct Bundle {
    pub meta: BundleMeta,
    pub data: BundleData,
}

fn component_file_names(components: usize) -> Vec<String> {
    (0..components).map(|c| format!("component_{c}.f64")).collect()
}

fn write_meta(dir: &Path, meta: &BundleMeta) -> Result<()> {
    let mut text = serde_json::to_string_pretty(meta)?;
    text.push('\n');
    fs::write(dir.join("meta.json"), text)?;
    Ok(())
}

fn write_f64_stream(path: &Path, chunks: impl Iterator<Item = Vec<f64>>) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    let mut bytes = Vec::new();
    for chunk in chunks {
        bytes.clear();
        bytes.reserve(chunk.len() * 8);
        for v in &chunk {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&bytes)?;
    }
    w.flush()?;
    Ok(())
}

fn read_f64_exact(path: &Path, count: usize) -> Result<Vec<f64>> {
    let file = fs::File::open(path)?;
    let len = file.metadata()?.len();
    let expect = (count as u64) * 8;
    if len != expect {
        return Err(Error::BundleFormat(format!(
            "{}: expected {expect} bytes ({count} little-endian f64), found {len}",
            path.display()
        )));
    }
    let mut r = BufReader::new(file);
    let mut out = Vec::with_capacity(count);
    let mut buf = vec![0u8; 8 * 65536];
    let mut remaining = count;
    while remaining > 0 {
        let take = remaining.min(65536) * 8;
        r.read_exact(&mut buf[..take])?;
        for raw in buf[..take].chunks_exact(8) {
            out.push(f64::from_le_bytes(raw.try_into().expect("8-byte chunk")));
        }
        remaining -= take / 8;
    }
    Ok(out)
}

/// Write a physical vector field as a bundle at `dir` (created if absent).
pub fn write_phys_vector(dir: &Path, field: &PhysVector, provenance: Value) -> Result<()> {
    fs::create_dir_all(dir)?;
    let grid = field.grid();
    let files = component_file_names(3);
    for (comp, name) in field.comps.iter().zip(&files) {
        write_f64_stream(
            &dir.join(name),
            comp.data().chunks(65536).map(|c| c.to_vec()),
        )?;
    }
    let meta = BundleMeta {
        format: BUNDLE_FORMAT.to_string(),
        grid: grid.spec().clone(),
        components: 3,
        representation: "physical".to_string(),
        normalization: NORMALIZATION.to_string(),
        layout: PHYSICAL_LAYOUT.to_string(),
        component_files: files,
        provenance,
    };
    write_meta(dir, &meta)
}

/// Write a spectral vector field as a bundle at `dir` (created if absent).
/// The stored array covers the full frequency lattice: modes with
/// k1 index above the half-complex range are emitted as the complex
/// conjugate of their mirror mode.
pub fn write_spec_vector(dir: &Path, field: &SpecVector, provenance: Value) -> Result<()> {
    fs::create_dir_all(dir)?;
    let grid = field.grid().clone();
    let files = component_file_names(3);
    let [n1, n2, n3] = grid.n();
    let h1 = grid.h1();
    for (comp, name) in field.comps.iter().zip(&files) {
        let data = comp.data();
        let rows = (0..n2 * n3).map(|line| {
            let i2 = line % n2;
            let i3 = line / n2;
            let half = &data[h1 * line..h1 * (line + 1)];
            let mi2 = (n2 - i2) % n2;
            let mi3 = (n3 - i3) % n3;
            let mirror = &data[h1 * (mi2 + n2 * mi3)..h1 * (mi2 + n2 * mi3) + h1];
            let mut row = Vec::with_capacity(2 * n1);
            for v in half {
                row.push(v.re);
                row.push(v.im);
            }
            for i1 in h1..n1 {
                let m = mirror[n1 - i1];
                row.push(m.re);
                row.push(-m.im);
            }
            row
        });
        write_f64_stream(&dir.join(name), rows)?;
    }
    let meta = BundleMeta {
        format: BUNDLE_FORMAT.to_string(),
        grid: grid.spec().clone(),
        components: 3,
        representation: "spectral".to_string(),
        normalization: NORMALIZATION.to_string(),
        layout: SPECTRAL_LAYOUT.to_string(),
        component_files: files,
        provenance,
    };
    write_meta(dir, &meta)
}

fn fold_spectral(grid: &Arc<Grid>, raw: &[f64], name: &str) -> Result<SpecField> {
    let [n1, n2, n3] = grid.n();
    let h1 = grid.h1();
    let full: Vec<Complex64> = raw
        .chunks_exact(2)
        .map(|p| Complex64::new(p[0], p[1]))
        .collect();
    let peak = full.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let mut out = vec![Complex64::new(0.0, 0.0); grid.spec_len()];
    let mut worst = 0.0f64;
    for i3 in 0..n3 {
        for i2 in 0..n2 {
            let line = i2 + n2 * i3;
            let src = &full[n1 * line..n1 * (line + 1)];
            out[h1 * line..h1 * (line + 1)].copy_from_slice(&src[..h1]);
            let mi2 = (n2 - i2) % n2;
            let mi3 = (n3 - i3) % n3;
            let mirror = &full[n1 * (mi2 + n2 * mi3)..n1 * (mi2 + n2 * mi3) + n1];
            for i1 in h1..n1 {
                worst = worst.max((src[i1] - mirror[n1 - i1].conj()).norm());
            }
        }
    }
    if peak > 0.0 && worst > HERMITIAN_READ_TOL * peak {
        return Err(Error::BundleFormat(format!(
            "{name}: spectral data is not Hermitian-symmetric (worst relative mirror mismatch {:.3e})",
            worst / peak
        )));
    }
    Ok(SpecField::from_raw(grid.clone(), out))
}

/// Read a bundle directory written by `write_phys_vector` /
/// `write_spec_vector` (or by a compatible external producer).
pub fn read_bundle(dir: &Path) -> Result<Bundle> {
    let meta_path = dir.join("meta.json");
    let text = fs::read_to_string(&meta_path).map_err(|e| {
        Error::BundleFormat(format!("{}: {e}", meta_path.display()))
    })?;
    let meta: BundleMeta = serde_json::from_str(&text)?;
    if meta.format != BUNDLE_FORMAT {
        return Err(Error::BundleFormat(format!(
            "unsupported bundle format {:?} (expected {BUNDLE_FORMAT:?})",
            meta.format
        )));
    }
    if meta.components != meta.component_files.len() || meta.components != 3 {
        return Err(Error::BundleFormat(format!(
            "expected 3 components with matching file list, found {} components and {} files",
            meta.components,
            meta.component_files.len()
        )));
    }
    let grid = Grid::new(meta.grid.clone())?;
    let paths: Vec<PathBuf> = meta.component_files.iter().map(|f| dir.join(f)).collect();
    let data = match meta.representation.as_str() {
        "physical" => {
            if meta.layout != PHYSICAL_LAYOUT {
                return Err(Error::BundleFormat(format!(
                    "physical bundle with layout {:?} (expected {PHYSICAL_LAYOUT:?})",
                    meta.layout
                )));
            }
            let mut comps = Vec::with_capacity(3);
            for path in &paths {
                let raw = read_f64_exact(path, grid.phys_len())?;
                comps.push(PhysField::from_raw(grid.clone(), raw));
            }
            let comps: [PhysField; 3] =
                comps.try_into().map_err(|_| Error::InvalidData("component count".into()))?;
            BundleData::Physical(PhysVector { comps })
        }
        "spectral" => {
            if meta.layout != SPECTRAL_LAYOUT {
                return Err(Error::BundleFormat(format!(
                    "spectral bundle with layout {:?} (expected {SPECTRAL_LAYOUT:?})",
                    meta.layout
                )));
            }
            let [n1, n2, n3] = grid.n();
            let mut comps = Vec::with_capacity(3);
            for (path, name) in paths.iter().zip(&meta.component_files) {
                let raw = read_f64_exact(path, 2 * n1 * n2 * n3)?;
                comps.push(fold_spectral(&grid, &raw, name)?);
            }
            let comps: [SpecField; 3] =
                comps.try_into().map_err(|_| Error::InvalidData("component count".into()))?;
            BundleData::Spectral(SpecVector { comps })
        }
        other => {
            return Err(Error::BundleFormat(format!(
                "unknown representation {other:?} (expected \"physical\" or \"spectral\")"
            )))
        }
    };
    Ok(Bundle { meta, data })
}
