//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// The envelope profile cannot be resolved on the grid's frequency
    /// lattice: its plateau would fall between lattice points.
    #[error(
        "frequency spacing {dxi_max} exceeds the profile plateau radius {plateau}; \
         use the relaxed profile (plateau 1/16, support 1/4) or refine the grid"
    )]
    ProfileTooCoarse { dxi_max: f64, plateau: f64 },

    /// A requested carrier does not fit inside the alias-free band.
    #[error(
        "carrier frequency {carrier:.4} (index n={n}) plus its envelope margin exceeds the \
         alias-free band {band:.4}; at the current spacing the first axis needs at least \
         N1 = {minimal_n1} points"
    )]
    CarrierOutsideBand {
        n: u32,
        carrier: f64,
        band: f64,
        minimal_n1: usize,
    },

    #[error("velocity magnitude grew by a factor {ratio:.3e} by t = {t:.6e}; integration aborted")]
    BlowUp { t: f64, ratio: f64 },

    #[error("snapshot time {t} lies outside the integration horizon [0, {horizon}]")]
    SnapshotBeyondHorizon { t: f64, horizon: f64 },

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("field bundle: {0}")]
    BundleFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
