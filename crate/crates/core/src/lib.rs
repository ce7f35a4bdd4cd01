//! Core algorithms for a desk-scale computational laboratory around
//! frequency-localized analysis of incompressible rotating flows:
//! dyadic frequency decompositions, Besov-type norms, divergence-free
//! projection, oscillatory initial-data constructions, a pseudo-spectral
//! integrator, and the scripted experiments built on top of them.

pub mod besov;
pub mod bundle;
pub mod construct;
pub mod error;
pub mod experiments;
pub mod field;
pub mod fit;
pub mod fft;
pub mod grid;
pub mod leray;
pub mod littlewood_paley;
pub mod ops;
pub mod report;
pub mod rng;
pub mod solver;

pub use besov::{BesovParams, BesovResult, BesovRow};
pub use error::{Error, Result};
pub use experiments::{ExperimentConfig, ExperimentId};
pub use field::{PhysField, PhysVector, SpecField, SpecVector};
pub use fft::Fft3;
pub use grid::{Grid, GridSpec, Preset};
pub use littlewood_paley::FilterBank;

/// Configure the global worker pool from the `BEL_THREADS` environment
/// variable. Call once at startup; later calls (or an unset/invalid
/// variable) leave the default pool in place.
pub fn init_thread_pool() {
    if let Ok(v) = std::env::var("BEL_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}
