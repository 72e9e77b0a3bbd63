//! Error type shared by every module of the crate.

use thiserror::Error;

/// Minimum separation between distinct atom locations. Anything closer is
/// rejected instead of merged, since splitting mass between two nearly equal
/// locations would corrupt variation counts.
pub const MIN_ATOM_SEPARATION: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters or inconsistent inputs.
    #[error("configuration error: {0}")]
    Config(String),

    /// Two atoms are distinct but closer than [`MIN_ATOM_SEPARATION`].
    #[error("near-duplicate atom locations {0:?} and {1:?} (distance {2:e})")]
    NearDuplicateAtoms(Vec<f64>, Vec<f64>, f64),

    /// An enumeration or expansion would exceed its configured cap.
    #[error("resource cap exceeded: needed about {needed}, cap {cap}")]
    ResourceCap { needed: u64, cap: u64 },

    /// Adaptive quadrature stopped before reaching the requested tolerance.
    #[error("quadrature did not converge: achieved {achieved:e}, target {target:e}")]
    Quadrature { achieved: f64, target: f64 },

    /// A lattice basis is numerically singular.
    #[error("singular basis: |det| = {det:e} below threshold {threshold:e}")]
    SingularBasis { det: f64, threshold: f64 },

    /// The measure failed the translation-boundedness gate.
    #[error("not translation bounded: {0}")]
    NotTranslationBounded(String),

    /// Two evaluation routes that must agree did not; usually indicates a
    /// broken transform sign convention.
    #[error("transform convention mismatch: {0}")]
    ConventionMismatch(String),

    /// A harness refused to run because a prerequisite check failed.
    #[error("prerequisite failed: {0}")]
    Prerequisite(String),
}

pub type Result<T> = std::result::Result<T, Error>;
