//! Atomic measures, lattice combs, Schwartz test functions, Bohr means, and
//! inhomogeneous Kronecker approximation, at desk scale.
//!
//! The crate realizes pure point measures as finite window restrictions and
//! provides the estimators and certificates needed to check, numerically and
//! where possible exactly, the identities connecting a measure with its
//! Fourier transform: the generalized Poisson formula for lattice combs, the
//! Parseval identity for Bohr means of trigonometric polynomials, the
//! squared-mass translation bound of a pure point transform, and the
//! phase-alignment mass concentration argument driven by Kronecker
//! approximation.
//!
//! Modules:
//! - [`measure`]: windowed atomic measures with variation, translation-bound
//!   and growth estimators.
//! - [`lattice`]: full-rank lattices, duals, and comb specifications with
//!   closed-form transforms.
//! - [`schwartz`]: test-function families, transforms, norms, and the two
//!   translation-bound certificates.
//! - [`almost_periodic`]: trigonometric polynomials, Bohr coefficients,
//!   Parseval series, and almost-period scans.
//! - [`kronecker`]: the approximation solver, integer relation checks, and
//!   the exact power-expansion certificate.
//! - [`experiments`]: the Poisson oracle and the two theorem harnesses over
//!   the bundled corpus.

// Guards written as `!(x > 0.0)` intentionally reject NaN along with the
// out-of-range values; rewriting them as `x <= 0.0` would let NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod almost_periodic;
pub mod exact;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod jet;
pub mod kronecker;
pub mod lattice;
pub mod measure;
pub mod quad;
pub mod schwartz;
pub mod special;
pub(crate) mod serde_util;

pub use almost_periodic::{AlmostPeriodReport, BohrEstimate, ParsevalSeries, TrigPolynomial};
pub use error::{Error, Result};
pub use geometry::Point;
pub use kronecker::{KroneckerInstance, KroneckerSolution, PowerExpansion, RelationCheck};
pub use lattice::{Lattice, LatticeCombSpec, LatticeMode, ShiftedLatticeTerm};
pub use measure::{
    Atom, AtomicMeasure, BallVariation, GrowthReport, PartialMassBound, TranslationBoundReport,
};
pub use schwartz::{ConvolutionBoundCertificate, TestFunction, TranslationBoundCertificate};
