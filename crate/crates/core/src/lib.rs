//! Sequential maximum-confidence (MC) quantum state discrimination.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: small dense complex linear algebra (Jacobi Hermitian eigensolver,
//!   trace norm, Gram-matrix utilities).
//! - [`quantum`]: states, ensembles, POVMs, Kraus channels, the two-state and
//!   geometric-uniform (GU) ensemble families, and a seeded Monte Carlo sampler.
//! - [`mc`]: maximum-confidence measurements via the generalized eigenproblem,
//!   the two-state closed form, optimality certificates and a brute-force qubit oracle.
//! - [`sequential`]: inter-party channel synthesis, least-disturbing parameters,
//!   multi-party runs and the party-count bound for two states.
//! - [`weak`]: weak measurements for linearly dependent POVMs, the GU channel and
//!   its confidence-decay recursion.
//!
//! Outcome `0` is always the inconclusive outcome. Conclusive outcomes are labelled
//! `1..=n` and line up with ensemble members `0..n`.

#![forbid(unsafe_code)]

pub mod error;
pub mod linalg;
pub mod mc;
pub mod quantum;
pub mod sequential;
pub mod weak;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, HermitianSpectrum, C64};
pub use mc::{MCSolution, OptimalityCertificate};
pub use quantum::{DensityOperator, Ensemble, KrausChannel, Povm, PureState};
pub use sequential::{ChannelPlan, PartyRecord, SequentialRun};

/// Numerical tolerances shared by every module.
pub mod tol {
    /// Structural checks: Hermiticity, trace, completeness, reconstruction.
    pub const STRUCTURAL: f64 = 1e-9;
    /// Decision thresholds: numerical rank, PSD membership, certificates.
    pub const DECISION: f64 = 1e-8;
    /// Asymmetry above which a matrix is rejected as non-Hermitian.
    pub const HERMITIAN_REJECT: f64 = 1e-6;
    /// Eigenvalues of an average state below this are outside its support.
    pub const SUPPORT: f64 = 1e-10;
    /// Pure-state normalisation.
    pub const NORM: f64 = 1e-10;
    /// Confidence equality across sequential parties.
    pub const CONFIDENCE_EQUALITY: f64 = 1e-8;
    /// Party-count bounds this close to an integer are that integer.
    pub const BOUND_TIE: f64 = 1e-11;
    /// Iterated quantities this close to their threshold have reached it.
    pub const THRESHOLD_TIE: f64 = 1e-12;
}

/// Largest Hilbert-space dimension accepted by state constructors.
pub const MAX_DIM: usize = 16;
