//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by state construction, channel assembly and tomography.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A state label outside of {h, v, p, m, r, l}.
    #[error("unknown state label `{0}` (expected one of h, v, p, m, r, l)")]
    UnknownLabel(String),

    /// A Stokes vector pointing outside the Poincaré ball.
    #[error("unphysical Stokes vector: degree of polarization {0} exceeds 1")]
    UnphysicalStokes(f64),

    /// A matrix that fails the density-matrix invariants.
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    /// A state vector that is not normalized.
    #[error("state vector norm {0} is not 1")]
    NotNormalized(f64),

    /// A crystal with non-positive length or index difference.
    #[error("invalid crystal: {0}")]
    InvalidCrystal(String),

    /// An operator that fails the projector invariants.
    #[error("invalid projector `{0}`: {1}")]
    InvalidProjector(String, String),

    /// An optical train tried to delay amplitude past the last tracked
    /// temporal mode.
    #[error("temporal mode overflow: the optical train pushes amplitude past t2")]
    ModeOverflow,

    /// An operator set that does not resolve the identity.
    #[error("Kraus set is not trace preserving (residual {0:.3e})")]
    NotTracePreserving(f64),

    /// A χ matrix that is not Hermitian within tolerance.
    #[error("process matrix is not Hermitian (residual {0:.3e})")]
    NotHermitian(f64),

    /// Catch-all precondition violation.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Count data in which a basis pair has zero total counts, so the Stokes
    /// ratio is undefined.
    #[error("degenerate count data: basis pair {0} has zero total counts")]
    DegenerateData(String),

    /// Tomography input states that do not span the required space.
    #[error("ill-conditioned tomography inputs (condition number {0:.3e})")]
    IllConditionedInputs(f64),

    /// The state ML search ran out of iterations. Carries the best iterate.
    #[error("state ML search did not converge within {iterations} iterations")]
    StateSearchDiverged {
        best: crate::qstate::DensityMatrix,
        iterations: usize,
    },

    /// The process ML search ran out of iterations. Carries the best iterate.
    #[error("process ML search did not converge within {iterations} iterations")]
    ProcessSearchDiverged {
        best: Box<crate::process::ChiMatrix>,
        iterations: usize,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
