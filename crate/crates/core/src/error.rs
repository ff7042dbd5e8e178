use num_complex::Complex64;
use thiserror::Error;

/// Errors shared across the computational modules.
///
/// Variant names follow the operation contracts: an operation's documented
/// failure mode maps onto exactly one variant here.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    #[error("degenerate parameter A = {0} (A ∈ {{0, −1}} collapses the differential)")]
    DegenerateParameter(Complex64),

    #[error("point {0} lies on the branch cut")]
    OnCut(Complex64),

    #[error("point {0} is at (or too close to) a branch point")]
    AtBranchPoint(Complex64),

    #[error("integration path passes within {tol:e} of the singularity at {near}")]
    PathTooCloseToSingularity { near: Complex64, tol: f64 },

    #[error("trajectory step collapsed below minimum size at {0}")]
    StepCollapse(Complex64),

    #[error("trajectory exceeded maximum arclength {0}")]
    MaxLengthExceeded(f64),

    #[error("no short trajectory ζ− → ζ+ found (tracer or parameter bug)")]
    NotFound,

    #[error("critical graph inconsistent with expected topology: {0}")]
    GraphInconsistent(String),

    #[error("boundary-case parameter (real A): {0}")]
    BoundaryCase(String),

    #[error("arc passes through the origin")]
    ArcThroughOrigin,

    #[error("query point {0} outside the evaluator's domain")]
    OutOfDomain(Complex64),

    #[error("contour construction failed: {0}")]
    ConstructionFailed(String),

    #[error("equilibrium density negative ({value:.3e}) at node {at}")]
    NegativeDensity { at: Complex64, value: f64 },

    #[error("iteration failed to converge: {0}")]
    NoConvergence(String),

    #[error("energy descent stalled: {0}")]
    NoDescentProgress(String),

    #[error("precision ladder exhausted at {digits} digits (sum/recurrence mismatch {mismatch:.3e})")]
    PrecisionExhausted { digits: usize, mismatch: f64 },

    #[error("root finder did not converge after {0} sweeps")]
    NonConvergence(usize),

    #[error("contour integrand not decaying in the tail (|log mag| {0:.2} above cutoff)")]
    TailNotDecaying(f64),

    #[error("zero argument not allowed")]
    ZeroArgument,

    #[error("point {z} outside the conformal disk of radius {radius:.4}")]
    OutOfDisk { z: Complex64, radius: f64 },

    #[error("regime {requested} does not match the location of {z}")]
    RegimeMismatch { requested: &'static str, z: Complex64 },
}
