//! Error type shared across the crate.

use crate::geometry::SphereId;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("unsupported algebra name `{0}` (expected C, H, O, CL3 or BC)")]
    UnsupportedAlgebra(String),
    #[error("element has {got} components, algebra has dimension {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("element lies outside the quadratic cone (trace or norm is not real)")]
    OutsideCone,
    #[error("slice point lies outside the stem function's domain")]
    OutsideDomain,
    #[error("element is not invertible")]
    NotInvertible,
    #[error("imaginary part is zero or not invertible")]
    DegenerateImaginaryPart,
    #[error("expression is not tame: its normal function is not slice preserving or differs from the conjugate's")]
    NotTame,
    #[error("normal function vanishes identically; star inverse undefined")]
    DegenerateNormal,
    #[error("evaluation point lies on the singular sphere (alpha={}, beta={})", .0.alpha, .0.beta)]
    OnSingularSphere(SphereId),
    #[error("quadrature contour passes within guard distance of the singular sphere (alpha={}, beta={})", .0.alpha, .0.beta)]
    ContourHitsSingularSphere(SphereId),
    #[error("polynomial degree {0} exceeds the supported root-finding bound {1}")]
    RootDegreeTooLarge(usize, usize),
    #[error("eigenvalue root finding failed to converge")]
    RootFindingFailed,
    #[error("sphere projection failed to converge")]
    ProjectionFailed,
    #[error("could not complete {{1, J}} to a splitting basis")]
    CompletionFailed,
    #[error("center is not a singularity of the expression")]
    NotASingularity,
    #[error("requested point does not lie on the expansion sphere")]
    NotOnExpansionSphere,
    #[error("invalid quadrature parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("internal inconsistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
