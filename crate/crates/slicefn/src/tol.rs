//! Central numerical tolerances and default parameters.
//!
//! Every tolerance that influences a classification decision lives here so
//! that tests and the CLI report the exact thresholds in force.

/// Relative threshold for treating the non-real components of an element as
/// zero: `x` counts as real when each imaginary component is at most
/// `REALNESS * (1 + ||x||)`.
pub const REALNESS: f64 = 1e-10;

/// Reconstruction residual allowed by the cone-decomposition round trip
/// `alpha + beta J = x` (relative to `1 + ||x||`).
pub const CONE_RECONSTRUCT: f64 = 1e-12;

/// Membership tolerance for the sphere `{t(x) = 0, n(x) = 1}`.
pub const SPHERE_MEMBER: f64 = 1e-10;

/// Two imaginary directions count as the same slice when their normalized
/// directions are collinear up to this angle defect.
pub const SAME_SLICE: f64 = 1e-10;

/// Step used by finite-difference Cauchy-Riemann residuals.
pub const FD_STEP: f64 = 1e-5;

/// Relative threshold under which a stored series coefficient is reported as
/// zero: `||a_n|| <= ZERO_COEFF * (1 + max stored norm)`.
pub const ZERO_COEFF: f64 = 1e-9;

/// Imaginary residue allowed when coercing a normal polynomial to real
/// coefficients, relative to its leading coefficient.
pub const NPOLY_IMAG: f64 = 1e-10;

/// Relative magnitude under which trailing polynomial coefficients are
/// trimmed after arithmetic (kept far below ZERO_COEFF so trimming never
/// decides a classification).
pub const TRIM_REL: f64 = 1e-12;

/// Clustering radius used to merge nearby polynomial roots into one sphere
/// with multiplicity.
pub const ROOT_CLUSTER: f64 = 1e-7;

/// Singular values below `SVD_TRUNCATE * sigma_max` are treated as zero in
/// affine solves.
pub const SVD_TRUNCATE: f64 = 1e-10;

/// Evaluation refuses points whose Cassini pseudodistance to a singular
/// sphere is below this guard.
pub const SINGULAR_GUARD: f64 = 1e-9;

/// Default truncation index for expansions.
pub const DEFAULT_K: i64 = 24;

/// Default number of contour samples per circle.
pub const DEFAULT_N: usize = 512;

/// Smallest quadrature radius selected by the automatic radius policy.
pub const RADIUS_FLOOR: f64 = 1e-3;

/// Hard caps accepted from external requests.
pub const MAX_K: i64 = 64;
pub const MAX_N: usize = 8192;

/// Largest polynomial degree passed to the companion-matrix root finder.
pub const MAX_ROOT_DEGREE: usize = 64;
