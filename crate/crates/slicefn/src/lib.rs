//! Slice-function analysis over finite-dimensional real alternative
//! *-algebras: C, H, O, Cl(0,3) and the bicomplex numbers.
//!
//! The crate provides
//!
//! * the algebras themselves with their quadratic-cone geometry
//!   ([`algebra`], [`geometry`]),
//! * polynomial and rational slice functions in normalized quotient form
//!   ([`stem`], [`rational`]),
//! * Laurent and spherical Laurent expansions computed by contour quadrature,
//!   with exact conversion between the two families ([`expansions`],
//!   [`classify`]),
//! * complete classification of isolated singular spheres: removable spheres,
//!   poles with pointwise and spherical orders, presumed-essential behaviour,
//!   and the exceptional affine sets where a pole's pointwise order drops
//!   ([`classify`]).
//!
//! Numerical tolerances are centralized in [`tol`].

pub mod algebra;
pub mod classify;
pub mod error;
pub mod expansions;
pub mod geometry;
pub mod par;
pub mod rational;
pub mod stem;
pub mod tol;

pub use algebra::{Algebra, AlgebraName, CElem, ConeDecomposition, Elem, SplittingBasis};
pub use classify::{
    a_from_c, blow_up_witness, c_from_ab, classify, classify_rational, exceptional_set_from_pair,
    exceptional_set_on_sphere, gen_binom, order_at_point, order_at_point_rational,
    order_from_laurent, spherical_order, spherical_order_from_data, spherical_order_rational,
    AffineSet, BlowUpWitness, Multiplicity, OrderValue, PointOrder, SingularityKind,
    SingularityReport,
};
pub use error::{Error, Result};
pub use expansions::{
    default_laurent_radius, default_spherical_radius, eval_laurent, eval_spherical,
    laurent_coeffs, laurent_coeffs_seq, laurent_from_coeffs, recenter_spherical,
    spherical_from_numbers, spherical_numbers, spherical_numbers_seq, spherical_pairs_direct,
    LaurentData, SphericalData,
};
pub use geometry::{
    cassini_distance, radii_from_coeffs, same_slice, sigma, tau, Radius, ShellKind, ShellSpec,
    SphereId,
};
pub use rational::{delta_poly, Expr, RationalExpr, RealPoly, StarPoly};
pub use stem::SliceFn;
