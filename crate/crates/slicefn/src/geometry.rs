//! Cone geometry shared by expansions and classification: spheres S_{α+βJ}
//! identified by their slice coordinate, the slice distance σ and pseudo-
//! distance τ, the Cassini pseudodistance u, shell membership predicates,
//! contour-collision guards, and convergence-radius estimation from
//! coefficient magnitudes.
//!
//! Every sphere of the quadratic cone is coded by the upper-half-plane point
//! α + iβ (β ≥ 0); β = 0 degenerates to the real point α.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, Elem};
use crate::tol;

/// A sphere S_{α+βJ} (all J), or the real point α when β = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereId {
    pub alpha: f64,
    pub beta: f64,
}

impl SphereId {
    pub fn new(alpha: f64, beta: f64) -> SphereId {
        SphereId {
            alpha,
            beta: beta.abs(),
        }
    }

    pub fn from_z(z: Complex64) -> SphereId {
        SphereId::new(z.re, z.im)
    }

    /// Canonical slice coordinate in the closed upper half-plane.
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.alpha, self.beta)
    }

    pub fn is_real_point(&self) -> bool {
        self.beta == 0.0
    }

    pub fn close_to(&self, other: &SphereId, tol: f64) -> bool {
        (self.z() - other.z()).norm() <= tol
    }
}

impl fmt::Display for SphereId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_real_point() {
            write!(f, "point {}", self.alpha)
        } else {
            write!(f, "sphere at {} + {}·J", self.alpha, self.beta)
        }
    }
}

/// Canonical upper-half-plane representative of a slice coordinate.
pub fn upper(z: Complex64) -> Complex64 {
    if z.im < 0.0 {
        z.conj()
    } else {
        z
    }
}

/// Distance between the spheres through z and w (upper representatives).
pub fn sphere_distance(z: Complex64, w: Complex64) -> f64 {
    (upper(z) - upper(w)).norm()
}

/// Cassini modulus u_y(z) = |(z − y)(z − ȳ)|^{1/2}, constant on spheres in
/// both arguments; the natural radial coordinate of spherical shells.
pub fn cassini_u(z: Complex64, y: Complex64) -> f64 {
    ((z - y).norm() * (z - y.conj()).norm()).sqrt()
}

/// Does the slice circle of radius `r` around center `z` pass within `guard`
/// of the sphere `s`?  The circle sweeps both half-planes of the slice, so
/// both representatives of `s` are tested.
pub fn circle_hits_sphere(z: Complex64, r: f64, s: &SphereId, guard: f64) -> bool {
    let d1 = ((z - s.z()).norm() - r).abs();
    let d2 = ((z - s.z().conj()).norm() - r).abs();
    d1.min(d2) <= guard
}

/// An open interval inner < u < outer in some radial coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialInterval {
    pub inner: f64,
    pub outer: f64,
}

impl RadialInterval {
    pub fn contains(&self, u: f64) -> bool {
        self.inner < u && u < self.outer
    }

    pub fn is_nonempty(&self) -> bool {
        self.inner < self.outer
    }

    /// Geometric midpoint, falling back to arithmetic when inner = 0 and to
    /// a fixed margin when outer is unbounded.
    pub fn mid_radius(&self) -> f64 {
        match (self.inner <= 0.0, self.outer.is_finite()) {
            (true, true) => self.outer / 2.0,
            (true, false) => 1.0,
            (false, true) => (self.inner * self.outer).sqrt(),
            (false, false) => 2.0 * self.inner,
        }
    }
}

/// Do x and y lie in a common slice plane ℂ_J?  Real points lie in every
/// slice; otherwise the imaginary directions must be collinear (either
/// orientation: J and −J span the same plane).
pub fn same_slice(alg: &Algebra, x: &Elem, y: &Elem) -> bool {
    let dx = alg.cone_decompose(x);
    let dy = alg.cone_decompose(y);
    if !dx.in_cone || !dy.in_cone {
        return false;
    }
    if dx.is_real() || dy.is_real() {
        return true;
    }
    dx.j.dot(&dy.j).abs() >= 1.0 - tol::SAME_SLICE
}

/// Outer slice distance σ: the slice modulus |x−y| on a common slice, else
/// the farthest-rotation bound √((Δre)² + (|im x| + |im y|)²).
pub fn sigma(alg: &Algebra, x: &Elem, y: &Elem) -> crate::Result<f64> {
    slice_metric(alg, x, y, true)
}

/// Inner slice pseudodistance τ: the slice modulus |x−y| on a common slice,
/// else the nearest-rotation bound √((Δre)² + (|im x| − |im y|)²).
pub fn tau(alg: &Algebra, x: &Elem, y: &Elem) -> crate::Result<f64> {
    slice_metric(alg, x, y, false)
}

fn slice_metric(alg: &Algebra, x: &Elem, y: &Elem, outer: bool) -> crate::Result<f64> {
    let dx = alg.cone_decompose(x);
    let dy = alg.cone_decompose(y);
    if !dx.in_cone || !dy.in_cone {
        return Err(crate::Error::OutsideCone);
    }
    if same_slice(alg, x, y) {
        return Ok(alg.abs(&(x - y)));
    }
    let dre = dx.alpha - dy.alpha;
    let dim = if outer {
        dx.beta + dy.beta
    } else {
        dx.beta - dy.beta
    };
    Ok(dre.hypot(dim))
}

/// Cassini pseudodistance u(x, y) = √‖Δ_y(x)‖ with Δ_y(x) = x² − x·t(y) + n(y);
/// vanishes exactly when x and y lie on the same sphere, and reduces to
/// ‖x − y‖ for real y.
pub fn cassini_distance(alg: &Algebra, x: &Elem, y: &Elem) -> f64 {
    let t = alg.trace(y);
    let n = alg.norm(y);
    let xx = alg.mul(x, x);
    let xt = alg.mul(x, &t);
    let delta = &(&xx - &xt) + &n;
    alg.abs(&delta).sqrt()
}

/// Shell families over the cone, as membership predicates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShellKind {
    /// τ(x,y) > r1 and σ(x,y) < r2.
    SigmaShell,
    /// σ(x,y) < r2 (r1 ignored, conventionally 0).
    SigmaBall,
    /// r1 < u(x,y) < r2.
    CassiniShell,
    /// u(x,y) < r2 (r1 ignored, conventionally 0).
    CassiniBall,
}

/// Outer radius: finite, or unbounded (serialized as the string sentinel
/// "unbounded", never as a float infinity).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Radius {
    Finite(f64),
    Unbounded(UnboundedTag),
}

/// Serde carrier restricting the non-finite case to the literal "unbounded".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnboundedTag {
    #[serde(rename = "unbounded")]
    Unbounded,
}

impl Radius {
    pub const UNBOUNDED: Radius = Radius::Unbounded(UnboundedTag::Unbounded);

    pub fn from_f64(r: f64) -> Radius {
        if r.is_finite() {
            Radius::Finite(r)
        } else {
            Radius::UNBOUNDED
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Radius::Finite(r) => *r,
            Radius::Unbounded(_) => f64::INFINITY,
        }
    }
}

/// A circular shell around the sphere of `center`, in either the slice
/// (σ/τ) or the Cassini (u) radial coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShellSpec {
    pub center: Vec<f64>,
    pub kind: ShellKind,
    pub r1: f64,
    pub r2: Radius,
}

impl ShellSpec {
    pub fn new(center: &Elem, kind: ShellKind, r1: f64, r2: f64) -> ShellSpec {
        ShellSpec {
            center: center.coeffs().to_vec(),
            kind,
            r1,
            r2: Radius::from_f64(r2),
        }
    }

    /// Strict-inequality membership.  Points outside the cone belong to no
    /// shell; σ/τ shells additionally require the center to be in the cone.
    pub fn contains(&self, alg: &Algebra, x: &Elem) -> bool {
        let Ok(y) = alg.elem(self.center.clone()) else {
            return false;
        };
        let r2 = self.r2.as_f64();
        match self.kind {
            ShellKind::SigmaShell => match (tau(alg, x, &y), sigma(alg, x, &y)) {
                (Ok(t), Ok(s)) => t > self.r1 && s < r2,
                _ => false,
            },
            ShellKind::SigmaBall => matches!(sigma(alg, x, &y), Ok(s) if s < r2),
            ShellKind::CassiniShell => {
                if !alg.in_cone(x) {
                    return false;
                }
                let u = cassini_distance(alg, x, &y);
                self.r1 < u && u < r2
            }
            ShellKind::CassiniBall => {
                alg.in_cone(x) && cassini_distance(alg, x, &y) < r2
            }
        }
    }
}

/// Convergence radii (R₁, R₂) of a two-sided expansion from its stored
/// coefficients; the finite truncation makes both limsups approximate.
pub fn radii_from_coeffs(alg: &Algebra, coeffs: &BTreeMap<i64, Elem>) -> (f64, f64) {
    let norms: BTreeMap<i64, f64> = coeffs
        .iter()
        .map(|(n, a)| (*n, alg.abs(a)))
        .collect();
    let window = norms.keys().map(|n| n.abs()).max().unwrap_or(1).max(1);
    estimate_radii(&norms, window)
}

/// Estimate convergence radii (R₁, R₂) of a two-sided series from coefficient
/// magnitudes indexed by n ∈ [−window, window].
///
/// Each side uses the median of consecutive-coefficient decay ratios
/// (‖a_m‖/‖a_n‖)^{1/(m−n)} over the outer half of the stored indices, which
/// reproduces geometric tails exactly.  A side whose outer quarter holds no
/// significant coefficient is declared terminating: R₂ = ∞, or R₁ = 0.
pub fn estimate_radii(norms: &BTreeMap<i64, f64>, window: i64) -> (f64, f64) {
    let pos: Vec<(i64, f64)> = norms
        .iter()
        .filter(|(n, v)| **n > 0 && **v > 0.0)
        .map(|(n, v)| (*n, *v))
        .collect();
    let neg: Vec<(i64, f64)> = norms
        .iter()
        .rev()
        .filter(|(n, v)| **n < 0 && **v > 0.0)
        .map(|(n, v)| (-*n, *v))
        .collect();
    let r2 = one_sided_radius(&pos, window);
    let principal = one_sided_radius(&neg, window);
    let r1 = if principal.is_finite() {
        1.0 / principal
    } else {
        0.0
    };
    (r1, r2)
}

/// Radius of Σ a_n wⁿ (n ≥ 1) from magnitudes sorted by ascending index.
fn one_sided_radius(entries: &[(i64, f64)], window: i64) -> f64 {
    let outer_quarter = (3 * window).div_euclid(4);
    match entries.last() {
        None => return f64::INFINITY,
        Some((n_max, _)) if *n_max < outer_quarter => return f64::INFINITY,
        _ => {}
    }
    let half = window.div_euclid(2);
    let tail: Vec<&(i64, f64)> = entries.iter().filter(|(n, _)| *n >= half).collect();
    if tail.len() >= 2 {
        let mut qs: Vec<f64> = tail
            .windows(2)
            .map(|w| {
                let (n1, v1) = *w[0];
                let (n2, v2) = *w[1];
                (v2 / v1).powf(1.0 / (n2 - n1) as f64)
            })
            .collect();
        qs.sort_by(|a, b| a.partial_cmp(b).expect("finite decay ratios"));
        let q = if qs.len() % 2 == 1 {
            qs[qs.len() / 2]
        } else {
            (qs[qs.len() / 2 - 1] + qs[qs.len() / 2]) / 2.0
        };
        1.0 / q
    } else {
        let (n, v) = *tail[0];
        v.powf(-1.0 / n as f64)
    }
}
