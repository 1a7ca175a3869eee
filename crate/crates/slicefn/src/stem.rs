//! Slice functions and their stem representation.
//!
//! A slice function on a circular domain of the quadratic cone is induced by
//! a stem F = F₁ + ıF₂ on a half-plane domain: the value at x = α + βJ is
//! F₁(α+iβ) + J·F₂(α+iβ), independent of which square root of −1 was used to
//! write x.  Stems satisfy the parity F₁(z̄) = F₁(z), F₂(z̄) = −F₂(z), so the
//! two components can be recovered from values at a conjugate pair of points:
//!
//! ```text
//! F₁ = (f(α+βJ) + f(α−βJ)) / 2        F₂ = −J·(f(α+βJ) − f(α−βJ)) / 2
//! ```
//!
//! the second identity using J(Jv) = J²v = −v, which holds in every
//! alternative algebra.  This module represents slice functions either by an
//! explicit stem closure or by a pointwise evaluator, and implements the
//! operations that only need stems: slice (stem-wise) products, conjugates
//! and normal functions, representation from one or two slices, spherical
//! value and derivative, and a finite-difference slice-regularity check.

use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{Algebra, Elem};
use crate::error::{Error, Result};
use crate::geometry::SphereId;
use crate::tol;

type StemClosure = dyn Fn(Complex64) -> Result<(Elem, Elem)> + Send + Sync;
type PointClosure = dyn Fn(&Elem) -> Result<Elem> + Send + Sync;

enum Body {
    Stem(Arc<StemClosure>),
    Pointwise(Arc<PointClosure>),
}

impl Clone for Body {
    fn clone(&self) -> Self {
        match self {
            Body::Stem(f) => Body::Stem(f.clone()),
            Body::Pointwise(f) => Body::Pointwise(f.clone()),
        }
    }
}

/// A slice function, evaluable at cone points and along slices.
#[derive(Clone)]
pub struct SliceFn {
    alg: Algebra,
    body: Body,
    singular: Vec<SphereId>,
}

impl SliceFn {
    /// From a stem closure z ↦ (F₁(z), F₂(z)).
    pub fn from_stem<F>(alg: Algebra, stem: F) -> SliceFn
    where
        F: Fn(Complex64) -> Result<(Elem, Elem)> + Send + Sync + 'static,
    {
        SliceFn {
            alg,
            body: Body::Stem(Arc::new(stem)),
            singular: Vec::new(),
        }
    }

    /// Lift of an intrinsic holomorphic map φ (φ(z̄) = φ(z)̄ ) to every slice.
    pub fn from_holomorphic<F>(alg: Algebra, phi: F) -> SliceFn
    where
        F: Fn(Complex64) -> Result<Complex64> + Send + Sync + 'static,
    {
        let a = alg.clone();
        SliceFn::from_stem(alg, move |z| {
            let w = phi(z)?;
            Ok((a.real(w.re), a.real(w.im)))
        })
    }

    /// From a black-box evaluator at cone points.
    pub fn from_pointwise<F>(alg: Algebra, f: F) -> SliceFn
    where
        F: Fn(&Elem) -> Result<Elem> + Send + Sync + 'static,
    {
        SliceFn {
            alg,
            body: Body::Pointwise(Arc::new(f)),
            singular: Vec::new(),
        }
    }

    /// Attach the list of spheres where the function is singular.
    pub fn with_singular_spheres(mut self, spheres: Vec<SphereId>) -> SliceFn {
        self.singular = spheres;
        self
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn singular_spheres(&self) -> &[SphereId] {
        &self.singular
    }

    /// Stem components (F₁, F₂) at a slice coordinate.
    pub fn stem_at(&self, z: Complex64) -> Result<(Elem, Elem)> {
        match &self.body {
            Body::Stem(f) => f(z),
            Body::Pointwise(f) => {
                let j = self.alg.imag_unit();
                if z.im.abs() <= f64::MIN_POSITIVE {
                    let v = f(&self.alg.real(z.re))?;
                    return Ok((v, self.alg.zero()));
                }
                let vp = f(&self.alg.from_slice_point(&j, z))?;
                let vm = f(&self.alg.from_slice_point(&j, z.conj()))?;
                let f1 = (&vp + &vm).scale(0.5);
                let f2 = self.alg.mul(&j, &(&vp - &vm)).scale(-0.5);
                Ok((f1, f2))
            }
        }
    }

    /// Value on the slice through J at slice coordinate z.
    pub fn eval_slice(&self, j: &Elem, z: Complex64) -> Result<Elem> {
        match &self.body {
            Body::Pointwise(f) => f(&self.alg.from_slice_point(j, z)),
            Body::Stem(_) => {
                let (f1, f2) = self.stem_at(z)?;
                Ok(&f1 + &self.alg.mul(j, &f2))
            }
        }
    }

    /// Value at a cone point.
    pub fn eval(&self, x: &Elem) -> Result<Elem> {
        if let Body::Pointwise(f) = &self.body {
            return f(x);
        }
        let d = self.alg.cone_decompose(x);
        if !d.in_cone {
            return Err(Error::OutsideCone);
        }
        self.eval_slice(&d.j, d.z())
    }

    /// Stem-wise (slice) product f·g.
    pub fn slice_product(&self, other: &SliceFn) -> SliceFn {
        let a = self.alg.clone();
        let lhs = self.clone();
        let rhs = other.clone();
        let mut singular = self.singular.clone();
        singular.extend_from_slice(&other.singular);
        SliceFn::from_stem(self.alg.clone(), move |z| {
            let (f1, f2) = lhs.stem_at(z)?;
            let (g1, g2) = rhs.stem_at(z)?;
            let re = &a.mul(&f1, &g1) - &a.mul(&f2, &g2);
            let im = &a.mul(&f1, &g2) + &a.mul(&f2, &g1);
            Ok((re, im))
        })
        .with_singular_spheres(singular)
    }

    /// Stem-wise conjugate f^c.
    pub fn conjugate(&self) -> SliceFn {
        let a = self.alg.clone();
        let inner = self.clone();
        SliceFn::from_stem(self.alg.clone(), move |z| {
            let (f1, f2) = inner.stem_at(z)?;
            Ok((a.conj(&f1), a.conj(&f2)))
        })
        .with_singular_spheres(self.singular.clone())
    }

    /// Normal function N(f) = f · f^c.
    pub fn normal(&self) -> SliceFn {
        self.slice_product(&self.conjugate())
    }

    /// Spherical value ½(f(y) + f(y^c)) at the sphere α + βS.
    pub fn spherical_value(&self, alpha: f64, beta: f64) -> Result<Elem> {
        let (f1, _) = self.stem_at(Complex64::new(alpha, beta))?;
        Ok(f1)
    }

    /// Spherical derivative (y − y^c)⁻¹(f(y) − f(y^c)) = F₂/β at α + βS.
    pub fn spherical_derivative(&self, alpha: f64, beta: f64) -> Result<Elem> {
        if beta.abs() <= f64::MIN_POSITIVE {
            return Err(Error::DegenerateImaginaryPart);
        }
        let (_, f2) = self.stem_at(Complex64::new(alpha, beta))?;
        Ok(f2.scale(1.0 / beta))
    }

    /// Sampled test that all stem values stay in R + ıR (the function then
    /// maps every slice to itself).
    pub fn is_slice_preserving(&self, zs: &[Complex64]) -> Result<bool> {
        for &z in zs {
            let (f1, f2) = self.stem_at(z)?;
            let scale = self.alg.abs(&f1) + self.alg.abs(&f2);
            let thr = tol::REALNESS * (1.0 + scale);
            let imag_ok = |v: &Elem| v.coeffs()[1..].iter().all(|c| c.abs() <= thr);
            if !imag_ok(&f1) || !imag_ok(&f2) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Largest ∂̄-residual of the slice restriction at z on the slice through
    /// j, via centered differences of the splitting-basis components.
    pub fn slice_regularity_residual(&self, j: &Elem, z: Complex64, h: f64) -> Result<f64> {
        let sb = self.alg.splitting_basis(j)?;
        let comps = |w: Complex64| -> Result<Vec<Complex64>> {
            Ok(sb.components(&self.eval_slice(j, w)?))
        };
        let xp = comps(z + Complex64::new(h, 0.0))?;
        let xm = comps(z - Complex64::new(h, 0.0))?;
        let yp = comps(z + Complex64::new(0.0, h))?;
        let ym = comps(z - Complex64::new(0.0, h))?;
        let mut worst = 0.0f64;
        for l in 0..xp.len() {
            let dx = (xp[l] - xm[l]) / (2.0 * h);
            let dy = (yp[l] - ym[l]) / (2.0 * h);
            let dbar = (dx + Complex64::i() * dy) / 2.0;
            worst = worst.max(dbar.norm());
        }
        Ok(worst)
    }
}

/// Value at α + βK reconstructed from values on two slices:
/// F₂ = (J₁−J₂)⁻¹(v₁−v₂), F₁ = v₁ − J₁F₂, result F₁ + K·F₂.
///
/// Fails with [`Error::NotInvertible`] when J₁ − J₂ is not a unit (possible
/// in CL3 and BC, e.g. J₁ = e1, J₂ = e23 in CL3).
pub fn represent_two_slices(
    alg: &Algebra,
    k: &Elem,
    j1: &Elem,
    v1: &Elem,
    j2: &Elem,
    v2: &Elem,
) -> Result<Elem> {
    let diff = j1 - j2;
    let inv = alg.try_inverse(&diff).ok_or(Error::NotInvertible)?;
    let f2 = alg.mul(&inv, &(v1 - v2));
    let f1 = v1 - &alg.mul(j1, &f2);
    Ok(&f1 + &alg.mul(k, &f2))
}

/// Value at α + βK from the conjugate pair on a single slice:
/// F₁ = (v₊+v₋)/2, F₂ = −J(v₊−v₋)/2, result F₁ + K·F₂.  Always well-posed.
pub fn represent_one_slice(
    alg: &Algebra,
    k: &Elem,
    j: &Elem,
    v_plus: &Elem,
    v_minus: &Elem,
) -> Elem {
    let f1 = (v_plus + v_minus).scale(0.5);
    let f2 = alg.mul(j, &(v_plus - v_minus)).scale(-0.5);
    &f1 + &alg.mul(k, &f2)
}
