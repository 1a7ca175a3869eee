//! Rational slice functions in normalized quotient form.
//!
//! Every expression built from polynomials by sums, slice products,
//! conjugation and slice inversion normalizes to D(x)⁻¹ P(x) where P is a
//! polynomial with algebra coefficients (written on the right of the powers)
//! and D is a real polynomial, hence central.  The rewrite rules are
//!
//! ```text
//! poly P                    →  1⁻¹ P
//! D₁⁻¹P₁ + D₂⁻¹P₂           →  (D₁D₂)⁻¹ (D₂P₁ + D₁P₂)
//! (D₁⁻¹P₁) ⊙ (D₂⁻¹P₂)       →  (D₁D₂)⁻¹ (P₁ ⊙ P₂)
//! (D⁻¹P)^c                  →  D⁻¹ P^c
//! (D⁻¹P)^{-⊙}               →  N(P)⁻¹ (P^c D)
//! ```
//!
//! Inversion requires the normal polynomial N(P) = P ⊙ P^c to have real
//! coefficients and to equal P^c ⊙ P (the function is then called tame);
//! otherwise the expression is rejected.  No numerator/denominator
//! cancellation is performed — the classification layer works with the pair
//! (denominator multiplicity m, numerator Δ-valuation ν) instead.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, CElem, Elem};
use crate::error::{Error, Result};
use crate::geometry::SphereId;
use crate::stem::SliceFn;
use crate::tol;

/// Binomial coefficient as f64 (exact for all arguments arising here).
fn binom_f(m: usize, j: usize) -> f64 {
    if j > m {
        return 0.0;
    }
    let j = j.min(m - j);
    let mut acc = 1.0f64;
    for t in 0..j {
        acc = acc * (m - t) as f64 / (t + 1) as f64;
    }
    acc
}

// ---------------------------------------------------------------------------
// Real polynomials
// ---------------------------------------------------------------------------

/// Polynomial with real coefficients stored in ascending degree order.
#[derive(Debug, Clone, PartialEq)]
pub struct RealPoly {
    coeffs: Vec<f64>,
}

impl RealPoly {
    pub fn new(mut coeffs: Vec<f64>) -> RealPoly {
        let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        let thr = tol::TRIM_REL * scale;
        while let Some(last) = coeffs.last() {
            if last.abs() <= thr {
                coeffs.pop();
            } else {
                break;
            }
        }
        RealPoly { coeffs }
    }

    pub fn one() -> RealPoly {
        RealPoly { coeffs: vec![1.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 1.0
    }

    /// Degree, or None for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn mul(&self, other: &RealPoly) -> RealPoly {
        if self.is_zero() || other.is_zero() {
            return RealPoly::new(Vec::new());
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RealPoly::new(out)
    }

    pub fn add(&self, other: &RealPoly) -> RealPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, a) in self.coeffs.iter().enumerate() {
            out[i] += a;
        }
        for (i, b) in other.coeffs.iter().enumerate() {
            out[i] += b;
        }
        RealPoly::new(out)
    }

    pub fn powi(&self, k: usize) -> RealPoly {
        let mut acc = RealPoly::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn derivative(&self) -> RealPoly {
        if self.coeffs.len() <= 1 {
            return RealPoly { coeffs: Vec::new() };
        }
        RealPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| i as f64 * c)
                .collect(),
        )
    }

    fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    fn max_normalized(&self) -> RealPoly {
        let m = self.max_abs();
        if m == 0.0 {
            return RealPoly { coeffs: Vec::new() };
        }
        RealPoly {
            coeffs: self.coeffs.iter().map(|c| c / m).collect(),
        }
    }

    /// Long division self = q·d + r with deg r < deg d.
    pub fn long_div(&self, d: &RealPoly) -> (RealPoly, RealPoly) {
        let dd = d.degree().expect("nonzero divisor");
        if self.coeffs.len() < d.coeffs.len() {
            return (RealPoly::new(Vec::new()), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let lead = d.coeffs()[dd];
        let qlen = rem.len() - dd;
        let mut q = vec![0.0; qlen];
        for i in (0..qlen).rev() {
            let f = rem[i + dd] / lead;
            q[i] = f;
            for (k, dc) in d.coeffs.iter().enumerate() {
                rem[i + k] -= f * dc;
            }
        }
        rem.truncate(dd);
        (RealPoly::new(q), RealPoly::new(rem))
    }

    /// Square-free part self / gcd(self, self'), roots kept, multiplicities
    /// dropped.  Euclid runs on max-normalized polynomials with an absolute
    /// noise floor.
    fn square_free(&self) -> RealPoly {
        let mut a = self.max_normalized();
        let mut b = a.derivative().max_normalized();
        let gcd = loop {
            if b.is_zero() {
                break a;
            }
            let (_, r) = a.long_div(&b);
            let r = if r.max_abs() <= 1e-10 {
                RealPoly { coeffs: Vec::new() }
            } else {
                r.max_normalized()
            };
            a = b;
            b = r;
        };
        match gcd.degree() {
            None | Some(0) => self.clone(),
            _ => self.long_div(&gcd).0,
        }
    }

    /// The distinct complex roots (each multiple root reported once), found
    /// by Aberth iteration on the square-free part.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let deg = match self.degree() {
            None | Some(0) => return Ok(Vec::new()),
            Some(d) => d,
        };
        if deg > tol::MAX_ROOT_DEGREE {
            return Err(Error::RootDegreeTooLarge(deg, tol::MAX_ROOT_DEGREE));
        }
        Ok(aberth_roots(&self.square_free()))
    }

    /// Distinct spheres/real points carrying roots, with multiplicities
    /// recovered by repeated exact division (not by clustering).
    pub fn root_spheres(&self) -> Result<Vec<(SphereId, usize)>> {
        let roots = self.roots()?;
        let mut ids: Vec<SphereId> = Vec::new();
        'next: for z in roots {
            let id = if z.im.abs() <= tol::ROOT_CLUSTER {
                SphereId::new(z.re, 0.0)
            } else if z.im > 0.0 {
                SphereId::from_z(z)
            } else {
                continue; // conjugate partner carries the same sphere
            };
            for seen in &ids {
                if seen.close_to(&id, 2.0 * tol::ROOT_CLUSTER) {
                    continue 'next;
                }
            }
            ids.push(id);
        }
        ids.sort_by(|a, b| {
            (a.alpha, a.beta)
                .partial_cmp(&(b.alpha, b.beta))
                .expect("finite sphere ids")
        });
        let mut out = Vec::with_capacity(ids.len());
        for id in ids {
            let m = self.multiplicity_at(&id);
            if m > 0 {
                out.push((id, m));
            }
        }
        Ok(out)
    }

    /// Multiplicity of the factor Δ_s (or x − α for a real point): the number
    /// of times it divides with remainder below `ZERO_COEFF` of scale.
    pub fn multiplicity_at(&self, s: &SphereId) -> usize {
        let mut cur = self.clone();
        let mut m = 0usize;
        loop {
            if cur.is_zero() || cur.degree() == Some(0) {
                break;
            }
            let thr = tol::ZERO_COEFF * (1.0 + cur.max_abs());
            if s.is_real_point() {
                let (q, r) = cur.div_linear_real(s.alpha);
                if r.abs() <= thr {
                    cur = q;
                    m += 1;
                    continue;
                }
            } else if cur.degree() >= Some(2) {
                let (q, (u, v)) = cur.div_quadratic_real(
                    -2.0 * s.alpha,
                    s.alpha * s.alpha + s.beta * s.beta,
                );
                if u.abs() <= thr && v.abs() <= thr {
                    cur = q;
                    m += 1;
                    continue;
                }
            }
            break;
        }
        m
    }

    fn div_linear_real(&self, alpha: f64) -> (RealPoly, f64) {
        if self.is_zero() {
            return (RealPoly::new(Vec::new()), 0.0);
        }
        let mut w: Vec<f64> = self.coeffs.iter().rev().copied().collect();
        for i in 1..w.len() {
            w[i] += alpha * w[i - 1];
        }
        let rem = w.pop().unwrap_or(0.0);
        w.reverse();
        (RealPoly::new(w), rem)
    }

    fn div_quadratic_real(&self, p: f64, q: f64) -> (RealPoly, (f64, f64)) {
        if self.coeffs.len() < 2 {
            return (
                RealPoly::new(Vec::new()),
                (0.0, self.coeffs.first().copied().unwrap_or(0.0)),
            );
        }
        let mut w: Vec<f64> = self.coeffs.iter().rev().copied().collect();
        let n = w.len();
        for i in 0..n - 2 {
            let lead = w[i];
            w[i + 1] -= lead * p;
            w[i + 2] -= lead * q;
        }
        let v = w.pop().expect("length checked");
        let u = w.pop().expect("length checked");
        w.reverse();
        (RealPoly::new(w), (u, v))
    }
}

/// Aberth-Ehrlich simultaneous iteration; the input must be square-free for
/// full accuracy.  Deterministic start on a Cauchy-bound circle.
fn aberth_roots(p: &RealPoly) -> Vec<Complex64> {
    let deg = match p.degree() {
        None | Some(0) => return Vec::new(),
        Some(d) => d,
    };
    let lead = p.coeffs()[deg];
    let c: Vec<f64> = p.coeffs().iter().map(|v| v / lead).collect();
    let radius = 1.0 + c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut z: Vec<Complex64> = (0..deg)
        .map(|k| {
            let angle = std::f64::consts::TAU * (k as f64 + 0.25) / deg as f64 + 0.31;
            Complex64::from_polar(radius * (1.0 + 0.01 * k as f64 / deg as f64), angle)
        })
        .collect();
    for _ in 0..400 {
        let mut moved = 0.0f64;
        for k in 0..deg {
            let zk = z[k];
            // p and p' at zk for the monic coefficient list
            let mut pv = Complex64::new(1.0, 0.0);
            let mut dv = Complex64::new(0.0, 0.0);
            for i in (0..deg).rev() {
                dv = dv * zk + pv;
                pv = pv * zk + c[i];
            }
            if pv.norm() == 0.0 {
                continue;
            }
            if dv.norm() == 0.0 {
                z[k] += Complex64::new(1e-6, 1e-6);
                moved = 1.0;
                continue;
            }
            let newton = pv / dv;
            let mut s = Complex64::new(0.0, 0.0);
            for (j, zj) in z.iter().enumerate() {
                if j != k {
                    s += (zk - zj).inv();
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * s;
            let w = if denom.norm() > 1e-12 {
                newton / denom
            } else {
                newton
            };
            z[k] = zk - w;
            moved = moved.max(w.norm() / (1.0 + zk.norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

/// The characteristic polynomial Δ_y(x) = x² − t(y)x + n(y) of the sphere
/// through y = α + βJ.
pub fn delta_poly(alpha: f64, beta: f64) -> RealPoly {
    RealPoly::new(vec![alpha * alpha + beta * beta, -2.0 * alpha, 1.0])
}

// ---------------------------------------------------------------------------
// Polynomials with algebra coefficients
// ---------------------------------------------------------------------------

/// Polynomial Σ xᵐ a_m with coefficients on the right, under the product
/// defined coefficient-wise: (Σ xⁱ a_i) ⊙ (Σ xʲ b_j) = Σ x^{i+j} a_i b_j.
#[derive(Debug, Clone)]
pub struct StarPoly {
    alg: Algebra,
    coeffs: Vec<Elem>,
}

impl StarPoly {
    pub fn new(alg: Algebra, mut coeffs: Vec<Elem>) -> StarPoly {
        let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(alg.abs(c)));
        let thr = tol::TRIM_REL * scale;
        while let Some(last) = coeffs.last() {
            if alg.abs(last) <= thr {
                coeffs.pop();
            } else {
                break;
            }
        }
        StarPoly { alg, coeffs }
    }

    pub fn zero(alg: Algebra) -> StarPoly {
        StarPoly {
            alg,
            coeffs: Vec::new(),
        }
    }

    pub fn from_real(alg: Algebra, p: &RealPoly) -> StarPoly {
        let coeffs = p.coeffs().iter().map(|c| alg.real(*c)).collect();
        StarPoly::new(alg, coeffs)
    }

    /// x − c as a polynomial.
    pub fn linear(alg: Algebra, c: &Elem) -> StarPoly {
        StarPoly::new(alg.clone(), vec![c.scale(-1.0), alg.one()])
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn coeffs(&self) -> &[Elem] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    fn coeff_scale(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(self.alg.abs(c)))
    }

    pub fn add(&self, other: &StarPoly) -> StarPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![self.alg.zero(); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            out[i] = &out[i] + a;
        }
        for (i, b) in other.coeffs.iter().enumerate() {
            out[i] = &out[i] + b;
        }
        StarPoly::new(self.alg.clone(), out)
    }

    pub fn star_mul(&self, other: &StarPoly) -> StarPoly {
        if self.is_zero() || other.is_zero() {
            return StarPoly::zero(self.alg.clone());
        }
        let mut out = vec![self.alg.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &self.alg.mul(a, b);
            }
        }
        StarPoly::new(self.alg.clone(), out)
    }

    /// Multiplication by a real (hence central) polynomial.
    pub fn mul_real(&self, p: &RealPoly) -> StarPoly {
        self.star_mul(&StarPoly::from_real(self.alg.clone(), p))
    }

    /// Coefficient-wise conjugate P^c.
    pub fn conj(&self) -> StarPoly {
        StarPoly {
            alg: self.alg.clone(),
            coeffs: self.coeffs.iter().map(|c| self.alg.conj(c)).collect(),
        }
    }

    /// The normal polynomial N(P) = P ⊙ P^c coerced to real coefficients.
    ///
    /// Fails with [`Error::NotTame`] when either the coercion residue exceeds
    /// `NPOLY_IMAG` relative to the largest coefficient, or P does not
    /// commute with P^c under ⊙.
    pub fn normal_poly(&self) -> Result<RealPoly> {
        let pc = self.conj();
        let n = self.star_mul(&pc);
        let n_rev = pc.star_mul(self);
        let scale = 1.0 + n.coeff_scale().max(n_rev.coeff_scale());
        let thr = tol::NPOLY_IMAG * scale;
        let len = n.coeffs.len().max(n_rev.coeffs.len());
        let get = |p: &StarPoly, i: usize| -> Elem {
            p.coeffs.get(i).cloned().unwrap_or_else(|| self.alg.zero())
        };
        let mut out = Vec::with_capacity(len);
        for i in 0..len {
            let a = get(&n, i);
            let b = get(&n_rev, i);
            if self.alg.abs(&(&a - &b)) > thr {
                return Err(Error::NotTame);
            }
            if a.coeffs()[1..].iter().any(|v| v.abs() > thr) {
                return Err(Error::NotTame);
            }
            out.push(a.coeffs()[0]);
        }
        Ok(RealPoly::new(out))
    }

    /// Stem value Σ zᵐ ⊗ a_m at a slice coordinate.
    pub fn stem_at(&self, z: Complex64) -> CElem {
        let mut acc = self.alg.czero();
        for a in self.coeffs.iter().rev() {
            acc = acc.scale_complex(z);
            acc.re = &acc.re + a;
        }
        acc
    }

    /// Value on the slice through j at slice coordinate z.
    pub fn eval_slice(&self, j: &Elem, z: Complex64) -> Elem {
        let s = self.stem_at(z);
        &s.re + &self.alg.mul(j, &s.im)
    }

    pub fn eval(&self, x: &Elem) -> Result<Elem> {
        let d = self.alg.cone_decompose(x);
        if !d.in_cone {
            return Err(Error::OutsideCone);
        }
        Ok(self.eval_slice(&d.j, d.z()))
    }

    /// Divide by the monic linear polynomial (x − α): returns (quotient,
    /// remainder).
    pub fn div_linear(&self, alpha: f64) -> (StarPoly, Elem) {
        if self.is_zero() {
            return (StarPoly::zero(self.alg.clone()), self.alg.zero());
        }
        let mut w: Vec<Elem> = self.coeffs.iter().rev().cloned().collect();
        for i in 1..w.len() {
            w[i] = &w[i] + &w[i - 1].scale(alpha);
        }
        let rem = w.pop().unwrap_or_else(|| self.alg.zero());
        w.reverse();
        (StarPoly::new(self.alg.clone(), w), rem)
    }

    /// Divide by the monic quadratic x² + px + q: returns (quotient, (u, v))
    /// with remainder x·u + v.
    pub fn div_quadratic(&self, p: f64, q: f64) -> (StarPoly, (Elem, Elem)) {
        if self.coeffs.len() < 2 {
            let u = self.alg.zero();
            let v = self
                .coeffs
                .first()
                .cloned()
                .unwrap_or_else(|| self.alg.zero());
            return (StarPoly::zero(self.alg.clone()), (u, v));
        }
        let mut w: Vec<Elem> = self.coeffs.iter().rev().cloned().collect();
        let n = w.len();
        for i in 0..n - 2 {
            let lead = w[i].clone();
            w[i + 1] = &w[i + 1] - &lead.scale(p);
            w[i + 2] = &w[i + 2] - &lead.scale(q);
        }
        let v = w.pop().expect("length checked");
        let u = w.pop().expect("length checked");
        w.reverse();
        (StarPoly::new(self.alg.clone(), w), (u, v))
    }

    /// Δ_S-adic valuation: the largest ν with Δ_S^ν dividing this polynomial
    /// (within `ZERO_COEFF` of the coefficient scale), together with the
    /// cofactor H = P / Δ_S^ν.
    pub fn delta_valuation(&self, s: &SphereId) -> (usize, StarPoly) {
        if self.is_zero() {
            return (0, self.clone());
        }
        let mut nu = 0usize;
        let mut cur = self.clone();
        let thr = |p: &StarPoly| tol::ZERO_COEFF * (1.0 + p.coeff_scale());
        loop {
            if cur.is_zero() {
                break;
            }
            if s.is_real_point() {
                let (q, r) = cur.div_linear(s.alpha);
                if self.alg.abs(&r) <= thr(&cur) {
                    cur = q;
                    nu += 1;
                    continue;
                }
            } else {
                let (q, (u, v)) = cur.div_quadratic(-2.0 * s.alpha, s.alpha * s.alpha + s.beta * s.beta);
                if self.alg.abs(&u) <= thr(&cur) && self.alg.abs(&v) <= thr(&cur) {
                    cur = q;
                    nu += 1;
                    continue;
                }
            }
            break;
        }
        (nu, cur)
    }

    /// Coefficients h_j of the re-centered form Σ (x−w)ʲ h_j on the slice of
    /// w: h_j = Σ_m C(m,j) w^{m−j} a_m.
    pub fn shifted_coeffs(&self, w: &Elem) -> Vec<Elem> {
        let deg = match self.degree() {
            None => return Vec::new(),
            Some(d) => d,
        };
        let mut powers = Vec::with_capacity(deg + 1);
        powers.push(self.alg.one());
        for t in 1..=deg {
            let prev = &powers[t - 1];
            powers.push(self.alg.mul(prev, w));
        }
        (0..=deg)
            .map(|j| {
                let mut h = self.alg.zero();
                for (m, a) in self.coeffs.iter().enumerate().skip(j) {
                    let term = self.alg.mul(&powers[m - j], a).scale(binom_f(m, j));
                    h = &h + &term;
                }
                h
            })
            .collect()
    }

    /// Order of vanishing at the cone point w along its slice; None when the
    /// polynomial vanishes identically there.
    pub fn valuation_at_point(&self, w: &Elem) -> Option<usize> {
        let shifted = self.shifted_coeffs(w);
        let scale = shifted.iter().fold(0.0f64, |m, c| m.max(self.alg.abs(c)));
        let thr = tol::ZERO_COEFF * (1.0 + scale);
        shifted.iter().position(|h| self.alg.abs(h) > thr)
    }
}

// ---------------------------------------------------------------------------
// Expression trees and quotient normalization
// ---------------------------------------------------------------------------

/// Wire form of a rational expression.  Polynomial coefficient rows use the
/// external component encoding, ascending in degree.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum Expr {
    Poly(Vec<Vec<f64>>),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Conj(Box<Expr>),
    Inv(Box<Expr>),
}

impl Expr {
    pub fn poly(rows: Vec<Vec<f64>>) -> Expr {
        Expr::Poly(rows)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        Expr::Add(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        Expr::Mul(Box::new(a), Box::new(b))
    }

    pub fn conj(a: Expr) -> Expr {
        Expr::Conj(Box::new(a))
    }

    pub fn inv(a: Expr) -> Expr {
        Expr::Inv(Box::new(a))
    }
}

/// A rational slice function D(x)⁻¹ P(x) with its singular spheres.
#[derive(Debug, Clone)]
pub struct RationalExpr {
    alg: Algebra,
    num: StarPoly,
    den: RealPoly,
    spheres: Vec<(SphereId, usize)>,
}

impl RationalExpr {
    pub fn from_expr(alg: &Algebra, expr: &Expr) -> Result<RationalExpr> {
        let (num, den) = normalize(alg, expr)?;
        let spheres = den.root_spheres()?;
        Ok(RationalExpr {
            alg: alg.clone(),
            num,
            den,
            spheres,
        })
    }

    pub fn from_json(alg: &Algebra, json: &str) -> Result<RationalExpr> {
        let expr: Expr =
            serde_json::from_str(json).map_err(|e| Error::InvalidRequest(e.to_string()))?;
        RationalExpr::from_expr(alg, &expr)
    }

    pub fn from_parts(num: StarPoly, den: RealPoly) -> Result<RationalExpr> {
        let alg = num.algebra().clone();
        let spheres = den.root_spheres()?;
        Ok(RationalExpr {
            alg,
            num,
            den,
            spheres,
        })
    }

    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn numerator(&self) -> &StarPoly {
        &self.num
    }

    pub fn denominator(&self) -> &RealPoly {
        &self.den
    }

    /// Singular spheres (denominator root clusters) with multiplicities.
    pub fn singular_spheres(&self) -> &[(SphereId, usize)] {
        &self.spheres
    }

    /// A function is tame when its normal is a real slice function; in
    /// quotient form that is exactly the numerator condition.
    pub fn is_tame(&self) -> bool {
        self.num.normal_poly().is_ok()
    }

    fn nearest_sphere(&self, z: Complex64) -> Option<SphereId> {
        self.spheres
            .iter()
            .map(|(s, _)| s)
            .min_by(|a, b| {
                let da = (a.z() - z).norm().min((a.z().conj() - z).norm());
                let db = (b.z() - z).norm().min((b.z().conj() - z).norm());
                da.partial_cmp(&db).expect("finite distances")
            })
            .copied()
    }

    /// Value on the slice through j at slice coordinate z.
    pub fn eval_slice(&self, j: &Elem, z: Complex64) -> Result<Elem> {
        let d = self.den.eval_complex(z);
        if let Some(s) = self.nearest_sphere(z) {
            let dist = (s.z() - z).norm().min((s.z().conj() - z).norm());
            if dist <= tol::SINGULAR_GUARD {
                return Err(Error::OnSingularSphere(s));
            }
        }
        if d.norm() == 0.0 {
            return Err(Error::OnSingularSphere(
                self.nearest_sphere(z).unwrap_or(SphereId::from_z(z)),
            ));
        }
        let p = self.num.eval_slice(j, z);
        Ok(self.alg.cj_apply(j, d.inv(), &p))
    }

    pub fn eval(&self, x: &Elem) -> Result<Elem> {
        let d = self.alg.cone_decompose(x);
        if !d.in_cone {
            return Err(Error::OutsideCone);
        }
        self.eval_slice(&d.j, d.z())
    }

    /// Package as a generic slice function (stem closure over the quotient).
    pub fn to_slice_fn(&self) -> SliceFn {
        let me = self.clone();
        let spheres: Vec<SphereId> = self.spheres.iter().map(|(s, _)| *s).collect();
        SliceFn::from_stem(self.alg.clone(), move |z| {
            let d = me.den.eval_complex(z);
            if let Some(s) = me.nearest_sphere(z) {
                let dist = (s.z() - z).norm().min((s.z().conj() - z).norm());
                if dist <= tol::SINGULAR_GUARD {
                    return Err(Error::OnSingularSphere(s));
                }
            }
            if d.norm() == 0.0 {
                return Err(Error::OnSingularSphere(
                    me.nearest_sphere(z).unwrap_or(SphereId::from_z(z)),
                ));
            }
            let s = me.num.stem_at(z).scale_complex(d.inv());
            Ok((s.re, s.im))
        })
        .with_singular_spheres(spheres)
    }
}

fn normalize(alg: &Algebra, expr: &Expr) -> Result<(StarPoly, RealPoly)> {
    match expr {
        Expr::Poly(rows) => {
            let coeffs: Result<Vec<Elem>> = rows.iter().map(|r| alg.from_wire(r)).collect();
            Ok((StarPoly::new(alg.clone(), coeffs?), RealPoly::one()))
        }
        Expr::Add(a, b) => {
            let (p1, d1) = normalize(alg, a)?;
            let (p2, d2) = normalize(alg, b)?;
            let num = p1.mul_real(&d2).add(&p2.mul_real(&d1));
            Ok((num, d1.mul(&d2)))
        }
        Expr::Mul(a, b) => {
            let (p1, d1) = normalize(alg, a)?;
            let (p2, d2) = normalize(alg, b)?;
            Ok((p1.star_mul(&p2), d1.mul(&d2)))
        }
        Expr::Conj(a) => {
            let (p, d) = normalize(alg, a)?;
            Ok((p.conj(), d))
        }
        Expr::Inv(a) => {
            let (p, d) = normalize(alg, a)?;
            if p.is_zero() {
                return Err(Error::NotInvertible);
            }
            let n = p.normal_poly()?;
            Ok((p.conj().mul_real(&d), n))
        }
    }
}
