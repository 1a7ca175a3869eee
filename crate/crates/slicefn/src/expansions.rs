//! Series extraction around a center in the cone: classical coefficients on
//! a slice annulus and spherical numbers/pairs on a Cassini shell, both by
//! contour quadrature, plus truncated evaluation, recentering, and export
//! helpers.
//!
//! All contour work happens on one slice plane.  Complex weights act on
//! sampled values through the slice unit `J` from the left, so every routine
//! here returns full algebra elements even when the input function does not
//! preserve the slice.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::algebra::{Algebra, CElem, Elem};
use crate::error::{Error, Result};
use crate::geometry::{
    cassini_distance, circle_hits_sphere, estimate_radii, Radius, SphereId,
};
use crate::par;
use crate::stem::SliceFn;
use crate::tol;

const TAU: f64 = std::f64::consts::TAU;

/// Classical series data `f(x) = Σ_n (x−y)^{•n}·a_n` on a slice annulus.
#[derive(Clone, Debug)]
pub struct LaurentData {
    alg: Algebra,
    center: Elem,
    j: Elem,
    coeffs: BTreeMap<i64, Elem>,
    radius_used: f64,
    sample_count: usize,
    k_max: i64,
    est_r1: f64,
    est_r2: f64,
    truncated_principal: bool,
    zero_threshold: f64,
}

/// Spherical series data `f(x) = Σ_n 𝒮_{y,n}(x)·c_n = Σ_k Δ_y^k(x)(x·u_k + v_k)`
/// on a Cassini shell around the sphere through `y`.
#[derive(Clone, Debug)]
pub struct SphericalData {
    alg: Algebra,
    center: Elem,
    j: Elem,
    c: BTreeMap<i64, Elem>,
    pairs: BTreeMap<i64, (Elem, Elem)>,
    radius_used: f64,
    sample_count: usize,
    k_max: i64,
    est_u1: f64,
    est_u2: f64,
    zero_threshold: f64,
}

fn check_params(r: f64, k_max: i64, n_samples: usize) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "contour radius must be positive and finite, got {r}"
        )));
    }
    if k_max < 0 || k_max > tol::MAX_K {
        return Err(Error::InvalidParameter(format!(
            "index bound {k_max} outside 0..={}",
            tol::MAX_K
        )));
    }
    if n_samples > tol::MAX_N {
        return Err(Error::InvalidParameter(format!(
            "sample count {n_samples} exceeds {}",
            tol::MAX_N
        )));
    }
    if (n_samples as i64) < 4 * (k_max + 1) {
        return Err(Error::InvalidParameter(format!(
            "sample count {n_samples} too small to resolve indices up to {k_max}"
        )));
    }
    Ok(())
}

/// Strip entries whose norm is explainable by accumulated rounding alone.
/// `floor_of(n)` bounds the worst-case round-off in the sum that produced
/// coefficient `n`; anything at or below it is recorded as an exact zero
/// (dropped from the map).
fn trim_by_floor(
    alg: &Algebra,
    coeffs: BTreeMap<i64, Elem>,
    floor_of: impl Fn(i64) -> f64,
) -> BTreeMap<i64, Elem> {
    coeffs
        .into_iter()
        .filter(|(n, a)| alg.abs(a) > floor_of(*n))
        .collect()
}

fn zero_threshold_of(alg: &Algebra, coeffs: &BTreeMap<i64, Elem>) -> f64 {
    let max = coeffs.values().fold(0.0f64, |m, a| m.max(alg.abs(a)));
    tol::ZERO_COEFF * (1.0 + max)
}

/// Evaluate `f` at `n` equispaced points on the slice circle of radius `r`
/// around `center_z`, on the slice plane of `j`.  Returns the sampled values
/// together with `j`-left-multiplied copies (used to apply complex weights)
/// and the largest sample norm.
fn sample_circle(
    f: &SliceFn,
    j: &Elem,
    center_z: Complex64,
    r: f64,
    n: usize,
    parallel: bool,
) -> Result<(Vec<Elem>, Vec<Elem>, f64)> {
    let alg = f.algebra().clone();
    let op = |s: usize| -> Result<(Elem, Elem)> {
        let theta = TAU * (s as f64) / (n as f64);
        let z = center_z + Complex64::from_polar(r, theta);
        let v = f.eval_slice(j, z)?;
        let jv = alg.mul(j, &v);
        Ok((v, jv))
    };
    let raw = if parallel {
        par::indexed_map(n, op)
    } else {
        par::indexed_map_seq(n, op)
    };
    let mut vals = Vec::with_capacity(n);
    let mut jvals = Vec::with_capacity(n);
    let mut max_norm = 0.0f64;
    for item in raw {
        let (v, jv) = item?;
        max_norm = max_norm.max(alg.abs(&v));
        vals.push(v);
        jvals.push(jv);
    }
    Ok((vals, jvals, max_norm))
}

/// Apply the complex weight `w` to sample `s` using precomputed `j`-products:
/// `w ⊙ v = Re(w)·v + Im(w)·(j v)`.
#[inline]
fn weighted(vals: &[Elem], jvals: &[Elem], s: usize, w: Complex64) -> Elem {
    &vals[s].scale(w.re) + &jvals[s].scale(w.im)
}

fn laurent_impl(
    f: &SliceFn,
    y: &Elem,
    r: f64,
    k_max: i64,
    n_samples: usize,
    parallel: bool,
) -> Result<LaurentData> {
    check_params(r, k_max, n_samples)?;
    let alg = f.algebra().clone();
    let dec = alg.cone_decompose(y);
    if !dec.in_cone {
        return Err(Error::OutsideCone);
    }
    let j = if dec.is_real() {
        alg.imag_unit()
    } else {
        dec.j.clone()
    };
    let zy = dec.z();

    let guard = tol::SINGULAR_GUARD * (1.0 + r);
    for s in f.singular_spheres() {
        if circle_hits_sphere(zy, r, s, guard) {
            return Err(Error::ContourHitsSingularSphere(s.clone()));
        }
    }

    let (vals, jvals, max_f) = sample_circle(f, &j, zy, r, n_samples, parallel)?;
    let nf = n_samples as f64;

    let mut coeffs = BTreeMap::new();
    for n in -k_max..=k_max {
        let mut acc = alg.zero();
        let scale = r.powi(-(n as i32)) / nf;
        for s in 0..n_samples {
            let phase = -TAU * (n as f64) * (s as f64) / nf;
            let w = Complex64::from_polar(scale, phase);
            acc = &acc + &weighted(&vals, &jvals, s, w);
        }
        coeffs.insert(n, acc);
    }

    // Worst-case round-off in the sum behind a_n: N additions of terms of
    // size ≤ r^{−n}·max‖f‖/N each.
    let eps = f64::EPSILON;
    let coeffs = trim_by_floor(&alg, coeffs, |n| {
        eps * nf * r.powi(-(n as i32)) * max_f
    });

    let zero_threshold = zero_threshold_of(&alg, &coeffs);
    let truncated_principal = coeffs
        .get(&(-k_max))
        .is_some_and(|a| alg.abs(a) > zero_threshold);
    let norms: BTreeMap<i64, f64> = coeffs.iter().map(|(n, a)| (*n, alg.abs(a))).collect();
    let (est_r1, est_r2) = estimate_radii(&norms, k_max);

    Ok(LaurentData {
        alg,
        center: y.clone(),
        j,
        coeffs,
        radius_used: r,
        sample_count: n_samples,
        k_max,
        est_r1,
        est_r2,
        truncated_principal,
        zero_threshold,
    })
}

/// Classical coefficients by trapezoidal contour quadrature on the circle of
/// radius `r` around `y` in `y`'s own slice plane:
/// `a_n = r^{−n} ∫₀¹ e^{−2πnJs} f(y + r e^{2πJs}) ds`.
///
/// Sample evaluations run on the thread pool when the `parallel` feature is
/// active; the reduction order is fixed, so results match
/// [`laurent_coeffs_seq`] bit for bit.
pub fn laurent_coeffs(
    f: &SliceFn,
    y: &Elem,
    r: f64,
    k_max: i64,
    n_samples: usize,
) -> Result<LaurentData> {
    laurent_impl(f, y, r, k_max, n_samples, true)
}

/// Always-sequential twin of [`laurent_coeffs`].
pub fn laurent_coeffs_seq(
    f: &SliceFn,
    y: &Elem,
    r: f64,
    k_max: i64,
    n_samples: usize,
) -> Result<LaurentData> {
    laurent_impl(f, y, r, k_max, n_samples, false)
}

/// Assemble classical series data directly from a coefficient table, e.g. for
/// converted or synthesized series. Exact zeros are dropped and the shell
/// radii and significance threshold are re-derived; `radius_used` and
/// `sample_count` are zero to mark data that did not come from quadrature.
pub fn laurent_from_coeffs(
    alg: &Algebra,
    y: &Elem,
    mut coeffs: BTreeMap<i64, Elem>,
    k_max: i64,
) -> Result<LaurentData> {
    if k_max < 0 {
        return Err(Error::InvalidParameter("k_max must be non-negative".into()));
    }
    let dec = alg.cone_decompose(y);
    if !dec.in_cone {
        return Err(Error::OutsideCone);
    }
    let j = if dec.is_real() {
        alg.imag_unit()
    } else {
        dec.j.clone()
    };
    for (n, a) in &coeffs {
        if n.abs() > k_max {
            return Err(Error::InvalidParameter(format!(
                "coefficient index {n} outside |n| <= {k_max}"
            )));
        }
        if a.coeffs().len() != alg.dim() {
            return Err(Error::InvalidParameter(
                "coefficient dimension does not match the algebra".into(),
            ));
        }
    }
    coeffs.retain(|_, a| !a.is_exactly_zero());
    let zero_threshold = zero_threshold_of(alg, &coeffs);
    let truncated_principal = coeffs
        .get(&(-k_max))
        .is_some_and(|a| alg.abs(a) > zero_threshold);
    let norms: BTreeMap<i64, f64> = coeffs.iter().map(|(n, a)| (*n, alg.abs(a))).collect();
    let (est_r1, est_r2) = estimate_radii(&norms, k_max);
    Ok(LaurentData {
        alg: alg.clone(),
        center: y.clone(),
        j,
        coeffs,
        radius_used: 0.0,
        sample_count: 0,
        k_max,
        est_r1,
        est_r2,
        truncated_principal,
        zero_threshold,
    })
}

/// Assemble spherical series data directly from a table of spherical numbers,
/// e.g. for converted or synthesized series. Pairs, shell bounds, and the
/// significance threshold are re-derived; `radius_used` and `sample_count`
/// are zero to mark data that did not come from quadrature.
pub fn spherical_from_numbers(
    alg: &Algebra,
    y: &Elem,
    mut c: BTreeMap<i64, Elem>,
    k_max: i64,
) -> Result<SphericalData> {
    if k_max < 0 {
        return Err(Error::InvalidParameter("k_max must be non-negative".into()));
    }
    let dec = alg.cone_decompose(y);
    if !dec.in_cone {
        return Err(Error::OutsideCone);
    }
    let j = if dec.is_real() {
        alg.imag_unit()
    } else {
        dec.j.clone()
    };
    for (n, a) in &c {
        if *n < -2 * k_max || *n > 2 * k_max + 1 {
            return Err(Error::InvalidParameter(format!(
                "spherical index {n} outside [{}, {}]",
                -2 * k_max,
                2 * k_max + 1
            )));
        }
        if a.coeffs().len() != alg.dim() {
            return Err(Error::InvalidParameter(
                "coefficient dimension does not match the algebra".into(),
            ));
        }
    }
    c.retain(|_, a| !a.is_exactly_zero());
    Ok(finish_spherical(alg.clone(), y.clone(), j, c, 0.0, 0, k_max))
}

/// Complex value of `𝒮_{y,n}(ζ)` for a slice coordinate `ζ`, where
/// `𝒮_{y,2k} = Δ_y^k` and `𝒮_{y,2k+1} = Δ_y^k (x − y)`.
fn s_basis_value(zeta: Complex64, zy: Complex64, n: i64) -> Complex64 {
    let delta = (zeta - zy) * (zeta - zy.conj());
    let k = n.div_euclid(2);
    let rem = n.rem_euclid(2);
    let base = delta.powi(k as i32);
    if rem == 0 {
        base
    } else {
        base * (zeta - zy)
    }
}

/// Check that both quadrature circles (around `zy` and its conjugate) stay
/// clear of every singular sphere other than the center's own.
fn check_spherical_contours(
    zy: Complex64,
    rho: f64,
    spheres: &[SphereId],
) -> Result<()> {
    let own = SphereId::from_z(zy);
    let guard = tol::SINGULAR_GUARD * (1.0 + rho);
    for s in spheres {
        if s.close_to(&own, tol::SPHERE_MEMBER) {
            continue;
        }
        for rep in [s.z(), s.z().conj()] {
            for c0 in [zy, zy.conj()] {
                if (rep - c0).norm() <= rho + guard {
                    return Err(Error::ContourHitsSingularSphere(s.clone()));
                }
            }
        }
    }
    Ok(())
}

fn spherical_impl(
    f: &SliceFn,
    y: &Elem,
    rho: f64,
    k_max: i64,
    n_samples: usize,
    parallel: bool,
) -> Result<SphericalData> {
    check_params(rho, k_max, n_samples)?;
    let alg = f.algebra().clone();
    let dec = alg.cone_decompose(y);
    if !dec.in_cone {
        return Err(Error::OutsideCone);
    }

    if dec.is_real() {
        // Real center: spherical and classical data coincide index-wise, so
        // reuse the circle quadrature with the index range widened to 2K+1.
        let lau = laurent_impl(f, y, rho, 2 * k_max + 1, n_samples, parallel)?;
        debug_assert_eq!(lau.center.coeffs(), y.coeffs());
        let c = lau.coeffs.clone();
        return Ok(finish_spherical(
            alg, y.clone(), lau.j, c, rho, n_samples, k_max,
        ));
    }

    let zy = dec.z();
    let beta = dec.beta;
    let j = dec.j.clone();
    let guard = tol::SINGULAR_GUARD * (1.0 + beta);
    if rho >= beta - guard {
        return Err(Error::InvalidParameter(format!(
            "inner radius {rho} too large: the two circles around the sphere \
             representatives must stay disjoint (imaginary height {beta})"
        )));
    }
    check_spherical_contours(zy, rho, f.singular_spheres())?;

    let nf = n_samples as f64;
    let mut c: BTreeMap<i64, Elem> = BTreeMap::new();
    let mut wmax: BTreeMap<i64, f64> = BTreeMap::new();
    let mut max_f = 0.0f64;
    let n_lo = -2 * k_max;
    let n_hi = 2 * k_max + 1;
    for n in n_lo..=n_hi {
        c.insert(n, alg.zero());
        wmax.insert(n, 0.0);
    }

    for center in [zy, zy.conj()] {
        let (vals, jvals, mf) = sample_circle(f, &j, center, rho, n_samples, parallel)?;
        max_f = max_f.max(mf);
        for n in n_lo..=n_hi {
            let mut acc = alg.zero();
            let mut wm: f64 = 0.0;
            for s in 0..n_samples {
                let theta = TAU * (s as f64) / nf;
                let zeta = center + Complex64::from_polar(rho, theta);
                // (2πJ)^{−1} dζ 𝒮_{y,n+1}(ζ)^{−1} collapses to the complex
                // scalar ρ e^{iθ} 𝒮_{y,n+1}(ζ)^{−1} / N per sample.
                let w = Complex64::from_polar(rho, theta)
                    / s_basis_value(zeta, zy, n + 1)
                    / nf;
                wm = wm.max(w.norm());
                acc = &acc + &weighted(&vals, &jvals, s, w);
            }
            let entry = c.get_mut(&n).expect("index preinserted");
            *entry = &*entry + &acc;
            let wentry = wmax.get_mut(&n).expect("index preinserted");
            *wentry = wentry.max(wm);
        }
    }

    let eps = f64::EPSILON;
    let c = trim_by_floor(&alg, c, |n| {
        2.0 * eps * nf * wmax.get(&n).copied().unwrap_or(0.0) * max_f
    });

    Ok(finish_spherical(alg, y.clone(), j, c, rho, n_samples, k_max))
}

/// Derive pairs, thresholds, and shell radii from a finished `c` table.
fn finish_spherical(
    alg: Algebra,
    center: Elem,
    j: Elem,
    c: BTreeMap<i64, Elem>,
    radius_used: f64,
    sample_count: usize,
    k_max: i64,
) -> SphericalData {
    let zero_threshold = zero_threshold_of(&alg, &c);
    let mut pairs = BTreeMap::new();
    for k in -k_max..=k_max {
        let c_even = c.get(&(2 * k)).cloned().unwrap_or_else(|| alg.zero());
        let c_odd = c.get(&(2 * k + 1)).cloned().unwrap_or_else(|| alg.zero());
        let u = c_odd.clone();
        let v = &c_even - &alg.mul(&center, &c_odd);
        if !(u.is_exactly_zero() && v.is_exactly_zero()) {
            pairs.insert(k, (u, v));
        }
    }
    let norms: BTreeMap<i64, f64> = c.iter().map(|(n, a)| (*n, alg.abs(a))).collect();
    let (est_u1, est_u2) = estimate_radii(&norms, 2 * k_max + 1);
    SphericalData {
        alg,
        center,
        j,
        c,
        pairs,
        radius_used,
        sample_count,
        k_max,
        est_u1,
        est_u2,
        zero_threshold,
    }
}

/// Spherical numbers `c_n` for `|n| ≤ 2K` (and `2K+1`) by two-circle
/// quadrature on the boundary of a Cassini shell:
/// `c_n = (2πJ)^{−1} ∮ dζ 𝒮_{y,n+1}(ζ)^{−1} f(ζ)`, the contour taken as the
/// pair of circles of radius `rho` around `y` and its slice conjugate.
/// Spherical pairs are derived via `u_k = c_{2k+1}`, `v_k = c_{2k} − y·c_{2k+1}`.
///
/// A real center reuses the classical circle quadrature (the two data sets
/// coincide index-wise there).
pub fn spherical_numbers(
    f: &SliceFn,
    y: &Elem,
    rho: f64,
    k_max: i64,
    n_samples: usize,
) -> Result<SphericalData> {
    spherical_impl(f, y, rho, k_max, n_samples, true)
}

/// Always-sequential twin of [`spherical_numbers`].
pub fn spherical_numbers_seq(
    f: &SliceFn,
    y: &Elem,
    rho: f64,
    k_max: i64,
    n_samples: usize,
) -> Result<SphericalData> {
    spherical_impl(f, y, rho, k_max, n_samples, false)
}

/// Spherical pairs `(u_k, v_k)` for `|k| ≤ K` by *direct* quadrature (not via
/// the `c_n`): `u_k` uses the weight `Δ_y(ζ)^{−k−1}` and `v_k` the weight
/// `(ζ − t(y)) Δ_y(ζ)^{−k−1}` on the same two circles.
pub fn spherical_pairs_direct(
    f: &SliceFn,
    y: &Elem,
    rho: f64,
    k_max: i64,
    n_samples: usize,
) -> Result<BTreeMap<i64, (Elem, Elem)>> {
    check_params(rho, k_max, n_samples)?;
    let alg = f.algebra().clone();
    let dec = alg.cone_decompose(y);
    if !dec.in_cone {
        return Err(Error::OutsideCone);
    }
    if dec.is_real() {
        return Err(Error::InvalidParameter(
            "direct pair quadrature needs a non-real center".into(),
        ));
    }
    let zy = dec.z();
    let beta = dec.beta;
    let j = dec.j.clone();
    let guard = tol::SINGULAR_GUARD * (1.0 + beta);
    if rho >= beta - guard {
        return Err(Error::InvalidParameter(format!(
            "inner radius {rho} too large for imaginary height {beta}"
        )));
    }
    check_spherical_contours(zy, rho, f.singular_spheres())?;

    let nf = n_samples as f64;
    let trace = 2.0 * zy.re;
    let mut pairs = BTreeMap::new();
    for k in -k_max..=k_max {
        pairs.insert(k, (alg.zero(), alg.zero()));
    }
    for center in [zy, zy.conj()] {
        let (vals, jvals, _) = sample_circle(f, &j, center, rho, n_samples, true)?;
        for k in -k_max..=k_max {
            let mut acc_u = alg.zero();
            let mut acc_v = alg.zero();
            for s in 0..n_samples {
                let theta = TAU * (s as f64) / nf;
                let zeta = center + Complex64::from_polar(rho, theta);
                let delta = (zeta - zy) * (zeta - zy.conj());
                let base = Complex64::from_polar(rho, theta)
                    * delta.powi(-(k as i32) - 1)
                    / nf;
                acc_u = &acc_u + &weighted(&vals, &jvals, s, base);
                acc_v = &acc_v + &weighted(&vals, &jvals, s, base * (zeta - trace));
            }
            let entry = pairs.get_mut(&k).expect("index preinserted");
            entry.0 = &entry.0 + &acc_u;
            entry.1 = &entry.1 + &acc_v;
        }
    }
    Ok(pairs)
}

impl LaurentData {
    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn center(&self) -> &Elem {
        &self.center
    }

    /// Slice unit of the contour plane.
    pub fn slice_unit(&self) -> &Elem {
        &self.j
    }

    /// Stored (nonzero) coefficients; indices absent from the map are exact
    /// zeros.
    pub fn coeffs(&self) -> &BTreeMap<i64, Elem> {
        &self.coeffs
    }

    /// Coefficient at index `n` (zero when not stored).
    pub fn coeff(&self, n: i64) -> Elem {
        self.coeffs
            .get(&n)
            .cloned()
            .unwrap_or_else(|| self.alg.zero())
    }

    pub fn radius_used(&self) -> f64 {
        self.radius_used
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    /// Estimated convergence annulus `(R₁, R₂)` in the slice metric; `R₂`
    /// is `+∞` when the positive tail is empty.
    pub fn est_radii(&self) -> (f64, f64) {
        (self.est_r1, self.est_r2)
    }

    /// True when the coefficient at `−K` is still significant, i.e. the
    /// principal part may extend beyond the stored window.
    pub fn principal_truncated(&self) -> bool {
        self.truncated_principal
    }

    /// Norm level below which stored coefficients are not considered
    /// significant for order decisions (metadata only; storage is trimmed by
    /// a sharper round-off bound).
    pub fn zero_threshold(&self) -> f64 {
        self.zero_threshold
    }

    /// Is `x` inside the estimated convergence annulus around the center?
    pub fn in_region(&self, x: &Elem) -> bool {
        let outer = match crate::geometry::sigma(&self.alg, x, &self.center) {
            Ok(d) => d < self.est_r2,
            Err(_) => false,
        };
        let inner = match crate::geometry::tau(&self.alg, x, &self.center) {
            Ok(d) => d > self.est_r1,
            Err(_) => false,
        };
        inner && outer
    }

    /// Truncated-series value together with the region flag from
    /// [`LaurentData::in_region`] (the value is computed either way).
    ///
    /// Each term `(x−y)^{•n}·a_n` is evaluated through its stem on `x`'s
    /// slice: powers of `(x−y)` are accumulated as products in `A ⊗ ℂ`
    /// (never expanded into monomials, which would lose precision at high
    /// degree), and negative steps use
    /// `(x−y)^{•−m}·a = Δ_y^{−m}(x)·((x−y^c)^{•m}·a)` with the scalar factor
    /// applied through `x`'s slice unit.
    pub fn eval(&self, x: &Elem) -> Result<(Elem, bool)> {
        let alg = &self.alg;
        let dec = alg.cone_decompose(x);
        if !dec.in_cone {
            return Err(Error::OutsideCone);
        }
        let ydec = alg.cone_decompose(&self.center);
        let zy = ydec.z();
        let z = dec.z();
        let jx = if dec.is_real() { self.j.clone() } else { dec.j.clone() };

        // Stem of (x − y) at slice coordinate z = α + ıβ: (α·1 − y) + ı(β·1).
        let lin_stem = CElem {
            re: &alg.real(z.re) - &self.center,
            im: alg.real(z.im),
        };
        // Regular part by Horner recursion on the stem powers (left powers,
        // right coefficients): S ← W ⊛ S + a_n from the top degree down.
        let mut stem = alg.czero();
        let max_pos = self.coeffs.keys().next_back().copied().unwrap_or(-1);
        for n in (0..=max_pos).rev() {
            stem = alg.cmul(&lin_stem, &stem);
            if let Some(a) = self.coeffs.get(&n) {
                stem.re = &stem.re + a;
            }
        }

        // Principal part: running ⊛-powers of the conjugate-linear stem with
        // the complex scalar Δ_y(x)^{−m} folded in per term.
        let min_neg = self.coeffs.keys().next().copied().unwrap_or(1);
        if min_neg < 0 {
            let dz = (z - zy) * (z - zy.conj());
            if dz.norm() <= f64::MIN_POSITIVE {
                return Err(Error::OnSingularSphere(SphereId::from_z(zy)));
            }
            let yc = alg.conj(&self.center);
            let conj_stem = CElem {
                re: &alg.real(z.re) - &yc,
                im: alg.real(z.im),
            };
            let mut cpow = conj_stem.clone();
            for m in 1..=(-min_neg) {
                if let Some(a) = self.coeffs.get(&(-m)) {
                    let term = alg
                        .cmul(&cpow, &CElem::from_real(a.clone()))
                        .scale_complex(dz.powi(-(m as i32)));
                    stem = stem.add(&term);
                }
                if m < -min_neg {
                    cpow = alg.cmul(&cpow, &conj_stem);
                }
            }
        }
        let value = &stem.re + &alg.mul(&jx, &stem.im);
        Ok((value, self.in_region(x)))
    }

    /// Coefficient table as CSV: header `n` plus one column per basis
    /// component; rows in index order, exact zeros omitted.
    pub fn to_csv(&self) -> String {
        coeff_csv(&self.alg, &self.coeffs)
    }

    /// Run metadata as a JSON value with deterministic key order.
    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "algebra": self.alg.name().to_string(),
            "kind": "laurent",
            "center": self.center.coeffs(),
            "radius": self.radius_used,
            "samples": self.sample_count,
            "k_max": self.k_max,
            "est_r1": self.est_r1,
            "est_r2": Radius::from_f64(self.est_r2),
            "zero_threshold": self.zero_threshold,
            "truncated_principal": self.truncated_principal,
        })
    }
}

impl SphericalData {
    pub fn algebra(&self) -> &Algebra {
        &self.alg
    }

    pub fn center(&self) -> &Elem {
        &self.center
    }

    pub fn slice_unit(&self) -> &Elem {
        &self.j
    }

    /// Stored (nonzero) spherical numbers; indices absent are exact zeros.
    pub fn numbers(&self) -> &BTreeMap<i64, Elem> {
        &self.c
    }

    /// Spherical number at index `n` (zero when not stored).
    pub fn number(&self, n: i64) -> Elem {
        self.c.get(&n).cloned().unwrap_or_else(|| self.alg.zero())
    }

    /// Stored spherical pairs `(u_k, v_k)`; absent indices are zero pairs.
    pub fn pairs(&self) -> &BTreeMap<i64, (Elem, Elem)> {
        &self.pairs
    }

    /// Pair at index `k` (zero pair when not stored).
    pub fn pair(&self, k: i64) -> (Elem, Elem) {
        self.pairs
            .get(&k)
            .cloned()
            .unwrap_or_else(|| (self.alg.zero(), self.alg.zero()))
    }

    pub fn radius_used(&self) -> f64 {
        self.radius_used
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn k_max(&self) -> i64 {
        self.k_max
    }

    /// Estimated convergence shell `(u₁, u₂)` in the Cassini modulus.
    pub fn est_shell(&self) -> (f64, f64) {
        (self.est_u1, self.est_u2)
    }

    pub fn zero_threshold(&self) -> f64 {
        self.zero_threshold
    }

    /// Is `x` inside the estimated Cassini shell of convergence?
    pub fn in_region(&self, x: &Elem) -> bool {
        let u = cassini_distance(&self.alg, x, &self.center);
        u > self.est_u1 && u < self.est_u2
    }

    /// Truncated-series value `Σ_k Δ_y^k(x)(x·u_k + v_k)` together with the
    /// region flag from [`SphericalData::in_region`].
    pub fn eval(&self, x: &Elem) -> Result<(Elem, bool)> {
        let alg = &self.alg;
        let dec = alg.cone_decompose(x);
        if !dec.in_cone {
            return Err(Error::OutsideCone);
        }
        let ydec = alg.cone_decompose(&self.center);
        let zy = ydec.z();
        let z = dec.z();
        let dz = (z - zy) * (z - zy.conj());
        let has_principal = self.pairs.keys().next().is_some_and(|k| *k < 0);
        if has_principal && dz.norm() <= f64::MIN_POSITIVE {
            return Err(Error::OnSingularSphere(SphereId::from_z(zy)));
        }
        let jx = if dec.is_real() { self.j.clone() } else { dec.j.clone() };
        let mut value = alg.zero();
        for (k, (u, v)) in &self.pairs {
            let affine = &alg.mul(x, u) + v;
            let term = if *k == 0 {
                affine
            } else {
                alg.cj_apply(&jx, dz.powi(*k as i32), &affine)
            };
            value = &value + &term;
        }
        Ok((value, self.in_region(x)))
    }

    /// Move the expansion center to another point of the same sphere:
    /// `c'_{2k} = c_{2k} + (y'−y)·c_{2k+1}`, odd entries unchanged.  Pairs are
    /// invariant under this update.
    pub fn recenter(&self, y_new: &Elem) -> Result<SphericalData> {
        let alg = &self.alg;
        let dec = alg.cone_decompose(y_new);
        if !dec.in_cone {
            return Err(Error::OutsideCone);
        }
        let scale = 1.0 + alg.abs(&self.center);
        if cassini_distance(alg, y_new, &self.center) > 1e-9 * scale {
            return Err(Error::NotOnExpansionSphere);
        }
        let shift = y_new - &self.center;
        let mut c = BTreeMap::new();
        for (n, val) in &self.c {
            if n.rem_euclid(2) == 0 {
                let odd = self
                    .c
                    .get(&(n + 1))
                    .cloned()
                    .unwrap_or_else(|| alg.zero());
                let updated = val + &alg.mul(&shift, &odd);
                if !updated.is_exactly_zero() {
                    c.insert(*n, updated);
                }
            } else {
                // Odd entries carry over; also surface an even index that was
                // an exact zero before but becomes nonzero after the shift.
                c.insert(*n, val.clone());
                let even_idx = n - 1;
                if !self.c.contains_key(&even_idx) {
                    let updated = alg.mul(&shift, val);
                    if !updated.is_exactly_zero() {
                        c.insert(even_idx, updated);
                    }
                }
            }
        }
        let j = if dec.is_real() {
            self.j.clone()
        } else {
            dec.j.clone()
        };
        Ok(finish_spherical(
            alg.clone(),
            y_new.clone(),
            j,
            c,
            self.radius_used,
            self.sample_count,
            self.k_max,
        ))
    }

    /// Spherical-number table as CSV (same layout as the classical table).
    pub fn to_csv(&self) -> String {
        coeff_csv(&self.alg, &self.c)
    }

    /// Pair table as CSV: header `k`, then `u` components, then `v`
    /// components.
    pub fn pairs_to_csv(&self) -> String {
        let labels = self.alg.basis_labels();
        let mut out = String::from("k");
        for l in labels {
            out.push_str(&format!(",u_{l}"));
        }
        for l in labels {
            out.push_str(&format!(",v_{l}"));
        }
        out.push('\n');
        for (k, (u, v)) in &self.pairs {
            out.push_str(&k.to_string());
            for comp in u.coeffs() {
                out.push_str(&format!(",{comp}"));
            }
            for comp in v.coeffs() {
                out.push_str(&format!(",{comp}"));
            }
            out.push('\n');
        }
        out
    }

    /// Run metadata as a JSON value with deterministic key order.
    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "algebra": self.alg.name().to_string(),
            "kind": "spherical",
            "center": self.center.coeffs(),
            "radius": self.radius_used,
            "samples": self.sample_count,
            "k_max": self.k_max,
            "est_u1": self.est_u1,
            "est_u2": Radius::from_f64(self.est_u2),
            "zero_threshold": self.zero_threshold,
        })
    }
}

fn coeff_csv(alg: &Algebra, coeffs: &BTreeMap<i64, Elem>) -> String {
    let labels = alg.basis_labels();
    let mut out = String::from("n");
    for l in labels {
        out.push_str(&format!(",{l}"));
    }
    out.push('\n');
    for (n, a) in coeffs {
        out.push_str(&n.to_string());
        for comp in a.coeffs() {
            out.push_str(&format!(",{comp}"));
        }
        out.push('\n');
    }
    out
}

/// Truncated Laurent evaluation (region flag discarded; see
/// [`LaurentData::eval`] for the flagged form).
pub fn eval_laurent(d: &LaurentData, x: &Elem) -> Result<Elem> {
    d.eval(x).map(|(v, _)| v)
}

/// Truncated spherical evaluation (region flag discarded; see
/// [`SphericalData::eval`] for the flagged form).
pub fn eval_spherical(d: &SphericalData, x: &Elem) -> Result<Elem> {
    d.eval(x).map(|(v, _)| v)
}

/// Recenter spherical data onto another point of the same sphere.
pub fn recenter_spherical(d: &SphericalData, y_new: &Elem) -> Result<SphericalData> {
    d.recenter(y_new)
}

/// Default circle radius for classical quadrature around `y`: half the
/// smallest slice-plane distance from `y` to any representative of a listed
/// singular sphere (the center's own representative excluded, its conjugate
/// kept), floored at a small positive value; `1.0` when nothing constrains it.
pub fn default_laurent_radius(alg: &Algebra, y: &Elem, spheres: &[SphereId]) -> f64 {
    let dec = alg.cone_decompose(y);
    if !dec.in_cone {
        return tol::RADIUS_FLOOR;
    }
    let zy = dec.z();
    let scale = 1.0 + zy.norm();
    let mut min_d = f64::INFINITY;
    for s in spheres {
        for rep in [s.z(), s.z().conj()] {
            let d = (rep - zy).norm();
            if d > tol::SPHERE_MEMBER * scale {
                min_d = min_d.min(d);
            }
        }
    }
    if min_d.is_finite() {
        (0.5 * min_d).max(tol::RADIUS_FLOOR)
    } else {
        1.0
    }
}

/// Default circle radius for spherical quadrature around non-real `y`: half
/// the binding constraint among (a) the imaginary height (circle
/// disjointness) and (b) slice distances from either circle center to other
/// spheres' representatives.  Real centers fall back to the classical
/// default.
pub fn default_spherical_radius(alg: &Algebra, y: &Elem, spheres: &[SphereId]) -> f64 {
    let dec = alg.cone_decompose(y);
    if !dec.in_cone {
        return tol::RADIUS_FLOOR;
    }
    if dec.is_real() {
        return default_laurent_radius(alg, y, spheres);
    }
    let zy = dec.z();
    let own = SphereId::from_z(zy);
    let mut bound = dec.beta;
    for s in spheres {
        if s.close_to(&own, tol::SPHERE_MEMBER) {
            continue;
        }
        for rep in [s.z(), s.z().conj()] {
            for c0 in [zy, zy.conj()] {
                bound = bound.min((rep - c0).norm());
            }
        }
    }
    (0.5 * bound).max(tol::RADIUS_FLOOR)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraName;
    use crate::rational::{Expr, RationalExpr, StarPoly};

    fn h() -> Algebra {
        Algebra::new(AlgebraName::H)
    }

    fn poly_expr(cs: &[Elem]) -> Expr {
        Expr::poly(cs.iter().map(|c| c.coeffs().to_vec()).collect())
    }

    /// f = (x + J)^{-•} over ℍ, singular exactly on the unit imaginary
    /// sphere; the reciprocal of x − (−i).
    fn centered_reciprocal(alg: &Algebra) -> SliceFn {
        let expr = Expr::inv(poly_expr(&[alg.imag_unit(), alg.one()]));
        RationalExpr::from_expr(alg, &expr)
            .expect("rational build")
            .to_slice_fn()
    }

    fn center_j(alg: &Algebra) -> Elem {
        alg.imag_unit()
    }

    #[test]
    fn reciprocal_series_matches_closed_form() {
        let alg = h();
        let f = centered_reciprocal(&alg);
        let y = center_j(&alg);
        let d = laurent_coeffs(&f, &y, 1.0, 10, 512).expect("quadrature");
        // a_n = (−1)^n (2J)^{−n−1} for n ≥ 0; empty principal part.
        let i = alg.imag_unit();
        for n in 0..=8i64 {
            let two_i_pow = Complex64::new(0.0, 2.0).powi(-(n as i32) - 1);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let expect = alg.cj_apply(&i, two_i_pow * sign, &alg.one());
            let diff = &d.coeff(n) - &expect;
            assert!(
                alg.abs(&diff) < 1e-9,
                "a_{n} off by {}",
                alg.abs(&diff)
            );
        }
        assert!(alg.abs(&d.coeff(-1)) < 1e-10, "principal part should vanish");
        assert!(!d.principal_truncated());
        let (r1, r2) = d.est_radii();
        assert!(r1 < 1e-9, "inner radius should collapse, got {r1}");
        assert!((r2 - 2.0).abs() < 1e-6, "outer radius should be 2, got {r2}");
    }

    #[test]
    fn constant_function_has_single_coefficient() {
        let alg = h();
        let a = alg.elem(vec![0.5, -1.0, 2.0, 0.25]).unwrap();
        let a2 = a.clone();
        let alg2 = alg.clone();
        let f = SliceFn::from_pointwise(alg.clone(), move |_x| Ok(a2.clone()));
        let y = alg2.elem(vec![0.3, 1.2, 0.0, 0.0]).unwrap();
        let d = laurent_coeffs(&f, &y, 0.7, 6, 256).expect("quadrature");
        assert_eq!(d.coeffs().len(), 1);
        let diff = &d.coeff(0) - &a;
        assert!(alg.abs(&diff) < 1e-12);
        let (r1, r2) = d.est_radii();
        assert_eq!(r1, 0.0);
        assert!(r2.is_infinite());
    }

    /// Symbolic oracle for f = (x−i)^{-•}·(x−j) around y = i.  Writing
    /// f = Δ_i^{−1}·P with P = (x+i)⋆(x−j) and expanding both sides in
    /// powers of (x−i) (Δ_i = (x−i)^{•2} + (x−i)·2i has real central
    /// coefficients), coefficient matching gives
    /// a_{m−2} + 2i·a_{m−1} = p_m with a_n = 0 for n < −1, where p_m are the
    /// recentered right coefficients of P.  Forward substitution then pins
    /// every a_n exactly.
    #[test]
    fn convolution_oracle_matches_quadrature() {
        let alg = h();
        let i = alg.imag_unit();
        let jq = alg.basis(2);
        let expr = Expr::mul(
            Expr::inv(poly_expr(&[i.scale(-1.0), alg.one()])),
            poly_expr(&[jq.scale(-1.0), alg.one()]),
        );
        let f = RationalExpr::from_expr(&alg, &expr)
            .expect("rational")
            .to_slice_fn();
        let d = laurent_coeffs(&f, &i, 0.5, 8, 512).expect("quadrature");

        let plus_i = StarPoly::linear(alg.clone(), &i.scale(-1.0));
        let xmj = StarPoly::linear(alg.clone(), &jq);
        let p = plus_i.star_mul(&xmj).shifted_coeffs(&i);
        let half_minus_i = Complex64::new(0.0, 2.0).inv();

        let mut a_prev2 = alg.zero(); // a_{m−2}, starting at a_{−2} = 0
        let mut a_prev1; // a_{m−1}
        for m in 0..=7i64 {
            let pm = p.get(m as usize).cloned().unwrap_or_else(|| alg.zero());
            let rhs = &pm - &a_prev2;
            a_prev1 = alg.cj_apply(&i, half_minus_i, &rhs);
            let got = d.coeff(m - 1);
            let diff = &got - &a_prev1;
            assert!(
                alg.abs(&diff) < 1e-8,
                "a_{} mismatch: {}",
                m - 1,
                alg.abs(&diff)
            );
            a_prev2 = std::mem::replace(&mut a_prev1, alg.zero());
        }
    }

    #[test]
    fn reciprocal_spherical_numbers_are_a_delta() {
        let alg = h();
        let f = centered_reciprocal(&alg);
        let y = center_j(&alg);
        let d = spherical_numbers(&f, &y, 0.5, 6, 512).expect("quadrature");
        for n in -6..=6i64 {
            let c = d.number(n);
            if n == -1 {
                let diff = &c - &alg.one();
                assert!(alg.abs(&diff) < 1e-9, "c_{{−1}} should be 1");
            } else {
                assert!(alg.abs(&c) < 1e-9, "c_{n} should vanish, got {}", alg.abs(&c));
            }
        }
        // u_{−1} = c_{−1} = 1, v_{−1} = c_{−2} − y c_{−1} = −y.
        let (u, v) = d.pair(-1);
        assert!(alg.abs(&(&u - &alg.one())) < 1e-9);
        assert!(alg.abs(&(&v + &y)) < 1e-9);
    }

    #[test]
    fn delta_quadratic_has_c2_only() {
        let alg = h();
        let y = alg.elem(vec![0.5, 0.0, 1.5, 0.0]).unwrap();
        let ydec = alg.cone_decompose(&y);
        let zy = ydec.z();
        let t = 2.0 * zy.re;
        let n0 = zy.norm_sqr();
        let expr = poly_expr(&[alg.real(n0), alg.real(-t), alg.one()]);
        let f = RationalExpr::from_expr(&alg, &expr)
            .expect("rational")
            .to_slice_fn();
        let d = spherical_numbers(&f, &y, 0.4, 5, 256).expect("quadrature");
        for n in -10..=10i64 {
            let c = d.number(n);
            if n == 2 {
                assert!(alg.abs(&(&c - &alg.one())) < 1e-9, "c_2 should be 1");
            } else {
                assert!(alg.abs(&c) < 1e-9, "c_{n} should vanish");
            }
        }
    }

    #[test]
    fn identity_function_spherical_numbers() {
        let alg = h();
        let y = alg.elem(vec![-0.25, 0.0, 0.0, 2.0]).unwrap();
        let expr = poly_expr(&[alg.zero(), alg.one()]);
        let f = RationalExpr::from_expr(&alg, &expr)
            .expect("rational")
            .to_slice_fn();
        let d = spherical_numbers(&f, &y, 0.6, 4, 256).expect("quadrature");
        assert!(alg.abs(&(&d.number(1) - &alg.one())) < 1e-9, "c_1 = 1");
        assert!(alg.abs(&(&d.number(0) - &y)) < 1e-9, "c_0 = y");
        for n in -8..=9i64 {
            if n != 0 && n != 1 {
                assert!(alg.abs(&d.number(n)) < 1e-9, "c_{n} should vanish");
            }
        }
    }

    #[test]
    fn direct_pair_quadrature_agrees_with_derived_pairs() {
        let alg = h();
        let f = centered_reciprocal(&alg);
        let y = center_j(&alg);
        let d = spherical_numbers(&f, &y, 0.5, 4, 512).expect("numbers");
        let direct = spherical_pairs_direct(&f, &y, 0.5, 4, 512).expect("pairs");
        for k in -4..=4i64 {
            let (u1, v1) = d.pair(k);
            let (u2, v2) = direct[&k].clone();
            assert!(
                alg.abs(&(&u1 - &u2)) < 1e-9,
                "u_{k} mismatch: {}",
                alg.abs(&(&u1 - &u2))
            );
            assert!(
                alg.abs(&(&v1 - &v2)) < 1e-9,
                "v_{k} mismatch: {}",
                alg.abs(&(&v1 - &v2))
            );
        }
    }

    #[test]
    fn recentering_is_involutive_and_matches_fresh_quadrature() {
        let alg = h();
        let f = centered_reciprocal(&alg);
        let y = center_j(&alg);
        let d = spherical_numbers(&f, &y, 0.5, 6, 512).expect("quadrature");

        // Identity recenter.
        let same = d.recenter(&y).expect("identity recenter");
        for (n, c) in d.numbers() {
            let diff = c - &same.number(*n);
            assert!(alg.abs(&diff) == 0.0, "identity recenter must not move c_{n}");
        }

        // Another point of the unit imaginary sphere (exactly representable,
        // so the Cassini membership check sees it at distance zero).
        let y2 = alg.basis(2);
        let moved = d.recenter(&y2).expect("recenter");
        let back = moved.recenter(&y).expect("recenter back");
        for n in -13..=13i64 {
            let diff = &d.number(n) - &back.number(n);
            assert!(
                alg.abs(&diff) == 0.0,
                "recenter twice must restore c_{n} exactly"
            );
        }

        // Pairs are sphere-invariant: u exactly (odd entries are untouched),
        // v up to re-association of the products in c_{2k} − y·c_{2k+1}.
        for k in -6..=6i64 {
            let (u0, v0) = d.pair(k);
            let (u1, v1) = moved.pair(k);
            assert!(alg.abs(&(&u0 - &u1)) == 0.0, "u_{k} must be invariant");
            assert!(alg.abs(&(&v0 - &v1)) < 1e-14, "v_{k} must be invariant");
        }

        // Fresh quadrature at the new center agrees.
        let fresh = spherical_numbers(&f, &y2, 0.5, 6, 512).expect("fresh");
        for n in -6..=6i64 {
            let diff = &moved.number(n) - &fresh.number(n);
            assert!(
                alg.abs(&diff) < 1e-9,
                "recentered c_{n} differs from fresh quadrature by {}",
                alg.abs(&diff)
            );
        }

        // Off-sphere targets are rejected.
        let off = alg.elem(vec![0.1, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            d.recenter(&off),
            Err(Error::NotOnExpansionSphere)
        ));
    }

    #[test]
    fn real_center_uses_shared_path() {
        let alg = h();
        // f = (x − 1)^{-•} has a real singular point; expand at y = 0.
        let expr = Expr::inv(poly_expr(&[alg.one().scale(-1.0), alg.one()]));
        let f = RationalExpr::from_expr(&alg, &expr)
            .expect("rational")
            .to_slice_fn();
        let y = alg.zero();
        let lau = laurent_coeffs(&f, &y, 0.5, 9, 512).expect("classical");
        let sph = spherical_numbers(&f, &y, 0.5, 4, 512).expect("spherical");
        for n in -4..=9i64 {
            let a = lau.coeff(n);
            let c = sph.number(n);
            let diff = &a - &c;
            assert!(
                alg.abs(&diff) < 1e-12,
                "real-center data must coincide at index {n}"
            );
            if n >= 0 {
                // geometric series: a_n = −1 for all n ≥ 0
                let diff = &a + &alg.one();
                assert!(alg.abs(&diff) < 1e-9, "a_{n} should be −1");
            }
        }
    }

    #[test]
    fn laurent_eval_reconstructs_inside_annulus() {
        let alg = h();
        let f = centered_reciprocal(&alg);
        let y = center_j(&alg);
        // K = 40: off-slice points sit at σ ≥ 1 from the center (their whole
        // sphere must clear the center's sphere), so the geometric tail needs
        // the extra terms to drop below 1e−8.
        let d = laurent_coeffs(&f, &y, 1.0, 40, 512).expect("quadrature");

        // On the center slice.
        let x = alg.from_slice_point(&alg.imag_unit(), Complex64::new(0.0, 1.5));
        let (got, inside) = d.eval(&x).expect("eval");
        let want = f.eval(&x).expect("direct");
        assert!(inside, "1.5J lies inside the annulus");
        assert!(
            alg.abs(&(&got - &want)) < 1e-8,
            "reconstruction error {}",
            alg.abs(&(&got - &want))
        );

        // Off the center slice, close to the real axis where σ stays small.
        let x2 = alg.elem(vec![0.05, 0.12, 0.05, -0.03]).unwrap();
        let (got2, inside2) = d.eval(&x2).expect("eval");
        let want2 = f.eval(&x2).expect("direct");
        assert!(inside2);
        assert!(
            alg.abs(&(&got2 - &want2)) < 1e-8,
            "off-slice reconstruction error {}",
            alg.abs(&(&got2 - &want2))
        );

        // Far outside the outer radius: still computes, flags the region.
        let x3 = alg.elem(vec![5.0, 0.0, 0.0, 0.0]).unwrap();
        let (_, inside3) = d.eval(&x3).expect("eval");
        assert!(!inside3, "5 is outside the estimated annulus");
    }

    #[test]
    fn spherical_eval_reconstructs_inside_shell() {
        let alg = h();
        let f = centered_reciprocal(&alg);
        let y = center_j(&alg);
        let d = spherical_numbers(&f, &y, 0.5, 12, 512).expect("quadrature");
        let x = alg.elem(vec![0.1, 0.3, 0.2, -0.1]).unwrap();
        let (got, inside) = d.eval(&x).expect("eval");
        let want = f.eval(&x).expect("direct");
        assert!(inside, "point lies in the shell");
        assert!(
            alg.abs(&(&got - &want)) < 1e-7,
            "shell reconstruction error {}",
            alg.abs(&(&got - &want))
        );
    }

    #[test]
    fn contour_through_singular_sphere_is_rejected() {
        let alg = h();
        let f = centered_reciprocal(&alg);
        // Center 0 (real): circle of radius 1 passes exactly through the
        // singular sphere of f.
        let y = alg.zero();
        let err = laurent_coeffs(&f, &y, 1.0, 4, 256);
        assert!(matches!(err, Err(Error::ContourHitsSingularSphere(_))));
        // Radius away from the sphere works.
        assert!(laurent_coeffs(&f, &y, 0.5, 4, 256).is_ok());
    }

    #[test]
    fn spherical_contour_respects_other_spheres() {
        let alg = h();
        // f = ((x−i)·(x−3i))^{-•} via N(x−3i)-style denominator: build as
        // inv((x−i)) ⋆ inv((x−3i)) through the expression tree.
        let i = alg.imag_unit();
        let expr = Expr::mul(
            Expr::inv(poly_expr(&[i.scale(-1.0), alg.one()])),
            Expr::inv(poly_expr(&[i.scale(-3.0), alg.one()])),
        );
        let f = RationalExpr::from_expr(&alg, &expr)
            .expect("rational")
            .to_slice_fn();
        // Expanding on 𝕊_i: radius 0.4 keeps both circles clear of 𝕊_{3i}
        // and of each other; radius 1.0 violates circle disjointness (β = 1)
        // and radius 1.5 additionally reaches into 𝕊_{3i}.
        let y = i.clone();
        assert!(spherical_numbers(&f, &y, 0.4, 4, 256).is_ok());
        assert!(
            spherical_numbers(&f, &y, 1.0, 4, 256).is_err(),
            "touching circles must be rejected"
        );
        // A function singular on a nearby sphere rejects radii that reach it
        // even when the circles themselves stay disjoint.
        let near = Expr::inv(poly_expr(&[i.scale(-1.2), alg.one()]));
        let g = RationalExpr::from_expr(&alg, &near)
            .expect("rational")
            .to_slice_fn();
        let hit = spherical_numbers(&g, &y, 0.5, 4, 256);
        assert!(
            matches!(hit, Err(Error::ContourHitsSingularSphere(_))),
            "contour reaching a foreign sphere must be rejected"
        );
    }

    #[test]
    fn default_radii_policies() {
        let alg = h();
        let i = alg.imag_unit();
        let own = SphereId::from_z(Complex64::new(0.0, 1.0));
        let far = SphereId::from_z(Complex64::new(0.0, 3.0));
        // Classical default at y = i with only its own sphere singular:
        // conjugate representative −i at distance 2 → radius 1.
        let r = default_laurent_radius(&alg, &i, &[own.clone()]);
        assert!((r - 1.0).abs() < 1e-12, "expected 1, got {r}");
        // Spherical default at y = i with no other spheres: β/2.
        let rho = default_spherical_radius(&alg, &i, &[own.clone()]);
        assert!((rho - 0.5).abs() < 1e-12, "expected 0.5, got {rho}");
        // Another sphere at height 3 limits neither (distance 2 > β)…
        let rho2 = default_spherical_radius(&alg, &i, &[own.clone(), far.clone()]);
        assert!((rho2 - 0.5).abs() < 1e-12);
        // …but a nearby sphere does.
        let near = SphereId::from_z(Complex64::new(0.0, 1.2));
        let rho3 = default_spherical_radius(&alg, &i, &[own, near]);
        assert!((rho3 - 0.1).abs() < 1e-9, "expected 0.1, got {rho3}");
        // No constraints at all → 1.0 classical.
        let r2 = default_laurent_radius(&alg, &i, &[]);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn parallel_and_sequential_quadrature_agree_bitwise() {
        let alg = h();
        let f = centered_reciprocal(&alg);
        let y = center_j(&alg);
        let par_d = laurent_coeffs(&f, &y, 1.0, 8, 256).expect("parallel");
        let seq_d = laurent_coeffs_seq(&f, &y, 1.0, 8, 256).expect("sequential");
        assert_eq!(par_d.coeffs().len(), seq_d.coeffs().len());
        for (n, a) in par_d.coeffs() {
            let b = &seq_d.coeffs()[n];
            assert_eq!(a.coeffs(), b.coeffs(), "a_{n} must match bit for bit");
        }
        let sp = spherical_numbers(&f, &y, 0.5, 6, 256).expect("parallel");
        let ss = spherical_numbers_seq(&f, &y, 0.5, 6, 256).expect("sequential");
        assert_eq!(sp.numbers().len(), ss.numbers().len());
        for (n, a) in sp.numbers() {
            let b = &ss.numbers()[n];
            assert_eq!(a.coeffs(), b.coeffs(), "c_{n} must match bit for bit");
        }
    }

    #[test]
    fn csv_and_metadata_exports_are_deterministic() {
        let alg = h();
        let f = centered_reciprocal(&alg);
        let y = center_j(&alg);
        let d = laurent_coeffs(&f, &y, 1.0, 4, 256).expect("quadrature");
        let csv1 = d.to_csv();
        let csv2 = d.to_csv();
        assert_eq!(csv1, csv2);
        assert!(csv1.starts_with("n,"));
        let meta = serde_json::to_string(&d.metadata_json()).unwrap();
        let meta2 = serde_json::to_string(&d.metadata_json()).unwrap();
        assert_eq!(meta, meta2);
        assert!(meta.contains("\"algebra\""));
        assert!(meta.contains("\"laurent\""));

        let s = spherical_numbers(&f, &y, 0.5, 4, 256).expect("quadrature");
        assert!(s.pairs_to_csv().starts_with("k,"));
        let smeta = serde_json::to_string(&s.metadata_json()).unwrap();
        assert!(smeta.contains("\"spherical\""));
    }
}
