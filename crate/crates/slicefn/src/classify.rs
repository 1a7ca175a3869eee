//! Conversion between classical and spherical series data, singularity
//! orders, classification reports, and exceptional-set analysis on pole
//! spheres.
//!
//! The classifier comes in two flavours. The exact path
//! ([`classify_rational`]) reads orders off polynomial valuations and never
//! reports an essential singularity. The black-box path ([`classify`]) infers
//! them from quadrature series data up to a stated depth cap; a principal
//! part that is still active at the deepest stored index is reported as
//! [`OrderValue::CapReached`] with kind
//! [`SingularityKind::EssentialPresumed`] — the data is compatible with an
//! essential singularity, but a deeper scan could still reveal a pole.

use std::collections::BTreeSet;
use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, AlgebraName, Elem};
use crate::error::{Error, Result};
use crate::expansions::{
    default_laurent_radius, default_spherical_radius, laurent_coeffs, laurent_from_coeffs,
    spherical_from_numbers, spherical_numbers, LaurentData, SphericalData,
};
use crate::geometry::SphereId;
use crate::rational::{delta_poly, RationalExpr};
use crate::stem::SliceFn;
use crate::tol;

/// Residual threshold (relative) for deciding that a point solves the
/// exceptional-set equation and lies on the sphere.
const MEMBER_TOL: f64 = 1e-8;

/// Relative threshold below which the principal spherical pair counts as
/// vanished, which the extraction contract rules out.
const PAIR_VANISH: f64 = 1e-13;

/// Generalized binomial coefficient `C(a, k)` for integer `a` of either sign:
/// zero for `k < 0`, else `a (a−1) ⋯ (a−k+1) / k!`, which is always an
/// integer. Computed exactly in 128-bit arithmetic, falling back to a stable
/// floating-point recurrence if an intermediate product overflows.
pub fn gen_binom(a: i64, k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let mut exact: Option<i128> = Some(1);
    let mut approx = 1.0_f64;
    for i in 0..k {
        let factor = a - i;
        exact = exact
            .and_then(|c| c.checked_mul(factor as i128))
            .map(|p| {
                debug_assert_eq!(p % (i as i128 + 1), 0);
                p / (i as i128 + 1)
            });
        approx = approx * factor as f64 / (i + 1) as f64;
    }
    match exact {
        Some(e) => e as f64,
        None => approx,
    }
}

/// `(y − y^c)` acts on series coefficients as the slice scalar `2βi`; this is
/// its `p`-th power as a complex number.
fn q_pow(beta: f64, p: i64) -> Complex64 {
    Complex64::new(0.0, 2.0 * beta).powi(p as i32)
}

/// Convert spherical series data centered at `y` into classical series data
/// at the same center.
///
/// With `q = y − y^c` acting as a complex scalar from the left,
/// `a_n = Σ_{m ≤ n} q^{2m−n−1} C(m−1, n−m) c_{2m−1} + q^{2m−n} C(m, n−m) c_{2m}`.
/// A real center is an identity re-indexing. The output window is
/// `|n| ≤ 2K+1` for input pair depth `K`; exact zeros are dropped.
///
/// Very small `β` combined with deep windows can overflow the `q` powers;
/// the conversion is then meaningless and the affected entries are non-finite.
pub fn a_from_c(d: &SphericalData) -> Result<LaurentData> {
    let alg = d.algebra().clone();
    let y = d.center().clone();
    let dec = alg.cone_decompose(&y);
    let k_out = 2 * d.k_max() + 1;
    if dec.is_real() {
        return laurent_from_coeffs(&alg, &y, d.numbers().clone(), k_out);
    }
    let j = d.slice_unit().clone();
    let beta = dec.beta;

    // Pair indices m that can contribute: stored c_{2m} or c_{2m−1}.
    let mut ms: BTreeSet<i64> = BTreeSet::new();
    for n in d.numbers().keys() {
        if n.rem_euclid(2) == 0 {
            ms.insert(n / 2);
        } else {
            ms.insert((n + 1).div_euclid(2));
        }
    }

    let mut out: BTreeMap<i64, Elem> = BTreeMap::new();
    for n in -k_out..=k_out {
        let mut acc = alg.zero();
        for &m in ms.iter().take_while(|&&m| m <= n) {
            if let Some(codd) = d.numbers().get(&(2 * m - 1)) {
                let w = gen_binom(m - 1, n - m);
                if w != 0.0 {
                    acc = &acc + &alg.cj_apply(&j, q_pow(beta, 2 * m - n - 1) * w, codd);
                }
            }
            if let Some(ceven) = d.numbers().get(&(2 * m)) {
                let w = gen_binom(m, n - m);
                if w != 0.0 {
                    acc = &acc + &alg.cj_apply(&j, q_pow(beta, 2 * m - n) * w, ceven);
                }
            }
        }
        if !acc.is_exactly_zero() {
            out.insert(n, acc);
        }
    }
    laurent_from_coeffs(&alg, &y, out, k_out)
}

/// Sign `(−1)^{ℓ−1}` for any integer `ℓ`.
fn alt_sign(l: i64) -> f64 {
    if l.rem_euclid(2) == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Convert a pair of classical series data sets — `da` centered at `y` and
/// `db` at the slice conjugate `y^c` — into spherical series data at `y`.
///
/// With `q = y − y^c` as a left complex scalar and `b` the coefficients of
/// `db`:
/// `c_{2m}   = Σ_{ℓ ≤ m} q^{ℓ−2m} C(−m, m−ℓ) a_ℓ + q^{ℓ−2m−1} (−1)^{ℓ−1} C(−m−1, m−ℓ) b_{ℓ−1}`,
/// `c_{2m+1} = Σ_{ℓ ≤ m} q^{ℓ−2m−1} C(−m−1, m−ℓ) (a_ℓ + (−1)^{ℓ−1} b_ℓ)`.
/// A real center is an identity re-indexing of `da` alone.
pub fn c_from_ab(da: &LaurentData, db: &LaurentData) -> Result<SphericalData> {
    let alg = da.algebra().clone();
    if db.algebra().name() != alg.name() {
        return Err(Error::InvalidRequest(
            "the two classical data sets live over different algebras".into(),
        ));
    }
    let y = da.center().clone();
    let yc = alg.conj(&y);
    let scale = 1.0 + alg.abs(&y);
    if alg.abs(&(db.center() - &yc)) > tol::SAME_SLICE * scale {
        return Err(Error::InvalidRequest(
            "second data set must be centered at the slice conjugate of the first".into(),
        ));
    }
    let dec = alg.cone_decompose(&y);
    if dec.is_real() {
        let k_pairs = (da.k_max() + 1) / 2;
        return spherical_from_numbers(&alg, &y, da.coeffs().clone(), k_pairs);
    }
    let j = da.slice_unit().clone();
    let beta = dec.beta;
    let k_out = da.k_max().max(db.k_max());

    let a_sup: BTreeSet<i64> = da.coeffs().keys().copied().collect();
    let b_sup: BTreeSet<i64> = db.coeffs().keys().copied().collect();

    let mut c: BTreeMap<i64, Elem> = BTreeMap::new();
    for m in -k_out..=k_out {
        // Even index 2m.
        let mut acc = alg.zero();
        for &l in a_sup.iter().take_while(|&&l| l <= m) {
            let w = gen_binom(-m, m - l);
            if w != 0.0 {
                acc = &acc + &alg.cj_apply(&j, q_pow(beta, l - 2 * m) * w, &da.coeffs()[&l]);
            }
        }
        for &lb in b_sup.iter() {
            let l = lb + 1;
            if l > m {
                break;
            }
            let w = gen_binom(-m - 1, m - l);
            if w != 0.0 {
                let cpow = q_pow(beta, l - 2 * m - 1) * (w * alt_sign(l));
                acc = &acc + &alg.cj_apply(&j, cpow, &db.coeffs()[&lb]);
            }
        }
        if !acc.is_exactly_zero() {
            c.insert(2 * m, acc);
        }

        // Odd index 2m+1.
        let mut acc = alg.zero();
        for &l in a_sup.union(&b_sup).take_while(|&&l| l <= m) {
            let w = gen_binom(-m - 1, m - l);
            if w == 0.0 {
                continue;
            }
            let mut term = alg.zero();
            if let Some(al) = da.coeffs().get(&l) {
                term = &term + al;
            }
            if let Some(bl) = db.coeffs().get(&l) {
                term = &term + &bl.scale(alt_sign(l));
            }
            acc = &acc + &alg.cj_apply(&j, q_pow(beta, l - 2 * m - 1) * w, &term);
        }
        if !acc.is_exactly_zero() {
            c.insert(2 * m + 1, acc);
        }
    }
    spherical_from_numbers(&alg, &y, c, k_out)
}

// ---------------------------------------------------------------------------
// Orders and report types
// ---------------------------------------------------------------------------

/// An order that is either known exactly or only bounded below by the scan
/// depth: `CapReached(k)` means "at least `k`, the window ended there".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum OrderValue {
    Finite(i64),
    CapReached(i64),
}

impl OrderValue {
    /// The exact order, when the scan resolved it.
    pub fn finite(&self) -> Option<i64> {
        match self {
            OrderValue::Finite(n) => Some(*n),
            OrderValue::CapReached(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, OrderValue::Finite(0))
    }
}

impl fmt::Display for OrderValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrderValue::Finite(n) => write!(f, "{n}"),
            OrderValue::CapReached(k) => write!(f, ">={k} (cap)"),
        }
    }
}

/// A vanishing multiplicity: finite, or infinite for the zero function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Multiplicity {
    Finite(i64),
    Infinite,
}

/// What the sphere is for the function: a removable singularity, a pole of
/// finite spherical order, or compatible with an essential singularity as far
/// as the scan depth could tell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SingularityKind {
    Removable,
    Pole,
    EssentialPresumed,
}

/// Pointwise order record. `point` uses the algebra's wire encoding.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointOrder {
    pub point: Vec<f64>,
    pub order: OrderValue,
    pub exceptional: bool,
}

/// An affine solution set `H = {x : x·u + v = 0}` together with its
/// intersection with the singular sphere. Vectors use the algebra's wire
/// encoding. `base: None` means the linear system is inconsistent (empty H);
/// `intersection_dim: None` means H misses the sphere;
/// `intersection_dim: Some(0)` comes with the explicit `sphere_points` list;
/// positive dimensions describe a continuum and leave the list empty.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AffineSet {
    pub base: Option<Vec<f64>>,
    pub directions: Vec<Vec<f64>>,
    pub intersection_dim: Option<i64>,
    pub sphere_points: Vec<Vec<f64>>,
}

impl AffineSet {
    fn empty() -> AffineSet {
        AffineSet {
            base: None,
            directions: Vec::new(),
            intersection_dim: None,
            sphere_points: Vec::new(),
        }
    }
}

/// Norm samples of `f` along an approach `w + t·J_w` for decreasing `t`,
/// recording whether they grow monotonically.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlowUpWitness {
    pub point: Vec<f64>,
    pub offsets: Vec<f64>,
    pub norms: Vec<f64>,
    pub increasing: bool,
}

/// Full classification of one singular sphere.
///
/// `order_at` lists pointwise orders (sampled points plus any explicit
/// exceptional points), `exceptional_affine` the solution set of the
/// principal-pair equation on pole spheres, and the multiplicities the even
/// spherical vanishing order (non-real centers) or the classical vanishing
/// order (real centers) where the function is regular. `cap` is the deepest
/// order the scan could have resolved (`None` on the exact path); `exact`
/// marks reports from the polynomial path.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SingularityReport {
    pub algebra: String,
    pub sphere: SphereId,
    pub kind: SingularityKind,
    pub spherical_order: OrderValue,
    pub order_at: Vec<PointOrder>,
    pub exceptional_affine: Option<AffineSet>,
    pub spherical_multiplicity: Option<Multiplicity>,
    pub classical_multiplicity: Option<Multiplicity>,
    pub blow_up: Option<BlowUpWitness>,
    pub cap: Option<i64>,
    pub exact: bool,
}

impl SingularityReport {
    /// Deterministic JSON rendering with stable field order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn kind_of(order: &OrderValue) -> SingularityKind {
    match order {
        OrderValue::Finite(0) => SingularityKind::Removable,
        OrderValue::Finite(_) => SingularityKind::Pole,
        OrderValue::CapReached(_) => SingularityKind::EssentialPresumed,
    }
}

/// Smallest even integer ≥ `n` (for `n ≥ 0`).
fn round_up_even(n: i64) -> i64 {
    2 * ((n + 1) / 2)
}

/// Relative level below which a flat run of quadrature coefficients is
/// eligible to be read as evaluation noise rather than signal.
const NOISE_REL: f64 = 1e-8;
/// Largest consecutive-magnitude ratio inside a noise plateau. Evaluation
/// dust fluctuates by small factors, while genuine series tails decay
/// steadily and steeply enough to break this band.
const NOISE_STEP: f64 = 4.0;
/// Upward jump that marks the boundary between a single dust entry and the
/// first genuine coefficient.
const NOISE_JUMP: f64 = 100.0;

/// Length of the noise plateau at the start of `norms`, a magnitude profile
/// walked from one end of the stored index range inward. The plateau is a
/// run of entries below `NOISE_REL`·`max_all` with consecutive ratios inside
/// `NOISE_STEP`; it must be at least two entries long, or a single entry
/// followed by a `NOISE_JUMP` rise to the first surviving coefficient.
fn noise_plateau_len(norms: &[f64], max_all: f64) -> usize {
    let level = NOISE_REL * max_all;
    let mut cnt = 0;
    while cnt < norms.len() {
        let v = norms[cnt];
        if v > level {
            break;
        }
        if cnt > 0 {
            let prev = norms[cnt - 1];
            let (lo, hi) = if v < prev { (v, prev) } else { (prev, v) };
            if hi > NOISE_STEP * lo {
                break;
            }
        }
        cnt += 1;
    }
    if cnt >= 2 {
        cnt
    } else if cnt == 1 && norms.get(1).is_some_and(|next| *next >= NOISE_JUMP * norms[0]) {
        1
    } else {
        0
    }
}

/// Indices that count as genuinely present in a coefficient table.
///
/// Quadrature tables are already trimmed to the quadrature round-off floor,
/// but evaluating the function itself carries a condition number the
/// quadrature cannot see, which leaves a flat dust plateau above that floor
/// where the true coefficients vanish. The plateau is cut from the deep end
/// of the principal side and from the leading end of the regular side.
/// Synthesized or converted tables carry exact structural zeros plus
/// conversion round-off and are filtered against the relative significance
/// threshold instead.
fn significant_indices(
    alg: &Algebra,
    table: &BTreeMap<i64, Elem>,
    synthetic: bool,
    zero_threshold: f64,
) -> Vec<i64> {
    if synthetic {
        return table
            .iter()
            .filter(|(_, a)| alg.abs(a) > zero_threshold)
            .map(|(n, _)| *n)
            .collect();
    }
    let entries: Vec<(i64, f64)> = table.iter().map(|(n, a)| (*n, alg.abs(a))).collect();
    let max_all = entries.iter().map(|(_, v)| *v).fold(0.0, f64::max);
    if max_all == 0.0 {
        return Vec::new();
    }
    let n_neg = entries.iter().take_while(|(n, _)| *n < 0).count();
    let neg_profile: Vec<f64> = entries[..n_neg].iter().map(|(_, v)| *v).collect();
    let cut_deep = noise_plateau_len(&neg_profile, max_all);
    let lead_profile: Vec<f64> = entries[n_neg..].iter().map(|(_, v)| *v).collect();
    let cut_lead = noise_plateau_len(&lead_profile, max_all);
    entries[cut_deep..n_neg]
        .iter()
        .chain(entries[n_neg + cut_lead..].iter())
        .map(|(n, _)| *n)
        .collect()
}

fn significant_min_negative_laurent(d: &LaurentData) -> Option<i64> {
    significant_indices(
        d.algebra(),
        d.coeffs(),
        d.sample_count() == 0,
        d.zero_threshold(),
    )
    .into_iter()
    .filter(|n| *n < 0)
    .min()
}

fn significant_min_negative_spherical(d: &SphericalData) -> Option<i64> {
    significant_indices(
        d.algebra(),
        d.numbers(),
        d.sample_count() == 0,
        d.zero_threshold(),
    )
    .into_iter()
    .filter(|n| *n < 0)
    .min()
}

/// Pointwise order read off classical series data: the depth of the
/// principal part, with the cap flag when it is still active at the deepest
/// stored index.
pub fn order_from_laurent(d: &LaurentData) -> OrderValue {
    match significant_min_negative_laurent(d) {
        None => OrderValue::Finite(0),
        Some(m) if m <= -d.k_max() => OrderValue::CapReached(d.k_max()),
        Some(m) => OrderValue::Finite(-m),
    }
}

/// Spherical order read off spherical series data: the smallest even `n₀`
/// with no series presence below `−n₀`, with the cap flag when the deepest
/// stored pair is still active.
pub fn spherical_order_from_data(d: &SphericalData) -> OrderValue {
    match significant_min_negative_spherical(d) {
        None => OrderValue::Finite(0),
        Some(m) if m <= -(2 * d.k_max() - 1) => OrderValue::CapReached(2 * d.k_max()),
        Some(m) => OrderValue::Finite(round_up_even(-m)),
    }
}

/// Smallest present non-negative index, for vanishing multiplicities at
/// regular centers. `None` means nothing is present at all.
fn min_nonnegative_laurent(d: &LaurentData) -> Option<i64> {
    significant_indices(
        d.algebra(),
        d.coeffs(),
        d.sample_count() == 0,
        d.zero_threshold(),
    )
    .into_iter()
    .filter(|n| *n >= 0)
    .min()
}

fn min_nonnegative_spherical(d: &SphericalData) -> Option<i64> {
    significant_indices(
        d.algebra(),
        d.numbers(),
        d.sample_count() == 0,
        d.zero_threshold(),
    )
    .into_iter()
    .filter(|n| *n >= 0)
    .min()
}

// ---------------------------------------------------------------------------
// Black-box (quadrature) order and classification
// ---------------------------------------------------------------------------

/// Pointwise singularity order of `f` at a cone point `w` by circle
/// quadrature with depth cap `k_max`. `radius: None` picks half the slice
/// distance to the nearest declared singular sphere.
pub fn order_at_point(
    f: &SliceFn,
    w: &Elem,
    radius: Option<f64>,
    k_max: i64,
    n_samples: usize,
) -> Result<OrderValue> {
    let alg = f.algebra().clone();
    let r = radius.unwrap_or_else(|| default_laurent_radius(&alg, w, f.singular_spheres()));
    let d = laurent_coeffs(f, w, r, k_max, n_samples)?;
    Ok(order_from_laurent(&d))
}

/// Canonical cone representative of a sphere: `α + β·J₀` on the distinguished
/// slice.
fn sphere_rep(alg: &Algebra, s: &SphereId) -> Elem {
    alg.from_slice_point(&alg.imag_unit(), s.z())
}

/// Spherical order of `f` on the sphere `s` by two-circle quadrature with
/// pair depth cap `k_max`. `radius: None` picks a shell radius clear of the
/// other declared singular spheres.
pub fn spherical_order(
    f: &SliceFn,
    s: &SphereId,
    radius: Option<f64>,
    k_max: i64,
    n_samples: usize,
) -> Result<OrderValue> {
    let alg = f.algebra().clone();
    let y = sphere_rep(&alg, s);
    if s.is_real_point() {
        return order_at_point(f, &y, radius, 2 * k_max + 1, n_samples)
            .map(|o| match o {
                OrderValue::Finite(n) => OrderValue::Finite(round_up_even(n)),
                OrderValue::CapReached(k) => OrderValue::CapReached(round_up_even(k)),
            });
    }
    let rho = radius.unwrap_or_else(|| default_spherical_radius(&alg, &y, f.singular_spheres()));
    let d = spherical_numbers(f, &y, rho, k_max, n_samples)?;
    Ok(spherical_order_from_data(&d))
}

/// Principal spherical pair `(u, v)` at pole depth `k` (the coefficients of
/// `Δ_y^{−k}(x·u + v)` in the principal part).
fn principal_pair(d: &SphericalData, k: i64) -> Result<(Elem, Elem)> {
    let alg = d.algebra();
    let (u, v) = d.pair(-k);
    let scale = d
        .numbers()
        .values()
        .map(|a| alg.abs(a))
        .fold(0.0, f64::max);
    if alg.abs(&u).max(alg.abs(&v)) <= PAIR_VANISH * (1.0 + scale) {
        return Err(Error::Internal(
            "principal spherical pair vanished at the pole depth; re-run with a larger cap".into(),
        ));
    }
    Ok((u, v))
}

/// Black-box classification of the sphere `s` for `f` from quadrature data:
/// spherical order and kind, pointwise orders at `samples` random sphere
/// points plus any explicit exceptional points, the exceptional affine set on
/// pole spheres, and a blow-up witness at the first non-exceptional sample.
pub fn classify(
    f: &SliceFn,
    s: &SphereId,
    radius: Option<f64>,
    k_max: i64,
    n_samples: usize,
    seed: u64,
) -> Result<SingularityReport> {
    let alg = f.algebra().clone();
    if s.is_real_point() {
        let y = alg.real(s.alpha);
        let r = radius.unwrap_or_else(|| default_laurent_radius(&alg, &y, f.singular_spheres()));
        let d = laurent_coeffs(f, &y, r, k_max, n_samples)?;
        let ord = order_from_laurent(&d);
        let kind = kind_of(&ord);
        let spherical_order = match ord {
            OrderValue::Finite(n) => OrderValue::Finite(round_up_even(n)),
            OrderValue::CapReached(k) => OrderValue::CapReached(round_up_even(k)),
        };
        let classical_multiplicity = if kind == SingularityKind::Removable {
            Some(match min_nonnegative_laurent(&d) {
                Some(n) => Multiplicity::Finite(n),
                None => Multiplicity::Infinite,
            })
        } else {
            None
        };
        let blow_up = if kind == SingularityKind::Pole {
            Some(blow_up_witness(f, &y)?)
        } else {
            None
        };
        return Ok(SingularityReport {
            algebra: alg.name().to_string(),
            sphere: *s,
            kind,
            spherical_order,
            order_at: vec![PointOrder {
                point: alg.to_wire(&y),
                order: ord,
                exceptional: false,
            }],
            exceptional_affine: None,
            spherical_multiplicity: None,
            classical_multiplicity,
            blow_up,
            cap: Some(k_max),
            exact: false,
        });
    }

    let y = sphere_rep(&alg, s);
    let rho = radius.unwrap_or_else(|| default_spherical_radius(&alg, &y, f.singular_spheres()));
    let d = spherical_numbers(f, &y, rho, k_max, n_samples)?;
    let so = spherical_order_from_data(&d);
    let kind = kind_of(&so);

    let mut order_at = Vec::new();
    let mut exceptional_affine = None;
    let mut spherical_multiplicity = None;
    let mut blow_up = None;

    match kind {
        SingularityKind::Removable => {
            spherical_multiplicity = Some(match min_nonnegative_spherical(&d) {
                Some(n) => Multiplicity::Finite(2 * (n / 2)),
                None => Multiplicity::Infinite,
            });
            for p in sphere_points(&alg, s, 10, seed)? {
                order_at.push(PointOrder {
                    point: alg.to_wire(&p),
                    order: OrderValue::Finite(0),
                    exceptional: false,
                });
            }
        }
        SingularityKind::Pole => {
            let k = so.finite().expect("pole order is finite") / 2;
            let (u, v) = principal_pair(&d, k)?;
            let set = exceptional_set_from_pair(&alg, s, &u, &v, seed)?;
            let point_cap = k + 2;
            let mut witness_done = false;
            for p in sphere_points(&alg, s, 10, seed)? {
                let exceptional = pair_residual(&alg, &p, &u, &v) <= pair_scale(&alg, s, &u, &v);
                let ord = order_at_point(f, &p, None, point_cap, n_samples)?;
                if !exceptional && !witness_done {
                    blow_up = Some(blow_up_witness(f, &p)?);
                    witness_done = true;
                }
                order_at.push(PointOrder {
                    point: alg.to_wire(&p),
                    order: ord,
                    exceptional,
                });
            }
            for pw in &set.sphere_points {
                let p = alg.from_wire(pw)?;
                let ord = order_at_point(f, &p, None, point_cap, n_samples)?;
                order_at.push(PointOrder {
                    point: pw.clone(),
                    order: ord,
                    exceptional: true,
                });
            }
            exceptional_affine = Some(set);
        }
        SingularityKind::EssentialPresumed => {
            for p in sphere_points(&alg, s, 10, seed)? {
                let ord = order_at_point(f, &p, None, k_max, n_samples)?;
                order_at.push(PointOrder {
                    point: alg.to_wire(&p),
                    order: ord,
                    exceptional: false,
                });
            }
        }
    }

    Ok(SingularityReport {
        algebra: alg.name().to_string(),
        sphere: *s,
        kind,
        spherical_order: so,
        order_at,
        exceptional_affine,
        spherical_multiplicity,
        classical_multiplicity: None,
        blow_up,
        cap: Some(2 * k_max),
        exact: false,
    })
}

/// Exceptional affine set of `f` on the pole sphere `s`, straight from
/// quadrature: extract the principal spherical pair and solve `x·u + v = 0`.
/// Errors with [`Error::NotASingularity`] on removable spheres and refuses
/// cap-reached data.
pub fn exceptional_set_on_sphere(
    f: &SliceFn,
    s: &SphereId,
    radius: Option<f64>,
    k_max: i64,
    n_samples: usize,
    seed: u64,
) -> Result<AffineSet> {
    let alg = f.algebra().clone();
    if s.is_real_point() {
        return Err(Error::InvalidRequest(
            "exceptional-set analysis applies to non-real spheres".into(),
        ));
    }
    let y = sphere_rep(&alg, s);
    let rho = radius.unwrap_or_else(|| default_spherical_radius(&alg, &y, f.singular_spheres()));
    let d = spherical_numbers(f, &y, rho, k_max, n_samples)?;
    match spherical_order_from_data(&d) {
        OrderValue::Finite(0) => Err(Error::NotASingularity),
        OrderValue::Finite(n0) => {
            let (u, v) = principal_pair(&d, n0 / 2)?;
            exceptional_set_from_pair(&alg, s, &u, &v, seed)
        }
        OrderValue::CapReached(_) => Err(Error::InvalidRequest(
            "principal part exceeds the scan depth; no finite pole order to analyze".into(),
        )),
    }
}

/// Norms of `f` along `w + t·J_w` for `t ∈ {1e−2, 1e−3, 1e−4}`; `increasing`
/// records strict growth as the approach tightens.
pub fn blow_up_witness(f: &SliceFn, w: &Elem) -> Result<BlowUpWitness> {
    let alg = f.algebra().clone();
    let dec = alg.cone_decompose(w);
    if !dec.in_cone {
        return Err(Error::OutsideCone);
    }
    let j = if dec.is_real() {
        alg.imag_unit()
    } else {
        dec.j.clone()
    };
    let offsets = vec![1e-2, 1e-3, 1e-4];
    let mut norms = Vec::with_capacity(offsets.len());
    for &t in &offsets {
        let x = w + &j.scale(t);
        norms.push(alg.abs(&f.eval(&x)?));
    }
    let increasing = norms.windows(2).all(|p| p[1] > p[0]);
    Ok(BlowUpWitness {
        point: alg.to_wire(w),
        offsets,
        norms,
        increasing,
    })
}

// ---------------------------------------------------------------------------
// Exact (rational) order and classification
// ---------------------------------------------------------------------------

/// Multiplicity of the sphere `s` in the denominator of `r` (zero when the
/// sphere is not singular for it).
fn denominator_multiplicity(r: &RationalExpr, s: &SphereId) -> i64 {
    r.singular_spheres()
        .iter()
        .find(|(t, _)| t.close_to(s, tol::ROOT_CLUSTER))
        .map(|(_, m)| *m as i64)
        .unwrap_or(0)
}

/// Exact pointwise singularity order of a rational slice function at the
/// cone point `w`: denominator multiplicity on `w`'s sphere minus the
/// numerator's vanishing order at `w`, floored at zero.
pub fn order_at_point_rational(r: &RationalExpr, w: &Elem) -> Result<OrderValue> {
    let alg = r.algebra();
    let dec = alg.cone_decompose(w);
    if !dec.in_cone {
        return Err(Error::OutsideCone);
    }
    let s = SphereId::from_z(dec.z());
    let m = denominator_multiplicity(r, &s);
    match r.numerator().valuation_at_point(w) {
        None => Ok(OrderValue::Finite(0)),
        Some(om) => Ok(OrderValue::Finite((m - om as i64).max(0))),
    }
}

/// Exact spherical order of a rational slice function on the sphere `s`.
pub fn spherical_order_rational(r: &RationalExpr, s: &SphereId) -> Result<OrderValue> {
    if r.numerator().is_zero() {
        return Ok(OrderValue::Finite(0));
    }
    let alg = r.algebra();
    if s.is_real_point() {
        let y = alg.real(s.alpha);
        let ord = order_at_point_rational(r, &y)?;
        return Ok(OrderValue::Finite(round_up_even(
            ord.finite().expect("exact order is finite"),
        )));
    }
    let m = denominator_multiplicity(r, s);
    let (nu, _) = r.numerator().delta_valuation(s);
    Ok(OrderValue::Finite(2 * (m - nu as i64).max(0)))
}

/// Exact classification of the sphere `s` for a rational slice function.
/// Orders come from polynomial valuations, the exceptional pair from the
/// pole-cleared cofactor, and the kind is never `EssentialPresumed`.
pub fn classify_rational(r: &RationalExpr, s: &SphereId, seed: u64) -> Result<SingularityReport> {
    let alg = r.algebra().clone();
    let f = r.to_slice_fn();

    if r.numerator().is_zero() {
        return Ok(SingularityReport {
            algebra: alg.name().to_string(),
            sphere: *s,
            kind: SingularityKind::Removable,
            spherical_order: OrderValue::Finite(0),
            order_at: Vec::new(),
            exceptional_affine: None,
            spherical_multiplicity: Some(Multiplicity::Infinite),
            classical_multiplicity: Some(Multiplicity::Infinite),
            blow_up: None,
            cap: None,
            exact: true,
        });
    }

    if s.is_real_point() {
        let y = alg.real(s.alpha);
        let m = denominator_multiplicity(r, s);
        let omega = r
            .numerator()
            .valuation_at_point(&y)
            .expect("non-zero polynomial has finite valuation") as i64;
        let net = omega - m;
        let ord = (-net).max(0);
        let kind = if ord == 0 {
            SingularityKind::Removable
        } else {
            SingularityKind::Pole
        };
        let blow_up = if kind == SingularityKind::Pole {
            Some(blow_up_witness(&f, &y)?)
        } else {
            None
        };
        return Ok(SingularityReport {
            algebra: alg.name().to_string(),
            sphere: *s,
            kind,
            spherical_order: OrderValue::Finite(round_up_even(ord)),
            order_at: vec![PointOrder {
                point: alg.to_wire(&y),
                order: OrderValue::Finite(ord),
                exceptional: false,
            }],
            exceptional_affine: None,
            spherical_multiplicity: None,
            classical_multiplicity: (net >= 0).then_some(Multiplicity::Finite(net)),
            blow_up,
            cap: None,
            exact: true,
        });
    }

    let m = denominator_multiplicity(r, s);
    let (nu, gprime) = r.numerator().delta_valuation(s);
    let net = nu as i64 - m;

    if net >= 0 {
        let mut order_at = Vec::new();
        for p in sphere_points(&alg, s, 10, seed)? {
            order_at.push(PointOrder {
                point: alg.to_wire(&p),
                order: OrderValue::Finite(0),
                exceptional: false,
            });
        }
        return Ok(SingularityReport {
            algebra: alg.name().to_string(),
            sphere: *s,
            kind: SingularityKind::Removable,
            spherical_order: OrderValue::Finite(0),
            order_at,
            exceptional_affine: None,
            spherical_multiplicity: Some(Multiplicity::Finite(2 * net)),
            classical_multiplicity: None,
            blow_up: None,
            cap: None,
            exact: true,
        });
    }

    // Pole of spherical order 2k. Clear the pole: with denominator
    // N = Δ_s^m · R and numerator G = Δ_s^ν · G′, the cleared function
    // g = Δ_s^k ⊙ f = R^{−1} · G′ is slice-regular near the sphere and its
    // two-point data on the sphere yields the principal pair.
    let k = -net;
    let delta = delta_poly(s.alpha, s.beta);
    let mut rpoly = r.denominator().clone();
    for _ in 0..m {
        let (q, rem) = rpoly.long_div(&delta);
        debug_assert!(rem.coeffs().iter().all(|c| c.abs() <= 1e-9));
        rpoly = q;
    }
    let zy = s.z();
    let rz = rpoly.eval_complex(zy);
    let j = alg.imag_unit();
    let y = alg.from_slice_point(&j, zy);

    let cel_y = gprime.stem_at(zy).scale_complex(rz.inv());
    let g_y = &cel_y.re + &alg.mul(&j, &cel_y.im);
    let cel_yc = gprime.stem_at(zy.conj()).scale_complex(rz.conj().inv());
    let g_yc = &cel_yc.re + &alg.mul(&j, &cel_yc.im);

    let diff = &g_y - &g_yc;
    let u = alg.cj_apply(&j, Complex64::new(0.0, 2.0 * s.beta).inv(), &diff);
    let v = &g_y - &alg.mul(&y, &u);

    let set = exceptional_set_from_pair(&alg, s, &u, &v, seed)?;

    let mut order_at = Vec::new();
    let mut blow_up = None;
    for p in sphere_points(&alg, s, 10, seed)? {
        let omega = gprime
            .valuation_at_point(&p)
            .expect("non-zero polynomial has finite valuation") as i64;
        let exceptional = pair_residual(&alg, &p, &u, &v) <= pair_scale(&alg, s, &u, &v);
        if !exceptional && blow_up.is_none() {
            blow_up = Some(blow_up_witness(&f, &p)?);
        }
        order_at.push(PointOrder {
            point: alg.to_wire(&p),
            order: OrderValue::Finite((k - omega).max(0)),
            exceptional,
        });
    }
    for pw in &set.sphere_points {
        let p = alg.from_wire(pw)?;
        let omega = gprime
            .valuation_at_point(&p)
            .expect("non-zero polynomial has finite valuation") as i64;
        order_at.push(PointOrder {
            point: pw.clone(),
            order: OrderValue::Finite((k - omega).max(0)),
            exceptional: true,
        });
    }

    Ok(SingularityReport {
        algebra: alg.name().to_string(),
        sphere: *s,
        kind: SingularityKind::Pole,
        spherical_order: OrderValue::Finite(2 * k),
        order_at,
        exceptional_affine: Some(set),
        spherical_multiplicity: None,
        classical_multiplicity: None,
        blow_up,
        cap: None,
        exact: true,
    })
}

// ---------------------------------------------------------------------------
// Exceptional sets
// ---------------------------------------------------------------------------

/// Random points of the sphere `s`: `α + β·ς` for unit imaginary samples `ς`.
fn sphere_points(alg: &Algebra, s: &SphereId, count: usize, seed: u64) -> Result<Vec<Elem>> {
    let units = alg.sample_sphere(count, seed)?;
    Ok(units
        .into_iter()
        .map(|u| &alg.real(s.alpha) + &u.scale(s.beta))
        .collect())
}

fn pair_residual(alg: &Algebra, x: &Elem, u: &Elem, v: &Elem) -> f64 {
    alg.abs(&(&alg.mul(x, u) + v))
}

/// Residual scale for exceptional-membership decisions.
fn pair_scale(alg: &Algebra, s: &SphereId, u: &Elem, v: &Elem) -> f64 {
    MEMBER_TOL * (1.0 + alg.abs(u) * (s.alpha.abs() + s.beta + 1.0) + alg.abs(v))
}

/// Solve `x·u + v = 0` and intersect the solution set with the sphere `s`.
///
/// The affine part comes from a truncated SVD of the right-multiplication
/// matrix of `u` (null directions below `SVD_TRUNCATE·σ_max` span H). The
/// sphere intersection is enumerated exactly for algebras with finitely many
/// sphere points, taken directly for a zero-dimensional H, and otherwise
/// found by clustered multistart Gauss–Newton on the combined system, with
/// the solution-manifold dimension estimated from the Jacobian rank.
pub fn exceptional_set_from_pair(
    alg: &Algebra,
    s: &SphereId,
    u: &Elem,
    v: &Elem,
    seed: u64,
) -> Result<AffineSet> {
    let dim = alg.dim();
    let scale = alg.abs(u).max(alg.abs(v));
    if scale <= f64::MIN_POSITIVE {
        return Err(Error::Internal(
            "exceptional pair vanishes identically".into(),
        ));
    }
    if alg.abs(u) <= PAIR_VANISH * scale {
        // x·u degenerates while v does not: no solutions anywhere.
        return Ok(AffineSet::empty());
    }

    let ru = alg.rmul_matrix(u);
    let rhs = DVector::from_column_slice(v.coeffs()).scale(-1.0);
    let svd = ru.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let eps = tol::SVD_TRUNCATE * sigma_max;
    let x0_vec = svd
        .solve(&rhs, eps)
        .map_err(|e| Error::Internal(e.to_string()))?;
    let residual = (&ru * &x0_vec - &rhs).norm();
    if residual > MEMBER_TOL * (1.0 + alg.abs(v)) {
        return Ok(AffineSet::empty());
    }
    let x0 = alg
        .elem(x0_vec.iter().copied().collect())
        .expect("solution has the algebra dimension");

    let vt = svd.v_t.as_ref().expect("SVD computed right vectors");
    let mut directions: Vec<Elem> = Vec::new();
    for i in 0..svd.singular_values.len() {
        if svd.singular_values[i] <= eps {
            let row: Vec<f64> = vt.row(i).iter().copied().collect();
            directions.push(alg.elem(row).expect("direction has the algebra dimension"));
        }
    }

    let mut set = AffineSet {
        base: Some(alg.to_wire(&x0)),
        directions: directions.iter().map(|d| alg.to_wire(d)).collect(),
        intersection_dim: None,
        sphere_points: Vec::new(),
    };

    let member_tol = pair_scale(alg, s, u, v);
    match alg.name() {
        AlgebraName::C | AlgebraName::Bc => {
            // Finitely many sphere points: test each against the equation.
            let units: Vec<Elem> = if alg.name() == AlgebraName::C {
                vec![alg.basis(1), alg.basis(1).scale(-1.0)]
            } else {
                vec![
                    alg.basis(1),
                    alg.basis(1).scale(-1.0),
                    alg.basis(2),
                    alg.basis(2).scale(-1.0),
                ]
            };
            let mut pts = Vec::new();
            for unit in units {
                let p = &alg.real(s.alpha) + &unit.scale(s.beta);
                if pair_residual(alg, &p, u, v) <= member_tol {
                    pts.push(p);
                }
            }
            if !pts.is_empty() {
                set.intersection_dim = Some(0);
                set.sphere_points = sort_points(alg, pts).iter().map(|p| alg.to_wire(p)).collect();
            }
        }
        _ => {
            if directions.is_empty() {
                if on_sphere(alg, s, &x0) {
                    set.intersection_dim = Some(0);
                    set.sphere_points = vec![alg.to_wire(&x0)];
                }
            } else {
                let sys = SphereSystem::new(alg, s, &ru, v);
                let sols = multistart_solutions(alg, s, &sys, &x0, &directions, seed);
                if let Some(first) = sols.first() {
                    let manifold_dim = sys.manifold_dim(first);
                    if manifold_dim == 0 {
                        set.intersection_dim = Some(0);
                        set.sphere_points = sort_points(alg, cluster_points(alg, sols))
                            .iter()
                            .map(|p| alg.to_wire(p))
                            .collect();
                    } else {
                        set.intersection_dim = Some(manifold_dim as i64);
                    }
                }
            }
        }
    }
    let _ = dim;
    Ok(set)
}

/// Sphere membership test: trace and norm match the sphere's values.
fn on_sphere(alg: &Algebra, s: &SphereId, x: &Elem) -> bool {
    let scale = 1.0 + s.alpha.abs() + s.beta;
    let t_res = alg.abs(&(&alg.trace(x) - &alg.real(2.0 * s.alpha)));
    let n_res = alg.abs(&(&alg.norm(x) - &alg.real(s.alpha * s.alpha + s.beta * s.beta)));
    t_res <= MEMBER_TOL * scale && n_res <= MEMBER_TOL * scale * scale
}

/// The combined system `[x·u + v, t(x) − t(s), n(x) − n(s)] = 0` whose zero
/// set is the sphere intersection of the exceptional affine set.
struct SphereSystem<'a> {
    alg: &'a Algebra,
    ru: &'a DMatrix<f64>,
    v: DVector<f64>,
    trace_mat: DMatrix<f64>,
    t_target: DVector<f64>,
    n_target: DVector<f64>,
    scale: f64,
}

impl<'a> SphereSystem<'a> {
    fn new(alg: &'a Algebra, s: &SphereId, ru: &'a DMatrix<f64>, v: &Elem) -> SphereSystem<'a> {
        let d = alg.dim();
        let mut trace_mat = DMatrix::zeros(d, d);
        for jcol in 0..d {
            let col = alg.trace(&alg.basis(jcol));
            for i in 0..d {
                trace_mat[(i, jcol)] = col.coeffs()[i];
            }
        }
        let t_target = DVector::from_column_slice(alg.real(2.0 * s.alpha).coeffs());
        let n_target =
            DVector::from_column_slice(alg.real(s.alpha * s.alpha + s.beta * s.beta).coeffs());
        let scale = 1.0 + s.alpha.abs() + s.beta + alg.abs(v) + ru.norm();
        SphereSystem {
            alg,
            ru,
            v: DVector::from_column_slice(v.coeffs()),
            trace_mat,
            t_target,
            n_target,
            scale,
        }
    }

    fn residual(&self, x: &Elem) -> DVector<f64> {
        let d = self.alg.dim();
        let xv = DVector::from_column_slice(x.coeffs());
        let mut out = DVector::zeros(3 * d);
        let r1 = self.ru * &xv + &self.v;
        let r2 = &self.trace_mat * &xv - &self.t_target;
        let nx = self.alg.norm(x);
        for i in 0..d {
            out[i] = r1[i];
            out[d + i] = r2[i];
            out[2 * d + i] = nx.coeffs()[i] - self.n_target[i];
        }
        out
    }

    fn jacobian(&self, x: &Elem) -> DMatrix<f64> {
        let d = self.alg.dim();
        let xc = self.alg.conj(x);
        let mut jmat = DMatrix::zeros(3 * d, d);
        for jcol in 0..d {
            let e = self.alg.basis(jcol);
            let grad_n = &self.alg.mul(&e, &xc) + &self.alg.mul(x, &self.alg.conj(&e));
            for i in 0..d {
                jmat[(i, jcol)] = self.ru[(i, jcol)];
                jmat[(d + i, jcol)] = self.trace_mat[(i, jcol)];
                jmat[(2 * d + i, jcol)] = grad_n.coeffs()[i];
            }
        }
        jmat
    }

    /// Dimension of the solution manifold at a solution, from the Jacobian's
    /// numerical rank.
    fn manifold_dim(&self, x: &Elem) -> usize {
        let jmat = self.jacobian(x);
        let svd = jmat.svd(false, false);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        if smax <= 0.0 {
            return self.alg.dim();
        }
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&sv| sv > 1e-7 * smax)
            .count();
        self.alg.dim() - rank
    }

    /// Damped Gauss–Newton from `start`; `Some` when it lands on a solution.
    fn solve_from(&self, start: Elem) -> Option<Elem> {
        let mut x = start;
        for _ in 0..60 {
            let f = self.residual(&x);
            if f.norm() <= 1e-13 * self.scale {
                break;
            }
            let jmat = self.jacobian(&x);
            let svd = jmat.svd(true, true);
            let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
            if smax <= 0.0 {
                return None;
            }
            let delta = svd.solve(&(-&f), 1e-12 * smax).ok()?;
            if delta.norm() <= 1e-15 * (1.0 + self.scale) {
                break;
            }
            let step = self
                .alg
                .elem(delta.iter().copied().collect())
                .expect("step has the algebra dimension");
            x = &x + &step;
        }
        let f = self.residual(&x);
        (f.norm() <= 1e-9 * self.scale).then_some(x)
    }
}

fn multistart_solutions(
    alg: &Algebra,
    s: &SphereId,
    sys: &SphereSystem<'_>,
    x0: &Elem,
    directions: &[Elem],
    seed: u64,
) -> Vec<Elem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let spread = 1.0 + s.alpha.abs() + s.beta;
    let mut sols = Vec::new();
    for trial in 0..48 {
        let mut start = x0.clone();
        if trial > 0 {
            for dir in directions {
                let c: f64 = rng.random_range(-2.0 * spread..2.0 * spread);
                start = &start + &dir.scale(c);
            }
        }
        if let Some(sol) = sys.solve_from(start) {
            sols.push(sol);
        }
    }
    cluster_points(alg, sols)
}

/// Merge points closer than a clustering radius, keeping first
/// representatives.
fn cluster_points(alg: &Algebra, pts: Vec<Elem>) -> Vec<Elem> {
    let mut reps: Vec<Elem> = Vec::new();
    for p in pts {
        if !reps.iter().any(|r| alg.abs(&(&p - r)) <= 1e-6) {
            reps.push(p);
        }
    }
    reps
}

/// Deterministic ordering of a point list (lexicographic on components).
fn sort_points(alg: &Algebra, mut pts: Vec<Elem>) -> Vec<Elem> {
    let _ = alg;
    pts.sort_by(|a, b| {
        a.coeffs()
            .iter()
            .zip(b.coeffs())
            .find_map(|(x, y)| {
                let o = x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal);
                (o != std::cmp::Ordering::Equal).then_some(o)
            })
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    pts
}
