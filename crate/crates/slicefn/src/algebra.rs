//! Finite-dimensional real alternative *-algebras presented by structure
//! constants, together with the quadratic-cone geometry used everywhere else.
//!
//! Supported algebras (canonical basis order in parentheses):
//!
//! * `C`   — complex numbers (1, i)
//! * `H`   — quaternions (1, i, j, k)
//! * `O`   — octonions (1, i, j, k, l, li, lj, lk)
//! * `CL3` — the Clifford algebra Cl(0,3) (1, e1, e2, e3, e12, e13, e23, e123)
//! * `BC`  — bicomplex numbers C ⊕ C (1, e+, e-, e+e-)
//!
//! Each element carries t(x) = x + x^c and n(x) = x x^c.  The quadratic cone
//! Q_A is the set where both are real (then automatically t² ≤ 4n), and every
//! non-real cone point decomposes uniquely as x = α + βJ with β > 0 and J in
//! the sphere S_A = {t = 0, n = 1}.  All five algebras are nonsingular, so the
//! canonical bases above are orthonormal for the *-algebra magnitude ‖·‖_A.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tol;

/// Names of the supported algebras.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AlgebraName {
    C,
    H,
    O,
    Cl3,
    Bc,
}

impl fmt::Display for AlgebraName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AlgebraName::C => "C",
            AlgebraName::H => "H",
            AlgebraName::O => "O",
            AlgebraName::Cl3 => "CL3",
            AlgebraName::Bc => "BC",
        };
        f.write_str(s)
    }
}

impl FromStr for AlgebraName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "C" => Ok(AlgebraName::C),
            "H" => Ok(AlgebraName::H),
            "O" => Ok(AlgebraName::O),
            "CL3" | "CL03" | "R3" => Ok(AlgebraName::Cl3),
            "BC" => Ok(AlgebraName::Bc),
            other => Err(Error::UnsupportedAlgebra(other.to_string())),
        }
    }
}

/// An element of an algebra: coefficients over the canonical basis.
///
/// Elements are plain data; all products, conjugations and norms go through
/// the [`Algebra`] handle so the dimension is checked in one place.
#[derive(Debug, Clone, PartialEq)]
pub struct Elem {
    pub(crate) c: Vec<f64>,
}

impl Elem {
    /// Coefficients in canonical basis order.
    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// Euclidean inner product of coefficient vectors.
    pub fn dot(&self, other: &Elem) -> f64 {
        debug_assert_eq!(self.c.len(), other.c.len());
        self.c.iter().zip(&other.c).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, s: f64) -> Elem {
        Elem {
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    pub fn is_exactly_zero(&self) -> bool {
        self.c.iter().all(|v| *v == 0.0)
    }
}

impl std::ops::Add for &Elem {
    type Output = Elem;
    fn add(self, rhs: &Elem) -> Elem {
        debug_assert_eq!(self.c.len(), rhs.c.len());
        Elem {
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect(),
        }
    }
}

impl std::ops::Sub for &Elem {
    type Output = Elem;
    fn sub(self, rhs: &Elem) -> Elem {
        debug_assert_eq!(self.c.len(), rhs.c.len());
        Elem {
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect(),
        }
    }
}

impl std::ops::Neg for &Elem {
    type Output = Elem;
    fn neg(self) -> Elem {
        self.scale(-1.0)
    }
}

/// An element of the complexification A ⊗ C, written x + ı y with x, y in A.
///
/// The complex unit ı commutes with everything and is unrelated to any
/// imaginary unit of A itself.
#[derive(Debug, Clone, PartialEq)]
pub struct CElem {
    pub re: Elem,
    pub im: Elem,
}

impl CElem {
    pub fn from_real(re: Elem) -> CElem {
        let im = Elem {
            c: vec![0.0; re.c.len()],
        };
        CElem { re, im }
    }

    /// Action of the central complex scalar c = c₁ + ı c₂.
    pub fn scale_complex(&self, s: Complex64) -> CElem {
        CElem {
            re: &self.re.scale(s.re) - &self.im.scale(s.im),
            im: &self.im.scale(s.re) + &self.re.scale(s.im),
        }
    }

    pub fn add(&self, other: &CElem) -> CElem {
        CElem {
            re: &self.re + &other.re,
            im: &self.im + &other.im,
        }
    }

    pub fn sub(&self, other: &CElem) -> CElem {
        CElem {
            re: &self.re - &other.re,
            im: &self.im - &other.im,
        }
    }
}

/// How an element decomposes against the quadratic cone.
#[derive(Debug, Clone)]
pub struct ConeDecomposition {
    pub alpha: f64,
    pub beta: f64,
    /// Unit imaginary direction; the first imaginary basis element when β = 0.
    pub j: Elem,
    pub in_cone: bool,
}

impl ConeDecomposition {
    /// The slice coordinate α + iβ.
    pub fn z(&self) -> Complex64 {
        Complex64::new(self.alpha, self.beta)
    }

    pub fn is_real(&self) -> bool {
        self.beta == 0.0
    }
}

/// Splitting basis {1, J, J₁, JJ₁, …} of A seen as a complex vector space
/// under left multiplication by J, with the change-of-basis inverse cached.
pub struct SplittingBasis {
    pub j: Elem,
    pub vectors: Vec<Elem>,
    inv: DMatrix<f64>,
}

impl SplittingBasis {
    /// Components f_ℓ ∈ C_J of a value x = Σ_ℓ (Re f_ℓ + J Im f_ℓ) J_ℓ.
    pub fn components(&self, x: &Elem) -> Vec<Complex64> {
        let d = x.c.len();
        let v = nalgebra::DVector::from_column_slice(&x.c);
        let coords = &self.inv * v;
        (0..d / 2)
            .map(|l| Complex64::new(coords[2 * l], coords[2 * l + 1]))
            .collect()
    }
}

struct AlgebraSpec {
    name: AlgebraName,
    dim: usize,
    /// Monomial multiplication table: (i, j) → (k, sign) with e_i e_j = sign·e_k.
    table: Vec<(usize, f64)>,
    conj_signs: Vec<f64>,
    basis_labels: Vec<&'static str>,
}

/// Cheap-to-clone handle to an algebra description.
#[derive(Clone)]
pub struct Algebra(Arc<AlgebraSpec>);

impl fmt::Debug for Algebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Algebra({})", self.0.name)
    }
}

impl PartialEq for Algebra {
    fn eq(&self, other: &Self) -> bool {
        self.0.name == other.0.name
    }
}

// ---------------------------------------------------------------------------
// Construction of the five multiplication tables.
// ---------------------------------------------------------------------------

fn quaternion_table() -> Vec<(usize, f64)> {
    // Row-major (i, j) with ij = k, jk = i, ki = j.
    #[rustfmt::skip]
    let t: [(usize, f64); 16] = [
        (0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0),
        (1, 1.0), (0, -1.0), (3, 1.0), (2, -1.0),
        (2, 1.0), (3, -1.0), (0, -1.0), (1, 1.0),
        (3, 1.0), (2, 1.0), (1, -1.0), (0, -1.0),
    ];
    t.to_vec()
}

fn qmul(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

fn qconj(a: [f64; 4]) -> [f64; 4] {
    [a[0], -a[1], -a[2], -a[3]]
}

/// Octonions as Cayley–Dickson pairs (a, b)(c, d) = (ac − d̄b, da + bc̄),
/// with basis 1, i, j, k, l = (0,1), li, lj, lk.
fn octonion_table() -> Vec<(usize, f64)> {
    type Pair = ([f64; 4], [f64; 4]);
    fn pmul(x: Pair, y: Pair) -> Pair {
        let (a, b) = x;
        let (c, d) = y;
        let first: [f64; 4] = {
            let ac = qmul(a, c);
            let db = qmul(qconj(d), b);
            [ac[0] - db[0], ac[1] - db[1], ac[2] - db[2], ac[3] - db[3]]
        };
        let second: [f64; 4] = {
            let da = qmul(d, a);
            let bc = qmul(b, qconj(c));
            [da[0] + bc[0], da[1] + bc[1], da[2] + bc[2], da[3] + bc[3]]
        };
        (first, second)
    }

    let q = |i: usize| -> [f64; 4] {
        let mut v = [0.0; 4];
        v[i] = 1.0;
        v
    };
    let zero = [0.0; 4];
    let l: Pair = (zero, q(0));
    let mut basis: Vec<Pair> = vec![
        (q(0), zero),
        (q(1), zero),
        (q(2), zero),
        (q(3), zero),
        l,
    ];
    for i in 1..4 {
        basis.push(pmul(l, (q(i), zero)));
    }

    let locate = |p: Pair, basis: &[Pair]| -> (usize, f64) {
        for (k, b) in basis.iter().enumerate() {
            let mut plus = true;
            let mut minus = true;
            for t in 0..4 {
                if (p.0[t] - b.0[t]).abs() > 1e-12 || (p.1[t] - b.1[t]).abs() > 1e-12 {
                    plus = false;
                }
                if (p.0[t] + b.0[t]).abs() > 1e-12 || (p.1[t] + b.1[t]).abs() > 1e-12 {
                    minus = false;
                }
            }
            if plus {
                return (k, 1.0);
            }
            if minus {
                return (k, -1.0);
            }
        }
        unreachable!("octonion basis products must be monomial");
    };

    let mut table = Vec::with_capacity(64);
    for i in 0..8 {
        for j in 0..8 {
            table.push(locate(pmul(basis[i], basis[j]), &basis));
        }
    }
    table
}

/// Cl(0,3) with blades as bit masks and e_i² = −1.
fn clifford_table() -> Vec<(usize, f64)> {
    // Canonical order 1, e1, e2, e3, e12, e13, e23, e123 ↔ masks.
    const MASK_OF_IDX: [u8; 8] = [0b000, 0b001, 0b010, 0b100, 0b011, 0b101, 0b110, 0b111];
    const IDX_OF_MASK: [usize; 8] = [0, 1, 2, 4, 3, 5, 6, 7];

    fn blade_mul(a: u8, b: u8) -> (u8, f64) {
        let mut swaps = 0u32;
        let mut t = a >> 1;
        while t != 0 {
            swaps += (t & b).count_ones();
            t >>= 1;
        }
        let mut sign = if swaps % 2 == 0 { 1.0 } else { -1.0 };
        if (a & b).count_ones() % 2 == 1 {
            sign = -sign; // each shared index contributes e_i² = −1
        }
        (a ^ b, sign)
    }

    let mut table = Vec::with_capacity(64);
    for i in 0..8 {
        for j in 0..8 {
            let (mask, sign) = blade_mul(MASK_OF_IDX[i], MASK_OF_IDX[j]);
            table.push((IDX_OF_MASK[mask as usize], sign));
        }
    }
    table
}

/// Bicomplex numbers over the orthonormal basis 1, e+ = (i,i), e- = (i,−i),
/// e+e- = (−1,1); the product is commutative.
fn bicomplex_table() -> Vec<(usize, f64)> {
    #[rustfmt::skip]
    let t: [(usize, f64); 16] = [
        (0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0),
        (1, 1.0), (0, -1.0), (3, 1.0), (2, -1.0),
        (2, 1.0), (3, 1.0), (0, -1.0), (1, -1.0),
        (3, 1.0), (2, -1.0), (1, -1.0), (0, 1.0),
    ];
    t.to_vec()
}

impl Algebra {
    pub fn new(name: AlgebraName) -> Algebra {
        let spec = match name {
            AlgebraName::C => AlgebraSpec {
                name,
                dim: 2,
                table: vec![(0, 1.0), (1, 1.0), (1, 1.0), (0, -1.0)],
                conj_signs: vec![1.0, -1.0],
                basis_labels: vec!["1", "i"],
            },
            AlgebraName::H => AlgebraSpec {
                name,
                dim: 4,
                table: quaternion_table(),
                conj_signs: vec![1.0, -1.0, -1.0, -1.0],
                basis_labels: vec!["1", "i", "j", "k"],
            },
            AlgebraName::O => AlgebraSpec {
                name,
                dim: 8,
                table: octonion_table(),
                conj_signs: vec![1.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0],
                basis_labels: vec!["1", "i", "j", "k", "l", "li", "lj", "lk"],
            },
            AlgebraName::Cl3 => AlgebraSpec {
                name,
                dim: 8,
                table: clifford_table(),
                // +1 on grades 0 and 3, −1 on grades 1 and 2.
                conj_signs: vec![1.0, -1.0, -1.0, -1.0, -1.0, -1.0, -1.0, 1.0],
                basis_labels: vec!["1", "e1", "e2", "e3", "e12", "e13", "e23", "e123"],
            },
            AlgebraName::Bc => AlgebraSpec {
                name,
                dim: 4,
                table: bicomplex_table(),
                conj_signs: vec![1.0, -1.0, -1.0, 1.0],
                basis_labels: vec!["1", "e+", "e-", "e+e-"],
            },
        };
        Algebra(Arc::new(spec))
    }

    pub fn parse(name: &str) -> Result<Algebra> {
        Ok(Algebra::new(name.parse()?))
    }

    pub fn name(&self) -> AlgebraName {
        self.0.name
    }

    pub fn dim(&self) -> usize {
        self.0.dim
    }

    pub fn basis_labels(&self) -> &[&'static str] {
        &self.0.basis_labels
    }

    /// Structure constant c_{ijk} with e_i e_j = Σ_k c_{ijk} e_k.
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        let (kk, s) = self.0.table[i * self.0.dim + j];
        if kk == k {
            s
        } else {
            0.0
        }
    }

    // -- element constructors ------------------------------------------------

    pub fn elem(&self, coeffs: Vec<f64>) -> Result<Elem> {
        if coeffs.len() != self.0.dim {
            return Err(Error::DimensionMismatch {
                expected: self.0.dim,
                got: coeffs.len(),
            });
        }
        Ok(Elem { c: coeffs })
    }

    pub fn zero(&self) -> Elem {
        Elem {
            c: vec![0.0; self.0.dim],
        }
    }

    pub fn one(&self) -> Elem {
        self.basis(0)
    }

    pub fn real(&self, r: f64) -> Elem {
        let mut e = self.zero();
        e.c[0] = r;
        e
    }

    pub fn basis(&self, i: usize) -> Elem {
        assert!(i < self.0.dim, "basis index out of range");
        let mut e = self.zero();
        e.c[i] = 1.0;
        e
    }

    /// Slice of record: the first imaginary basis element.
    pub fn imag_unit(&self) -> Elem {
        self.basis(1)
    }

    /// α + βJ for a slice coordinate z = α + iβ.
    pub fn from_slice_point(&self, j: &Elem, z: Complex64) -> Elem {
        let mut e = j.scale(z.im);
        e.c[0] += z.re;
        e
    }

    // -- ring operations -----------------------------------------------------

    /// Product in the algebra.  C and H take a closed-form fast path that
    /// reproduces the table path bit for bit.
    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        debug_assert_eq!(a.c.len(), self.0.dim);
        debug_assert_eq!(b.c.len(), self.0.dim);
        match self.0.name {
            AlgebraName::C => {
                let (a, b) = (&a.c, &b.c);
                Elem {
                    c: vec![a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]],
                }
            }
            AlgebraName::H => {
                let (a, b) = (&a.c, &b.c);
                Elem {
                    c: vec![
                        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
                        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
                        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
                        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
                    ],
                }
            }
            _ => self.mul_table(a, b),
        }
    }

    /// Product through the structure-constant table (all algebras).
    pub fn mul_table(&self, a: &Elem, b: &Elem) -> Elem {
        let d = self.0.dim;
        let mut out = vec![0.0; d];
        for i in 0..d {
            let ai = a.c[i];
            for j in 0..d {
                let (k, s) = self.0.table[i * d + j];
                out[k] += s * ai * b.c[j];
            }
        }
        Elem { c: out }
    }

    /// *-involution x ↦ x^c.
    pub fn conj(&self, a: &Elem) -> Elem {
        Elem {
            c: a.c.iter().zip(&self.0.conj_signs).map(|(v, s)| v * s).collect(),
        }
    }

    /// t(x) = x + x^c.
    pub fn trace(&self, a: &Elem) -> Elem {
        &a.clone() + &self.conj(a)
    }

    /// n(x) = x x^c.
    pub fn norm(&self, a: &Elem) -> Elem {
        self.mul(a, &self.conj(a))
    }

    /// ‖x‖_A; the canonical bases are orthonormal for it in all five algebras.
    pub fn abs(&self, a: &Elem) -> f64 {
        a.dot(a).sqrt()
    }

    /// True when all imaginary components are below `REALNESS · (1 + ‖x‖_A)`.
    pub fn is_real(&self, a: &Elem) -> bool {
        let thr = tol::REALNESS * (1.0 + self.abs(a));
        a.c[1..].iter().all(|v| v.abs() <= thr)
    }

    /// The real scalar of a provably real element.
    pub fn real_part(&self, a: &Elem) -> f64 {
        a.c[0]
    }

    pub fn powi(&self, a: &Elem, n: u32) -> Elem {
        let mut acc = self.one();
        for _ in 0..n {
            acc = self.mul(&acc, a);
        }
        acc
    }

    /// Two-sided inverse when it exists: n(x)⁻¹ x^c when n(x) is real, and a
    /// linear solve against left multiplication otherwise (associative case).
    pub fn try_inverse(&self, a: &Elem) -> Option<Elem> {
        let n = self.norm(a);
        if self.is_real(&n) {
            let n0 = n.c[0];
            if n0.abs() <= tol::REALNESS * (1.0 + a.dot(a)) {
                return None;
            }
            return Some(self.conj(a).scale(1.0 / n0));
        }
        // Off-cone elements of the associative algebras can still be units.
        if matches!(self.0.name, AlgebraName::O) {
            return None;
        }
        let m = self.lmul_matrix(a);
        let rhs = nalgebra::DVector::from_column_slice(&self.one().c);
        let w = m.lu().solve(&rhs)?;
        let w = Elem {
            c: w.iter().copied().collect(),
        };
        let check = self.mul(a, &w);
        let check2 = self.mul(&w, a);
        let one = self.one();
        if self.abs(&(&check - &one)) < 1e-9 && self.abs(&(&check2 - &one)) < 1e-9 {
            Some(w)
        } else {
            None
        }
    }

    /// Matrix of x ↦ a·x over the canonical basis.
    pub fn lmul_matrix(&self, a: &Elem) -> DMatrix<f64> {
        let d = self.0.dim;
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            for i in 0..d {
                let (k, s) = self.0.table[i * d + j];
                m[(k, j)] += s * a.c[i];
            }
        }
        m
    }

    /// Matrix of x ↦ x·a over the canonical basis.
    pub fn rmul_matrix(&self, a: &Elem) -> DMatrix<f64> {
        let d = self.0.dim;
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                let (k, s) = self.0.table[i * d + j];
                m[(k, i)] += s * a.c[j];
            }
        }
        m
    }

    // -- complexification ----------------------------------------------------

    pub fn czero(&self) -> CElem {
        CElem::from_real(self.zero())
    }

    /// Product in A ⊗ C: (x + ıy)(x' + ıy') = xx' − yy' + ı(xy' + yx').
    pub fn cmul(&self, a: &CElem, b: &CElem) -> CElem {
        CElem {
            re: &self.mul(&a.re, &b.re) - &self.mul(&a.im, &b.im),
            im: &self.mul(&a.re, &b.im) + &self.mul(&a.im, &b.re),
        }
    }

    /// *-involution of A ⊗ C: (x + ıy)^c = x^c + ı y^c.
    pub fn cconj(&self, a: &CElem) -> CElem {
        CElem {
            re: self.conj(&a.re),
            im: self.conj(&a.im),
        }
    }

    /// True when a complexified value lies in R ⊕ ıR.
    pub fn c_is_real_pair(&self, a: &CElem, scale: f64) -> bool {
        let thr = tol::REALNESS * (1.0 + scale);
        a.re.c[1..].iter().chain(a.im.c[1..].iter()).all(|v| v.abs() <= thr)
    }

    /// Left action of the slice scalar c = Re c + (Im c)·J on a value.
    pub fn cj_apply(&self, j: &Elem, c: Complex64, v: &Elem) -> Elem {
        &v.scale(c.re) + &self.mul(j, v).scale(c.im)
    }

    // -- cone geometry ---------------------------------------------------------

    /// Decompose x = α + βJ against the quadratic cone.
    pub fn cone_decompose(&self, a: &Elem) -> ConeDecomposition {
        let t = self.trace(a);
        let n = self.norm(a);
        let in_cone = self.is_real(&t) && self.is_real(&n);
        let alpha = t.c[0] / 2.0;
        let mut im = a.clone();
        im.c[0] -= alpha;
        let beta = self.abs(&im);
        if beta <= tol::REALNESS * (1.0 + self.abs(a)) {
            return ConeDecomposition {
                alpha,
                beta: 0.0,
                j: self.imag_unit(),
                in_cone,
            };
        }
        ConeDecomposition {
            alpha,
            beta,
            j: im.scale(1.0 / beta),
            in_cone,
        }
    }

    pub fn in_cone(&self, a: &Elem) -> bool {
        self.cone_decompose(a).in_cone
    }

    /// Membership in S_A = {t(x) = 0, n(x) = 1}.
    pub fn in_sphere(&self, a: &Elem) -> bool {
        let t = self.trace(a);
        let mut n = self.norm(a);
        n.c[0] -= 1.0;
        let thr = tol::SPHERE_MEMBER * (1.0 + self.abs(a));
        self.abs(&t) <= thr && self.abs(&n) <= thr
    }

    // -- splitting bases -------------------------------------------------------

    /// Complete {1, J} to a splitting basis {1, J, J₁, JJ₁, …}.
    pub fn splitting_basis(&self, j: &Elem) -> Result<SplittingBasis> {
        let d = self.0.dim;
        let mut vectors = vec![self.one(), j.clone()];
        let mut ortho: Vec<Elem> = Vec::new();
        let push_ortho = |v: &Elem, ortho: &mut Vec<Elem>| -> bool {
            let mut r = v.clone();
            for q in ortho.iter() {
                let p = r.dot(q);
                r = &r - &q.scale(p);
            }
            let nrm = r.dot(&r).sqrt();
            if nrm > 1e-8 {
                ortho.push(r.scale(1.0 / nrm));
                true
            } else {
                false
            }
        };
        for v in &vectors {
            push_ortho(v, &mut ortho);
        }
        let mut cand = 1;
        while vectors.len() < d && cand < d {
            let v = self.basis(cand);
            cand += 1;
            if push_ortho(&v, &mut ortho) {
                let jv = self.mul(j, &v);
                if !push_ortho(&jv, &mut ortho) {
                    return Err(Error::CompletionFailed);
                }
                vectors.push(v);
                vectors.push(jv);
            }
        }
        if vectors.len() != d {
            return Err(Error::CompletionFailed);
        }
        let mut m = DMatrix::zeros(d, d);
        for (col, v) in vectors.iter().enumerate() {
            for row in 0..d {
                m[(row, col)] = v.c[row];
            }
        }
        let inv = m.try_inverse().ok_or(Error::CompletionFailed)?;
        Ok(SplittingBasis {
            j: j.clone(),
            vectors,
            inv,
        })
    }

    // -- sampling ----------------------------------------------------------------

    /// Draw elements of S_A.  CL3 output starts with the deterministic pair
    /// e1, e23; BC cycles its four-point sphere; C alternates ±i.
    pub fn sample_sphere(&self, count: usize, seed: u64) -> Result<Vec<Elem>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5f5e_1e0d);
        let mut out = Vec::with_capacity(count);
        match self.0.name {
            AlgebraName::C => {
                for idx in 0..count {
                    let mut e = self.basis(1);
                    if idx % 2 == 1 {
                        e = e.scale(-1.0);
                    }
                    out.push(e);
                }
            }
            AlgebraName::Bc => {
                for idx in 0..count {
                    let e = match idx % 4 {
                        0 => self.basis(1),
                        1 => self.basis(2),
                        2 => self.basis(1).scale(-1.0),
                        _ => self.basis(2).scale(-1.0),
                    };
                    out.push(e);
                }
            }
            AlgebraName::H | AlgebraName::O => {
                for _ in 0..count {
                    out.push(self.random_unit_imaginary(&mut rng));
                }
            }
            AlgebraName::Cl3 => {
                if count >= 1 {
                    out.push(self.basis(1));
                }
                if count >= 2 {
                    out.push(self.basis(6));
                }
                while out.len() < count {
                    out.push(self.project_cl3_sphere(&mut rng)?);
                }
            }
        }
        Ok(out)
    }

    fn random_unit_imaginary(&self, rng: &mut ChaCha8Rng) -> Elem {
        let d = self.0.dim;
        loop {
            let mut e = self.zero();
            for i in 1..d {
                e.c[i] = gaussian(rng);
            }
            let n = self.abs(&e);
            if n > 1e-6 {
                return e.scale(1.0 / n);
            }
        }
    }

    /// Newton projection of a random grade-(1,2) element of Cl(0,3) onto
    /// {‖x‖² = 1, (x²)_{e123} = 0}, which is exactly S_A there.
    fn project_cl3_sphere(&self, rng: &mut ChaCha8Rng) -> Result<Elem> {
        'outer: for _ in 0..64 {
            // components 1..=6 are e1, e2, e3, e12, e13, e23
            let mut x = [0.0f64; 6];
            for v in x.iter_mut() {
                *v = gaussian(rng);
            }
            let norm: f64 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm < 1e-6 {
                continue;
            }
            for v in x.iter_mut() {
                *v /= norm;
            }
            for _ in 0..60 {
                let g1: f64 = x.iter().map(|v| v * v).sum::<f64>() - 1.0;
                let g2 = 2.0 * (x[0] * x[5] - x[1] * x[4] + x[2] * x[3]);
                if g1.abs() < 1e-13 && g2.abs() < 1e-13 {
                    let mut e = self.zero();
                    e.c[1..7].copy_from_slice(&x);
                    return Ok(e);
                }
                // Gauss-Newton step with the 2×6 Jacobian.
                let j1: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
                let j2 = [
                    2.0 * x[5],
                    -2.0 * x[4],
                    2.0 * x[3],
                    2.0 * x[2],
                    -2.0 * x[1],
                    2.0 * x[0],
                ];
                let a11: f64 = j1.iter().map(|v| v * v).sum();
                let a12: f64 = j1.iter().zip(&j2).map(|(a, b)| a * b).sum();
                let a22: f64 = j2.iter().map(|v| v * v).sum();
                let det = a11 * a22 - a12 * a12;
                if det.abs() < 1e-12 {
                    continue 'outer;
                }
                let l1 = (-g1 * a22 + g2 * a12) / det;
                let l2 = (g1 * a12 - g2 * a11) / det;
                for (i, v) in x.iter_mut().enumerate() {
                    *v += l1 * j1[i] + l2 * j2[i];
                }
            }
        }
        Err(Error::ProjectionFailed)
    }

    /// A random point of the quadratic cone with α, β in the given ranges.
    pub fn sample_cone(
        &self,
        count: usize,
        seed: u64,
        alpha_range: (f64, f64),
        beta_range: (f64, f64),
    ) -> Result<Vec<Elem>> {
        let sphere = self.sample_sphere(count, seed ^ 0x00c0_ffee)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xace0_fba5);
        Ok(sphere
            .into_iter()
            .map(|j| {
                let alpha = rng.random_range(alpha_range.0..alpha_range.1);
                let beta = rng.random_range(beta_range.0..beta_range.1);
                self.from_slice_point(&j, Complex64::new(alpha, beta))
            })
            .collect())
    }

    /// Sampled bounds: a lower bound for the submultiplicativity constant
    /// C_A = sup ‖xy‖/(‖x‖‖y‖) and an upper bound for the cone-product
    /// constant c_A = inf ‖(xy)z‖ over unit x, z in Q_A and unit y.
    pub fn estimate_constants(&self, samples: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xc0de_cafe);
        let sphere = self
            .sample_sphere(samples, seed ^ 0xbead_5eed)
            .expect("sphere sampling");
        let unit_cone = |rng: &mut ChaCha8Rng, j: &Elem| -> Elem {
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            self.from_slice_point(j, Complex64::new(theta.cos(), theta.sin().abs()))
        };
        let mut c_upper = f64::INFINITY;
        let mut c_lower = 0.0f64;
        for j in sphere.iter().take(samples) {
            let x = unit_cone(&mut rng, j);
            let pick = rng.random_range(0..sphere.len());
            let z = unit_cone(&mut rng, &sphere[pick]);
            let y = self.random_unit(&mut rng);
            let xy = self.mul(&x, &y);
            c_lower = c_lower.max(self.abs(&xy));
            let xyz = self.mul(&xy, &z);
            c_upper = c_upper.min(self.abs(&xyz));
            let u = self.random_unit(&mut rng);
            let v = self.random_unit(&mut rng);
            c_lower = c_lower.max(self.abs(&self.mul(&u, &v)));
        }
        (c_lower, c_upper)
    }

    fn random_unit(&self, rng: &mut ChaCha8Rng) -> Elem {
        loop {
            let mut e = self.zero();
            for v in e.c.iter_mut() {
                *v = gaussian(rng);
            }
            let n = self.abs(&e);
            if n > 1e-6 {
                return e.scale(1.0 / n);
            }
        }
    }

    // -- wire encoding -------------------------------------------------------

    /// External coefficient encoding.  Identity except for BC, which travels
    /// as (Re z₁, Im z₁, Re z₂, Im z₂) over the idempotent components.
    pub fn to_wire(&self, a: &Elem) -> Vec<f64> {
        match self.0.name {
            AlgebraName::Bc => {
                let (p, q, r, s) = (a.c[0], a.c[1], a.c[2], a.c[3]);
                vec![p - s, q + r, p + s, q - r]
            }
            _ => a.c.clone(),
        }
    }

    pub fn from_wire(&self, w: &[f64]) -> Result<Elem> {
        if w.len() != self.0.dim {
            return Err(Error::DimensionMismatch {
                expected: self.0.dim,
                got: w.len(),
            });
        }
        match self.0.name {
            AlgebraName::Bc => Ok(Elem {
                c: vec![
                    (w[0] + w[2]) / 2.0,
                    (w[1] + w[3]) / 2.0,
                    (w[1] - w[3]) / 2.0,
                    (w[2] - w[0]) / 2.0,
                ],
            }),
            _ => Ok(Elem { c: w.to_vec() }),
        }
    }
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; one value per call keeps sampling order deterministic.
    let u1: f64 = rng.random_range(f64::EPSILON..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn alg(name: AlgebraName) -> Algebra {
        Algebra::new(name)
    }

    #[test]
    fn quaternion_units() {
        let h = alg(AlgebraName::H);
        let (i, j, k) = (h.basis(1), h.basis(2), h.basis(3));
        assert_eq!(h.mul(&i, &j), k);
        assert_eq!(h.mul(&j, &i), k.scale(-1.0));
        assert_eq!(h.mul(&j, &k), i);
        assert_eq!(h.mul(&k, &i), j);
        assert_eq!(h.mul(&i, &i), h.real(-1.0));
        // (1 + 2j)² = -3 + 4j
        let x = h.elem(vec![1.0, 0.0, 2.0, 0.0]).unwrap();
        assert_eq!(h.mul(&x, &x), h.elem(vec![-3.0, 0.0, 4.0, 0.0]).unwrap());
    }

    #[test]
    fn fast_paths_match_table_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for name in [AlgebraName::C, AlgebraName::H] {
            let a = alg(name);
            for _ in 0..200 {
                let x = a.random_unit(&mut rng).scale(rng.random_range(0.1..3.0));
                let y = a.random_unit(&mut rng).scale(rng.random_range(0.1..3.0));
                let fast = a.mul(&x, &y);
                let slow = a.mul_table(&x, &y);
                for (u, v) in fast.c.iter().zip(&slow.c) {
                    assert_eq!(u.to_bits(), v.to_bits());
                }
            }
        }
    }

    #[test]
    fn octonion_nonassociative_sign() {
        let o = alg(AlgebraName::O);
        let (i, j, l) = (o.basis(1), o.basis(2), o.basis(4));
        let left = o.mul(&o.mul(&i, &j), &l);
        let right = o.mul(&i, &o.mul(&j, &l));
        assert!(o.abs(&left) > 0.9);
        assert_eq!(left, right.scale(-1.0));
        // composition: ‖xy‖ = ‖x‖·‖y‖
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x = o.random_unit(&mut rng).scale(rng.random_range(0.1..2.0));
            let y = o.random_unit(&mut rng).scale(rng.random_range(0.1..2.0));
            let p = o.mul(&x, &y);
            assert!((o.abs(&p) - o.abs(&x) * o.abs(&y)).abs() < 1e-12);
        }
    }

    #[test]
    fn alternativity_and_artin() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for name in [
            AlgebraName::C,
            AlgebraName::H,
            AlgebraName::O,
            AlgebraName::Cl3,
            AlgebraName::Bc,
        ] {
            let a = alg(name);
            for _ in 0..200 {
                let x = a.random_unit(&mut rng);
                let y = a.random_unit(&mut rng);
                let xxy = a.mul(&a.mul(&x, &x), &y);
                let x_xy = a.mul(&x, &a.mul(&x, &y));
                assert!(a.abs(&(&xxy - &x_xy)) < 1e-12);
                let xyy = a.mul(&a.mul(&x, &y), &y);
                let x_yy = a.mul(&x, &a.mul(&y, &y));
                assert!(a.abs(&(&xyy - &x_yy)) < 1e-12);
                // Artin: (xy)x = x(yx)
                let xy_x = a.mul(&a.mul(&x, &y), &x);
                let x_yx = a.mul(&x, &a.mul(&y, &x));
                assert!(a.abs(&(&xy_x - &x_yx)) < 1e-12);
            }
        }
    }

    #[test]
    fn conj_is_antiautomorphism() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for name in [
            AlgebraName::C,
            AlgebraName::H,
            AlgebraName::O,
            AlgebraName::Cl3,
            AlgebraName::Bc,
        ] {
            let a = alg(name);
            for _ in 0..100 {
                let x = a.random_unit(&mut rng);
                let y = a.random_unit(&mut rng);
                let lhs = a.conj(&a.mul(&x, &y));
                let rhs = a.mul(&a.conj(&y), &a.conj(&x));
                assert!(a.abs(&(&lhs - &rhs)) < 1e-12);
                let double = a.conj(&a.conj(&x));
                assert!(a.abs(&(&double - &x)) < 1e-15);
            }
        }
    }

    #[test]
    fn clifford_table_facts() {
        let a = alg(AlgebraName::Cl3);
        let e1 = a.basis(1);
        let e23 = a.basis(6);
        let e123 = a.basis(7);
        assert_eq!(a.mul(&e23, &e1), e123);
        assert_eq!(a.mul(&e1, &e23), e123);
        assert_eq!(a.conj(&a.basis(4)), a.basis(4).scale(-1.0));
        assert_eq!(a.conj(&e123), e123);
        assert_eq!(a.mul(&e123, &e123), a.one());
        // q ± q e123 are zero divisors
        let one = a.one();
        let zd1 = &one + &e123;
        let zd2 = &one - &e123;
        assert!(a.abs(&a.mul(&zd1, &zd2)) < 1e-15);
        // n(x) has only scalar and e123 components
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let x = a.random_unit(&mut rng);
            let n = a.norm(&x);
            for idx in 1..7 {
                assert!(n.c[idx].abs() < 1e-12);
            }
            assert!((n.c[0] - x.dot(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn bicomplex_table_facts() {
        let a = alg(AlgebraName::Bc);
        let ep = a.basis(1);
        let em = a.basis(2);
        let k = a.basis(3);
        assert_eq!(a.mul(&ep, &em), k);
        assert_eq!(a.mul(&ep, &ep), a.real(-1.0));
        assert_eq!(a.mul(&em, &em), a.real(-1.0));
        assert_eq!(a.mul(&k, &k), a.one());
        // e+ · e- = (i,i)(i,-i) = (-1, 1): wire encoding of k is [1,0,-1,0]·(-1)…
        assert_eq!(a.to_wire(&k), vec![-1.0, 0.0, 1.0, 0.0]);
        assert_eq!(a.to_wire(&ep), vec![0.0, 1.0, 0.0, 1.0]);
        assert_eq!(a.to_wire(&a.one()), vec![1.0, 0.0, 1.0, 0.0]);
        // commutative
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let x = a.random_unit(&mut rng);
            let y = a.random_unit(&mut rng);
            assert!(a.abs(&(&a.mul(&x, &y) - &a.mul(&y, &x))) < 1e-15);
        }
    }

    #[test]
    fn wire_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for name in [AlgebraName::C, AlgebraName::H, AlgebraName::O, AlgebraName::Cl3, AlgebraName::Bc] {
            let a = alg(name);
            for _ in 0..50 {
                let x = a.random_unit(&mut rng).scale(3.0);
                let w = a.to_wire(&x);
                let back = a.from_wire(&w).unwrap();
                assert!(a.abs(&(&back - &x)) < 1e-12);
            }
        }
    }

    #[test]
    fn cone_decomposition_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for name in [
            AlgebraName::C,
            AlgebraName::H,
            AlgebraName::O,
            AlgebraName::Cl3,
            AlgebraName::Bc,
        ] {
            let a = alg(name);
            let pts = a.sample_cone(100, 3, (-2.0, 2.0), (0.1, 2.0)).unwrap();
            for x in pts {
                let d = a.cone_decompose(&x);
                assert!(d.in_cone);
                assert!(a.in_sphere(&d.j), "J must lie on S_A");
                let back = a.from_slice_point(&d.j, d.z());
                assert!(a.abs(&(&back - &x)) <= tol::CONE_RECONSTRUCT * (1.0 + a.abs(&x)));
            }
            // a generic element of CL3 / BC is not in the cone
            if matches!(name, AlgebraName::Cl3 | AlgebraName::Bc) {
                let mut off = a.zero();
                for v in off.c.iter_mut() {
                    *v = rng.random_range(0.5..1.0);
                }
                assert!(!a.in_cone(&off));
            }
        }
    }

    #[test]
    fn sphere_samples_lie_on_sphere() {
        for name in [
            AlgebraName::C,
            AlgebraName::H,
            AlgebraName::O,
            AlgebraName::Cl3,
            AlgebraName::Bc,
        ] {
            let a = alg(name);
            let pts = a.sample_sphere(40, 123).unwrap();
            assert_eq!(pts.len(), 40);
            for p in &pts {
                assert!(a.in_sphere(p));
                let sq = a.mul(p, p);
                assert!(a.abs(&(&sq + &a.one())) < 1e-9, "J² = -1");
            }
        }
        // CL3 deterministic heads; BC exact four-point sphere
        let cl3 = alg(AlgebraName::Cl3);
        let pts = cl3.sample_sphere(2, 0).unwrap();
        assert_eq!(pts[0], cl3.basis(1));
        assert_eq!(pts[1], cl3.basis(6));
        let bc = alg(AlgebraName::Bc);
        for p in bc.sample_sphere(8, 0).unwrap() {
            let e = [bc.basis(1), bc.basis(2), bc.basis(1).scale(-1.0), bc.basis(2).scale(-1.0)];
            assert!(e.iter().any(|q| bc.abs(&(&p - q)) < 1e-15));
        }
    }

    #[test]
    fn splitting_basis_spans() {
        for name in [
            AlgebraName::C,
            AlgebraName::H,
            AlgebraName::O,
            AlgebraName::Cl3,
            AlgebraName::Bc,
        ] {
            let a = alg(name);
            for j in a.sample_sphere(5, 99).unwrap() {
                let sb = a.splitting_basis(&j).unwrap();
                assert_eq!(sb.vectors.len(), a.dim());
                // components reconstruct the element
                let mut rng = ChaCha8Rng::seed_from_u64(1);
                let x = a.random_unit(&mut rng);
                let comps = sb.components(&x);
                let mut rec = a.zero();
                for (l, f) in comps.iter().enumerate() {
                    let jl = &sb.vectors[2 * l];
                    rec = &rec + &a.cj_apply(&j, *f, jl);
                }
                assert!(a.abs(&(&rec - &x)) < 1e-9);
            }
        }
    }

    #[test]
    fn division_constants() {
        let h = alg(AlgebraName::H);
        let (c_low, c_up) = h.estimate_constants(500, 42);
        assert!((c_low - 1.0).abs() < 1e-9, "H is a composition algebra");
        assert!((c_up - 1.0).abs() < 1e-9);
        let cl3 = alg(AlgebraName::Cl3);
        let (c_low, c_up) = cl3.estimate_constants(500, 42);
        assert!(c_low >= 1.0 - 1e-12, "products can expand norms in CL3");
        assert!(c_up <= c_low + 1e-12);
    }

    #[test]
    fn inverse_paths() {
        for name in [
            AlgebraName::C,
            AlgebraName::H,
            AlgebraName::O,
            AlgebraName::Cl3,
            AlgebraName::Bc,
        ] {
            let a = alg(name);
            for x in a.sample_cone(30, 8, (-2.0, 2.0), (0.2, 1.5)).unwrap() {
                let inv = a.try_inverse(&x).expect("cone points are invertible");
                assert!(a.abs(&(&a.mul(&x, &inv) - &a.one())) < 1e-10);
                assert!(a.abs(&(&a.mul(&inv, &x) - &a.one())) < 1e-10);
            }
        }
        // zero divisors are rejected
        let cl3 = alg(AlgebraName::Cl3);
        let zd = &cl3.one() + &cl3.basis(7);
        assert!(cl3.try_inverse(&zd).is_none());
        let bc = alg(AlgebraName::Bc);
        // (1,0) has internal coordinates (1/2, 0, 0, -1/2)
        let zd = bc.from_wire(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(bc.try_inverse(&zd).is_none());
    }
}
