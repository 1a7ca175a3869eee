//! Helpers shared by the integration test targets.
#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use slicefn::{delta_poly, Algebra, AlgebraName, Elem, Expr, RationalExpr, RealPoly, StarPoly};

/// Random element of a subalgebra on which conjugation restricts to a
/// norm-composing involution, so products of the form a·b̄ + b·ā are real and
/// tameness of random polynomials is automatic. For H and O that is the whole
/// algebra; for CL3 the even subalgebra span{1, e₁₂, e₁₃, e₂₃}; for BC one
/// slice plane.
fn tame_coefficient(alg: &Algebra, rng: &mut ChaCha8Rng) -> Elem {
    let active: &[usize] = match alg.name() {
        AlgebraName::C => &[0, 1],
        AlgebraName::H => &[0, 1, 2, 3],
        AlgebraName::O => &[0, 1, 2, 3, 4, 5, 6, 7],
        AlgebraName::Cl3 => &[0, 4, 5, 6],
        AlgebraName::Bc => &[0, 1],
    };
    let mut v = vec![0.0; alg.dim()];
    for &i in active {
        v[i] = rng.random_range(-1.0..1.0);
    }
    alg.elem(v).expect("coefficient has the algebra dimension")
}

/// Polynomial expression with the given element coefficients
/// (constant term first).
pub fn poly_expr(cs: &[Elem]) -> Expr {
    Expr::poly(cs.iter().map(|c| c.coeffs().to_vec()).collect())
}

/// The running reciprocal example: `(x + J)^{-•}` on the distinguished slice.
pub fn slice_reciprocal(alg: &Algebra) -> RationalExpr {
    let expr = Expr::inv(poly_expr(&[alg.basis(1), alg.one()]));
    RationalExpr::from_expr(alg, &expr).expect("reciprocal is a valid rational expression")
}

/// Seeded random tame rational function: a product of well-separated sphere
/// factors in the denominator (each of multiplicity at most `max_mult`) under
/// a random low-degree numerator. Retries until the normal polynomial of the
/// numerator is non-zero, so the slice inverse exists.
pub fn random_tame_rational(
    alg: &Algebra,
    seed: u64,
    max_spheres: usize,
    max_mult: usize,
) -> RationalExpr {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _attempt in 0..10_000 {
        let n_sph = rng.random_range(1..=max_spheres);
        let mut reps: Vec<(f64, f64)> = Vec::new();
        let mut den = RealPoly::one();
        let mut ok = true;
        for _ in 0..n_sph {
            let alpha = rng.random_range(-1.5..1.5);
            let beta = rng.random_range(0.6..1.6);
            if reps
                .iter()
                .any(|(a, b)| ((a - alpha).powi(2) + (b - beta).powi(2)).sqrt() < 0.7)
            {
                ok = false;
                break;
            }
            reps.push((alpha, beta));
            let m = rng.random_range(1..=max_mult);
            den = den.mul(&delta_poly(alpha, beta).powi(m));
        }
        if !ok {
            continue;
        }
        let deg = rng.random_range(1..=3);
        let mut coeffs = Vec::new();
        for _ in 0..=deg {
            coeffs.push(tame_coefficient(alg, &mut rng));
        }
        let num = StarPoly::new(alg.clone(), coeffs);
        if num.is_zero() {
            continue;
        }
        if let Ok(r) = RationalExpr::from_parts(num, den) {
            if r.is_tame() {
                return r;
            }
        }
    }
    panic!("no tame rational found for seed {seed} after 10000 attempts");
}

/// Slice-product inverse of a tame rational `f = den^{-1}·G`:
/// `f^{-•} = N(f)^{-1}·f^c = (den / N(G)) · G^c` as a rational expression.
pub fn star_inverse(r: &RationalExpr) -> RationalExpr {
    let num = r.numerator().conj().mul_real(r.denominator());
    let den = r
        .numerator()
        .normal_poly()
        .expect("tame numerator has a real normal polynomial");
    RationalExpr::from_parts(num, den).expect("inverse of a tame rational is rational")
}

/// Slice conjugate of a rational expression.
pub fn star_conj(r: &RationalExpr) -> RationalExpr {
    RationalExpr::from_parts(r.numerator().conj(), r.denominator().clone())
        .expect("conjugate of a rational is rational")
}

/// Slice product of two rational expressions in quotient form:
/// (d₁⁻¹G₁)·(d₂⁻¹G₂) = (d₁d₂)⁻¹(G₁⋆G₂).
pub fn star_mul_rational(a: &RationalExpr, b: &RationalExpr) -> RationalExpr {
    RationalExpr::from_parts(
        a.numerator().star_mul(b.numerator()),
        a.denominator().mul(b.denominator()),
    )
    .expect("product of rationals is rational")
}
