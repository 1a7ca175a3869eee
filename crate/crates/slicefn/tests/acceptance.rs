//! End-to-end acceptance checks. Each test covers one numbered criterion and
//! prints a single `criterion N: PASS/FAIL` line (visible with
//! `--nocapture`); every clause is asserted except where a printed FAIL line
//! documents an expectation the mathematics does not support.

mod common;

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{
    poly_expr, random_tame_rational, slice_reciprocal, star_conj, star_inverse, star_mul_rational,
};
use slicefn::{
    a_from_c, blow_up_witness, c_from_ab, cassini_distance, classify, classify_rational,
    default_laurent_radius, default_spherical_radius, laurent_coeffs, order_at_point_rational,
    radii_from_coeffs, spherical_numbers, spherical_order_rational, Algebra, AlgebraName, Elem,
    Error, Expr, OrderValue, RationalExpr, SingularityKind, SliceFn, SphereId,
};

const ALL_ALGEBRAS: [AlgebraName; 5] = [
    AlgebraName::C,
    AlgebraName::H,
    AlgebraName::O,
    AlgebraName::Cl3,
    AlgebraName::Bc,
];

/// Coefficients of 1/(z + i) at z = i: (−1)ⁿ(2i)^{−n−1}.
fn reciprocal_coeff(n: i64) -> Complex64 {
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Complex64::new(0.0, 2.0).powi(-(n as i32) - 1) * sign
}

fn on_slice(alg: &Algebra, j: &Elem, z: Complex64) -> Elem {
    alg.from_slice_point(j, z)
}

#[test]
fn criterion_01_classical_expansion_of_the_reciprocal() {
    let alg = Algebra::new(AlgebraName::H);
    let sf = slice_reciprocal(&alg).to_slice_fn();
    let j = alg.imag_unit();
    let d = laurent_coeffs(&sf, &j, 1.0, 10, 512).unwrap();

    let mut worst = 0.0f64;
    for n in 0..=8_i64 {
        let expect = on_slice(&alg, &j, reciprocal_coeff(n));
        let err = alg.abs(&(&d.coeff(n) - &expect));
        assert!(err <= 1e-9, "a_{n} error {err}");
        worst = worst.max(err);
    }
    let principal = alg.abs(&d.coeff(-1));
    assert!(principal <= 1e-10, "a_-1 magnitude {principal}");
    println!(
        "criterion 1: PASS — a_0..a_8 match (−1)^n(2i)^(−n−1), worst error {worst:.2e}, \
         ‖a_-1‖ = {principal:.2e}"
    );
}

#[test]
fn criterion_02_conjugate_center_and_spherical_numbers() {
    let alg = Algebra::new(AlgebraName::H);
    let sf = slice_reciprocal(&alg).to_slice_fn();
    let j = alg.imag_unit();
    let yc = alg.conj(&j);

    let da = laurent_coeffs(&sf, &j, 1.0, 12, 512).unwrap();
    let db = laurent_coeffs(&sf, &yc, 1.0, 12, 512).unwrap();
    let one = alg.one();
    assert!(alg.abs(&(&db.coeff(-1) - &one)) <= 1e-9, "b_-1 must be 1");
    for n in -12..=12_i64 {
        if n != -1 {
            let mag = alg.abs(&db.coeff(n));
            assert!(mag <= 1e-9, "b_{n} magnitude {mag}");
        }
    }

    let c_quad = spherical_numbers(&sf, &j, 0.5, 6, 512).unwrap();
    let c_conv = c_from_ab(&da, &db).unwrap();
    let mut agree = 0.0f64;
    for (label, c) in [("quadrature", &c_quad), ("conversion", &c_conv)] {
        assert!(
            alg.abs(&(&c.number(-1) - &one)) <= 1e-9,
            "{label}: c_-1 must be 1"
        );
        for n in -12..=12_i64 {
            if n != -1 {
                let mag = alg.abs(&c.number(n));
                assert!(mag <= 1e-9, "{label}: c_{n} magnitude {mag}");
            }
        }
    }
    for n in -12..=12_i64 {
        let diff = alg.abs(&(&c_quad.number(n) - &c_conv.number(n)));
        assert!(diff <= 1e-8, "paths disagree at c_{n}: {diff}");
        agree = agree.max(diff);
    }
    println!(
        "criterion 2: PASS — b_-1 = 1 at the conjugate center, c_-1 = 1 on both paths, \
         path agreement {agree:.2e}"
    );
}

#[test]
fn criterion_03_conversion_round_trip_on_random_rationals() {
    let mut worst = 0.0f64;
    let cases: [(AlgebraName, u64); 10] = [
        (AlgebraName::H, 301),
        (AlgebraName::H, 302),
        (AlgebraName::H, 303),
        (AlgebraName::H, 304),
        (AlgebraName::H, 305),
        (AlgebraName::Cl3, 311),
        (AlgebraName::Cl3, 312),
        (AlgebraName::Cl3, 313),
        (AlgebraName::Cl3, 314),
        (AlgebraName::Cl3, 315),
    ];
    for (name, seed) in cases {
        let alg = Algebra::new(name);
        let r = random_tame_rational(&alg, seed, 2, 3);
        let sf = r.to_slice_fn();
        let s = r.singular_spheres()[0].0;
        let y = alg.from_slice_point(&alg.imag_unit(), s.z());
        let spheres: Vec<SphereId> = r.singular_spheres().iter().map(|t| t.0).collect();
        let rho = 0.9 * default_spherical_radius(&alg, &y, &spheres);
        let rl = 0.9 * default_laurent_radius(&alg, &y, &spheres);

        let c = spherical_numbers(&sf, &y, rho, 6, 512).unwrap();
        let a_quad = laurent_coeffs(&sf, &y, rl, 8, 512).unwrap();
        let a_conv = a_from_c(&c).unwrap();
        let scale = a_quad
            .coeffs()
            .values()
            .map(|v| alg.abs(v))
            .fold(1e-30, f64::max);
        for n in -6..=6_i64 {
            let err = alg.abs(&(&a_conv.coeff(n) - &a_quad.coeff(n))) / scale;
            assert!(err <= 1e-7, "{name} seed {seed}: a_{n} relative error {err}");
            worst = worst.max(err);
        }
    }
    println!(
        "criterion 3: PASS — 10 random tame rationals over H and CL3, converted classical \
         data matches quadrature, worst relative error {worst:.2e}"
    );
}

#[test]
fn criterion_04_zero_divisor_pole_over_cl3() {
    let alg = Algebra::new(AlgebraName::Cl3);
    let e1 = alg.basis(1);
    let e23 = alg.basis(6);
    let f = Expr::mul(
        Expr::inv(poly_expr(&[e1.clone(), alg.one()])),
        poly_expr(&[e23.scale(-1.0), alg.one()]),
    );
    let r = RationalExpr::from_expr(&alg, &f).unwrap();
    let sphere = SphereId::new(0.0, 1.0);
    let rep = classify_rational(&r, &sphere, 9).unwrap();

    assert_eq!(rep.kind, SingularityKind::Pole);
    assert_eq!(rep.spherical_order, OrderValue::Finite(2));
    // sample_sphere front-loads the deterministic pair e1, e23 for CL3; skip
    // those two (they are the exceptional points) to get 10 generic draws.
    for u in &alg.sample_sphere(12, 77).unwrap()[2..] {
        assert_eq!(
            order_at_point_rational(&r, u).unwrap(),
            OrderValue::Finite(1),
            "generic sphere point must have order 1"
        );
    }
    assert_eq!(order_at_point_rational(&r, &e1).unwrap(), OrderValue::Finite(0));
    assert_eq!(order_at_point_rational(&r, &e23).unwrap(), OrderValue::Finite(0));

    // A third zero of the pole pair, independent of e1 and e23, showing the
    // exceptional set is larger than those two points.
    let w3 = alg
        .elem(vec![0.0, 0.5, 0.5, 0.0, 0.0, 0.5, 0.5, 0.0])
        .unwrap();
    assert_eq!(order_at_point_rational(&r, &w3).unwrap(), OrderValue::Finite(0));

    let ex = rep.exceptional_affine.as_ref().expect("pole carries the set");
    let wire_close = |p: &[f64], q: &Elem| {
        let qe = alg.to_wire(q);
        p.iter()
            .zip(&qe)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
            <= 1e-8
    };
    let exactly_the_pair = ex.sphere_points.len() == 2
        && ex
            .sphere_points
            .iter()
            .any(|p| wire_close(p, &e1))
        && ex
            .sphere_points
            .iter()
            .any(|p| wire_close(p, &e23));

    if exactly_the_pair {
        println!("criterion 4: PASS — pole of spherical order 2, exceptional set {{e1, e23}}");
    } else {
        assert_eq!(ex.intersection_dim, Some(2));
        assert_eq!(ex.directions.len(), 4);
        println!(
            "criterion 4: FAIL — the exceptional set is not exactly {{e1, e23}}: the pair \
             equation x·u + v = 0 for this function has a 4-dimensional affine solution set \
             meeting the sphere in a 2-dimensional family (reported intersection_dim = {:?}), \
             which contains e1, e23, and further points such as (e1+e2+e13+e23)/2 (order 0 \
             verified there); a finite point list would misrepresent it. All other clauses \
             (pole kind, spherical order 2, order 1 at 10 generic points, order 0 at e1 and \
             e23) hold.",
            ex.intersection_dim
        );
    }
}

#[test]
fn criterion_05_reciprocal_pole_orders_and_blow_up() {
    let alg = Algebra::new(AlgebraName::H);
    let r = slice_reciprocal(&alg);
    let sf = r.to_slice_fn();
    let j = alg.imag_unit();
    let minus_j = j.scale(-1.0);

    assert_eq!(order_at_point_rational(&r, &j).unwrap(), OrderValue::Finite(0));
    assert_eq!(
        order_at_point_rational(&r, &minus_j).unwrap(),
        OrderValue::Finite(1)
    );
    assert_eq!(
        spherical_order_rational(&r, &SphereId::new(0.0, 1.0)).unwrap(),
        OrderValue::Finite(2)
    );
    let rep = classify_rational(&r, &SphereId::new(0.0, 1.0), 5).unwrap();
    assert_eq!(rep.kind, SingularityKind::Pole);

    let witnesses = [alg.basis(2), alg.basis(3), minus_j];
    for w in &witnesses {
        let bw = blow_up_witness(&sf, w).unwrap();
        assert!(bw.increasing, "norms must grow approaching {:?}", w.coeffs());
    }
    println!(
        "criterion 5: PASS — pole (not removable), order 0 at J and 1 at −J, spherical \
         order 2, blow-up monotone along 3 non-exceptional approaches"
    );
}

#[test]
fn criterion_06_tame_inverse_law() {
    let mut worst_inv = 0.0f64;
    let mut worst_conj = 0.0f64;
    for (ai, name) in ALL_ALGEBRAS.into_iter().enumerate() {
        let alg = Algebra::new(name);
        for k in 0..10_u64 {
            let seed = 600 + 10 * ai as u64 + k;
            let f = random_tame_rational(&alg, seed, 2, 2);
            let finv = star_inverse(&f);
            let prod = f.to_slice_fn().slice_product(&finv.to_slice_fn());
            let lhs = star_inverse(&star_conj(&f)).to_slice_fn();
            let rhs = star_inverse(&f).to_slice_fn().conjugate();

            let spheres: Vec<SphereId> = f
                .singular_spheres()
                .iter()
                .chain(finv.singular_spheres())
                .map(|t| t.0)
                .collect();
            let units = alg.sample_sphere(100, seed ^ 0x5eed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let one = alg.one();
            let mut count = 0;
            while count < 100 {
                let a: f64 = rng.random_range(-2.0..2.0);
                let b: f64 = rng.random_range(0.3..2.0);
                let z = Complex64::new(a, b);
                let clear = spheres.iter().all(|s| {
                    (z - s.z()).norm().min((z - s.z().conj()).norm()) >= 0.2
                });
                if !clear {
                    continue;
                }
                let x = &alg.real(a) + &units[count % units.len()].scale(b);
                let v = prod.eval(&x).unwrap();
                let err = alg.abs(&(&v - &one));
                assert!(err <= 1e-9, "{name} seed {seed}: f·f^(-•) off 1 by {err}");
                worst_inv = worst_inv.max(err);

                let l = lhs.eval(&x).unwrap();
                let rr = rhs.eval(&x).unwrap();
                let diff = alg.abs(&(&l - &rr)) / (1.0 + alg.abs(&rr));
                assert!(diff <= 1e-9, "{name} seed {seed}: conjugate law off by {diff}");
                worst_conj = worst_conj.max(diff);
                count += 1;
            }
        }
    }
    println!(
        "criterion 6: PASS — 10 tame rationals per algebra, f·f^(-•) = 1 at 100 points \
         (worst {worst_inv:.2e}), (f^c)^(-•) = (f^(-•))^c (worst {worst_conj:.2e})"
    );
}

fn all_products(alg: &Algebra, word: &[Elem]) -> Vec<Elem> {
    if word.len() == 1 {
        return vec![word[0].clone()];
    }
    let mut out = Vec::new();
    for split in 1..word.len() {
        for l in all_products(alg, &word[..split]) {
            for r in all_products(alg, &word[split..]) {
                out.push(alg.mul(&l, &r));
            }
        }
    }
    out
}

#[test]
fn criterion_07_algebra_property_suite() {
    const TOL: f64 = 1e-10;
    for name in ALL_ALGEBRAS {
        let alg = Algebra::new(name);
        let mut rng = ChaCha8Rng::seed_from_u64(700 + alg.dim() as u64);
        let dim = alg.dim();
        let rand_elem = |rng: &mut ChaCha8Rng| {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.5..1.5)).collect();
            alg.elem(v).unwrap()
        };
        for _ in 0..1000 {
            let x = rand_elem(&mut rng);
            let y = rand_elem(&mut rng);
            let sx = 1.0 + alg.abs(&x);
            let sy = 1.0 + alg.abs(&y);

            // Alternative laws.
            let lhs = alg.mul(&alg.mul(&x, &x), &y);
            let rhs = alg.mul(&x, &alg.mul(&x, &y));
            assert!(alg.abs(&(&lhs - &rhs)) <= TOL * sx * sx * sy, "{name}: left alternative");
            let lhs = alg.mul(&alg.mul(&y, &x), &x);
            let rhs = alg.mul(&y, &alg.mul(&x, &x));
            assert!(alg.abs(&(&lhs - &rhs)) <= TOL * sx * sx * sy, "{name}: right alternative");

            // Involution laws.
            assert!(alg.abs(&(&alg.conj(&alg.conj(&x)) - &x)) <= TOL * sx);
            let lhs = alg.conj(&alg.mul(&x, &y));
            let rhs = alg.mul(&alg.conj(&y), &alg.conj(&x));
            assert!(alg.abs(&(&lhs - &rhs)) <= TOL * sx * sy, "{name}: antihomomorphism");
            let r = rng.random_range(-2.0..2.0);
            let rr = alg.real(r);
            assert!(alg.abs(&(&alg.conj(&rr) - &rr)) <= TOL, "{name}: reals fixed");

            // Artin: every bracketing of every word of length ≤ 4 in two
            // generators agrees.
            for len in 2..=4_usize {
                for bits in 0..(1_u32 << len) {
                    let word: Vec<Elem> = (0..len)
                        .map(|i| if bits >> i & 1 == 0 { x.clone() } else { y.clone() })
                        .collect();
                    let vals = all_products(&alg, &word);
                    let scale: f64 = word.iter().map(|w| 1.0 + alg.abs(w)).product();
                    for v in &vals[1..] {
                        assert!(
                            alg.abs(&(v - &vals[0])) <= TOL * scale,
                            "{name}: association of a length-{len} word"
                        );
                    }
                }
            }

            // Composition property of the Euclidean norm (H and O).
            if matches!(name, AlgebraName::H | AlgebraName::O) {
                let lhs = alg.abs(&alg.mul(&x, &y));
                let rhs = alg.abs(&x) * alg.abs(&y);
                assert!((lhs - rhs).abs() <= TOL * (1.0 + rhs), "{name}: composition norm");
            }

            // CL3: n(x) = ‖x‖² + ⟨x, e123·x⟩ e123.
            if name == AlgebraName::Cl3 {
                let omega = alg.basis(7);
                let expect = &alg.real(x.dot(&x)) + &omega.scale(x.dot(&alg.mul(&omega, &x)));
                let got = alg.norm(&x);
                assert!(
                    alg.abs(&(&got - &expect)) <= TOL * sx * sx,
                    "norm structure over CL3"
                );
            }

            // BC: on the trace-zero plane a·e+ + b·e−, the square is
            // −(a²+b²) + 2ab·e+e−, so x² = −1 forces exactly {±e+, ±e−}.
            if name == AlgebraName::Bc {
                let a: f64 = rng.random_range(-2.0..2.0);
                let b: f64 = rng.random_range(-2.0..2.0);
                let p = &alg.basis(1).scale(a) + &alg.basis(2).scale(b);
                let got = alg.mul(&p, &p);
                let expect = &alg.real(-(a * a + b * b)) + &alg.basis(3).scale(2.0 * a * b);
                assert!(alg.abs(&(&got - &expect)) <= TOL * (1.0 + a * a + b * b));
                let n = (a * a + b * b).sqrt();
                if n > 1e-6 {
                    let unit = p.scale(1.0 / n);
                    let off = alg.abs(&(&alg.mul(&unit, &unit) + &alg.one()));
                    let near_axis = a.abs() / n < 0.05 || b.abs() / n < 0.05;
                    assert!(
                        near_axis || off > 1e-3,
                        "only the four axis points square to −1"
                    );
                }
            }
        }
        // The four BC sphere points themselves.
        if name == AlgebraName::Bc {
            for p in [
                alg.basis(1),
                alg.basis(1).scale(-1.0),
                alg.basis(2),
                alg.basis(2).scale(-1.0),
            ] {
                assert!(alg.abs(&alg.trace(&p)) <= TOL);
                assert!(alg.abs(&(&alg.mul(&p, &p) + &alg.one())) <= TOL);
                assert!(alg.abs(&(&alg.norm(&p) - &alg.one())) <= TOL);
            }
        }
    }
    println!(
        "criterion 7: PASS — alternativity, involution laws, Artin words ≤ 4, H/O norm \
         composition, CL3 norm structure, BC sphere = {{±e+, ±e−}}; 1000 samples per algebra \
         at 1e-10"
    );
}

#[test]
fn criterion_08_moufang_identities_for_tame_products() {
    let mut worst = 0.0f64;
    for (ai, name) in ALL_ALGEBRAS.into_iter().enumerate() {
        let alg = Algebra::new(name);
        let f = random_tame_rational(&alg, 800 + ai as u64, 1, 1);
        let g = random_tame_rational(&alg, 810 + ai as u64, 1, 1);
        let h = random_tame_rational(&alg, 820 + ai as u64, 1, 1);

        let moufang_l = star_mul_rational(&star_mul_rational(&star_mul_rational(&f, &g), &f), &h);
        let moufang_r = star_mul_rational(&f, &star_mul_rational(&g, &star_mul_rational(&f, &h)));
        let alt_l = star_mul_rational(&star_mul_rational(&f, &f), &g);
        let alt_r = star_mul_rational(&f, &star_mul_rational(&f, &g));

        let spheres: Vec<SphereId> = f
            .singular_spheres()
            .iter()
            .chain(g.singular_spheres())
            .chain(h.singular_spheres())
            .map(|t| t.0)
            .collect();
        let units = alg.sample_sphere(50, 83 + ai as u64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(830 + ai as u64);
        let mut count = 0;
        while count < 50 {
            let a: f64 = rng.random_range(-2.0..2.0);
            let b: f64 = rng.random_range(0.3..2.0);
            let z = Complex64::new(a, b);
            if !spheres
                .iter()
                .all(|s| (z - s.z()).norm().min((z - s.z().conj()).norm()) >= 0.2)
            {
                continue;
            }
            let x = &alg.real(a) + &units[count % units.len()].scale(b);
            for (l, r) in [(&moufang_l, &moufang_r), (&alt_l, &alt_r)] {
                let lv = l.eval(&x).unwrap();
                let rv = r.eval(&x).unwrap();
                let rel = alg.abs(&(&lv - &rv)) / (1.0 + alg.abs(&rv));
                assert!(rel <= 1e-8, "{name}: identity off by {rel}");
                worst = worst.max(rel);
            }
            count += 1;
        }
    }
    println!(
        "criterion 8: PASS — ((f·g)·f)·h = f·(g·(f·h)) and (f·f)·g = f·(f·g) at 50 points \
         per algebra, worst relative error {worst:.2e}"
    );
}

#[test]
fn criterion_09_slice_distance_bounds_and_radii() {
    let alg = Algebra::new(AlgebraName::H);
    let units = alg.sample_sphere(1000, 90).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(900);
    let mut worst = 0.0f64;
    for j in &units {
        let alpha: f64 = rng.random_range(-2.0..2.0);
        let beta: f64 = rng.random_range(0.05..2.0);
        let gamma: f64 = rng.random_range(-2.5..2.5);
        let delta: f64 = rng.random_range(-2.5..2.5);
        let y = &alg.real(alpha) + &j.scale(beta);
        let x = &alg.real(gamma) + &j.scale(delta);

        let zy = Complex64::new(alpha, beta);
        let z = Complex64::new(gamma, delta);
        let u_direct = ((z - zy).norm() * (z - zy.conj()).norm()).sqrt();
        let u = cassini_distance(&alg, &x, &y);
        assert!(
            (u - u_direct).abs() <= 1e-10 * (1.0 + u_direct),
            "Cassini coordinate disagrees with its slice formula"
        );

        let dist = (z - zy).norm();
        let mid = (u * u + beta * beta).sqrt();
        let slack = 1e-12 * (1.0 + mid + beta);
        assert!(mid - beta <= dist + slack, "lower bound violated");
        assert!(dist <= mid + beta + slack, "upper bound violated");
        worst = worst
            .max((mid - beta - dist).max(0.0))
            .max((dist - mid - beta).max(0.0));
    }

    let j = alg.imag_unit();
    let mut coeffs = BTreeMap::new();
    for n in 0..=8_i64 {
        coeffs.insert(n, on_slice(&alg, &j, reciprocal_coeff(n)));
    }
    let (r1, r2) = radii_from_coeffs(&alg, &coeffs);
    assert!((r2 - 2.0).abs() <= 1e-6, "outer radius {r2}");
    assert_eq!(r1, 0.0, "terminating principal side");
    println!(
        "criterion 9: PASS — two-sided slice distance bounds at 1000 pairs (worst violation \
         {worst:.2e}), recovered outer radius R2 = {r2}"
    );
}

#[test]
fn criterion_10_essential_cap_honesty() {
    let alg = Algebra::new(AlgebraName::H);
    let alg2 = alg.clone();
    let factorial = |n: u32| -> f64 { (1..=n).map(f64::from).product() };
    let f = SliceFn::from_pointwise(alg.clone(), move |x: &Elem| {
        let inv = alg2.try_inverse(x).ok_or(Error::NotInvertible)?;
        let mut acc = alg2.zero();
        for n in (1..=40_u32).rev() {
            acc = alg2.mul(&(&acc + &alg2.real(1.0 / factorial(n))), &inv);
        }
        Ok(acc)
    });

    let origin = SphereId::new(0.0, 0.0);
    let rep = classify(&f, &origin, Some(0.25), 24, 512, 10).unwrap();
    assert_eq!(rep.kind, SingularityKind::EssentialPresumed);
    assert_eq!(rep.cap, Some(24));
    assert_eq!(rep.spherical_order, OrderValue::CapReached(24));

    let d = laurent_coeffs(&f, &alg.zero(), 0.25, 24, 512).unwrap();
    let deep = alg.abs(&d.coeff(-24));
    let expect = 1.0 / factorial(24);
    assert!(
        (deep - expect).abs() <= 0.5 * expect,
        "a_-24 magnitude {deep}, expected near {expect}"
    );

    // Exact classification never presumes an essential singularity.
    let mut checked = 0;
    for (name, seed) in [
        (AlgebraName::H, 151_u64),
        (AlgebraName::H, 152),
        (AlgebraName::Cl3, 153),
        (AlgebraName::Bc, 154),
        (AlgebraName::O, 155),
    ] {
        let a = Algebra::new(name);
        let r = random_tame_rational(&a, seed, 2, 3);
        for (s, _) in r.singular_spheres() {
            let rr = classify_rational(&r, s, seed).unwrap();
            assert_ne!(rr.kind, SingularityKind::EssentialPresumed);
            assert!(rr.exact);
            checked += 1;
        }
    }
    println!(
        "criterion 10: PASS — capped scan reports essential-presumed with K = 24 and \
         ‖a_-24‖ = {deep:.3e}; {checked} exact rational classifications, none essential"
    );
}
