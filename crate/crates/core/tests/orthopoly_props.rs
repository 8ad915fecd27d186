mod common;

use bicircle::fixtures::Splitting;
use bicircle::*;
use common::*;
use proptest::prelude::*;

fn table_of(weight: WeightSpec, k: usize, l: usize) -> MomentTable {
    compute_moments(&weight, k, l, &Default::default()).unwrap()
}

fn trig_table(co: &[C64], k: usize, l: usize) -> MomentTable {
    table_of(WeightSpec::ReciprocalTrigPoly(positive_trig(co, 2, 2, 0.1)), k, l)
}

/// Sequential Gram-Schmidt over the monomials `z^i w^s` in lex order,
/// returning the top `m+1` normalized vectors as `phi^m, ..., phi^0`.
fn gram_schmidt_lex(table: &MomentTable, n: usize, m: usize) -> Vec<LaurentPoly> {
    let ip = |f: &LaurentPoly, g: &LaurentPoly| inner_product(table, f, g).unwrap();
    let mut basis: Vec<LaurentPoly> = Vec::new();
    for i in 0..=n {
        for s in 0..=m {
            let mut v = LaurentPoly::monomial(i as i32, s as i32, c(1.0, 0.0));
            for _ in 0..2 {
                for b in &basis {
                    let proj = ip(&v, b);
                    v = &v + &b.scale(-proj);
                }
            }
            let norm = ip(&v, &v).re.sqrt();
            basis.push(v.scale(c(1.0 / norm, 0.0)));
        }
    }
    basis[n * (m + 1)..].iter().rev().cloned().collect()
}

fn torus_point(rng: &mut rand_chacha::ChaCha8Rng) -> C64 {
    use rand::Rng;
    unit(rng.gen_range(0.0..std::f64::consts::TAU))
}

#[test]
fn szego_product_level_matches_gram_schmidt() {
    let p = LaurentPoly::from_terms([(0, 0, c(1.0, 0.0)), (1, 1, c(-0.3, 0.0))])
        .scale(c(1.0 / (1.0f64 - 0.09).sqrt(), 0.0));
    let t = table_of(WeightSpec::ReciprocalModSquare(p), 1, 1);
    let lvl = orthonormalize(&t, 1, 1, Ordering::Lex).unwrap();
    let oracle = gram_schmidt_lex(&t, 1, 1);
    for (a, b) in lvl.vector_poly().iter().zip(&oracle) {
        assert!(a.max_coeff_diff(b) < 1e-12);
    }
}

#[test]
fn split_weight_level_is_orthonormal() {
    let t = table_of(WeightSpec::ReciprocalModSquare(Splitting { a: 0.5, b: 0.3 }.p_full()), 2, 2);
    for ordering in [Ordering::Lex, Ordering::Revlex] {
        let lvl = orthonormalize(&t, 2, 2, ordering).unwrap();
        let v = lvl.vector_poly();
        let g = moments::gram(&t, v, v).unwrap();
        assert!((g - nalgebra::DMatrix::<C64>::identity(v.len(), v.len())).norm() < 1e-10);
    }
}

#[test]
fn split_weight_christoffel_darboux() {
    let t = table_of(WeightSpec::ReciprocalModSquare(Splitting { a: 0.5, b: 0.3 }.p_full()), 2, 2);
    let cd = CdLevels::new(&t, 2, 2).unwrap();
    let mut rng = seeded(5);
    for _ in 0..20 {
        let pts: Vec<C64> = (0..4).map(|_| torus_point(&mut rng)).collect();
        let r = cd.residual(pts[0], pts[1], pts[2], pts[3]);
        assert!(r.res32 < 1e-9 && r.res33 < 1e-9, "{r:?}");
    }
}

#[test]
fn flat_weight_christoffel_darboux() {
    let t = table_of(WeightSpec::ReciprocalTrigPoly(LaurentPoly::one()), 2, 2);
    let cd = CdLevels::new(&t, 2, 1).unwrap();
    let r = cd.residual(c(0.3, 0.2), c(-1.1, 0.4), c(0.9, 0.0), c(0.0, 2.0));
    assert!(r.res32 < 1e-12 && r.res33 < 1e-12);
}

#[test]
fn construction_is_deterministic() {
    let mut rng = seeded(8);
    let co = random_coeffs(&mut rng, 9);
    let a = orthonormalize(&trig_table(&co, 2, 2), 2, 2, Ordering::Lex).unwrap();
    let b = orthonormalize(&trig_table(&co, 2, 2), 2, 2, Ordering::Lex).unwrap();
    assert_eq!(a.coeff_matrix, b.coeff_matrix);
}

fn coeffs9() -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 9).prop_map(|v| v.into_iter().map(|(a, b)| c(a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn levels_match_gram_schmidt_and_are_orthonormal(co in coeffs9(), n in 0usize..3, m in 0usize..3) {
        let t = trig_table(&co, 2, 2);
        let lvl = orthonormalize(&t, n, m, Ordering::Lex).unwrap();
        let v = lvl.vector_poly();
        let oracle = gram_schmidt_lex(&t, n, m);
        for (a, b) in v.iter().zip(&oracle) {
            prop_assert!(a.max_coeff_diff(b) < 1e-9);
        }
        let g = moments::gram(&t, v, v).unwrap();
        prop_assert!((g - nalgebra::DMatrix::<C64>::identity(m + 1, m + 1)).norm() < 1e-10);
        for &pivot in &lvl.pivots {
            prop_assert!(pivot > 0.0);
        }
    }

    #[test]
    fn orthogonality_pattern_holds(co in coeffs9()) {
        let (n, m) = (2usize, 2usize);
        let t = trig_table(&co, 2, 2);
        let lvl = orthonormalize(&t, n, m, Ordering::Lex).unwrap();
        for (row, phi) in lvl.vector_poly().iter().enumerate() {
            let s = m - row;
            for k in 0..=n {
                for l in 0..=m {
                    if k < n || l < s {
                        let mono = LaurentPoly::monomial(k as i32, l as i32, c(1.0, 0.0));
                        prop_assert!(inner_product(&t, phi, &mono).unwrap().norm() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn matrix_polynomial_reproduces_vector(co in coeffs9(), x in 0.0..6.3f64, y in 0.0..6.3f64) {
        let t = trig_table(&co, 2, 2);
        let lvl = orthonormalize(&t, 2, 2, Ordering::Lex).unwrap();
        let mp = lvl.matrix_poly_z().unwrap();
        let (z, w) = (unit(x) * 1.3, unit(y) * 0.7);
        let powers = nalgebra::DVector::from_vec(vec![w * w, w, c(1.0, 0.0)]);
        let direct = nalgebra::DVector::from_vec(lvl.evaluate(z, w));
        prop_assert!((mp.evaluate(z) * powers - direct).norm() < 1e-12);
        for radius in [1.0, 1.1] {
            prop_assert!(mp.determinant(unit(x) * radius).norm() > 1e-8);
        }
    }

    #[test]
    fn christoffel_darboux_on_torus(co in coeffs9(), seed in 0u64..1000) {
        let t = trig_table(&co, 2, 2);
        let cd = CdLevels::new(&t, 2, 2).unwrap();
        let mut rng = seeded(seed);
        let pts: Vec<C64> = (0..4).map(|_| torus_point(&mut rng)).collect();
        let r = cd.residual(pts[0], pts[1], pts[2], pts[3]);
        prop_assert!(r.res32 < 1e-9 && r.res33 < 1e-9, "{:?}", r);
    }
}
