mod common;

use bicircle::factorization::{invariant_subspace_rotation, kernel_svd_align, DEFAULT_TOL};
use bicircle::fixtures::{OneSided, Splitting};
use bicircle::linalg::{frob, unitary_defect};
use bicircle::stability::DEFAULT_TOL as STABILITY_TOL;
use bicircle::*;
use common::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> CMat {
    let a = CMat::from_vec(n, n, random_coeffs(rng, n * n));
    a.qr().q()
}

/// `z^n p(1/z, w)`: nonzero for `|z| = 1, |w| <= 1` when `p` is.
fn reflect_z(p: &LaurentPoly) -> LaurentPoly {
    let (n, _) = p.degree().unwrap();
    LaurentPoly::from_terms(p.terms().map(|(k, l, a)| (n as i32 - k, l, a)))
}

fn univariate(coeffs: &[C64], in_w: bool) -> LaurentPoly {
    LaurentPoly::from_terms(
        coeffs.iter().enumerate().map(|(j, a)| if in_w { (0, j as i32, *a) } else { (j as i32, 0, *a) }),
    )
}

struct RoundTrip {
    coeff_gap: f64,
    weight_gap: f64,
    p: LaurentPoly,
    diagnostics: ResidualReport,
}

fn round_trip(p: &LaurentPoly, n: usize, m: usize) -> RoundTrip {
    let out =
        factor_one_sided(&WeightSpec::ReciprocalModSquare(p.clone()), n, m, DEFAULT_TOL, &Default::default()).unwrap();
    assert!(out.report.one_sided_z, "{:?}", out.report);
    let work = out.work.unwrap();
    let found = out.p.unwrap();
    let ps = p.herm_square();
    let fs = found.herm_square();
    let mut weight_gap = 0.0f64;
    for z in circle(64, 0.0) {
        for w in circle(64, 0.0) {
            let ratio = fs.evaluate(z, w).unwrap().re / ps.evaluate(z, w).unwrap().re;
            weight_gap = weight_gap.max((ratio - 1.0).abs());
        }
    }
    RoundTrip { coeff_gap: found.phase_aligned_diff(p), weight_gap, p: found, diagnostics: work.diagnostics }
}

fn assert_round_trip(p: &LaurentPoly, n: usize, m: usize) {
    let rt = round_trip(p, n, m);
    assert!(rt.coeff_gap < 1e-7, "coefficient gap {}", rt.coeff_gap);
    assert!(rt.weight_gap < 1e-7, "weight gap {}", rt.weight_gap);
    for label in ["k_reconstruction", "k1_reconstruction", "s_s1_product", "u_tilde_unitarity", "v_tilde_unitarity"] {
        assert!(rt.diagnostics.get(label).unwrap() < 1e-10, "{label}: {:?}", rt.diagnostics);
    }
    for label in ["lex_kernel_identity", "revlex_kernel_identity", "two_point_kernel", "factor_cross_check"] {
        assert!(rt.diagnostics.get(label).unwrap() < 1e-8, "{label}: {:?}", rt.diagnostics);
    }
    let cert = one_sided_stable_z(&rt.p, 256, STABILITY_TOL).unwrap();
    assert!(cert.one_sided_z);
}

#[test]
fn one_sided_fixture_round_trips() {
    for a in [0.4, 0.5, 0.65, 0.8, 0.95] {
        assert_round_trip(&OneSided { a }.p(), 2, 2);
    }
}

#[test]
fn split_fixture_round_trips() {
    assert_round_trip(&Splitting { a: 0.5, b: 0.3 }.p_full(), 2, 2);
    assert_round_trip(&Splitting { a: -0.2, b: 0.6 }.p_full(), 2, 2);
}

#[test]
fn random_stable_round_trips() {
    let mut rng = seeded(51);
    for (n, m) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
        for _ in 0..2 {
            assert_round_trip(&random_stable(&mut rng, n, m, 0.7), n, m);
        }
    }
}

#[test]
fn anti_stable_round_trips() {
    let mut rng = seeded(52);
    for (n, m) in [(1, 1), (2, 1), (2, 2)] {
        let p = reflect_z(&random_stable(&mut rng, n, m, 0.7));
        assert_round_trip(&p, n, m);
    }
}

#[test]
fn product_of_stable_and_anti_stable_round_trips() {
    let mut rng = seeded(53);
    for _ in 0..3 {
        let p = random_stable(&mut rng, 1, 1, 0.6);
        let q = reflect_z(&random_stable(&mut rng, 1, 1, 0.6));
        let pq = p.multiply(&q);
        let rt = round_trip(&pq, 2, 2);
        assert!(rt.coeff_gap < 1e-7 && rt.weight_gap < 1e-7);
    }
}

#[test]
fn tensor_weights_have_vanishing_kernels() {
    let mut rng = seeded(54);
    for _ in 0..4 {
        let da = rng.gen_range(1..=3);
        let db = rng.gen_range(1..=3);
        let alpha = univariate(&univariate_stable(&mut rng, da), false);
        let beta = univariate(&univariate_stable(&mut rng, db), true);
        let p = alpha.multiply(&beta);
        let t = compute_moments(&WeightSpec::ReciprocalModSquare(p.clone()), da, db, &Default::default()).unwrap();
        let rs = compute_coefficients(&t, da, db).unwrap();
        assert!(frob(&rs.lex.k) < 1e-8 && frob(&rs.lex.k1) < 1e-8);
        let rep = check_conditions(&rs, DEFAULT_TOL);
        assert!(rep.tensor && rep.splitting && rep.one_sided_z);
        assert_round_trip(&p, da, db);
    }
}

#[test]
fn stable_case_recovers_bidisk_factor() {
    let s = Splitting { a: 0.0, b: 0.3 };
    let t = compute_moments(&WeightSpec::ReciprocalModSquare(s.p_full()), 2, 2, &Default::default()).unwrap();
    let rs = compute_coefficients(&t, 2, 2).unwrap();
    let rep = check_conditions(&rs, DEFAULT_TOL);
    assert!(rep.stable);
    let lvl = orthonormalize(&t, 2, 2, Ordering::Lex).unwrap();
    let p = stable_case_factor(&lvl, &rs, DEFAULT_TOL).unwrap();
    assert!(p.max_coeff_diff(&s.p()) < 1e-8);
}

#[test]
fn certified_one_sided_weights_pass_the_condition() {
    let mut rng = seeded(55);
    let mut suite = vec![OneSided { a: 0.5 }.p(), OneSided { a: 0.9 }.p(), Splitting { a: 0.5, b: 0.3 }.p_full()];
    for _ in 0..4 {
        suite.push(random_stable(&mut rng, 2, 2, 0.7));
        suite.push(reflect_z(&random_stable(&mut rng, 2, 2, 0.7)));
    }
    for p in suite {
        assert!(one_sided_stable_z(&p, 256, STABILITY_TOL).unwrap().one_sided_z);
        let t = compute_moments(&WeightSpec::ReciprocalModSquare(p), 2, 2, &Default::default()).unwrap();
        let rep = check_conditions(&compute_coefficients(&t, 2, 2).unwrap(), DEFAULT_TOL);
        assert!(rep.one_sided_z, "{rep:?}");
    }
}

#[test]
fn generic_trig_weight_is_not_factorable() {
    let mut rng = seeded(56);
    let q = positive_trig(&random_coeffs(&mut rng, 4), 1, 1, 0.2);
    let out = factor_one_sided(&WeightSpec::ReciprocalTrigPoly(q), 1, 1, DEFAULT_TOL, &Default::default()).unwrap();
    assert!(!out.report.one_sided_z);
    assert!(out.p.is_none() && out.work.is_none());
    assert!(out.report.residuals_z[0] > 1e-4);
}

#[test]
fn synthetic_alignment_reconstructs_kernels() {
    let mut rng = seeded(57);
    for (m, n, r, r1) in [(2, 3, 1, 1), (3, 4, 2, 1), (3, 5, 1, 2), (2, 2, 0, 2)] {
        let ut = random_unitary(&mut rng, n);
        let u = random_unitary(&mut rng, m);
        let u1 = random_unitary(&mut rng, m);
        let mut s = CMat::zeros(m, n);
        for i in 0..r {
            s[(i, i)] = c(2.0 - 0.5 * i as f64, 0.0);
        }
        let mut s1 = CMat::zeros(m, n);
        for j in 0..r1 {
            s1[(m - r1 + j, n - r1 + j)] = c(1.0 + 0.3 * j as f64, 0.0);
        }
        let k = &u * &s * ut.adjoint();
        let k1 = &u1 * &s1 * ut.transpose();
        let al = kernel_svd_align(&k, &k1, DEFAULT_TOL).unwrap();
        assert_eq!((al.r, al.r1), (r, r1));
        let (rk, rk1) = al.reconstruction_error(&k, &k1);
        assert!(rk < 1e-12 && rk1 < 1e-12);
        assert!(unitary_defect(&al.u_tilde) < 1e-12);
        assert!(unitary_defect(&al.u) < 1e-12 && unitary_defect(&al.u1) < 1e-12);
        assert!(frob(&(&al.s * al.s1.transpose())) < 1e-12);
    }
}

#[test]
fn synthetic_rotation_finds_invariant_block() {
    let mut rng = seeded(58);
    let (n, n1, r, r1) = (5, 2, 1, 2);
    for _ in 0..5 {
        let mut g = CMat::from_vec(n, n, random_coeffs(&mut rng, n * n));
        for i in 0..n1 {
            for j in n1..n {
                g[(i, j)] = c(0.0, 0.0);
            }
        }
        let mut w = CMat::identity(n, n);
        let w2 = random_unitary(&mut rng, n - n1 - r1);
        w.view_mut((n1, n1), (n - n1 - r1, n - n1 - r1)).copy_from(&w2);
        let w1 = random_unitary(&mut rng, n1 - r);
        w.view_mut((r, r), (n1 - r, n1 - r)).copy_from(&w1);
        let conj = w.adjoint() * &g * &w;
        let rot = invariant_subspace_rotation(&conj, r, r1, DEFAULT_TOL).unwrap();
        assert_eq!((rot.n1, rot.n2), (n1, n - n1));
        assert!(rot.block_residual < 1e-10);
        assert!(unitary_defect(&rot.e_tilde) < 1e-12);
        for i in 0..r {
            assert!((rot.e_tilde[(i, i)].norm() - 1.0).abs() < 1e-12);
        }
        for j in n - r1..n {
            assert!((rot.e_tilde[(j, j)].norm() - 1.0).abs() < 1e-12);
        }
    }
}
