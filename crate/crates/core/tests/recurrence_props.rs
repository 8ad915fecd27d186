mod common;

use bicircle::fixtures::{OneSided, Splitting};
use bicircle::linalg::frob;
use bicircle::*;
use common::*;
use proptest::prelude::*;

fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

fn table_of(weight: WeightSpec, k: usize, l: usize) -> MomentTable {
    compute_moments(&weight, k, l, &Default::default()).unwrap()
}

fn mod_square_table(p: &LaurentPoly, k: usize, l: usize) -> MomentTable {
    table_of(WeightSpec::ReciprocalModSquare(p.clone()), k, l)
}

fn structural_checks(rs: &RecurrenceSet) -> f64 {
    let lex = &rs.lex;
    let mut worst = frob(&(&lex.ehat - lex.ehat.transpose()));
    worst = worst.max(frob(&(&rs.tilde.k - lex.k.adjoint())));
    worst = worst.max(frob(&(&rs.tilde.k1 - lex.k1.transpose())));
    for (g, k) in [(&lex.gamma, &lex.k), (&lex.gamma1, &lex.k1)] {
        worst = worst.max(frob(&(g * g.adjoint() + k * k.adjoint() - eye(rs.m))));
    }
    for (g, k) in [(&rs.tilde.gamma, &rs.tilde.k), (&rs.tilde.gamma1, &rs.tilde.k1)] {
        worst = worst.max(frob(&(g * g.adjoint() + k * k.adjoint() - eye(rs.n))));
    }
    worst
}

#[test]
fn split_weight_structure() {
    let t = mod_square_table(&Splitting { a: 0.5, b: 0.3 }.p_full(), 3, 3);
    for (n, m) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
        let rs = compute_coefficients(&t, n, m).unwrap();
        assert_eq!(rs.lex.k.shape(), (m, n));
        assert_eq!(rs.lex.i.shape(), (m + 1, n + 1));
        assert_eq!(rs.tilde.k.shape(), (n, m));
        assert!(structural_checks(&rs) < 1e-10);
        assert!(verify_recurrences(&t, n, m).unwrap().max() < 1e-9);
    }
}

#[test]
fn vanishing_ehat_forces_shift_structure() {
    let t = mod_square_table(&Splitting { a: 0.5, b: 0.3 }.p_full(), 4, 3);
    let (ehat, a) = ehat_and_a(&t, 3, 2).unwrap();
    assert!(frob(&ehat) < 1e-10);
    assert!(frob(&(a - eye(3))) < 1e-9);
    let phi = orthonormalize(&t, 3, 2, Ordering::Lex).unwrap();
    let low = orthonormalize(&t, 2, 2, Ordering::Lex).unwrap();
    for (x, y) in phi.vector_poly().iter().zip(low.vector_poly()) {
        assert!(x.max_coeff_diff(&y.shift(1, 0)) < 1e-9);
    }
}

#[test]
fn stable_factor_orthogonalities() {
    let mut rng = seeded(21);
    for _ in 0..4 {
        let p = random_stable(&mut rng, 2, 2, 0.6);
        let t = mod_square_table(&p, 6, 6);
        let rev = p.reverse(2, 2).unwrap();
        for k in -2..=3 {
            for l in -2..=3 {
                let mono = LaurentPoly::monomial(-k, -l, c(1.0, 0.0));
                if l > 0 {
                    assert!(functional_apply(&t, &p.multiply(&mono)).unwrap().norm() < 1e-10);
                }
                if k < 2 {
                    assert!(functional_apply(&t, &rev.multiply(&mono)).unwrap().norm() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn stable_case_lower_block_orthogonality() {
    let mut rng = seeded(22);
    for _ in 0..4 {
        let p = random_stable(&mut rng, 2, 2, 0.6);
        let t = mod_square_table(&p, 6, 6);
        let low = orthonormalize(&t, 2, 1, Ordering::Lex).unwrap();
        for f in low.vector_poly() {
            for k in 0..2 {
                for l in 0..=3 {
                    let mono = LaurentPoly::monomial(-k, -l, c(1.0, 0.0));
                    assert!(functional_apply(&t, &f.multiply(&mono)).unwrap().norm() < 1e-10);
                }
            }
        }
    }
}

/// Largest coefficient gap between the lower entries of a level and the
/// level one step down.
fn block_gap(t: &MomentTable, n: usize, m: usize) -> f64 {
    let phi = orthonormalize(t, n, m, Ordering::Lex).unwrap();
    let phi_w = orthonormalize(t, n, m - 1, Ordering::Lex).unwrap();
    let tphi = orthonormalize(t, n, m, Ordering::Revlex).unwrap();
    let tphi_z = orthonormalize(t, n - 1, m, Ordering::Revlex).unwrap();
    let gap = |a: &[LaurentPoly], b: &[LaurentPoly]| {
        a[1..].iter().zip(b).map(|(x, y)| x.max_coeff_diff(y)).fold(0.0, f64::max)
    };
    gap(phi.vector_poly(), phi_w.vector_poly())
        .max(gap(tphi.vector_poly(), tphi_z.vector_poly()))
        .max(phi.vector_poly()[0].max_coeff_diff(&tphi.vector_poly()[0]))
}

#[test]
fn vanishing_k_matches_block_structure() {
    let mut rng = seeded(23);
    for _ in 0..3 {
        let p = random_stable(&mut rng, 2, 2, 0.6);
        let t = mod_square_table(&p, 2, 2);
        let rs = compute_coefficients(&t, 2, 2).unwrap();
        assert!(frob(&rs.lex.k) < 1e-10);
        assert!(block_gap(&t, 2, 2) < 1e-10);
    }
    let t = mod_square_table(&OneSided { a: 0.5 }.p(), 2, 2);
    let rs = compute_coefficients(&t, 2, 2).unwrap();
    assert!(frob(&rs.lex.k) > 1e-3);
    assert!(block_gap(&t, 2, 2) > 1e-3);
}

fn coeffs9() -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 9).prop_map(|v| v.into_iter().map(|(a, b)| c(a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn recurrences_and_identities_hold(co in coeffs9()) {
        let t = table_of(WeightSpec::ReciprocalTrigPoly(positive_trig(&co, 2, 2, 0.1)), 3, 3);
        for (n, m) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            let rs = compute_coefficients(&t, n, m).unwrap();
            prop_assert!(structural_checks(&rs) < 1e-10);
            let rec = verify_recurrences(&t, n, m).unwrap();
            prop_assert!(rec.max() < 1e-9, "{:?}", rec);
            let ids = verify_identities(&t, n, m, 1e-10).unwrap();
            prop_assert!(ids.max() < 1e-9, "{:?}", ids);
        }
    }

    #[test]
    fn ehat_is_symmetric(co in coeffs9(), n in 1usize..3, m in 0usize..3) {
        let t = table_of(WeightSpec::ReciprocalTrigPoly(positive_trig(&co, 2, 2, 0.1)), 2, 2);
        let (ehat, _) = ehat_and_a(&t, n, m).unwrap();
        prop_assert!(frob(&(&ehat - ehat.transpose())) < 1e-10);
    }
}
