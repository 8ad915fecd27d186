//! Structural check of the splitting case for a user-supplied pair of
//! stable factors.

use crate::error::Result;
use crate::linalg::{unitary_defect, CMat};
use crate::moments::{compute_moments, MomentTable, Ordering, QuadratureConfig, WeightSpec};
use crate::orthopoly::orthonormalize;
use crate::poly::LaurentPoly;
use crate::recurrence::ResidualReport;

fn level_or_empty(table: &MomentTable, n: usize, m: i64) -> Result<Vec<LaurentPoly>> {
    if m < 0 {
        return Ok(Vec::new());
    }
    Ok(orthonormalize(table, n, m as usize, Ordering::Lex)?.vector_poly().to_vec())
}

fn coeff_rows(polys: &[LaurentPoly], n: usize, m: usize) -> CMat {
    let width = (n + 1) * (m + 1);
    let mut out = CMat::zeros(polys.len(), width);
    for (i, p) in polys.iter().enumerate() {
        for k in 0..=n {
            for l in 0..=m {
                out[(i, k * (m + 1) + l)] = p.coeff(k as i32, l as i32);
            }
        }
    }
    out
}

/// Support outside `[0,n] x [0,m]`, which `coeff_rows` would drop.
fn outside(polys: &[LaurentPoly], n: usize, m: usize) -> f64 {
    polys
        .iter()
        .flat_map(|p| p.terms().collect::<Vec<_>>())
        .filter(|&(k, l, _)| k < 0 || l < 0 || k > n as i32 || l > m as i32)
        .fold(0.0, |w: f64, (_, _, c)| w.max(c.norm()))
}

/// Best `X` with `target = X source` in the least-squares sense, with
/// `(||X^dagger X - I||, max mapping residual)`.
fn fit(target: &[LaurentPoly], source: &[LaurentPoly], n: usize, m: usize) -> (f64, f64) {
    let f = coeff_rows(target, n, m);
    let r = coeff_rows(source, n, m);
    let pinv = match r.clone().pseudo_inverse(1e-12) {
        Ok(p) => p,
        Err(_) => return (f64::INFINITY, f64::INFINITY),
    };
    let x = &f * pinv;
    let mapping = (&f - &x * &r).iter().fold(0.0, |w: f64, c| w.max(c.norm()));
    let mapping = mapping.max(outside(target, n, m)).max(outside(source, n, m));
    (unitary_defect(&x), mapping)
}

/// `z^n q(1/z, w)` for `q` of z-degree at most `n`.
fn reflect_z(q: &LaurentPoly, n: usize) -> LaurentPoly {
    LaurentPoly::from_terms(q.terms().map(|(k, l, c)| (n as i32 - k, l, c)))
}

/// `w^d conj(f)(z, 1/w)`.
fn conj_invert_w(f: &LaurentPoly, d: i64) -> LaurentPoly {
    LaurentPoly::from_terms(f.terms().map(|(k, l, c)| (k, d as i32 - l, c.conj())))
}

/// Checks that each factor's top orthonormal polynomial is its reverse and
/// that the lex vectors of the product weight are unitary images of the
/// block vectors assembled from the factors.
///
/// Labels: `p_top_entry`, `q_top_entry` (phase-aligned coefficient distance),
/// `p_lower_block`, `q_lower_block` (remaining entries against the level
/// one step lower in `w`), `u_unitarity`, `u_mapping`, `v_unitarity`,
/// `v_mapping`.
pub fn verify_splitting_structure(
    weight: &WeightSpec,
    p: &LaurentPoly,
    q: &LaurentPoly,
    config: &QuadratureConfig,
) -> Result<ResidualReport> {
    let (n1, m1) = p.degree()?;
    let (n2, m2) = q.degree()?;
    let (n, m) = (n1 + n2, m1 + m2);
    let tp = compute_moments(&WeightSpec::ReciprocalModSquare(p.clone()), n1, m1, config)?;
    let tq = compute_moments(&WeightSpec::ReciprocalModSquare(q.clone()), n2, m2, config)?;
    let t = compute_moments(weight, n, m, config)?;

    let mut rep = ResidualReport::default();
    let rev_p = p.reverse(n1 as i32, m1 as i32)?;
    let rev_q = q.reverse(n2 as i32, m2 as i32)?;
    let phi_p = level_or_empty(&tp, n1, m1 as i64)?;
    let phi_p_low = level_or_empty(&tp, n1, m1 as i64 - 1)?;
    let phi_q = level_or_empty(&tq, n2, m2 as i64)?;
    let phi_q_low = level_or_empty(&tq, n2, m2 as i64 - 1)?;
    rep.insert("p_top_entry", phi_p[0].phase_aligned_diff(&rev_p));
    rep.insert("q_top_entry", phi_q[0].phase_aligned_diff(&rev_q));
    let lower = |full: &[LaurentPoly], low: &[LaurentPoly]| {
        full[1..].iter().zip(low).map(|(a, b)| a.max_coeff_diff(b)).fold(0.0, f64::max)
    };
    rep.insert("p_lower_block", lower(&phi_p, &phi_p_low));
    rep.insert("q_lower_block", lower(&phi_q, &phi_q_low));

    let zq = reflect_z(q, n2);
    let first: Vec<LaurentPoly> = phi_p_low.iter().map(|f| zq.multiply(f)).collect();
    if m >= 1 {
        let mut rhs = first.clone();
        rhs.extend(phi_q_low.iter().map(|f| rev_p.multiply(&conj_invert_w(f, m2 as i64 - 1))));
        let target = level_or_empty(&t, n, m as i64 - 1)?;
        let (unit, map) = fit(&target, &rhs, n, m);
        rep.insert("u_unitarity", unit);
        rep.insert("u_mapping", map);
    }
    let mut rhs = vec![rev_p.multiply(&zq)];
    rhs.extend(first);
    rhs.extend(phi_q_low.iter().map(|f| rev_p.multiply(&conj_invert_w(f, m2 as i64))));
    let target = level_or_empty(&t, n, m as i64)?;
    let (unit, map) = fit(&target, &rhs, n, m);
    rep.insert("v_unitarity", unit);
    rep.insert("v_mapping", map);
    Ok(rep)
}
