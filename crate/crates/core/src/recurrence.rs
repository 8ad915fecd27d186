//! Recurrence coefficient matrices of a level and the identities among them.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{frob, mat_serde, CMat};
use crate::moments::{gram, MomentTable, Ordering};
use crate::orthopoly::{orthonormalize, OrthoLevel};
use crate::poly::{combine, LaurentPoly, C64};

/// Named maximum-modulus residuals.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ResidualReport(pub BTreeMap<String, f64>);

impl ResidualReport {
    pub fn insert(&mut self, label: impl Into<String>, value: f64) {
        self.0.insert(label.into(), value);
    }

    pub fn get(&self, label: &str) -> Option<f64> {
        self.0.get(label).copied()
    }

    pub fn max(&self) -> f64 {
        self.0.values().cloned().fold(0.0, f64::max)
    }

    pub fn merge(&mut self, prefix: &str, other: ResidualReport) {
        for (k, v) in other.0 {
            self.0.insert(format!("{prefix}{k}"), v);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &f64)> {
        self.0.iter()
    }
}

/// The eight coefficient matrices of one ordering at a level `(n, m)`.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientMatrices {
    #[serde(with = "mat_serde")]
    pub ehat: CMat,
    #[serde(with = "mat_serde")]
    pub a: CMat,
    #[serde(with = "mat_serde")]
    pub k: CMat,
    #[serde(with = "mat_serde")]
    pub gamma: CMat,
    #[serde(with = "mat_serde")]
    pub k1: CMat,
    #[serde(with = "mat_serde")]
    pub gamma1: CMat,
    #[serde(with = "mat_serde")]
    pub i: CMat,
    #[serde(with = "mat_serde")]
    pub i1: CMat,
}

/// Coefficients at `(n, m)` together with their tilde analogs (variables exchanged).
#[derive(Clone, Debug, Serialize)]
pub struct RecurrenceSet {
    pub n: usize,
    pub m: usize,
    #[serde(flatten)]
    pub lex: CoefficientMatrices,
    pub tilde: CoefficientMatrices,
}

/// Vector polynomials entering the recurrences at `(n, m)`.
struct LevelFamily {
    n: usize,
    m: usize,
    phi: OrthoLevel,
    phi_z: OrthoLevel,
    phi_w: OrthoLevel,
    tphi: OrthoLevel,
    tphi_z: OrthoLevel,
}

fn shifted(v: &[LaurentPoly], dk: i32, dl: i32) -> Vec<LaurentPoly> {
    v.iter().map(|p| p.shift(dk, dl)).collect()
}

fn apply(mat: &CMat, v: &[LaurentPoly]) -> Vec<LaurentPoly> {
    (0..mat.nrows())
        .map(|r| {
            let row: Vec<C64> = mat.row(r).iter().cloned().collect();
            combine(&row, v)
        })
        .collect()
}

fn vec_residual(parts: &[Vec<LaurentPoly>]) -> f64 {
    let len = parts[0].len();
    (0..len)
        .map(|i| {
            let mut acc = LaurentPoly::zero();
            for p in parts {
                acc = &acc + &p[i];
            }
            acc.max_abs()
        })
        .fold(0.0, f64::max)
}

fn neg(v: Vec<LaurentPoly>) -> Vec<LaurentPoly> {
    v.iter().map(|p| -p).collect()
}

impl LevelFamily {
    fn new(table: &MomentTable, n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidInput(format!("recurrence level ({n},{m}) needs n, m >= 1")));
        }
        Ok(LevelFamily {
            n,
            m,
            phi: orthonormalize(table, n, m, Ordering::Lex)?,
            phi_z: orthonormalize(table, n - 1, m, Ordering::Lex)?,
            phi_w: orthonormalize(table, n, m - 1, Ordering::Lex)?,
            tphi: orthonormalize(table, n, m, Ordering::Revlex)?,
            tphi_z: orthonormalize(table, n - 1, m, Ordering::Revlex)?,
        })
    }

    fn coefficients(&self, table: &MomentTable) -> Result<CoefficientMatrices> {
        let phi = self.phi.vector_poly();
        let z_phi_z = shifted(self.phi_z.vector_poly(), 1, 0);
        let rev_phi_z = self.phi_z.reverse_vector();
        let phi_w = self.phi_w.vector_poly();
        let w_phi_w = shifted(phi_w, 0, 1);
        let tphi = self.tphi.vector_poly();
        let tphi_z = self.tphi_z.vector_poly();
        let rev_tphi_z = self.tphi_z.reverse_vector();
        let rev_phi = self.phi.reverse_vector();
        Ok(CoefficientMatrices {
            ehat: gram(table, &z_phi_z, &rev_phi_z)?,
            a: gram(table, &z_phi_z, phi)?,
            k: gram(table, phi_w, tphi_z)?,
            gamma: gram(table, phi_w, phi)?,
            k1: gram(table, &w_phi_w, &rev_tphi_z)?,
            gamma1: gram(table, &w_phi_w, phi)?,
            i: gram(table, phi, tphi)?,
            i1: gram(table, &rev_phi, tphi)?,
        })
    }

    fn residuals(&self, c: &CoefficientMatrices) -> Result<ResidualReport> {
        let (n, m) = (self.n as i32, self.m as i32);
        let phi = self.phi.vector_poly().to_vec();
        let rev_phi = self.phi.reverse_vector();
        let z_phi_z = shifted(self.phi_z.vector_poly(), 1, 0);
        let rev_phi_z = self.phi_z.reverse_vector();
        let phi_w = self.phi_w.vector_poly().to_vec();
        let w_phi_w = shifted(&phi_w, 0, 1);
        let rev_phi_w: Vec<LaurentPoly> = phi_w.iter().map(|p| p.reverse(n, m - 1)).collect::<Result<_>>()?;
        let tphi = self.tphi.vector_poly().to_vec();
        let tphi_z = self.tphi_z.vector_poly().to_vec();
        let rev_tphi_z = self.tphi_z.reverse_vector();

        let a_t_inv =
            c.a.transpose().try_inverse().ok_or_else(|| Error::InvalidInput("singular A coefficient".into()))?;
        let a_adj = c.a.adjoint();
        let mid = &a_adj * &c.ehat * a_t_inv;

        let mut rep = ResidualReport::default();
        rep.insert("z_step", vec_residual(&[apply(&c.a, &phi), neg(z_phi_z.clone()), apply(&c.ehat, &rev_phi_z)]));
        rep.insert("z_step_adjoint", vec_residual(&[phi.clone(), apply(&mid, &rev_phi), neg(apply(&a_adj, &z_phi_z))]));
        rep.insert("w_drop", vec_residual(&[apply(&c.gamma, &phi), neg(phi_w.clone()), apply(&c.k, &tphi_z)]));
        rep.insert("w_step", vec_residual(&[apply(&c.gamma1, &phi), neg(w_phi_w), apply(&c.k1, &rev_tphi_z)]));
        rep.insert(
            "lex_from_revlex",
            vec_residual(&[phi, neg(apply(&c.i, &tphi)), neg(apply(&c.gamma.adjoint(), &phi_w))]),
        );
        rep.insert(
            "reverse_from_revlex",
            vec_residual(&[rev_phi, neg(apply(&c.i1, &tphi)), neg(apply(&c.gamma1.transpose(), &rev_phi_w))]),
        );
        Ok(rep)
    }
}

fn families(table: &MomentTable, n: usize, m: usize) -> Result<(LevelFamily, MomentTable, LevelFamily)> {
    let lex = LevelFamily::new(table, n, m)?;
    let swapped = table.swapped();
    let tilde = LevelFamily::new(&swapped, m, n)?;
    Ok((lex, swapped, tilde))
}

/// All coefficient matrices at `(n, m)`, `n, m >= 1`.
pub fn compute_coefficients(table: &MomentTable, n: usize, m: usize) -> Result<RecurrenceSet> {
    let (lex, swapped, tilde) = families(table, n, m)?;
    Ok(RecurrenceSet { n, m, lex: lex.coefficients(table)?, tilde: tilde.coefficients(&swapped)? })
}

/// `(E^, A)` at `(n, m)` for `n >= 1`, `m >= 0`.
pub fn ehat_and_a(table: &MomentTable, n: usize, m: usize) -> Result<(CMat, CMat)> {
    if n == 0 {
        return Err(Error::InvalidInput("E^ needs n >= 1".into()));
    }
    let phi = orthonormalize(table, n, m, Ordering::Lex)?;
    let phi_z = orthonormalize(table, n - 1, m, Ordering::Lex)?;
    let z_phi_z = shifted(phi_z.vector_poly(), 1, 0);
    let ehat = gram(table, &z_phi_z, &phi_z.reverse_vector())?;
    let a = gram(table, &z_phi_z, phi.vector_poly())?;
    Ok((ehat, a))
}

/// Residuals of the six recurrences and of their tilde analogs at `(n, m)`.
pub fn verify_recurrences(table: &MomentTable, n: usize, m: usize) -> Result<ResidualReport> {
    let (lex, swapped, tilde) = families(table, n, m)?;
    let lc = lex.coefficients(table)?;
    let tc = tilde.coefficients(&swapped)?;
    let mut rep = lex.residuals(&lc)?;
    rep.merge("tilde_", tilde.residuals(&tc)?);
    let k_adj = frob(&(&tc.k - lc.k.adjoint()));
    let k1_t = frob(&(&tc.k1 - lc.k1.transpose()));
    rep.insert("tilde_k_adjoint", k_adj);
    rep.insert("tilde_k1_transpose", k1_t);
    Ok(rep)
}

/// Residuals of the coefficient identities linking levels `(k, l)`, `(k+1, l)`
/// and `(k+1, l-1)`, for `k, l >= 1`. When `E^[k+1,l]` and `E^[k+1,l-1]` are
/// both below `vanish_tol` the simplified consequences are reported too.
pub fn verify_identities(table: &MomentTable, k: usize, l: usize, vanish_tol: f64) -> Result<ResidualReport> {
    let here = compute_coefficients(table, k, l)?;
    let next = compute_coefficients(table, k + 1, l)?;
    let (e_low, a_low) = ehat_and_a(table, k + 1, l - 1)?;
    let (t, tn) = (&here.tilde, &next.tilde);
    let e_next = &next.lex.ehat;

    let a_bar_inv =
        a_low.map(|x| x.conj()).try_inverse().ok_or_else(|| Error::InvalidInput("singular A coefficient".into()))?;
    let lhs = &tn.gamma1 * tn.gamma.adjoint();
    let rhs = t.gamma.adjoint() * &t.gamma1
        + &t.i * e_next * t.i1.transpose()
        + &tn.k1 * a_bar_inv * e_low.adjoint() * &a_low * tn.k.adjoint();

    let mut rep = ResidualReport::default();
    rep.insert("gamma_tilde_product", frob(&(lhs - rhs)));
    let l1 = &here.lex;
    rep.insert(
        "ehat_descent",
        frob(&(&e_low - (&l1.gamma * e_next * l1.gamma1.transpose() + &l1.k * l1.k1.transpose()))),
    );
    rep.insert("k_shift", frob(&(&l1.gamma * e_next * &l1.i1 - (&a_low * &next.lex.k - &l1.k * &t.gamma1))));
    rep.insert(
        "k1_shift",
        frob(
            &(l1.i.adjoint() * e_next * l1.gamma1.transpose()
                - (next.lex.k1.transpose() * a_low.transpose() - t.gamma.adjoint() * l1.k1.transpose())),
        ),
    );
    if frob(e_next) <= vanish_tol && frob(&e_low) <= vanish_tol {
        rep.insert("k_k1_orthogonal", frob(&(&l1.k * l1.k1.transpose())));
        rep.insert("gamma_tilde_commute", frob(&(&tn.gamma1 * tn.gamma.adjoint() - t.gamma.adjoint() * &t.gamma1)));
        rep.insert("k_propagation", frob(&(&next.lex.k - &l1.k * &t.gamma1)));
        rep.insert("k1_propagation", frob(&(next.lex.k1.transpose() - t.gamma.adjoint() * l1.k1.transpose())));
    }
    Ok(rep)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScanRow {
    pub k: usize,
    pub l: usize,
    pub ehat_norm: Option<f64>,
    pub ehat_tilde_norm: Option<f64>,
}

/// Frobenius norms of `E^[k,l]` and its tilde analog over a window.
/// Entries that need `k = 0` (resp. `l = 0`) are `None`.
pub fn ehat_scan(table: &MomentTable, ks: &[usize], ls: &[usize]) -> Result<Vec<ScanRow>> {
    let (kk, ll) = (ks.iter().max().copied().unwrap_or(0), ls.iter().max().copied().unwrap_or(0));
    if kk > table.k_max() || ll > table.l_max() {
        return Err(Error::SupportExceeded(format!(
            "scan window up to ({kk},{ll}) exceeds moment range {}x{}",
            table.k_max(),
            table.l_max()
        )));
    }
    let swapped = table.swapped();
    let mut out = Vec::new();
    for &k in ks {
        for &l in ls {
            let ehat_norm = if k >= 1 { Some(frob(&ehat_and_a(table, k, l)?.0)) } else { None };
            let ehat_tilde_norm = if l >= 1 { Some(frob(&ehat_and_a(&swapped, l, k)?.0)) } else { None };
            out.push(ScanRow { k, l, ehat_norm, ehat_tilde_norm });
        }
    }
    Ok(out)
}
