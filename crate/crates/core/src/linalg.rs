//! Dense complex matrix helpers on top of nalgebra.

use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::poly::C64;

pub type CMat = DMatrix<C64>;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.norm()))
}

/// `|| M^dagger M - I ||_F`.
pub fn unitary_defect(m: &CMat) -> f64 {
    let n = m.ncols();
    frob(&(m.adjoint() * m - CMat::identity(n, n)))
}

pub fn mat_pow(m: &CMat, k: usize) -> CMat {
    let mut out = CMat::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

/// Smallest and largest eigenvalue of a Hermitian matrix.
pub fn hermitian_extremes(m: &CMat) -> (f64, f64) {
    if m.nrows() == 0 {
        return (0.0, 0.0);
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = nalgebra::SymmetricEigen::new(sym);
    let lo = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Rotates `v` so that its largest-magnitude entry is real and positive.
/// Entries within a relative `1e-9` of the maximum count as ties; the first wins.
pub fn phase_normalize(v: &mut [C64]) {
    let big = v.iter().fold(0.0, |m: f64, x| m.max(x.norm()));
    if big == 0.0 {
        return;
    }
    let pivot = v.iter().find(|x| x.norm() >= big * (1.0 - 1e-9)).copied().unwrap();
    let phase = pivot.conj() / pivot.norm();
    for x in v.iter_mut() {
        *x *= phase;
    }
}

/// Orthonormal complement of the (orthonormal) columns of `basis` in `C^n`.
///
/// Standard basis vectors are projected against the growing basis and the one
/// with the largest residual is accepted at each step (two Gram-Schmidt passes).
pub fn complete_basis(basis: &CMat, n: usize) -> CMat {
    let mut cols: Vec<nalgebra::DVector<C64>> = basis.column_iter().map(|c| c.into_owned()).collect();
    let start = cols.len();
    while cols.len() < n {
        let mut best: Option<(f64, nalgebra::DVector<C64>)> = None;
        for i in 0..n {
            let mut v = nalgebra::DVector::<C64>::zeros(n);
            v[i] = c(1.0, 0.0);
            for _ in 0..2 {
                for q in &cols {
                    let proj = q.dotc(&v);
                    v -= q * proj;
                }
            }
            let nv = v.norm();
            if best.as_ref().map_or(true, |(b, _)| nv > *b + 1e-12) {
                best = Some((nv, v));
            }
        }
        let (nv, v) = best.expect("n > 0");
        cols.push(v / c(nv, 0.0));
    }
    let extra = &cols[start..];
    let mut out = CMat::zeros(n, extra.len());
    for (j, v) in extra.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

/// Orthonormalizes `candidates` against `basis` and against each other,
/// keeping only directions whose residual norm exceeds `thr`.
pub fn extend_orthonormal(
    basis: &mut Vec<nalgebra::DVector<C64>>,
    candidates: impl IntoIterator<Item = nalgebra::DVector<C64>>,
    thr: f64,
) -> usize {
    let mut added = 0;
    for mut v in candidates {
        for _ in 0..2 {
            for q in basis.iter() {
                let proj = q.dotc(&v);
                v -= q * proj;
            }
        }
        let nv = v.norm();
        if nv > thr {
            basis.push(v / c(nv, 0.0));
            added += 1;
        }
    }
    added
}

pub fn columns_to_mat(cols: &[nalgebra::DVector<C64>], n: usize) -> CMat {
    let mut out = CMat::zeros(n, cols.len());
    for (j, v) in cols.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

/// Nested `[[ [re, im], ... ], ...]` row-major JSON form of a matrix.
pub fn mat_to_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

pub fn rows_to_mat(rows: &[Vec<[f64; 2]>]) -> Result<CMat, String> {
    let nr = rows.len();
    let nc = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != nc) {
        return Err("ragged matrix rows".into());
    }
    Ok(CMat::from_fn(nr, nc, |i, j| c(rows[i][j][0], rows[i][j][1])))
}

/// `#[serde(with = "mat_serde")]` adapter for [`CMat`] fields.
pub mod mat_serde {
    use super::*;

    pub fn serialize<S: Serializer>(m: &CMat, s: S) -> Result<S::Ok, S::Error> {
        mat_to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<CMat, D::Error> {
        let rows = Vec::<Vec<[f64; 2]>>::deserialize(d)?;
        rows_to_mat(&rows).map_err(serde::de::Error::custom)
    }
}
