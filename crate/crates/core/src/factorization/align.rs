//! Joint singular value alignment of the two kernel coefficients and the
//! invariant subspace rotation that separates the z-shifted block.

use nalgebra::{DVector, SVD};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{columns_to_mat, complete_basis, extend_orthonormal, frob, mat_serde, phase_normalize, CMat};
use crate::poly::C64;

/// Factorizations `K = U S Ut^dagger`, `K1 = U1 S1 Ut^T`.
#[derive(Clone, Debug, Serialize)]
pub struct Alignment {
    #[serde(with = "mat_serde")]
    pub u: CMat,
    #[serde(with = "mat_serde")]
    pub u1: CMat,
    #[serde(with = "mat_serde")]
    pub u_tilde: CMat,
    #[serde(with = "mat_serde")]
    pub s: CMat,
    #[serde(with = "mat_serde")]
    pub s1: CMat,
    pub r: usize,
    pub r1: usize,
    pub singular_values: Vec<f64>,
    pub singular_values1: Vec<f64>,
    pub shared_left: bool,
}

/// Right singular pairs `(sigma, v)` above `thr`, descending, each `v`
/// phase-normalized.
fn right_singular(k: &CMat, thr: f64) -> Vec<(f64, DVector<C64>)> {
    let svd = SVD::new(k.clone(), false, true);
    let vt = svd.v_t.expect("requested");
    let mut pairs: Vec<(f64, DVector<C64>)> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s > thr)
        .map(|(i, s)| (*s, vt.row(i).adjoint()))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    for (_, v) in pairs.iter_mut() {
        phase_normalize(v.as_mut_slice());
    }
    pairs
}

fn largest_singular(k: &CMat) -> f64 {
    if k.is_empty() {
        return 0.0;
    }
    SVD::new(k.clone(), false, false).singular_values.iter().cloned().fold(0.0, f64::max)
}

pub fn condition_scale(k: &CMat, k1: &CMat) -> f64 {
    1f64.max(frob(k)).max(frob(k1))
}

/// Aligns the right singular spaces of `K` and `conj(K1)`.
///
/// Columns `1..r` of `Ut` are right singular vectors of `K`, the last `r1`
/// columns are conjugated right singular vectors of `K1`, and the middle
/// columns complete the basis. Singular values at or below
/// `max(max(m,n) 1e-12 sigma_max, tol scale)` count as zero.
pub fn kernel_svd_align(k: &CMat, k1: &CMat, tol: f64) -> Result<Alignment> {
    let (m, n) = k.shape();
    if k1.shape() != (m, n) {
        return Err(Error::DimensionMismatch(format!("K is {m}x{n}, K1 is {:?}", k1.shape())));
    }
    let scale = condition_scale(k, k1);
    let cross = frob(&(k * k1.transpose()));
    if cross > tol * scale {
        return Err(Error::ConditionViolated(cross));
    }
    let sigma_max = largest_singular(k).max(largest_singular(k1));
    let thr = (m.max(n) as f64 * 1e-12 * sigma_max).max(tol * scale);
    let first = right_singular(k, thr);
    let last = right_singular(k1, thr);
    let (r, r1) = (first.len(), last.len());
    if r + r1 > n {
        return Err(Error::RankOverflow { r, r1, n });
    }

    let mut head: Vec<DVector<C64>> = Vec::new();
    extend_orthonormal(&mut head, first.iter().map(|(_, v)| v.clone()), 0.0);
    let mut tail_basis = head.clone();
    extend_orthonormal(&mut tail_basis, last.iter().map(|(_, v)| v.map(|x| x.conj())), 0.0);
    let tail: Vec<DVector<C64>> = tail_basis[r..]
        .iter()
        .map(|v| {
            let mut v = v.clone();
            phase_normalize(v.as_mut_slice());
            v
        })
        .collect();
    let both = columns_to_mat(&tail_basis, n);
    let middle = complete_basis(&both, n);
    let mut u_tilde = CMat::zeros(n, n);
    for (j, v) in head.iter().enumerate() {
        u_tilde.set_column(j, v);
    }
    for j in 0..middle.ncols() {
        u_tilde.set_column(r + j, &middle.column(j));
    }
    for (j, v) in tail.iter().enumerate() {
        u_tilde.set_column(n - r1 + j, v);
    }

    let t: Vec<DVector<C64>> = (0..r).map(|i| (k * u_tilde.column(i)) / C64::new(first[i].0, 0.0)).collect();
    let t1: Vec<DVector<C64>> =
        (0..r1).map(|j| (k1 * u_tilde.column(n - r1 + j).map(|x| x.conj())) / C64::new(last[j].0, 0.0)).collect();

    let shared = frob(&(k.adjoint() * k1)) <= tol * scale && r + r1 <= m;
    let (u, u1) = if shared {
        let mut cols = Vec::new();
        extend_orthonormal(&mut cols, t.iter().cloned(), 0.0);
        extend_orthonormal(&mut cols, t1.iter().cloned(), 0.0);
        let mid = complete_basis(&columns_to_mat(&cols, m), m);
        let mut u = CMat::zeros(m, m);
        for (j, v) in cols[..r].iter().enumerate() {
            u.set_column(j, v);
        }
        for j in 0..mid.ncols() {
            u.set_column(r + j, &mid.column(j));
        }
        for (j, v) in cols[r..].iter().enumerate() {
            u.set_column(m - r1 + j, v);
        }
        (u.clone(), u)
    } else {
        let mut cols = Vec::new();
        extend_orthonormal(&mut cols, t.iter().cloned(), 0.0);
        let rest = complete_basis(&columns_to_mat(&cols, m), m);
        let mut u = CMat::zeros(m, m);
        for (j, v) in cols.iter().enumerate() {
            u.set_column(j, v);
        }
        for j in 0..rest.ncols() {
            u.set_column(r + j, &rest.column(j));
        }
        let mut cols1 = Vec::new();
        extend_orthonormal(&mut cols1, t1.iter().cloned(), 0.0);
        let rest1 = complete_basis(&columns_to_mat(&cols1, m), m);
        let mut u1 = CMat::zeros(m, m);
        for j in 0..rest1.ncols() {
            u1.set_column(j, &rest1.column(j));
        }
        for (j, v) in cols1.iter().enumerate() {
            u1.set_column(m - r1 + j, v);
        }
        (u, u1)
    };

    let mut s = CMat::zeros(m, n);
    for (i, (sv, _)) in first.iter().enumerate() {
        s[(i, i)] = C64::new(*sv, 0.0);
    }
    let mut s1 = CMat::zeros(m, n);
    for (j, (sv, _)) in last.iter().enumerate() {
        s1[(m - r1 + j, n - r1 + j)] = C64::new(*sv, 0.0);
    }
    Ok(Alignment {
        u,
        u1,
        u_tilde,
        s,
        s1,
        r,
        r1,
        singular_values: first.iter().map(|p| p.0).collect(),
        singular_values1: last.iter().map(|p| p.0).collect(),
        shared_left: shared,
    })
}

impl Alignment {
    /// `(||K - U S Ut^dagger||, ||K1 - U1 S1 Ut^T||)`.
    pub fn reconstruction_error(&self, k: &CMat, k1: &CMat) -> (f64, f64) {
        (
            frob(&(k - &self.u * &self.s * self.u_tilde.adjoint())),
            frob(&(k1 - &self.u1 * &self.s1 * self.u_tilde.transpose())),
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Rotation {
    #[serde(with = "mat_serde")]
    pub e_tilde: CMat,
    pub n1: usize,
    pub n2: usize,
    /// `||upper-right n1 x n2 block of E^dagger G E||_F`.
    pub block_residual: f64,
}

/// Unitary `E` fixing `e_1..e_r` and `e_{n-r1+1}..e_n` such that
/// `E^dagger G E` is block lower triangular with an `n1 x n2` zero block.
///
/// The first `n1` columns of `E` span the smallest `G^dagger`-invariant
/// subspace containing `e_1..e_r`; its orthogonal complement is then the
/// largest `G`-invariant subspace orthogonal to `e_1..e_r`, and must contain
/// the last `r1` standard basis vectors.
pub fn invariant_subspace_rotation(g: &CMat, r: usize, r1: usize, tol: f64) -> Result<Rotation> {
    let n = g.nrows();
    if r + r1 > n {
        return Err(Error::RankOverflow { r, r1, n });
    }
    let thr = tol * 1f64.max(frob(g));
    let unit = |i: usize| {
        let mut v = DVector::<C64>::zeros(n);
        v[i] = C64::new(1.0, 0.0);
        v
    };
    let g_adj = g.adjoint();
    let mut head: Vec<DVector<C64>> = (0..r).map(unit).collect();
    let mut frontier = head.clone();
    while !frontier.is_empty() && head.len() < n {
        let before = head.len();
        extend_orthonormal(&mut head, frontier.iter().map(|v| &g_adj * v), thr);
        frontier = head[before..].to_vec();
    }
    let n1 = head.len();
    let n2 = n - n1;
    let leak = head.iter().flat_map(|v| (n - r1..n).map(move |j| v[j].norm())).fold(0.0, f64::max);
    if n2 < r1 || leak > thr.max(tol) {
        return Err(Error::StructureUnattainable(leak));
    }
    let mut fixed = head.clone();
    fixed.extend((n - r1..n).map(unit));
    let middle = complete_basis(&columns_to_mat(&fixed, n), n);
    let mut e = CMat::zeros(n, n);
    for (j, v) in head.iter().enumerate() {
        e.set_column(j, v);
    }
    for j in 0..middle.ncols() {
        e.set_column(n1 + j, &middle.column(j));
    }
    for j in 0..r1 {
        e.set_column(n - r1 + j, &unit(n - r1 + j));
    }
    let rotated = e.adjoint() * g * &e;
    let block_residual = frob(&rotated.view((0, n1), (n1, n2)).into_owned());
    Ok(Rotation { e_tilde: e, n1, n2, block_residual })
}
