//! Orthonormal vector polynomials of a level `(n, m)` in lexicographical and
//! reverse lexicographical order.

use nalgebra::Cholesky;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_extremes, mat_serde, CMat};
use crate::moments::{MomentTable, Ordering};
use crate::poly::{LaurentPoly, C64};

pub const SINGULAR_REL: f64 = 1e-10;

/// Orthonormal polynomials of one level.
///
/// Lex: row `r` of `coeff_matrix` holds `phi^{m-r}`; column `c` multiplies the
/// monomial of lex rank `N-1-c`, so the columns run `z^n w^m, z^n w^{m-1}, ..., 1`
/// with `N = (n+1)(m+1)`. Revlex is the same with the roles of the variables
/// exchanged (columns `w^m z^n, w^m z^{n-1}, ..., 1`).
#[derive(Clone, Debug, Serialize)]
pub struct OrthoLevel {
    pub n: usize,
    pub m: usize,
    pub ordering: Ordering,
    #[serde(with = "mat_serde")]
    pub coeff_matrix: CMat,
    pub pivots: Vec<f64>,
    #[serde(skip)]
    polys: Vec<LaurentPoly>,
}

/// Gram matrix `<x_a, x_b> = c[j-i, t-s]` of the lex monomials `x_a = z^i w^s`.
fn lex_gram(table: &MomentTable, n: usize, m: usize) -> CMat {
    let dim = (n + 1) * (m + 1);
    CMat::from_fn(dim, dim, |a, b| {
        let (i, s) = ((a / (m + 1)) as i32, (a % (m + 1)) as i32);
        let (j, t) = ((b / (m + 1)) as i32, (b % (m + 1)) as i32);
        table.c(j - i, t - s)
    })
}

fn orthonormalize_lex(table: &MomentTable, n: usize, m: usize) -> Result<OrthoLevel> {
    if n > table.k_max() || m > table.l_max() {
        return Err(Error::LevelExceedsMoments { n, m, k: table.k_max(), l: table.l_max() });
    }
    let g = lex_gram(table, n, m);
    let (lo, hi) = hermitian_extremes(&g);
    if !(lo > SINGULAR_REL * hi) {
        return Err(Error::NotPositiveDefinite { n, m, min_eig: lo });
    }
    let chol = Cholesky::new(g.clone()).ok_or(Error::NotPositiveDefinite { n, m, min_eig: lo })?;
    let dim = g.nrows();
    let l = chol.l();
    let t =
        l.solve_lower_triangular(&CMat::identity(dim, dim)).ok_or(Error::NotPositiveDefinite { n, m, min_eig: lo })?;

    let rows = m + 1;
    let mut coeff_matrix = CMat::zeros(rows, dim);
    let mut pivots = Vec::with_capacity(rows);
    let mut polys = Vec::with_capacity(rows);
    for r in 0..rows {
        let s = m - r;
        let a = n * (m + 1) + s;
        for b in 0..=a {
            coeff_matrix[(r, dim - 1 - b)] = t[(a, b)];
        }
        for b in a + 1..dim {
            coeff_matrix[(r, dim - 1 - b)] = C64::new(0.0, 0.0);
        }
        let pivot = t[(a, a)].re;
        coeff_matrix[(r, dim - 1 - a)] = C64::new(pivot, 0.0);
        pivots.push(pivot);
        let grid: Vec<C64> = (0..dim).map(|b| coeff_matrix[(r, dim - 1 - b)]).collect();
        polys.push(LaurentPoly::from_grid(0, n as i32, 0, m as i32, grid)?);
    }
    Ok(OrthoLevel { n, m, ordering: Ordering::Lex, coeff_matrix, pivots, polys })
}

/// Orthonormal polynomials of level `(n, m)`, built from a Cholesky factor of
/// the moment matrix with a positive pivot in every row.
pub fn orthonormalize(table: &MomentTable, n: usize, m: usize, ordering: Ordering) -> Result<OrthoLevel> {
    match ordering {
        Ordering::Lex => orthonormalize_lex(table, n, m),
        Ordering::Revlex => {
            let sw = orthonormalize_lex(&table.swapped(), m, n).map_err(|e| match e {
                Error::LevelExceedsMoments { .. } => {
                    Error::LevelExceedsMoments { n, m, k: table.k_max(), l: table.l_max() }
                }
                Error::NotPositiveDefinite { min_eig, .. } => Error::NotPositiveDefinite { n, m, min_eig },
                other => other,
            })?;
            Ok(OrthoLevel {
                n,
                m,
                ordering: Ordering::Revlex,
                coeff_matrix: sw.coeff_matrix,
                pivots: sw.pivots,
                polys: sw.polys.iter().map(LaurentPoly::swap_vars).collect(),
            })
        }
    }
}

impl OrthoLevel {
    /// Entries top to bottom: `phi^m, ..., phi^0` (revlex: `phi~^n, ..., phi~^0`).
    pub fn vector_poly(&self) -> &[LaurentPoly] {
        &self.polys
    }

    /// Entrywise `z^n w^m conj(phi)(1/z, 1/w)`.
    pub fn reverse_vector(&self) -> Vec<LaurentPoly> {
        self.polys
            .iter()
            .map(|p| p.reverse(self.n as i32, self.m as i32).expect("level polynomial within degree"))
            .collect()
    }

    pub fn evaluate(&self, z: C64, w: C64) -> Vec<C64> {
        self.polys.iter().map(|p| p.evaluate(z, w).expect("polynomial")).collect()
    }

    pub fn evaluate_reverse(&self, z: C64, w: C64) -> Vec<C64> {
        self.reverse_vector().iter().map(|p| p.evaluate(z, w).expect("polynomial")).collect()
    }

    /// `Phi(z,w) = M(z) (w^m, ..., 1)^T` for a lex level.
    pub fn matrix_poly_z(&self) -> Result<MatrixPoly> {
        if self.ordering != Ordering::Lex {
            return Err(Error::InvalidInput("matrix polynomial in z needs a lex level".into()));
        }
        let size = self.m + 1;
        let coeffs = (0..=self.n)
            .map(|k| CMat::from_fn(size, size, |r, c| self.polys[r].coeff(k as i32, (self.m - c) as i32)))
            .collect();
        Ok(MatrixPoly { degree: self.n, coeffs })
    }
}

/// Matrix polynomial `sum_k M_k z^k`.
#[derive(Clone, Debug)]
pub struct MatrixPoly {
    pub degree: usize,
    pub coeffs: Vec<CMat>,
}

impl MatrixPoly {
    pub fn evaluate(&self, z: C64) -> CMat {
        let size = self.coeffs[0].nrows();
        let mut acc = CMat::zeros(size, size);
        for m in self.coeffs.iter().rev() {
            acc = acc * z + m;
        }
        acc
    }

    /// `z^n conj(M(1/conj z))^T`.
    pub fn reverse_evaluate(&self, z: C64) -> CMat {
        let size = self.coeffs[0].nrows();
        let mut acc = CMat::zeros(size, size);
        for m in self.coeffs.iter() {
            acc = acc * z + m.adjoint();
        }
        acc
    }

    pub fn determinant(&self, z: C64) -> C64 {
        self.evaluate(z).determinant()
    }
}

/// The levels entering the Christoffel-Darboux identities at `(n, m)`.
pub struct CdLevels {
    pub phi: OrthoLevel,
    pub phi_w: OrthoLevel,
    pub tphi: OrthoLevel,
    pub tphi_z: OrthoLevel,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CdResidual {
    pub res32: f64,
    pub res33: f64,
}

impl CdLevels {
    /// Needs `n, m >= 1`.
    pub fn new(table: &MomentTable, n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidInput("Christoffel-Darboux levels need n, m >= 1".into()));
        }
        Ok(CdLevels {
            phi: orthonormalize(table, n, m, Ordering::Lex)?,
            phi_w: orthonormalize(table, n, m - 1, Ordering::Lex)?,
            tphi: orthonormalize(table, n, m, Ordering::Revlex)?,
            tphi_z: orthonormalize(table, n - 1, m, Ordering::Revlex)?,
        })
    }

    /// Residuals of the two kernel identities at `(z, w)`, `(z1, w1)`.
    pub fn residual(&self, z: C64, w: C64, z1: C64, w1: C64) -> CdResidual {
        let kernel = |a: Vec<C64>, b: Vec<C64>| -> C64 { a.iter().zip(&b).map(|(x, y)| x * y.conj()).sum() };
        let k_phi = kernel(self.phi.evaluate(z, w), self.phi.evaluate(z1, w1));
        let k_phi_w = kernel(self.phi_w.evaluate(z, w), self.phi_w.evaluate(z1, w1));
        let k_t = kernel(self.tphi.evaluate(z, w), self.tphi.evaluate(z1, w1));
        let k_tz = kernel(self.tphi_z.evaluate(z, w), self.tphi_z.evaluate(z1, w1));
        let k_rt = kernel(self.tphi.evaluate_reverse(z, w), self.tphi.evaluate_reverse(z1, w1));
        let k_rtz = kernel(self.tphi_z.evaluate_reverse(z, w), self.tphi_z.evaluate_reverse(z1, w1));
        let ww = w * w1.conj();
        let lhs32 = k_rt - k_rtz - ww * (k_t - k_tz);
        let rhs32 = (C64::new(1.0, 0.0) - ww) * k_phi;
        CdResidual { res32: (lhs32 - rhs32).norm(), res33: ((k_phi - k_phi_w) - (k_t - k_tz)).norm() }
    }
}

/// Christoffel-Darboux residuals at one pair of points.
pub fn cd_residual(levels: &CdLevels, z: C64, w: C64, z1: C64, w1: C64) -> CdResidual {
    levels.residual(z, w, z1, w1)
}
