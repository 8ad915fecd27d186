//! Univariate Toeplitz structure of the functional obtained by freezing
//! `z = e^{i theta}`: parametric moments, Szego polynomials and the
//! Gohberg-Semencul inverse.

use std::f64::consts::PI;

use nalgebra::Cholesky;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{frob, CMat};
use crate::moments::{MomentTable, QuadratureConfig};
use crate::orthopoly::{orthonormalize, OrthoLevel};
use crate::poly::{LaurentPoly, C64};
use crate::recurrence::ResidualReport;
use crate::Ordering;

/// Moments `c^[l] = (1/2pi) int e^{-il phi} / |p(e^{i theta}, e^{i phi})|^2 dphi`.
#[derive(Clone, Debug)]
pub struct ParametricFunctional {
    pub theta: f64,
    l_max: usize,
    moments: Vec<C64>,
    pub grid_size: usize,
    pub converged: bool,
}

fn sampled_moments(coeffs: &[C64], l_max: usize, n: usize) -> Result<Vec<C64>> {
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for (l, c) in coeffs.iter().enumerate() {
        buf[l % n] += c;
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(n).process(&mut buf);
    let mut recip = Vec::with_capacity(n);
    for v in &buf {
        let q = v.norm_sqr();
        if !(q > 0.0) {
            return Err(Error::NotPositive { min: q });
        }
        recip.push(C64::new(1.0 / q, 0.0));
    }
    planner.plan_fft_forward(n).process(&mut recip);
    let scale = 1.0 / n as f64;
    Ok((-(l_max as i32)..=l_max as i32).map(|l| recip[l.rem_euclid(n as i32) as usize] * scale).collect())
}

/// Parametric moments of `1 / |p(e^{i theta}, .)|^2` for `|l| <= l_max`.
pub fn parametric_moments(
    p: &LaurentPoly,
    theta: f64,
    l_max: usize,
    config: &QuadratureConfig,
) -> Result<ParametricFunctional> {
    let slice = w_slice(p, theta)?;
    let need = (2 * (l_max.max(slice.len())) + 2).next_power_of_two();
    let mut n = config.initial.max(need).next_power_of_two();
    let mut prev = sampled_moments(&slice, l_max, n)?;
    loop {
        let next_n = 2 * n;
        let cur = sampled_moments(&slice, l_max, next_n)?;
        let delta = prev.iter().zip(&cur).fold(0.0, |m: f64, (a, b)| m.max((a - b).norm()));
        if delta <= config.tol || next_n >= config.max {
            return Ok(ParametricFunctional {
                theta,
                l_max,
                moments: cur,
                grid_size: next_n,
                converged: delta <= config.tol,
            });
        }
        prev = cur;
        n = next_n;
    }
}

/// Coefficients of `w^0, ..., w^m` of `p(e^{i theta}, w)`.
pub fn w_slice(p: &LaurentPoly, theta: f64) -> Result<Vec<C64>> {
    if p.l_min() < 0 {
        return Err(Error::InvalidDegree("parametric slice needs nonnegative powers of w".into()));
    }
    let s = p.slice_in_w(C64::from_polar(1.0, theta));
    Ok(s)
}

impl ParametricFunctional {
    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn c(&self, l: i32) -> C64 {
        assert!(l.unsigned_abs() as usize <= self.l_max, "parametric moment {l} out of range");
        self.moments[(l + self.l_max as i32) as usize]
    }

    /// `(order+1) x (order+1)` matrix with entries `c^[i-j]`.
    pub fn toeplitz(&self, order: usize) -> CMat {
        CMat::from_fn(order + 1, order + 1, |i, j| self.c(i as i32 - j as i32))
    }

    /// `<f, g>` for coefficient vectors ascending in `w`.
    pub fn inner_product(&self, f: &[C64], g: &[C64]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (i, fi) in f.iter().enumerate() {
            for (j, gj) in g.iter().enumerate() {
                acc += fi * gj.conj() * self.c(j as i32 - i as i32);
            }
        }
        acc
    }

    /// Orthonormal polynomial of degree `l` with positive leading coefficient,
    /// coefficients ascending in `w`.
    pub fn orthonormal_poly(&self, l: usize) -> Result<Vec<C64>> {
        let g = CMat::from_fn(l + 1, l + 1, |i, j| self.c(j as i32 - i as i32));
        let chol = Cholesky::new(g).ok_or(Error::NotPositiveDefinite { n: 0, m: l, min_eig: 0.0 })?;
        let t = chol.l().solve_lower_triangular(&CMat::identity(l + 1, l + 1)).ok_or(Error::NotPositiveDefinite {
            n: 0,
            m: l,
            min_eig: 0.0,
        })?;
        Ok((0..=l).map(|j| t[(l, j)]).collect())
    }
}

/// Inverse of the `l x l` Toeplitz matrix `[c^[i-j]]` from the coefficients
/// `r_0, ..., r_l` of the reversed orthonormal polynomial of degree `l`:
/// `L1 L1^dagger - L2 L2^dagger` with lower triangular Toeplitz factors whose
/// first columns are `(r_0, ..., r_{l-1})` and `(conj r_l, ..., conj r_1)`.
pub fn gohberg_semencul_inverse(r: &[C64]) -> Result<CMat> {
    if r.len() < 2 {
        return Err(Error::InvalidInput("need at least r_0 and r_1".into()));
    }
    let l = r.len() - 1;
    let l1 = CMat::from_fn(l, l, |i, j| if i >= j { r[i - j] } else { C64::new(0.0, 0.0) });
    let l2 = CMat::from_fn(l, l, |i, j| if i >= j { r[l - (i - j)].conj() } else { C64::new(0.0, 0.0) });
    Ok(&l1 * l1.adjoint() - &l2 * l2.adjoint())
}

/// Parametric orthogonality of a factor `p` nonzero on `|z| = 1, |w| <= 1`
/// at `z = e^{i theta}`, with `m` the degree of `p` in `w`.
pub fn parametric_ortho_check(
    p: &LaurentPoly,
    theta: f64,
    m: usize,
    config: &QuadratureConfig,
) -> Result<ResidualReport> {
    let pf = parametric_moments(p, theta, m, config)?;
    let mut s = w_slice(p, theta)?;
    if s.len() > m + 1 {
        return Err(Error::InvalidDegree(format!("w-degree {} exceeds {m}", s.len() - 1)));
    }
    s.resize(m + 1, C64::new(0.0, 0.0));
    let rev: Vec<C64> = s.iter().rev().map(|c| c.conj()).collect();
    let mono = |l: usize| -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); l + 1];
        v[l] = C64::new(1.0, 0.0);
        v
    };
    let mut rep = ResidualReport::default();
    rep.insert(
        "factor_orthogonal_to_positive_powers",
        (1..=m).map(|l| pf.inner_product(&s, &mono(l)).norm()).fold(0.0, f64::max),
    );
    rep.insert(
        "reverse_orthogonal_to_lower_powers",
        (0..m).map(|l| pf.inner_product(&rev, &mono(l)).norm()).fold(0.0, f64::max),
    );
    rep.insert("factor_norm", (pf.inner_product(&s, &s).re - 1.0).abs());
    if m >= 1 {
        let inv = gohberg_semencul_inverse(&s)?;
        let dense = pf
            .toeplitz(m - 1)
            .try_inverse()
            .ok_or_else(|| Error::InvalidInput("singular parametric Toeplitz matrix".into()))?;
        rep.insert("gohberg_semencul", frob(&(inv - &dense)) / frob(&dense));
    }
    Ok(rep)
}

/// Relative deviation between the parametric Toeplitz matrix of order `m` and
/// `(M(z)^dagger M(z))^{-1}` with `M` the matrix polynomial of the lex level
/// `(n, m)` at `z = e^{i theta}`.
pub fn matrix_weight_defect(
    table: &MomentTable,
    p: &LaurentPoly,
    n: usize,
    m: usize,
    theta: f64,
    config: &QuadratureConfig,
) -> Result<f64> {
    let level: OrthoLevel = orthonormalize(table, n, m, Ordering::Lex)?;
    let mp = level.matrix_poly_z()?;
    let z = C64::from_polar(1.0, theta);
    let mz = mp.evaluate(z);
    let weight =
        (mz.adjoint() * &mz).try_inverse().ok_or_else(|| Error::InvalidInput("singular matrix weight".into()))?;
    let pf = parametric_moments(p, theta, m, config)?;
    let cm = pf.toeplitz(m);
    Ok(frob(&(weight - &cm)) / frob(&cm))
}

/// Evenly spaced sample angles `2 pi j / count`.
pub fn sample_angles(count: usize) -> Vec<f64> {
    (0..count).map(|j| 2.0 * PI * j as f64 / count as f64).collect()
}
