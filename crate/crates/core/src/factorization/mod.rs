//! Factorization classes read off the recurrence coefficients, and the
//! construction of the factor nonzero for `|z| = 1, |w| <= 1`.

mod align;
mod splitting;

pub use align::{condition_scale, invariant_subspace_rotation, kernel_svd_align, Alignment, Rotation};
pub use splitting::verify_splitting_structure;

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{complete_basis, frob, mat_pow, mat_serde, unitary_defect, CMat};
use crate::moments::{compute_moments, inner_product, MomentTable, Ordering, QuadratureConfig, WeightSpec};
use crate::orthopoly::{orthonormalize, OrthoLevel};
use crate::poly::{combine, LaurentPoly, C64};
use crate::recurrence::{compute_coefficients, RecurrenceSet, ResidualReport};
use crate::stability::{stable_bidisk, Verdict};

pub const DEFAULT_TOL: f64 = 1e-8;
const ISOMETRY_TOL: f64 = 1e-8;
const CROSS_CHECK_TOL: f64 = 1e-7;
const VERIFY_TOL: f64 = 1e-6;
const VERIFY_GRID: usize = 64;

/// Norms of the vanishing conditions and the factorization classes they imply.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub n: usize,
    pub m: usize,
    /// `||K (G1~ G~^dagger)^j K1^T||_F` for `j = 0..n-1`.
    pub residuals_z: Vec<f64>,
    /// `||K^dagger (G1 G^dagger)^l K1||_F` for `l = 0..m-1`.
    pub residuals_w: Vec<f64>,
    pub k_norm: f64,
    pub k1_norm: f64,
    pub tol: f64,
    pub scale: f64,
    pub one_sided_z: bool,
    pub one_sided_w: bool,
    pub splitting: bool,
    pub stable: bool,
    pub anti_stable: bool,
    pub tensor: bool,
}

impl ConditionReport {
    /// Most specific class: `tensor`, `stable`, `anti_stable`, `splitting`,
    /// `one_sided_z`, `one_sided_w` or `none`.
    pub fn class(&self) -> &'static str {
        if self.tensor {
            "tensor"
        } else if self.stable {
            "stable"
        } else if self.anti_stable {
            "anti_stable"
        } else if self.splitting {
            "splitting"
        } else if self.one_sided_z {
            "one_sided_z"
        } else if self.one_sided_w {
            "one_sided_w"
        } else {
            "none"
        }
    }
}

/// Evaluates both families of vanishing conditions against `tol * scale`,
/// `scale = max(1, ||K||, ||K1||)`.
pub fn check_conditions(rs: &RecurrenceSet, tol: f64) -> ConditionReport {
    let (k, k1) = (&rs.lex.k, &rs.lex.k1);
    let gz = &rs.tilde.gamma1 * rs.tilde.gamma.adjoint();
    let gw = &rs.lex.gamma1 * rs.lex.gamma.adjoint();
    let k1t = k1.transpose();
    let k_adj = k.adjoint();
    let residuals_z: Vec<f64> = (0..rs.n).map(|j| frob(&(k * mat_pow(&gz, j) * &k1t))).collect();
    let residuals_w: Vec<f64> = (0..rs.m).map(|l| frob(&(&k_adj * mat_pow(&gw, l) * k1))).collect();
    let (k_norm, k1_norm) = (frob(k), frob(k1));
    let scale = condition_scale(k, k1);
    let thr = tol * scale;
    let stable = k_norm <= thr;
    let anti_stable = k1_norm <= thr;
    let one_sided_z = stable || anti_stable || residuals_z.iter().all(|&r| r <= thr);
    let one_sided_w = stable || anti_stable || residuals_w.iter().all(|&r| r <= thr);
    ConditionReport {
        n: rs.n,
        m: rs.m,
        residuals_z,
        residuals_w,
        k_norm,
        k1_norm,
        tol,
        scale,
        one_sided_z,
        one_sided_w,
        splitting: one_sided_z && one_sided_w,
        stable,
        anti_stable,
        tensor: stable && anti_stable,
    }
}

/// Every intermediate of the one-sided construction.
#[derive(Clone, Debug, Serialize)]
pub struct FactorizationWork {
    pub n: usize,
    pub m: usize,
    #[serde(with = "mat_serde")]
    pub u: CMat,
    #[serde(with = "mat_serde")]
    pub u1: CMat,
    /// Column basis after the block rotation has been folded in.
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
    /// `U~^dagger G1~ G~^dagger U~` before the rotation.
    #[serde(with = "mat_serde")]
    pub g: CMat,
    #[serde(with = "mat_serde")]
    pub e_tilde: CMat,
    pub n1: usize,
    pub n2: usize,
    #[serde(with = "mat_serde")]
    pub v_tilde: CMat,
    pub psi_tilde: LaurentPoly,
    pub p: LaurentPoly,
    pub diagnostics: ResidualReport,
}

/// Unitary `V~` with `V~^dagger Phi~_{n,m} = (psi~, z Psi~1, Psi~2)` where
/// `Psi~ = U~^dagger Phi~_{n-1,m}` is split after its first `n1` entries.
///
/// The first column phase is fixed so that the largest coefficient of the
/// reversed `psi~` is real and positive.
pub fn complete_unitary(
    table: &MomentTable,
    n: usize,
    m: usize,
    u_tilde: &CMat,
    n1: usize,
    n2: usize,
) -> Result<(CMat, LaurentPoly, LaurentPoly)> {
    if u_tilde.shape() != (n, n) || n1 + n2 != n {
        return Err(Error::DimensionMismatch(format!("U~ is {:?}, blocks {n1}+{n2}, level n = {n}", u_tilde.shape())));
    }
    let top = orthonormalize(table, n, m, Ordering::Revlex)?;
    let basis = top.vector_poly();
    let psi: Vec<LaurentPoly> = if n == 0 {
        Vec::new()
    } else {
        let low = orthonormalize(table, n - 1, m, Ordering::Revlex)?;
        let adj = u_tilde.adjoint();
        (0..n)
            .map(|i| {
                let row: Vec<C64> = adj.row(i).iter().cloned().collect();
                let f = combine(&row, low.vector_poly());
                if i < n1 {
                    f.shift(1, 0)
                } else {
                    f
                }
            })
            .collect()
    };
    let mut mm = CMat::zeros(n, n + 1);
    for (i, f) in psi.iter().enumerate() {
        for (s, g) in basis.iter().enumerate() {
            mm[(i, s)] = inner_product(table, f, g)?;
        }
    }
    let iso = frob(&(&mm * mm.adjoint() - CMat::identity(n, n)));
    if iso > ISOMETRY_TOL {
        return Err(Error::NotIsometry(iso));
    }
    let rows_as_cols = mm.transpose();
    let defect = frob(&(rows_as_cols.adjoint() * &rows_as_cols - CMat::identity(n, n)));
    if defect > ISOMETRY_TOL {
        return Err(Error::NullSpaceDegenerate);
    }
    let null = complete_basis(&orthonormal_columns(&rows_as_cols), n + 1);
    if null.ncols() != 1 {
        return Err(Error::NullSpaceDegenerate);
    }
    let mut v: DVector<C64> = null.column(0).into_owned();
    let v_row: Vec<C64> = v.iter().cloned().collect();
    let psi_tilde = combine(&v_row, basis);
    let p = psi_tilde.reverse(n as i32, m as i32)?;
    let pivot = p.terms().map(|(_, _, c)| c).fold(C64::new(0.0, 0.0), |best, c| {
        if c.norm() > best.norm() * (1.0 + 1e-9) {
            c
        } else {
            best
        }
    });
    let omega = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { C64::new(1.0, 0.0) };
    v *= omega.conj();
    let v_row: Vec<C64> = v.iter().cloned().collect();
    let psi_tilde = combine(&v_row, basis);
    let p = psi_tilde.reverse(n as i32, m as i32)?;
    let mut v_adj = CMat::zeros(n + 1, n + 1);
    for s in 0..=n {
        v_adj[(0, s)] = v[s];
    }
    for i in 0..n {
        for s in 0..=n {
            v_adj[(i + 1, s)] = mm[(i, s)];
        }
    }
    Ok((v_adj.adjoint(), psi_tilde, p))
}

/// Re-orthonormalizes columns that are already nearly orthonormal.
fn orthonormal_columns(a: &CMat) -> CMat {
    let mut cols = Vec::new();
    crate::linalg::extend_orthonormal(&mut cols, a.column_iter().map(|c| c.into_owned()), 0.0);
    crate::linalg::columns_to_mat(&cols, a.nrows())
}

fn circle(count: usize) -> impl Iterator<Item = C64> {
    (0..count).map(move |j| C64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.25) / count as f64))
}

fn dot_conj(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn sample_w() -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0)];
    for j in 0..5 {
        let t = 2.0 * PI * j as f64 / 5.0 + 0.3;
        out.push(C64::from_polar(0.45, t));
        out.push(C64::from_polar(1.0, t));
    }
    out
}

/// Relative residual of `p(z,w) conj(p(z,0)) = Phi_{n,m}(z,w)^T conj(Phi_{n,m}(z,0))`
/// at sample points with `|z| = 1`.
pub fn factor_cross_check(level: &OrthoLevel, p: &LaurentPoly) -> Result<f64> {
    let mut worst = 0.0f64;
    let mut size = 1.0f64;
    let zero = C64::new(0.0, 0.0);
    for z in circle(16) {
        let p0 = p.evaluate(z, zero)?;
        let phi0 = level.evaluate(z, zero);
        for w in sample_w() {
            let lhs = p.evaluate(z, w)? * p0.conj();
            let rhs = dot_conj(&level.evaluate(z, w), &phi0);
            size = size.max(rhs.norm());
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst / size)
}

/// `p = reverse(psi~)`, checked against the lex kernel relation.
pub fn extract_factor(table: &MomentTable, psi_tilde: &LaurentPoly, n: usize, m: usize) -> Result<LaurentPoly> {
    let p = psi_tilde.reverse(n as i32, m as i32)?;
    let level = orthonormalize(table, n, m, Ordering::Lex)?;
    let res = factor_cross_check(&level, &p)?;
    if res > CROSS_CHECK_TOL {
        return Err(Error::CrossCheckFailed(res));
    }
    Ok(p)
}

/// Largest deviation of `|p|^2` from the lex and revlex kernel differences
/// on a `grid x grid` torus sample.
pub fn kernel_identity_residuals(
    table: &MomentTable,
    p: &LaurentPoly,
    n: usize,
    m: usize,
    grid: usize,
) -> Result<(f64, f64)> {
    let phi = orthonormalize(table, n, m, Ordering::Lex)?;
    let phi_w = orthonormalize(table, n, m - 1, Ordering::Lex)?;
    let tphi = orthonormalize(table, n, m, Ordering::Revlex)?;
    let tphi_z = orthonormalize(table, n - 1, m, Ordering::Revlex)?;
    let sq = |v: &[C64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>();
    let (mut lex, mut revlex) = (0.0f64, 0.0f64);
    for z in circle(grid) {
        for w in circle(grid) {
            let target = p.evaluate(z, w)?.norm_sqr();
            lex = lex.max((sq(&phi.evaluate(z, w)) - sq(&phi_w.evaluate(z, w)) - target).abs());
            revlex = revlex.max((sq(&tphi.evaluate(z, w)) - sq(&tphi_z.evaluate(z, w)) - target).abs());
        }
    }
    Ok((lex, revlex))
}

/// Residual of the two-point kernel relation
/// `p(z,w) conj p(z,w1) - w conj(w1) <-p(z,w) conj <-p(z,w1) = (1 - w conj w1) Phi(z,w)^T conj Phi(z,w1)`
/// on `|z| = 1`, with `<-p` the reverse of `p`.
pub fn two_point_residual(level: &OrthoLevel, p: &LaurentPoly) -> Result<f64> {
    let rev = p.reverse(level.n as i32, level.m as i32)?;
    let pts = sample_w();
    let mut worst = 0.0f64;
    for z in circle(8) {
        for &w in &pts {
            for &w1 in &pts {
                let lhs = p.evaluate(z, w)? * p.evaluate(z, w1)?.conj()
                    - w * w1.conj() * rev.evaluate(z, w)? * rev.evaluate(z, w1)?.conj();
                let rhs =
                    (C64::new(1.0, 0.0) - w * w1.conj()) * dot_conj(&level.evaluate(z, w), &level.evaluate(z, w1));
                worst = worst.max((lhs - rhs).norm());
            }
        }
    }
    Ok(worst)
}

/// Result of the end-to-end construction. `work` and `p` are absent when the
/// one-sided condition fails.
#[derive(Clone, Debug, Serialize)]
pub struct FactorOutcome {
    pub report: ConditionReport,
    pub p: Option<LaurentPoly>,
    pub work: Option<FactorizationWork>,
    pub moments_grid: usize,
    pub moments_converged: bool,
}

/// Largest `| |p|^2 / Q - 1 |` on a torus grid, or for explicit moments the
/// largest moment deviation from the weight `1 / |p|^2`.
pub fn weight_defect(
    weight: &WeightSpec,
    table: &MomentTable,
    p: &LaurentPoly,
    config: &QuadratureConfig,
) -> Result<f64> {
    let q = match weight {
        WeightSpec::ReciprocalModSquare(p0) => p0.herm_square(),
        WeightSpec::ReciprocalTrigPoly(q) => q.clone(),
        WeightSpec::ExplicitMoments(_) => {
            let mine =
                compute_moments(&WeightSpec::ReciprocalModSquare(p.clone()), table.k_max(), table.l_max(), config)?;
            let mut worst = 0.0f64;
            for (k, l, c) in table.half_entries() {
                worst = worst.max((mine.c(k, l) - c).norm());
            }
            return Ok(worst);
        }
    };
    let ps = p.herm_square();
    let mut worst = 0.0f64;
    for z in circle(VERIFY_GRID) {
        for w in circle(VERIFY_GRID) {
            let ratio = ps.evaluate(z, w)?.re / q.evaluate(z, w)?.re;
            worst = worst.max((ratio - 1.0).abs());
        }
    }
    Ok(worst)
}

/// Moments, coefficients, conditions, alignment, rotation, completion and
/// extraction at level `(n, m)`, `n, m >= 1`, followed by verification of the
/// recovered factor against the weight.
pub fn factor_one_sided(
    weight: &WeightSpec,
    n: usize,
    m: usize,
    tol: f64,
    config: &QuadratureConfig,
) -> Result<FactorOutcome> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidDegree(format!("factorization level ({n},{m}) needs n, m >= 1")));
    }
    let table = compute_moments(weight, n, m, config)?;
    let rs = compute_coefficients(&table, n, m)?;
    let report = check_conditions(&rs, tol);
    let (moments_grid, moments_converged) = (table.grid_size(), table.converged());
    if !report.one_sided_z {
        return Ok(FactorOutcome { report, p: None, work: None, moments_grid, moments_converged });
    }
    let work = construct(&table, &rs, tol)?;
    let mut work = work;
    let defect = weight_defect(weight, &table, &work.p, config)?;
    work.diagnostics.insert("weight_defect", defect);
    if defect > VERIFY_TOL {
        let detail = serde_json::to_string(&work.diagnostics)?;
        return Err(Error::VerificationFailed(detail));
    }
    let p = work.p.clone();
    Ok(FactorOutcome { report, p: Some(p), work: Some(work), moments_grid, moments_converged })
}

/// The construction on an already computed table and coefficient set.
pub fn construct(table: &MomentTable, rs: &RecurrenceSet, tol: f64) -> Result<FactorizationWork> {
    let (n, m) = (rs.n, rs.m);
    let (k, k1) = (&rs.lex.k, &rs.lex.k1);
    let al = kernel_svd_align(k, k1, tol)?;
    let gz = &rs.tilde.gamma1 * rs.tilde.gamma.adjoint();
    let g = al.u_tilde.adjoint() * &gz * &al.u_tilde;
    let rot = invariant_subspace_rotation(&g, al.r, al.r1, tol)?;
    let u_tilde = &al.u_tilde * &rot.e_tilde;
    let (v_tilde, psi_tilde, _) = complete_unitary(table, n, m, &u_tilde, rot.n1, rot.n2)?;
    let p = extract_factor(table, &psi_tilde, n, m)?;

    let mut diagnostics = ResidualReport::default();
    let folded = Alignment { u_tilde: u_tilde.clone(), ..al.clone() };
    let (rk, rk1) = folded.reconstruction_error(k, k1);
    diagnostics.insert("k_reconstruction", rk);
    diagnostics.insert("k1_reconstruction", rk1);
    diagnostics.insert("s_s1_product", frob(&(&al.s * al.s1.transpose())));
    diagnostics.insert("block_zero", rot.block_residual);
    diagnostics.insert("u_tilde_unitarity", unitary_defect(&u_tilde));
    diagnostics.insert("v_tilde_unitarity", unitary_defect(&v_tilde));
    let lex = orthonormalize(table, n, m, Ordering::Lex)?;
    diagnostics.insert("factor_cross_check", factor_cross_check(&lex, &p)?);
    diagnostics.insert("two_point_kernel", two_point_residual(&lex, &p)?);
    let (kl, kr) = kernel_identity_residuals(table, &p, n, m, 32)?;
    diagnostics.insert("lex_kernel_identity", kl);
    diagnostics.insert("revlex_kernel_identity", kr);

    Ok(FactorizationWork {
        n,
        m,
        u: al.u,
        u1: al.u1,
        u_tilde,
        s: al.s,
        s1: al.s1,
        r: al.r,
        r1: al.r1,
        singular_values: al.singular_values,
        singular_values1: al.singular_values1,
        g,
        e_tilde: rot.e_tilde,
        n1: rot.n1,
        n2: rot.n2,
        v_tilde,
        psi_tilde,
        p,
        diagnostics,
    })
}

/// `reverse(phi^m_{n,m})` when `K` vanishes, certified stable on the closed bidisk.
pub fn stable_case_factor(level: &OrthoLevel, rs: &RecurrenceSet, tol: f64) -> Result<LaurentPoly> {
    if level.ordering != Ordering::Lex || level.n != rs.n || level.m != rs.m {
        return Err(Error::DimensionMismatch("stable case needs the lex level matching the coefficients".into()));
    }
    let k_norm = frob(&rs.lex.k);
    if k_norm > tol * condition_scale(&rs.lex.k, &rs.lex.k1) {
        return Err(Error::NotStableCase(k_norm));
    }
    let p = level.vector_poly()[0].reverse(level.n as i32, level.m as i32)?;
    let cert = stable_bidisk(&p, 128, crate::stability::DEFAULT_TOL)?;
    if cert.verdict != Verdict::StableBidisk {
        return Err(Error::VerificationFailed(format!("stable-case factor verdict {:?}", cert.verdict)));
    }
    Ok(p)
}
