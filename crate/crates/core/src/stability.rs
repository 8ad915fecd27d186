//! Stability certificates for univariate and bivariate polynomials.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::{LaurentPoly, C64};

pub const DEFAULT_GRID: usize = 512;
pub const DEFAULT_TOL: f64 = 1e-10;
const TRIM_REL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SchurCohn {
    pub stable: bool,
    /// Smallest `1 - |reflection coefficient|` seen before the recursion ended.
    pub margin: f64,
}

fn trim_leading(c: &[C64]) -> &[C64] {
    let big = c.iter().fold(0.0, |m: f64, x| m.max(x.norm()));
    let mut d = c.len();
    while d > 0 && c[d - 1].norm() <= TRIM_REL * big {
        d -= 1;
    }
    &c[..d]
}

/// Decides whether `sum coeffs[j] w^j` has every root strictly outside the
/// closed unit disk, by repeated Schur transforms
/// `f -> conj(a_0) f - a_d f*` while `|a_d| < |a_0|`.
pub fn schur_cohn(coeffs: &[C64]) -> Result<SchurCohn> {
    let mut f: Vec<C64> = trim_leading(coeffs).to_vec();
    if f.is_empty() {
        return Err(Error::DegenerateLeadingCoefficient);
    }
    let mut margin = 1.0f64;
    while f.len() > 1 {
        let d = f.len() - 1;
        let (a0, ad) = (f[0], f[d]);
        if a0.norm() == 0.0 {
            return Ok(SchurCohn { stable: false, margin: 0.0 });
        }
        let rho = ad.norm() / a0.norm();
        margin = margin.min(1.0 - rho);
        if rho >= 1.0 {
            return Ok(SchurCohn { stable: false, margin });
        }
        let next: Vec<C64> = (0..d).map(|j| a0.conj() * f[j] - ad * f[d - j].conj()).collect();
        let scale = next.iter().fold(0.0, |m: f64, x| m.max(x.norm()));
        f = trim_leading(&next).iter().map(|x| x / scale).collect();
    }
    Ok(SchurCohn { stable: true, margin })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    StableBidisk,
    OneSidedZ,
    OneSidedW,
    AntiStableZ,
    Unstable,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    pub verdict: Verdict,
    pub one_sided_z: bool,
    pub one_sided_w: bool,
    pub anti_stable_z: bool,
    pub min_modulus: f64,
    pub grid: usize,
    pub margin: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub slice_margins: Vec<f64>,
}

impl StabilityReport {
    pub fn stable_bidisk(&self) -> bool {
        self.verdict == Verdict::StableBidisk
    }
}

fn angles(grid: usize) -> impl Iterator<Item = f64> {
    (0..grid).map(move |j| 2.0 * PI * j as f64 / grid as f64)
}

fn torus_min_modulus(p: &LaurentPoly, grid: usize) -> f64 {
    let mut min = f64::INFINITY;
    for th in angles(grid) {
        let s = p.slice_in_w(C64::from_polar(1.0, th));
        for ph in angles(grid) {
            let w = C64::from_polar(1.0, ph);
            let v = s.iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * w + c);
            let v = v * w.powi(p.l_min());
            min = min.min(v.norm());
        }
    }
    min
}

struct Sweep {
    pass: bool,
    inconclusive: bool,
    margin: f64,
    min_modulus: f64,
    slice_margins: Vec<f64>,
}

fn sweep_z(p: &LaurentPoly, grid: usize, tol: f64) -> Result<Sweep> {
    if !p.is_polynomial() {
        return Err(Error::InvalidDegree("stability needs a polynomial".into()));
    }
    let mut pass = true;
    let mut margin = 1.0f64;
    let mut slice_margins = Vec::with_capacity(grid);
    for th in angles(grid) {
        let s = p.slice_in_w(C64::from_polar(1.0, th));
        match schur_cohn(&s) {
            Ok(r) => {
                pass &= r.stable;
                margin = margin.min(r.margin);
                slice_margins.push(r.margin);
            }
            Err(Error::DegenerateLeadingCoefficient) => {
                pass = false;
                margin = 0.0;
                slice_margins.push(0.0);
            }
            Err(e) => return Err(e),
        }
    }
    let min_modulus = torus_min_modulus(p, grid.min(256));
    let scale = p.max_abs();
    if min_modulus <= tol * scale {
        pass = false;
    }
    let inconclusive = margin.abs() < 10.0 * tol;
    Ok(Sweep { pass, inconclusive, margin, min_modulus, slice_margins })
}

/// Is `p` nonzero for `|z| = 1, |w| <= 1`? Each of `grid` equally spaced
/// slices in `w` is Schur-Cohn tested.
pub fn one_sided_stable_z(p: &LaurentPoly, grid: usize, tol: f64) -> Result<StabilityReport> {
    let s = sweep_z(p, grid, tol)?;
    let verdict = if s.inconclusive {
        Verdict::Inconclusive
    } else if s.pass {
        Verdict::OneSidedZ
    } else {
        Verdict::Unstable
    };
    Ok(StabilityReport {
        verdict,
        one_sided_z: s.pass && !s.inconclusive,
        one_sided_w: false,
        anti_stable_z: false,
        min_modulus: s.min_modulus,
        grid,
        margin: s.margin,
        slice_margins: s.slice_margins,
    })
}

/// Is `p` nonzero for `|z| <= 1, |w| = 1`?
pub fn one_sided_stable_w(p: &LaurentPoly, grid: usize, tol: f64) -> Result<StabilityReport> {
    let mut r = one_sided_stable_z(&p.swap_vars(), grid, tol)?;
    r.one_sided_w = r.one_sided_z;
    r.one_sided_z = false;
    if r.verdict == Verdict::OneSidedZ {
        r.verdict = Verdict::OneSidedW;
    }
    Ok(r)
}

/// `z^n p(1/z, w)` with `n` the z-degree of `p`.
fn reflect_z(p: &LaurentPoly) -> Result<LaurentPoly> {
    let (n, _) = p.degree()?;
    Ok(LaurentPoly::from_terms(p.terms().map(|(k, l, c)| (n as i32 - k, l, c))))
}

/// Nonvanishing on the closed bidisk, via nonvanishing on `|z| = 1, |w| <= 1`
/// together with `|z| <= 1, |w| = 1`. Also reports whether `z^n p(1/z, w)` is
/// stable.
pub fn stable_bidisk(p: &LaurentPoly, grid: usize, tol: f64) -> Result<StabilityReport> {
    let z = sweep_z(p, grid, tol)?;
    let w = sweep_z(&p.swap_vars(), grid, tol)?;
    let refl = reflect_z(p)?;
    let rz = sweep_z(&refl, grid, tol)?;
    let rw = sweep_z(&refl.swap_vars(), grid, tol)?;
    let one_sided_z = z.pass && !z.inconclusive;
    let one_sided_w = w.pass && !w.inconclusive;
    let anti_stable_z = rz.pass && rw.pass && !rz.inconclusive && !rw.inconclusive;
    let verdict = if one_sided_z && one_sided_w {
        Verdict::StableBidisk
    } else if anti_stable_z {
        Verdict::AntiStableZ
    } else if one_sided_z {
        Verdict::OneSidedZ
    } else if one_sided_w {
        Verdict::OneSidedW
    } else if z.inconclusive || w.inconclusive {
        Verdict::Inconclusive
    } else {
        Verdict::Unstable
    };
    Ok(StabilityReport {
        verdict,
        one_sided_z,
        one_sided_w,
        anti_stable_z,
        min_modulus: z.min_modulus,
        grid,
        margin: z.margin.min(w.margin),
        slice_margins: z.slice_margins,
    })
}
