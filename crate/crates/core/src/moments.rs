//! Moment functionals on the torus: FFT quadrature of reciprocal weights,
//! linear functional application, inner products and doubly Toeplitz matrices.

use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_extremes, mat_serde, CMat};
use crate::poly::{LaurentPoly, C64};

/// Monomial ordering used to run Gram-Schmidt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ordering {
    Lex,
    Revlex,
}

/// Source of a positive moment functional.
#[derive(Clone, Debug)]
pub enum WeightSpec {
    /// Weight `1 / (4 pi^2 |p|^2)`.
    ReciprocalModSquare(LaurentPoly),
    /// Weight `1 / (4 pi^2 Q)` with `Q` Hermitian and positive on the torus.
    ReciprocalTrigPoly(LaurentPoly),
    ExplicitMoments(MomentTable),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    pub initial: usize,
    pub max: usize,
    pub tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig { initial: 64, max: 4096, tol: 1e-12 }
    }
}

/// Moments `c[k,l]` for `|k| <= K`, `|l| <= L`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTable {
    k_max: usize,
    l_max: usize,
    grid_size: usize,
    converged: bool,
    data: Vec<C64>,
}

impl MomentTable {
    /// Builds a table from the entries with `k > 0`, or `k = 0` and `l >= 0`;
    /// the rest follow from Hermitian symmetry. Missing entries are zero.
    pub fn from_half(k_max: usize, l_max: usize, entries: impl IntoIterator<Item = (i32, i32, C64)>) -> Result<Self> {
        let mut t = MomentTable {
            k_max,
            l_max,
            grid_size: 0,
            converged: true,
            data: vec![C64::new(0.0, 0.0); (2 * k_max + 1) * (2 * l_max + 1)],
        };
        for (k, l, v) in entries {
            if k.unsigned_abs() as usize > k_max || l.unsigned_abs() as usize > l_max {
                return Err(Error::InvalidInput(format!("moment ({k},{l}) outside table range")));
            }
            if k < 0 || (k == 0 && l < 0) {
                return Err(Error::InvalidInput(format!(
                    "moment ({k},{l}) is in the mirrored half; list k > 0 or k = 0, l >= 0"
                )));
            }
            t.set_pair(k, l, v);
        }
        if !(t.c(0, 0).re > 0.0) {
            return Err(Error::InvalidInput("c[0,0] must be real and positive".into()));
        }
        Ok(t)
    }

    fn set_pair(&mut self, k: i32, l: i32, v: C64) {
        let v = if k == 0 && l == 0 { C64::new(v.re, 0.0) } else { v };
        let j = self.index(-k, -l);
        self.data[j] = v.conj();
        let i = self.index(k, l);
        self.data[i] = v;
    }

    fn index(&self, k: i32, l: i32) -> usize {
        let row = (k + self.k_max as i32) as usize;
        let col = (l + self.l_max as i32) as usize;
        row * (2 * self.l_max + 1) + col
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn contains(&self, k: i32, l: i32) -> bool {
        k.unsigned_abs() as usize <= self.k_max && l.unsigned_abs() as usize <= self.l_max
    }

    /// `c[k,l]`; panics outside the table.
    pub fn c(&self, k: i32, l: i32) -> C64 {
        assert!(self.contains(k, l), "moment ({k},{l}) outside table");
        self.data[self.index(k, l)]
    }

    pub fn get(&self, k: i32, l: i32) -> Result<C64> {
        if self.contains(k, l) {
            Ok(self.c(k, l))
        } else {
            Err(Error::SupportExceeded(format!(
                "moment ({k},{l}) outside [-{},{}]x[-{},{}]",
                self.k_max, self.k_max, self.l_max, self.l_max
            )))
        }
    }

    /// Table of the functional with the variables exchanged: `c'[k,l] = c[l,k]`.
    pub fn swapped(&self) -> MomentTable {
        let mut t = MomentTable {
            k_max: self.l_max,
            l_max: self.k_max,
            grid_size: self.grid_size,
            converged: self.converged,
            data: vec![C64::new(0.0, 0.0); self.data.len()],
        };
        for k in -(t.k_max as i32)..=t.k_max as i32 {
            for l in -(t.l_max as i32)..=t.l_max as i32 {
                let i = t.index(k, l);
                t.data[i] = self.c(l, k);
            }
        }
        t
    }

    pub fn truncate(&self, k_max: usize, l_max: usize) -> Result<MomentTable> {
        if k_max > self.k_max || l_max > self.l_max {
            return Err(Error::SupportExceeded(format!(
                "cannot extend a {}x{} table to {k_max}x{l_max}",
                self.k_max, self.l_max
            )));
        }
        let mut t = MomentTable {
            k_max,
            l_max,
            grid_size: self.grid_size,
            converged: self.converged,
            data: vec![C64::new(0.0, 0.0); (2 * k_max + 1) * (2 * l_max + 1)],
        };
        for k in -(k_max as i32)..=k_max as i32 {
            for l in -(l_max as i32)..=l_max as i32 {
                let i = t.index(k, l);
                t.data[i] = self.c(k, l);
            }
        }
        Ok(t)
    }

    /// Stored half in listing order: `k = 0, l >= 0` then `k > 0` row by row.
    pub fn half_entries(&self) -> Vec<(i32, i32, C64)> {
        let mut out = Vec::new();
        for l in 0..=self.l_max as i32 {
            out.push((0, l, self.c(0, l)));
        }
        for k in 1..=self.k_max as i32 {
            for l in -(self.l_max as i32)..=self.l_max as i32 {
                out.push((k, l, self.c(k, l)));
            }
        }
        out
    }
}

#[derive(Serialize)]
struct TableOut {
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "L")]
    l: usize,
    grid_size: usize,
    converged: bool,
    c: Vec<(i32, i32, f64, f64)>,
}

#[derive(Deserialize)]
struct TableJson {
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "L")]
    l: usize,
    #[serde(default)]
    grid_size: usize,
    #[serde(default = "yes")]
    converged: bool,
    c: Vec<[f64; 4]>,
}

fn yes() -> bool {
    true
}

impl Serialize for MomentTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TableOut {
            k: self.k_max,
            l: self.l_max,
            grid_size: self.grid_size,
            converged: self.converged,
            c: self.half_entries().into_iter().map(|(k, l, v)| (k, l, v.re, v.im)).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MomentTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = TableJson::deserialize(d)?;
        let mut entries = Vec::with_capacity(raw.c.len());
        for e in &raw.c {
            if e[0].fract() != 0.0 || e[1].fract() != 0.0 {
                return Err(serde::de::Error::custom("moment indices must be integers"));
            }
            entries.push((e[0] as i32, e[1] as i32, C64::new(e[2], e[3])));
        }
        let mut t = MomentTable::from_half(raw.k, raw.l, entries).map_err(serde::de::Error::custom)?;
        t.grid_size = raw.grid_size;
        t.converged = raw.converged;
        Ok(t)
    }
}

/// Samples `Q` (the reciprocal of the weight, up to `4 pi^2`) on the `n x n`
/// grid `theta_a = 2 pi a / n`, `phi_b = 2 pi b / n`, row-major in `a`.
pub fn sample_reciprocal(weight: &WeightSpec, n: usize) -> Result<Vec<f64>> {
    let (poly, square) = match weight {
        WeightSpec::ReciprocalModSquare(p) => (p, true),
        WeightSpec::ReciprocalTrigPoly(q) => (q, false),
        WeightSpec::ExplicitMoments(_) => {
            return Err(Error::InvalidInput("explicit moments have no density to sample".into()))
        }
    };
    let unit = |j: usize| C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64);
    let (l_min, l_max) = (poly.l_min(), poly.l_max());
    let width = (l_max - l_min + 1) as usize;
    let w_pows: Vec<C64> = (0..n)
        .flat_map(|b| {
            let w = unit(b);
            (l_min..=l_max).map(move |l| w.powi(l))
        })
        .collect();
    let mut out = vec![0.0; n * n];
    for a in 0..n {
        let slice = poly.slice_in_w(unit(a));
        for b in 0..n {
            let pw = &w_pows[b * width..(b + 1) * width];
            let v: C64 = slice.iter().zip(pw).map(|(s, p)| s * p).sum();
            out[a * n + b] = if square { v.norm_sqr() } else { v.re };
        }
    }
    Ok(out)
}

/// Forward 2-D DFT of `f` divided by `n^2`, restricted to `|k| <= kk`, `|l| <= ll`.
fn fft_moments(f: &[f64], n: usize, kk: usize, ll: usize) -> MomentTable {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let mut buf: Vec<C64> = f.iter().map(|&x| C64::new(x, 0.0)).collect();
    for row in buf.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![C64::new(0.0, 0.0); n];
    for b in 0..n {
        for a in 0..n {
            col[a] = buf[a * n + b];
        }
        fft.process(&mut col);
        for a in 0..n {
            buf[a * n + b] = col[a];
        }
    }
    let scale = 1.0 / (n * n) as f64;
    let at = |k: i32, l: i32| {
        let a = k.rem_euclid(n as i32) as usize;
        let b = l.rem_euclid(n as i32) as usize;
        buf[a * n + b] * scale
    };
    let mut entries = Vec::new();
    for l in 0..=ll as i32 {
        entries.push((0, l, at(0, l)));
    }
    for k in 1..=kk as i32 {
        for l in -(ll as i32)..=ll as i32 {
            entries.push((k, l, at(k, l)));
        }
    }
    let mut t = MomentTable {
        k_max: kk,
        l_max: ll,
        grid_size: n,
        converged: true,
        data: vec![C64::new(0.0, 0.0); (2 * kk + 1) * (2 * ll + 1)],
    };
    for (k, l, v) in entries {
        t.set_pair(k, l, v);
    }
    t
}

fn check_weight(weight: &WeightSpec) -> Result<()> {
    match weight {
        WeightSpec::ReciprocalModSquare(p) if p.is_zero() => Err(Error::NotPositive { min: 0.0 }),
        WeightSpec::ReciprocalTrigPoly(q) => {
            let scale = q.max_abs().max(1e-300);
            if q.hermitian_defect() > 1e-12 * scale {
                Err(Error::InvalidInput("trigonometric weight is not Hermitian-symmetric".into()))
            } else {
                Ok(())
            }
        }
        _ => Ok(()),
    }
}

/// Moments `c[k,l] = (1/4pi^2) iint e^{-ik theta} e^{-il phi} / Q` by
/// trapezoidal quadrature with grid doubling.
///
/// A table is returned even when the doubling limit is reached; its
/// `converged` flag is then false.
pub fn compute_moments(weight: &WeightSpec, kk: usize, ll: usize, config: &QuadratureConfig) -> Result<MomentTable> {
    if let WeightSpec::ExplicitMoments(t) = weight {
        return t.truncate(kk, ll);
    }
    check_weight(weight)?;
    let need = (2 * kk.max(ll) + 2).next_power_of_two();
    let mut n = config.initial.max(need).next_power_of_two();
    let sample = |n: usize| -> Result<MomentTable> {
        let q = sample_reciprocal(weight, n)?;
        let min = q.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(min > 0.0) {
            return Err(Error::NotPositive { min });
        }
        let recip: Vec<f64> = q.iter().map(|x| 1.0 / x).collect();
        Ok(fft_moments(&recip, n, kk, ll))
    };
    let mut prev = sample(n)?;
    loop {
        let next_n = 2 * n;
        let cur = sample(next_n)?;
        let delta = prev.data.iter().zip(&cur.data).fold(0.0, |m: f64, (a, b)| m.max((a - b).norm()));
        if delta <= config.tol {
            return Ok(cur);
        }
        if next_n >= config.max {
            let mut cur = cur;
            cur.converged = false;
            return Ok(cur);
        }
        prev = cur;
        n = next_n;
    }
}

/// Neumaier-compensated complex sum in iteration order.
pub(crate) fn compensated_sum(terms: impl IntoIterator<Item = C64>) -> C64 {
    let (mut s_re, mut c_re, mut s_im, mut c_im) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let step = |s: &mut f64, comp: &mut f64, x: f64| {
        let t = *s + x;
        if s.abs() >= x.abs() {
            *comp += (*s - t) + x;
        } else {
            *comp += (x - t) + *s;
        }
        *s = t;
    };
    for v in terms {
        step(&mut s_re, &mut c_re, v.re);
        step(&mut s_im, &mut c_im, v.im);
    }
    C64::new(s_re + c_re, s_im + c_im)
}

/// `L(f) = sum f[k,l] c[-k,-l]`, summed in ascending `k`, then `l`.
pub fn functional_apply(table: &MomentTable, f: &LaurentPoly) -> Result<C64> {
    if f.is_zero() {
        return Ok(C64::new(0.0, 0.0));
    }
    let kk = table.k_max as i32;
    let ll = table.l_max as i32;
    if f.k_min() < -kk || f.k_max() > kk || f.l_min() < -ll || f.l_max() > ll {
        return Err(Error::SupportExceeded(format!(
            "support [{},{}]x[{},{}] exceeds moment range {}x{}",
            f.k_min(),
            f.k_max(),
            f.l_min(),
            f.l_max(),
            kk,
            ll
        )));
    }
    Ok(compensated_sum(f.terms().map(|(k, l, v)| v * table.c(-k, -l))))
}

/// `<f, g> = L(f * conj(g)(1/z, 1/w))`.
pub fn inner_product(table: &MomentTable, f: &LaurentPoly, g: &LaurentPoly) -> Result<C64> {
    functional_apply(table, &f.multiply(&g.bar().invert_args()))
}

/// Matrix `[<x_i, y_j>]` of two vector polynomials.
pub fn gram(table: &MomentTable, x: &[LaurentPoly], y: &[LaurentPoly]) -> Result<CMat> {
    let mut out = CMat::zeros(x.len(), y.len());
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            out[(i, j)] = inner_product(table, xi, yj)?;
        }
    }
    Ok(out)
}

/// Doubly Toeplitz moment matrix of a level.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MomentMatrix {
    pub n: usize,
    pub m: usize,
    pub ordering: Ordering,
    #[serde(with = "mat_serde")]
    pub entries: CMat,
}

/// Lex index `i (m+1) + s` of `z^i w^s`; revlex index `s (n+1) + i`.
pub fn monomial_index(ordering: Ordering, n: usize, m: usize, i: usize, s: usize) -> usize {
    match ordering {
        Ordering::Lex => i * (m + 1) + s,
        Ordering::Revlex => s * (n + 1) + i,
    }
}

/// Entry at (row `(i,s)`, column `(j,t)`) is `c[i-j, s-t]`.
pub fn moment_matrix(table: &MomentTable, n: usize, m: usize, ordering: Ordering) -> Result<MomentMatrix> {
    if n > table.k_max || m > table.l_max {
        return Err(Error::LevelExceedsMoments { n, m, k: table.k_max, l: table.l_max });
    }
    let dim = (n + 1) * (m + 1);
    let mut entries = CMat::zeros(dim, dim);
    for i in 0..=n {
        for s in 0..=m {
            let row = monomial_index(ordering, n, m, i, s);
            for j in 0..=n {
                for t in 0..=m {
                    let col = monomial_index(ordering, n, m, j, t);
                    entries[(row, col)] = table.c(i as i32 - j as i32, s as i32 - t as i32);
                }
            }
        }
    }
    Ok(MomentMatrix { n, m, ordering, entries })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PositivityReport {
    pub positive: bool,
    pub min_eig: f64,
}

pub const DEFAULT_POSITIVITY_TOL: f64 = 1e-10;

pub fn is_positive_definite(cm: &MomentMatrix, tol: f64) -> PositivityReport {
    let (lo, hi) = hermitian_extremes(&cm.entries);
    PositivityReport { positive: hi > 0.0 && lo > tol * hi, min_eig: lo }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    fn flat() -> MomentTable {
        compute_moments(&WeightSpec::ReciprocalTrigPoly(LaurentPoly::one()), 3, 3, &Default::default()).unwrap()
    }

    #[test]
    fn flat_weight_has_delta_moments() {
        let t = flat();
        assert!(t.converged());
        for k in -3..=3 {
            for l in -3..=3 {
                let want = if k == 0 && l == 0 { 1.0 } else { 0.0 };
                assert!((t.c(k, l) - c(want, 0.0)).norm() < 1e-15);
            }
        }
        let cm = moment_matrix(&t, 2, 1, Ordering::Revlex).unwrap();
        assert!((cm.entries.clone() - CMat::identity(6, 6)).norm() < 1e-15);
    }

    #[test]
    fn monomial_functional_reads_table() {
        let t = MomentTable::from_half(2, 2, vec![(0, 0, c(2.0, 0.0)), (2, 1, c(0.3, -0.1))]).unwrap();
        let f = LaurentPoly::monomial(-2, -1, c(1.0, 0.0));
        assert_eq!(functional_apply(&t, &f).unwrap(), c(0.3, -0.1));
        assert_eq!(functional_apply(&t, &LaurentPoly::one()).unwrap(), c(2.0, 0.0));
        assert_eq!(t.c(-2, -1), c(0.3, 0.1));
        let z = LaurentPoly::monomial(1, 0, c(1.0, 0.0));
        let w = LaurentPoly::monomial(0, 1, c(1.0, 0.0));
        assert_eq!(inner_product(&t, &z, &w).unwrap(), t.c(1, -1));
        let big = LaurentPoly::monomial(3, 0, c(1.0, 0.0));
        assert!(matches!(functional_apply(&t, &big), Err(Error::SupportExceeded(_))));
    }

    #[test]
    fn level_beyond_table_is_rejected() {
        let t = flat();
        assert!(matches!(moment_matrix(&t, 4, 1, Ordering::Lex), Err(Error::LevelExceedsMoments { .. })));
    }

    #[test]
    fn small_matrix_layout() {
        let t = MomentTable::from_half(
            1,
            1,
            vec![
                (0, 0, c(1.0, 0.0)),
                (0, 1, c(0.1, 0.2)),
                (1, -1, c(0.05, 0.0)),
                (1, 0, c(0.2, 0.0)),
                (1, 1, c(0.0, 0.1)),
            ],
        )
        .unwrap();
        let cm = moment_matrix(&t, 1, 1, Ordering::Lex).unwrap();
        for (i, s) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            for (j, tt) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let want = t.c(i - j, s - tt);
                assert_eq!(cm.entries[((i * 2 + s) as usize, (j * 2 + tt) as usize)], want);
            }
        }
        assert!((cm.entries.adjoint() - cm.entries.clone()).norm() < 1e-15);
    }

    #[test]
    fn positivity_verdicts() {
        let id = MomentMatrix { n: 0, m: 1, ordering: Ordering::Lex, entries: CMat::identity(2, 2) };
        let r = is_positive_definite(&id, DEFAULT_POSITIVITY_TOL);
        assert!(r.positive);
        assert!((r.min_eig - 1.0).abs() < 1e-15);
        let mut e = CMat::identity(2, 2);
        e[(1, 1)] = c(-1.0, 0.0);
        let bad = MomentMatrix { n: 0, m: 1, ordering: Ordering::Lex, entries: e };
        assert!(!is_positive_definite(&bad, DEFAULT_POSITIVITY_TOL).positive);
    }

    #[test]
    fn nonpositive_weight_is_rejected() {
        let q = LaurentPoly::from_terms(vec![(0, 0, c(0.5, 0.0)), (1, 0, c(0.5, 0.0)), (-1, 0, c(0.5, 0.0))]);
        let r = compute_moments(&WeightSpec::ReciprocalTrigPoly(q), 1, 1, &Default::default());
        assert!(matches!(r, Err(Error::NotPositive { .. })));
    }

    #[test]
    fn json_lists_stored_half() {
        let t = MomentTable::from_half(1, 0, vec![(0, 0, c(1.0, 0.0)), (1, 0, c(0.5, 0.25))]).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"K":1,"L":0,"grid_size":0,"converged":true,"c":[[0,0,1.0,0.0],[1,0,0.5,0.25]]}"#);
        let back: MomentTable = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let s = compensated_sum(vec![c(1e16, 0.0), c(1.0, 0.0), c(-1e16, 0.0)]);
        assert_eq!(s, c(1.0, 0.0));
    }
}
