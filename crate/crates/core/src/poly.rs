//! Bivariate Laurent polynomials with complex coefficients.
//!
//! Coefficients live on a dense grid over the support rectangle
//! `[k_min, k_max] x [l_min, l_max]`, stored row-major with the z-exponent `k`
//! as the major index and the w-exponent `l` as the minor index.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative magnitude below which a boundary coefficient is considered zero.
pub const TRIM_REL: f64 = 1e-13;

/// Bivariate Laurent polynomial `sum c[k,l] z^k w^l`.
///
/// The support rectangle is the smallest one holding every nonzero
/// coefficient and the origin, so a genuine polynomial always has
/// `k_min == l_min == 0` and its degree is `(k_max, l_max)`.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyJson", into = "PolyJson")]
pub struct LaurentPoly {
    k_min: i32,
    k_max: i32,
    l_min: i32,
    l_max: i32,
    coeffs: Vec<C64>,
}

impl LaurentPoly {
    /// Builds a polynomial from a dense row-major grid and trims it.
    pub fn from_grid(k_min: i32, k_max: i32, l_min: i32, l_max: i32, coeffs: Vec<C64>) -> Result<Self> {
        if k_max < k_min || l_max < l_min {
            return Err(Error::InvalidInput(format!("empty support rectangle [{k_min},{k_max}]x[{l_min},{l_max}]")));
        }
        let rows = (k_max - k_min + 1) as usize;
        let cols = (l_max - l_min + 1) as usize;
        if coeffs.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "expected {} coefficients, got {}",
                rows * cols,
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput("non-finite coefficient".into()));
        }
        Ok(Self { k_min, k_max, l_min, l_max, coeffs }.trimmed())
    }

    /// Sums `(k, l, c)` terms; repeated exponents accumulate.
    pub fn from_terms<I: IntoIterator<Item = (i32, i32, C64)>>(terms: I) -> Self {
        let terms: Vec<_> = terms.into_iter().collect();
        if terms.is_empty() {
            return Self::zero();
        }
        let k_min = terms.iter().map(|t| t.0).min().unwrap().min(0);
        let k_max = terms.iter().map(|t| t.0).max().unwrap().max(0);
        let l_min = terms.iter().map(|t| t.1).min().unwrap().min(0);
        let l_max = terms.iter().map(|t| t.1).max().unwrap().max(0);
        let cols = (l_max - l_min + 1) as usize;
        let mut coeffs = vec![C64::new(0.0, 0.0); (k_max - k_min + 1) as usize * cols];
        for (k, l, c) in terms {
            coeffs[(k - k_min) as usize * cols + (l - l_min) as usize] += c;
        }
        Self { k_min, k_max, l_min, l_max, coeffs }.trimmed()
    }

    pub fn zero() -> Self {
        Self { k_min: 0, k_max: 0, l_min: 0, l_max: 0, coeffs: vec![C64::new(0.0, 0.0)] }
    }

    pub fn one() -> Self {
        Self::constant(C64::new(1.0, 0.0))
    }

    pub fn constant(c: C64) -> Self {
        Self { k_min: 0, k_max: 0, l_min: 0, l_max: 0, coeffs: vec![c] }
    }

    pub fn monomial(k: i32, l: i32, c: C64) -> Self {
        Self::from_terms([(k, l, c)])
    }

    /// Polynomial in `z` alone from ascending coefficients.
    pub fn from_z_coeffs(c: &[C64]) -> Self {
        Self::from_terms(c.iter().enumerate().map(|(k, &c)| (k as i32, 0, c)))
    }

    /// Polynomial in `w` alone from ascending coefficients.
    pub fn from_w_coeffs(c: &[C64]) -> Self {
        Self::from_terms(c.iter().enumerate().map(|(l, &c)| (0, l as i32, c)))
    }

    pub fn k_min(&self) -> i32 {
        self.k_min
    }
    pub fn k_max(&self) -> i32 {
        self.k_max
    }
    pub fn l_min(&self) -> i32 {
        self.l_min
    }
    pub fn l_max(&self) -> i32 {
        self.l_max
    }

    /// Raw row-major coefficient grid.
    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    fn cols(&self) -> usize {
        (self.l_max - self.l_min + 1) as usize
    }

    /// Coefficient of `z^k w^l`, zero outside the support.
    pub fn coeff(&self, k: i32, l: i32) -> C64 {
        if k < self.k_min || k > self.k_max || l < self.l_min || l > self.l_max {
            return C64::new(0.0, 0.0);
        }
        self.coeffs[(k - self.k_min) as usize * self.cols() + (l - self.l_min) as usize]
    }

    /// Iterates `(k, l, c)` in row-major order over the support rectangle.
    pub fn terms(&self) -> impl Iterator<Item = (i32, i32, C64)> + '_ {
        let cols = self.cols();
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.k_min + (i / cols) as i32, self.l_min + (i % cols) as i32, c))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.norm()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.norm() == 0.0)
    }

    /// True when no negative exponent appears.
    pub fn is_polynomial(&self) -> bool {
        self.k_min >= 0 && self.l_min >= 0
    }

    /// Degree `(n, m)` of a polynomial.
    pub fn degree(&self) -> Result<(usize, usize)> {
        if !self.is_polynomial() {
            return Err(Error::InvalidDegree("Laurent polynomial has negative exponents".into()));
        }
        Ok((self.k_max as usize, self.l_max as usize))
    }

    fn trimmed(mut self) -> Self {
        let thr = TRIM_REL * self.max_abs();
        let cols = self.cols();
        let row_zero = |p: &Self, k: i32| {
            let r = (k - p.k_min) as usize;
            p.coeffs[r * cols..(r + 1) * cols].iter().all(|c| c.norm() <= thr)
        };
        let col_zero = |p: &Self, l: i32, k_lo: i32, k_hi: i32| {
            (k_lo..=k_hi).all(|k| p.coeffs[(k - p.k_min) as usize * cols + (l - p.l_min) as usize].norm() <= thr)
        };
        let mut k_lo = self.k_min;
        let mut k_hi = self.k_max;
        while k_lo < 0 && k_lo < k_hi && row_zero(&self, k_lo) {
            k_lo += 1;
        }
        while k_hi > 0 && k_hi > k_lo && row_zero(&self, k_hi) {
            k_hi -= 1;
        }
        let mut l_lo = self.l_min;
        let mut l_hi = self.l_max;
        while l_lo < 0 && l_lo < l_hi && col_zero(&self, l_lo, k_lo, k_hi) {
            l_lo += 1;
        }
        while l_hi > 0 && l_hi > l_lo && col_zero(&self, l_hi, k_lo, k_hi) {
            l_hi -= 1;
        }
        if (k_lo, k_hi, l_lo, l_hi) == (self.k_min, self.k_max, self.l_min, self.l_max) {
            return self;
        }
        let new_cols = (l_hi - l_lo + 1) as usize;
        let mut coeffs = Vec::with_capacity((k_hi - k_lo + 1) as usize * new_cols);
        for k in k_lo..=k_hi {
            for l in l_lo..=l_hi {
                coeffs.push(self.coeffs[(k - self.k_min) as usize * cols + (l - self.l_min) as usize]);
            }
        }
        self.k_min = k_lo;
        self.k_max = k_hi;
        self.l_min = l_lo;
        self.l_max = l_hi;
        self.coeffs = coeffs;
        self
    }

    /// Evaluates the polynomial; terms are accumulated in row-major order.
    pub fn evaluate(&self, z: C64, w: C64) -> Result<C64> {
        if self.k_min < 0 && z.norm() == 0.0 {
            return Err(Error::Domain("z"));
        }
        if self.l_min < 0 && w.norm() == 0.0 {
            return Err(Error::Domain("w"));
        }
        let zp = powers(z, self.k_min, self.k_max);
        let wp = powers(w, self.l_min, self.l_max);
        let cols = self.cols();
        let mut acc = C64::new(0.0, 0.0);
        for (i, zk) in zp.iter().enumerate() {
            for (j, wl) in wp.iter().enumerate() {
                acc += self.coeffs[i * cols + j] * zk * wl;
            }
        }
        Ok(acc)
    }

    /// `conj(p(conj z, conj w))`: every coefficient conjugated.
    pub fn bar(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.conj()).collect(), ..self.clone() }
    }

    /// `p(1/z, 1/w)`: both exponent ranges negated.
    pub fn invert_args(&self) -> Self {
        Self::from_terms(self.terms().map(|(k, l, c)| (-k, -l, c)))
    }

    /// `p(w, z)`.
    pub fn swap_vars(&self) -> Self {
        Self::from_terms(self.terms().map(|(k, l, c)| (l, k, c)))
    }

    /// Multiplies by `z^dk w^dl`.
    pub fn shift(&self, dk: i32, dl: i32) -> Self {
        Self::from_terms(self.terms().map(|(k, l, c)| (k + dk, l + dl, c)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_terms(self.terms().map(|(k, l, c)| (k, l, c * s)))
    }

    /// `z^n w^m conj(p(1/conj z, 1/conj w))`.
    pub fn reverse(&self, n: i32, m: i32) -> Result<Self> {
        if n < 0 || m < 0 {
            return Err(Error::InvalidDegree(format!("negative reversal degree ({n},{m})")));
        }
        if !self.is_polynomial() {
            return Err(Error::InvalidDegree("reverse needs a polynomial".into()));
        }
        if self.k_max > n || self.l_max > m {
            return Err(Error::InvalidDegree(format!("support ({},{}) exceeds ({n},{m})", self.k_max, self.l_max)));
        }
        Ok(Self::from_terms(self.terms().map(|(k, l, c)| (n - k, m - l, c.conj()))))
    }

    /// Reversal in `w` only, with the z-argument conjugate-inverted:
    /// coefficient `(k, l)` of the result is `conj(c[-k, m-l])`.
    pub fn reverse_in_w(&self, m: i32) -> Result<Self> {
        if m < 0 {
            return Err(Error::InvalidDegree(format!("negative reversal degree {m}")));
        }
        if self.l_min < 0 || self.l_max > m {
            return Err(Error::InvalidDegree(format!("w-support [{},{}] exceeds [0,{m}]", self.l_min, self.l_max)));
        }
        Ok(Self::from_terms(self.terms().map(|(k, l, c)| (-k, m - l, c.conj()))))
    }

    /// Product of two Laurent polynomials (grid convolution).
    pub fn multiply(&self, other: &Self) -> Self {
        let k_min = self.k_min + other.k_min;
        let k_max = self.k_max + other.k_max;
        let l_min = self.l_min + other.l_min;
        let l_max = self.l_max + other.l_max;
        let cols = (l_max - l_min + 1) as usize;
        let mut coeffs = vec![C64::new(0.0, 0.0); (k_max - k_min + 1) as usize * cols];
        for (k1, l1, a) in self.terms() {
            if a.norm() == 0.0 {
                continue;
            }
            for (k2, l2, b) in other.terms() {
                let idx = (k1 + k2 - k_min) as usize * cols + (l1 + l2 - l_min) as usize;
                coeffs[idx] += a * b;
            }
        }
        Self { k_min, k_max, l_min, l_max, coeffs }.trimmed()
    }

    /// `p(z,w) * conj(p)(1/z,1/w)`, equal to `|p|^2` on the torus.
    pub fn herm_square(&self) -> Self {
        self.multiply(&self.bar().invert_args())
    }

    /// Largest deviation from `c[k,l] = conj(c[-k,-l])`.
    pub fn hermitian_defect(&self) -> f64 {
        self.terms().map(|(k, l, c)| (c - self.coeff(-k, -l).conj()).norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient magnitude of `self - other`.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let k_lo = self.k_min.min(other.k_min);
        let k_hi = self.k_max.max(other.k_max);
        let l_lo = self.l_min.min(other.l_min);
        let l_hi = self.l_max.max(other.l_max);
        let mut worst = 0.0f64;
        for k in k_lo..=k_hi {
            for l in l_lo..=l_hi {
                worst = worst.max((self.coeff(k, l) - other.coeff(k, l)).norm());
            }
        }
        worst
    }

    /// `min over |phase| = 1` of the largest coefficient of `phase * self - other`,
    /// with the optimal phase chosen by least squares.
    pub fn phase_aligned_diff(&self, other: &Self) -> f64 {
        let mut inner = C64::new(0.0, 0.0);
        for (k, l, c) in self.terms() {
            inner += c.conj() * other.coeff(k, l);
        }
        let phase = if inner.norm() > 0.0 { inner / inner.norm() } else { C64::new(1.0, 0.0) };
        self.scale(phase).max_coeff_diff(other)
    }

    /// Coefficients of `w^l` as a function of `z = e^{i theta}`; index `l - l_min`.
    pub fn slice_in_w(&self, z: C64) -> Vec<C64> {
        let zp = powers(z, self.k_min, self.k_max);
        let cols = self.cols();
        let mut out = vec![C64::new(0.0, 0.0); cols];
        for (i, zk) in zp.iter().enumerate() {
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.coeffs[i * cols + j] * zk;
            }
        }
        out
    }
}

fn powers(x: C64, lo: i32, hi: i32) -> Vec<C64> {
    let mut out = Vec::with_capacity((hi - lo + 1) as usize);
    let start = if lo >= 0 { x.powi(lo) } else { x.inv().powi(-lo) };
    let mut cur = start;
    for _ in lo..=hi {
        out.push(cur);
        cur *= x;
    }
    out
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, l, c) in self.terms() {
            if c.norm() == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i) z^{k} w^{l}", c.re, c.im)?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        LaurentPoly::from_terms(self.terms().chain(rhs.terms()))
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        LaurentPoly::from_terms(self.terms().chain(rhs.terms().map(|(k, l, c)| (k, l, -c))))
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.multiply(rhs)
    }
}

impl Mul<C64> for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: C64) -> LaurentPoly {
        self.scale(rhs)
    }
}

/// Linear combination `sum_j a[j] * polys[j]`.
pub fn combine(weights: &[C64], polys: &[LaurentPoly]) -> LaurentPoly {
    LaurentPoly::from_terms(weights.iter().zip(polys).flat_map(|(&a, p)| p.terms().map(move |(k, l, c)| (k, l, a * c))))
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    k_min: i32,
    k_max: i32,
    l_min: i32,
    l_max: i32,
    coeffs: Vec<[f64; 2]>,
}

impl TryFrom<PolyJson> for LaurentPoly {
    type Error = Error;
    fn try_from(j: PolyJson) -> Result<Self> {
        let coeffs = j.coeffs.iter().map(|c| C64::new(c[0], c[1])).collect();
        LaurentPoly::from_grid(j.k_min, j.k_max, j.l_min, j.l_max, coeffs)
    }
}

impl From<LaurentPoly> for PolyJson {
    fn from(p: LaurentPoly) -> Self {
        PolyJson {
            k_min: p.k_min,
            k_max: p.k_max,
            l_min: p.l_min,
            l_max: p.l_max,
            coeffs: p.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}
