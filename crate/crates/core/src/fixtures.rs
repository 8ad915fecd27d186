//! Closed-form reference weights with known factors and coefficients.

use crate::linalg::{c, CMat};
use crate::poly::{LaurentPoly, C64};

fn r(x: f64) -> C64 {
    c(x, 0.0)
}

fn real_mat(rows: &[&[f64]]) -> CMat {
    CMat::from_fn(rows.len(), rows[0].len(), |i, j| r(rows[i][j]))
}

/// Degree (2,2) polynomial nonzero on `|z| = 1, |w| <= 1` but with
/// nonvanishing coupling in both variables; valid for `(sqrt 13 - 3)/2 < a < 1`.
pub struct OneSided {
    pub a: f64,
}

impl OneSided {
    pub fn d(&self) -> f64 {
        let a2 = self.a * self.a;
        11.0 * a2 - a2 * a2 - 1.0
    }

    pub fn c(&self) -> f64 {
        let a2 = self.a * self.a;
        14.0 * a2 - a2 * a2 - 1.0
    }

    pub fn f(&self) -> f64 {
        let a2 = self.a * self.a;
        11.0 + 38.0 * a2 + 11.0 * a2 * a2
    }

    /// Unnormalized factor.
    pub fn p_hat(&self) -> LaurentPoly {
        let a = self.a;
        let a2 = a * a;
        LaurentPoly::from_terms(vec![
            (2, 2, r(4.0 * a * (1.0 - a2))),
            (2, 0, r(-3.0 * (1.0 + a2) * (1.0 + a2))),
            (1, 2, r(3.0 * (1.0 - a2 * a2))),
            (1, 0, r(9.0 * a * (1.0 + a2))),
            (0, 2, r(-13.0 * a * (1.0 - a2))),
            (0, 0, r(12.0 * a2)),
        ])
    }

    pub fn p(&self) -> LaurentPoly {
        let s = 15f64.sqrt() / (30.0 * self.a * self.d().sqrt());
        self.p_hat().scale(r(s))
    }

    pub fn k(&self) -> CMat {
        let a2 = self.a * self.a;
        real_mat(&[&[0.0, 0.0], &[2.0, -1.0]]) * r(2.0 * 15f64.sqrt() * (1.0 - a2) / (15.0 * (1.0 + a2)))
    }

    pub fn k1(&self) -> CMat {
        let a2 = self.a * self.a;
        real_mat(&[&[1.0, 2.0], &[0.0, 0.0]]) * r(-(15f64.sqrt()) * (1.0 - a2) / (60.0 * self.a))
    }

    /// `K^dagger Gamma1 Gamma^dagger K1`.
    pub fn k_gamma_k1(&self) -> CMat {
        let a2 = self.a * self.a;
        real_mat(&[&[-1.0, -2.0], &[0.5, 1.0]]) * r((1.0 - a2).powi(2) / (15.0 * self.a * (1.0 + a2)))
    }

    pub fn u_tilde(&self) -> CMat {
        real_mat(&[&[2.0, -1.0], &[-1.0, -2.0]]) * r(1.0 / 5f64.sqrt())
    }

    pub fn v_tilde(&self) -> CMat {
        let a = self.a;
        let (cc, d, f) = (self.c(), self.d(), self.f());
        let s3 = 3f64.sqrt();
        real_mat(&[
            &[s3 * a / cc.sqrt(), d.sqrt() / cc.sqrt(), 0.0],
            &[
                2.0 * s3 * (1.0 + a * a) * d.sqrt() / (cc * f).sqrt(),
                -6.0 * a * (1.0 + a * a) / (f * cc).sqrt(),
                -cc.sqrt() / f.sqrt(),
            ],
            &[-d.sqrt() / f.sqrt(), s3 * a / f.sqrt(), -2.0 * s3 * (1.0 + a * a) / f.sqrt()],
        ])
    }
}

/// Degree (2,2) weight that splits into a stable part and a part stable
/// after reversal in `z`; needs `|a|, |b| < 1`.
pub struct Splitting {
    pub a: f64,
    pub b: f64,
}

impl Splitting {
    /// `(1 - b z w)(z - a w) / sqrt((1-a^2)(1-b^2))`.
    pub fn p_full(&self) -> LaurentPoly {
        let (a, b) = (self.a, self.b);
        let s = 1.0 / ((1.0 - a * a) * (1.0 - b * b)).sqrt();
        LaurentPoly::from_terms(vec![(1, 0, r(s)), (0, 1, r(-a * s)), (2, 1, r(-b * s)), (1, 2, r(a * b * s))])
    }

    /// Stable factor `(1 - b z w) / sqrt(1 - b^2)`.
    pub fn p(&self) -> LaurentPoly {
        let s = 1.0 / (1.0 - self.b * self.b).sqrt();
        LaurentPoly::from_terms(vec![(0, 0, r(s)), (1, 1, r(-self.b * s))])
    }

    /// Stable factor `(1 - a z w) / sqrt(1 - a^2)`.
    pub fn q(&self) -> LaurentPoly {
        let s = 1.0 / (1.0 - self.a * self.a).sqrt();
        LaurentPoly::from_terms(vec![(0, 0, r(s)), (1, 1, r(-self.a * s))])
    }

    pub fn k(&self) -> CMat {
        real_mat(&[&[self.a, 0.0], &[0.0, 0.0]])
    }

    pub fn k1(&self) -> CMat {
        real_mat(&[&[0.0, 0.0], &[0.0, self.b]])
    }

    /// Shared by the lex and revlex orderings.
    pub fn gamma(&self) -> CMat {
        real_mat(&[&[0.0, (1.0 - self.a * self.a).sqrt(), 0.0], &[0.0, 0.0, 1.0]])
    }

    /// Shared by the lex and revlex orderings.
    pub fn gamma1(&self) -> CMat {
        real_mat(&[&[1.0, 0.0, 0.0], &[0.0, (1.0 - self.b * self.b).sqrt(), 0.0]])
    }

    pub fn v_tilde(&self) -> CMat {
        real_mat(&[&[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0]])
    }
}
