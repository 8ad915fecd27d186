//! Independent oracles and random generators shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use bicircle::{LaurentPoly, C64};
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn unit(t: f64) -> C64 {
    C64::from_polar(1.0, t)
}

/// Direct Riemann sum `(1/N^2) sum e^{-ik theta} e^{-il phi} / q(theta, phi)`
/// for `|k| <= kk`, `|l| <= ll`, indexed `[k + kk][l + ll]`.
pub fn riemann_moments(q: impl Fn(C64, C64) -> f64, grid: usize, kk: usize, ll: usize) -> Vec<Vec<C64>> {
    let angles: Vec<f64> = (0..grid).map(|j| 2.0 * PI * j as f64 / grid as f64).collect();
    let recip: Vec<Vec<f64>> =
        angles.iter().map(|&th| angles.iter().map(|&ph| 1.0 / q(unit(th), unit(ph))).collect()).collect();
    let mut out = vec![vec![c(0.0, 0.0); 2 * ll + 1]; 2 * kk + 1];
    for k in -(kk as i32)..=kk as i32 {
        for l in -(ll as i32)..=ll as i32 {
            let mut acc = c(0.0, 0.0);
            for (a, th) in angles.iter().enumerate() {
                let mut row = c(0.0, 0.0);
                for (b, ph) in angles.iter().enumerate() {
                    row += unit(-(l as f64) * ph) * recip[a][b];
                }
                acc += unit(-(k as f64) * th) * row;
            }
            out[(k + kk as i32) as usize][(l + ll as i32) as usize] = acc / (grid * grid) as f64;
        }
    }
    out
}

/// `|p|^2` at a torus point.
pub fn mod_square(p: &LaurentPoly) -> impl Fn(C64, C64) -> f64 + '_ {
    move |z, w| p.evaluate(z, w).unwrap().norm_sqr()
}

/// Random complex coefficients in the unit square.
pub fn random_coeffs(rng: &mut ChaCha8Rng, count: usize) -> Vec<C64> {
    (0..count).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect()
}

/// `1 + sum c_kl z^k w^l` with `sum |c_kl| = budget < 1`: nonzero on the
/// closed bidisk.
pub fn stable_from(coeffs: &[C64], n: usize, m: usize, budget: f64) -> LaurentPoly {
    let total: f64 = coeffs.iter().skip(1).map(|x| x.norm()).sum();
    let s = if total > 0.0 { budget / total } else { 0.0 };
    let mut terms = vec![(0, 0, c(1.0, 0.0))];
    for k in 0..=n {
        for l in 0..=m {
            let idx = k * (m + 1) + l;
            if idx == 0 {
                continue;
            }
            terms.push((k as i32, l as i32, coeffs[idx] * s));
        }
    }
    LaurentPoly::from_terms(terms)
}

pub fn random_stable(rng: &mut ChaCha8Rng, n: usize, m: usize, budget: f64) -> LaurentPoly {
    let co = random_coeffs(rng, (n + 1) * (m + 1));
    stable_from(&co, n, m, budget)
}

/// `|r|^2 + floor` for a polynomial `r` with the given coefficients on
/// `[0,n] x [0,m]`.
pub fn positive_trig(coeffs: &[C64], n: usize, m: usize, floor: f64) -> LaurentPoly {
    let r = LaurentPoly::from_grid(0, n as i32, 0, m as i32, coeffs.to_vec()).unwrap();
    &r.herm_square() + &LaurentPoly::constant(c(floor, 0.0))
}

/// Ascending coefficients of a random univariate polynomial with constant
/// term 1 and every root of modulus above 1.25.
pub fn univariate_stable(rng: &mut ChaCha8Rng, degree: usize) -> Vec<C64> {
    let mut out = vec![c(1.0, 0.0)];
    for _ in 0..degree {
        let r: f64 = rng.gen_range(0.0..0.8);
        let root = C64::from_polar(1.0 / r.max(1e-3), rng.gen_range(0.0..2.0 * PI));
        let mut next = vec![c(0.0, 0.0); out.len() + 1];
        for (j, a) in out.iter().enumerate() {
            next[j] += a;
            next[j + 1] -= a / root;
        }
        out = next;
    }
    out
}

/// Roots of `sum coeffs[j] x^j` as eigenvalues of the companion matrix.
pub fn companion_roots(coeffs: &[C64]) -> Vec<C64> {
    let mut d = coeffs.len() - 1;
    while d > 0 && coeffs[d].norm() == 0.0 {
        d -= 1;
    }
    if d == 0 {
        return Vec::new();
    }
    let lead = coeffs[d];
    let mut m = DMatrix::<C64>::zeros(d, d);
    for i in 1..d {
        m[(i, i - 1)] = c(1.0, 0.0);
    }
    for i in 0..d {
        m[(i, d - 1)] = -coeffs[i] / lead;
    }
    let schur = nalgebra::Schur::new(m);
    let (_, t) = schur.unpack();
    (0..d).map(|i| t[(i, i)]).collect()
}

/// Sample points on the unit circle.
pub fn circle(count: usize, offset: f64) -> Vec<C64> {
    (0..count).map(|j| unit(2.0 * PI * (j as f64 + offset) / count as f64)).collect()
}

/// Ascending coefficients of `prod (x - root)` for random roots with modulus
/// in `[0.4, 2.5]`, degree `1..=max_degree`.
pub fn random_root_poly(rng: &mut ChaCha8Rng, max_degree: usize) -> (Vec<C64>, Vec<C64>) {
    let degree = rng.gen_range(1..=max_degree);
    let roots: Vec<C64> =
        (0..degree).map(|_| C64::from_polar(rng.gen_range(0.4..2.5), rng.gen_range(0.0..2.0 * PI))).collect();
    let mut out = vec![c(1.0, 0.0)];
    for r in &roots {
        let mut next = vec![c(0.0, 0.0); out.len() + 1];
        for (j, a) in out.iter().enumerate() {
            next[j + 1] += a;
            next[j] -= a * r;
        }
        out = next;
    }
    (out, roots)
}

/// Relative distance between the Gohberg-Semencul inverse and the dense
/// inverse of the Toeplitz matrix of `1/|s(w)|^2` for a random stable `s` of
/// degree at most `max_degree`, at order `degree + extra`.
pub fn gohberg_semencul_gap(rng: &mut ChaCha8Rng, max_degree: usize, extra: usize) -> f64 {
    use bicircle::toeplitz::{gohberg_semencul_inverse, parametric_moments};
    let degree = rng.gen_range(1..=max_degree);
    let s = univariate_stable(rng, degree);
    let terms: Vec<(i32, i32, C64)> = s.iter().enumerate().map(|(j, a)| (0, j as i32, *a)).collect();
    let p = LaurentPoly::from_terms(terms);
    let l = degree + extra;
    let pf = parametric_moments(&p, 0.0, l, &Default::default()).unwrap();
    let phi = pf.orthonormal_poly(l).unwrap();
    let r: Vec<C64> = phi.iter().rev().map(|x| x.conj()).collect();
    let inv = gohberg_semencul_inverse(&r).unwrap();
    let dense = pf.toeplitz(l - 1).try_inverse().unwrap();
    (inv - &dense).norm() / dense.norm()
}
