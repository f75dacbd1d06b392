//! Test-local oracles: truncated scalar power series computed without the library.
#![allow(dead_code)]

use khrushchev_core::{CMatrix, Complex64, Params};

pub type Coeffs = Vec<Complex64>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn zero() -> Complex64 {
    r(0.0)
}

/// Taylor coefficients `0..=order` of `p/q` for real polynomials in ascending powers.
pub fn rational(p: &[f64], q: &[f64], order: usize) -> Coeffs {
    let p: Coeffs = p.iter().map(|&x| r(x)).collect();
    let q: Coeffs = q.iter().map(|&x| r(x)).collect();
    div(&pad(&p, order), &pad(&q, order))
}

pub fn pad(a: &[Complex64], order: usize) -> Coeffs {
    (0..=order).map(|k| a.get(k).copied().unwrap_or_else(zero)).collect()
}

pub fn mul(a: &[Complex64], b: &[Complex64]) -> Coeffs {
    let n = a.len().min(b.len());
    (0..n).map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum()).collect()
}

pub fn div(a: &[Complex64], b: &[Complex64]) -> Coeffs {
    let n = a.len().min(b.len());
    assert!(b[0].norm() > 1e-14, "series division by a series vanishing at 0");
    let mut out: Coeffs = Vec::with_capacity(n);
    for k in 0..n {
        let acc: Complex64 = (1..=k).map(|i| b[i] * out[k - i]).sum();
        out.push((a[k] - acc) / b[0]);
    }
    out
}

pub fn shift(a: &[Complex64]) -> Coeffs {
    let mut out = vec![zero()];
    out.extend_from_slice(&a[..a.len() - 1]);
    out
}

pub fn scale(a: &[Complex64], s: Complex64) -> Coeffs {
    a.iter().map(|&x| x * s).collect()
}

pub fn constant(x: Complex64, order: usize) -> Coeffs {
    pad(&[x], order)
}

/// One backward Schur step for scalars: `(α + z g) / (1 + ᾱ z g)`.
pub fn schur_step(alpha: Complex64, g: &[Complex64]) -> Coeffs {
    let zg = shift(g);
    let order = g.len() - 1;
    let num: Coeffs = constant(alpha, order).iter().zip(&zg).map(|(a, b)| a + b).collect();
    let den: Coeffs = constant(r(1.0), order).iter().zip(&zg).map(|(a, b)| a + alpha.conj() * b).collect();
    div(&num, &den)
}

fn scalar_alpha(m: &CMatrix) -> Complex64 {
    assert_eq!(m.shape(), (1, 1));
    m[(0, 0)]
}

/// `f_j` of a scalar parameter sequence: terminal seed, or `0` past the end.
pub fn iterate(p: &Params, j: usize, order: usize) -> Coeffs {
    let mut g = match p.terminal() {
        Some(t) => constant(scalar_alpha(t), order),
        None => constant(zero(), order),
    };
    if j >= p.len() {
        return if p.is_terminated() && j == p.len() { g } else { constant(zero(), order) };
    }
    for a in p.alphas()[j..].iter().rev() {
        g = schur_step(scalar_alpha(a), &g);
    }
    g
}

/// `b_j` of a scalar sequence: Schur function of `(−ᾱ_{j−1}, …, −ᾱ_0, 1)`.
pub fn inverse_iterate(p: &Params, j: usize, order: usize) -> Coeffs {
    let mut g = constant(r(1.0), order);
    for i in 0..j {
        let a = p.alphas().get(i).map(scalar_alpha).unwrap_or_else(zero);
        g = schur_step(-a.conj(), &g);
    }
    g
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
