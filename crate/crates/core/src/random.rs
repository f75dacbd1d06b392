//! Seeded generators for test and campaign inputs.

use num_complex::Complex;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::linalg::{operator_norm, ComplexMatrix};
use crate::scalar::Real;
use crate::schur::SchurParameterSequence;

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<T: Real, R: Rng>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::of(re), T::of(im))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<T: Real, R: Rng>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Complex Gaussian matrix rescaled to operator norm `0.9·r`, `r` uniform in (0, 1).
pub fn random_contraction<T: Real, R: Rng>(rng: &mut R, d: usize) -> ComplexMatrix<T> {
    let g: ComplexMatrix<T> = random_matrix(rng, d, d);
    let r: f64 = rng.random_range(f64::EPSILON..1.0);
    let n = operator_norm(&g);
    if n.is_zero() {
        return g;
    }
    g.scale_real(T::of(0.9 * r) / n)
}

/// Unitary obtained by Gram-Schmidt orthonormalization of a complex Gaussian matrix.
pub fn random_unitary<T: Real, R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix<T> {
    let g: ComplexMatrix<T> = random_matrix(rng, n, n);
    let mut cols: Vec<Vec<Complex<T>>> = (0..n).map(|j| g.column(j)).collect();
    for j in 0..n {
        for _ in 0..2 {
            for k in 0..j {
                let proj = cols[k].iter().zip(&cols[j]).fold(Complex::zero(), |a, (&x, &y)| a + x.conj() * y);
                let ck = cols[k].clone();
                for (y, x) in cols[j].iter_mut().zip(ck) {
                    *y -= x * proj;
                }
            }
        }
        let nrm = cols[j].iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
        for y in cols[j].iter_mut() {
            *y /= nrm;
        }
    }
    ComplexMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// Unit vector with complex Gaussian direction.
pub fn random_unit_vector<T: Real, R: Rng>(rng: &mut R, n: usize) -> Vec<Complex<T>> {
    let v: Vec<Complex<T>> = (0..n).map(|_| gaussian(rng)).collect();
    let nrm = v.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
    v.into_iter().map(|z| z / nrm).collect()
}

/// Random Schur parameter sequence of `len` contractions, optionally closed by a random unitary terminal.
pub fn random_parameters<T: Real, R: Rng>(
    rng: &mut R,
    d: usize,
    len: usize,
    terminal: bool,
) -> SchurParameterSequence<T> {
    let alphas = (0..len).map(|_| random_contraction(rng, d)).collect();
    let term = terminal.then(|| random_unitary(rng, d));
    SchurParameterSequence::new(d, alphas, term).expect("generated parameters satisfy the invariants")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_unitary;

    #[test]
    fn generators_are_reproducible_and_valid() {
        let a: ComplexMatrix<f64> = random_contraction(&mut seeded_rng(1), 3);
        let b: ComplexMatrix<f64> = random_contraction(&mut seeded_rng(1), 3);
        assert_eq!(a, b);
        assert!(operator_norm(&a) < 0.9 + 1e-12);
        let u: ComplexMatrix<f64> = random_unitary(&mut seeded_rng(2), 7);
        assert!(is_unitary(&u, 1e-12).unwrap().unitary);
    }
}
