use num_complex::Complex;
use num_traits::Zero;

use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

const MAX_SWEEPS: usize = 80;

/// LU factorization with partial pivoting, `P·A = L·U` stored compactly.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: ComplexMatrix<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    pub fn new(a: &ComplexMatrix<T>) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() {
            return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
        }
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = a.max_abs().max(T::min_positive_value());
        let tiny = scale * T::epsilon() * T::of(n.max(1) as f64);
        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, lu[(i, k)].norm()))
                    .fold((k, T::zero()), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= tiny {
                return Err(Error::Singular);
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    let t = lu[(p, j)];
                    lu[(p, j)] = lu[(k, j)];
                    lu[(k, j)] = t;
                }
            }
            let piv = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / piv;
                lu[(i, k)] = f;
                if f.is_zero() {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[(k, j)];
                    lu[(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { lu, perm })
    }

    /// Solves `A X = B`.
    pub fn solve(&self, b: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        let n = self.lu.rows();
        if b.rows() != n {
            return Err(Error::DimensionMismatch(format!("rhs has {} rows, expected {n}", b.rows())));
        }
        let m = b.cols();
        let mut x = b.select(&self.perm, &(0..m).collect::<Vec<_>>());
        for c in 0..m {
            for i in 0..n {
                let mut s = x[(i, c)];
                for k in 0..i {
                    s -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, c)];
                for k in i + 1..n {
                    s -= self.lu[(i, k)] * x[(k, c)];
                }
                x[(i, c)] = s / self.lu[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> ComplexMatrix<T> {
        self.solve(&ComplexMatrix::identity(self.lu.rows())).expect("square identity rhs")
    }
}

impl<T: Real> ComplexMatrix<T> {
    pub fn inverse(&self) -> Result<Self> {
        Ok(Lu::new(self)?.inverse())
    }

    /// Solves `self · X = b`.
    pub fn solve(&self, b: &Self) -> Result<Self> {
        Lu::new(self)?.solve(b)
    }
}

/// Jacobi rotation zeroing the (p,q) entry of a Hermitian 2×2 problem
/// `[[app, apq],[conj(apq), aqq]]`. Returns `(c, s, phase)` with the unitary
/// `G = [[c, s],[-s·conj(phase), c·conj(phase)]]`.
fn jacobi_rotation<T: Real>(app: T, aqq: T, apq: Complex<T>) -> (T, T, Complex<T>) {
    let r = apq.norm();
    let phase = apq / r;
    let theta = (aqq - app) / (T::of(2.0) * r);
    let t = if theta.is_zero() { T::one() } else { theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt()) };
    let c = T::one() / (t * t + T::one()).sqrt();
    (c, t * c, phase)
}

/// Applies `A ← A·G` on columns p, q.
fn rotate_columns<T: Real>(a: &mut ComplexMatrix<T>, p: usize, q: usize, c: T, s: T, phase: Complex<T>) {
    let pc = phase.conj();
    for i in 0..a.rows() {
        let x = a[(i, p)];
        let y = a[(i, q)];
        a[(i, p)] = x * c - y * pc * s;
        a[(i, q)] = x * s + y * pc * c;
    }
}

/// Applies `A ← G†·A` on rows p, q.
fn rotate_rows<T: Real>(a: &mut ComplexMatrix<T>, p: usize, q: usize, c: T, s: T, phase: Complex<T>) {
    for i in 0..a.cols() {
        let x = a[(p, i)];
        let y = a[(q, i)];
        a[(p, i)] = x * c - y * phase * s;
        a[(q, i)] = x * s + y * phase * c;
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
///
/// Returns eigenvalues in ascending order and the matching unitary matrix of eigenvectors (columns).
pub fn hermitian_eigen<T: Real>(m: &ComplexMatrix<T>) -> Result<(Vec<T>, ComplexMatrix<T>)> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let n = m.rows();
    let scale = m.frobenius_norm().max(T::one());
    let herm = m.hermitian_residual();
    if herm > T::of(T::UNITARY_TOL) * scale {
        return Err(Error::NotHermitian(herm.as_f64()));
    }
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    let tiny = T::min_positive_value() / T::epsilon();
    for _ in 0..MAX_SWEEPS {
        let off = (0..n)
            .flat_map(|p| (p + 1..n).map(move |q| (p, q)))
            .fold(T::zero(), |acc, (p, q)| acc + a[(p, q)].norm_sqr());
        if off.sqrt() <= T::epsilon() * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq.norm() <= tiny {
                    continue;
                }
                let (c, s, phase) = jacobi_rotation(a[(p, p)].re, a[(q, q)].re, apq);
                rotate_columns(&mut a, p, q, c, s, phase);
                rotate_rows(&mut a, p, q, c, s, phase);
                rotate_columns(&mut v, p, q, c, s, phase);
                a[(p, q)] = Complex::zero();
                a[(q, p)] = Complex::zero();
                a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
                a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).expect("finite eigenvalues"));
    let vals = order.iter().map(|&i| a[(i, i)].re).collect();
    let vecs = v.select(&(0..n).collect::<Vec<_>>(), &order);
    Ok((vals, vecs))
}

/// Non-negative square root of a Hermitian positive semidefinite matrix.
///
/// Eigenvalues in `[-EIG_CLAMP, 0)` are clamped to zero; anything lower is an error.
pub fn hermitian_psd_sqrt<T: Real>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let (vals, vecs) = hermitian_eigen(m)?;
    let clamp = T::of(T::EIG_CLAMP) * m.frobenius_norm().max(T::one());
    if let Some(&low) = vals.first() {
        if low < -clamp {
            return Err(Error::NegativeEigenvalue(low.as_f64()));
        }
    }
    let roots: Vec<Complex<T>> = vals.iter().map(|&l| Complex::new(l.max(T::zero()).sqrt(), T::zero())).collect();
    let r = &(&vecs * &ComplexMatrix::diagonal(&roots)) * &vecs.adjoint();
    let half = T::of(0.5);
    Ok((&r + &r.adjoint()).scale_real(half))
}

/// Singular values in descending order (one-sided Jacobi).
pub fn singular_values<T: Real>(m: &ComplexMatrix<T>) -> Vec<T> {
    let mut a = if m.rows() >= m.cols() { m.clone() } else { m.adjoint() };
    let n = a.cols();
    let tol = T::epsilon() * T::of(n.max(1) as f64);
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), Complex::zero());
                for i in 0..a.rows() {
                    let x = a[(i, p)];
                    let y = a[(i, q)];
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                if gamma.norm() <= tol * (alpha * beta).sqrt() || gamma.is_zero() {
                    continue;
                }
                rotated = true;
                let (c, s, phase) = jacobi_rotation(alpha, beta, gamma);
                rotate_columns(&mut a, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> =
        (0..n).map(|j| (0..a.rows()).fold(T::zero(), |acc, i| acc + a[(i, j)].norm_sqr()).sqrt()).collect();
    sv.sort_by(|x, y| y.partial_cmp(x).expect("finite singular values"));
    sv
}

/// Number of singular values above `rel_tol` times the largest one.
pub fn numerical_rank<T: Real>(m: &ComplexMatrix<T>, rel_tol: T) -> usize {
    let sv = singular_values(m);
    match sv.first() {
        Some(&s0) if s0 > T::zero() => sv.iter().filter(|&&s| s > rel_tol * s0).count(),
        _ => 0,
    }
}

pub fn operator_norm<T: Real>(m: &ComplexMatrix<T>) -> T {
    singular_values(m).first().copied().unwrap_or_else(T::zero)
}

/// Outcome of a unitarity test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitarityCheck<T> {
    pub unitary: bool,
    /// `max(‖M†M − 1‖_F, ‖MM† − 1‖_F)`.
    pub residual: T,
}

pub fn is_unitary<T: Real>(m: &ComplexMatrix<T>, tol: T) -> Result<UnitarityCheck<T>> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let id = ComplexMatrix::identity(m.rows());
    let adj = m.adjoint();
    let r1 = (&adj * m).distance(&id);
    let r2 = (m * &adj).distance(&id);
    let residual = r1.max(r2);
    Ok(UnitarityCheck { unitary: residual <= tol, residual })
}

/// Orthonormal basis (as columns) of the span of `m`'s columns, chosen greedily:
/// at each step the remaining column with the largest residual norm is taken, ties
/// going to the lowest index. Stops after `max_rank` vectors or when residuals drop
/// below `rel_tol` times the largest column norm.
pub fn pivoted_orthonormal_basis<T: Real>(m: &ComplexMatrix<T>, max_rank: usize, rel_tol: T) -> ComplexMatrix<T> {
    let rows = m.rows();
    let mut cols: Vec<Vec<Complex<T>>> = (0..m.cols()).map(|j| m.column(j)).collect();
    let norm = |v: &[Complex<T>]| v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
    let ref_norm = cols.iter().map(|c| norm(c)).fold(T::zero(), T::max);
    let mut basis: Vec<Vec<Complex<T>>> = Vec::new();
    let mut used = vec![false; cols.len()];
    while basis.len() < max_rank {
        let mut best: Option<(usize, T)> = None;
        for (j, c) in cols.iter().enumerate() {
            if used[j] {
                continue;
            }
            let nj = norm(c);
            if best.is_none_or(|(_, b)| nj > b) {
                best = Some((j, nj));
            }
        }
        let Some((j, nj)) = best else { break };
        if nj <= rel_tol * ref_norm || nj.is_zero() {
            break;
        }
        used[j] = true;
        let mut q: Vec<Complex<T>> = cols[j].iter().map(|&z| z / nj).collect();
        // second Gram-Schmidt pass against the accepted basis
        for b in &basis {
            let proj = b.iter().zip(&q).fold(Complex::zero(), |acc, (&x, &y)| acc + x.conj() * y);
            for (qi, &bi) in q.iter_mut().zip(b) {
                *qi -= bi * proj;
            }
        }
        let nq = norm(&q);
        for z in q.iter_mut() {
            *z /= nq;
        }
        for (k, c) in cols.iter_mut().enumerate() {
            if used[k] {
                continue;
            }
            let proj = q.iter().zip(c.iter()).fold(Complex::zero(), |acc, (&x, &y)| acc + x.conj() * y);
            for (ci, &qi) in c.iter_mut().zip(&q) {
                *ci -= qi * proj;
            }
        }
        basis.push(q);
    }
    ComplexMatrix::from_fn(rows, basis.len(), |i, j| basis[j][i])
}

/// Unitary factor of the polar decomposition, `M (M†M)^{-1/2}`.
pub fn polar_unitary<T: Real>(m: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    let h = hermitian_psd_sqrt(&(&m.adjoint() * m))?;
    Ok(m * &h.inverse()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_matrix, seeded_rng};

    type M = ComplexMatrix<f64>;

    #[test]
    fn lu_inverse_round_trip() {
        let mut rng = seeded_rng(3);
        let a: M = random_matrix(&mut rng, 5, 5);
        let inv = a.inverse().unwrap();
        assert!((&a * &inv).distance(&M::identity(5)) < 1e-12);
        assert_eq!(M::zeros(3, 3).inverse(), Err(Error::Singular));
    }

    #[test]
    fn eigen_reconstructs() {
        let mut rng = seeded_rng(11);
        let g: M = random_matrix(&mut rng, 6, 6);
        let h = &g + &g.adjoint();
        let (vals, vecs) = hermitian_eigen(&h).unwrap();
        let lam = M::diagonal(&vals.iter().map(|&l| Complex::new(l, 0.0)).collect::<Vec<_>>());
        assert!((&h * &vecs).distance(&(&vecs * &lam)) < 1e-11);
        assert!(is_unitary(&vecs, 1e-12).unwrap().unitary);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn psd_sqrt_examples() {
        assert!(hermitian_psd_sqrt(&M::identity(3)).unwrap().distance(&M::identity(3)) < 1e-15);
        let r = hermitian_psd_sqrt(&M::from_real_rows(&[&[0.75]])).unwrap();
        assert!((r[(0, 0)].re - 3f64.sqrt() / 2.0).abs() < 1e-15);
        let mut rng = seeded_rng(5);
        let a: M = random_matrix(&mut rng, 4, 4);
        let ata = &a.adjoint() * &a;
        let r = hermitian_psd_sqrt(&ata).unwrap();
        assert!((&r * &r).distance(&ata) <= 1e-12 * ata.frobenius_norm().max(1.0));
        assert!(matches!(hermitian_psd_sqrt(&M::from_real_rows(&[&[-1.0]])), Err(Error::NegativeEigenvalue(_))));
        assert!(matches!(
            hermitian_psd_sqrt(&M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])),
            Err(Error::NotHermitian(_))
        ));
    }

    #[test]
    fn clamp_tiny_negative_eigenvalue() {
        let r = hermitian_psd_sqrt(&M::from_real_rows(&[&[-1e-14, 0.0], &[0.0, 4.0]])).unwrap();
        assert!(r.distance(&M::from_real_rows(&[&[0.0, 0.0], &[0.0, 2.0]])) < 1e-15);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numerical_rank(&M::zeros(4, 4), 1e-9), 0);
        let p = M::diagonal(&[Complex::new(1.0, 0.0), Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)]);
        assert_eq!(numerical_rank(&p, 1e-9), 2);
        let mut rng = seeded_rng(8);
        let a: M = random_matrix(&mut rng, 5, 2);
        let b: M = random_matrix(&mut rng, 2, 7);
        assert_eq!(numerical_rank(&(&a * &b), 1e-9), 2);
    }

    #[test]
    fn singular_values_of_diagonal() {
        let d = M::diagonal(&[Complex::new(3.0, 0.0), Complex::new(0.0, -5.0), Complex::new(1.0, 0.0)]);
        let sv = singular_values(&d);
        assert!((sv[0] - 5.0).abs() < 1e-14 && (sv[1] - 3.0).abs() < 1e-14 && (sv[2] - 1.0).abs() < 1e-14);
        assert!((operator_norm(&d) - 5.0).abs() < 1e-14);
    }

    #[test]
    fn unitarity_examples() {
        let c = is_unitary(&M::identity(4), 1e-10).unwrap();
        assert!(c.unitary && c.residual == 0.0);
        assert!(is_unitary(&M::zeros(2, 3), 1e-10).is_err());
        assert!(!is_unitary(&M::identity(2).scale_real(2.0), 1e-10).unwrap().unitary);
    }

    #[test]
    fn pivoted_basis_prefers_largest_column() {
        let m = M::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 3.0, 0.0], &[0.0, 0.0, 3.0]]);
        let q = pivoted_orthonormal_basis(&m, 2, 1e-9);
        assert_eq!(q.cols(), 2);
        assert!((q[(1, 0)].re - 1.0).abs() < 1e-15);
        assert!((q[(2, 1)].re - 1.0).abs() < 1e-15);
    }
}
