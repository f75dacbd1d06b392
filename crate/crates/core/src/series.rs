//! Truncated matrix-valued power series `c_0 + c_1 z + … + c_N z^N`.

use std::fmt::Write as _;

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{operator_norm, ComplexMatrix, Lu};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixPowerSeries<T> {
    dim: usize,
    coeffs: Vec<ComplexMatrix<T>>,
    schur: bool,
}

/// Result of sampling `‖f(z)‖` on the fixed grid inside the disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContractivityCheck<T> {
    pub pass: bool,
    /// Largest `‖f(z)‖ − 1 − allowance(z)` over the grid (non-positive on success).
    pub worst_excess: T,
}

/// Sixteen sample points: four radii up to 0.9, four angles each, staggered per radius.
pub fn contractivity_grid<T: Real>() -> Vec<Complex<T>> {
    let mut pts = Vec::with_capacity(16);
    for (ri, r) in [0.3, 0.5, 0.7, 0.9].into_iter().enumerate() {
        for k in 0..4 {
            let theta = std::f64::consts::TAU * (k as f64 / 4.0 + ri as f64 / 16.0);
            pts.push(Complex::new(T::of(r * theta.cos()), T::of(r * theta.sin())));
        }
    }
    pts
}

impl<T: Real> MatrixPowerSeries<T> {
    /// Series from coefficients `c_0..c_N`; all must be `d×d` with the same `d`.
    pub fn new(coeffs: Vec<ComplexMatrix<T>>) -> Result<Self> {
        let first = coeffs.first().ok_or_else(|| Error::DimensionMismatch("empty coefficient list".into()))?;
        let dim = first.rows();
        if coeffs.iter().any(|c| c.shape() != (dim, dim)) {
            return Err(Error::DimensionMismatch("coefficients must share one square shape".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, coeffs, schur: false })
    }

    fn raw(dim: usize, coeffs: Vec<ComplexMatrix<T>>) -> Self {
        Self { dim, coeffs, schur: false }
    }

    pub fn zero(dim: usize, order: usize) -> Self {
        Self::raw(dim, vec![ComplexMatrix::zeros(dim, dim); order + 1])
    }

    pub fn identity(dim: usize, order: usize) -> Self {
        Self::constant(&ComplexMatrix::identity(dim), order)
    }

    pub fn constant(c: &ComplexMatrix<T>, order: usize) -> Self {
        assert!(c.is_square(), "series coefficients must be square");
        let mut s = Self::zero(c.rows(), order);
        s.coeffs[0] = c.clone();
        s
    }

    /// `c·z^k` truncated at `order`.
    pub fn monomial(c: &ComplexMatrix<T>, k: usize, order: usize) -> Self {
        let mut s = Self::zero(c.rows(), order);
        if k <= order {
            s.coeffs[k] = c.clone();
        }
        s
    }

    /// Scalar series from complex coefficients.
    pub fn scalar(coeffs: &[Complex<T>]) -> Self {
        assert!(!coeffs.is_empty(), "empty scalar series");
        Self::raw(1, coeffs.iter().map(|&z| ComplexMatrix::scalar(z)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> &ComplexMatrix<T> {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[ComplexMatrix<T>] {
        &self.coeffs
    }

    /// Scalar coefficients of a `1×1` series.
    pub fn scalar_coeffs(&self) -> Vec<Complex<T>> {
        assert_eq!(self.dim, 1, "scalar_coeffs on a matrix series");
        self.coeffs.iter().map(|c| c[(0, 0)]).collect()
    }

    /// Whether the series was produced as a Schur function.
    pub fn is_schur(&self) -> bool {
        self.schur
    }

    pub fn mark_schur(mut self) -> Self {
        self.schur = true;
        self
    }

    pub fn truncate(&self, order: usize) -> Self {
        assert!(order <= self.order(), "cannot extend a truncated series");
        Self::raw(self.dim, self.coeffs[..=order].to_vec())
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!("block dims {} and {}", self.dim, other.dim)));
        }
        Ok(())
    }

    /// Truncated Cauchy product; the order is the smaller of the two.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.order().min(other.order());
        let mut out = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
            for i in 0..=k {
                acc = &acc + &(&self.coeffs[i] * &other.coeffs[k - i]);
            }
            out.push(acc);
        }
        Ok(Self::raw(self.dim, out))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.order().min(other.order());
        Ok(Self::raw(self.dim, (0..=n).map(|k| &self.coeffs[k] + &other.coeffs[k]).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let n = self.order().min(other.order());
        Ok(Self::raw(self.dim, (0..=n).map(|k| &self.coeffs[k] - &other.coeffs[k]).collect()))
    }

    pub fn neg(&self) -> Self {
        Self::raw(self.dim, self.coeffs.iter().map(|c| -c).collect())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::raw(self.dim, self.coeffs.iter().map(|c| c.scale(s)).collect())
    }

    /// `m · self` for a constant matrix `m`.
    pub fn left_mul(&self, m: &ComplexMatrix<T>) -> Self {
        let coeffs: Vec<_> = self.coeffs.iter().map(|c| m * c).collect();
        Self::raw(m.rows(), coeffs)
    }

    /// `self · m` for a constant matrix `m`.
    pub fn right_mul(&self, m: &ComplexMatrix<T>) -> Self {
        let coeffs: Vec<_> = self.coeffs.iter().map(|c| c * m).collect();
        Self::raw(m.cols(), coeffs)
    }

    /// `z · self`; the order grows by one since the product is known one degree further.
    pub fn shift_up(&self) -> Self {
        let mut coeffs = vec![ComplexMatrix::zeros(self.dim, self.dim)];
        coeffs.extend(self.coeffs.iter().cloned());
        Self::raw(self.dim, coeffs)
    }

    /// `self / z`, requiring a vanishing constant term; the order drops by one.
    pub fn shift_down(&self) -> Result<Self> {
        if self.order() == 0 {
            return Err(Error::OutOfRange("cannot divide an order-0 series by z".into()));
        }
        let c0 = self.coeffs[0].max_abs();
        if c0 > T::of(T::SERIES_TOL) {
            return Err(Error::Inconsistent(format!("division by z with constant term {}", c0)));
        }
        Ok(Self::raw(self.dim, self.coeffs[1..].to_vec()))
    }

    /// Multiplicative inverse; the constant term must be invertible.
    pub fn inverse(&self) -> Result<Self> {
        Ok(self.inverse_with_condition()?.0)
    }

    /// Inverse together with the Frobenius condition estimate of `c_0`.
    pub fn inverse_with_condition(&self) -> Result<(Self, T)> {
        let c0 = &self.coeffs[0];
        let lu = Lu::new(c0).map_err(|_| Error::SingularConstantTerm(f64::INFINITY))?;
        let inv0 = lu.inverse();
        let cond = c0.frobenius_norm() * inv0.frobenius_norm();
        if !(cond.as_f64() < 1e14) {
            return Err(Error::SingularConstantTerm(cond.as_f64()));
        }
        let mut out: Vec<ComplexMatrix<T>> = vec![inv0.clone()];
        for k in 1..=self.order() {
            let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
            for i in 1..=k {
                acc = &acc + &(&self.coeffs[i] * &out[k - i]);
            }
            out.push(-&(&inv0 * &acc));
        }
        Ok((Self::raw(self.dim, out), cond))
    }

    /// Coefficient-wise adjoint, `f†(z) = f(z̄)†`.
    pub fn par_dagger(&self) -> Self {
        Self::raw(self.dim, self.coeffs.iter().map(|c| c.adjoint()).collect())
    }

    pub fn transpose(&self) -> Self {
        Self { dim: self.dim, coeffs: self.coeffs.iter().map(|c| c.transpose()).collect(), schur: self.schur }
    }

    /// Horner evaluation.
    pub fn evaluate(&self, z: Complex<T>) -> ComplexMatrix<T> {
        let mut acc = self.coeffs[self.order()].clone();
        for c in self.coeffs[..self.order()].iter().rev() {
            acc = &acc.scale(z) + c;
        }
        acc
    }

    /// Largest entry-wise coefficient difference up to the common order.
    pub fn max_coeff_diff(&self, other: &Self) -> Result<T> {
        self.check_dim(other)?;
        let n = self.order().min(other.order());
        Ok((0..=n).fold(T::zero(), |acc, k| acc.max(self.coeffs[k].max_abs_diff(&other.coeffs[k]))))
    }

    /// Principal block on rows/columns `start..start+size`.
    pub fn principal_block(&self, start: usize, size: usize) -> Self {
        Self::raw(size, self.coeffs.iter().map(|c| c.block(start, start, size, size)).collect())
    }

    /// Principal submatrix on an index list.
    pub fn principal(&self, idx: &[usize]) -> Self {
        Self::raw(idx.len(), self.coeffs.iter().map(|c| c.principal(idx)).collect())
    }

    /// Block-diagonal direct sum; the order is the smallest among the parts.
    pub fn direct_sum(parts: &[&Self]) -> Self {
        assert!(!parts.is_empty(), "direct sum of nothing");
        let n = parts.iter().map(|p| p.order()).min().expect("non-empty");
        let dim = parts.iter().map(|p| p.dim).sum();
        let coeffs = (0..=n)
            .map(|k| ComplexMatrix::direct_sum_all(&parts.iter().map(|p| p.coeffs[k].clone()).collect::<Vec<_>>()))
            .collect();
        Self::raw(dim, coeffs)
    }

    /// `F = (1 + z f)(1 − z f)^{-1}`; the result has order `N + 1`.
    pub fn schur_to_caratheodory(&self) -> Result<Self> {
        let zf = self.shift_up();
        let one = Self::identity(self.dim, zf.order());
        one.add(&zf)?.mul(&one.sub(&zf)?.inverse()?)
    }

    /// `f = z^{-1}(F − 1)(F + 1)^{-1}`; the result has order `N − 1`.
    pub fn caratheodory_to_schur(&self) -> Result<Self> {
        let one = Self::identity(self.dim, self.order());
        let num = self.sub(&one)?.shift_down()?;
        Ok(num.mul(&self.add(&one)?.inverse()?)?.mark_schur())
    }

    /// Samples `‖f(z)‖` on [`contractivity_grid`].
    ///
    /// Each point gets the allowance `tol + r^{N+1}/(1−r)`, which bounds the truncation
    /// tail of a genuine Schur function (its coefficients have norm at most one).
    pub fn contractivity_check(&self, tol: T) -> ContractivityCheck<T> {
        let mut worst = T::neg_infinity();
        for z in contractivity_grid::<T>() {
            let r = z.norm();
            let tail = r.powi(self.order() as i32 + 1) / (T::one() - r);
            let excess = operator_norm(&self.evaluate(z)) - T::one() - tol - tail;
            worst = worst.max(excess);
        }
        ContractivityCheck { pass: worst <= T::zero(), worst_excess: worst }
    }

    /// CSV dump with columns `n,row,col,re,im`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,row,col,re,im\n");
        for (n, c) in self.coeffs.iter().enumerate() {
            for i in 0..self.dim {
                for j in 0..self.dim {
                    let z = c[(i, j)];
                    let _ = writeln!(s, "{n},{i},{j},{},{}", z.re.as_f64(), z.im.as_f64());
                }
            }
        }
        s
    }

    /// Parses the format written by [`Self::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 5 {
                return Err(Error::Parse(format!("line {}: expected 5 fields", lineno + 1)));
            }
            let idx = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)));
            let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)));
            entries.push((idx(f[0])?, idx(f[1])?, idx(f[2])?, num(f[3])?, num(f[4])?));
        }
        let order = entries.iter().map(|e| e.0).max().ok_or_else(|| Error::Parse("no coefficients".into()))?;
        let dim = entries.iter().map(|e| e.1.max(e.2)).max().unwrap_or(0) + 1;
        let mut coeffs = vec![ComplexMatrix::zeros(dim, dim); order + 1];
        for (n, i, j, re, im) in entries {
            coeffs[n][(i, j)] = Complex::new(T::of(re), T::of(im));
        }
        Self::new(coeffs)
    }
}

/// Maclaurin coefficients of a scalar rational function `p(z)/q(z)` with `q(0) ≠ 0`.
///
/// Polynomials are given by ascending coefficients.
pub fn rational_taylor<T: Real>(p: &[Complex<T>], q: &[Complex<T>], order: usize) -> Vec<Complex<T>> {
    assert!(!q.is_empty() && !q[0].is_zero(), "denominator must not vanish at 0");
    let mut out: Vec<Complex<T>> = Vec::with_capacity(order + 1);
    for k in 0..=order {
        let mut acc = p.get(k).copied().unwrap_or_else(Complex::zero);
        for i in 1..=k.min(q.len() - 1) {
            acc -= q[i] * out[k - i];
        }
        out.push(acc / q[0]);
    }
    out
}

/// Ascending coefficients of a product of polynomials.
pub fn poly_mul<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut out = vec![Complex::zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

impl<T: Real> MatrixPowerSeries<T> {
    /// Identity-coefficient geometric series `Σ z^k`.
    pub fn geometric(dim: usize, order: usize) -> Self {
        Self::raw(dim, vec![ComplexMatrix::identity(dim); order + 1])
    }

    /// `1 − z·1`.
    pub fn one_minus_z(dim: usize, order: usize) -> Self {
        let mut s = Self::identity(dim, order);
        if order >= 1 {
            s.coeffs[1] = ComplexMatrix::identity(dim).scale(-Complex::one());
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_matrix, seeded_rng};

    type S = MatrixPowerSeries<f64>;
    type M = ComplexMatrix<f64>;

    fn random_series(seed: u64, d: usize, n: usize) -> S {
        let mut rng = seeded_rng(seed);
        S::new((0..=n).map(|_| random_matrix(&mut rng, d, d)).collect()).unwrap()
    }

    #[test]
    fn mul_examples() {
        let b = random_series(1, 2, 5);
        assert_eq!(S::identity(2, 5).mul(&b).unwrap(), b);
        let z = S::monomial(&M::identity(2), 1, 4);
        assert_eq!(z.mul(&z).unwrap(), S::monomial(&M::identity(2), 2, 4));
        assert!(S::zero(2, 3).mul(&S::zero(3, 3)).is_err());
    }

    #[test]
    fn mul_matches_double_loop() {
        let a = random_series(2, 3, 6);
        let b = random_series(3, 3, 4);
        let p = a.mul(&b).unwrap();
        assert_eq!(p.order(), 4);
        for k in 0..=4 {
            let mut acc = M::zeros(3, 3);
            for i in 0..=6 {
                for j in 0..=4 {
                    if i + j == k {
                        acc = &acc + &(a.coeff(i) * b.coeff(j));
                    }
                }
            }
            assert!(acc.max_abs_diff(p.coeff(k)) < 1e-13);
        }
    }

    #[test]
    fn inverse_examples() {
        let two = S::constant(&M::identity(2).scale_real(2.0), 3);
        assert_eq!(two.inverse().unwrap(), S::constant(&M::identity(2).scale_real(0.5), 3));
        let g = S::one_minus_z(2, 6).inverse().unwrap();
        assert!(g.max_coeff_diff(&S::geometric(2, 6)).unwrap() < 1e-15);
        let mut a = random_series(4, 3, 8).scale(Complex::new(0.1, 0.0));
        a = a.add(&S::identity(3, 8)).unwrap();
        let r = a.mul(&a.inverse().unwrap()).unwrap();
        assert!(r.max_coeff_diff(&S::identity(3, 8)).unwrap() <= 1e-10);
        assert!(matches!(S::zero(2, 2).inverse(), Err(Error::SingularConstantTerm(_))));
    }

    #[test]
    fn par_dagger_involution() {
        let a = random_series(5, 2, 4);
        assert_eq!(a.par_dagger().par_dagger(), a);
        let real_diag = S::new(vec![M::diagonal(&[Complex::new(1.0, 0.0), Complex::new(2.0, 0.0)]); 3]).unwrap();
        assert_eq!(real_diag.par_dagger(), real_diag);
    }

    #[test]
    fn caratheodory_round_trip() {
        assert_eq!(S::zero(2, 4).schur_to_caratheodory().unwrap(), S::identity(2, 5));
        let f = random_series(6, 2, 10).scale(Complex::new(0.2, 0.0));
        let back = f.schur_to_caratheodory().unwrap().caratheodory_to_schur().unwrap();
        assert_eq!(back.order(), 10);
        assert!(back.max_coeff_diff(&f).unwrap() <= 1e-10);
    }

    #[test]
    fn evaluate_examples() {
        let a = random_series(7, 2, 5);
        assert_eq!(a.evaluate(Complex::zero()), *a.coeff(0));
        let c = S::constant(a.coeff(2), 4);
        assert_eq!(c.evaluate(Complex::new(0.3, -0.2)), *a.coeff(2));
        let x = Complex::new(0.5, 0.0);
        let coeffs = rational_taylor(
            &poly_mul(
                &[Complex::new(-1.0, 0.0), Complex::new(2.0, 0.0)],
                &[Complex::new(-1.0, 0.0), Complex::new(3.0, 0.0)],
            ),
            &poly_mul(
                &[Complex::new(2.0, 0.0), Complex::new(-1.0, 0.0)],
                &[Complex::new(3.0, 0.0), Complex::new(-1.0, 0.0)],
            ),
            60,
        );
        let v = S::scalar(&coeffs).evaluate(x)[(0, 0)];
        assert!(v.norm() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let a = random_series(8, 2, 3);
        let text = a.to_csv();
        assert!(text.starts_with("n,row,col,re,im\n"));
        assert_eq!(text.lines().count(), 1 + 4 * 4);
        assert_eq!(S::from_csv(&text).unwrap(), a);
    }

    #[test]
    fn contractivity_grid_shape() {
        let g = contractivity_grid::<f64>();
        assert_eq!(g.len(), 16);
        assert!(g.iter().all(|z| z.norm() <= 0.9 + 1e-15));
        assert!(S::identity(2, 4).contractivity_check(1e-6).pass);
        assert!(!S::identity(2, 4).scale(Complex::new(1.1, 0.0)).contractivity_check(1e-6).pass);
    }
}
