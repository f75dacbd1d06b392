use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::one();
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting wrong lengths and non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!("{} entries for a {}x{} matrix", data.len(), rows, cols)));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Panics on ragged input.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    /// Builds a real matrix from nested rows of `f64`.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let conv: Vec<Vec<Complex<T>>> =
            rows.iter().map(|r| r.iter().map(|&x| Complex::new(T::of(x), T::zero())).collect()).collect();
        Self::from_rows(&conv)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn scalar(z: Complex<T>) -> Self {
        Self { rows: 1, cols: 1, data: vec![z] }
    }

    pub fn diagonal(diag: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &z) in diag.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.map(|z| z * s)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Checked product.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let brow = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    fn check_same_shape(&self, rhs: &Self) -> Result<()> {
        if self.shape() != rhs.shape() {
            return Err(Error::DimensionMismatch(format!("{}x{} vs {}x{}", self.rows, self.cols, rhs.rows, rhs.cols)));
        }
        Ok(())
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape(rhs)?;
        Ok(self.zip_with(rhs, |a, b| a + b))
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self> {
        self.check_same_shape(rhs)?;
        Ok(self.zip_with(rhs, |a, b| a - b))
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(Complex<T>, Complex<T>) -> Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Frobenius norm of `self - rhs`.
    pub fn distance(&self, rhs: &Self) -> T {
        assert_eq!(self.shape(), rhs.shape(), "distance between different shapes");
        self.data.iter().zip(&rhs.data).fold(T::zero(), |acc, (&a, &b)| acc + (a - b).norm_sqr()).sqrt()
    }

    /// Largest entry-wise modulus of `self - rhs`.
    pub fn max_abs_diff(&self, rhs: &Self) -> T {
        assert_eq!(self.shape(), rhs.shape(), "difference between different shapes");
        self.data.iter().zip(&rhs.data).fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).norm()))
    }

    /// Contiguous block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        assert!(r0 + nr <= self.rows && c0 + nc <= self.cols, "block out of bounds");
        Self::from_fn(nr, nc, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        assert!(r0 + b.rows <= self.rows && c0 + b.cols <= self.cols, "block out of bounds");
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Submatrix on the given row and column index lists (in the listed order).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    /// Principal submatrix on an index list.
    pub fn principal(&self, idx: &[usize]) -> Self {
        self.select(idx, idx)
    }

    /// Square matrix of size `n` equal to the identity except on `idx`, where `self` is placed.
    pub fn embed(&self, n: usize, idx: &[usize]) -> Self {
        assert!(self.is_square() && self.rows == idx.len(), "embedding shape mismatch");
        let mut out = Self::identity(n);
        for i in 0..n {
            if idx.contains(&i) {
                out[(i, i)] = Complex::zero();
            }
        }
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                out[(i, j)] = self[(a, b)];
            }
        }
        out
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, self.cols, other);
        out
    }

    pub fn direct_sum_all(parts: &[Self]) -> Self {
        let r = parts.iter().map(|p| p.rows).sum();
        let c = parts.iter().map(|p| p.cols).sum();
        let mut out = Self::zeros(r, c);
        let (mut i, mut j) = (0, 0);
        for p in parts {
            out.set_block(i, j, p);
            i += p.rows;
            j += p.cols;
        }
        out
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn mat_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.cols, "vector length mismatch");
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .fold(Complex::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `‖self - self†‖_F`.
    pub fn hermitian_residual(&self) -> T {
        assert!(self.is_square(), "hermitian residual of non-square matrix");
        self.distance(&self.adjoint())
    }

    /// Converts the scalar type.
    pub fn cast<U: Real>(&self) -> ComplexMatrix<U> {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| Complex::new(U::of(z.re.as_f64()), U::of(z.im.as_f64()))).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

// Operator impls panic on shape mismatch; the checked forms are `matmul`, `try_add`, `try_sub`.
impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl<T: Real> Neg for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn neg(self) -> ComplexMatrix<T> {
        self.map(|z| -z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = ComplexMatrix<f64>;

    #[test]
    fn product_and_adjoint() {
        let a = M::from_rows(&[
            vec![Complex::new(1.0, 1.0), Complex::new(2.0, 0.0)],
            vec![Complex::new(0.0, -1.0), Complex::new(3.0, 2.0)],
        ]);
        let i = M::identity(2);
        assert_eq!(&a * &i, a);
        assert_eq!(a.adjoint().adjoint(), a);
        assert_eq!(a.adjoint()[(0, 1)], Complex::new(0.0, 1.0));
        let p = &a * &a;
        assert_eq!(
            p[(0, 0)],
            Complex::new(1.0, 1.0) * Complex::new(1.0, 1.0) + Complex::new(2.0, 0.0) * Complex::new(0.0, -1.0)
        );
    }

    #[test]
    fn rejects_bad_construction() {
        assert!(M::from_row_major(2, 2, vec![Complex::zero(); 3]).is_err());
        assert_eq!(M::from_row_major(1, 1, vec![Complex::new(f64::NAN, 0.0)]), Err(Error::NonFinite));
        assert!(M::zeros(2, 3).matmul(&M::zeros(2, 3)).is_err());
    }

    #[test]
    fn embed_and_direct_sum() {
        let b = M::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = b.embed(3, &[0, 2]);
        assert_eq!(e, M::from_real_rows(&[&[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0]]));
        let s = M::identity(1).direct_sum(&b);
        assert_eq!(s, M::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0]]));
        assert_eq!(s.principal(&[1, 2]), b);
    }
}
