use num_complex::Complex;
use num_traits::One;

use super::ComplexMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Coordinate subspace spanned by a strictly increasing list of basis indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IndexSubspace {
    ambient_dim: usize,
    indices: Vec<usize>,
}

impl IndexSubspace {
    /// Accepts indices in any order; duplicates and out-of-range entries are errors.
    pub fn new(ambient_dim: usize, indices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut idx: Vec<usize> = indices.into_iter().collect();
        idx.sort_unstable();
        for w in idx.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidPartition(format!("duplicate index {}", w[0])));
            }
        }
        if let Some(&last) = idx.last() {
            if last >= ambient_dim {
                return Err(Error::IndexOutOfRange { index: last, dim: ambient_dim });
            }
        }
        Ok(Self { ambient_dim, indices: idx })
    }

    pub fn empty(ambient_dim: usize) -> Self {
        Self { ambient_dim, indices: Vec::new() }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Self { ambient_dim, indices: (0..ambient_dim).collect() }
    }

    /// Canonical block subspace `V_j ⊕ … ⊕ V_k` for block size `d`.
    pub fn blocks(ambient_dim: usize, d: usize, j: usize, k: usize) -> Result<Self> {
        if j > k {
            return Err(Error::OutOfRange(format!("block range {j}..={k}")));
        }
        Self::new(ambient_dim, j * d..(k + 1) * d)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    pub fn complement(&self) -> Self {
        Self { ambient_dim: self.ambient_dim, indices: (0..self.ambient_dim).filter(|&i| !self.contains(i)).collect() }
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch("subspaces of different ambient spaces".into()));
        }
        let mut all = self.indices.clone();
        all.extend(other.indices.iter().copied().filter(|&i| !self.contains(i)));
        Self::new(self.ambient_dim, all)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.ambient_dim == other.ambient_dim && self.indices.iter().all(|&i| other.contains(i))
    }

    /// Boolean membership mask over the ambient space.
    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.ambient_dim];
        for &i in &self.indices {
            m[i] = true;
        }
        m
    }
}

/// Orthogonal projection onto a coordinate subspace.
pub fn projector<T: Real>(sub: &IndexSubspace) -> ComplexMatrix<T> {
    let mut p = ComplexMatrix::zeros(sub.ambient_dim(), sub.ambient_dim());
    for &i in sub.indices() {
        p[(i, i)] = Complex::one();
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;

    type M = ComplexMatrix<f64>;

    #[test]
    fn projector_examples() {
        let p: M = projector(&IndexSubspace::new(2, [0]).unwrap());
        assert_eq!(p, M::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0]]));
        let z: M = projector(&IndexSubspace::empty(3));
        assert_eq!(z, M::zeros(3, 3));
        let p: M = projector(&IndexSubspace::new(6, [2]).unwrap());
        assert_eq!(&p * &p, p);
        assert_eq!(p.adjoint(), p);
    }

    #[test]
    fn validation() {
        assert!(matches!(IndexSubspace::new(3, [3]), Err(Error::IndexOutOfRange { index: 3, dim: 3 })));
        assert!(IndexSubspace::new(3, [1, 1]).is_err());
        let s = IndexSubspace::new(5, [3, 1]).unwrap();
        assert_eq!(s.indices(), &[1, 3]);
        assert_eq!(s.complement().indices(), &[0, 2, 4]);
        assert_eq!(IndexSubspace::blocks(8, 2, 1, 2).unwrap().indices(), &[2, 3, 4, 5]);
    }
}
