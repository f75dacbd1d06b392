//! Dense complex matrices, coordinate subspaces and the small set of
//! factorizations the rest of the crate relies on.

mod decomp;
mod matrix;
mod subspace;

pub use decomp::{
    hermitian_eigen, hermitian_psd_sqrt, is_unitary, numerical_rank, operator_norm, pivoted_orthonormal_basis,
    polar_unitary, singular_values, Lu, UnitarityCheck,
};
pub use matrix::ComplexMatrix;
pub use subspace::{projector, IndexSubspace};
