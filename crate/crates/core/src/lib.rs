//! Block CMV and Hessenberg unitaries built from matrix Verblunsky coefficients,
//! operator-valued Schur functions of subspaces, overlapping factorizations of
//! finite unitaries, and verifiers for the Khrushchev factorization formulas.
//!
//! All numerics are generic over the real scalar type (see [`Real`]); the
//! aliases at the crate root fix it to `f64`.

pub mod campaign;
pub mod cmv;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod khrushchev;
pub mod linalg;
pub mod overlap;
pub mod pathcount;
pub mod random;
pub mod scalar;
pub mod schur;
pub mod series;
pub mod spectral;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Complex64 = num_complex::Complex<f64>;
pub type CMatrix = linalg::ComplexMatrix<f64>;
pub type Series = series::MatrixPowerSeries<f64>;
pub type Params = schur::SchurParameterSequence<f64>;
