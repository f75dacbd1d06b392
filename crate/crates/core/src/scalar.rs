use std::fmt::{Debug, Display};

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating-point type the library is generic over.
///
/// The associated constants are the default tolerances for that precision.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Debug + Display + Default + Send + Sync + 'static
{
    /// Frobenius residual accepted for unitarity checks.
    const UNITARY_TOL: f64;
    /// Relative singular-value threshold used for numerical rank.
    const RANK_TOL: f64;
    /// Entry-wise tolerance for series coefficient comparisons.
    const SERIES_TOL: f64;
    /// Negative eigenvalues above `-EIG_CLAMP` are clamped to zero before rooting.
    const EIG_CLAMP: f64;

    /// Converts an `f64` literal into `Self`.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const UNITARY_TOL: f64 = 1e-10;
    const RANK_TOL: f64 = 1e-9;
    const SERIES_TOL: f64 = 1e-8;
    const EIG_CLAMP: f64 = 1e-12;
}

impl Real for f32 {
    const UNITARY_TOL: f64 = 1e-4;
    const RANK_TOL: f64 = 1e-4;
    const SERIES_TOL: f64 = 1e-3;
    const EIG_CLAMP: f64 = 1e-5;
}

pub type C<T> = Complex<T>;
