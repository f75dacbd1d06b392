//! Spectral moments, first-return amplitudes and Schur functions of subspaces
//! for finite unitaries.

use num_complex::Complex;
use num_traits::Zero;

use crate::cmv::BuiltOperator;
use crate::error::{Error, Result};
use crate::linalg::{is_unitary, ComplexMatrix, IndexSubspace};
use crate::scalar::Real;
use crate::series::MatrixPowerSeries;

/// First-return amplitudes `a_{V,1}..a_{V,horizon}` of a subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnAmplitudes<T> {
    pub subspace: IndexSubspace,
    pub horizon: usize,
    pub amplitudes: Vec<ComplexMatrix<T>>,
    /// `false` when window padding could have reached the amplitudes.
    pub exact: bool,
}

impl<T: Real> ReturnAmplitudes<T> {
    /// `f_V = Σ a_{V,n}† z^{n−1}` truncated at `horizon − 1`.
    pub fn schur_series(&self) -> MatrixPowerSeries<T> {
        let coeffs = self.amplitudes.iter().map(|a| a.adjoint()).collect();
        MatrixPowerSeries::new(coeffs).expect("amplitudes share one shape").mark_schur()
    }
}

/// Quantum-walk return statistics of a state in `V`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnStatistics<T> {
    /// `(n, p_n)` with `p_n = ‖a_{V,n}ψ‖²`.
    pub probabilities: Vec<(usize, T)>,
    pub cumulative: T,
    /// `Σ_{n ≤ horizon} n·p_n`; a partial sum, not the expected return time.
    pub partial_expected_time: T,
}

fn require_square_match<T: Real>(u: &ComplexMatrix<T>, ambient: usize) -> Result<()> {
    if !u.is_square() {
        return Err(Error::NotSquare { rows: u.rows(), cols: u.cols() });
    }
    if u.rows() != ambient {
        return Err(Error::DimensionMismatch(format!(
            "operator of size {} with subspace of ambient dimension {ambient}",
            u.rows()
        )));
    }
    Ok(())
}

fn require_unitary<T: Real>(u: &ComplexMatrix<T>) -> Result<()> {
    let tol = T::of(T::UNITARY_TOL) * T::of(u.rows().max(1) as f64).sqrt();
    let check = is_unitary(u, tol)?;
    if !check.unitary {
        return Err(Error::NotUnitary(check.residual.as_f64()));
    }
    Ok(())
}

fn check_basis(n: usize, basis: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &i in basis {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, dim: n });
        }
        if seen[i] {
            return Err(Error::InvalidPartition(format!("duplicate basis index {i}")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// `μ_{V,n} = P U^n P` restricted to `V`; negative `n` uses `U†`.
pub fn spectral_moments<T: Real>(u: &ComplexMatrix<T>, v: &IndexSubspace, n: i64) -> Result<ComplexMatrix<T>> {
    require_square_match(u, v.ambient_dim())?;
    require_unitary(u)?;
    let step = if n < 0 { u.adjoint() } else { u.clone() };
    let all: Vec<usize> = (0..u.rows()).collect();
    let mut x = ComplexMatrix::identity(u.rows()).select(&all, v.indices());
    for _ in 0..n.unsigned_abs() {
        x = &step * &x;
    }
    Ok(x.select(v.indices(), &(0..v.dim()).collect::<Vec<_>>()))
}

/// `F_V(z) = 𝟙 + 2 Σ_{n≥1} μ_{V,n}† z^n`, truncated at `order`.
pub fn caratheodory_of_subspace<T: Real>(
    u: &ComplexMatrix<T>,
    v: &IndexSubspace,
    order: usize,
) -> Result<MatrixPowerSeries<T>> {
    require_square_match(u, v.ambient_dim())?;
    require_unitary(u)?;
    let all: Vec<usize> = (0..u.rows()).collect();
    let cols: Vec<usize> = (0..v.dim()).collect();
    let mut x = ComplexMatrix::identity(u.rows()).select(&all, v.indices());
    let mut coeffs = vec![ComplexMatrix::identity(v.dim())];
    let two = T::of(2.0);
    for _ in 1..=order {
        x = u * &x;
        coeffs.push(x.select(v.indices(), &cols).adjoint().scale_real(two));
    }
    MatrixPowerSeries::new(coeffs)
}

/// `a_{V,n} = P U (P⊥ U)^{n−1} P` in the given (ordered) basis of `V`.
pub fn return_amplitudes_in_basis<T: Real>(
    u: &ComplexMatrix<T>,
    basis: &[usize],
    horizon: usize,
) -> Result<Vec<ComplexMatrix<T>>> {
    if !u.is_square() {
        return Err(Error::NotSquare { rows: u.rows(), cols: u.cols() });
    }
    check_basis(u.rows(), basis)?;
    let n = u.rows();
    let all: Vec<usize> = (0..n).collect();
    let cols: Vec<usize> = (0..basis.len()).collect();
    let mut in_v = vec![false; n];
    for &i in basis {
        in_v[i] = true;
    }
    let mut y = u.select(&all, basis);
    let mut out = Vec::with_capacity(horizon);
    for step in 0..horizon {
        if step > 0 {
            for (i, &inside) in in_v.iter().enumerate() {
                if inside {
                    for c in 0..basis.len() {
                        y[(i, c)] = Complex::zero();
                    }
                }
            }
            y = u * &y;
        }
        out.push(y.select(basis, &cols));
    }
    Ok(out)
}

/// First-return amplitudes of `V` up to `horizon`.
pub fn first_return_amplitudes<T: Real>(
    u: &ComplexMatrix<T>,
    v: &IndexSubspace,
    horizon: usize,
) -> Result<ReturnAmplitudes<T>> {
    require_square_match(u, v.ambient_dim())?;
    require_unitary(u)?;
    let amplitudes = return_amplitudes_in_basis(u, v.indices(), horizon)?;
    Ok(ReturnAmplitudes { subspace: v.clone(), horizon, amplitudes, exact: true })
}

/// First-return amplitudes on a built operator, flagging edge effects of padded windows.
pub fn window_return_amplitudes<T: Real>(
    op: &BuiltOperator<T>,
    v: &IndexSubspace,
    horizon: usize,
) -> Result<ReturnAmplitudes<T>> {
    let mut amps = first_return_amplitudes(&op.matrix, v, horizon)?;
    let last_block = v.indices().last().map_or(0, |&i| i / op.d);
    amps.exact = op.is_exact(last_block, horizon);
    Ok(amps)
}

/// `f_V = Σ a_{V,n}† z^{n−1}` truncated at `order`.
pub fn schur_of_subspace<T: Real>(
    u: &ComplexMatrix<T>,
    v: &IndexSubspace,
    order: usize,
) -> Result<MatrixPowerSeries<T>> {
    Ok(first_return_amplitudes(u, v, order + 1)?.schur_series())
}

/// Schur function of the span of `basis`, represented in that basis order.
pub fn schur_of_basis<T: Real>(u: &ComplexMatrix<T>, basis: &[usize], order: usize) -> Result<MatrixPowerSeries<T>> {
    require_unitary(u)?;
    if basis.is_empty() {
        return Err(Error::DimensionMismatch("Schur function of the zero subspace".into()));
    }
    let amps = return_amplitudes_in_basis(u, basis, order + 1)?;
    Ok(MatrixPowerSeries::new(amps.iter().map(|a| a.adjoint()).collect())?.mark_schur())
}

/// Schur function of blocks `j..=k` of a built operator; refuses inexact windows unless `allow_inexact`.
pub fn schur_of_window<T: Real>(
    op: &BuiltOperator<T>,
    j: usize,
    k: usize,
    order: usize,
    allow_inexact: bool,
) -> Result<MatrixPowerSeries<T>> {
    let v = op.block_subspace(j, k)?;
    let amps = window_return_amplitudes(op, &v, order + 1)?;
    if !amps.exact && !allow_inexact {
        return Err(Error::InexactWindow { horizon: order + 1, margin: op.margin(k).unwrap_or(0) });
    }
    Ok(amps.schur_series())
}

/// `P (U − z P⊥)^{-1} P` restricted to the span of `basis`.
pub fn schur_resolvent<T: Real>(u: &ComplexMatrix<T>, basis: &[usize], z: Complex<T>) -> Result<ComplexMatrix<T>> {
    if !u.is_square() {
        return Err(Error::NotSquare { rows: u.rows(), cols: u.cols() });
    }
    check_basis(u.rows(), basis)?;
    let n = u.rows();
    let mut a = u.clone();
    for i in 0..n {
        if !basis.contains(&i) {
            a[(i, i)] -= z;
        }
    }
    let all: Vec<usize> = (0..n).collect();
    let rhs = ComplexMatrix::identity(n).select(&all, basis);
    let x = a.solve(&rhs)?;
    Ok(x.select(basis, &(0..basis.len()).collect::<Vec<_>>()))
}

/// Eight sample points with `|z| ≤ 0.5` used by [`resolvent_cross_check`].
pub fn resolvent_sample_points<T: Real>() -> Vec<Complex<T>> {
    (0..8)
        .map(|k| {
            let r = if k % 2 == 0 { 0.25 } else { 0.5 };
            let t = std::f64::consts::TAU * (k as f64) / 8.0 + 0.3;
            Complex::new(T::of(r * t.cos()), T::of(r * t.sin()))
        })
        .collect()
}

/// Largest discrepancy between the Taylor route and the resolvent route for `f_V`.
///
/// The series is taken to a high enough order that truncation stays far below `tol`
/// on the sample points.
pub fn resolvent_cross_check<T: Real>(u: &ComplexMatrix<T>, v: &IndexSubspace, tol: T) -> Result<T> {
    let order = 48;
    let f = schur_of_subspace(u, v, order)?;
    let mut worst = T::zero();
    for z in resolvent_sample_points::<T>() {
        let direct = schur_resolvent(u, v.indices(), z)?;
        worst = worst.max(f.evaluate(z).max_abs_diff(&direct));
    }
    if worst > tol {
        return Err(Error::Inconsistent(format!("Taylor and resolvent routes for f_V differ by {:e}", worst.as_f64())));
    }
    Ok(worst)
}

/// First-return probabilities of `ψ ∈ V` (coordinates in the basis of `V`).
pub fn return_statistics<T: Real>(
    u: &ComplexMatrix<T>,
    v: &IndexSubspace,
    psi: &[Complex<T>],
    horizon: usize,
) -> Result<ReturnStatistics<T>> {
    if psi.len() != v.dim() {
        return Err(Error::DimensionMismatch(format!("state of length {} for a {}-dim subspace", psi.len(), v.dim())));
    }
    let norm = psi.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
    if (norm - T::one()).abs() > T::of(T::UNITARY_TOL) {
        return Err(Error::NotNormalized(norm.as_f64()));
    }
    let amps = first_return_amplitudes(u, v, horizon)?;
    let mut probabilities = Vec::with_capacity(horizon);
    let mut cumulative = T::zero();
    let mut partial = T::zero();
    for (i, a) in amps.amplitudes.iter().enumerate() {
        let p = a.mat_vec(psi).iter().fold(T::zero(), |acc, z| acc + z.norm_sqr());
        let n = i + 1;
        probabilities.push((n, p));
        cumulative += p;
        partial += T::of(n as f64) * p;
    }
    Ok(ReturnStatistics { probabilities, cumulative, partial_expected_time: partial })
}

/// `(𝟙 − z f_V)(F_V + 𝟙)`, which equals `2·𝟙` as a series.
pub fn schur_caratheodory_product<T: Real>(
    f: &MatrixPowerSeries<T>,
    car: &MatrixPowerSeries<T>,
) -> Result<MatrixPowerSeries<T>> {
    let n = car.order().min(f.order() + 1);
    let zf = f.shift_up().truncate(n);
    let one = MatrixPowerSeries::identity(f.dim(), n);
    one.sub(&zf)?.mul(&car.truncate(n).add(&one)?)
}

/// `2·𝟙` as a constant series; comparison target for [`schur_caratheodory_product`].
pub fn two_identity<T: Real>(dim: usize, order: usize) -> MatrixPowerSeries<T> {
    MatrixPowerSeries::constant(&ComplexMatrix::<T>::identity(dim).scale_real(T::of(2.0)), order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_unit_vector, random_unitary, seeded_rng};
    use crate::series::{poly_mul, rational_taylor};

    type M = ComplexMatrix<f64>;
    type S = MatrixPowerSeries<f64>;

    fn c(x: f64) -> Complex<f64> {
        Complex::new(x, 0.0)
    }

    fn hadamard() -> M {
        let s = 1.0 / 2f64.sqrt();
        M::from_real_rows(&[&[s, s], &[s, -s]])
    }

    #[test]
    fn moments_examples() {
        let u: M = random_unitary(&mut seeded_rng(1), 5);
        let v = IndexSubspace::new(5, [1, 3]).unwrap();
        assert!(spectral_moments(&u, &v, 0).unwrap().distance(&M::identity(2)) < 1e-15);
        let m3 = spectral_moments(&u, &v, 3).unwrap();
        let m_3 = spectral_moments(&u, &v, -3).unwrap();
        assert!(m3.adjoint().distance(&m_3) < 1e-13);
        let u3 = &(&u * &u) * &u;
        assert!(u3.principal(v.indices()).distance(&m3) < 1e-13);
        assert!(matches!(spectral_moments(&M::identity(5).scale_real(2.0), &v, 1), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn identity_operator_returns_at_once() {
        let v = IndexSubspace::new(4, [0, 2]).unwrap();
        let a = first_return_amplitudes(&M::identity(4), &v, 4).unwrap();
        assert!(a.amplitudes[0].distance(&M::identity(2)) < 1e-15);
        assert!(a.amplitudes[1..].iter().all(|m| m.max_abs() == 0.0));
        let s = return_statistics(&M::identity(4), &v, &[c(1.0), c(0.0)], 5).unwrap();
        assert_eq!(s.probabilities[0].1, 1.0);
        assert!(s.probabilities[1..].iter().all(|p| p.1 == 0.0));
    }

    #[test]
    fn whole_space_gives_constant_adjoint() {
        let u: M = random_unitary(&mut seeded_rng(2), 4);
        let f = schur_of_subspace(&u, &IndexSubspace::full(4), 6).unwrap();
        assert!(f.max_coeff_diff(&S::constant(&u.adjoint(), 6)).unwrap() < 1e-14);
    }

    #[test]
    fn hadamard_schur_function() {
        let u = hadamard();
        let f = schur_of_subspace(&u, &IndexSubspace::new(2, [0]).unwrap(), 12).unwrap();
        let r2 = 2f64.sqrt();
        let want = rational_taylor(&[c(1.0), c(r2)], &[c(r2), c(1.0)], 12);
        assert!(f.max_coeff_diff(&S::scalar(&want)).unwrap() < 1e-13);
        let s = return_statistics(&u, &IndexSubspace::new(2, [0]).unwrap(), &[c(1.0)], 10).unwrap();
        assert!((s.probabilities[0].1 - 0.5).abs() < 1e-15);
        assert!(matches!(
            return_statistics(&u, &IndexSubspace::new(2, [0]).unwrap(), &[c(0.5)], 3),
            Err(Error::NotNormalized(_))
        ));
    }

    #[test]
    fn resolvent_route_agrees() {
        let u: M = random_unitary(&mut seeded_rng(3), 7);
        let v = IndexSubspace::new(7, [2, 5]).unwrap();
        assert!(resolvent_cross_check(&u, &v, 1e-8).unwrap() < 1e-10);
    }

    #[test]
    fn schur_caratheodory_product_is_two() {
        let u: M = random_unitary(&mut seeded_rng(4), 6);
        let v = IndexSubspace::new(6, [0, 4]).unwrap();
        let f = schur_of_subspace(&u, &v, 10).unwrap();
        let car = caratheodory_of_subspace(&u, &v, 11).unwrap();
        let lhs = schur_caratheodory_product(&f, &car).unwrap();
        assert!(lhs.max_coeff_diff(&two_identity(2, 11)).unwrap() < 1e-12);
        let back = car.caratheodory_to_schur().unwrap();
        assert!(back.max_coeff_diff(&f).unwrap() < 1e-12);
    }

    #[test]
    fn disjoint_first_returns() {
        let mut rng = seeded_rng(5);
        let u: M = random_unitary(&mut rng, 8);
        let v = IndexSubspace::new(8, [1, 2, 6]).unwrap();
        let psi = random_unit_vector(&mut rng, 3);
        let s = return_statistics(&u, &v, &psi, 200).unwrap();
        assert!(s.cumulative <= 1.0 + 1e-10);
        assert!(s.cumulative > 0.99);
    }

    #[test]
    fn scalar_rational_of_second_degree() {
        // f(0) of the Ex-style rational equals 1/6
        let num = poly_mul(&[c(-1.0), c(2.0)], &[c(-1.0), c(3.0)]);
        let den = poly_mul(&[c(2.0), c(-1.0)], &[c(3.0), c(-1.0)]);
        assert!((rational_taylor(&num, &den, 0)[0] - c(1.0 / 6.0)).norm() < 1e-15);
    }
}
