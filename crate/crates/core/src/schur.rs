//! Matrix Schur algorithm: parameters to series and back, iterates, inverse
//! iterates and the scalar Möbius-type transforms.

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_psd_sqrt, is_unitary, operator_norm, polar_unitary, ComplexMatrix};
use crate::scalar::Real;
use crate::series::MatrixPowerSeries;

/// Norm above which `schur_forward` treats a coefficient as unitary (terminal).
pub const TERMINAL_THRESHOLD: f64 = 1e-8;

/// Block dimension, ordered strict contractions `α_0, α_1, …` and an optional unitary terminal.
#[derive(Clone, Debug, PartialEq)]
pub struct SchurParameterSequence<T> {
    d: usize,
    alphas: Vec<ComplexMatrix<T>>,
    terminal: Option<ComplexMatrix<T>>,
}

/// How the backward recursion of [`synthesize`] was seeded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SynthesisSeed {
    Terminal,
    Zero,
}

impl SynthesisSeed {
    pub fn as_str(self) -> &'static str {
        match self {
            SynthesisSeed::Terminal => "terminal",
            SynthesisSeed::Zero => "zero",
        }
    }
}

impl<T: Real> SchurParameterSequence<T> {
    pub fn new(d: usize, alphas: Vec<ComplexMatrix<T>>, terminal: Option<ComplexMatrix<T>>) -> Result<Self> {
        let margin = T::of(T::UNITARY_TOL);
        for (index, a) in alphas.iter().enumerate() {
            if a.shape() != (d, d) {
                return Err(Error::DimensionMismatch(format!("parameter {index} is not {d}x{d}")));
            }
            if !a.is_finite() {
                return Err(Error::NonFinite);
            }
            let norm = operator_norm(a);
            if norm >= T::one() - margin {
                return Err(Error::NonContractive { index, norm: norm.as_f64() });
            }
        }
        if let Some(t) = &terminal {
            if t.shape() != (d, d) {
                return Err(Error::DimensionMismatch(format!("terminal is not {d}x{d}")));
            }
            let check = is_unitary(t, margin)?;
            if !check.unitary {
                return Err(Error::NonUnitaryTerminal(check.residual.as_f64()));
            }
        }
        Ok(Self { d, alphas, terminal })
    }

    /// Scalar parameters closed by an optional terminal.
    pub fn scalar(alphas: &[Complex<T>], terminal: Option<Complex<T>>) -> Result<Self> {
        Self::new(1, alphas.iter().map(|&a| ComplexMatrix::scalar(a)).collect(), terminal.map(ComplexMatrix::scalar))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alphas(&self) -> &[ComplexMatrix<T>] {
        &self.alphas
    }

    pub fn alpha(&self, j: usize) -> &ComplexMatrix<T> {
        &self.alphas[j]
    }

    pub fn terminal(&self) -> Option<&ComplexMatrix<T>> {
        self.terminal.as_ref()
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty() && self.terminal.is_none()
    }

    pub fn is_terminated(&self) -> bool {
        self.terminal.is_some()
    }

    pub fn seed(&self) -> SynthesisSeed {
        if self.terminal.is_some() {
            SynthesisSeed::Terminal
        } else {
            SynthesisSeed::Zero
        }
    }

    /// Entry-wise transposed parameters `α_j^T`.
    pub fn transpose(&self) -> Self {
        Self {
            d: self.d,
            alphas: self.alphas.iter().map(|a| a.transpose()).collect(),
            terminal: self.terminal.as_ref().map(|t| t.transpose()),
        }
    }

    /// First `n` parameters, dropping the terminal.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n > self.alphas.len() {
            return Err(Error::InsufficientParameters { needed: n, available: self.alphas.len() });
        }
        Ok(Self { d: self.d, alphas: self.alphas[..n].to_vec(), terminal: None })
    }

    /// Same parameters closed by `terminal`.
    pub fn with_terminal(&self, terminal: ComplexMatrix<T>) -> Result<Self> {
        Self::new(self.d, self.alphas.clone(), Some(terminal))
    }

    /// Parameters of the `j`-th Schur iterate, `(α_j, α_{j+1}, …)`.
    pub fn iterate(&self, j: usize) -> Result<Self> {
        if j > self.alphas.len() {
            return Err(Error::InsufficientParameters { needed: j, available: self.alphas.len() });
        }
        Ok(Self { d: self.d, alphas: self.alphas[j..].to_vec(), terminal: self.terminal.clone() })
    }

    /// Parameters of the `j`-th inverse iterate, `(−α_{j−1}†, …, −α_0†, 𝟙)`.
    pub fn inverse_iterate(&self, j: usize) -> Result<Self> {
        if j > self.alphas.len() {
            return Err(Error::InsufficientParameters { needed: j, available: self.alphas.len() });
        }
        Ok(Self {
            d: self.d,
            alphas: self.alphas[..j].iter().rev().map(|a| -&a.adjoint()).collect(),
            terminal: Some(ComplexMatrix::identity(self.d)),
        })
    }
}

/// Defect matrices `(ρ^L, ρ^R) = ((1 − α†α)^{1/2}, (1 − αα†)^{1/2})`.
pub fn defects<T: Real>(alpha: &ComplexMatrix<T>) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    let id = ComplexMatrix::identity(alpha.rows());
    let adj = alpha.adjoint();
    let rl = hermitian_psd_sqrt(&(&id - &(&adj * alpha)))?;
    let rr = hermitian_psd_sqrt(&(&id - &(alpha * &adj)))?;
    Ok((rl, rr))
}

/// Runs `steps` steps of the Schur algorithm on `f`.
///
/// Stops early with a terminal when a coefficient of norm above `1 − 1e−8` appears.
pub fn schur_forward<T: Real>(f: &MatrixPowerSeries<T>, steps: usize) -> Result<SchurParameterSequence<T>> {
    if steps > f.order() {
        return Err(Error::OutOfRange(format!("{steps} steps on a series of order {}", f.order())));
    }
    let d = f.dim();
    let id = ComplexMatrix::identity(d);
    let mut g = f.clone();
    let mut alphas = Vec::with_capacity(steps);
    let mut terminal = None;
    for index in 0..steps {
        let a = g.coeff(0).clone();
        let norm = operator_norm(&a).as_f64();
        if norm > 1.0 + TERMINAL_THRESHOLD {
            return Err(Error::NonContractive { index, norm });
        }
        if norm > 1.0 - TERMINAL_THRESHOLD {
            if !is_unitary(&a, T::of(1e-6))?.unitary {
                return Err(Error::DegenerateParameter { index, norm });
            }
            terminal = Some(polar_unitary(&a)?);
            break;
        }
        let (rl, rr) = defects(&a)?;
        let rr_inv = rr.inverse()?;
        let num = g.sub(&MatrixPowerSeries::constant(&a, g.order()))?.shift_down()?;
        let den = MatrixPowerSeries::constant(&id, g.order()).sub(&g.left_mul(&a.adjoint()))?;
        g = num.mul(&den.inverse()?)?.left_mul(&rr_inv).right_mul(&rl);
        alphas.push(a);
    }
    SchurParameterSequence::new(d, alphas, terminal)
}

/// One backward Schur step, `α + ρ^R z f (𝟙 + α† z f)^{-1} ρ^L`, at the order of `f`.
pub fn mobius_step<T: Real>(alpha: &ComplexMatrix<T>, f: &MatrixPowerSeries<T>) -> Result<MatrixPowerSeries<T>> {
    if alpha.shape() != (f.dim(), f.dim()) {
        return Err(Error::DimensionMismatch("parameter and series block sizes differ".into()));
    }
    let norm = operator_norm(alpha);
    if norm > T::one() + T::of(T::UNITARY_TOL) {
        return Err(Error::NonContractive { index: 0, norm: norm.as_f64() });
    }
    let n = f.order();
    let (rl, rr) = defects(alpha)?;
    let zf = f.shift_up().truncate(n);
    let den = MatrixPowerSeries::identity(f.dim(), n).add(&zf.left_mul(&alpha.adjoint()))?.inverse()?;
    let tail = zf.mul(&den)?.left_mul(&rr).right_mul(&rl);
    Ok(MatrixPowerSeries::constant(alpha, n).add(&tail)?.mark_schur())
}

/// Schur function with the given parameters, truncated at `order`.
///
/// The backward recursion starts from the terminal, or from `f ≡ 0` past the last
/// parameter of an unterminated sequence.
pub fn synthesize<T: Real>(p: &SchurParameterSequence<T>, order: usize) -> Result<MatrixPowerSeries<T>> {
    if p.is_empty() {
        return Err(Error::InsufficientParameters { needed: 1, available: 0 });
    }
    let mut f = match p.terminal() {
        Some(t) => MatrixPowerSeries::constant(t, order),
        None => MatrixPowerSeries::zero(p.d(), order),
    };
    for a in p.alphas().iter().rev() {
        f = mobius_step(a, &f)?;
    }
    Ok(f.mark_schur())
}

/// Scalar transform `T_{u,v}(g, h) = (zgh + ug + vh)/(1 + v̄zg + ūzh)`.
pub fn binary_transform<T: Real>(
    u: Complex<T>,
    v: Complex<T>,
    g: &MatrixPowerSeries<T>,
    h: &MatrixPowerSeries<T>,
) -> Result<MatrixPowerSeries<T>> {
    if g.dim() != 1 || h.dim() != 1 {
        return Err(Error::DimensionMismatch("binary transform is scalar only".into()));
    }
    let s = u.norm() + v.norm();
    if s > T::one() + T::of(1e-12) {
        return Err(Error::InadmissibleTransform(s.as_f64()));
    }
    let n = g.order().min(h.order());
    let (g, h) = (g.truncate(n), h.truncate(n));
    let zg = g.shift_up().truncate(n);
    let zh = h.shift_up().truncate(n);
    let num = zg.mul(&h)?.add(&g.scale(u))?.add(&h.scale(v))?;
    let den = MatrixPowerSeries::identity(1, n).add(&zg.scale(v.conj()))?.add(&zh.scale(u.conj()))?;
    Ok(num.mul(&den.inverse()?)?.mark_schur())
}

/// Scalar `T_α(f) = (zf + α)/(1 + ᾱzf)`.
pub fn scalar_mobius<T: Real>(alpha: Complex<T>, f: &MatrixPowerSeries<T>) -> Result<MatrixPowerSeries<T>> {
    binary_transform(alpha, Complex::zero(), &MatrixPowerSeries::identity(1, f.order()), f)
}

/// Scalar monomial `z^j` truncated at `order`.
pub fn monomial_series<T: Real>(j: usize, order: usize) -> MatrixPowerSeries<T> {
    MatrixPowerSeries::monomial(&ComplexMatrix::scalar(Complex::one()), j, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_contraction, random_parameters, seeded_rng};
    use crate::series::{poly_mul, rational_taylor};

    type M = ComplexMatrix<f64>;
    type S = MatrixPowerSeries<f64>;
    type P = SchurParameterSequence<f64>;

    fn c(re: f64) -> Complex<f64> {
        Complex::new(re, 0.0)
    }

    #[test]
    fn invariants_enforced() {
        assert!(matches!(P::scalar(&[c(1.0)], None), Err(Error::NonContractive { index: 0, .. })));
        assert!(matches!(P::scalar(&[c(0.5)], Some(c(0.5))), Err(Error::NonUnitaryTerminal(_))));
        assert!(P::new(2, vec![M::zeros(1, 1)], None).is_err());
    }

    #[test]
    fn forward_of_zero_and_unimodular_constant() {
        let p = schur_forward(&S::zero(1, 6), 4).unwrap();
        assert_eq!(p.len(), 4);
        assert!(p.alphas().iter().all(|a| a.max_abs() == 0.0));
        let g = Complex::from_polar(1.0, 0.7);
        let p = schur_forward(&S::scalar(&[g, c(0.0), c(0.0)]), 2).unwrap();
        assert!(p.alphas().is_empty());
        assert!((p.terminal().unwrap()[(0, 0)] - g).norm() < 1e-14);
    }

    #[test]
    fn forward_rejects_non_contractive() {
        assert!(matches!(schur_forward(&S::scalar(&[c(1.5), c(0.0)]), 1), Err(Error::NonContractive { .. })));
    }

    #[test]
    fn rational_round_trip() {
        // (2z−1)(3z−1)/((2−z)(3−z))
        let num = poly_mul(&[c(-1.0), c(2.0)], &[c(-1.0), c(3.0)]);
        let den = poly_mul(&[c(2.0), c(-1.0)], &[c(3.0), c(-1.0)]);
        let f = S::scalar(&rational_taylor(&num, &den, 16));
        let p = schur_forward(&f, 16).unwrap();
        assert!((p.alpha(0)[(0, 0)] - c(1.0 / 6.0)).norm() < 1e-14);
        let back = synthesize(&p, 16).unwrap();
        assert!(back.max_coeff_diff(&f).unwrap() < 1e-8);
    }

    #[test]
    fn synthesize_examples() {
        let g = Complex::from_polar(1.0, -0.3);
        let f = synthesize(&P::scalar(&[], Some(g)).unwrap(), 5).unwrap();
        assert!(f.max_coeff_diff(&S::constant(&M::scalar(g), 5)).unwrap() < 1e-15);
        let f = synthesize(&P::scalar(&[c(0.0)], Some(c(1.0))).unwrap(), 5).unwrap();
        assert!(f.max_coeff_diff(&monomial_series(1, 5)).unwrap() < 1e-15);
        assert!(synthesize(&P::new(2, vec![], None).unwrap(), 3).is_err());
    }

    #[test]
    fn random_round_trip_d2() {
        let p: P = random_parameters(&mut seeded_rng(9), 2, 5, false);
        let f = synthesize(&p, 16).unwrap();
        let q = schur_forward(&f, 5).unwrap();
        for j in 0..5 {
            assert!(q.alpha(j).max_abs_diff(p.alpha(j)) <= 1e-9);
        }
        assert!(f.contractivity_check(1e-6).pass);
    }

    #[test]
    fn iterate_examples() {
        let p = P::scalar(&[c(0.1), c(0.2), c(0.3)], None).unwrap();
        assert_eq!(p.iterate(0).unwrap(), p);
        assert_eq!(p.iterate(2).unwrap(), P::scalar(&[c(0.3)], None).unwrap());
        assert!(p.iterate(4).is_err());
        let f = synthesize(&p, 12).unwrap();
        let mut g = f.clone();
        for j in 0..2 {
            let step = schur_forward(&g, 1).unwrap();
            assert!((step.alpha(0)[(0, 0)] - p.alpha(j)[(0, 0)]).norm() < 1e-12);
            g = forward_once(&g);
        }
        let f2 = synthesize(&p.iterate(2).unwrap(), 10).unwrap();
        assert!(g.max_coeff_diff(&f2).unwrap() < 1e-10);
    }

    fn forward_once(f: &S) -> S {
        let a = f.coeff(0).clone();
        let (rl, rr) = defects(&a).unwrap();
        let num = f.sub(&S::constant(&a, f.order())).unwrap().shift_down().unwrap();
        let den = S::identity(1, f.order()).sub(&f.left_mul(&a.adjoint())).unwrap();
        num.mul(&den.inverse().unwrap()).unwrap().left_mul(&rr.inverse().unwrap()).right_mul(&rl)
    }

    #[test]
    fn inverse_iterate_examples() {
        let p = P::scalar(&[c(0.4), c(-0.2)], None).unwrap();
        let b0 = p.inverse_iterate(0).unwrap();
        assert!(b0.alphas().is_empty() && b0.terminal() == Some(&M::identity(1)));
        // b_1 = (z − a)/(1 − a z)
        let b1 = synthesize(&p.inverse_iterate(1).unwrap(), 10).unwrap();
        let want = rational_taylor(&[c(-0.4), c(1.0)], &[c(1.0), c(-0.4)], 10);
        assert!(b1.max_coeff_diff(&S::scalar(&want)).unwrap() < 1e-14);
        let zeros = P::scalar(&[c(0.0); 4], None).unwrap();
        for j in 0..=4 {
            let bj = synthesize(&zeros.inverse_iterate(j).unwrap(), 8).unwrap();
            assert!(bj.max_coeff_diff(&monomial_series(j, 8)).unwrap() < 1e-15);
        }
    }

    #[test]
    fn mobius_examples() {
        let f = S::scalar(&[c(0.3), c(-0.1), c(0.2), c(0.05)]);
        let t0 = mobius_step(&M::zeros(1, 1), &f).unwrap();
        assert!(t0.max_coeff_diff(&f.shift_up().truncate(3)).unwrap() < 1e-15);
        let a = Complex::new(0.3, 0.4);
        let t = mobius_step(&M::scalar(a), &S::identity(1, 4)).unwrap();
        assert!((t.coeff(0)[(0, 0)] - a).norm() < 1e-15);
        let back = forward_once(&mobius_step(&M::scalar(a), &f).unwrap());
        assert!(back.max_coeff_diff(&f).unwrap() < 1e-13);
        let sm = scalar_mobius(a, &f).unwrap();
        assert!(sm.max_coeff_diff(&mobius_step(&M::scalar(a), &f).unwrap()).unwrap() < 1e-14);
    }

    #[test]
    fn binary_transform_examples() {
        let mut rng = seeded_rng(4);
        let g = synthesize(&random_parameters(&mut rng, 1, 4, false), 10).unwrap();
        let h = synthesize(&random_parameters(&mut rng, 1, 4, false), 10).unwrap();
        let t = binary_transform(c(0.0), c(0.0), &g, &h).unwrap();
        assert!(t.max_coeff_diff(&g.mul(&h).unwrap().shift_up().truncate(10)).unwrap() < 1e-15);
        let a: M = random_contraction(&mut rng, 1);
        let t = binary_transform(a[(0, 0)], c(0.0), &S::identity(1, 10), &h).unwrap();
        assert!(t.max_coeff_diff(&mobius_step(&a, &h).unwrap()).unwrap() < 1e-13);
        assert!(matches!(binary_transform(c(0.7), c(0.5), &g, &h), Err(Error::InadmissibleTransform(_))));
    }

    #[test]
    fn intertwining_identity() {
        let mut rng = seeded_rng(12);
        for d in 1..=3 {
            let a: M = random_contraction(&mut rng, d);
            let (rl, rr) = defects(&a).unwrap();
            assert!((&a * &rl).distance(&(&rr * &a)) <= 1e-10);
        }
    }
}
