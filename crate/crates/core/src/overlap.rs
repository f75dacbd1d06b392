//! Overlapping factorizations `U = (U_LC ⊕ 𝟙_R)(𝟙_L ⊕ U_CR)` of finite unitaries.

use crate::error::{Error, Result};
use crate::linalg::{is_unitary, numerical_rank, pivoted_orthonormal_basis, projector, ComplexMatrix, IndexSubspace};
use crate::scalar::Real;
use crate::series::MatrixPowerSeries;
use crate::spectral::schur_of_basis;

/// Disjoint, exhaustive split of the basis indices into left, center and right parts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspacePartition {
    left: IndexSubspace,
    center: IndexSubspace,
    right: IndexSubspace,
}

impl SubspacePartition {
    pub fn new(ambient_dim: usize, left: Vec<usize>, center: Vec<usize>, right: Vec<usize>) -> Result<Self> {
        let left = IndexSubspace::new(ambient_dim, left)?;
        let center = IndexSubspace::new(ambient_dim, center)?;
        let right = IndexSubspace::new(ambient_dim, right)?;
        let mut seen = vec![0u8; ambient_dim];
        for s in [&left, &center, &right] {
            for &i in s.indices() {
                seen[i] += 1;
            }
        }
        if let Some(i) = seen.iter().position(|&c| c != 1) {
            let what = if seen[i] == 0 { "uncovered" } else { "repeated" };
            return Err(Error::InvalidPartition(format!("index {i} is {what}")));
        }
        Ok(Self { left, center, right })
    }

    pub fn ambient_dim(&self) -> usize {
        self.left.ambient_dim()
    }

    pub fn left(&self) -> &IndexSubspace {
        &self.left
    }

    pub fn center(&self) -> &IndexSubspace {
        &self.center
    }

    pub fn right(&self) -> &IndexSubspace {
        &self.right
    }

    /// Sorted indices of `ℋ_L ⊕ ℋ_C`, the support of `U_LC`.
    pub fn lc_indices(&self) -> Vec<usize> {
        self.left.union(&self.center).expect("same ambient space").indices().to_vec()
    }

    /// Sorted indices of `ℋ_C ⊕ ℋ_R`, the support of `U_CR`.
    pub fn cr_indices(&self) -> Vec<usize> {
        self.center.union(&self.right).expect("same ambient space").indices().to_vec()
    }
}

/// A partition with the two unitary factors, each stored on its sorted index support.
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapFactorization<T> {
    partition: SubspacePartition,
    u_lc: ComplexMatrix<T>,
    u_cr: ComplexMatrix<T>,
}

impl<T: Real> OverlapFactorization<T> {
    pub fn new(partition: SubspacePartition, u_lc: ComplexMatrix<T>, u_cr: ComplexMatrix<T>) -> Result<Self> {
        let nlc = partition.left.dim() + partition.center.dim();
        let ncr = partition.center.dim() + partition.right.dim();
        if u_lc.shape() != (nlc, nlc) || u_cr.shape() != (ncr, ncr) {
            return Err(Error::DimensionMismatch("factor sizes do not match the partition".into()));
        }
        let tol = T::of(T::UNITARY_TOL) * T::of(nlc.max(ncr).max(1) as f64).sqrt();
        for f in [&u_lc, &u_cr] {
            let c = is_unitary(f, tol)?;
            if !c.unitary {
                return Err(Error::NotUnitary(c.residual.as_f64()));
            }
        }
        Ok(Self { partition, u_lc, u_cr })
    }

    pub fn partition(&self) -> &SubspacePartition {
        &self.partition
    }

    pub fn u_lc(&self) -> &ComplexMatrix<T> {
        &self.u_lc
    }

    pub fn u_cr(&self) -> &ComplexMatrix<T> {
        &self.u_cr
    }

    /// `U_LC ⊕ 𝟙_R` on the full space.
    pub fn embed_lc(&self) -> ComplexMatrix<T> {
        self.u_lc.embed(self.partition.ambient_dim(), &self.partition.lc_indices())
    }

    /// `𝟙_L ⊕ U_CR` on the full space.
    pub fn embed_cr(&self) -> ComplexMatrix<T> {
        self.u_cr.embed(self.partition.ambient_dim(), &self.partition.cr_indices())
    }

    pub fn product(&self) -> ComplexMatrix<T> {
        &self.embed_lc() * &self.embed_cr()
    }

    /// `‖(U_LC ⊕ 𝟙)(𝟙 ⊕ U_CR) − U‖_F`.
    pub fn reconstruction_residual(&self, u: &ComplexMatrix<T>) -> T {
        self.product().distance(u)
    }
}

/// Diagnostics of [`check_overlap`].
#[derive(Clone, Debug, PartialEq)]
pub struct OverlapVerdict<T> {
    pub overlapping: bool,
    /// `‖P_R U P_L‖_F`.
    pub leak: T,
    /// Zero threshold used for `leak`, `1e−10·‖U‖_F`.
    pub leak_threshold: T,
    /// Numerical rank of `P_LC U P_CR`.
    pub rank: usize,
    pub center_dim: usize,
}

fn check_dims<T: Real>(u: &ComplexMatrix<T>, p: &SubspacePartition) -> Result<()> {
    if !u.is_square() || u.rows() != p.ambient_dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator with a partition of dimension {}",
            u.rows(),
            u.cols(),
            p.ambient_dim()
        )));
    }
    Ok(())
}

/// Tests `P_R U P_L = 0` and `rank P_LC U P_CR = dim ℋ_C`.
///
/// In finite dimension the rank condition follows from the first one, so a
/// mismatch with a vanishing leak indicates a numerically ill-posed input.
pub fn check_overlap<T: Real>(
    u: &ComplexMatrix<T>,
    partition: &SubspacePartition,
    rel_tol: T,
) -> Result<OverlapVerdict<T>> {
    check_dims(u, partition)?;
    let leak = u.select(partition.right.indices(), partition.left.indices()).frobenius_norm();
    let leak_threshold = T::of(1e-10) * u.frobenius_norm();
    let k = u.select(&partition.lc_indices(), &partition.cr_indices());
    let rank = numerical_rank(&k, rel_tol);
    let center_dim = partition.center.dim();
    Ok(OverlapVerdict {
        overlapping: leak <= leak_threshold && rank == center_dim,
        leak,
        leak_threshold,
        rank,
        center_dim,
    })
}

/// Residuals of `K†K = P_CR − U†P_R U` and `KK† = P_LC − U P_L U†` with `K = P_LC U P_CR`.
pub fn projection_identity_residuals<T: Real>(u: &ComplexMatrix<T>, partition: &SubspacePartition) -> Result<(T, T)> {
    check_dims(u, partition)?;
    let n = partition.ambient_dim();
    let plc: ComplexMatrix<T> = projector(&IndexSubspace::new(n, partition.lc_indices())?);
    let pcr: ComplexMatrix<T> = projector(&IndexSubspace::new(n, partition.cr_indices())?);
    let pl: ComplexMatrix<T> = projector(&partition.left);
    let pr: ComplexMatrix<T> = projector(&partition.right);
    let k = &(&plc * u) * &pcr;
    let ud = u.adjoint();
    let r1 = (&k.adjoint() * &k).distance(&(&pcr - &(&(&ud * &pr) * u)));
    let r2 = (&k * &k.adjoint()).distance(&(&plc - &(&(u * &pl) * &ud)));
    Ok((r1, r2))
}

/// Builds the factors with `W` sending the `i`-th pivoted basis vector of `ran K†K`
/// to the center basis vector `center[target[i]]`.
fn construct_with_targets<T: Real>(
    u: &ComplexMatrix<T>,
    partition: &SubspacePartition,
    target: &[usize],
) -> Result<OverlapFactorization<T>> {
    let verdict = check_overlap(u, partition, T::of(T::RANK_TOL))?;
    if !verdict.overlapping {
        return Err(Error::NotOverlapping(format!(
            "‖P_R U P_L‖ = {:e} (threshold {:e}), rank {} vs center dimension {}",
            verdict.leak.as_f64(),
            verdict.leak_threshold.as_f64(),
            verdict.rank,
            verdict.center_dim
        )));
    }
    let n = partition.ambient_dim();
    let tol = T::of(T::UNITARY_TOL) * T::of(n.max(1) as f64).sqrt();
    let plc: ComplexMatrix<T> = projector(&IndexSubspace::new(n, partition.lc_indices())?);
    let pcr: ComplexMatrix<T> = projector(&IndexSubspace::new(n, partition.cr_indices())?);
    let pl: ComplexMatrix<T> = projector(&partition.left);
    let pr: ComplexMatrix<T> = projector(&partition.right);
    let k = &(&plc * u) * &pcr;
    let ktk = &k.adjoint() * &k;
    let proj_res = (&ktk * &ktk).distance(&ktk);
    if proj_res > tol {
        return Err(Error::NotProjection(proj_res.as_f64()));
    }
    let center = partition.center.indices();
    let q = pivoted_orthonormal_basis(&ktk, center.len(), T::of(T::RANK_TOL));
    if q.cols() != center.len() {
        return Err(Error::NotOverlapping(format!("ran K†K has dimension {} ≠ {}", q.cols(), center.len())));
    }
    let mut w = ComplexMatrix::zeros(n, n);
    for (i, &t) in target.iter().enumerate() {
        let row = center[t];
        for col in 0..n {
            w[(row, col)] = q[(col, i)].conj();
        }
    }
    let right_full = &(&pl + &(&w * &ktk)) + &(&pr * u);
    let left_full = &(&(u * &pl) + &(&k * &w.adjoint())) + &pr;
    let lc = partition.lc_indices();
    let cr = partition.cr_indices();
    let u_lc = left_full.principal(&lc);
    let u_cr = right_full.principal(&cr);
    let fac = OverlapFactorization::new(partition.clone(), u_lc, u_cr)?;
    let off_lc = fac.embed_lc().distance(&left_full);
    let off_cr = fac.embed_cr().distance(&right_full);
    if off_lc > tol || off_cr > tol {
        return Err(Error::Inconsistent(format!(
            "constructed factors are not block-diagonal (residuals {:e}, {:e})",
            off_lc.as_f64(),
            off_cr.as_f64()
        )));
    }
    let rec = fac.reconstruction_residual(u);
    if rec > tol {
        return Err(Error::Inconsistent(format!("reconstruction residual {:e}", rec.as_f64())));
    }
    Ok(fac)
}

/// Constructs an overlapping factorization with the deterministic choice of `W`
/// (pivoted basis of `ran K†K` mapped onto the center basis in index order).
pub fn construct_overlap<T: Real>(
    u: &ComplexMatrix<T>,
    partition: &SubspacePartition,
) -> Result<OverlapFactorization<T>> {
    let identity: Vec<usize> = (0..partition.center.dim()).collect();
    construct_with_targets(u, partition, &identity)
}

/// Like [`construct_overlap`], but the `i`-th pivoted basis vector goes to center position `order[i]`.
pub fn construct_overlap_with_center_order<T: Real>(
    u: &ComplexMatrix<T>,
    partition: &SubspacePartition,
    order: &[usize],
) -> Result<OverlapFactorization<T>> {
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..partition.center.dim()).collect::<Vec<_>>() {
        return Err(Error::InvalidPartition("center order must be a permutation".into()));
    }
    construct_with_targets(u, partition, order)
}

/// The gauge unitary relating two factorizations of one operator.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeRelation<T> {
    /// `U_C` with `Û_LC = U_LC(𝟙 ⊕ U_C)` and `Û_CR = (U_C† ⊕ 𝟙)U_CR`, in center index order.
    pub u_c: ComplexMatrix<T>,
    pub residual: T,
}

/// Extracts `U_C` from `U_LC†·Û_LC` and checks both gauge relations.
pub fn verify_gauge<T: Real>(
    f1: &OverlapFactorization<T>,
    f2: &OverlapFactorization<T>,
    tol: T,
) -> Result<GaugeRelation<T>> {
    if f1.partition != f2.partition {
        return Err(Error::NotGaugeRelated("different partitions".into()));
    }
    let p = &f1.partition;
    let n = p.ambient_dim();
    let center = p.center.indices();
    let x = &f1.embed_lc().adjoint() * &f2.embed_lc();
    let u_c = x.principal(center);
    let gauge = u_c.embed(n, center);
    let r_lc = x.distance(&gauge);
    let y = &f1.embed_cr() * &f2.embed_cr().adjoint();
    let r_cr = y.distance(&gauge);
    let r_u = is_unitary(&u_c, tol)?.residual;
    let residual = r_lc.max(r_cr).max(r_u);
    if residual > tol {
        return Err(Error::NotGaugeRelated(format!(
            "residuals: left {:e}, right {:e}, unitarity {:e}",
            r_lc.as_f64(),
            r_cr.as_f64(),
            r_u.as_f64()
        )));
    }
    Ok(GaugeRelation { u_c, residual })
}

/// Outcome of [`abstract_khrushchev_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct KhrushchevCheck<T> {
    /// Max coefficient residual of `f_V − (𝟙_{V_L} ⊕ f^R)(f^L ⊕ 𝟙_{V_R})`.
    pub residual: T,
    pub order: usize,
    /// Set when the factors came from [`construct_overlap`]: individual factors carry an
    /// arbitrary gauge, only the product is canonical.
    pub gauge_dependent_factors: bool,
    pub f_v: MatrixPowerSeries<T>,
    pub f_left: MatrixPowerSeries<T>,
    pub f_right: MatrixPowerSeries<T>,
}

fn local_positions(support: &[usize], global: &[usize]) -> Result<Vec<usize>> {
    global
        .iter()
        .map(|g| {
            support
                .iter()
                .position(|s| s == g)
                .ok_or_else(|| Error::InvalidPartition(format!("index {g} outside the factor support")))
        })
        .collect()
}

/// Evaluates the factorization identity for a given factorization.
///
/// `V = V_L ⊕ ℋ_C ⊕ V_R` is represented in the basis ordered as `V_L`, then `ℋ_C`,
/// then `V_R`, each part in increasing index order.
pub fn khrushchev_residual<T: Real>(
    u: &ComplexMatrix<T>,
    fac: &OverlapFactorization<T>,
    v_left: &IndexSubspace,
    v_right: &IndexSubspace,
    order: usize,
) -> Result<KhrushchevCheck<T>> {
    let p = fac.partition();
    check_dims(u, p)?;
    if !v_left.is_subset_of(p.left()) || !v_right.is_subset_of(p.right()) {
        return Err(Error::InvalidPartition("V_L ⊆ ℋ_L and V_R ⊆ ℋ_R required".into()));
    }
    let center = p.center.indices();
    let mut basis: Vec<usize> = v_left.indices().to_vec();
    basis.extend_from_slice(center);
    basis.extend_from_slice(v_right.indices());
    if basis.is_empty() {
        return Err(Error::DimensionMismatch("V is the zero subspace".into()));
    }
    let f_v = schur_of_basis(u, &basis, order)?;
    let (nl, nc, nr) = (v_left.dim(), center.len(), v_right.dim());

    let mut lc_global: Vec<usize> = v_left.indices().to_vec();
    lc_global.extend_from_slice(center);
    let mut cr_global: Vec<usize> = center.to_vec();
    cr_global.extend_from_slice(v_right.indices());

    let identity = |m: usize| MatrixPowerSeries::identity(m, order);
    let f_left = if nl + nc > 0 {
        schur_of_basis(fac.u_lc(), &local_positions(&p.lc_indices(), &lc_global)?, order)?
    } else {
        identity(0)
    };
    let f_right = if nc + nr > 0 {
        schur_of_basis(fac.u_cr(), &local_positions(&p.cr_indices(), &cr_global)?, order)?
    } else {
        identity(0)
    };
    let mut left_parts: Vec<MatrixPowerSeries<T>> = Vec::new();
    if nl > 0 {
        left_parts.push(identity(nl));
    }
    if nc + nr > 0 {
        left_parts.push(f_right.clone());
    }
    let mut right_parts: Vec<MatrixPowerSeries<T>> = Vec::new();
    if nl + nc > 0 {
        right_parts.push(f_left.clone());
    }
    if nr > 0 {
        right_parts.push(identity(nr));
    }
    let a = MatrixPowerSeries::direct_sum(&left_parts.iter().collect::<Vec<_>>());
    let b = MatrixPowerSeries::direct_sum(&right_parts.iter().collect::<Vec<_>>());
    let residual = f_v.max_coeff_diff(&a.mul(&b)?)?;
    Ok(KhrushchevCheck { residual, order, gauge_dependent_factors: false, f_v, f_left, f_right })
}

/// Constructs an overlapping factorization of `U` and checks the Schur factorization
/// of `V = V_L ⊕ ℋ_C ⊕ V_R` against it.
pub fn abstract_khrushchev_check<T: Real>(
    u: &ComplexMatrix<T>,
    partition: &SubspacePartition,
    v_left: &IndexSubspace,
    v_right: &IndexSubspace,
    order: usize,
) -> Result<KhrushchevCheck<T>> {
    let fac = construct_overlap(u, partition)?;
    let mut check = khrushchev_residual(u, &fac, v_left, v_right, order)?;
    check.gauge_dependent_factors = true;
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_unitary, seeded_rng};

    type M = ComplexMatrix<f64>;

    fn overlapping(seed: u64, nl: usize, nc: usize, nr: usize) -> (M, SubspacePartition) {
        let mut rng = seeded_rng(seed);
        let a: M = random_unitary(&mut rng, nl + nc);
        let b: M = random_unitary(&mut rng, nc + nr);
        let n = nl + nc + nr;
        let u = &a.embed(n, &(0..nl + nc).collect::<Vec<_>>()) * &b.embed(n, &(nl..n).collect::<Vec<_>>());
        let p = SubspacePartition::new(n, (0..nl).collect(), (nl..nl + nc).collect(), (nl + nc..n).collect()).unwrap();
        (u, p)
    }

    #[test]
    fn partition_validation() {
        assert!(SubspacePartition::new(3, vec![0], vec![1], vec![]).is_err());
        assert!(SubspacePartition::new(3, vec![0], vec![1], vec![1, 2]).is_err());
        let p = SubspacePartition::new(4, vec![3], vec![0], vec![1, 2]).unwrap();
        assert_eq!(p.lc_indices(), vec![0, 3]);
        assert_eq!(p.cr_indices(), vec![0, 1, 2]);
    }

    #[test]
    fn hadamard_is_not_overlapping() {
        let s = 1.0 / 2f64.sqrt();
        let u = M::from_real_rows(&[&[s, s], &[s, -s]]);
        let p = SubspacePartition::new(2, vec![0], vec![], vec![1]).unwrap();
        assert!(!check_overlap(&u, &p, 1e-9).unwrap().overlapping);
        assert!(matches!(construct_overlap(&u, &p), Err(Error::NotOverlapping(_))));
    }

    #[test]
    fn random_construction_round_trip() {
        let (u, p) = overlapping(1, 3, 2, 4);
        assert!(check_overlap(&u, &p, 1e-9).unwrap().overlapping);
        let f = construct_overlap(&u, &p).unwrap();
        assert!(f.reconstruction_residual(&u) <= 1e-12);
        let (r1, r2) = projection_identity_residuals(&u, &p).unwrap();
        assert!(r1 < 1e-12 && r2 < 1e-12);
    }

    #[test]
    fn identity_factorizes_trivially() {
        let p = SubspacePartition::new(5, vec![0, 4], vec![2], vec![1, 3]).unwrap();
        let f = construct_overlap(&M::identity(5), &p).unwrap();
        assert!(f.product().distance(&M::identity(5)) < 1e-14);
    }

    #[test]
    fn gauge_between_constructions() {
        let (u, p) = overlapping(2, 2, 3, 2);
        let f1 = construct_overlap(&u, &p).unwrap();
        let same = verify_gauge(&f1, &f1, 1e-10).unwrap();
        assert!(same.u_c.distance(&M::identity(3)) < 1e-12);
        let f2 = construct_overlap_with_center_order(&u, &p, &[2, 0, 1]).unwrap();
        let g = verify_gauge(&f1, &f2, 1e-10).unwrap();
        assert!(g.u_c.distance(&M::identity(3)) > 1e-3);
    }

    #[test]
    fn khrushchev_on_random_overlap() {
        let (u, p) = overlapping(3, 3, 2, 3);
        let vl = IndexSubspace::new(8, [0, 2]).unwrap();
        let vr = IndexSubspace::new(8, [6]).unwrap();
        let c = abstract_khrushchev_check(&u, &p, &vl, &vr, 12).unwrap();
        assert!(c.residual <= 1e-8, "residual {}", c.residual);
        let c = abstract_khrushchev_check(&u, &p, &IndexSubspace::empty(8), &IndexSubspace::empty(8), 12).unwrap();
        assert!(c.residual <= 1e-8);
    }
}
