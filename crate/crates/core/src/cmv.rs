//! Block CMV and block Hessenberg unitaries, their submatrices, unitary
//! truncations and standard overlapping factorizations.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{operator_norm, ComplexMatrix, IndexSubspace};
use crate::overlap::{OverlapFactorization, SubspacePartition};
use crate::scalar::Real;
use crate::schur::{defects, SchurParameterSequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// `C = L·M`.
    Cmv,
    /// `Ĉ = M·L`.
    CmvHat,
    /// `H = Θ_0 Θ_1 ⋯`.
    Hessenberg,
    /// `Ĥ = ⋯ Θ_1 Θ_0`.
    HessenbergHat,
}

impl Family {
    pub fn is_cmv(self) -> bool {
        matches!(self, Family::Cmv | Family::CmvHat)
    }

    pub fn is_hat(self) -> bool {
        matches!(self, Family::CmvHat | Family::HessenbergHat)
    }

    /// The family with the other factor order.
    pub fn mirror(self) -> Self {
        match self {
            Family::Cmv => Family::CmvHat,
            Family::CmvHat => Family::Cmv,
            Family::Hessenberg => Family::HessenbergHat,
            Family::HessenbergHat => Family::Hessenberg,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Cmv => "C",
            Family::CmvHat => "Chat",
            Family::Hessenberg => "H",
            Family::HessenbergHat => "Hhat",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C" | "c" | "cmv" => Ok(Family::Cmv),
            "Chat" | "chat" | "cmv_hat" => Ok(Family::CmvHat),
            "H" | "h" | "hessenberg" => Ok(Family::Hessenberg),
            "Hhat" | "hhat" | "hessenberg_hat" => Ok(Family::HessenbergHat),
            other => Err(Error::Parse(format!("unknown family '{other}' (expected C, Chat, H or Hhat)"))),
        }
    }
}

/// Parameters, family and number of materialized canonical blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockOperatorSpec<T> {
    params: SchurParameterSequence<T>,
    family: Family,
    n_blocks: usize,
}

impl<T: Real> BlockOperatorSpec<T> {
    /// A terminated sequence must use `n_blocks = len + 1`; an unterminated one needs
    /// `len ≥ n_blocks − 1` and is only allowed for the CMV families.
    pub fn new(params: SchurParameterSequence<T>, family: Family, n_blocks: usize) -> Result<Self> {
        if n_blocks == 0 {
            return Err(Error::OutOfRange("n_blocks must be at least 1".into()));
        }
        if params.is_terminated() {
            if n_blocks != params.len() + 1 {
                return Err(Error::OutOfRange(format!(
                    "terminated sequence of length {} fixes n_blocks = {}, got {n_blocks}",
                    params.len(),
                    params.len() + 1
                )));
            }
        } else {
            if !family.is_cmv() {
                return Err(Error::MissingTerminal);
            }
            if params.len() + 1 < n_blocks {
                return Err(Error::InsufficientParameters { needed: n_blocks - 1, available: params.len() });
            }
        }
        Ok(Self { params, family, n_blocks })
    }

    /// Exact finite operator of a terminated sequence.
    pub fn finite(params: SchurParameterSequence<T>, family: Family) -> Result<Self> {
        if !params.is_terminated() {
            return Err(Error::MissingTerminal);
        }
        let n = params.len() + 1;
        Self::new(params, family, n)
    }

    pub fn params(&self) -> &SchurParameterSequence<T> {
        &self.params
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn d(&self) -> usize {
        self.params.d()
    }

    pub fn padded(&self) -> bool {
        !self.params.is_terminated()
    }

    /// The `n_blocks − 1` in-window parameters and the edge matrix (terminal, or `𝟙` when padded).
    fn window(&self) -> (&[ComplexMatrix<T>], ComplexMatrix<T>) {
        let alphas = &self.params.alphas()[..self.n_blocks - 1];
        let edge = self.params.terminal().cloned().unwrap_or_else(|| ComplexMatrix::identity(self.d()));
        (alphas, edge)
    }

    /// Smallest window giving exact amplitudes up to `horizon` for blocks up to `last_block`.
    pub fn required_blocks(last_block: usize, horizon: usize) -> usize {
        last_block + 2 * horizon + 2
    }
}

/// A built operator plus the metadata needed to judge edge effects.
#[derive(Clone, Debug, PartialEq)]
pub struct BuiltOperator<T> {
    pub matrix: ComplexMatrix<T>,
    pub d: usize,
    pub n_blocks: usize,
    pub family: Family,
    /// `true` when the window edge was padded with `α → 𝟙`.
    pub padded: bool,
}

impl<T: Real> BuiltOperator<T> {
    /// Distance from `last_block` to the padded edge, `n_blocks − 2 − last_block`;
    /// `None` for exact finite operators.
    pub fn margin(&self, last_block: usize) -> Option<usize> {
        if self.padded {
            Some(self.n_blocks.saturating_sub(2 + last_block))
        } else {
            None
        }
    }

    /// Whether first-return amplitudes up to `horizon` of blocks `≤ last_block` are unaffected by padding.
    pub fn is_exact(&self, last_block: usize, horizon: usize) -> bool {
        match self.margin(last_block) {
            None => true,
            Some(m) => self.n_blocks >= last_block + 2 && 2 * horizon <= m,
        }
    }

    pub fn block_subspace(&self, j: usize, k: usize) -> Result<IndexSubspace> {
        if j > k || k >= self.n_blocks {
            return Err(Error::OutOfRange(format!("blocks {j}..={k} outside 0..{}", self.n_blocks)));
        }
        IndexSubspace::blocks(self.matrix.rows(), self.d, j, k)
    }

    pub fn block_range(&self, j: usize, k: usize) -> Result<ComplexMatrix<T>> {
        if j > k || k >= self.n_blocks {
            return Err(Error::OutOfRange(format!("blocks {j}..={k} outside 0..{}", self.n_blocks)));
        }
        let d = self.d;
        Ok(self.matrix.block(j * d, j * d, (k - j + 1) * d, (k - j + 1) * d))
    }
}

/// `Θ(α) = [[α†, ρ^L],[ρ^R, −α]]`.
pub fn theta<T: Real>(alpha: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
    if !alpha.is_square() {
        return Err(Error::NotSquare { rows: alpha.rows(), cols: alpha.cols() });
    }
    let norm = operator_norm(alpha);
    if norm > T::one() + T::of(T::UNITARY_TOL) {
        return Err(Error::NonContractive { index: 0, norm: norm.as_f64() });
    }
    let d = alpha.rows();
    let (rl, rr) = defects(alpha)?;
    let mut t = ComplexMatrix::zeros(2 * d, 2 * d);
    t.set_block(0, 0, &alpha.adjoint());
    t.set_block(0, d, &rl);
    t.set_block(d, 0, &rr);
    t.set_block(d, d, &-alpha);
    Ok(t)
}

/// `𝟙_j ⊕ Θ(α) ⊕ 𝟙` on `n` blocks, clipped to `α†` when `j` is the last block.
fn embedded_theta<T: Real>(alpha: &ComplexMatrix<T>, j: usize, n: usize) -> Result<ComplexMatrix<T>> {
    let d = alpha.rows();
    let mut out = ComplexMatrix::identity(n * d);
    if j + 1 < n {
        out.set_block(j * d, j * d, &theta(alpha)?);
    } else {
        out.set_block(j * d, j * d, &alpha.adjoint());
    }
    Ok(out)
}

/// `(L, M)` for parameters `α_0..α_{N−1}` and edge `α_N`, with `N + 1` blocks.
pub fn lm_factors<T: Real>(
    alphas: &[ComplexMatrix<T>],
    edge: &ComplexMatrix<T>,
) -> Result<(ComplexMatrix<T>, ComplexMatrix<T>)> {
    let d = edge.rows();
    let n = alphas.len() + 1;
    let mut l = ComplexMatrix::identity(n * d);
    let mut m = ComplexMatrix::identity(n * d);
    for j in 0..n {
        let a = if j + 1 < n { &alphas[j] } else { edge };
        let block = if j + 1 < n { theta(a)? } else { a.adjoint() };
        let target = if j % 2 == 0 { &mut l } else { &mut m };
        target.set_block(j * d, j * d, &block);
    }
    Ok((l, m))
}

/// Finite operator of `family` with parameters `α_0..α_{N−1}` and edge `α_N` (`N + 1` blocks).
pub fn build_raw<T: Real>(
    family: Family,
    alphas: &[ComplexMatrix<T>],
    edge: &ComplexMatrix<T>,
) -> Result<ComplexMatrix<T>> {
    let n = alphas.len() + 1;
    match family {
        Family::Cmv | Family::CmvHat => {
            let (l, m) = lm_factors(alphas, edge)?;
            Ok(if family == Family::Cmv { &l * &m } else { &m * &l })
        }
        Family::Hessenberg | Family::HessenbergHat => {
            let mut thetas = Vec::with_capacity(n);
            for (j, a) in alphas.iter().enumerate() {
                thetas.push(embedded_theta(a, j, n)?);
            }
            thetas.push(embedded_theta(edge, n - 1, n)?);
            if family == Family::HessenbergHat {
                thetas.reverse();
            }
            let mut acc = thetas[0].clone();
            for t in &thetas[1..] {
                acc = &acc * t;
            }
            Ok(acc)
        }
    }
}

fn build<T: Real>(spec: &BlockOperatorSpec<T>) -> Result<BuiltOperator<T>> {
    let (alphas, edge) = spec.window();
    Ok(BuiltOperator {
        matrix: build_raw(spec.family, alphas, &edge)?,
        d: spec.d(),
        n_blocks: spec.n_blocks,
        family: spec.family,
        padded: spec.padded(),
    })
}

/// Finite `C_N`/`Ĉ_N`, or the padded window of the semi-infinite matrix.
pub fn build_cmv<T: Real>(spec: &BlockOperatorSpec<T>) -> Result<BuiltOperator<T>> {
    if !spec.family.is_cmv() {
        return Err(Error::OutOfRange(format!("build_cmv called with family {}", spec.family)));
    }
    build(spec)
}

/// Finite `H_N`/`Ĥ_N`; requires a terminal.
pub fn build_hessenberg<T: Real>(spec: &BlockOperatorSpec<T>) -> Result<BuiltOperator<T>> {
    if spec.family.is_cmv() {
        return Err(Error::OutOfRange(format!("build_hessenberg called with family {}", spec.family)));
    }
    if spec.padded() {
        return Err(Error::MissingTerminal);
    }
    build(spec)
}

/// Dispatches on the family.
pub fn build_operator<T: Real>(spec: &BlockOperatorSpec<T>) -> Result<BuiltOperator<T>> {
    if spec.family.is_cmv() {
        build_cmv(spec)
    } else {
        build_hessenberg(spec)
    }
}

/// Principal submatrix on blocks `j..=k`.
pub fn submatrix_range<T: Real>(spec: &BlockOperatorSpec<T>, j: usize, k: usize) -> Result<ComplexMatrix<T>> {
    if j > k || k >= spec.n_blocks {
        return Err(Error::OutOfRange(format!("blocks {j}..={k} outside 0..{}", spec.n_blocks)));
    }
    build_operator(spec)?.block_range(j, k)
}

/// Unitary truncation `X_{(j,k)}`: the block `j..=k` submatrix with `α_{j−1} → −𝟙` and `α_k → 𝟙`.
pub fn unitary_truncation<T: Real>(spec: &BlockOperatorSpec<T>, j: usize, k: usize) -> Result<ComplexMatrix<T>> {
    if j >= k {
        return Err(Error::OutOfRange(format!("unitary truncation needs j < k, got ({j},{k})")));
    }
    if k >= spec.n_blocks {
        return Err(Error::OutOfRange(format!("block {k} outside 0..{}", spec.n_blocks)));
    }
    truncation_from_alphas(spec.family, &spec.params.alphas()[..k], j)
}

/// Unitary truncation built directly from `α_0..α_{k−1}` (`k = alphas.len()`).
pub fn truncation_from_alphas<T: Real>(
    family: Family,
    alphas: &[ComplexMatrix<T>],
    j: usize,
) -> Result<ComplexMatrix<T>> {
    let k = alphas.len();
    if j >= k {
        return Err(Error::OutOfRange(format!("unitary truncation needs j < k, got ({j},{k})")));
    }
    let d = alphas[0].rows();
    let id = ComplexMatrix::identity(d);
    let mut a = alphas.to_vec();
    if j >= 1 {
        a[j - 1] = -&id;
    }
    let full = build_raw(family, &a, &id)?;
    Ok(full.block(j * d, j * d, (k - j + 1) * d, (k - j + 1) * d))
}

/// Blocks `lo..hi` as an index list for block size `d`.
fn block_indices(d: usize, lo: usize, hi: usize) -> Vec<usize> {
    (lo * d..hi * d).collect()
}

/// Standard `V_j`-overlapping factorization, `1 ≤ j ≤ n_blocks − 2`.
pub fn standard_overlap<T: Real>(spec: &BlockOperatorSpec<T>, j: usize) -> Result<OverlapFactorization<T>> {
    let n = spec.n_blocks;
    if j < 1 || j + 2 > n {
        return Err(Error::OutOfRange(format!("standard overlap needs 1 ≤ j ≤ {}, got {j}", n.saturating_sub(2))));
    }
    let d = spec.d();
    let dim = n * d;
    let (alphas, edge) = spec.window();
    let id = ComplexMatrix::identity(d);
    let head = |fam: Family| build_raw(fam, &alphas[..j], &id);
    let tail = |fam: Family| build_raw(fam, &alphas[j..], &edge);
    let below = block_indices(d, 0, j);
    let center = block_indices(d, j, j + 1);
    let above = block_indices(d, j + 1, n);
    let even = j.is_multiple_of(2);
    // (left blocks, U_LC, U_CR)
    let (left_is_above, u_lc, u_cr) = match spec.family {
        Family::Cmv if even => (true, tail(Family::Cmv)?, head(Family::Cmv)?),
        Family::Cmv => (false, head(Family::Cmv)?, tail(Family::CmvHat)?),
        Family::CmvHat if even => (false, head(Family::CmvHat)?, tail(Family::CmvHat)?),
        Family::CmvHat => (true, tail(Family::Cmv)?, head(Family::CmvHat)?),
        Family::Hessenberg => (false, head(Family::Hessenberg)?, tail(Family::Hessenberg)?),
        Family::HessenbergHat => (true, tail(Family::HessenbergHat)?, head(Family::HessenbergHat)?),
    };
    let (left, right) = if left_is_above { (above, below) } else { (below, above) };
    let partition = SubspacePartition::new(dim, left, center, right)?;
    OverlapFactorization::new(partition, u_lc, u_cr)
}

/// `‖ρ_0^L ρ_1^L ⋯ ρ_{m−1}^L‖` over the available parameters.
///
/// Tends to zero exactly when `Σ‖α_j‖² = ∞`, the condition under which the
/// semi-infinite Hessenberg matrix is unitary.
pub fn hessenberg_unitarity_defect<T: Real>(params: &SchurParameterSequence<T>) -> Result<T> {
    let mut acc = ComplexMatrix::identity(params.d());
    for a in params.alphas() {
        acc = &acc * &defects(a)?.0;
    }
    Ok(operator_norm(&acc))
}
