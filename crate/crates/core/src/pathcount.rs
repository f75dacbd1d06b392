//! Path-counting oracle for first-return amplitudes.
//!
//! Enumerates every walk that leaves a state, avoids a given set at the
//! intermediate steps and lands on the target, and sums the products of the
//! one-step amplitudes. Exponential in the length; meant for tests.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, IndexSubspace};
use crate::scalar::Real;

pub const DEFAULT_N_CAP: usize = 8;

/// Steps whose amplitude block has max-abs entry below this are skipped when pruning.
pub const PRUNE_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PathOptions {
    pub n_cap: usize,
    pub prune: bool,
}

impl Default for PathOptions {
    fn default() -> Self {
        Self { n_cap: DEFAULT_N_CAP, prune: true }
    }
}

/// Summed amplitude of all admissible paths between two (block) states.
#[derive(Clone, Debug, PartialEq)]
pub struct PathSum<T> {
    pub from: usize,
    pub to: usize,
    /// Block states forbidden at intermediate steps.
    pub avoided: Vec<usize>,
    pub length: usize,
    /// `d×d` amplitude; `1×1` for scalar enumeration.
    pub amplitude: ComplexMatrix<T>,
    /// Number of complete paths that contributed.
    pub paths: usize,
}

/// A unitary viewed as a matrix of `d×d` blocks.
struct BlockView<'a, T> {
    u: &'a ComplexMatrix<T>,
    d: usize,
    states: usize,
    /// `live[to][from]`: whether the step `from → to` survives pruning.
    live: Vec<Vec<bool>>,
}

impl<'a, T: Real> BlockView<'a, T> {
    fn new(u: &'a ComplexMatrix<T>, d: usize, prune: bool) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NotSquare { rows: u.rows(), cols: u.cols() });
        }
        if d == 0 || !u.rows().is_multiple_of(d) {
            return Err(Error::DimensionMismatch(format!("block size {d} does not divide {}", u.rows())));
        }
        let states = u.rows() / d;
        let tol = T::of(PRUNE_TOL);
        let live = (0..states)
            .map(|to| (0..states).map(|from| !prune || u.block(to * d, from * d, d, d).max_abs() >= tol).collect())
            .collect();
        Ok(Self { u, d, states, live })
    }

    fn step(&self, to: usize, from: usize) -> ComplexMatrix<T> {
        self.u.block(to * self.d, from * self.d, self.d, self.d)
    }

    /// Calls `visit(last, acc)` for every path of `steps` steps from `from` through
    /// non-avoided states, where `acc` is the time-ordered product of the steps taken.
    fn walk(&self, from: usize, steps: usize, allowed: &[bool], visit: &mut impl FnMut(usize, &ComplexMatrix<T>)) {
        let start = ComplexMatrix::identity(self.d);
        self.walk_rec(from, &start, steps, allowed, visit);
    }

    fn walk_rec(
        &self,
        at: usize,
        acc: &ComplexMatrix<T>,
        steps: usize,
        allowed: &[bool],
        visit: &mut impl FnMut(usize, &ComplexMatrix<T>),
    ) {
        if steps == 0 {
            visit(at, acc);
            return;
        }
        for next in 0..self.states {
            if !allowed[next] || !self.live[next][at] {
                continue;
            }
            let acc2 = &self.step(next, at) * acc;
            self.walk_rec(next, &acc2, steps - 1, allowed, visit);
        }
    }
}

fn check_n(n: usize, opts: PathOptions) -> Result<()> {
    if n == 0 {
        return Err(Error::OutOfRange("path length must be at least 1".into()));
    }
    if n > opts.n_cap {
        return Err(Error::PathCapExceeded { n, cap: opts.n_cap });
    }
    Ok(())
}

fn block_path_sum<T: Real>(
    view: &BlockView<'_, T>,
    from: usize,
    to: usize,
    avoid: &[usize],
    n: usize,
) -> Result<PathSum<T>> {
    for &s in [from, to].iter().chain(avoid) {
        if s >= view.states {
            return Err(Error::IndexOutOfRange { index: s, dim: view.states });
        }
    }
    let mut allowed = vec![true; view.states];
    for &s in avoid {
        allowed[s] = false;
    }
    let mut amplitude = ComplexMatrix::zeros(view.d, view.d);
    let mut paths = 0;
    view.walk(from, n - 1, &allowed, &mut |last, acc| {
        if view.live[to][last] {
            amplitude = &amplitude + &(&view.step(to, last) * acc);
            paths += 1;
        }
    });
    let mut avoided = avoid.to_vec();
    avoided.sort_unstable();
    Ok(PathSum { from, to, avoided, length: n, amplitude, paths })
}

/// `Σ U_{to,k_{n−1}} ⋯ U_{k_1,from}` over index paths whose intermediate states avoid `avoid`.
pub fn path_amplitude_sum<T: Real>(
    u: &ComplexMatrix<T>,
    from: usize,
    to: usize,
    avoid: &IndexSubspace,
    n: usize,
    opts: PathOptions,
) -> Result<PathSum<T>> {
    check_n(n, opts)?;
    if avoid.ambient_dim() != u.rows() {
        return Err(Error::DimensionMismatch("avoided subspace lives in another space".into()));
    }
    let view = BlockView::new(u, 1, opts.prune)?;
    block_path_sum(&view, from, to, avoid.indices(), n)
}

/// Block version of [`path_amplitude_sum`]: states are the `d×d` blocks of `u`.
pub fn block_path_amplitude_sum<T: Real>(
    u: &ComplexMatrix<T>,
    d: usize,
    from_block: usize,
    to_block: usize,
    avoid_blocks: &[usize],
    n: usize,
    opts: PathOptions,
) -> Result<PathSum<T>> {
    check_n(n, opts)?;
    let view = BlockView::new(u, d, opts.prune)?;
    block_path_sum(&view, from_block, to_block, avoid_blocks, n)
}

fn assemble<T: Real>(view: &BlockView<'_, T>, v: &[usize], n: usize) -> ComplexMatrix<T> {
    let d = view.d;
    let mut allowed = vec![true; view.states];
    for &s in v {
        allowed[s] = false;
    }
    let mut out = ComplexMatrix::zeros(v.len() * d, v.len() * d);
    for (col, &from) in v.iter().enumerate() {
        let mut sums = vec![ComplexMatrix::zeros(d, d); v.len()];
        view.walk(from, n - 1, &allowed, &mut |last, acc| {
            for (row, &to) in v.iter().enumerate() {
                if view.live[to][last] {
                    sums[row] = &sums[row] + &(&view.step(to, last) * acc);
                }
            }
        });
        for (row, s) in sums.iter().enumerate() {
            out.set_block(row * d, col * d, s);
        }
    }
    out
}

/// `a_{V,n}` in the basis of `V`, assembled purely from path sums.
pub fn oracle_first_return<T: Real>(
    u: &ComplexMatrix<T>,
    v: &IndexSubspace,
    n: usize,
    opts: PathOptions,
) -> Result<ComplexMatrix<T>> {
    check_n(n, opts)?;
    if v.ambient_dim() != u.rows() {
        return Err(Error::DimensionMismatch("subspace lives in another space".into()));
    }
    let view = BlockView::new(u, 1, opts.prune)?;
    Ok(assemble(&view, v.indices(), n))
}

/// Block version of [`oracle_first_return`] for `V` spanned by whole blocks.
pub fn oracle_first_return_blocks<T: Real>(
    u: &ComplexMatrix<T>,
    d: usize,
    blocks: &[usize],
    n: usize,
    opts: PathOptions,
) -> Result<ComplexMatrix<T>> {
    check_n(n, opts)?;
    let view = BlockView::new(u, d, opts.prune)?;
    for &b in blocks {
        if b >= view.states {
            return Err(Error::IndexOutOfRange { index: b, dim: view.states });
        }
    }
    Ok(assemble(&view, blocks, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_unitary, seeded_rng};
    use crate::spectral::first_return_amplitudes;

    type M = ComplexMatrix<f64>;

    #[test]
    fn one_step_is_the_matrix_entry() {
        let u: M = random_unitary(&mut seeded_rng(1), 5);
        let s = path_amplitude_sum(&u, 1, 3, &IndexSubspace::empty(5), 1, PathOptions::default()).unwrap();
        assert_eq!(s.amplitude[(0, 0)], u[(3, 1)]);
        assert_eq!(s.paths, 1);
    }

    #[test]
    fn no_intermediate_state_gives_zero() {
        let u: M = random_unitary(&mut seeded_rng(2), 4);
        let s = path_amplitude_sum(&u, 0, 3, &IndexSubspace::full(4), 2, PathOptions::default()).unwrap();
        assert_eq!(s.paths, 0);
        assert_eq!(s.amplitude, M::zeros(1, 1));
        // Only the endpoints themselves remain as intermediate states.
        let avoid = IndexSubspace::new(4, [1, 2]).unwrap();
        let s = path_amplitude_sum(&u, 0, 3, &avoid, 2, PathOptions::default()).unwrap();
        assert_eq!(s.paths, 2);
        assert!((s.amplitude[(0, 0)] - (u[(3, 0)] * u[(0, 0)] + u[(3, 3)] * u[(3, 0)])).norm() < 1e-15);
    }

    #[test]
    fn cap_is_enforced() {
        let u = M::identity(3);
        let v = IndexSubspace::new(3, [0]).unwrap();
        assert!(matches!(
            oracle_first_return(&u, &v, 9, PathOptions::default()),
            Err(Error::PathCapExceeded { n: 9, cap: 8 })
        ));
    }

    #[test]
    fn identity_returns_at_once() {
        let u = M::identity(4);
        let v = IndexSubspace::new(4, [0, 2]).unwrap();
        assert!(oracle_first_return(&u, &v, 1, PathOptions::default()).unwrap().distance(&M::identity(2)) == 0.0);
        for n in 2..5 {
            assert_eq!(oracle_first_return(&u, &v, n, PathOptions::default()).unwrap(), M::zeros(2, 2));
        }
    }

    #[test]
    fn agrees_with_operator_formula() {
        let u: M = random_unitary(&mut seeded_rng(3), 6);
        let v = IndexSubspace::new(6, [1, 4]).unwrap();
        let amps = first_return_amplitudes(&u, &v, 5).unwrap();
        for n in 1..=5 {
            let o = oracle_first_return(&u, &v, n, PathOptions::default()).unwrap();
            assert!(o.max_abs_diff(&amps.amplitudes[n - 1]) < 1e-12);
        }
    }

    #[test]
    fn block_and_scalar_enumeration_agree() {
        let u: M = random_unitary(&mut seeded_rng(4), 6);
        let blocks = oracle_first_return_blocks(&u, 2, &[1], 4, PathOptions::default()).unwrap();
        let v = IndexSubspace::new(6, [2, 3]).unwrap();
        let scalar = oracle_first_return(&u, &v, 4, PathOptions::default()).unwrap();
        assert!(blocks.max_abs_diff(&scalar) < 1e-13);
        let one = block_path_amplitude_sum(&u, 2, 1, 1, &[1], 4, PathOptions::default()).unwrap();
        assert!(one.amplitude.max_abs_diff(&scalar) < 1e-13);
    }

    #[test]
    fn pruning_does_not_change_sums() {
        let mut u = M::identity(5);
        let r: M = random_unitary(&mut seeded_rng(5), 3);
        u.set_block(1, 1, &r);
        let v = IndexSubspace::new(5, [1]).unwrap();
        for n in 1..=5 {
            let a = oracle_first_return(&u, &v, n, PathOptions { n_cap: 8, prune: true }).unwrap();
            let b = oracle_first_return(&u, &v, n, PathOptions { n_cap: 8, prune: false }).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-15);
        }
    }
}
