//! Small exactly known unitaries with overlapping factorizations, used by tests,
//! the CLI and the bundled campaign.

use crate::linalg::ComplexMatrix;
use crate::overlap::{OverlapFactorization, SubspacePartition};

/// A unitary together with one of its overlapping factorizations.
#[derive(Clone, Debug)]
pub struct FactorizedExample {
    pub u: ComplexMatrix<f64>,
    pub factorization: OverlapFactorization<f64>,
}

impl FactorizedExample {
    fn new(
        u: ComplexMatrix<f64>,
        n: usize,
        left: &[usize],
        center: &[usize],
        right: &[usize],
        u_lc: ComplexMatrix<f64>,
        u_cr: ComplexMatrix<f64>,
    ) -> Self {
        let partition =
            SubspacePartition::new(n, left.to_vec(), center.to_vec(), right.to_vec()).expect("valid partition");
        let factorization = OverlapFactorization::new(partition, u_lc, u_cr).expect("unitary factors");
        Self { u, factorization }
    }
}

/// Grover coin `(2/n)·J − 𝟙`.
fn grover(n: usize) -> ComplexMatrix<f64> {
    let off = 2.0 / n as f64;
    ComplexMatrix::from_fn(n, n, |i, j| num_complex::Complex::new(if i == j { off - 1.0 } else { off }, 0.0))
}

/// 3×3 and 4×4 Grover coins glued along one basis vector (index 2): a 6×6 unitary
/// with left part `{0,1}`, center `{2}` and right part `{3,4,5}`.
pub fn grover_chain_6() -> FactorizedExample {
    let g3 = grover(3);
    let g4 = grover(4);
    let u = &g3.embed(6, &[0, 1, 2]) * &g4.embed(6, &[2, 3, 4, 5]);
    FactorizedExample::new(u, 6, &[0, 1], &[2], &[3, 4, 5], g3, g4)
}

/// The same two coins glued along two basis vectors (indices 1, 2) of a 5-dimensional space.
pub fn grover_chain_5() -> FactorizedExample {
    let g3 = grover(3);
    let g4 = grover(4);
    let u = &g3.embed(5, &[0, 1, 2]) * &g4.embed(5, &[1, 2, 3, 4]);
    FactorizedExample::new(u, 5, &[0], &[1, 2], &[3, 4], g3, g4)
}

const H: f64 = 0.5;

fn r2() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2
}

/// 6×6 unitary with few transitions, entries in `{0, ±1/2, ±1/√2}`.
pub fn sparse_walk_6() -> ComplexMatrix<f64> {
    let s = r2();
    ComplexMatrix::from_real_rows(&[
        &[H, -H, H, H, 0.0, 0.0],
        &[s, s, 0.0, 0.0, 0.0, 0.0],
        &[-H, H, H, H, 0.0, 0.0],
        &[0.0, 0.0, H, -H, H, H],
        &[0.0, 0.0, 0.0, 0.0, s, -s],
        &[0.0, 0.0, -H, H, H, H],
    ])
}

/// [`sparse_walk_6`] factorized with center `{2}`, left `{0,1}`, right `{3,4,5}`.
pub fn sparse_walk_6_center2() -> FactorizedExample {
    let s = r2();
    let u_lc = ComplexMatrix::from_real_rows(&[&[H, -H, s], &[s, s, 0.0], &[-H, H, s]]);
    let u_cr = ComplexMatrix::from_real_rows(&[&[s, s, 0.0, 0.0], &[H, -H, H, H], &[0.0, 0.0, s, -s], &[-H, H, H, H]]);
    FactorizedExample::new(sparse_walk_6(), 6, &[0, 1], &[2], &[3, 4, 5], u_lc, u_cr)
}

/// [`sparse_walk_6`] factorized with center `{3}`, left `{4,5}`, right `{0,1,2}`.
pub fn sparse_walk_6_center3() -> FactorizedExample {
    let s = r2();
    let u_lc = ComplexMatrix::from_real_rows(&[&[s, H, H], &[0.0, s, -s], &[-s, H, H]]);
    let u_cr = ComplexMatrix::from_real_rows(&[&[H, -H, H, H], &[s, s, 0.0, 0.0], &[-H, H, H, H], &[0.0, 0.0, s, -s]]);
    FactorizedExample::new(sparse_walk_6(), 6, &[4, 5], &[3], &[0, 1, 2], u_lc, u_cr)
}

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 4] = ["grover-chain-6", "grover-chain-5", "sparse-walk-6-center2", "sparse-walk-6-center3"];

pub fn by_name(name: &str) -> Option<FactorizedExample> {
    match name {
        "grover-chain-6" => Some(grover_chain_6()),
        "grover-chain-5" => Some(grover_chain_5()),
        "sparse-walk-6-center2" => Some(sparse_walk_6_center2()),
        "sparse-walk-6-center3" => Some(sparse_walk_6_center3()),
        _ => None,
    }
}
