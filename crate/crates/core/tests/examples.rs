//! Path splittings of first-return amplitudes on the sparse six-state walk.

mod common;

use common::*;
use khrushchev_core::fixtures;
use khrushchev_core::linalg::IndexSubspace;
use khrushchev_core::pathcount::{path_amplitude_sum, PathOptions};
use khrushchev_core::spectral::{first_return_amplitudes, return_amplitudes_in_basis};
use khrushchev_core::CMatrix;

const N: usize = 8;

/// `Σ_{n=1..N} z^n · (sum over paths from → to of length n avoiding `avoid` in between)`.
fn generating(u: &CMatrix, from: usize, to: usize, avoid: &[usize]) -> Coeffs {
    let avoid = IndexSubspace::new(u.rows(), avoid.iter().copied()).unwrap();
    let mut out = vec![zero(); N + 1];
    for (n, slot) in out.iter_mut().enumerate().skip(1) {
        *slot = path_amplitude_sum(u, from, to, &avoid, n, PathOptions::default()).unwrap().amplitude[(0, 0)];
    }
    out
}

fn add(a: &[khrushchev_core::Complex64], b: &[khrushchev_core::Complex64]) -> Coeffs {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

#[test]
fn one_step_amplitudes_of_the_diagram() {
    let u = fixtures::sparse_walk_6();
    // ψ3 loops, ψ3 → ψ1, ψ4 → ψ3 and ψ4 → ψ1 all carry bd = 1/2.
    for (to, from) in [(2, 2), (0, 2), (2, 3), (0, 3)] {
        assert_eq!(u[(to, from)], r(0.5));
    }
    // No single step leads from the left part {ψ1, ψ2} to the right part {ψ4, ψ5, ψ6}.
    for to in 3..6 {
        for from in 0..2 {
            assert_eq!(u[(to, from)], zero());
        }
    }
}

#[test]
fn first_return_splits_into_left_and_right_excursions() {
    let u = fixtures::sparse_walk_6();
    let bdz = {
        let mut s = vec![zero(); N + 1];
        s[1] = u[(2, 2)];
        s
    };
    let a31 = generating(&u, 0, 2, &[2]);
    let a43 = generating(&u, 2, 3, &[2]);
    let split = add(&add(&bdz, &mul(&a31, &bdz)), &add(&mul(&bdz, &a43), &mul(&mul(&a31, &bdz), &a43)));
    let v = IndexSubspace::new(6, [2]).unwrap();
    let amps = first_return_amplitudes(&u, &v, N).unwrap();
    for n in 1..=N {
        assert!((amps.amplitudes[n - 1][(0, 0)] - split[n]).norm() < 1e-12, "n = {n}");
    }
}

#[test]
fn right_excursions_are_seen_by_the_right_factor_alone() {
    let ex = fixtures::sparse_walk_6_center2();
    let u = &ex.u;
    let cr = ex.factorization.u_cr();
    // ψ3 → … → ψ4 avoiding ψ3 uses the same amplitudes in U and in U_CR (local indices 0 → 1).
    let global = generating(u, 2, 3, &[2]);
    let local = generating(cr, 0, 1, &[0]);
    assert!(max_diff(&global, &local) < 1e-14);
    let lc = ex.factorization.u_lc();
    let global = generating(u, 0, 2, &[2]);
    let local = generating(lc, 0, 2, &[2]);
    assert!(max_diff(&global, &local) < 1e-14);
}

#[test]
fn z_times_return_function_factorizes() {
    let ex = fixtures::sparse_walk_6_center2();
    let series = |m: &CMatrix, basis: &[usize]| -> Coeffs {
        let mut s = vec![zero()];
        s.extend(return_amplitudes_in_basis(m, basis, N).unwrap().iter().map(|a| a[(0, 0)]));
        s
    };
    let a = series(&ex.u, &[2]);
    let a_l = series(ex.factorization.u_lc(), &[2]);
    let a_r = series(ex.factorization.u_cr(), &[0]);
    let product = mul(&a_l, &a_r);
    // z·a(z) against a^L(z)·a^R(z), coefficients 1..=N.
    for n in 1..=N {
        assert!((a[n - 1] - product[n]).norm() < 1e-12, "n = {n}");
    }
}

#[test]
fn two_state_return_matrix_splits_through_the_center() {
    let u = fixtures::sparse_walk_6();
    let v = [2usize, 4];
    let amps = return_amplitudes_in_basis(&u, &v, N).unwrap();
    let bdz = {
        let mut s = vec![zero(); N + 1];
        s[1] = u[(2, 2)];
        s
    };
    let a31 = generating(&u, 0, 2, &[2]);
    let a43 = generating(&u, 2, 3, &v);
    let a45 = generating(&u, 4, 3, &v);
    let a55 = generating(&u, 4, 4, &v);
    let a53 = generating(&u, 2, 4, &v);
    let top_left = add(&add(&bdz, &mul(&a31, &bdz)), &add(&mul(&bdz, &a43), &mul(&mul(&a31, &bdz), &a43)));
    let top_right = add(&mul(&bdz, &a45), &mul(&mul(&a31, &bdz), &a45));
    for n in 1..=N {
        let a = &amps[n - 1];
        assert!((a[(0, 0)] - top_left[n]).norm() < 1e-12, "(3,3) at n = {n}");
        assert!((a[(0, 1)] - top_right[n]).norm() < 1e-12, "(3,5) at n = {n}");
        assert!((a[(1, 0)] - a53[n]).norm() < 1e-12, "(5,3) at n = {n}");
        assert!((a[(1, 1)] - a55[n]).norm() < 1e-12, "(5,5) at n = {n}");
    }
}
