use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotorcage::eigensolver::{dense_oracle_solve, solve_lowest, InnerSolver, SolverOptions};
use rotorcage::hamiltonian::{angular_block, build_grid};
use rotorcage::sparse::CsrMatrix;

fn random_sparse(n: usize, per_row: usize, seed: u64) -> CsrMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Vec::new();
    for i in 0..n {
        t.push((i, i, rng.random_range(-3.0..3.0)));
        for _ in 0..per_row {
            let j = rng.random_range(0..n);
            if j != i {
                let v = rng.random_range(-1.0..1.0);
                t.push((i, j, v));
                t.push((j, i, v));
            }
        }
    }
    CsrMatrix::from_triplets(n, t)
}

/// Lower spectral bound from Gershgorin discs.
fn lower_bound(h: &CsrMatrix) -> f64 {
    (0..h.dim())
        .map(|i| {
            let (cols, vals) = h.row(i);
            let off: f64 = cols.iter().zip(vals).filter(|(c, _)| **c != i).map(|(_, v)| v.abs()).sum();
            h.get(i, i) - off
        })
        .fold(f64::INFINITY, f64::min)
        - 1.0
}

fn tight(n_eig: usize, sigma: f64) -> SolverOptions {
    let mut o = SolverOptions::new(n_eig, sigma);
    o.tol = 1e-9;
    o
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn matches_dense_oracle(n in 20usize..300, per_row in 1usize..6, seed: u64, cg: bool) {
        let h = random_sparse(n, per_row, seed);
        let dense = dense_oracle_solve(&h).unwrap();
        let k = 10.min(n);
        let mut opts = tight(k, lower_bound(&h));
        if cg {
            opts.inner = InnerSolver::ConjugateGradient;
        }
        let p = solve_lowest(&h, &opts).unwrap();
        for (a, b) in p.values.iter().zip(&dense.values[..k]) {
            prop_assert!((a - b).abs() <= 1e-8 * b.abs().max(1e-3), "{a} vs {b}");
        }
    }

    #[test]
    fn shift_invariance(n in 30usize..200, seed: u64, c in -50.0..50.0f64) {
        let h = random_sparse(n, 3, seed);
        let sigma = lower_bound(&h);
        let a = solve_lowest(&h, &tight(6, sigma)).unwrap();
        let b = solve_lowest(&h.shifted(c), &tight(6, sigma + c)).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            prop_assert!((y - x - c).abs() < 1e-7, "{x} + {c} vs {y}");
        }
    }
}

#[test]
fn identical_inputs_give_identical_eigenvalues() {
    let h = random_sparse(400, 4, 99);
    let opts = SolverOptions::new(10, lower_bound(&h));
    let a = solve_lowest(&h, &opts).unwrap();
    let b = solve_lowest(&h, &opts).unwrap();
    assert_eq!(a.values, b.values);
    assert_eq!(a.vectors, b.vectors);
}

#[test]
fn rigid_rotor_triplet_spans_the_oracle_subspace() {
    let grid = build_grid(8, 30, 30, 1.0).unwrap();
    let h = angular_block(&grid, 60.0);
    let oracle = dense_oracle_solve(&h).unwrap();
    let p = solve_lowest(&h, &SolverOptions::new(4, -1.0)).unwrap();
    let spread = p.values[3] - p.values[1];
    assert!(spread < 0.1, "{spread}");

    let n = h.dim();
    let basis = |vs: &[Vec<f64>]| DMatrix::from_fn(n, 3, |i, j| vs[j + 1][i]);
    let overlap = basis(&p.vectors).transpose() * basis(&oracle.vectors);
    let cosines = overlap.singular_values();
    let largest_angle = cosines.iter().map(|c| c.min(1.0).acos()).fold(0.0, f64::max);
    assert!(largest_angle < 1e-4, "principal angle {largest_angle}");
}
