use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rotorcage::eigensolver::{dense_oracle_solve, solve_lowest, SolverOptions};
use rotorcage::hamiltonian::{
    angular_block, assemble_hamiltonian, assemble_hamiltonian_with, build_grid, radial_block, AssemblyOptions, ModelParams, RadialStencil,
};

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn assembled_matrix_is_symmetric(
        nr in 8usize..14, nt in 8usize..14, np in 8usize..14,
        k in 100.0..3000.0f64, a2 in -80.0..80.0f64, a1 in -20.0..20.0f64, c in -40.0..40.0f64,
        coupling: bool, fourth: bool,
    ) {
        let grid = build_grid(nr, nt, np, 1.0).unwrap();
        let radial = move |r: f64| 0.5 * k * r * r;
        let angular = move |t: f64, p: f64| a2 * t.cos().powi(2) + a1 * t.cos() + c * t.sin().powi(2) * (2.0 * p).cos();
        let stencil = if fourth { RadialStencil::FourthOrder } else { RadialStencil::SecondOrder };
        let opts = AssemblyOptions { include_coupling: coupling, radial_stencil: stencil };
        let h = assemble_hamiltonian_with(&grid, &ModelParams::default(), &radial, &angular, &opts).unwrap();
        prop_assert!(h.symmetry_defect() < 1e-10);
    }

    #[test]
    fn kinetic_blocks_are_positive_semidefinite(nr in 8usize..30, nt in 8usize..20, np in 8usize..20, seed: u64) {
        let grid = build_grid(nr, nt, np, 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = ModelParams::default();
        for stencil in [RadialStencil::SecondOrder, RadialStencil::FourthOrder] {
            let t = radial_block(&grid, &params, stencil);
            for _ in 0..5 {
                prop_assert!(t.quadratic_form(&random_unit(nr, &mut rng)) >= 0.0);
            }
        }
        let l2 = angular_block(&grid, 60.0);
        for _ in 0..5 {
            prop_assert!(l2.quadratic_form(&random_unit(nt * np, &mut rng)) >= -1e-12);
        }
    }
}

#[test]
fn eigenvalues_lie_above_the_potential_minimum() {
    let grid = build_grid(10, 10, 10, 1.0).unwrap();
    let radial = |r: f64| 0.5 * 1500.0 * r * r - 40.0;
    let angular = |t: f64, p: f64| 60.0 * t.cos().powi(2) + 25.0 * t.sin().powi(2) * (2.0 * p).cos();
    let h = assemble_hamiltonian(&grid, &ModelParams::default(), &radial, &angular, true).unwrap();
    let vmin = h.potential().iter().copied().fold(f64::INFINITY, f64::min);
    let pairs = solve_lowest(h.matrix(), &SolverOptions::new(6, vmin - 100.0)).unwrap();
    assert!(pairs.values[0] >= vmin, "{} < {vmin}", pairs.values[0]);
}

fn rotor_levels(n: usize) -> Vec<f64> {
    let grid = build_grid(8, n, n, 1.0).unwrap();
    solve_lowest(&angular_block(&grid, 60.0), &SolverOptions::new(9, -1.0)).unwrap().values
}

#[test]
fn angular_refinement_converges() {
    let mut l2_errors = Vec::new();
    for n in [15, 30, 60] {
        let e = rotor_levels(n);
        for l1 in &e[1..4] {
            assert!((l1 - e[0] - 120.0).abs() < 1e-8, "l = 1 at n = {n}: {}", l1 - e[0]);
        }
        let worst = e[4..9].iter().map(|x| (x - e[0] - 360.0).abs()).fold(0.0, f64::max);
        l2_errors.push(worst);
    }
    assert!(l2_errors[0] > l2_errors[1] && l2_errors[1] > l2_errors[2], "{l2_errors:?}");
}

#[test]
fn constant_offset_shifts_every_eigenvalue() {
    let grid = build_grid(10, 10, 10, 1.0).unwrap();
    let params = ModelParams::default();
    let angular = |t: f64, p: f64| 50.0 * t.cos().powi(2) + 10.0 * t.cos() + 20.0 * t.sin().powi(2) * (2.0 * p).cos();
    let base = assemble_hamiltonian(&grid, &params, &|r: f64| 1000.0 * r * r, &angular, true).unwrap();
    let c = 137.25;
    let lifted = assemble_hamiltonian(&grid, &params, &|r: f64| 1000.0 * r * r + c, &angular, true).unwrap();
    let opts = |s: f64| {
        let mut o = SolverOptions::new(8, s);
        o.tol = 1e-9;
        o
    };
    let a = solve_lowest(base.matrix(), &opts(base.min_potential() - 1.0)).unwrap();
    let b = solve_lowest(lifted.matrix(), &opts(lifted.min_potential() - 1.0)).unwrap();
    for (x, y) in a.values.iter().zip(&b.values) {
        assert!((y - x - c).abs() < 1e-8, "{x} + {c} vs {y}");
    }
}

/// Largest wall-node amplitude relative to the peak, over the lowest `count`
/// states of a harmonic radial well.
fn wall_amplitude(nr: usize, r_max: f64, count: usize) -> f64 {
    let grid = build_grid(nr, 8, 8, r_max).unwrap();
    let params = ModelParams::default();
    let v: Vec<f64> = grid.r_nodes().iter().map(|r| 0.5 * 2500.0 * r * r).collect();
    let h = radial_block(&grid, &params, RadialStencil::FourthOrder).add_diagonal(&v);
    let pairs = dense_oracle_solve(&h).unwrap();
    pairs.vectors[..count]
        .iter()
        .map(|u| {
            let peak = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            u[0].abs().max(u[nr - 1].abs()) / peak
        })
        .fold(0.0, f64::max)
}

#[test]
fn retained_states_vanish_at_the_radial_walls() {
    let wide = wall_amplitude(60, 2.4, 4);
    assert!(wide < 1e-6, "{wide}");
    // Shrinking the box raises the wall amplitude.
    assert!(wall_amplitude(60, 1.2, 4) > wide);
}

