use std::f64::consts::PI;

use rotorcage::eigensolver::{clusters, solve_lowest, EigenPairs, SolverOptions};
use rotorcage::hamiltonian::{assemble_hamiltonian, build_grid, Grid3D, ModelParams};
use rotorcage::states::{assign_quantum_numbers, AssignOptions, Assignment, Spin};

fn solve(grid: &Grid3D, angular: &dyn Fn(f64, f64) -> f64, n_eig: usize) -> EigenPairs {
    let radial = |r: f64| 0.5 * 2500.0 * r * r;
    let params = ModelParams { energy_scale: 2000.0, ..ModelParams::default() };
    let h = assemble_hamiltonian(grid, &params, &radial, &angular, true).unwrap();
    let mut o = SolverOptions::new(n_eig, h.min_potential() - 1.0);
    o.tol = 1e-9;
    solve_lowest(h.matrix(), &o).unwrap()
}

fn lenient() -> AssignOptions {
    AssignOptions { lenient: true, ..AssignOptions::default() }
}

fn check_parity_and_completeness(pairs: &EigenPairs, a: &Assignment) {
    assert_eq!(a.states.len(), pairs.len());
    for s in &a.states {
        assert_eq!(s.spin == Spin::Para, s.j % 2 == 0, "state {}", s.index);
        if s.ambiguous {
            assert!(a.warnings.iter().any(|w| w.starts_with(&format!("state {} ", s.index))), "state {} dropped silently", s.index);
        }
    }
}

#[test]
fn free_rotor_clusters_have_size_2j_plus_1() {
    let grid = build_grid(10, 12, 12, 1.2).unwrap();
    let pairs = solve(&grid, &|_, _| 0.0, 8);
    let a = assign_quantum_numbers(&pairs, &grid, &AssignOptions::default()).unwrap();
    check_parity_and_completeness(&pairs, &a);
    let groups = clusters(&pairs.values, 1e-6);
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    assert_eq!(sizes, [1, 3, 1, 3]);
    for g in groups {
        let j = a.states[g[0]].j;
        assert_eq!(g.len() as u32, 2 * j + 1);
        for &i in &g {
            let s = &a.states[i];
            assert!(s.j == j && s.purity > 0.99, "state {i}: j {} purity {}", s.j, s.purity);
        }
    }
    assert_eq!(a.states[4].n, 1);
}

#[test]
fn azimuthal_rotation_keeps_labels() {
    let grid = build_grid(10, 12, 12, 1.2).unwrap();
    let field = |t: f64, p: f64| 40.0 * t.cos().powi(2) + 8.0 * t.cos() + 15.0 * t.sin().powi(2) * (2.0 * p).cos();
    // A rotation by whole grid steps maps the discrete problem onto itself.
    for steps in [1, 3, 5] {
        let alpha = steps as f64 * 2.0 * PI / 12.0;
        let rotated = move |t: f64, p: f64| field(t, p - alpha);
        let a = solve(&grid, &field, 10);
        let b = solve(&grid, &rotated, 10);
        let sa = assign_quantum_numbers(&a, &grid, &lenient()).unwrap();
        let sb = assign_quantum_numbers(&b, &grid, &lenient()).unwrap();
        check_parity_and_completeness(&a, &sa);
        check_parity_and_completeness(&b, &sb);
        for (x, y) in sa.states.iter().zip(&sb.states) {
            assert!((x.energy - y.energy).abs() < 1e-7);
            assert_eq!((x.j, x.spin, x.m.abs), (y.j, y.spin, y.m.abs), "state {} after {steps} steps", x.index);
            assert!((x.purity - y.purity).abs() < 1e-6, "state {}: {} vs {}", x.index, x.purity, y.purity);
        }
    }
}

#[test]
fn strong_field_states_are_reported_not_dropped() {
    let grid = build_grid(8, 12, 12, 1.2).unwrap();
    let field = |t: f64, p: f64| 400.0 * t.cos().powi(2) + 150.0 * t.cos() + 200.0 * t.sin().powi(2) * (2.0 * p).cos();
    let pairs = solve(&grid, &field, 12);
    let a = assign_quantum_numbers(&pairs, &grid, &lenient()).unwrap();
    check_parity_and_completeness(&pairs, &a);
}
