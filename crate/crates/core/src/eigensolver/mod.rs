//! Lowest eigenpairs of the sparse Hamiltonian.
//!
//! [`solve_lowest`] runs a block Krylov–Schur iteration on the shift-inverted
//! operator `(H - σI)⁻¹` with full reorthogonalization and thick restarts.
//! Eigenvalues of `H` nearest `σ` become the dominant eigenvalues of the
//! inverted operator. [`dense_oracle_solve`] diagonalizes small matrices
//! densely and serves as the reference.

mod cg;
mod dense;
mod krylov;
mod skyline;

pub use dense::{dense_oracle_solve, DENSE_ORACLE_CAP};
pub use krylov::solve_lowest;
pub use skyline::{profile_size, reverse_cuthill_mckee, SkylineLdl};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Eigenvalues closer than this (cm⁻¹) form a degenerate cluster.
pub const CLUSTER_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerSolver {
    /// Skyline factorization unless its profile exceeds the memory cap, then CG.
    #[default]
    Auto,
    Direct,
    ConjugateGradient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub n_eig: usize,
    pub sigma: f64,
    /// Residual tolerance `‖Hx - λx‖` in cm⁻¹.
    pub tol: f64,
    /// Maximum number of restarts.
    pub max_iter: usize,
    pub seed: u64,
    pub block_size: usize,
    /// Krylov basis size before a restart; `None` picks a default from `n_eig`.
    pub max_basis: Option<usize>,
    pub inner: InnerSolver,
    /// Largest factor size in bytes before the direct solver gives way to CG.
    pub memory_cap_bytes: usize,
}

impl SolverOptions {
    pub fn new(n_eig: usize, sigma: f64) -> Self {
        Self {
            n_eig,
            sigma,
            tol: 1e-6,
            max_iter: 300,
            seed: 0x5eed,
            block_size: 4,
            max_basis: None,
            inner: InnerSolver::Auto,
            memory_cap_bytes: 2 << 30,
        }
    }
}

/// Per-check diagnostics of the restarted iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    pub converged_count: usize,
    pub min_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub restarts: usize,
    pub operator_applications: usize,
    pub inner_solver: String,
    pub factor_entries: usize,
    pub history: Vec<IterationRecord>,
}

/// Ascending eigenvalues with Euclidean-orthonormal vectors.
///
/// Vectors live in the weight-scaled representation `u = W^{1/2} ψ` used by
/// the assembled Hamiltonian, so unit Euclidean norm is unit norm of `ψ` in
/// the grid metric.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub diagnostics: SolverDiagnostics,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Index groups of eigenvalues within [`CLUSTER_TOL`] of a neighbour.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        clusters(&self.values, CLUSTER_TOL)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

/// Groups sorted values whose consecutive gaps are below `tol`.
pub fn clusters(values: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        match out.last_mut() {
            Some(g) if (v - values[*g.last().unwrap()]).abs() < tol => g.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("invalid solver argument: {0}")]
    InvalidArgument(String),
    #[error("shift σ = {sigma} is (numerically) an eigenvalue: zero pivot at row {row}; retry with σ' = {suggested}")]
    ShiftAdjust { sigma: f64, suggested: f64, row: usize },
    #[error("shifted operator is not positive definite (curvature {curvature:.3e}); choose σ below the spectrum or use the direct solver")]
    Indefinite { curvature: f64 },
    #[error("inner solve failed: {0}")]
    InnerSolve(String),
    #[error("only {} of {requested} eigenpairs converged within the iteration limit", .converged.len())]
    Partial { converged: Box<EigenPairs>, requested: usize },
    #[error("dense oracle refuses dimension {dim} (cap {cap})")]
    OracleTooLarge { dim: usize, cap: usize },
}
