use log::{debug, info};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cg::{CgFailure, JacobiCg};
use super::skyline::SkylineLdl;
use super::{EigenError, EigenPairs, InnerSolver, IterationRecord, SolverDiagnostics, SolverOptions};
use crate::sparse::CsrMatrix;

/// Relative size below which an orthogonalized vector counts as dependent.
const DEFLATION_TOL: f64 = 1e-10;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

enum ShiftInvert<'a> {
    Direct(SkylineLdl),
    Cg(JacobiCg<'a>),
}

impl<'a> ShiftInvert<'a> {
    fn new(shifted: &'a CsrMatrix, opts: &SolverOptions, diag: &mut SolverDiagnostics) -> Result<Self, EigenError> {
        let use_direct = match opts.inner {
            InnerSolver::Direct => true,
            InnerSolver::ConjugateGradient => false,
            InnerSolver::Auto => {
                let (_, profile) = SkylineLdl::choose_ordering(shifted);
                let bytes = (profile + shifted.dim()) * std::mem::size_of::<f64>();
                if bytes > opts.memory_cap_bytes {
                    info!("factor would need {bytes} bytes (cap {}), using conjugate gradients", opts.memory_cap_bytes);
                }
                bytes <= opts.memory_cap_bytes
            }
        };
        if use_direct {
            let (perm, _) = SkylineLdl::choose_ordering(shifted);
            let f = SkylineLdl::factor(shifted, perm).map_err(|p| EigenError::ShiftAdjust {
                sigma: opts.sigma,
                suggested: opts.sigma - opts.tol * 1e3,
                row: p.row,
            })?;
            diag.inner_solver = "skyline_ldlt".into();
            diag.factor_entries = f.stored_entries();
            debug!("skyline factor: {} entries, {} negative pivots", f.stored_entries(), f.negative_pivots());
            Ok(ShiftInvert::Direct(f))
        } else {
            diag.inner_solver = "jacobi_cg".into();
            Ok(ShiftInvert::Cg(JacobiCg::new(shifted, opts.tol / 100.0)))
        }
    }

    fn apply(&self, b: &[f64]) -> Result<Vec<f64>, EigenError> {
        match self {
            ShiftInvert::Direct(f) => Ok(f.solve(b)),
            ShiftInvert::Cg(cg) => cg.solve(b).map_err(|e| match e {
                CgFailure::NegativeCurvature { curvature } => EigenError::Indefinite { curvature },
                CgFailure::NotConverged { iterations, residual } => {
                    EigenError::InnerSolve(format!("CG stalled after {iterations} iterations at relative residual {residual:.3e}"))
                }
            }),
        }
    }
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
}

/// Orthogonalizes `v` against `sets` (two passes) and normalizes it, or
/// returns `None` if nothing independent is left.
fn orthonormalize(mut v: Vec<f64>, sets: &[&[Vec<f64>]]) -> Option<Vec<f64>> {
    let start = norm(&v);
    for _ in 0..2 {
        for set in sets {
            for q in set.iter() {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
    }
    let nv = norm(&v);
    if nv > 1e-8 * start && nv > 0.0 {
        v.iter_mut().for_each(|x| *x /= nv);
        Some(v)
    } else {
        None
    }
}

struct RitzPair {
    lambda: f64,
    vector: Vec<f64>,
    residual: f64,
}

/// Eigenpairs of `h` nearest `σ` by shift-invert block Krylov–Schur.
///
/// ```
/// use rotorcage::{eigensolver::{solve_lowest, SolverOptions}, sparse::CsrMatrix};
/// let h = CsrMatrix::from_triplets(10, (0..10).map(|i| (i, i, (i + 1) as f64)).collect());
/// let pairs = solve_lowest(&h, &SolverOptions::new(3, 0.0)).unwrap();
/// for (v, want) in pairs.values.iter().zip([1.0, 2.0, 3.0]) {
///     assert!((v - want).abs() < 1e-10);
/// }
/// ```
pub fn solve_lowest(h: &CsrMatrix, opts: &SolverOptions) -> Result<EigenPairs, EigenError> {
    let n = h.dim();
    if opts.n_eig == 0 || opts.n_eig >= n {
        return Err(EigenError::InvalidArgument(format!("n_eig = {} must be in 1..{}", opts.n_eig, n)));
    }
    if !(opts.tol > 0.0) || !opts.sigma.is_finite() || opts.block_size == 0 {
        return Err(EigenError::InvalidArgument("tol must be positive, sigma finite and block_size nonzero".into()));
    }
    let shifted = h.shifted(-opts.sigma);
    let mut diag = SolverDiagnostics::default();
    let op = ShiftInvert::new(&shifted, opts, &mut diag)?;

    let bs = opts.block_size.min(n);
    let n_eig = opts.n_eig;
    let mb = opts
        .max_basis
        .unwrap_or((2 * n_eig + 2 * bs).max(n_eig + 4 * bs))
        .max(n_eig + bs)
        .min(n);
    let cap = mb + bs;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(cap);
    let mut t = DMatrix::<f64>::zeros(cap, cap);
    for _ in 0..bs {
        if let Some(q) = orthonormalize(random_vector(n, &mut rng), &[&basis]) {
            basis.push(q);
        }
    }
    let mut m = 0usize;
    let mut nb = basis.len();

    loop {
        // Expansion phase.
        while nb > 0 && m + nb + bs <= cap && m < mb {
            let total = m + nb;
            let mut fresh: Vec<Vec<f64>> = Vec::with_capacity(bs);
            let mut r_block = vec![vec![0.0; nb]; bs];
            for ci in 0..nb {
                let mut w = op.apply(&basis[m + ci])?;
                diag.operator_applications += 1;
                let wnorm = norm(&w);
                for _ in 0..2 {
                    for k in 0..total {
                        let c = dot(&basis[k], &w);
                        t[(k, m + ci)] += c;
                        axpy(-c, &basis[k], &mut w);
                    }
                    for (j, q) in fresh.iter().enumerate() {
                        let c = dot(q, &w);
                        r_block[j][ci] += c;
                        axpy(-c, q, &mut w);
                    }
                }
                let nw = norm(&w);
                if nw > DEFLATION_TOL * wnorm && nw > 0.0 {
                    r_block[fresh.len()][ci] = nw;
                    w.iter_mut().for_each(|x| *x /= nw);
                    fresh.push(w);
                } else if let Some(q) = orthonormalize(random_vector(n, &mut rng), &[&basis, &fresh]) {
                    fresh.push(q);
                }
            }
            for (j, row) in r_block.iter().enumerate().take(fresh.len()) {
                for (ci, v) in row.iter().enumerate() {
                    t[(total + j, m + ci)] = *v;
                }
            }
            nb = fresh.len();
            basis.extend(fresh);
            m = total;
        }

        // Rayleigh–Ritz on the expanded part.
        let s = {
            let block = t.view((0, 0), (m, m));
            (&block + block.transpose()) * 0.5
        };
        let eig = SymmetricEigen::new(s);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].abs().total_cmp(&eig.eigenvalues[a].abs()));
        let want = n_eig.min(m);
        let mut ritz = Vec::with_capacity(want);
        for &i in order.iter().take(want) {
            let y = eig.eigenvectors.column(i);
            let mut x = vec![0.0; n];
            for (k, yk) in y.iter().enumerate() {
                axpy(*yk, &basis[k], &mut x);
            }
            let nx = norm(&x);
            x.iter_mut().for_each(|v| *v /= nx);
            let hx = h.mul_vec(&x);
            let lambda = dot(&x, &hx);
            let residual = hx.iter().zip(&x).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
            ritz.push(RitzPair { lambda, vector: x, residual });
        }
        let converged = ritz.iter().filter(|p| p.residual <= opts.tol).count();
        let min_residual = ritz.iter().map(|p| p.residual).fold(f64::INFINITY, f64::min);
        let record = IterationRecord { iter: diag.restarts, converged_count: converged, min_residual };
        debug!("iter {}, converged_count {}, min_residual {:.3e}", record.iter, record.converged_count, record.min_residual);
        diag.history.push(record);

        if converged == n_eig {
            info!(
                "{} eigenpairs converged after {} restarts and {} inner solves",
                n_eig, diag.restarts, diag.operator_applications
            );
            return Ok(finish(ritz, diag));
        }
        if diag.restarts >= opts.max_iter {
            let done: Vec<RitzPair> = ritz.into_iter().filter(|p| p.residual <= opts.tol).collect();
            return Err(EigenError::Partial { converged: Box::new(finish(done, diag)), requested: n_eig });
        }
        diag.restarts += 1;

        // Thick restart: keep the leading Ritz vectors plus the pending block.
        let k = (n_eig + (mb - n_eig) / 2).min(mb.saturating_sub(bs)).min(m).max(want.min(m));
        let y = DMatrix::from_fn(m, k, |r, c| eig.eigenvectors[(r, order[c])]);
        let coupling = t.view((m, 0), (nb, m)) * &y;
        let mut kept: Vec<Vec<f64>> = Vec::with_capacity(cap);
        for c in 0..k {
            let mut x = vec![0.0; n];
            for r in 0..m {
                axpy(y[(r, c)], &basis[r], &mut x);
            }
            kept.push(x);
        }
        let mut pending: Vec<Vec<f64>> = basis.drain(m..m + nb).collect();
        t.fill(0.0);
        for c in 0..k {
            t[(c, c)] = eig.eigenvalues[order[c]];
        }
        for a in 0..nb {
            for c in 0..k {
                t[(k + a, c)] = coupling[(a, c)];
            }
        }
        if pending.is_empty() {
            // Invariant subspace without all wanted pairs: continue from a fresh block.
            for _ in 0..bs {
                if let Some(q) = orthonormalize(random_vector(n, &mut rng), &[&kept, &pending]) {
                    pending.push(q);
                }
            }
            if pending.is_empty() {
                let done: Vec<RitzPair> = ritz.into_iter().filter(|p| p.residual <= opts.tol).collect();
                return Err(EigenError::Partial { converged: Box::new(finish(done, diag)), requested: n_eig });
            }
        }
        nb = pending.len();
        basis = kept;
        basis.extend(pending);
        m = k;
    }
}

fn finish(mut pairs: Vec<RitzPair>, diagnostics: SolverDiagnostics) -> EigenPairs {
    pairs.sort_by(|a, b| a.lambda.total_cmp(&b.lambda));
    EigenPairs {
        values: pairs.iter().map(|p| p.lambda).collect(),
        residuals: pairs.iter().map(|p| p.residual).collect(),
        vectors: pairs.into_iter().map(|p| p.vector).collect(),
        diagnostics,
    }
}
