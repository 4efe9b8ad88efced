use nalgebra::DMatrix;

use super::{EigenError, EigenPairs, SolverDiagnostics};
use crate::sparse::CsrMatrix;

pub const DENSE_ORACLE_CAP: usize = 4000;

/// Full spectrum by dense symmetric diagonalization.
///
/// ```
/// use rotorcage::{eigensolver::dense_oracle_solve, sparse::CsrMatrix};
/// let h = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
/// let pairs = dense_oracle_solve(&h).unwrap();
/// assert!((pairs.values[0] - 1.0).abs() < 1e-12 && (pairs.values[1] - 3.0).abs() < 1e-12);
/// ```
pub fn dense_oracle_solve(h: &CsrMatrix) -> Result<EigenPairs, EigenError> {
    let n = h.dim();
    if n > DENSE_ORACLE_CAP {
        return Err(EigenError::OracleTooLarge { dim: n, cap: DENSE_ORACLE_CAP });
    }
    let mut m = DMatrix::zeros(n, n);
    for (i, j, v) in h.triplets() {
        m[(i, j)] = v;
    }
    let m = (&m + m.transpose()) * 0.5;
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for i in order {
        let lambda = eig.eigenvalues[i];
        let x: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
        let hx = h.mul_vec(&x);
        residuals.push(hx.iter().zip(&x).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt());
        values.push(lambda);
        vectors.push(x);
    }
    let diagnostics = SolverDiagnostics { inner_solver: "dense".into(), ..Default::default() };
    Ok(EigenPairs { values, vectors, residuals, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let p = dense_oracle_solve(&CsrMatrix::identity(100)).unwrap();
        assert!(p.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn refuses_large() {
        let h = CsrMatrix::identity(DENSE_ORACLE_CAP + 1);
        assert!(matches!(dense_oracle_solve(&h), Err(EigenError::OracleTooLarge { .. })));
    }
}
