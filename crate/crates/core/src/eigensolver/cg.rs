//! Jacobi-preconditioned conjugate gradients for the inner shifted solves.

use crate::sparse::CsrMatrix;

#[derive(Debug)]
pub enum CgFailure {
    /// `pᵀAp <= 0`: the shifted operator is not positive definite.
    NegativeCurvature { curvature: f64 },
    NotConverged { iterations: usize, residual: f64 },
}

pub struct JacobiCg<'a> {
    a: &'a CsrMatrix,
    inv_diag: Vec<f64>,
    tol: f64,
    max_iter: usize,
}

impl<'a> JacobiCg<'a> {
    /// Solves to `‖b - Ax‖ <= tol · ‖b‖`.
    pub fn new(a: &'a CsrMatrix, tol: f64) -> Self {
        let inv_diag = a.diagonal().iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
        Self { a, inv_diag, tol, max_iter: 20 * a.dim().max(50) }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, CgFailure> {
        let n = b.len();
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        let bnorm = dot(b, b).sqrt();
        let mut x = vec![0.0; n];
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut r = b.to_vec();
        let mut z: Vec<f64> = r.iter().zip(&self.inv_diag).map(|(p, q)| p * q).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        for _ in 0..self.max_iter {
            self.a.mul_vec_into(&p, &mut ap);
            let curvature = dot(&p, &ap);
            if curvature <= 0.0 {
                return Err(CgFailure::NegativeCurvature { curvature });
            }
            let alpha = rz / curvature;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rnorm = dot(&r, &r).sqrt();
            if rnorm <= self.tol * bnorm {
                return Ok(x);
            }
            for i in 0..n {
                z[i] = r[i] * self.inv_diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let residual = dot(&r, &r).sqrt() / bnorm;
        Err(CgFailure::NotConverged { iterations: self.max_iter, residual })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spd_tridiagonal() {
        let n = 40;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 3.0 + i as f64 * 0.1));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, t);
        let b = vec![1.0; n];
        let x = JacobiCg::new(&a, 1e-12).solve(&b).unwrap();
        let r: f64 = a.mul_vec(&x).iter().zip(&b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        assert!(r < 1e-10);
    }

    #[test]
    fn indefinite_reports_negative_curvature() {
        let a = CsrMatrix::from_triplets(3, vec![(0, 0, 1.0), (1, 1, -2.0), (2, 2, 1.0)]);
        assert!(matches!(JacobiCg::new(&a, 1e-12).solve(&[0.0, 1.0, 0.0]), Err(CgFailure::NegativeCurvature { .. })));
    }
}
