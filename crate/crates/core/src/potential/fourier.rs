use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{AngularSamples, PotentialError};
use crate::sphere::AngularField;

/// One product term `f(lθ)·g(mφ)` of the angular series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FourierTerm {
    CosCos { l: u32, m: u32 },
    CosSin { l: u32, m: u32 },
    SinCos { l: u32, m: u32 },
    SinSin { l: u32, m: u32 },
}

impl FourierTerm {
    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        match *self {
            FourierTerm::CosCos { l, m } => (l as f64 * theta).cos() * (m as f64 * phi).cos(),
            FourierTerm::CosSin { l, m } => (l as f64 * theta).cos() * (m as f64 * phi).sin(),
            FourierTerm::SinCos { l, m } => (l as f64 * theta).sin() * (m as f64 * phi).cos(),
            FourierTerm::SinSin { l, m } => (l as f64 * theta).sin() * (m as f64 * phi).sin(),
        }
    }
}

impl fmt::Display for FourierTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FourierTerm::CosCos { l, m } => write!(f, "cos({l}θ)cos({m}φ)"),
            FourierTerm::CosSin { l, m } => write!(f, "cos({l}θ)sin({m}φ)"),
            FourierTerm::SinCos { l, m } => write!(f, "sin({l}θ)cos({m}φ)"),
            FourierTerm::SinSin { l, m } => write!(f, "sin({l}θ)sin({m}φ)"),
        }
    }
}

/// Term set of a given order: `(2·order + 1)²` products.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourierBasis {
    pub order: u32,
}

impl FourierBasis {
    pub fn terms(&self) -> Vec<FourierTerm> {
        let o = self.order;
        let mut terms = Vec::with_capacity(((2 * o + 1) * (2 * o + 1)) as usize);
        for l in 0..=o {
            for m in 0..=o {
                terms.push(FourierTerm::CosCos { l, m });
                if m >= 1 {
                    terms.push(FourierTerm::CosSin { l, m });
                }
                if l >= 1 {
                    terms.push(FourierTerm::SinCos { l, m });
                }
                if l >= 1 && m >= 1 {
                    terms.push(FourierTerm::SinSin { l, m });
                }
            }
        }
        terms
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierFit {
    pub order: u32,
    pub terms: Vec<FourierTerm>,
    pub coefficients: Vec<f64>,
    pub rms: f64,
}

impl FourierFit {
    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        self.terms.iter().zip(&self.coefficients).map(|(t, c)| c * t.eval(theta, phi)).sum()
    }
}

impl AngularField for FourierFit {
    fn value(&self, theta: f64, phi: f64) -> f64 {
        self.eval(theta, phi)
    }
}

const RANK_TOL: f64 = 1e-10;

/// Linear least-squares fit of the angular series, solved through the SVD of
/// the design matrix.
///
/// A grid too coarse for the requested order leaves some combination of terms
/// undetermined; the error then names the terms that carry that null space.
pub fn fit_angular_fourier(samples: &AngularSamples, order: u32) -> Result<FourierFit, PotentialError> {
    let terms = FourierBasis { order }.terms();
    let p = terms.len();
    let n = samples.len();
    let (thetas, phis) = (samples.thetas(), samples.phis());
    let nphi = phis.len();
    // Zero rows do not change the solution set but keep the SVD full width.
    let rows = n.max(p);
    let design = DMatrix::from_fn(rows, p, |i, j| {
        if i < n {
            terms[j].eval(thetas[i / nphi], phis[i % nphi])
        } else {
            0.0
        }
    });
    let mut rhs = DVector::zeros(rows);
    rhs.rows_mut(0, n).copy_from(&DVector::from_column_slice(samples.values()));

    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = RANK_TOL * smax.max(f64::MIN_POSITIVE);
    let v_t = svd.v_t.as_ref().expect("V requested");
    let mut offending: Vec<usize> = Vec::new();
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s <= cutoff {
            let null = v_t.row(i);
            for (j, c) in null.iter().enumerate() {
                if c.abs() > 0.1 && !offending.contains(&j) {
                    offending.push(j);
                }
            }
        }
    }
    if !offending.is_empty() {
        offending.sort_unstable();
        return Err(PotentialError::IllPosed { terms: offending.into_iter().map(|j| terms[j].to_string()).collect() });
    }
    let coef = svd
        .solve(&rhs, cutoff)
        .map_err(|e| PotentialError::FitRejected(format!("SVD solve failed: {e}")))?;
    let residual = (design * &coef - rhs).rows(0, n).norm_squared();
    let rms = (residual / n as f64).sqrt();
    Ok(FourierFit { order, terms, coefficients: coef.iter().copied().collect(), rms })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_count() {
        for o in 0..5 {
            assert_eq!(FourierBasis { order: o }.terms().len() as u32, (2 * o + 1).pow(2));
        }
    }

    #[test]
    fn reproduces_series_exactly() {
        let (th, ph) = AngularSamples::midpoint_grid(12, 12);
        let f = |t: f64, p: f64| 3.0 + 2.0 * (2.0 * t).cos() - 0.5 * t.sin() * (2.0 * p).sin() + 0.25 * t.cos() * p.cos();
        let s = AngularSamples::from_fn(th, ph, f).unwrap();
        let fit = fit_angular_fourier(&s, 2).unwrap();
        assert!(fit.rms < 1e-10);
        assert!((fit.eval(0.33, 4.4) - f(0.33, 4.4)).abs() < 1e-10);
    }

    #[test]
    fn coarse_grid_is_ill_posed() {
        let (th, ph) = AngularSamples::midpoint_grid(4, 4);
        let s = AngularSamples::from_fn(th, ph, |t, _| t.cos()).unwrap();
        match fit_angular_fourier(&s, 3) {
            Err(PotentialError::IllPosed { terms }) => {
                assert!(!terms.is_empty());
                assert!(terms.iter().any(|t| t.contains('3')), "{terms:?}");
            }
            other => panic!("expected ill-posed, got {other:?}"),
        }
    }
}
