use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{PotentialError, RadialSamples};
use crate::hamiltonian::RadialPotential;

/// `V(r) = v0 + ½ k (r - r0)²` in cm⁻¹ with `r` in Å.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HarmonicFit {
    pub k: f64,
    pub r0: f64,
    pub v0: f64,
    /// Root-mean-square residual over the input samples.
    pub rms: f64,
}

impl HarmonicFit {
    pub fn eval(&self, r: f64) -> f64 {
        let d = r - self.r0;
        self.v0 + 0.5 * self.k * d * d
    }

    /// Harmonic frequency `ω = sqrt(k·2a/M)` in cm⁻¹ for a displacement
    /// coordinate whose kinetic prefactor is `a/M` (see [`crate::units`]).
    pub fn omega(&self, mass_u: f64) -> f64 {
        (2.0 * crate::units::HBAR2_OVER_2U_ANGSTROM2 / mass_u * self.k).sqrt()
    }
}

impl RadialPotential for HarmonicFit {
    fn value(&self, r: f64) -> f64 {
        self.eval(r)
    }

    fn minimum(&self) -> Option<f64> {
        Some(self.v0)
    }
}

/// Least-squares parabola through the scan, solved by QR on the
/// `(1, r, r²)` design matrix.
///
/// ```
/// use rotorcage::potential::{fit_radial_harmonic, RadialSamples};
/// let pts = (-4..=4).map(|i| { let r = 0.05 * i as f64; (r, 0.5 * 800.0 * r * r) }).collect();
/// let fit = fit_radial_harmonic(&RadialSamples::new(pts).unwrap()).unwrap();
/// assert!((fit.k - 800.0).abs() < 1e-6 && fit.r0.abs() < 1e-9);
/// ```
pub fn fit_radial_harmonic(samples: &RadialSamples) -> Result<HarmonicFit, PotentialError> {
    let pts = samples.points();
    let n = pts.len();
    let design = DMatrix::from_fn(n, 3, |i, j| pts[i].0.powi(j as i32));
    let rhs = DVector::from_iterator(n, pts.iter().map(|p| p.1));
    let qr = design.clone().qr();
    let qtb = qr.q().transpose() * &rhs;
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if r.diagonal().iter().any(|d| d.abs() <= 1e-12 * scale) {
        return Err(PotentialError::FitRejected("radial abscissae do not determine a parabola".into()));
    }
    let c = r
        .solve_upper_triangular(&qtb)
        .ok_or_else(|| PotentialError::FitRejected("singular radial design".into()))?;
    let (c0, c1, c2) = (c[0], c[1], c[2]);
    let k = 2.0 * c2;
    if !(k > 0.0) {
        return Err(PotentialError::FitRejected(format!(
            "fitted curvature k = {k:.6} cm⁻¹/Å² is not positive; the scan does not bracket a minimum"
        )));
    }
    let r0 = -c1 / (2.0 * c2);
    let v0 = c0 - c1 * c1 / (4.0 * c2);
    let residual = design * c - rhs;
    let rms = (residual.norm_squared() / n as f64).sqrt();
    Ok(HarmonicFit { k, r0, v0, rms })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Normal equations solved by Cramer's rule.
    fn cramer_parabola(pts: &[(f64, f64)]) -> (f64, f64, f64) {
        let mut s = [0.0; 5];
        let mut t = [0.0; 3];
        for &(r, v) in pts {
            for (p, sp) in s.iter_mut().enumerate() {
                *sp += r.powi(p as i32);
            }
            for (p, tp) in t.iter_mut().enumerate() {
                *tp += v * r.powi(p as i32);
            }
        }
        let m = [[s[0], s[1], s[2]], [s[1], s[2], s[3]], [s[2], s[3], s[4]]];
        let det = |a: [[f64; 3]; 3]| {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
                + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
        };
        let d = det(m);
        let col = |j: usize| {
            let mut a = m;
            for i in 0..3 {
                a[i][j] = t[i];
            }
            det(a) / d
        };
        (col(0), col(1), col(2))
    }

    #[test]
    fn exact_parabola() {
        let pts: Vec<_> = [-0.2, -0.1, 0.0, 0.1, 0.2].iter().map(|&r| (r, 0.5 * 1000.0 * r * r)).collect();
        let fit = fit_radial_harmonic(&RadialSamples::new(pts).unwrap()).unwrap();
        assert!((fit.k - 1000.0).abs() < 1e-6 * 1000.0);
        assert!(fit.r0.abs() < 1e-9);
        assert!(fit.v0.abs() < 1e-9);
        assert!(fit.rms < 1e-9);
    }

    #[test]
    fn matches_normal_equations() {
        let pts: Vec<_> = (0..11)
            .map(|i| {
                let r = -0.3 + 0.06 * i as f64;
                (r, 12.0 - 40.0 * r + 650.0 * r * r + 90.0 * r.powi(3) + if i % 2 == 0 { 0.7 } else { -0.4 })
            })
            .collect();
        let fit = fit_radial_harmonic(&RadialSamples::new(pts.clone()).unwrap()).unwrap();
        let (c0, c1, c2) = cramer_parabola(&pts);
        assert!((fit.k - 2.0 * c2).abs() < 1e-8 * c2.abs());
        assert!((fit.r0 + c1 / (2.0 * c2)).abs() < 1e-10);
        assert!((fit.v0 - (c0 - c1 * c1 / (4.0 * c2))).abs() < 1e-8);
    }

    #[test]
    fn inverted_well_rejected() {
        let pts: Vec<_> = (-3..=3).map(|i| {
            let r = 0.1 * i as f64;
            (r, -300.0 * r * r)
        }).collect();
        assert!(matches!(fit_radial_harmonic(&RadialSamples::new(pts).unwrap()), Err(PotentialError::FitRejected(_))));
    }
}
