use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{fit_angular_fourier, AngularSamples, PotentialError};
use crate::sphere::{legendre_table, lm_count, lm_index, ylm_matrix_element, AngularField, SphereQuadrature};

pub const DEFAULT_K_MAX: u32 = 4;

/// Spherical-tensor content `c_kq = ∮ Y*_kq V dΩ` of an angular field, so
/// that `V = Σ c_kq Y_kq` for band-limited fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "DecompositionDoc", try_from = "DecompositionDoc")]
pub struct TensorDecomposition {
    k_max: u32,
    coefficients: Vec<Complex64>,
}

impl TensorDecomposition {
    pub fn from_coefficients(k_max: u32, coefficients: Vec<Complex64>) -> Result<Self, PotentialError> {
        if coefficients.len() != lm_count(k_max) {
            return Err(PotentialError::InvalidArgument(format!(
                "{} coefficients for k_max = {k_max}, expected {}",
                coefficients.len(),
                lm_count(k_max)
            )));
        }
        Ok(Self { k_max, coefficients })
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn coefficient(&self, k: u32, q: i32) -> Complex64 {
        assert!(k <= self.k_max && q.unsigned_abs() <= k);
        self.coefficients[lm_index(k, q)]
    }

    /// `R_k = Σ_q |c_kq|²`.
    pub fn rank_power(&self, k: u32) -> f64 {
        (-(k as i32)..=k as i32).map(|q| self.coefficient(k, q).norm_sqr()).sum()
    }

    pub fn rank_powers(&self) -> Vec<f64> {
        (0..=self.k_max).map(|k| self.rank_power(k)).collect()
    }

    /// Evaluates `Σ c_kq Y_kq(θ, φ)`; the imaginary part vanishes for real fields.
    pub fn reconstruct(&self, theta: f64, phi: f64) -> f64 {
        let table = legendre_table(self.k_max, theta);
        let mut v = Complex64::new(0.0, 0.0);
        for k in 0..=self.k_max {
            for q in -(k as i32)..=k as i32 {
                v += self.coefficient(k, q) * table.ylm(k, q, phi);
            }
        }
        v.re
    }
}

impl AngularField for TensorDecomposition {
    fn value(&self, theta: f64, phi: f64) -> f64 {
        self.reconstruct(theta, phi)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CoefficientDoc {
    k: u32,
    q: i32,
    re: f64,
    im: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct DecompositionDoc {
    k_max: u32,
    coefficients: Vec<CoefficientDoc>,
    rank_power: BTreeMap<String, f64>,
}

impl From<TensorDecomposition> for DecompositionDoc {
    fn from(d: TensorDecomposition) -> Self {
        let mut coefficients = Vec::with_capacity(d.coefficients.len());
        for k in 0..=d.k_max {
            for q in -(k as i32)..=k as i32 {
                let c = d.coefficient(k, q);
                coefficients.push(CoefficientDoc { k, q, re: c.re, im: c.im });
            }
        }
        let rank_power = (0..=d.k_max).map(|k| (k.to_string(), d.rank_power(k))).collect();
        DecompositionDoc { k_max: d.k_max, coefficients, rank_power }
    }
}

impl TryFrom<DecompositionDoc> for TensorDecomposition {
    type Error = PotentialError;

    fn try_from(doc: DecompositionDoc) -> Result<Self, Self::Error> {
        let mut coefficients = vec![Complex64::new(0.0, 0.0); lm_count(doc.k_max)];
        let mut seen = vec![false; coefficients.len()];
        for c in doc.coefficients {
            if c.k > doc.k_max || c.q.unsigned_abs() > c.k {
                return Err(PotentialError::InvalidArgument(format!("coefficient (k={}, q={}) out of range", c.k, c.q)));
            }
            let i = lm_index(c.k, c.q);
            coefficients[i] = Complex64::new(c.re, c.im);
            seen[i] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(PotentialError::InvalidArgument("decomposition is missing coefficients".into()));
        }
        Ok(Self { k_max: doc.k_max, coefficients })
    }
}

/// Projects an angular field onto `Y_kq` for `k <= k_max` using the default
/// 48 × 96 product quadrature.
///
/// ```
/// use rotorcage::potential::decompose_spherical_tensors;
/// let d = decompose_spherical_tensors(&|t: f64, _p: f64| t.cos(), 4).unwrap();
/// let c10 = d.coefficient(1, 0);
/// assert!((c10.re - (4.0 * std::f64::consts::PI / 3.0).sqrt()).abs() < 1e-12);
/// assert!(d.rank_power(2) < 1e-24);
/// ```
pub fn decompose_spherical_tensors<F: AngularField + ?Sized>(field: &F, k_max: u32) -> Result<TensorDecomposition, PotentialError> {
    decompose_with_quadrature(field, k_max, &SphereQuadrature::default())
}

pub fn decompose_with_quadrature<F: AngularField + ?Sized>(
    field: &F,
    k_max: u32,
    quad: &SphereQuadrature,
) -> Result<TensorDecomposition, PotentialError> {
    if k_max < 2 {
        return Err(PotentialError::InvalidArgument(format!("k_max must be at least 2, got {k_max}")));
    }
    if k_max > quad.max_rank() {
        return Err(PotentialError::InsufficientQuadrature { k_max, max_rank: quad.max_rank() });
    }
    let mut coefficients = vec![Complex64::new(0.0, 0.0); lm_count(k_max)];
    let dphi = quad.phi_weight();
    for (theta, w) in quad.thetas().iter().zip(quad.polar_weights()) {
        let table = legendre_table(k_max, *theta);
        for ip in 0..quad.n_phi() {
            let phi = quad.phi(ip);
            let v = field.value(*theta, phi) * w * dphi;
            for k in 0..=k_max {
                for q in -(k as i32)..=k as i32 {
                    coefficients[lm_index(k, q)] += table.ylm(k, q, phi).conj() * v;
                }
            }
        }
    }
    Ok(TensorDecomposition { k_max, coefficients })
}

/// Decomposes a sampled scan by first fitting the angular series at order
/// `k_max`, which spans every field band-limited to that degree, and then
/// resampling the fit on the quadrature nodes.
pub fn decompose_samples(samples: &AngularSamples, k_max: u32) -> Result<TensorDecomposition, PotentialError> {
    let fit = fit_angular_fourier(samples, k_max)?;
    decompose_spherical_tensors(&fit, k_max)
}

/// Matrix `⟨Y_jm|V|Y_j'm'⟩` for `j, j' <= j_max`, rows and columns ordered by
/// [`lm_index`].
pub fn angular_coupling_matrix(decomp: &TensorDecomposition, j_max: u32) -> DMatrix<Complex64> {
    let n = lm_count(j_max);
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for j in 0..=j_max {
        for mj in -(j as i32)..=j as i32 {
            for jp in 0..=j_max {
                for mp in -(jp as i32)..=jp as i32 {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..=decomp.k_max() {
                        let q = mj - mp;
                        if q.unsigned_abs() > k {
                            continue;
                        }
                        let g = ylm_matrix_element(j, mj, k, q, jp, mp);
                        if g != 0.0 {
                            acc += decomp.coefficient(k, q) * g;
                        }
                    }
                    m[(lm_index(j, mj), lm_index(jp, mp))] = acc;
                }
            }
        }
    }
    m
}
