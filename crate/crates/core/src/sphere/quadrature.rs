use std::f64::consts::PI;

use super::AngularField;

/// Gauss–Legendre nodes and weights on [-1, 1], nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Product quadrature on the sphere: Gauss–Legendre in cos θ crossed with
/// the uniform trapezoid rule in φ.
///
/// Integrates `P(cos θ, sin θ) e^{ipφ}` exactly whenever the polar part is a
/// polynomial of degree `<= 2·n_theta - 1` in cos θ and `|p| < n_phi`.
#[derive(Debug, Clone)]
pub struct SphereQuadrature {
    thetas: Vec<f64>,
    polar_weights: Vec<f64>,
    n_phi: usize,
}

impl Default for SphereQuadrature {
    fn default() -> Self {
        Self::new(48, 96)
    }
}

impl SphereQuadrature {
    pub fn new(n_theta: usize, n_phi: usize) -> Self {
        assert!(n_theta >= 1 && n_phi >= 1);
        let (x, w) = gauss_legendre(n_theta);
        // Order nodes by increasing θ, i.e. decreasing cos θ.
        let thetas = x.iter().rev().map(|c| c.acos()).collect();
        let polar_weights = w.into_iter().rev().collect();
        Self { thetas, polar_weights, n_phi }
    }

    pub fn n_theta(&self) -> usize {
        self.thetas.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn polar_weights(&self) -> &[f64] {
        &self.polar_weights
    }

    pub fn phi(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n_phi as f64
    }

    pub fn phi_weight(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    /// Highest rank `k` whose projection `∮ Y*_kq V dΩ` is exact for every
    /// field band-limited to degree `k`.
    pub fn max_rank(&self) -> u32 {
        let by_theta = self.n_theta().saturating_sub(1);
        let by_phi = self.n_phi.saturating_sub(1) / 2;
        by_theta.min(by_phi) as u32
    }

    /// `∮ f dΩ` with a fixed summation order.
    pub fn integrate<F: AngularField + ?Sized>(&self, f: &F) -> f64 {
        let dphi = self.phi_weight();
        let mut total = 0.0;
        for (theta, w) in self.thetas.iter().zip(&self.polar_weights) {
            let mut ring = 0.0;
            for k in 0..self.n_phi {
                ring += f.value(*theta, self.phi(k));
            }
            total += w * ring * dphi;
        }
        total
    }

    /// Spherical average `(1/4π) ∮ f dΩ`.
    pub fn mean<F: AngularField + ?Sized>(&self, f: &F) -> f64 {
        self.integrate(f) / (4.0 * PI)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_monomials() {
        let (x, w) = gauss_legendre(7);
        for deg in 0..=13 {
            let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn sphere_area() {
        let q = SphereQuadrature::new(5, 8);
        assert!((q.integrate(&|_: f64, _: f64| 1.0) - 4.0 * PI).abs() < 1e-13);
        assert_eq!(q.max_rank(), 3);
    }
}
