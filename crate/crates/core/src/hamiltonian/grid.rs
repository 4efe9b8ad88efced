use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::HamiltonianError;

pub const MIN_POINTS: usize = 8;

/// Product grid in `(r, θ, φ)`.
///
/// Radial nodes are the `nr` interior points of a uniform partition of
/// `[-r_max, r_max]` into `nr + 1` cells; the walls carry the Dirichlet
/// condition. Polar nodes sit at cell midpoints `(j + ½)π/nθ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid3D {
    pub nr: usize,
    pub ntheta: usize,
    pub nphi: usize,
    pub r_max: f64,
    r_nodes: Vec<f64>,
    theta_nodes: Vec<f64>,
    phi_nodes: Vec<f64>,
    /// Exact area of each polar band, `cos θ_{j-½} - cos θ_{j+½}`.
    band_areas: Vec<f64>,
}

/// ```
/// let g = rotorcage::hamiltonian::build_grid(30, 30, 30, 0.5).unwrap();
/// assert_eq!(g.dimension(), 27000);
/// ```
pub fn build_grid(nr: usize, ntheta: usize, nphi: usize, r_max: f64) -> Result<Grid3D, HamiltonianError> {
    for (name, n) in [("nr", nr), ("ntheta", ntheta), ("nphi", nphi)] {
        if n < MIN_POINTS {
            return Err(HamiltonianError::Config(format!("{name} = {n} is below the minimum of {MIN_POINTS}")));
        }
    }
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(HamiltonianError::Config(format!("r_max must be positive, got {r_max}")));
    }
    let dr = 2.0 * r_max / (nr + 1) as f64;
    let dtheta = PI / ntheta as f64;
    let r_nodes = (0..nr).map(|i| -r_max + (i + 1) as f64 * dr).collect();
    let theta_nodes = (0..ntheta).map(|j| (j as f64 + 0.5) * dtheta).collect();
    let phi_nodes = (0..nphi).map(|k| 2.0 * PI * k as f64 / nphi as f64).collect();
    let band_areas = (0..ntheta).map(|j| (j as f64 * dtheta).cos() - ((j + 1) as f64 * dtheta).cos()).collect();
    Ok(Grid3D { nr, ntheta, nphi, r_max, r_nodes, theta_nodes, phi_nodes, band_areas })
}

impl Grid3D {
    pub fn dimension(&self) -> usize {
        self.nr * self.ntheta * self.nphi
    }

    pub fn angular_dimension(&self) -> usize {
        self.ntheta * self.nphi
    }

    pub fn r_nodes(&self) -> &[f64] {
        &self.r_nodes
    }

    pub fn theta_nodes(&self) -> &[f64] {
        &self.theta_nodes
    }

    pub fn phi_nodes(&self) -> &[f64] {
        &self.phi_nodes
    }

    pub fn dr(&self) -> f64 {
        2.0 * self.r_max / (self.nr + 1) as f64
    }

    pub fn dtheta(&self) -> f64 {
        PI / self.ntheta as f64
    }

    pub fn dphi(&self) -> f64 {
        2.0 * PI / self.nphi as f64
    }

    #[inline]
    pub fn index(&self, ir: usize, itheta: usize, iphi: usize) -> usize {
        (ir * self.ntheta + itheta) * self.nphi + iphi
    }

    /// Inverse of [`Grid3D::index`].
    pub fn unflatten(&self, idx: usize) -> (usize, usize, usize) {
        let iphi = idx % self.nphi;
        let rest = idx / self.nphi;
        (rest / self.ntheta, rest % self.ntheta, iphi)
    }

    /// Solid angle of the cell around `(θ_j, φ_k)`; sums to 4π.
    pub fn solid_angle(&self, itheta: usize) -> f64 {
        self.band_areas[itheta] * self.dphi()
    }

    /// Volume element of a node, `Δr · ΔΩ`.
    pub fn weight(&self, idx: usize) -> f64 {
        let (_, it, _) = self.unflatten(idx);
        self.dr() * self.solid_angle(it)
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.dimension()).map(|i| self.weight(i)).collect()
    }

    /// Angular weights in `(θ, φ)` flat order.
    pub fn angular_weights(&self) -> Vec<f64> {
        (0..self.angular_dimension()).map(|i| self.solid_angle(i / self.nphi)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirty_cubed_grid() {
        let g = build_grid(30, 30, 30, 0.5).unwrap();
        assert_eq!(g.dimension(), 27000);
        assert!(g.theta_nodes()[0] > 0.0 && *g.theta_nodes().last().unwrap() < PI);
    }

    #[test]
    fn shell_weights() {
        let g = build_grid(8, 8, 8, 1.0).unwrap();
        assert_eq!(g.dimension(), 512);
        let shell: f64 = (0..g.angular_dimension()).map(|i| g.weight(i)).sum();
        assert!((shell - 4.0 * PI * g.dr()).abs() < 0.01 * 4.0 * PI * g.dr());
        assert!(g.weights().iter().all(|w| *w > 0.0));
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(build_grid(7, 30, 30, 0.5), Err(HamiltonianError::Config(_))));
    }

    #[test]
    fn flat_index_round_trip() {
        let g = build_grid(9, 10, 11, 1.0).unwrap();
        for idx in [0, 1, 57, 989] {
            let (a, b, c) = g.unflatten(idx);
            assert_eq!(g.index(a, b, c), idx);
        }
    }
}
