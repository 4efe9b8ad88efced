//! Grid and sparse Hamiltonian for a rotor translating along one axis:
//!
//! `H = -(ħ²/2M) ∂²/∂r² + B·L² + V(r, θ, φ)`
//!
//! on a product grid of `r ∈ (-r_max, r_max)` with Dirichlet walls, polar
//! angles offset from the poles, and a periodic azimuth.

mod assemble;
mod grid;

pub use assemble::{
    angular_block, assemble_hamiltonian, assemble_hamiltonian_with, radial_block, AssemblyOptions,
    RadialStencil, SparseHamiltonian,
};
pub use grid::{build_grid, Grid3D, MIN_POINTS};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HamiltonianError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("non-finite potential {value} at node (ir={ir}, itheta={itheta}, iphi={iphi}) = (r={r:.6} Å, θ={theta:.6}, φ={phi:.6})")]
    NonFinitePotential {
        ir: usize,
        itheta: usize,
        iphi: usize,
        r: f64,
        theta: f64,
        phi: f64,
        value: f64,
    },
}

/// Radial confinement `V(r)` in cm⁻¹.
pub trait RadialPotential {
    fn value(&self, r: f64) -> f64;

    /// Analytic minimum if known; otherwise the grid minimum is used.
    fn minimum(&self) -> Option<f64> {
        None
    }
}

impl<F: Fn(f64) -> f64> RadialPotential for F {
    fn value(&self, r: f64) -> f64 {
        self(r)
    }
}

/// Physical constants of the confined rotor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    /// Total mass in u.
    pub mass_total: f64,
    /// Rotational constant in cm⁻¹.
    pub b_rot: f64,
    /// Vibrational band origin in cm⁻¹.
    pub nu_origin: f64,
    /// Weight of the translation–rotation product term.
    pub coupling_gamma: f64,
    /// Energy normalizing the product term, cm⁻¹.
    pub energy_scale: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { mass_total: 2.016, b_rot: 60.0, nu_origin: 4161.0, coupling_gamma: 1.0, energy_scale: 1.0 }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), HamiltonianError> {
        let positive = [
            ("mass_total", self.mass_total),
            ("b_rot", self.b_rot),
            ("nu_origin", self.nu_origin),
            ("energy_scale", self.energy_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(HamiltonianError::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if !(self.coupling_gamma >= 0.0 && self.coupling_gamma.is_finite()) {
            return Err(HamiltonianError::Config(format!(
                "coupling_gamma must be non-negative, got {}",
                self.coupling_gamma
            )));
        }
        Ok(())
    }

    /// Radial kinetic prefactor `ħ²/(2M)` in cm⁻¹·Å².
    pub fn kinetic_prefactor(&self) -> f64 {
        crate::units::HBAR2_OVER_2U_ANGSTROM2 / self.mass_total
    }
}
