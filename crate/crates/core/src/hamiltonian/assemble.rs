use serde::{Deserialize, Serialize};

use super::{Grid3D, HamiltonianError, ModelParams, RadialPotential};
use crate::sparse::CsrMatrix;
use crate::sphere::{AngularField, SphereQuadrature};

/// Central-difference stencil for `-∂²/∂r²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialStencil {
    /// Three-point `(-1, 2, -1)/Δr²`.
    SecondOrder,
    /// Five-point `(1/12, -4/3, 5/2, -4/3, 1/12)/Δr²`.
    #[default]
    FourthOrder,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    pub include_coupling: bool,
    pub radial_stencil: RadialStencil,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { include_coupling: true, radial_stencil: RadialStencil::default() }
    }
}

/// Assembled Hamiltonian in the symmetric (weight-scaled) representation.
///
/// Grid functions `ψ` map to vectors `u = W^{1/2} ψ`, so the matrix is
/// symmetric and Euclidean inner products of `u` are grid quadratures.
#[derive(Debug, Clone)]
pub struct SparseHamiltonian {
    matrix: CsrMatrix,
    grid: Grid3D,
    params: ModelParams,
    potential: Vec<f64>,
}

impl SparseHamiltonian {
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    pub fn grid(&self) -> &Grid3D {
        &self.grid
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn dimension(&self) -> usize {
        self.matrix.dim()
    }

    /// Total potential at every node, flat grid order.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn min_potential(&self) -> f64 {
        self.potential.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn symmetry_defect(&self) -> f64 {
        self.matrix.symmetry_defect()
    }

    pub fn write_coordinates<W: std::io::Write>(&self, out: W) -> std::io::Result<()> {
        self.matrix.write_coordinates(out)
    }
}

/// Radial kinetic block `-(ħ²/2M) d²/dr²` on the interior nodes.
pub fn radial_block(grid: &Grid3D, params: &ModelParams, stencil: RadialStencil) -> CsrMatrix {
    let a = params.kinetic_prefactor() / (grid.dr() * grid.dr());
    let coeffs: &[f64] = match stencil {
        RadialStencil::SecondOrder => &[2.0, -1.0],
        RadialStencil::FourthOrder => &[2.5, -4.0 / 3.0, 1.0 / 12.0],
    };
    let n = grid.nr;
    let mut t = Vec::with_capacity(n * (2 * coeffs.len() - 1));
    for i in 0..n {
        t.push((i, i, a * coeffs[0]));
        for (d, c) in coeffs.iter().enumerate().skip(1) {
            if i >= d {
                t.push((i, i - d, a * c));
            }
            if i + d < n {
                t.push((i, i + d, a * c));
            }
        }
    }
    CsrMatrix::from_triplets(n, t)
}

/// `B·L²` on the `(θ, φ)` grid.
///
/// The polar part is the flux form `-(1/sin θ) ∂θ(sin θ ∂θ)` with face values
/// `sin((j+1)Δθ)`, which vanish at the poles, and a step `h_θ = 2 sin(Δθ/2) sin Δθ`
/// chosen so that the `l = 1` harmonics are exact eigenvectors. The azimuthal
/// part uses `h_φ = 2 - 2 cos Δφ` for the same reason.
pub fn angular_block(grid: &Grid3D, b_rot: f64) -> CsrMatrix {
    let (nt, np) = (grid.ntheta, grid.nphi);
    let dth = grid.dtheta();
    let h_theta = 2.0 * (0.5 * dth).sin() * dth.sin();
    let h_phi = 2.0 - 2.0 * grid.dphi().cos();
    let s: Vec<f64> = grid.theta_nodes().iter().map(|t| t.sin()).collect();
    let face = |j: usize| ((j + 1) as f64 * dth).sin();
    let mut t = Vec::with_capacity(nt * np * 5);
    for j in 0..nt {
        let upper = if j + 1 < nt { face(j) } else { 0.0 };
        let lower = if j > 0 { face(j - 1) } else { 0.0 };
        let diag_theta = (upper + lower) / (h_theta * s[j]);
        let off_theta = if j + 1 < nt { -upper / (h_theta * (s[j] * s[j + 1]).sqrt()) } else { 0.0 };
        let c_phi = 1.0 / (s[j] * s[j] * h_phi);
        for k in 0..np {
            let row = j * np + k;
            t.push((row, row, b_rot * (diag_theta + 2.0 * c_phi)));
            t.push((row, j * np + (k + 1) % np, -b_rot * c_phi));
            t.push((row, j * np + (k + np - 1) % np, -b_rot * c_phi));
            if j + 1 < nt {
                let other = (j + 1) * np + k;
                t.push((row, other, b_rot * off_theta));
                t.push((other, row, b_rot * off_theta));
            }
        }
    }
    CsrMatrix::from_triplets(nt * np, t)
}

/// Assembles `T_r + B·L² + V` with the default fourth-order radial stencil.
pub fn assemble_hamiltonian(
    grid: &Grid3D,
    params: &ModelParams,
    radial: &dyn RadialPotential,
    angular: &dyn AngularField,
    include_coupling: bool,
) -> Result<SparseHamiltonian, HamiltonianError> {
    let options = AssemblyOptions { include_coupling, ..AssemblyOptions::default() };
    assemble_hamiltonian_with(grid, params, radial, angular, &options)
}

pub fn assemble_hamiltonian_with(
    grid: &Grid3D,
    params: &ModelParams,
    radial: &dyn RadialPotential,
    angular: &dyn AngularField,
    options: &AssemblyOptions,
) -> Result<SparseHamiltonian, HamiltonianError> {
    params.validate()?;
    let (nr, nt, np) = (grid.nr, grid.ntheta, grid.nphi);
    let v_rad: Vec<f64> = grid.r_nodes().iter().map(|&r| radial.value(r)).collect();
    let mut v_ang = Vec::with_capacity(nt * np);
    for &theta in grid.theta_nodes() {
        for &phi in grid.phi_nodes() {
            v_ang.push(angular.value(theta, phi));
        }
    }
    let (rad_min, ang_mean) = if options.include_coupling && params.coupling_gamma > 0.0 {
        let rad_min = radial.minimum().unwrap_or_else(|| v_rad.iter().copied().fold(f64::INFINITY, f64::min));
        (rad_min, SphereQuadrature::default().mean(angular))
    } else {
        (0.0, 0.0)
    };
    let gamma = if options.include_coupling { params.coupling_gamma / params.energy_scale } else { 0.0 };

    let mut potential = Vec::with_capacity(grid.dimension());
    for ir in 0..nr {
        for it in 0..nt {
            for ip in 0..np {
                let (vr, va) = (v_rad[ir], v_ang[it * np + ip]);
                let mut v = vr + va;
                if gamma != 0.0 {
                    v += gamma * (vr - rad_min) * (va - ang_mean);
                }
                if !v.is_finite() {
                    return Err(HamiltonianError::NonFinitePotential {
                        ir,
                        itheta: it,
                        iphi: ip,
                        r: grid.r_nodes()[ir],
                        theta: grid.theta_nodes()[it],
                        phi: grid.phi_nodes()[ip],
                        value: v,
                    });
                }
                potential.push(v);
            }
        }
    }

    let t_r = radial_block(grid, params, options.radial_stencil);
    let l2 = angular_block(grid, params.b_rot);
    let na = nt * np;
    let mut t = Vec::with_capacity(grid.dimension() * 9);
    for ir in 0..nr {
        let (rcols, rvals) = t_r.row(ir);
        for a in 0..na {
            let row = ir * na + a;
            for (&jr, &v) in rcols.iter().zip(rvals) {
                t.push((row, jr * na + a, v));
            }
            let (acols, avals) = l2.row(a);
            for (&ja, &v) in acols.iter().zip(avals) {
                t.push((row, ir * na + ja, v));
            }
            t.push((row, row, potential[row]));
        }
    }
    let matrix = CsrMatrix::from_triplets(grid.dimension(), t);
    Ok(SparseHamiltonian { matrix, grid: grid.clone(), params: *params, potential })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build_grid;

    #[test]
    fn l1_harmonics_are_exact() {
        let g = build_grid(8, 16, 16, 1.0).unwrap();
        let l2 = angular_block(&g, 1.0);
        // u = W^{1/2}·cos θ
        let w = g.angular_weights();
        let mut u = Vec::new();
        for (j, th) in g.theta_nodes().iter().enumerate() {
            for _ in 0..g.nphi {
                u.push(w[j * g.nphi].sqrt() * th.cos());
            }
        }
        let lu = l2.mul_vec(&u);
        for (a, b) in lu.iter().zip(&u) {
            assert!((a - 2.0 * b).abs() < 1e-10);
        }
    }

    #[test]
    fn stencil_entries_per_row() {
        let g = build_grid(10, 8, 8, 1.0).unwrap();
        let p = ModelParams::default();
        let h = assemble_hamiltonian(&g, &p, &|_: f64| 0.0, &|_: f64, _: f64| 0.0, false).unwrap();
        assert_eq!(h.matrix().max_row_nnz(), 9);
        assert!(h.symmetry_defect() < 1e-10);
        let second = AssemblyOptions { include_coupling: false, radial_stencil: RadialStencil::SecondOrder };
        let h2 = assemble_hamiltonian_with(&g, &p, &|_: f64| 0.0, &|_: f64, _: f64| 0.0, &second).unwrap();
        assert_eq!(h2.matrix().max_row_nnz(), 7);
    }

    #[test]
    fn non_finite_node_named() {
        let g = build_grid(8, 8, 8, 1.0).unwrap();
        let err = assemble_hamiltonian(&g, &ModelParams::default(), &|r: f64| 1.0 / r.max(0.0).min(0.0), &|_: f64, _: f64| 0.0, true)
            .unwrap_err();
        assert!(matches!(err, HamiltonianError::NonFinitePotential { ir: 0, itheta: 0, iphi: 0, .. }), "{err}");
    }

    #[test]
    fn product_term() {
        let g = build_grid(8, 8, 8, 1.0).unwrap();
        let p = ModelParams { coupling_gamma: 0.5, energy_scale: 10.0, ..ModelParams::default() };
        let vr = |r: f64| 100.0 * r * r + 3.0;
        let va = |t: f64, _: f64| t.cos();
        let h = assemble_hamiltonian(&g, &p, &vr, &va, true).unwrap();
        let rmin = g.r_nodes().iter().map(|&r| vr(r)).fold(f64::INFINITY, f64::min);
        let idx = g.index(2, 1, 3);
        let (r, t) = (g.r_nodes()[2], g.theta_nodes()[1]);
        let expected = vr(r) + va(t, 0.0) + 0.05 * (vr(r) - rmin) * (va(t, 0.0) - 0.0);
        assert!((h.potential()[idx] - expected).abs() < 1e-12);
    }
}
