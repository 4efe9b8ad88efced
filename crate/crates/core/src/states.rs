//! Reduced densities and quantum-number assignment of computed eigenstates.
//!
//! Labels follow the `|j n l λ m⟩` nomenclature: `j` from the dominant
//! rotational overlap, `n` from radial nodes, `l = n mod 2` as a bookkeeping
//! label of the one-dimensional translation, `λ = j`, and `m` from the
//! azimuthal content of the dominant `j` shell. Within a `(n, l, j)` group
//! the lower member of a `±|m|` pair is labelled `|m|` and the upper `|m|̄`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigensolver::EigenPairs;
use crate::hamiltonian::Grid3D;
use crate::numfmt;
use crate::sphere::{legendre_table, lm_count, lm_index};

pub const PURITY_FLOOR: f64 = 0.5;
pub const DEFAULT_J_CAP: u32 = 6;
/// Radial density below this fraction of its maximum is ignored for nodes.
pub const NODE_FLOOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum StatesError {
    #[error("state {index} has zero norm")]
    ZeroNorm { index: usize },
    #[error("vector length {len} does not match grid dimension {dim}")]
    DimensionMismatch { len: usize, dim: usize },
    #[error("state {index} at {energy:.4} cm⁻¹ is ambiguous: purity {purity:.3} below {PURITY_FLOOR} (j weights {})", format_weights(.j_weights))]
    Ambiguous { index: usize, energy: f64, purity: f64, j_weights: Vec<f64> },
    #[error("conflicting labels: {0}")]
    ClusterLabeling(String),
}

fn format_weights(w: &[f64]) -> String {
    w.iter().enumerate().map(|(j, x)| format!("j{j}={x:.3}")).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Ortho,
    Para,
}

impl Spin {
    /// Para for even `j`, ortho for odd.
    pub fn from_j(j: u32) -> Self {
        if j % 2 == 0 {
            Spin::Para
        } else {
            Spin::Ortho
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Ortho => "ortho",
            Spin::Para => "para",
        })
    }
}

/// Projection label: `|m|` plus a bar for the upper partner of a split pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct MLabel {
    pub abs: u32,
    pub bar: bool,
}

impl MLabel {
    pub const fn new(abs: u32, bar: bool) -> Self {
        Self { abs, bar }
    }
}

impl fmt::Display for MLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bar {
            write!(f, "{}bar", self.abs)
        } else {
            write!(f, "{}", self.abs)
        }
    }
}

impl FromStr for MLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (digits, bar) = match s.strip_suffix("bar") {
            Some(d) => (d, true),
            None => (s, false),
        };
        let abs = digits.parse().map_err(|_| format!("invalid m label `{s}`"))?;
        if abs == 0 && bar {
            return Err("m = 0 has no barred partner".into());
        }
        Ok(Self { abs, bar })
    }
}

impl From<MLabel> for String {
    fn from(m: MLabel) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for MLabel {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Normalized reduced densities of one state.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensity {
    /// `ρ(θ, φ)` in flat `(θ, φ)` order with `Σ ρ ΔΩ = 1`.
    pub angular: Vec<f64>,
    /// `ρ(r)` on the radial nodes with `Σ ρ Δr = 1`.
    pub radial: Vec<f64>,
}

/// Integrates `|ψ|²` over the complementary coordinates.
///
/// `u` is the weight-scaled vector from the eigensolver, so `|ψ|² w = u²`.
pub fn reduce_densities(u: &[f64], grid: &Grid3D) -> Result<ReducedDensity, StatesError> {
    if u.len() != grid.dimension() {
        return Err(StatesError::DimensionMismatch { len: u.len(), dim: grid.dimension() });
    }
    let total: f64 = u.iter().map(|x| x * x).sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(StatesError::ZeroNorm { index: 0 });
    }
    let na = grid.angular_dimension();
    let mut angular = vec![0.0; na];
    let mut radial = vec![0.0; grid.nr];
    for ir in 0..grid.nr {
        for a in 0..na {
            let p = u[ir * na + a].powi(2) / total;
            angular[a] += p;
            radial[ir] += p;
        }
    }
    for (a, rho) in angular.iter_mut().enumerate() {
        *rho /= grid.solid_angle(a / grid.nphi);
    }
    let dr = grid.dr();
    radial.iter_mut().for_each(|rho| *rho /= dr);
    Ok(ReducedDensity { angular, radial })
}

/// Number of interior local minima of `ρ(r)` inside the region where it
/// exceeds [`NODE_FLOOR`] of its maximum.
pub fn count_radial_nodes(radial: &[f64]) -> u32 {
    let max = radial.iter().copied().fold(0.0, f64::max);
    let floor = NODE_FLOOR * max;
    let inside: Vec<usize> = (0..radial.len()).filter(|&i| radial[i] > floor).collect();
    let (Some(&lo), Some(&hi)) = (inside.first(), inside.last()) else {
        return 0;
    };
    let mut nodes = 0;
    for i in (lo + 1)..hi {
        if radial[i] < radial[i - 1] && radial[i] <= radial[i + 1] {
            nodes += 1;
        }
    }
    nodes
}

/// `√ΔΩ · Y_jm` sampled on the angular grid, `lm_index` rows.
struct HarmonicTable {
    j_cap: u32,
    values: Vec<Vec<Complex64>>,
}

impl HarmonicTable {
    fn new(grid: &Grid3D, j_cap: u32) -> Self {
        let mut values = vec![vec![Complex64::new(0.0, 0.0); grid.angular_dimension()]; lm_count(j_cap)];
        for (it, &theta) in grid.theta_nodes().iter().enumerate() {
            let table = legendre_table(j_cap, theta);
            let sw = grid.solid_angle(it).sqrt();
            for (ip, &phi) in grid.phi_nodes().iter().enumerate() {
                for j in 0..=j_cap {
                    for m in -(j as i32)..=j as i32 {
                        values[lm_index(j, m)][it * grid.nphi + ip] = table.ylm(j, m, phi) * sw;
                    }
                }
            }
        }
        Self { j_cap, values }
    }

    /// `Σ_r |⟨Y_jm|ψ(r,·)⟩|²` for every `(j, m)`.
    fn weights(&self, u: &[f64], grid: &Grid3D) -> Vec<f64> {
        let na = grid.angular_dimension();
        let mut w = vec![0.0; self.values.len()];
        for ir in 0..grid.nr {
            let slice = &u[ir * na..(ir + 1) * na];
            for (k, y) in self.values.iter().enumerate() {
                let c: Complex64 = y.iter().zip(slice).map(|(yv, x)| yv.conj() * x).sum();
                w[k] += c.norm_sqr();
            }
        }
        w
    }
}

/// Overlap of a state with `Y_jm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JmWeight {
    pub j: u32,
    pub m: i32,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignedState {
    /// Position in the ascending eigenvalue list.
    pub index: usize,
    pub energy: f64,
    pub n: u32,
    pub l: u32,
    pub lambda: u32,
    pub m: MLabel,
    pub j: u32,
    pub spin: Spin,
    pub purity: f64,
    /// Purity below the floor; labels are best guesses.
    pub ambiguous: bool,
    pub j_weights: Vec<f64>,
    pub overlaps: Vec<JmWeight>,
}

impl AssignedState {
    /// Short `|j m⟩`-style tag such as `10`, `11` or `11bar`.
    pub fn tag(&self) -> String {
        format!("{}{}", self.j, self.m)
    }
}

#[derive(Debug, Clone)]
pub struct Assignment {
    pub states: Vec<AssignedState>,
    /// Eigenvectors after rotating each degenerate cluster to diagonalize `L_z²`.
    pub vectors: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssignOptions {
    pub j_cap: u32,
    /// Eigenvalues closer than this form one cluster.
    pub cluster_tol: f64,
    /// Ambiguities and label conflicts become warnings instead of errors.
    pub lenient: bool,
}

impl Default for AssignOptions {
    fn default() -> Self {
        Self { j_cap: DEFAULT_J_CAP, cluster_tol: crate::eigensolver::CLUSTER_TOL, lenient: false }
    }
}

/// `L_z²` matrix elements between real grid vectors via a ring-wise DFT.
struct AzimuthalSpectrum {
    cos: Vec<f64>,
    sin: Vec<f64>,
    nphi: usize,
}

impl AzimuthalSpectrum {
    fn new(nphi: usize) -> Self {
        let cos = (0..nphi).map(|k| (2.0 * PI * k as f64 / nphi as f64).cos()).collect();
        let sin = (0..nphi).map(|k| (2.0 * PI * k as f64 / nphi as f64).sin()).collect();
        Self { cos, sin, nphi }
    }

    fn m_of(&self, q: usize) -> f64 {
        if q <= self.nphi / 2 {
            q as f64
        } else {
            q as f64 - self.nphi as f64
        }
    }

    /// Ring Fourier coefficients of `x` (one ring of length `nphi`).
    fn coefficients(&self, x: &[f64]) -> Vec<Complex64> {
        let n = self.nphi;
        (0..n)
            .map(|q| {
                let mut c = Complex64::new(0.0, 0.0);
                for (k, xv) in x.iter().enumerate() {
                    let idx = (q * k) % n;
                    c += Complex64::new(self.cos[idx], -self.sin[idx]) * xv;
                }
                c / (n as f64).sqrt()
            })
            .collect()
    }

    fn lz2_matrix(&self, vectors: &[&[f64]]) -> DMatrix<f64> {
        let k = vectors.len();
        let rings = vectors[0].len() / self.nphi;
        let mut m = DMatrix::zeros(k, k);
        for ring in 0..rings {
            let coefs: Vec<Vec<Complex64>> =
                vectors.iter().map(|v| self.coefficients(&v[ring * self.nphi..(ring + 1) * self.nphi])).collect();
            for a in 0..k {
                for b in a..k {
                    let s: f64 = (0..self.nphi).map(|q| self.m_of(q).powi(2) * (coefs[a][q].conj() * coefs[b][q]).re).sum();
                    m[(a, b)] += s;
                    if a != b {
                        m[(b, a)] += s;
                    }
                }
            }
        }
        m
    }
}

/// Rotates each degenerate cluster so that `L_z²` is diagonal inside it.
pub fn resolve_degenerate_clusters(values: &[f64], vectors: &[Vec<f64>], grid: &Grid3D, tol: f64) -> Vec<Vec<f64>> {
    let mut out = vectors.to_vec();
    let spectrum = AzimuthalSpectrum::new(grid.nphi);
    for cluster in crate::eigensolver::clusters(values, tol) {
        if cluster.len() < 2 {
            continue;
        }
        let members: Vec<&[f64]> = cluster.iter().map(|&i| vectors[i].as_slice()).collect();
        let lz2 = spectrum.lz2_matrix(&members);
        let eig = SymmetricEigen::new(lz2);
        let mut order: Vec<usize> = (0..cluster.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        for (slot, &col) in order.iter().enumerate() {
            let mut v = vec![0.0; vectors[0].len()];
            for (row, member) in members.iter().enumerate() {
                let c = eig.eigenvectors[(row, col)];
                for (vi, x) in v.iter_mut().zip(member.iter()) {
                    *vi += c * x;
                }
            }
            // Fix the sign so the largest component is positive.
            let big = v.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
            if big < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            out[cluster[slot]] = v;
        }
    }
    out
}

/// Assigns `(n, l, λ, m)`, `j` and spin to every eigenpair.
pub fn assign_quantum_numbers(pairs: &EigenPairs, grid: &Grid3D, opts: &AssignOptions) -> Result<Assignment, StatesError> {
    for (i, v) in pairs.vectors.iter().enumerate() {
        if v.len() != grid.dimension() {
            return Err(StatesError::DimensionMismatch { len: v.len(), dim: grid.dimension() });
        }
        if v.iter().all(|x| *x == 0.0) {
            return Err(StatesError::ZeroNorm { index: i });
        }
    }
    let vectors = resolve_degenerate_clusters(&pairs.values, &pairs.vectors, grid, opts.cluster_tol);
    let table = HarmonicTable::new(grid, opts.j_cap);
    let mut warnings = Vec::new();
    let mut states = Vec::with_capacity(vectors.len());
    for (index, (u, &energy)) in vectors.iter().zip(&pairs.values).enumerate() {
        let norm2: f64 = u.iter().map(|x| x * x).sum();
        let w: Vec<f64> = table.weights(u, grid).into_iter().map(|x| x / norm2).collect();
        let j_weights: Vec<f64> =
            (0..=table.j_cap).map(|j| (-(j as i32)..=j as i32).map(|m| w[lm_index(j, m)]).sum()).collect();
        let (j, purity) = j_weights
            .iter()
            .enumerate()
            .fold((0u32, f64::NEG_INFINITY), |best, (j, &x)| if x > best.1 { (j as u32, x) } else { best });
        let ambiguous = purity < PURITY_FLOOR;
        if ambiguous {
            if !opts.lenient {
                return Err(StatesError::Ambiguous { index, energy, purity, j_weights });
            }
            let msg = format!("state {index} at {energy:.4} cm⁻¹: purity {purity:.3} below {PURITY_FLOOR}, labels are tentative");
            warn!("{msg}");
            warnings.push(msg);
        }
        let abs_m = (0..=j)
            .map(|am| {
                let am = am as i32;
                let s = if am == 0 { w[lm_index(j, 0)] } else { w[lm_index(j, am)] + w[lm_index(j, -am)] };
                (am as u32, s)
            })
            .fold((0u32, f64::NEG_INFINITY), |best, (am, s)| if s > best.1 + 1e-12 { (am, s) } else { best })
            .0;
        let density = reduce_densities(u, grid).map_err(|_| StatesError::ZeroNorm { index })?;
        let n = count_radial_nodes(&density.radial);
        let overlaps = (0..=table.j_cap)
            .flat_map(|jj| (-(jj as i32)..=jj as i32).map(move |m| (jj, m)))
            .map(|(jj, m)| JmWeight { j: jj, m, weight: w[lm_index(jj, m)] })
            .collect();
        states.push(AssignedState {
            index,
            energy,
            n,
            l: n % 2,
            lambda: j,
            m: MLabel::new(abs_m, false),
            j,
            spin: Spin::from_j(j),
            purity,
            ambiguous,
            j_weights,
            overlaps,
        });
    }
    label_pairs(&mut states, opts, &mut warnings)?;
    Ok(Assignment { states, vectors, warnings })
}

/// Marks the upper member of each `(n, l, j, |m|)` pair with a bar.
fn label_pairs(states: &mut [AssignedState], opts: &AssignOptions, warnings: &mut Vec<String>) -> Result<(), StatesError> {
    let mut groups: Vec<((u32, u32, u32, u32), Vec<usize>)> = Vec::new();
    for (i, s) in states.iter().enumerate() {
        let key = (s.n, s.l, s.j, s.m.abs);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, members)) => members.push(i),
            None => groups.push((key, vec![i])),
        }
    }
    for ((n, l, j, am), members) in groups {
        let limit = if am == 0 { 1 } else { 2 };
        if members.len() > limit {
            let energies: Vec<String> = members.iter().map(|&i| format!("{:.4}", states[i].energy)).collect();
            let msg = format!(
                "{} states share n={n}, l={l}, j={j}, |m|={am} (energies {})",
                members.len(),
                energies.join(", ")
            );
            if !opts.lenient {
                return Err(StatesError::ClusterLabeling(msg));
            }
            warn!("{msg}");
            warnings.push(msg);
        }
        if am > 0 {
            let mut sorted = members.clone();
            sorted.sort_by(|&a, &b| states[a].energy.total_cmp(&states[b].energy).then(a.cmp(&b)));
            for (rank, &i) in sorted.iter().enumerate() {
                states[i].m.bar = rank % 2 == 1;
            }
        }
    }
    Ok(())
}

pub const ASSIGNMENT_HEADER: [&str; 8] = ["energy_cm1", "n", "l", "lambda", "m", "j", "spin", "purity"];

pub fn write_assignment_csv<W: Write>(states: &[AssignedState], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ASSIGNMENT_HEADER)?;
    for s in states {
        w.write_record([
            numfmt::fmt(s.energy),
            s.n.to_string(),
            s.l.to_string(),
            s.lambda.to_string(),
            s.m.to_string(),
            s.j.to_string(),
            s.spin.to_string(),
            numfmt::fmt(s.purity),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `r_angstrom,density` rows.
pub fn write_radial_density_csv<W: Write>(density: &ReducedDensity, grid: &Grid3D, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["r_angstrom", "density"])?;
    for (r, rho) in grid.r_nodes().iter().zip(&density.radial) {
        w.write_record([numfmt::fmt(*r), numfmt::fmt(*rho)])?;
    }
    w.flush()?;
    Ok(())
}

/// `theta_rad,phi_rad,density` rows, θ outer.
pub fn write_angular_density_csv<W: Write>(density: &ReducedDensity, grid: &Grid3D, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["theta_rad", "phi_rad", "density"])?;
    for (it, theta) in grid.theta_nodes().iter().enumerate() {
        for (ip, phi) in grid.phi_nodes().iter().enumerate() {
            w.write_record([numfmt::fmt(*theta), numfmt::fmt(*phi), numfmt::fmt(density.angular[it * grid.nphi + ip])])?;
        }
    }
    w.flush()?;
    Ok(())
}
