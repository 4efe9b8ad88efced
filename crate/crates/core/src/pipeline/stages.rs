use serde::{Deserialize, Serialize};

use super::{PipelineConfig, PipelineError};
use crate::eigensolver::{solve_lowest, EigenError, EigenPairs};
use crate::hamiltonian::{assemble_hamiltonian_with, build_grid, AssemblyOptions, Grid3D};
use crate::potential::{
    classify_channels, decompose_spherical_tensors, fit_angular_fourier, fit_radial_harmonic, load_angular_samples, load_radial_samples,
    ConversionChannels, FourierFit, HarmonicFit, PotentialError, TensorDecomposition,
};
use crate::specfit::{fit_conversion_kinetics, fit_gaussian_peaks, FitResult, GaussianPeak, KineticsFit, SpecfitError, Spectrum};
use crate::spectroscopy::{conversion_pathways, enumerate_q1_transitions, ConversionPathway, Q1Spectrum, SpectroscopyError};
use crate::states::{assign_quantum_numbers, AssignOptions, AssignedState, Assignment};

fn potential_err(stage: &'static str, e: PotentialError) -> PipelineError {
    match e {
        PotentialError::Io { .. } | PotentialError::Parse { .. } | PotentialError::Schema { .. } | PotentialError::Validation(_) => {
            PipelineError::Input(format!("{stage}: {e}"))
        }
        _ => PipelineError::Numerical { stage, message: e.to_string() },
    }
}

fn spectroscopy_err(e: SpectroscopyError) -> PipelineError {
    PipelineError::Numerical { stage: "transitions", message: e.to_string() }
}

/// Fitted radial and angular surfaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialStage {
    pub radial: HarmonicFit,
    pub angular: FourierFit,
}

pub fn fit_potential_stage(cfg: &PipelineConfig) -> Result<PotentialStage, PipelineError> {
    let stage = "fit-potential";
    let radial_samples = load_radial_samples(&cfg.potential.radial).map_err(|e| potential_err(stage, e))?;
    let radial = fit_radial_harmonic(&radial_samples).map_err(|e| potential_err(stage, e))?;
    let angular_samples = load_angular_samples(&cfg.potential.angular).map_err(|e| potential_err(stage, e))?;
    let angular = fit_angular_fourier(&angular_samples, cfg.fourier_order()).map_err(|e| potential_err(stage, e))?;
    log::info!("radial fit k = {:.4} cm⁻¹/Å², rms {:.3e}; angular fit order {}, rms {:.3e}", radial.k, radial.rms, angular.order, angular.rms);
    Ok(PotentialStage { radial, angular })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelFlags {
    pub delta_m0: bool,
    pub delta_m1: bool,
}

/// Decomposition file contents: coefficients, rank powers and channel flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionOutput {
    #[serde(flatten)]
    pub decomposition: TensorDecomposition,
    pub channels: ChannelFlags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionStage {
    pub decomposition: TensorDecomposition,
    pub channels: ConversionChannels,
}

impl DecompositionStage {
    pub fn output(&self) -> DecompositionOutput {
        DecompositionOutput {
            decomposition: self.decomposition.clone(),
            channels: ChannelFlags { delta_m0: self.channels.delta_m0_open, delta_m1: self.channels.delta_m1_open },
        }
    }
}

pub fn decompose_stage(cfg: &PipelineConfig, angular: &FourierFit) -> Result<DecompositionStage, PipelineError> {
    let stage = "decompose";
    let decomposition = decompose_spherical_tensors(angular, cfg.decomposition.k_max).map_err(|e| potential_err(stage, e))?;
    let channels = classify_channels(&decomposition, cfg.decomposition.epsilon).map_err(|e| potential_err(stage, e))?;
    log::info!("rank powers {:?}; Δm=0 open: {}, |Δm|=1 open: {}", channels.rank_powers, channels.delta_m0_open, channels.delta_m1_open);
    Ok(DecompositionStage { decomposition, channels })
}

#[derive(Debug, Clone)]
pub struct SolveStage {
    pub grid: Grid3D,
    pub pairs: EigenPairs,
    pub sigma: f64,
    pub nnz: usize,
}

/// Builds the grid and Hamiltonian and solves for the lowest states.
///
/// On partial convergence the converged pairs come back with the error.
pub fn solve_stage(cfg: &PipelineConfig, potential: &PotentialStage) -> Result<SolveStage, (Option<SolveStage>, PipelineError)> {
    let g = &cfg.grid;
    let grid = build_grid(g.nr, g.ntheta, g.nphi, g.r_max).map_err(|e| (None, PipelineError::Config(e.to_string())))?;
    let options = AssemblyOptions { include_coupling: g.include_coupling, radial_stencil: g.radial_stencil };
    let h = assemble_hamiltonian_with(&grid, &cfg.model, &potential.radial, &potential.angular, &options)
        .map_err(|e| (None, PipelineError::Numerical { stage: "assemble", message: e.to_string() }))?;
    let sigma = cfg.solver.sigma.unwrap_or(h.min_potential() - 1.0);
    log::info!("dimension {}, {} non-zeros, σ = {sigma:.4}", h.dimension(), h.matrix().nnz());
    let nnz = h.matrix().nnz();
    match solve_lowest(h.matrix(), &cfg.solver_options(sigma)) {
        Ok(pairs) => Ok(SolveStage { grid, pairs, sigma, nnz }),
        Err(EigenError::Partial { converged, requested }) => {
            let n = converged.len();
            Err((Some(SolveStage { grid, pairs: *converged, sigma, nnz }), PipelineError::Partial { converged: n, requested }))
        }
        Err(e) => Err((None, PipelineError::Numerical { stage: "solve", message: e.to_string() })),
    }
}

/// Labels every pair; ambiguities become warnings.
pub fn assign_stage(pairs: &EigenPairs, grid: &Grid3D) -> Result<Assignment, PipelineError> {
    let opts = AssignOptions { lenient: true, ..AssignOptions::default() };
    assign_quantum_numbers(pairs, grid, &opts).map_err(|e| PipelineError::Numerical { stage: "assign", message: e.to_string() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionsStage {
    pub spectrum: Q1Spectrum,
    pub pathways: Vec<ConversionPathway>,
    /// Eigenvalue indices of the initial manifold.
    pub manifold: Vec<usize>,
    pub warnings: Vec<String>,
}

/// Q₁ lines and conversion pathways within the `n = 0`, `j ≤ initial_j_max`
/// manifold. Ambiguous states are left out with a warning.
pub fn transitions_stage(
    cfg: &PipelineConfig,
    states: &[AssignedState],
    channels: &ConversionChannels,
) -> Result<TransitionsStage, PipelineError> {
    let j_max = cfg.spectroscopy.initial_j_max;
    let mut warnings = Vec::new();
    let mut manifold = Vec::new();
    for s in states.iter().filter(|s| s.n == 0 && s.j <= j_max) {
        if s.ambiguous {
            warnings.push(format!("state {} ({:.4} cm⁻¹) left out of the line list: purity {:.3}", s.index, s.energy, s.purity));
        } else {
            manifold.push(s.clone());
        }
    }
    let spectrum = enumerate_q1_transitions(&manifold, None, cfg.nu_origin(), cfg.spectroscopy.resolution).map_err(spectroscopy_err)?;
    let pathways = conversion_pathways(&manifold, channels).map_err(spectroscopy_err)?;
    Ok(TransitionsStage { spectrum, pathways, manifold: manifold.iter().map(|s| s.index).collect(), warnings })
}

/// Per-spectrum Gaussian fits and per-peak kinetics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesFit {
    pub times: Vec<f64>,
    pub fits: Vec<FitResult>,
    /// One kinetics fit per peak, in the order of the initial guesses.
    pub kinetics: Vec<KineticsFit>,
}

/// Fits each time-tagged spectrum independently from the same guesses, then
/// fits first-order kinetics to the area of every peak.
pub fn fit_series(series: &[Spectrum], init: &[GaussianPeak], window: (f64, f64)) -> Result<SeriesFit, SpecfitError> {
    let mut times = Vec::with_capacity(series.len());
    let mut fits = Vec::with_capacity(series.len());
    for (i, s) in series.iter().enumerate() {
        let t = s.time_tag.ok_or_else(|| SpecfitError::InvalidArgument(format!("spectrum {i} has no time tag")))?;
        times.push(t);
        fits.push(fit_gaussian_peaks(s, init, window)?);
    }
    let kinetics = (0..init.len())
        .map(|p| {
            let pts: Vec<(f64, f64)> = times.iter().zip(&fits).map(|(t, f)| (*t, f.peaks[p].area)).collect();
            fit_conversion_kinetics(&pts)
        })
        .collect::<Result<_, _>>()?;
    Ok(SeriesFit { times, fits, kinetics })
}
