//! File-to-file stage commands behind the command-line subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::files::*;
use super::stages::{fit_series, DecompositionOutput};
use super::{
    assign_stage, decompose_stage, fit_potential_stage, output_err, solve_stage, transitions_stage, PipelineConfig, PipelineError,
    PotentialStage, SolveStage, SolverReport,
};
use crate::eigensolver::{EigenPairs, SolverDiagnostics};
use crate::hamiltonian::build_grid;
use crate::numfmt::fmt;
use crate::potential::{classify_channels, load_radial_samples};
use crate::specfit::{
    fit_gaussian_peaks, load_spectrum, load_time_series, pick_peaks, write_fit_overlay_csv, FitResult, GaussianPeak, KineticsFit,
    SpecfitError,
};
use crate::spectroscopy::{write_pathway_csv, write_peak_csv};
use crate::states::{reduce_densities, write_angular_density_csv, write_assignment_csv, write_radial_density_csv, AssignedState};

fn specfit_err(e: SpecfitError) -> PipelineError {
    match e {
        SpecfitError::Io { .. } | SpecfitError::Parse { .. } | SpecfitError::Schema(_) => PipelineError::Input(e.to_string()),
        SpecfitError::InvalidArgument(m) => PipelineError::Config(m),
        SpecfitError::BoundViolation { .. } => PipelineError::Numerical { stage: "fit-spectrum", message: e.to_string() },
    }
}

fn ensure_dir(dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|e| output_err(dir, e))
}

/// `potential_fit.json` plus `radial_fit.csv` (samples against the fit).
pub fn fit_potential(cfg: &PipelineConfig, out: &Path) -> Result<PotentialStage, PipelineError> {
    cfg.check_inputs()?;
    let stage = fit_potential_stage(cfg)?;
    ensure_dir(out)?;
    write_json(&out.join(POTENTIAL_FIT_JSON), &stage)?;
    let samples = load_radial_samples(&cfg.potential.radial).map_err(|e| PipelineError::Input(e.to_string()))?;
    let rows = samples.points().iter().map(|(r, v)| vec![fmt(*r), fmt(*v), fmt(stage.radial.eval(*r))]);
    write_table(&out.join("radial_fit.csv"), &["r_angstrom", "v_sample", "v_fit"], rows)?;
    Ok(stage)
}

/// `decomposition.json` from `potential_fit.json`.
pub fn decompose(cfg: &PipelineConfig, out: &Path) -> Result<DecompositionOutput, PipelineError> {
    let potential: PotentialStage = read_json(&out.join(POTENTIAL_FIT_JSON))?;
    let output = decompose_stage(cfg, &potential.angular)?.output();
    write_json(&out.join(DECOMPOSITION_JSON), &output)?;
    Ok(output)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridShape {
    pub nr: usize,
    pub ntheta: usize,
    pub nphi: usize,
    pub r_max: f64,
}

/// Contents of `solve.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveFile {
    pub grid: GridShape,
    pub solver: SolverReport,
    pub diagnostics: SolverDiagnostics,
}

fn write_solve(out: &Path, s: &SolveStage) -> Result<(), PipelineError> {
    let g = &s.grid;
    let file = SolveFile {
        grid: GridShape { nr: g.nr, ntheta: g.ntheta, nphi: g.nphi, r_max: g.r_max },
        solver: SolverReport::new(s),
        diagnostics: s.pairs.diagnostics.clone(),
    };
    write_json(&out.join(SOLVE_JSON), &file)?;
    let rows = s.pairs.values.iter().zip(&s.pairs.residuals).enumerate().map(|(i, (e, r))| vec![i.to_string(), fmt(*e), fmt(*r)]);
    write_table(&out.join(EIGENVALUES_CSV), &["index", "energy_cm1", "residual"], rows)?;
    write_eigenvectors(&out.join(EIGENVECTORS_BIN), g.dimension(), &s.pairs.vectors)
}

/// `solve.json`, `eigenvalues.csv` and `eigenvectors.bin` from `potential_fit.json`.
/// Partial results are written before the error is returned.
pub fn solve(cfg: &PipelineConfig, out: &Path) -> Result<SolveStage, PipelineError> {
    cfg.validate()?;
    let potential: PotentialStage = read_json(&out.join(POTENTIAL_FIT_JSON))?;
    match solve_stage(cfg, &potential) {
        Ok(s) => {
            write_solve(out, &s)?;
            Ok(s)
        }
        Err((partial, e)) => {
            if let Some(p) = partial {
                write_solve(out, &p)?;
            }
            Err(e)
        }
    }
}

/// Contents of `states.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatesFile {
    pub states: Vec<AssignedState>,
    pub warnings: Vec<String>,
}

/// `states.json`, `states.csv` and reduced densities from the solve outputs.
pub fn assign(out: &Path) -> Result<StatesFile, PipelineError> {
    let solved: SolveFile = read_json(&out.join(SOLVE_JSON))?;
    let g = &solved.grid;
    let grid = build_grid(g.nr, g.ntheta, g.nphi, g.r_max).map_err(|e| PipelineError::Input(format!("{SOLVE_JSON}: {e}")))?;
    let (dim, vectors) = read_eigenvectors(&out.join(EIGENVECTORS_BIN))?;
    if dim != grid.dimension() || vectors.len() != solved.solver.eigenvalues.len() {
        return Err(PipelineError::Input(format!(
            "{EIGENVECTORS_BIN} holds {} vectors of dimension {dim}; {SOLVE_JSON} expects {} of dimension {}",
            vectors.len(),
            solved.solver.eigenvalues.len(),
            grid.dimension()
        )));
    }
    let pairs = EigenPairs {
        values: solved.solver.eigenvalues.clone(),
        vectors,
        residuals: solved.solver.residuals.clone(),
        diagnostics: solved.diagnostics.clone(),
    };
    let assignment = assign_stage(&pairs, &grid)?;
    write_with(&out.join(STATES_CSV), |f| write_assignment_csv(&assignment.states, f))?;
    let density_dir = out.join(DENSITY_DIR);
    ensure_dir(&density_dir)?;
    for (s, u) in assignment.states.iter().zip(&assignment.vectors) {
        let rho = reduce_densities(u, &grid).map_err(|e| PipelineError::Numerical { stage: "assign", message: e.to_string() })?;
        write_with(&density_dir.join(format!("radial_{:02}.csv", s.index)), |f| write_radial_density_csv(&rho, &grid, f))?;
        write_with(&density_dir.join(format!("angular_{:02}.csv", s.index)), |f| write_angular_density_csv(&rho, &grid, f))?;
    }
    let file = StatesFile { states: assignment.states, warnings: assignment.warnings };
    write_json(&out.join(STATES_JSON), &file)?;
    Ok(file)
}

/// `transitions.json`, `peaks.csv`, `lines.csv` and `pathways.csv` from
/// `states.json` and `decomposition.json`.
pub fn transitions(cfg: &PipelineConfig, out: &Path) -> Result<super::TransitionsStage, PipelineError> {
    let states: StatesFile = read_json(&out.join(STATES_JSON))?;
    let decomposition: DecompositionOutput = read_json(&out.join(DECOMPOSITION_JSON))?;
    let channels = classify_channels(&decomposition.decomposition, cfg.decomposition.epsilon)
        .map_err(|e| PipelineError::Input(format!("{DECOMPOSITION_JSON}: {e}")))?;
    let t = transitions_stage(cfg, &states.states, &channels)?;
    write_json(&out.join(TRANSITIONS_JSON), &t)?;
    write_with(&out.join(PEAKS_CSV), |f| write_peak_csv(&t.spectrum.peaks, f))?;
    write_table(&out.join(LINES_CSV), &LINE_HEADER, line_rows(&t.spectrum.lines))?;
    write_with(&out.join(PATHWAYS_CSV), |f| write_pathway_csv(&t.pathways, f))?;
    Ok(t)
}

/// Initial peaks: the given guesses, else the `n_peaks` tallest picked peaks.
fn initial_peaks(spectrum: &crate::specfit::Spectrum, guesses: &[GaussianPeak], n_peaks: usize, window: (f64, f64)) -> Result<Vec<GaussianPeak>, PipelineError> {
    if !guesses.is_empty() {
        return Ok(guesses.to_vec());
    }
    let mut picked = pick_peaks(spectrum, window);
    if picked.len() < n_peaks || n_peaks == 0 {
        return Err(PipelineError::Config(format!(
            "peak picking found {} peaks above the noise, {n_peaks} requested; pass explicit guesses",
            picked.len()
        )));
    }
    picked.truncate(n_peaks);
    picked.sort_by(|a, b| a.center.total_cmp(&b.center));
    Ok(picked)
}

/// `fit.json` and `fit_overlay.csv` for one spectrum.
pub fn fit_spectrum(spectrum: &Path, guesses: &[GaussianPeak], n_peaks: usize, window: Option<(f64, f64)>, out: &Path) -> Result<FitResult, PipelineError> {
    let s = load_spectrum(spectrum).map_err(specfit_err)?;
    let window = window.unwrap_or_else(|| s.range());
    let init = initial_peaks(&s, guesses, n_peaks, window)?;
    let fit = fit_gaussian_peaks(&s, &init, window).map_err(specfit_err)?;
    ensure_dir(out)?;
    write_json(&out.join(FIT_JSON), &fit)?;
    write_fit_overlay_csv(out.join(FIT_OVERLAY_CSV), &s, &fit).map_err(specfit_err)?;
    Ok(fit)
}

/// Contents of `kinetics.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KineticsFile {
    pub times: Vec<f64>,
    pub initial_peaks: Vec<GaussianPeak>,
    pub kinetics: Vec<KineticsFit>,
    pub fits: Vec<FitResult>,
}

/// `kinetics.json` and `areas.csv` (observed and modelled area per peak).
pub fn kinetics(series: &Path, guesses: &[GaussianPeak], n_peaks: usize, window: Option<(f64, f64)>, out: &Path) -> Result<KineticsFile, PipelineError> {
    let spectra = load_time_series(series).map_err(specfit_err)?;
    let first = spectra.first().ok_or_else(|| PipelineError::Input(format!("{}: empty series", series.display())))?;
    let window = window.unwrap_or_else(|| first.range());
    let init = initial_peaks(first, guesses, n_peaks, window)?;
    let fitted = fit_series(&spectra, &init, window).map_err(specfit_err)?;
    ensure_dir(out)?;
    let mut header: Vec<String> = vec!["t_min".into()];
    for p in 1..=init.len() {
        header.push(format!("area_{p}"));
        header.push(format!("model_{p}"));
    }
    let rows = fitted.times.iter().zip(&fitted.fits).map(|(t, f)| {
        let mut row = vec![fmt(*t)];
        for (p, k) in f.peaks.iter().zip(&fitted.kinetics) {
            row.push(fmt(p.area));
            row.push(fmt(k.eval(*t)));
        }
        row
    });
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_table(&out.join(AREAS_CSV), &header, rows)?;
    let file = KineticsFile { times: fitted.times, initial_peaks: init, kinetics: fitted.kinetics, fits: fitted.fits };
    write_json(&out.join(KINETICS_JSON), &file)?;
    Ok(file)
}

/// Resolves the output directory: explicit flag, then config (which already
/// honours the environment override), then `out`.
pub fn output_dir(flag: Option<PathBuf>, cfg: Option<&PipelineConfig>) -> PathBuf {
    flag.or_else(|| cfg.map(|c| c.output.directory.clone())).unwrap_or_else(|| {
        std::env::var_os(super::OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"))
    })
}
