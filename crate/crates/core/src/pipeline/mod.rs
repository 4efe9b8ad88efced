//! Configuration, stage-by-stage execution and report emission.
//!
//! Every stage reads and writes documented files so that a run can resume
//! from any intermediate; see [`files`] for the formats.

pub mod commands;
mod config;
pub mod files;
mod report;
mod stages;

pub use config::{
    DecompositionConfig, GridConfig, OutputConfig, OutputFormat, PipelineConfig, PotentialConfig, SolverConfig, SpectroscopyConfig,
    OUT_ENV,
};
pub use report::{
    emit_report, report_schema, Diagnostics, FitRms, Provenance, Report, RunStatus, Section, SolverReport, StageFailure,
    SCHEMA_VERSION,
};
pub use stages::{
    assign_stage, decompose_stage, fit_potential_stage, fit_series, solve_stage, transitions_stage, ChannelFlags, DecompositionOutput,
    DecompositionStage, PotentialStage, SeriesFit, SolveStage, TransitionsStage,
};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("{stage} failed: {message}")]
    Numerical { stage: &'static str, message: String },
    #[error("partial convergence: {converged} of {requested} eigenpairs")]
    Partial { converged: usize, requested: usize },
    #[error("output error: {0}")]
    Output(String),
}

impl PipelineError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 2,
            PipelineError::Input(_) => 3,
            PipelineError::Numerical { .. } => 4,
            PipelineError::Partial { .. } => 5,
            PipelineError::Output(_) => 1,
        }
    }
}

pub(crate) fn output_err(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Output(format!("{}: {e}", path.display()))
}

pub const LOCK_FILE: &str = ".rotorcage.lock";

/// Advisory lock on an output directory, released on drop.
#[derive(Debug)]
pub struct OutputLock {
    path: PathBuf,
}

impl OutputLock {
    /// Creates the directory if needed and claims it; fails if another run holds it.
    pub fn acquire(dir: &Path) -> Result<Self, PipelineError> {
        fs::create_dir_all(dir).map_err(|e| output_err(dir, e))?;
        let path = dir.join(LOCK_FILE);
        let mut f = fs::OpenOptions::new().write(true).create_new(true).open(&path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::AlreadyExists {
                PipelineError::Output(format!("{} is locked by another run (remove {} if stale)", dir.display(), path.display()))
            } else {
                output_err(&path, e)
            }
        })?;
        writeln!(f, "{}", std::process::id()).map_err(|e| output_err(&path, e))?;
        Ok(Self { path })
    }
}

impl Drop for OutputLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}

/// Runs every stage without touching the output directory.
///
/// The report always comes back; on failure its remaining sections are
/// marked skipped and the error is returned alongside.
pub fn execute(cfg: &PipelineConfig) -> (Report, Option<PipelineError>) {
    let mut report = Report::new(cfg);
    let err = run_stages(cfg, &mut report).err();
    if let Some(e) = &err {
        report.fail(e);
    }
    (report, err)
}

fn run_stages(cfg: &PipelineConfig, report: &mut Report) -> Result<(), PipelineError> {
    cfg.validate()?;
    cfg.check_inputs()?;
    report.provenance.record_inputs(cfg)?;

    let potential = fit_potential_stage(cfg)?;
    report.diagnostics.fit_rms = FitRms { radial: Some(potential.radial.rms), angular: Some(potential.angular.rms) };
    report.potential = Section::ok(potential.clone());

    let decomposition = decompose_stage(cfg, &potential.angular)?;
    report.channels = Section::ok(decomposition.channels.clone());
    report.decomposition = Section::ok(decomposition.output());

    let solved = solve_stage(cfg, &potential);
    let solved = match solved {
        Ok(s) => s,
        Err((partial, e)) => {
            if let Some(p) = partial {
                report.diagnostics.solver = Some(SolverReport::new(&p));
            }
            return Err(e);
        }
    };
    report.diagnostics.solver = Some(SolverReport::new(&solved));

    let assignment = assign_stage(&solved.pairs, &solved.grid)?;
    report.diagnostics.warnings.extend(assignment.warnings.iter().cloned());
    report.states = Section::ok(assignment.states.clone());

    let transitions = transitions_stage(cfg, &assignment.states, &decomposition.channels)?;
    report.diagnostics.warnings.extend(transitions.warnings.iter().cloned());
    report.spectrum = Section::ok(transitions.spectrum);
    report.pathways = Section::ok(transitions.pathways);
    report.status = RunStatus::Complete;
    Ok(())
}

/// Validates, locks the output directory, runs every stage and emits the
/// report in each configured format. A failed run still writes its partial
/// report before the error is returned.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<Report, PipelineError> {
    cfg.validate()?;
    let dir = &cfg.output.directory;
    let _lock = OutputLock::acquire(dir)?;
    let (report, err) = execute(cfg);
    for &format in &cfg.output.formats {
        emit_report(&report, format, dir)?;
    }
    match err {
        Some(e) => Err(e),
        None => Ok(report),
    }
}
