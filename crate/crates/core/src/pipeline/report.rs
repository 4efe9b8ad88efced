use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::stages::{DecompositionOutput, PotentialStage, SolveStage};
use super::{files, output_err, OutputFormat, PipelineConfig, PipelineError};
use crate::eigensolver::IterationRecord;
use crate::numfmt::{round_sig, SIG_DIGITS};
use crate::potential::ConversionChannels;
use crate::spectroscopy::{ConversionPathway, Q1Spectrum};
use crate::states::AssignedState;

pub const SCHEMA_VERSION: u32 = 1;

const SCHEMA: &str = include_str!("../../schema/report.schema.json");

/// JSON Schema of the report file.
pub fn report_schema() -> &'static str {
    SCHEMA
}

/// A report section that either ran or says why it did not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Section<T> {
    Ok { data: T },
    Skipped { reason: String },
}

impl<T> Section<T> {
    pub fn ok(data: T) -> Self {
        Section::Ok { data }
    }

    pub fn data(&self) -> Option<&T> {
        match self {
            Section::Ok { data } => Some(data),
            Section::Skipped { .. } => None,
        }
    }

    fn pending() -> Self {
        Section::Skipped { reason: "not run".into() }
    }

    fn skip_pending(&mut self, reason: &str) {
        if let Section::Skipped { reason: r } = self {
            *r = reason.to_string();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Complete,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub exit_code: i32,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub tool_version: String,
    /// SHA-256 of the configuration with the output directory blanked.
    pub config_sha256: String,
    /// SHA-256 of each input file, keyed by role.
    pub inputs_sha256: BTreeMap<String, String>,
}

impl Provenance {
    fn new(cfg: &PipelineConfig) -> Self {
        let mut c = cfg.clone();
        c.output.directory = Default::default();
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config_sha256: c.digest(),
            inputs_sha256: BTreeMap::new(),
        }
    }

    pub(crate) fn record_inputs(&mut self, cfg: &PipelineConfig) -> Result<(), PipelineError> {
        for (role, path) in [("radial", &cfg.potential.radial), ("angular", &cfg.potential.angular)] {
            let bytes = fs::read(path).map_err(|e| PipelineError::Input(format!("cannot read {}: {e}", path.display())))?;
            let hex = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
            self.inputs_sha256.insert(role.into(), hex);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub dimension: usize,
    pub nnz: usize,
    pub sigma: f64,
    pub inner_solver: String,
    pub factor_entries: usize,
    pub restarts: usize,
    pub operator_applications: usize,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub history: Vec<IterationRecord>,
}

impl SolverReport {
    pub fn new(s: &SolveStage) -> Self {
        let d = &s.pairs.diagnostics;
        Self {
            dimension: s.grid.dimension(),
            nnz: s.nnz,
            sigma: s.sigma,
            inner_solver: d.inner_solver.clone(),
            factor_entries: d.factor_entries,
            restarts: d.restarts,
            operator_applications: d.operator_applications,
            eigenvalues: s.pairs.values.clone(),
            residuals: s.pairs.residuals.clone(),
            max_residual: s.pairs.max_residual(),
            history: d.history.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FitRms {
    pub radial: Option<f64>,
    pub angular: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub solver: Option<SolverReport>,
    pub fit_rms: FitRms,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub status: RunStatus,
    pub failure: Option<StageFailure>,
    pub provenance: Provenance,
    pub potential: Section<PotentialStage>,
    pub decomposition: Section<DecompositionOutput>,
    pub channels: Section<ConversionChannels>,
    pub states: Section<Vec<AssignedState>>,
    pub spectrum: Section<Q1Spectrum>,
    pub pathways: Section<Vec<ConversionPathway>>,
    pub diagnostics: Diagnostics,
}

impl Report {
    pub(crate) fn new(cfg: &PipelineConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            status: RunStatus::Failed,
            failure: None,
            provenance: Provenance::new(cfg),
            potential: Section::pending(),
            decomposition: Section::pending(),
            channels: Section::pending(),
            states: Section::pending(),
            spectrum: Section::pending(),
            pathways: Section::pending(),
            diagnostics: Diagnostics::default(),
        }
    }

    pub(crate) fn fail(&mut self, e: &PipelineError) {
        self.status = RunStatus::Failed;
        self.failure = Some(StageFailure { exit_code: e.exit_code(), message: e.to_string() });
        let reason = format!("earlier stage failed: {e}");
        self.potential.skip_pending(&reason);
        self.decomposition.skip_pending(&reason);
        self.channels.skip_pending(&reason);
        self.states.skip_pending(&reason);
        self.spectrum.skip_pending(&reason);
        self.pathways.skip_pending(&reason);
    }

    /// Canonical JSON: sorted keys, floats rounded to ten significant digits.
    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        round_floats(&mut v);
        let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
        s.push('\n');
        s
    }
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n.as_f64().map(|x| round_sig(x, SIG_DIGITS)).and_then(serde_json::Number::from_f64) {
                *n = x;
            }
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(o) => o.values_mut().for_each(round_floats),
        _ => {}
    }
}

/// Writes `report.json` or the CSV bundle into `dir`.
pub fn emit_report(report: &Report, format: OutputFormat, dir: &Path) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(|e| output_err(dir, e))?;
    match format {
        OutputFormat::Json => {
            let path = dir.join(files::REPORT_JSON);
            fs::write(&path, report.to_json()).map_err(|e| output_err(&path, e))
        }
        OutputFormat::CsvBundle => files::write_csv_bundle(report, dir),
    }
}
