use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PipelineError;
use crate::eigensolver::{InnerSolver, SolverOptions};
use crate::hamiltonian::{ModelParams, RadialStencil, MIN_POINTS};
use crate::potential::{DEFAULT_CHANNEL_EPSILON, DEFAULT_K_MAX};
use crate::spectroscopy::DEFAULT_RESOLUTION;

/// Environment variable that overrides `output.directory`.
pub const OUT_ENV: &str = "ROTORCAGE_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub nr: usize,
    pub ntheta: usize,
    pub nphi: usize,
    /// Half-width of the radial box in Å.
    pub r_max: f64,
    pub radial_stencil: RadialStencil,
    pub include_coupling: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { nr: 30, ntheta: 30, nphi: 30, r_max: 1.0, radial_stencil: RadialStencil::default(), include_coupling: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub n_eig: usize,
    /// Spectral shift in cm⁻¹; when absent, 1 cm⁻¹ below the potential minimum.
    pub sigma: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub inner: InnerSolver,
    pub memory_cap_bytes: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::new(20, 0.0);
        Self {
            n_eig: 20,
            sigma: None,
            tol: d.tol,
            max_iter: d.max_iter,
            seed: d.seed,
            inner: d.inner,
            memory_cap_bytes: d.memory_cap_bytes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialConfig {
    pub radial: PathBuf,
    pub angular: PathBuf,
    pub fourier_order: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecompositionConfig {
    pub k_max: u32,
    pub epsilon: f64,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        Self { k_max: DEFAULT_K_MAX, epsilon: DEFAULT_CHANNEL_EPSILON }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectroscopyConfig {
    /// Band origin for line positions; `model.nu_origin` when absent.
    pub nu_origin: Option<f64>,
    pub resolution: f64,
    /// Highest `j` of the initial manifold.
    pub initial_j_max: u32,
}

impl Default for SpectroscopyConfig {
    fn default() -> Self {
        Self { nu_origin: None, resolution: DEFAULT_RESOLUTION, initial_j_max: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    CsvBundle,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(Self::Json),
            "csv-bundle" => Ok(Self::CsvBundle),
            _ => Err(format!("unknown format {s:?} (expected json or csv-bundle)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), formats: vec![OutputFormat::Json, OutputFormat::CsvBundle] }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub model: ModelParams,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub potential: PotentialConfig,
    pub decomposition: DecompositionConfig,
    pub spectroscopy: SpectroscopyConfig,
    pub output: OutputConfig,
}

fn bad(msg: impl Into<String>) -> PipelineError {
    PipelineError::Config(msg.into())
}

impl PipelineConfig {
    /// Parses a config file, resolving relative paths against its directory
    /// and applying [`OUT_ENV`].
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| bad(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.apply_env();
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.potential.radial, &mut self.potential.angular, &mut self.output.directory] {
            if !p.as_os_str().is_empty() && p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn apply_env(&mut self) {
        if let Some(dir) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
            self.output.directory = PathBuf::from(dir);
        }
    }

    /// Bounds checks that need no file access.
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.model.validate().map_err(|e| bad(e.to_string()))?;
        let g = &self.grid;
        for (name, n) in [("grid.nr", g.nr), ("grid.ntheta", g.ntheta), ("grid.nphi", g.nphi)] {
            if n < MIN_POINTS {
                return Err(bad(format!("{name} = {n} is below the minimum of {MIN_POINTS}")));
            }
        }
        if !(g.r_max > 0.0 && g.r_max.is_finite()) {
            return Err(bad(format!("grid.r_max must be positive, got {}", g.r_max)));
        }
        let s = &self.solver;
        let dim = g.nr * g.ntheta * g.nphi;
        if s.n_eig == 0 || s.n_eig >= dim {
            return Err(bad(format!("solver.n_eig = {} must lie in 1..{dim}", s.n_eig)));
        }
        if !(s.tol > 0.0 && s.tol.is_finite()) {
            return Err(bad(format!("solver.tol must be positive, got {}", s.tol)));
        }
        if s.max_iter == 0 {
            return Err(bad("solver.max_iter must be at least 1"));
        }
        if let Some(sigma) = s.sigma.filter(|v| !v.is_finite()) {
            return Err(bad(format!("solver.sigma must be finite, got {sigma}")));
        }
        if self.decomposition.k_max < 2 {
            return Err(bad(format!("decomposition.k_max = {} must be at least 2", self.decomposition.k_max)));
        }
        if !(self.decomposition.epsilon > 0.0 && self.decomposition.epsilon < 1.0) {
            return Err(bad(format!("decomposition.epsilon must lie in (0, 1), got {}", self.decomposition.epsilon)));
        }
        if !(self.spectroscopy.resolution > 0.0) {
            return Err(bad(format!("spectroscopy.resolution must be positive, got {}", self.spectroscopy.resolution)));
        }
        if self.output.formats.is_empty() {
            return Err(bad("output.formats is empty"));
        }
        Ok(())
    }

    /// Checks that referenced input files exist.
    pub fn check_inputs(&self) -> Result<(), PipelineError> {
        for (name, p) in [("potential.radial", &self.potential.radial), ("potential.angular", &self.potential.angular)] {
            if p.as_os_str().is_empty() {
                return Err(bad(format!("{name} is not set")));
            }
            if !p.is_file() {
                return Err(PipelineError::Input(format!("{name} file {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// Fourier order used for the angular fit: the explicit value, else `k_max`.
    pub fn fourier_order(&self) -> u32 {
        self.potential.fourier_order.unwrap_or(self.decomposition.k_max)
    }

    pub fn nu_origin(&self) -> f64 {
        self.spectroscopy.nu_origin.unwrap_or(self.model.nu_origin)
    }

    pub fn solver_options(&self, sigma: f64) -> SolverOptions {
        let s = &self.solver;
        SolverOptions {
            tol: s.tol,
            max_iter: s.max_iter,
            seed: s.seed,
            inner: s.inner,
            memory_cap_bytes: s.memory_cap_bytes,
            ..SolverOptions::new(s.n_eig, sigma)
        }
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let bytes = serde_json::to_vec(&value).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_small_grid_is_rejected() {
        let mut cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        cfg.grid.nr = 4;
        let err = cfg.validate().unwrap_err();
        assert!(matches!(err, PipelineError::Config(ref m) if m.contains("grid.nr")), "{err}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, r#"{"grid": {"nr": 30, "bogus": 1}}"#).unwrap();
        assert!(matches!(PipelineConfig::load(&p), Err(PipelineError::Config(_))));
    }

    #[test]
    fn relative_paths_resolve_against_config() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, r#"{"potential": {"radial": "r.csv", "angular": "/abs/a.csv"}, "output": {"directory": "o"}}"#).unwrap();
        let mut cfg: PipelineConfig = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
        cfg.resolve_paths(dir.path());
        assert_eq!(cfg.potential.radial, dir.path().join("r.csv"));
        assert_eq!(cfg.potential.angular, PathBuf::from("/abs/a.csv"));
        assert_eq!(cfg.output.directory, dir.path().join("o"));
    }

    #[test]
    fn digest_tracks_content() {
        let a = PipelineConfig::default();
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.solver.seed += 1;
        assert_ne!(a.digest(), b.digest());
    }
}
