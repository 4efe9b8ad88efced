//! Multi-Gaussian fits of Q₁-branch spectra and first-order conversion
//! kinetics of the fitted peak areas.

mod gaussian;
mod io;
mod kinetics;

pub use gaussian::{fit_gaussian_peaks, fit_gaussian_peaks_with, pick_peaks, simulate_spectrum, FitOptions, FitResult, PeakEstimate};
pub use io::{load_spectrum, load_time_series, write_fit_overlay_csv, write_spectrum_csv, SPECTRUM_HEADER};
pub use kinetics::{fit_conversion_kinetics, KineticsFit};

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SpecfitError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{0}")]
    Schema(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("peak {index} centre {center:.4} left the window [{lo}, {hi}]")]
    BoundViolation { index: usize, center: f64, lo: f64, hi: f64 },
}

/// Absorbance against wavenumber (cm⁻¹), strictly ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    wavenumbers: Vec<f64>,
    absorbance: Vec<f64>,
    /// Minutes since deposition, if known.
    pub time_tag: Option<f64>,
}

impl Spectrum {
    pub fn new(wavenumbers: Vec<f64>, absorbance: Vec<f64>) -> Result<Self, SpecfitError> {
        if wavenumbers.len() != absorbance.len() {
            return Err(SpecfitError::InvalidArgument(format!(
                "{} wavenumbers but {} absorbance values",
                wavenumbers.len(),
                absorbance.len()
            )));
        }
        if wavenumbers.len() < 2 {
            return Err(SpecfitError::InvalidArgument("spectrum needs at least two points".into()));
        }
        if wavenumbers.iter().chain(&absorbance).any(|v| !v.is_finite()) {
            return Err(SpecfitError::InvalidArgument("spectrum contains non-finite values".into()));
        }
        if let Some(i) = wavenumbers.windows(2).position(|w| w[1] <= w[0]) {
            return Err(SpecfitError::InvalidArgument(format!("wavenumbers must be strictly ascending (point {})", i + 1)));
        }
        Ok(Self { wavenumbers, absorbance, time_tag: None })
    }

    pub fn with_time(mut self, minutes: f64) -> Self {
        self.time_tag = Some(minutes);
        self
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn absorbance(&self) -> &[f64] {
        &self.absorbance
    }

    pub fn len(&self) -> usize {
        self.wavenumbers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavenumbers.is_empty()
    }

    pub fn range(&self) -> (f64, f64) {
        (self.wavenumbers[0], *self.wavenumbers.last().unwrap())
    }
}

/// `area/(σ√2π)·exp(-(ν - center)²/2σ²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPeak {
    pub center: f64,
    pub sigma: f64,
    pub area: f64,
}

impl GaussianPeak {
    pub fn new(center: f64, sigma: f64, area: f64) -> Self {
        Self { center, sigma, area }
    }

    pub fn fwhm(&self) -> f64 {
        crate::units::SIGMA_TO_FWHM * self.sigma
    }

    pub fn height(&self) -> f64 {
        self.area / (self.sigma * (2.0 * std::f64::consts::PI).sqrt())
    }

    pub fn eval(&self, nu: f64) -> f64 {
        let x = (nu - self.center) / self.sigma;
        self.height() * (-0.5 * x * x).exp()
    }
}

/// `b0 + b1·(ν - reference)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Baseline {
    pub b0: f64,
    pub b1: f64,
    pub reference: f64,
}

impl Baseline {
    pub fn eval(&self, nu: f64) -> f64 {
        self.b0 + self.b1 * (nu - self.reference)
    }
}
