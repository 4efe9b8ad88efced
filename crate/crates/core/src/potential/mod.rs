//! Sampled potential-energy surfaces, their analytic fits and the
//! spherical-tensor content of the angular field.
//!
//! The radial well is modelled as `v0 + ½k(r - r0)²` and the angular surface
//! as a finite sum of products of sines and cosines in θ and φ. The angular
//! field is then projected onto complex spherical harmonics `Y_kq`
//! (Condon–Shortley phase); the per-rank power `R_k = Σ_q |c_kq|²` decides
//! which Δm conversion channels the field can drive.

mod channels;
mod fourier;
mod harmonic;
mod samples;
mod tensor;

pub use channels::{classify_channels, ConversionChannels, DEFAULT_CHANNEL_EPSILON};
pub use fourier::{fit_angular_fourier, FourierBasis, FourierFit, FourierTerm};
pub use harmonic::{fit_radial_harmonic, HarmonicFit};
pub use samples::{load_angular_samples, load_potential_samples, load_radial_samples, AngularSamples, PotentialSamples, RadialSamples, SampleKind};
pub use tensor::{
    angular_coupling_matrix, decompose_samples, decompose_spherical_tensors, decompose_with_quadrature, TensorDecomposition,
    DEFAULT_K_MAX,
};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("{path}: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("invalid samples: {0}")]
    Validation(String),
    #[error("fit rejected: {0}")]
    FitRejected(String),
    #[error("ill-posed fit, design matrix is rank deficient in terms: {}", .terms.join(", "))]
    IllPosed { terms: Vec<String> },
    #[error("rank {k_max} exceeds the resolving power of the quadrature (max rank {max_rank}); use a finer grid")]
    InsufficientQuadrature { k_max: u32, max_rank: u32 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
