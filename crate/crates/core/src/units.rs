//! Physical constants in the crate's unit system (cm⁻¹, Å, u, K).

/// ħ²/(2·u·Å²) expressed in cm⁻¹, to 7 significant figures.
///
/// Dividing by a mass in u gives the kinetic prefactor of a translational
/// coordinate measured in Å.
pub const HBAR2_OVER_2U_ANGSTROM2: f64 = 16.85763;

/// Second radiation constant hc/k_B in cm·K, to 7 significant figures.
pub const HC_OVER_KB: f64 = 1.438777;

/// Converts a Gaussian standard deviation to its full width at half maximum.
pub const SIGMA_TO_FWHM: f64 = 2.354_820_045_030_949;
