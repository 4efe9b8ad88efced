use serde::{Deserialize, Serialize};

use super::{PotentialError, TensorDecomposition};

pub const DEFAULT_CHANNEL_EPSILON: f64 = 1e-3;

/// Open/closed state of the two nuclear-spin conversion channels.
///
/// A rank-2 field mixes `m` levels without changing them and so opens the
/// Δm = 0 channel; a rank-1 component is needed for |Δm| = 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionChannels {
    pub delta_m0_open: bool,
    pub delta_m1_open: bool,
    /// `R_0, R_1, R_2`.
    pub rank_powers: [f64; 3],
    pub threshold: f64,
    /// Null field: every rank power is zero.
    pub degenerate: bool,
}

/// `delta_m0_open ⇔ R_2 > ε·(R_0+R_1+R_2)` and likewise for `R_1`.
pub fn classify_channels(decomp: &TensorDecomposition, epsilon: f64) -> Result<ConversionChannels, PotentialError> {
    if decomp.k_max() < 2 {
        return Err(PotentialError::InvalidArgument("channel logic needs ranks 0 to 2".into()));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(PotentialError::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let r = [decomp.rank_power(0), decomp.rank_power(1), decomp.rank_power(2)];
    let total: f64 = r.iter().sum();
    if total == 0.0 {
        return Ok(ConversionChannels {
            delta_m0_open: false,
            delta_m1_open: false,
            rank_powers: r,
            threshold: epsilon,
            degenerate: true,
        });
    }
    let cut = epsilon * total;
    Ok(ConversionChannels {
        delta_m0_open: r[2] > cut,
        delta_m1_open: r[1] > cut,
        rank_powers: r,
        threshold: epsilon,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::decompose_spherical_tensors;

    #[test]
    fn rank_two_only() {
        let d = decompose_spherical_tensors(&|t: f64, p: f64| 40.0 * (1.5 * t.cos().powi(2) - 0.5) + 10.0 * t.sin().powi(2) * (2.0 * p).cos(), 4).unwrap();
        let c = classify_channels(&d, DEFAULT_CHANNEL_EPSILON).unwrap();
        assert!(c.delta_m0_open && !c.delta_m1_open && !c.degenerate);
    }

    #[test]
    fn rank_one_admixture() {
        let d = decompose_spherical_tensors(&|t: f64, _: f64| 40.0 * (1.5 * t.cos().powi(2) - 0.5) + 8.0 * t.cos(), 4).unwrap();
        let c = classify_channels(&d, DEFAULT_CHANNEL_EPSILON).unwrap();
        assert!(c.delta_m0_open && c.delta_m1_open);
    }

    #[test]
    fn null_field() {
        let d = decompose_spherical_tensors(&|_: f64, _: f64| 0.0, 4).unwrap();
        let c = classify_channels(&d, DEFAULT_CHANNEL_EPSILON).unwrap();
        assert!(!c.delta_m0_open && !c.delta_m1_open && c.degenerate);
    }
}
