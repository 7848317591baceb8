//! SIC receiver applied sample by sample.

use num_complex::Complex64;

use super::sos::FadingTrajectory;
use crate::error::{Error, Result};
use crate::model::SystemConfig;

/// Instantaneous SINR of the two detection stages at one sample, with unit
/// noise power and `p = snr_linear`.
///
/// Stage 1 combines with `v1 = h1 / |h1|` and treats user 2 as interference;
/// stage 2 sees user 2 alone after cancellation.
pub(crate) fn sinr_pair(h1: &[Complex64], h2: &[Complex64], cfg: &SystemConfig) -> (f64, f64) {
    let p = cfg.snr_linear();
    let norm1_sq: f64 = h1.iter().map(|h| h.norm_sqr()).sum();
    let norm2_sq: f64 = h2.iter().map(|h| h.norm_sqr()).sum();
    // |v1^H h2|^2 = |h1^H h2|^2 / |h1|^2
    let cross: Complex64 = h1.iter().zip(h2).map(|(a, b)| a.conj() * b).sum();
    let interference = if norm1_sq > 0.0 { cross.norm_sqr() / norm1_sq } else { 0.0 };
    let gamma1 = p * cfg.alpha1() * norm1_sq / (p * cfg.alpha2() * interference + 1.0);
    let gamma2 = p * cfg.alpha2() * norm2_sq;
    (gamma1, gamma2)
}

/// Stage-1 and stage-2 SINR series over a whole trajectory.
pub fn sinr_trajectories(traj: &FadingTrajectory, cfg: &SystemConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    if traj.n_antennas() != cfg.n_antennas() as usize {
        return Err(Error::Shape(format!(
            "trajectory has {} antennas, configuration expects {}",
            traj.n_antennas(),
            cfg.n_antennas()
        )));
    }
    Ok((0..traj.num_samples())
        .map(|t| sinr_pair(traj.user1(t), traj.user2(t), cfg))
        .unzip())
}
