//! Time-correlated Rayleigh fading, the SIC receiver, and the empirical
//! estimators used to check the closed forms.

mod estimate;
mod montecarlo;
mod receiver;
mod sos;

pub use estimate::{autocorrelation, count_down_crossings, estimate_cdf, estimate_lcr, McEstimate};
pub use montecarlo::{
    sample_sinr_snapshots, simulate_crossing_rates, simulate_packets, simulate_per,
    simulate_per_batched, CrossingRates, PacketCounts, PerEstimates, MIN_CONDITIONING_PACKETS,
};
pub use receiver::sinr_trajectories;
pub use sos::{generate_trajectory, FadingTrajectory, SosChannel, SosParams};
