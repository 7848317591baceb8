//! Packet error rates for two-user uplink NOMA with mobile users.
//!
//! The crate has four layers:
//!
//! * [`special`] and [`model`]: log-domain gamma kernels and the link parameters.
//! * [`analytic`]: closed-form CDFs, level crossing rates and Markov-model PERs
//!   for both SIC stages, plus their union bound and first-order expansions.
//! * [`channel`]: a sum-of-sinusoids Rayleigh fading simulator with the SIC
//!   receiver and empirical estimators that serve as oracles for `analytic`.
//! * [`optimize`]: the constrained power-split search, and [`runner`], which
//!   ties everything to config files, sweeps and CSV output.

pub mod analytic;
pub mod channel;
pub mod error;
pub mod model;
pub mod optimize;
pub mod runner;
pub mod special;

pub use error::{Error, Result};
pub use model::{MobilityProfile, PerBreakdown, SystemConfig};
