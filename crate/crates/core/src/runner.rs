//! Configuration files, parameter sweeps, figure presets and validation
//! reports.

mod config;
mod presets;
mod sweep;
mod validate;

pub use config::{load_config, parse_config, LoadedConfig, SimSettings};
pub use presets::{preset, preset_text, PRESET_NAMES};
pub use sweep::{run_sweep, Output, SweepSpec, SweepVariable};
pub use validate::{run_validation, Check, CheckStatus, ValidationReport};
