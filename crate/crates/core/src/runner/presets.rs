//! Built-in configurations reproducing the two published PER figures.
//!
//! The figures fix the Doppler (50 km/h at 3.5 GHz), the 1 ms packet and the
//! antenna counts. The SNR and the threshold are not given numerically, so the
//! presets pick documented defaults that any key in the file can override.

use super::config::{parse_config, LoadedConfig};
use crate::error::{config, Result};

pub const PRESET_NAMES: [&str; 2] = ["fig1", "fig2"];

const FIG1: &str = r#"# PER of both SIC stages versus the power allocation, N = 2.
n_antennas = 2
alpha1 = 0.5
snr_db = 30
gamma_th = 1
t_packet_ms = 1
speed1_kmh = 50
speed2_kmh = 50
carrier_ghz = 3.5
seed = 1
num_packets = 100000

[sweep]
variable = "alpha1"
grid = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95]
outputs = ["per1", "per2_cond"]
"#;

// gamma_th = 10 (10 dB) with a grid reaching down to alpha1 = 1e-3 shows the
// regime where both arrays are saturated by stage-1 failures.
const FIG2: &str = r#"# Union bound on the stage-2 PER versus the power allocation, N = 8 and N = 128.
n_antennas = 8
alpha1 = 0.5
snr_db = 30
gamma_th = 10
t_packet_ms = 1
speed1_kmh = 50
speed2_kmh = 50
carrier_ghz = 3.5
seed = 1
num_packets = 100000

[sweep]
variable = "alpha1"
grid = [0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95]
outputs = ["per2_bound"]
series_n_antennas = [8, 128]
"#;

/// The TOML text of a named preset, suitable for editing and reloading.
pub fn preset_text(name: &str) -> Result<&'static str> {
    match name {
        "fig1" => Ok(FIG1),
        "fig2" => Ok(FIG2),
        other => Err(config(format!("unknown preset `{other}`, expected one of {}", PRESET_NAMES.join(", ")))),
    }
}

/// A named preset, parsed.
pub fn preset(name: &str) -> Result<(LoadedConfig, &'static str)> {
    let text = preset_text(name)?;
    Ok((parse_config(text)?, text))
}
