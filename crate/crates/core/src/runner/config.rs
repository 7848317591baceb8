//! Flat TOML configuration files.
//!
//! Link keys (every key is optional unless marked required):
//!
//! | key | meaning |
//! |-----|---------|
//! | `n_antennas` | receive antennas, required |
//! | `alpha1` | power fraction of user 1, required |
//! | `snr_db` or `snr_linear` | transmit SNR `p/N0`, one required |
//! | `gamma_th` | SINR threshold (linear), required |
//! | `t_packet_ms` or `t_packet_s` | packet duration, one required |
//! | `doppler1_hz`, `speed1_kmh` or `speed1_mps` | user-1 mobility, one required |
//! | `doppler2_hz`, `speed2_kmh` or `speed2_mps` | user-2 mobility, one required |
//! | `carrier_ghz` or `carrier_hz` | carrier, required when a speed is given |
//! | `seed` | Monte-Carlo seed, default 1 |
//! | `num_packets` | Monte-Carlo packets, default 100000 |
//! | `num_sinusoids` | sinusoids per fading path, default 32 |
//! | `sample_rate_hz` | simulator sample rate, default 64 per Doppler cycle and per packet |
//!
//! An optional `[sweep]` table (or `sweep.*` dotted keys) holds `variable`,
//! `grid`, `outputs` and `series_n_antennas`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::sweep::{Output, SweepSpec, SweepVariable};
use crate::channel::SosParams;
use crate::error::{config, Error, Result};
use crate::model::{db_to_linear, MobilityProfile, SystemConfig};

/// Monte-Carlo settings carried alongside a link configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub seed: u64,
    pub num_packets: u64,
    pub num_sinusoids: Option<usize>,
    pub sample_rate_hz: Option<f64>,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self { seed: 1, num_packets: 100_000, num_sinusoids: None, sample_rate_hz: None }
    }
}

impl SimSettings {
    /// Simulator parameters for `cfg`, with the defaults filled in.
    pub fn sos_params(&self, cfg: &SystemConfig) -> Result<SosParams> {
        let defaults = SosParams::for_config(cfg, self.seed);
        SosParams::new(
            self.num_sinusoids.unwrap_or(defaults.num_sinusoids),
            self.sample_rate_hz.unwrap_or(defaults.sample_rate_hz),
            self.seed,
        )
    }
}

/// A parsed configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub system: SystemConfig,
    pub sim: SimSettings,
    /// Present when the file has a `[sweep]` table; its base is `system`.
    pub sweep: Option<SweepSpec>,
}

macro_rules! raw_struct {
    ($(#[$m:meta])* struct $name:ident { $($field:ident : $ty:ty),* $(,)? }) => {
        $(#[$m])*
        #[derive(Debug, Default, Deserialize, Serialize)]
        #[serde(deny_unknown_fields)]
        struct $name {
            $(
                #[serde(default, skip_serializing_if = "Option::is_none")]
                $field: Option<$ty>,
            )*
        }
    };
}

raw_struct! {
    struct RawConfig {
        n_antennas: u32,
        alpha1: f64,
        snr_db: f64,
        snr_linear: f64,
        gamma_th: f64,
        t_packet_ms: f64,
        t_packet_s: f64,
        doppler1_hz: f64,
        speed1_kmh: f64,
        speed1_mps: f64,
        doppler2_hz: f64,
        speed2_kmh: f64,
        speed2_mps: f64,
        carrier_ghz: f64,
        carrier_hz: f64,
        seed: u64,
        num_packets: u64,
        num_sinusoids: usize,
        sample_rate_hz: f64,
        sweep: RawSweep,
    }
}

raw_struct! {
    struct RawSweep {
        variable: String,
        grid: Vec<f64>,
        outputs: Vec<String>,
        series_n_antennas: Vec<u32>,
    }
}

fn required<T>(value: Option<T>, key: &str) -> Result<T> {
    value.ok_or_else(|| config(format!("missing required key `{key}`")))
}

/// At most one of the alternatives may be set.
fn one_of(choices: &[(&str, Option<f64>)]) -> Result<Option<(usize, f64)>> {
    let set: Vec<_> = choices.iter().enumerate().filter_map(|(i, (_, v))| v.map(|v| (i, v))).collect();
    if set.len() > 1 {
        let names: Vec<_> = set.iter().map(|(i, _)| format!("`{}`", choices[*i].0)).collect();
        return Err(config(format!("keys {} are mutually exclusive", names.join(" and "))));
    }
    Ok(set.first().copied())
}

fn with_key<T>(key: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config(msg) => config(format!("`{key}`: {msg}")),
        other => other,
    })
}

impl RawConfig {
    fn carrier_hz(&self) -> Result<Option<f64>> {
        Ok(one_of(&[("carrier_ghz", self.carrier_ghz), ("carrier_hz", self.carrier_hz)])?.map(|(i, v)| {
            if i == 0 {
                v * 1e9
            } else {
                v
            }
        }))
    }

    fn mobility(&self, user: usize) -> Result<MobilityProfile> {
        let (doppler, kmh, mps) = if user == 1 {
            (self.doppler1_hz, self.speed1_kmh, self.speed1_mps)
        } else {
            (self.doppler2_hz, self.speed2_kmh, self.speed2_mps)
        };
        let keys = [format!("doppler{user}_hz"), format!("speed{user}_kmh"), format!("speed{user}_mps")];
        let choice = one_of(&[(&keys[0], doppler), (&keys[1], kmh), (&keys[2], mps)])?;
        let Some((i, v)) = choice else {
            return Err(config(format!("missing mobility for user {user}: set one of {}", keys.join(", "))));
        };
        if i == 0 {
            return with_key(&keys[0], MobilityProfile::from_doppler(v));
        }
        let carrier = self
            .carrier_hz()?
            .ok_or_else(|| config(format!("`{}` needs `carrier_ghz` or `carrier_hz`", keys[i])))?;
        let speed_mps = if i == 1 { v / 3.6 } else { v };
        with_key(&keys[i], MobilityProfile::from_speed(speed_mps, carrier))
    }

    fn into_loaded(self) -> Result<LoadedConfig> {
        let snr = match one_of(&[("snr_db", self.snr_db), ("snr_linear", self.snr_linear)])? {
            Some((0, db)) => db_to_linear(db),
            Some((_, lin)) => lin,
            None => return Err(config("missing required key `snr_db` (or `snr_linear`)")),
        };
        let t_packet_s = match one_of(&[("t_packet_ms", self.t_packet_ms), ("t_packet_s", self.t_packet_s)])? {
            Some((0, ms)) => ms * 1e-3,
            Some((_, s)) => s,
            None => return Err(config("missing required key `t_packet_ms` (or `t_packet_s`)")),
        };
        let system = SystemConfig::new(
            required(self.n_antennas, "n_antennas")?,
            required(self.alpha1, "alpha1")?,
            snr,
            required(self.gamma_th, "gamma_th")?,
            t_packet_s,
            self.mobility(1)?,
            self.mobility(2)?,
        )?;
        let defaults = SimSettings::default();
        let sim = SimSettings {
            seed: self.seed.unwrap_or(defaults.seed),
            num_packets: self.num_packets.unwrap_or(defaults.num_packets),
            num_sinusoids: self.num_sinusoids,
            sample_rate_hz: self.sample_rate_hz,
        };
        if sim.num_packets == 0 {
            return Err(config("`num_packets` must be >= 1"));
        }
        with_key("num_sinusoids / sample_rate_hz", sim.sos_params(&system))?;
        let sweep = match self.sweep {
            None => None,
            Some(raw) => {
                let variable: SweepVariable = required(raw.variable, "sweep.variable")?.parse()?;
                let outputs = raw
                    .outputs
                    .unwrap_or_default()
                    .iter()
                    .map(|s| s.parse::<Output>())
                    .collect::<Result<Vec<_>>>()?;
                Some(SweepSpec::new(
                    variable,
                    required(raw.grid, "sweep.grid")?,
                    system,
                    outputs,
                    raw.series_n_antennas.unwrap_or_default(),
                    sim,
                )?)
            }
        };
        Ok(LoadedConfig { system, sim, sweep })
    }
}

/// Parses a configuration document.
pub fn parse_config(text: &str) -> Result<LoadedConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    raw.into_loaded()
}

/// Reads and parses a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<LoadedConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    parse_config(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

impl LoadedConfig {
    /// Renders the configuration in SI keys so that [`parse_config`] restores
    /// it exactly.
    pub fn to_toml(&self) -> String {
        let s = &self.system;
        let mut raw = RawConfig {
            n_antennas: Some(s.n_antennas()),
            alpha1: Some(s.alpha1()),
            snr_linear: Some(s.snr_linear()),
            gamma_th: Some(s.gamma_th()),
            t_packet_s: Some(s.t_packet_s()),
            seed: Some(self.sim.seed),
            num_packets: Some(self.sim.num_packets),
            num_sinusoids: self.sim.num_sinusoids,
            sample_rate_hz: self.sim.sample_rate_hz,
            ..RawConfig::default()
        };
        let mut carrier: Option<f64> = None;
        for (user, m) in [(1, s.mobility_u1()), (2, s.mobility_u2())] {
            // A speed can only be written back if its carrier matches the shared key.
            let speed = match (m.speed_mps(), m.carrier_hz()) {
                (Some(v), Some(fc)) if carrier.is_none_or(|c| c == fc) => {
                    carrier = Some(fc);
                    Some(v)
                }
                _ => None,
            };
            let (doppler_key, speed_key) = if user == 1 {
                (&mut raw.doppler1_hz, &mut raw.speed1_mps)
            } else {
                (&mut raw.doppler2_hz, &mut raw.speed2_mps)
            };
            match speed {
                Some(v) => *speed_key = Some(v),
                None => *doppler_key = Some(m.doppler_hz()),
            }
        }
        raw.carrier_hz = carrier;
        raw.sweep = self.sweep.as_ref().map(|sw| RawSweep {
            variable: Some(sw.variable.name().to_string()),
            grid: Some(sw.grid.clone()),
            outputs: Some(sw.outputs.iter().map(|o| o.name().to_string()).collect()),
            series_n_antennas: (!sw.series_n_antennas.is_empty()).then(|| sw.series_n_antennas.clone()),
        });
        toml::to_string(&raw).expect("configuration values are always representable")
    }
}
