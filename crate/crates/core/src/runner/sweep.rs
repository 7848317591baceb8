//! One-dimensional parameter sweeps rendered as CSV.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::config::SimSettings;
use crate::analytic::{
    cdf_gamma1, cdf_gamma2, lcr_gamma1, lcr_gamma2, per_stage1, per_stage1_asymptotic, per_stage2_asymptotic,
    per_stage2_bound, per_stage2_conditional,
};
use crate::channel::{simulate_per_batched, PerEstimates};
use crate::error::{config, Error, Result};
use crate::model::{db_to_linear, MobilityProfile, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    Alpha1,
    SnrDb,
    GammaTh,
    NAntennas,
    /// Sets the Doppler frequency of both users.
    DopplerHz,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 5] = [Self::Alpha1, Self::SnrDb, Self::GammaTh, Self::NAntennas, Self::DopplerHz];

    pub fn name(self) -> &'static str {
        match self {
            Self::Alpha1 => "alpha1",
            Self::SnrDb => "snr_db",
            Self::GammaTh => "gamma_th",
            Self::NAntennas => "n_antennas",
            Self::DopplerHz => "doppler_hz",
        }
    }

    /// `base` with this variable set to `value`.
    pub fn apply(self, base: &SystemConfig, value: f64) -> Result<SystemConfig> {
        match self {
            Self::Alpha1 => base.with_alpha1(value),
            Self::SnrDb => {
                if !value.is_finite() {
                    return Err(config(format!("snr_db must be finite, got {value}")));
                }
                base.with_snr_linear(db_to_linear(value))
            }
            Self::GammaTh => base.with_gamma_th(value),
            Self::NAntennas => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= f64::from(u32::MAX)) {
                    return Err(config(format!("n_antennas must be a positive integer, got {value}")));
                }
                base.with_n_antennas(value as u32)
            }
            Self::DopplerHz => {
                let m = MobilityProfile::from_doppler(value)?;
                base.with_mobility(m, m)
            }
        }
    }

    fn format_value(self, value: f64) -> String {
        match self {
            Self::NAntennas => format!("{}", value as u32),
            _ => format!("{value:e}"),
        }
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|v| v.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|v| v.name()).collect();
            config(format!("unknown sweep variable `{s}`, expected one of {}", names.join(", ")))
        })
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A quantity reported per sweep row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    Per1,
    Per2Cond,
    /// Union bound, clamped to 1.
    Per2Bound,
    Per1Asym,
    Per2Asym,
    Cdf1,
    Cdf2,
    Lcr1,
    Lcr2,
    McPer1,
    McPer2Cond,
    McPer2Uncond,
}

impl Output {
    pub const ALL: [Output; 12] = [
        Self::Per1,
        Self::Per2Cond,
        Self::Per2Bound,
        Self::Per1Asym,
        Self::Per2Asym,
        Self::Cdf1,
        Self::Cdf2,
        Self::Lcr1,
        Self::Lcr2,
        Self::McPer1,
        Self::McPer2Cond,
        Self::McPer2Uncond,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Per1 => "per1",
            Self::Per2Cond => "per2_cond",
            Self::Per2Bound => "per2_bound",
            Self::Per1Asym => "per1_asym",
            Self::Per2Asym => "per2_asym",
            Self::Cdf1 => "cdf1",
            Self::Cdf2 => "cdf2",
            Self::Lcr1 => "lcr1",
            Self::Lcr2 => "lcr2",
            Self::McPer1 => "mc_per1",
            Self::McPer2Cond => "mc_per2_cond",
            Self::McPer2Uncond => "mc_per2_uncond",
        }
    }

    /// Monte-Carlo outputs carry an extra standard-error column.
    pub fn is_monte_carlo(self) -> bool {
        matches!(self, Self::McPer1 | Self::McPer2Cond | Self::McPer2Uncond)
    }

    fn analytic(self, cfg: &SystemConfig) -> Result<f64> {
        let g = cfg.gamma_th();
        Ok(match self {
            Self::Per1 => per_stage1(cfg).total,
            Self::Per2Cond => per_stage2_conditional(cfg).total,
            Self::Per2Bound => per_stage2_bound(cfg).clamped,
            Self::Per1Asym => per_stage1_asymptotic(cfg),
            Self::Per2Asym => per_stage2_asymptotic(cfg),
            Self::Cdf1 => cdf_gamma1(cfg, g)?,
            Self::Cdf2 => cdf_gamma2(cfg, g)?,
            Self::Lcr1 => lcr_gamma1(cfg, g)?,
            Self::Lcr2 => lcr_gamma2(cfg, g)?,
            Self::McPer1 | Self::McPer2Cond | Self::McPer2Uncond => unreachable!("not a closed form"),
        })
    }

    fn simulated(self, mc: &PerEstimates) -> (f64, f64) {
        let e = match self {
            Self::McPer1 => mc.stage1,
            Self::McPer2Cond => mc.stage2_conditional,
            Self::McPer2Uncond => mc.stage2_unconditional,
            _ => unreachable!("not a Monte-Carlo output"),
        };
        (e.mean, e.std_error)
    }
}

impl FromStr for Output {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|o| o.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|o| o.name()).collect();
            config(format!("unknown sweep output `{s}`, expected one of {}", names.join(", ")))
        })
    }
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A sweep of one variable over a grid, on top of a base configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub grid: Vec<f64>,
    pub base: SystemConfig,
    pub outputs: Vec<Output>,
    /// Antenna counts evaluated side by side; empty means the base count only.
    pub series_n_antennas: Vec<u32>,
    pub sim: SimSettings,
}

impl SweepSpec {
    pub fn new(
        variable: SweepVariable,
        grid: Vec<f64>,
        base: SystemConfig,
        outputs: Vec<Output>,
        series_n_antennas: Vec<u32>,
        sim: SimSettings,
    ) -> Result<Self> {
        if grid.is_empty() {
            return Err(config("sweep.grid must not be empty"));
        }
        if let Some(w) = grid.windows(2).find(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
            return Err(config(format!("sweep.grid must be strictly increasing, found {} then {}", w[0], w[1])));
        }
        for (i, o) in outputs.iter().enumerate() {
            if outputs[..i].contains(o) {
                return Err(config(format!("sweep.outputs lists `{o}` twice")));
            }
        }
        if series_n_antennas.contains(&0) {
            return Err(config("sweep.series_n_antennas entries must be >= 1"));
        }
        if !series_n_antennas.is_empty() && variable == SweepVariable::NAntennas {
            return Err(config("sweep.series_n_antennas cannot be combined with an n_antennas sweep"));
        }
        let spec = Self { variable, grid, base, outputs, series_n_antennas, sim };
        for &v in &spec.grid {
            for cfg in spec.series_bases() {
                variable
                    .apply(&cfg?, v)
                    .map_err(|e| config(format!("sweep.grid value {v} is invalid for {variable}: {e}")))?;
            }
        }
        Ok(spec)
    }

    fn series_bases(&self) -> Vec<Result<SystemConfig>> {
        if self.series_n_antennas.is_empty() {
            vec![Ok(self.base)]
        } else {
            self.series_n_antennas.iter().map(|&n| self.base.with_n_antennas(n)).collect()
        }
    }

    /// CSV header fields.
    pub fn columns(&self) -> Vec<String> {
        let mut cols = vec![self.variable.name().to_string()];
        for o in &self.outputs {
            let suffixes: Vec<String> = if self.series_n_antennas.is_empty() {
                vec![String::new()]
            } else {
                self.series_n_antennas.iter().map(|n| format!("_n{n}")).collect()
            };
            for s in suffixes {
                cols.push(format!("{o}{s}"));
                if o.is_monte_carlo() {
                    cols.push(format!("{o}{s}_se"));
                }
            }
        }
        cols
    }
}

fn fmt_value(x: f64) -> String {
    format!("{x:e}")
}

/// One CSV row's cells after the swept value, or the first error hit.
fn evaluate_row(spec: &SweepSpec, value: f64, batches: usize) -> std::result::Result<Vec<String>, String> {
    let cfgs: Vec<SystemConfig> = spec
        .series_bases()
        .into_iter()
        .map(|b| b.and_then(|b| spec.variable.apply(&b, value)))
        .collect::<Result<_>>()
        .map_err(|e| e.to_string())?;
    let needs_mc = spec.outputs.iter().any(|o| o.is_monte_carlo());
    let mc: Vec<Option<PerEstimates>> = cfgs
        .iter()
        .map(|cfg| {
            if !needs_mc {
                return Ok(None);
            }
            let sos = spec.sim.sos_params(cfg)?;
            simulate_per_batched(cfg, &sos, spec.sim.num_packets, batches).map(Some)
        })
        .collect::<Result<_>>()
        .map_err(|e| e.to_string())?;
    let mut cells = Vec::new();
    for o in &spec.outputs {
        for (cfg, mc) in cfgs.iter().zip(&mc) {
            if o.is_monte_carlo() {
                let (mean, se) = o.simulated(mc.as_ref().expect("simulated above"));
                cells.push(fmt_value(mean));
                cells.push(fmt_value(se));
            } else {
                cells.push(fmt_value(o.analytic(cfg).map_err(|e| e.to_string())?));
            }
        }
    }
    Ok(cells)
}

/// Evaluates every grid point and renders the CSV document.
///
/// A row that fails is kept: its value cells read `NaN` and a trailing
/// `error` column, present only when some row failed, carries the message.
/// Rows are evaluated in parallel; the output is deterministic for a fixed
/// spec regardless of `batches`.
pub fn run_sweep(spec: &SweepSpec, batches: usize) -> String {
    let rows: Vec<_> = spec.grid.par_iter().map(|&v| (v, evaluate_row(spec, v, batches))).collect();
    let columns = spec.columns();
    let any_error = rows.iter().any(|(_, r)| r.is_err());
    let mut out = columns.join(",");
    if any_error {
        out.push_str(",error");
    }
    out.push('\n');
    for (v, row) in rows {
        let mut fields = vec![spec.variable.format_value(v)];
        match row {
            Ok(cells) => {
                fields.extend(cells);
                if any_error {
                    fields.push(String::new());
                }
            }
            Err(msg) => {
                fields.extend(std::iter::repeat_n("NaN".to_string(), columns.len() - 1));
                fields.push(format!("\"{}\"", msg.replace('"', "'")));
            }
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SystemConfig {
        let m = MobilityProfile::from_doppler(162.0).unwrap();
        SystemConfig::new(2, 0.5, 1000.0, 1.0, 1e-3, m, m).unwrap()
    }

    fn spec(variable: SweepVariable, grid: Vec<f64>, outputs: Vec<Output>) -> Result<SweepSpec> {
        SweepSpec::new(variable, grid, base(), outputs, vec![], SimSettings::default())
    }

    #[test]
    fn names_round_trip() {
        for o in Output::ALL {
            assert_eq!(o.name().parse::<Output>().unwrap(), o);
        }
        for v in SweepVariable::ALL {
            assert_eq!(v.name().parse::<SweepVariable>().unwrap(), v);
        }
        assert!("per3".parse::<Output>().is_err());
    }

    #[test]
    fn grid_validation() {
        assert!(spec(SweepVariable::Alpha1, vec![0.2, 0.2], vec![]).is_err());
        assert!(spec(SweepVariable::Alpha1, vec![0.5, 1.0], vec![]).is_err());
        assert!(spec(SweepVariable::NAntennas, vec![1.0, 2.5], vec![]).is_err());
        assert!(spec(SweepVariable::Alpha1, vec![], vec![]).is_err());
        assert!(spec(SweepVariable::Alpha1, vec![0.1], vec![Output::Per1, Output::Per1]).is_err());
        assert!(spec(SweepVariable::SnrDb, vec![-10.0, 0.0, 40.0], vec![]).is_ok());
    }

    #[test]
    fn empty_outputs_give_variable_column_only() {
        let s = spec(SweepVariable::Alpha1, vec![0.25, 0.5], vec![]).unwrap();
        assert_eq!(run_sweep(&s, 1), "alpha1\n2.5e-1\n5e-1\n");
    }

    #[test]
    fn columns_follow_declared_order() {
        let mut s = spec(SweepVariable::Alpha1, vec![0.5], vec![Output::Lcr2, Output::McPer1, Output::Per1]).unwrap();
        assert_eq!(s.columns(), ["alpha1", "lcr2", "mc_per1", "mc_per1_se", "per1"]);
        s.series_n_antennas = vec![8, 128];
        s.outputs = vec![Output::Per2Bound];
        assert_eq!(s.columns(), ["alpha1", "per2_bound_n8", "per2_bound_n128"]);
    }

    #[test]
    fn values_match_direct_evaluation() {
        let s = spec(SweepVariable::NAntennas, vec![1.0, 4.0], vec![Output::Per1, Output::Cdf2]).unwrap();
        let csv = run_sweep(&s, 1);
        let row: Vec<&str> = csv.lines().nth(2).unwrap().split(',').collect();
        assert_eq!(row[0], "4");
        let cfg = base().with_n_antennas(4).unwrap();
        assert_eq!(row[1].parse::<f64>().unwrap(), per_stage1(&cfg).total);
        assert_eq!(row[2].parse::<f64>().unwrap(), cdf_gamma2(&cfg, 1.0).unwrap());
    }

    #[test]
    fn failing_rows_get_an_error_column() {
        // 40 samples/s is below the oversampling floor at 162 Hz.
        let sim = SimSettings { sample_rate_hz: Some(40.0), num_packets: 10, ..SimSettings::default() };
        let s = SweepSpec::new(SweepVariable::Alpha1, vec![0.5], base(), vec![Output::Per1, Output::McPer1], vec![], sim)
            .unwrap();
        let csv = run_sweep(&s, 1);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "alpha1,per1,mc_per1,mc_per1_se,error");
        let row = lines.next().unwrap();
        assert!(row.starts_with("5e-1,NaN,NaN,NaN,\""), "{row}");
        assert!(row.contains("oversampling"));
    }
}
