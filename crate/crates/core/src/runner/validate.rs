//! Side-by-side comparison of closed forms and simulation.

use std::fmt::Write as _;

use crate::analytic::{cdf_gamma1, cdf_gamma2, lcr_gamma1, lcr_gamma2, per_stage2_bound};
use crate::channel::{simulate_crossing_rates, simulate_packets, McEstimate, SosParams, MIN_CONDITIONING_PACKETS};
use crate::error::Result;
use crate::model::SystemConfig;

/// Below this many expected events a comparison is flagged low-confidence.
const MIN_EXPECTED_EVENTS: f64 = 10.0;
/// Relative slack allowed on crossing rates on top of three standard errors.
const LCR_RELATIVE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CheckStatus {
    Pass,
    /// Inconclusive: too few trials or events to judge.
    Warn,
    Fail,
}

impl CheckStatus {
    pub fn label(self) -> &'static str {
        match self {
            Self::Pass => "PASS",
            Self::Warn => "WARN",
            Self::Fail => "FAIL",
        }
    }

    /// Process exit code: 0 pass, 2 warn, 1 fail.
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Pass => 0,
            Self::Warn => 2,
            Self::Fail => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub analytic: f64,
    pub simulated: McEstimate,
    /// Largest admissible |simulated − analytic| (one-sided for the bound).
    pub tolerance: f64,
    pub status: CheckStatus,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub status: CheckStatus,
}

impl ValidationReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<12} {:>13} {:>13} {:>11} {:>11}  {:<6} note",
            "check", "analytic", "simulated", "std_error", "tolerance", "status"
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<12} {:>13.6e} {:>13.6e} {:>11.3e} {:>11.3e}  {:<6} {}",
                c.name,
                c.analytic,
                c.simulated.mean,
                c.simulated.std_error,
                c.tolerance,
                c.status.label(),
                c.note
            );
        }
        let _ = writeln!(out, "overall: {}", self.status.label());
        out
    }
}

/// Two-sided proportion check: passes within three standard errors, using
/// the larger of the simulated error and the error implied by the analytic
/// value.
fn proportion_check(name: &'static str, analytic: f64, sim: McEstimate, extra_note: Option<&str>) -> Check {
    let n = sim.num_trials as f64;
    let null_se = (analytic * (1.0 - analytic) / n).sqrt();
    let tolerance = 3.0 * sim.std_error.max(null_se);
    let expected = analytic.min(1.0 - analytic) * n;
    let mut notes = Vec::new();
    let mut status = if (sim.mean - analytic).abs() <= tolerance { CheckStatus::Pass } else { CheckStatus::Fail };
    if sim.num_trials < MIN_CONDITIONING_PACKETS || expected < MIN_EXPECTED_EVENTS || sim.mean.is_nan() {
        status = CheckStatus::Warn;
        notes.push(format!("low confidence ({} trials, {:.1} expected events)", sim.num_trials, expected));
    }
    notes.extend(extra_note.map(str::to_string));
    Check { name, analytic, simulated: sim, tolerance, status, note: notes.join("; ") }
}

fn lcr_check(name: &'static str, analytic: f64, sim: McEstimate, duration_s: f64) -> Check {
    let tolerance = (LCR_RELATIVE_TOLERANCE * analytic).max(3.0 * sim.std_error);
    let expected = analytic * duration_s;
    let mut status = if (sim.mean - analytic).abs() <= tolerance { CheckStatus::Pass } else { CheckStatus::Fail };
    let mut note = format!("{:.1} s simulated", duration_s);
    if analytic > 0.0 && expected < MIN_EXPECTED_EVENTS {
        status = CheckStatus::Warn;
        note.push_str(&format!("; low confidence ({expected:.1} expected crossings)"));
    }
    Check { name, analytic, simulated: sim, tolerance, status, note }
}

/// Compares outage, crossing-rate and PER closed forms at `cfg` against the
/// simulator.
///
/// Packet-level quantities use `num_packets` packets. Crossing rates use
/// independent segments whose total length grows with `num_packets`; on a
/// static channel both rates are exactly zero and no segments are drawn.
pub fn run_validation(
    cfg: &SystemConfig,
    sos: &SosParams,
    num_packets: u64,
    batches: usize,
) -> Result<ValidationReport> {
    let g = cfg.gamma_th();
    let counts = simulate_packets(cfg, sos, num_packets, batches)?;
    let per = counts.estimates();
    let bound = per_stage2_bound(cfg);

    let mut checks = vec![
        proportion_check("cdf1", cdf_gamma1(cfg, g)?, McEstimate::bernoulli(counts.outage1, counts.packets), None),
        proportion_check("cdf2", cdf_gamma2(cfg, g)?, McEstimate::bernoulli(counts.outage2, counts.packets), None),
    ];

    let (lcr1, lcr2) = (lcr_gamma1(cfg, g)?, lcr_gamma2(cfg, g)?);
    if cfg.max_doppler_hz() > 0.0 {
        let segments = (num_packets / 100).clamp(20, 2000);
        let segment_s = (10.0 / cfg.max_doppler_hz()).max(0.05);
        let r = simulate_crossing_rates(cfg, sos, segments, segment_s, &[g], batches)?;
        checks.push(lcr_check("lcr1", lcr1, r.lcr1[0], r.total_duration_s));
        checks.push(lcr_check("lcr2", lcr2, r.lcr2[0], r.total_duration_s));
    } else {
        let zero = McEstimate { mean: 0.0, std_error: 0.0, num_trials: 1 };
        for (name, a) in [("lcr1", lcr1), ("lcr2", lcr2)] {
            let status = if a == 0.0 { CheckStatus::Pass } else { CheckStatus::Fail };
            checks.push(Check { name, analytic: a, simulated: zero, tolerance: 0.0, status, note: "static channel".into() });
        }
    }

    checks.push(proportion_check("per1", bound.stage1.total, per.stage1, None));
    let cond_note = per.low_confidence.then_some("few packets survive stage 1");
    let mut cond = proportion_check("per2_cond", bound.stage2_conditional.total, per.stage2_conditional, cond_note);
    if per.low_confidence {
        cond.status = CheckStatus::Warn;
    }
    checks.push(cond);

    let unc = per.stage2_unconditional;
    let tolerance = 3.0 * unc.std_error;
    let mut status = if bound.clamped >= unc.mean - tolerance { CheckStatus::Pass } else { CheckStatus::Fail };
    let mut note = String::from("bound must not fall below simulation");
    if unc.num_trials < MIN_CONDITIONING_PACKETS {
        status = CheckStatus::Warn;
        note.push_str("; low confidence");
    }
    checks.push(Check { name: "per2_bound", analytic: bound.clamped, simulated: unc, tolerance, status, note });

    let status = checks.iter().map(|c| c.status).max().unwrap_or(CheckStatus::Pass);
    Ok(ValidationReport { checks, status })
}
