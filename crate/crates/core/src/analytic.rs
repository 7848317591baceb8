//! Closed-form outage, level-crossing and packet-error expressions.
//!
//! Stage 1 decodes user 1 with the matched filter `v1 = h1 / ‖h1‖`, treating
//! user 2 as interference:
//!
//! ```text
//! γ1 = ρ α1 ‖h1‖² / (ρ α2 |v1ᴴ h2|² + 1)
//! ```
//!
//! Stage 2 sees user 2 alone after cancellation, `γ2 = ρ α2 ‖h2‖²`, with
//! `ρ = p / N0`. Both are evaluated at a threshold `γ_th`, and the packet error
//! rate follows the two-state Markov (good/bad) model
//!
//! ```text
//! PER = 1 - exp(-Tp LCR / (1 - F)) (1 - F)
//! ```

use crate::error::{domain, Result};
use crate::model::{PerBreakdown, SystemConfig};
use crate::special::{erlang_cdf_pair, ln_gamma, ln_upper_gamma, log_add_exp, LN_SQRT_2PI};

/// `1 - F` below this is treated as zero and the PER pinned to 1.
pub const DEGENERATE_SURVIVAL: f64 = 1e-300;

const MAX_TAIL_TERMS: usize = 1_000_000;
/// Below e^-745 a double underflows to zero.
const LN_UNDERFLOW: f64 = -745.0;

/// The two successive-interference-cancellation detection stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    /// User 1 detected in the presence of user 2.
    Stage1,
    /// User 2 detected after user 1 has been cancelled.
    Stage2,
}

fn check_threshold(gamma_th: f64, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero { gamma_th >= 0.0 } else { gamma_th > 0.0 };
    if gamma_th.is_nan() || !ok {
        let bound = if allow_zero { ">= 0" } else { "> 0" };
        return Err(domain(format!("gamma_th must be {bound}, got {gamma_th}")));
    }
    Ok(())
}

/// CDF of the stage-1 SINR, `F_{γ1}(γ_th)`.
pub fn cdf_gamma1(cfg: &SystemConfig, gamma_th: f64) -> Result<f64> {
    check_threshold(gamma_th, true)?;
    Ok(cdf_gamma1_pair(cfg, gamma_th).0)
}

/// `(F, 1 - F)` for γ1.
///
/// With `c = γ/α1 + 1/α2`, `r = (γ/α1)/c` and `z = c/ρ`, the double sum
/// collapses to `1 - F = Σ_{k<N} e^{-γ/(ρα1)} r^k e_k(z) / (α2 c)`, where
/// `e_k(z) = Σ_{l<=k} z^l / l!`. Summing the same terms for `k >= N` gives
/// `F` itself, which is used when `F < 1/2` to avoid cancellation.
pub(crate) fn cdf_gamma1_pair(cfg: &SystemConfig, gamma_th: f64) -> (f64, f64) {
    if gamma_th == 0.0 {
        return (0.0, 1.0);
    }
    if gamma_th.is_infinite() {
        return (1.0, 0.0);
    }
    let a1 = cfg.alpha1();
    let a2 = cfg.alpha2();
    let rho = cfg.snr_linear();
    let g_over_a1 = gamma_th / a1;
    let c = g_over_a1 + a2.recip();
    let ln_r = (g_over_a1 / c).ln();
    let z = c / rho;
    let ln_z = z.ln();
    let base = -gamma_th / (rho * a1) - (a2 * c).ln();

    let mut ln_e = 0.0;
    let mut ln_fact = 0.0;
    let mut survive = 0.0;
    for k in 0..cfg.n_antennas() {
        let kf = f64::from(k);
        if k > 0 {
            ln_fact += kf.ln();
            ln_e = log_add_exp(ln_e, kf * ln_z - ln_fact);
        }
        survive += (base + kf * ln_r + ln_e).exp();
    }
    if survive <= 0.5 {
        return ((1.0 - survive).max(0.0), survive);
    }

    // Tail Σ_{k>=N}. Each term is bounded by e^{base + k ln r + z}, which
    // bounds what is left once it drops far enough.
    let ln_one_minus_r = (-ln_r.exp()).ln_1p();
    let mut tail = 0.0;
    let mut k = f64::from(cfg.n_antennas());
    for _ in 0..MAX_TAIL_TERMS {
        ln_fact += k.ln();
        ln_e = log_add_exp(ln_e, k * ln_z - ln_fact);
        tail += (base + k * ln_r + ln_e).exp();
        let ln_rest = base + (k + 1.0) * ln_r + z - ln_one_minus_r;
        if ln_rest < LN_UNDERFLOW || (tail > 0.0 && ln_rest < tail.ln() - 39.0) {
            break;
        }
        k += 1.0;
    }
    (tail.min(1.0), survive.min(1.0))
}

/// CDF of the stage-2 SNR, `F_{γ2}(γ_th)`, an Erlang CDF at `γ_th / (ρ α2)`.
pub fn cdf_gamma2(cfg: &SystemConfig, gamma_th: f64) -> Result<f64> {
    check_threshold(gamma_th, true)?;
    Ok(cdf_gamma2_pair(cfg, gamma_th).0)
}

pub(crate) fn cdf_gamma2_pair(cfg: &SystemConfig, gamma_th: f64) -> (f64, f64) {
    erlang_cdf_pair(cfg.n_antennas(), gamma_th / (cfg.snr_linear() * cfg.alpha2()))
}

/// Level crossing rate of γ1 at `γ_th`, crossings per second.
///
/// Rice's formula with the combining vector held fixed over the derivative.
/// Writing `A = γ f1² α1 / ρ`, `B = γ f1² α1 + γ² f2² α2`, `D = B/ρ - A`,
/// `λ = c / B` and `w = λ A`:
///
/// ```text
/// LCR1 = sqrt(2π) e^{w - γ/(ρα1)} γ^{N-1} / (α2 α1^N B^N)
///        × Σ_l D^{N-1-l} Γ(l + 3/2, w) / (l! (N-1-l)! λ^{l+3/2})
/// ```
///
/// Only one Doppler needs to be nonzero for the rate to be positive.
pub fn lcr_gamma1(cfg: &SystemConfig, gamma_th: f64) -> Result<f64> {
    check_threshold(gamma_th, false)?;
    Ok(lcr_gamma1_unchecked(cfg, gamma_th))
}

fn lcr_gamma1_unchecked(cfg: &SystemConfig, gamma_th: f64) -> f64 {
    let f1 = cfg.doppler1_hz();
    let f2 = cfg.doppler2_hz();
    if f1 == 0.0 && f2 == 0.0 {
        return 0.0;
    }
    let n = cfg.n_antennas();
    let nf = f64::from(n);
    let a1 = cfg.alpha1();
    let a2 = cfg.alpha2();
    let rho = cfg.snr_linear();
    let g = gamma_th;

    let a_coef = g * f1 * f1 * a1 / rho;
    let b_coef = g * f1 * f1 * a1 + g * g * f2 * f2 * a2;
    let d_coef = g * g * f2 * f2 * a2 / rho;
    let c = a2.recip() + g / a1;
    let lambda = c / b_coef;
    let w = lambda * a_coef;

    let ln_prefactor = LN_SQRT_2PI - g / (rho * a1) + w + (nf - 1.0) * g.ln()
        - a2.ln()
        - nf * a1.ln()
        - nf * b_coef.ln();
    let ln_lambda = lambda.ln();
    let ln_d = d_coef.ln();

    let mut ln_sum = f64::NEG_INFINITY;
    for l in 0..n {
        let power = n - 1 - l;
        let ln_d_term = if power == 0 {
            0.0
        } else if d_coef == 0.0 {
            continue;
        } else {
            f64::from(power) * ln_d
        };
        let lf = f64::from(l);
        let shape = lf + 1.5;
        let term = ln_d_term - ln_gamma(lf + 1.0) - ln_gamma(f64::from(power) + 1.0)
            - shape * ln_lambda
            + ln_upper_gamma(shape, w);
        ln_sum = log_add_exp(ln_sum, term);
    }
    (ln_prefactor + ln_sum).exp()
}

/// Level crossing rate of γ2 at `γ_th`:
/// `sqrt(2π) f2 x^{N-1/2} e^{-x} / Γ(N)` with `x = γ_th / (ρ α2)`.
pub fn lcr_gamma2(cfg: &SystemConfig, gamma_th: f64) -> Result<f64> {
    check_threshold(gamma_th, false)?;
    Ok(lcr_gamma2_unchecked(cfg, gamma_th))
}

fn lcr_gamma2_unchecked(cfg: &SystemConfig, gamma_th: f64) -> f64 {
    let f2 = cfg.doppler2_hz();
    if f2 == 0.0 {
        return 0.0;
    }
    let nf = f64::from(cfg.n_antennas());
    let x = gamma_th / (cfg.snr_linear() * cfg.alpha2());
    (LN_SQRT_2PI + f2.ln() + (nf - 0.5) * x.ln() - x - ln_gamma(nf)).exp()
}

pub fn cdf(stage: Stage, cfg: &SystemConfig, gamma_th: f64) -> Result<f64> {
    match stage {
        Stage::Stage1 => cdf_gamma1(cfg, gamma_th),
        Stage::Stage2 => cdf_gamma2(cfg, gamma_th),
    }
}

pub fn lcr(stage: Stage, cfg: &SystemConfig, gamma_th: f64) -> Result<f64> {
    match stage {
        Stage::Stage1 => lcr_gamma1(cfg, gamma_th),
        Stage::Stage2 => lcr_gamma2(cfg, gamma_th),
    }
}

/// Markov-model PER from the outage pair and the crossing rate.
fn markov_per(outage: f64, survive: f64, lcr: f64, t_packet_s: f64) -> PerBreakdown {
    let lcr_penalty = t_packet_s * lcr;
    if survive < DEGENERATE_SURVIVAL {
        return PerBreakdown { total: 1.0, outage_term: 1.0, lcr_penalty, degenerate: true };
    }
    let ln_survive = if outage < 0.5 { (-outage).ln_1p() } else { survive.ln() };
    let total = -(ln_survive - lcr_penalty / survive).exp_m1();
    PerBreakdown {
        total: total.clamp(0.0, 1.0),
        outage_term: outage,
        lcr_penalty,
        degenerate: false,
    }
}

/// Stage-1 packet error rate.
pub fn per_stage1(cfg: &SystemConfig) -> PerBreakdown {
    let (f, s) = cdf_gamma1_pair(cfg, cfg.gamma_th());
    markov_per(f, s, lcr_gamma1_unchecked(cfg, cfg.gamma_th()), cfg.t_packet_s())
}

/// Stage-2 packet error rate given that stage 1 decoded correctly.
pub fn per_stage2_conditional(cfg: &SystemConfig) -> PerBreakdown {
    let (f, s) = cdf_gamma2_pair(cfg, cfg.gamma_th());
    markov_per(f, s, lcr_gamma2_unchecked(cfg, cfg.gamma_th()), cfg.t_packet_s())
}

pub fn per_stage(stage: Stage, cfg: &SystemConfig) -> PerBreakdown {
    match stage {
        Stage::Stage1 => per_stage1(cfg),
        Stage::Stage2 => per_stage2_conditional(cfg),
    }
}

/// Union bound on the unconditional stage-2 PER.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnionBound {
    /// Sum of the two stage PERs; may exceed 1 at low SNR.
    pub raw: f64,
    /// `min(raw, 1)`, usable as a probability.
    pub clamped: f64,
    pub stage1: PerBreakdown,
    pub stage2_conditional: PerBreakdown,
}

pub fn per_stage2_bound(cfg: &SystemConfig) -> UnionBound {
    let stage1 = per_stage1(cfg);
    let stage2_conditional = per_stage2_conditional(cfg);
    let raw = stage1.total + stage2_conditional.total;
    UnionBound { raw, clamped: raw.min(1.0), stage1, stage2_conditional }
}

/// First-order expansion of the stage-1 PER: `F1 + Tp LCR1`.
pub fn per_stage1_asymptotic(cfg: &SystemConfig) -> f64 {
    let f = cdf_gamma1_pair(cfg, cfg.gamma_th()).0;
    f + cfg.t_packet_s() * lcr_gamma1_unchecked(cfg, cfg.gamma_th())
}

/// First-order expansion of the stage-2 PER: `F1 + F2 + Tp (LCR1 + LCR2)`.
pub fn per_stage2_asymptotic(cfg: &SystemConfig) -> f64 {
    let f2 = cdf_gamma2_pair(cfg, cfg.gamma_th()).0;
    per_stage1_asymptotic(cfg) + f2 + cfg.t_packet_s() * lcr_gamma2_unchecked(cfg, cfg.gamma_th())
}
