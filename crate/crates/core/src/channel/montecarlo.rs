//! Packet-level and crossing-rate Monte-Carlo drivers.
//!
//! Every packet (or segment, or snapshot block) draws its channel from its own
//! ChaCha stream, indexed by its global position. Batches only decide which
//! thread processes which index range, so merged counts do not depend on the
//! batch count.

use rayon::prelude::*;

use super::estimate::{count_down_crossings, McEstimate};
use super::receiver::sinr_pair;
use super::sos::{stream_rng, SosChannel, SosParams};
use crate::error::{config, Result};
use crate::model::SystemConfig;

/// Below this many stage-1 successes the conditional stage-2 estimate is
/// flagged as low confidence.
pub const MIN_CONDITIONING_PACKETS: u64 = 100;

/// Batches used by [`simulate_per`].
const DEFAULT_BATCHES: usize = 64;

// Stream offsets keep the three drivers on disjoint random streams.
const SEGMENT_STREAM_BASE: u64 = 1 << 62;
const SNAPSHOT_STREAM_BASE: u64 = 1 << 63;
const SNAPSHOT_BLOCK: usize = 4096;

/// Raw event counts over a set of packets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PacketCounts {
    pub packets: u64,
    pub stage1_errors: u64,
    /// Packets without a stage-1 error.
    pub stage2_trials: u64,
    /// Stage-2 errors among `stage2_trials`.
    pub stage2_cond_errors: u64,
    /// Packets with a stage-1 error or a stage-2 error.
    pub stage2_uncond_errors: u64,
    /// Packets whose first sample is in stage-1 outage.
    pub outage1: u64,
    /// Packets whose first sample is in stage-2 outage.
    pub outage2: u64,
}

impl PacketCounts {
    pub fn merge(self, other: Self) -> Self {
        Self {
            packets: self.packets + other.packets,
            stage1_errors: self.stage1_errors + other.stage1_errors,
            stage2_trials: self.stage2_trials + other.stage2_trials,
            stage2_cond_errors: self.stage2_cond_errors + other.stage2_cond_errors,
            stage2_uncond_errors: self.stage2_uncond_errors + other.stage2_uncond_errors,
            outage1: self.outage1 + other.outage1,
            outage2: self.outage2 + other.outage2,
        }
    }

    pub fn estimates(&self) -> PerEstimates {
        PerEstimates {
            stage1: McEstimate::bernoulli(self.stage1_errors, self.packets),
            stage2_conditional: McEstimate::bernoulli(self.stage2_cond_errors, self.stage2_trials),
            stage2_unconditional: McEstimate::bernoulli(self.stage2_uncond_errors, self.packets),
            low_confidence: self.stage2_trials < MIN_CONDITIONING_PACKETS,
        }
    }
}

/// Packet error rates estimated by simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerEstimates {
    pub stage1: McEstimate,
    /// NaN when every packet failed at stage 1.
    pub stage2_conditional: McEstimate,
    pub stage2_unconditional: McEstimate,
    /// Fewer than [`MIN_CONDITIONING_PACKETS`] packets conditioned stage 2.
    pub low_confidence: bool,
}

fn check_packet_sampling(cfg: &SystemConfig, sos: &SosParams) -> Result<()> {
    sos.check_oversampling(cfg)?;
    let per_packet = cfg.t_packet_s() * sos.sample_rate_hz;
    if cfg.max_doppler_hz() > 0.0 && per_packet < SosParams::MIN_SAMPLES_PER_PACKET * (1.0 - 1e-12) {
        return Err(config(format!(
            "packet of {} s holds only {per_packet:.3} samples at {} Hz; at least 32 are required",
            cfg.t_packet_s(),
            sos.sample_rate_hz
        )));
    }
    Ok(())
}

fn batch_ranges(total: u64, batches: usize) -> Vec<(u64, u64)> {
    let b = (batches.max(1) as u64).min(total.max(1));
    (0..b).map(|i| (i * total / b, (i + 1) * total / b)).collect()
}

/// Simulates packets `[0, num_packets)` split over `batches` parallel batches.
pub fn simulate_packets(
    cfg: &SystemConfig,
    sos: &SosParams,
    num_packets: u64,
    batches: usize,
) -> Result<PacketCounts> {
    if num_packets == 0 {
        return Err(config("num_packets must be >= 1"));
    }
    check_packet_sampling(cfg, sos)?;
    let channel = SosChannel::new(cfg, sos)?;
    let samples = channel.samples_for_duration(cfg.t_packet_s());
    let threshold = cfg.gamma_th();
    let counts = batch_ranges(num_packets, batches)
        .into_par_iter()
        .map(|(start, end)| {
            let mut counts = PacketCounts::default();
            let mut traj = channel.empty_trajectory();
            for packet in start..end {
                channel.fill(&mut stream_rng(sos.seed, packet), samples, &mut traj);
                let mut min1 = f64::INFINITY;
                let mut min2 = f64::INFINITY;
                for t in 0..samples {
                    let (g1, g2) = sinr_pair(traj.user1(t), traj.user2(t), cfg);
                    if t == 0 {
                        counts.outage1 += (g1 < threshold) as u64;
                        counts.outage2 += (g2 < threshold) as u64;
                    }
                    min1 = min1.min(g1);
                    min2 = min2.min(g2);
                }
                let err1 = min1 < threshold;
                let err2 = min2 < threshold;
                counts.packets += 1;
                counts.stage1_errors += err1 as u64;
                counts.stage2_uncond_errors += (err1 || err2) as u64;
                if !err1 {
                    counts.stage2_trials += 1;
                    counts.stage2_cond_errors += err2 as u64;
                }
            }
            counts
        })
        .reduce(PacketCounts::default, PacketCounts::merge);
    Ok(counts)
}

/// Packet error rates over `num_packets` independent packets.
pub fn simulate_per(cfg: &SystemConfig, sos: &SosParams, num_packets: u64) -> Result<PerEstimates> {
    simulate_per_batched(cfg, sos, num_packets, DEFAULT_BATCHES)
}

/// [`simulate_per`] with an explicit batch count; the result does not depend on it.
pub fn simulate_per_batched(
    cfg: &SystemConfig,
    sos: &SosParams,
    num_packets: u64,
    batches: usize,
) -> Result<PerEstimates> {
    Ok(simulate_packets(cfg, sos, num_packets, batches)?.estimates())
}

/// Crossing rates and time-averaged CDFs measured on long segments.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingRates {
    pub thresholds: Vec<f64>,
    /// Down-crossing rate of γ1 per threshold, crossings per second.
    pub lcr1: Vec<McEstimate>,
    pub lcr2: Vec<McEstimate>,
    /// Fraction of samples below each threshold.
    pub cdf1: Vec<McEstimate>,
    pub cdf2: Vec<McEstimate>,
    /// Simulated time summed over all segments.
    pub total_duration_s: f64,
}

/// Runs `segments` independent realizations of `segment_duration_s` each and
/// measures crossing rates of both SINR series at every threshold.
///
/// Standard errors come from the spread across segments, which are i.i.d.
pub fn simulate_crossing_rates(
    cfg: &SystemConfig,
    sos: &SosParams,
    segments: u64,
    segment_duration_s: f64,
    thresholds: &[f64],
    batches: usize,
) -> Result<CrossingRates> {
    if segments < 2 {
        return Err(config("at least two segments are needed for a standard error"));
    }
    sos.check_oversampling(cfg)?;
    let channel = SosChannel::new(cfg, sos)?;
    let samples = channel.samples_for_duration(segment_duration_s);
    if samples < 2 {
        return Err(config("segment shorter than two samples"));
    }
    let span = (samples - 1) as f64 * channel.sample_period_s();
    let k = thresholds.len();
    // Per segment: crossings1, crossings2, below1, below2 per threshold.
    let per_segment: Vec<Vec<[u64; 4]>> = batch_ranges(segments, batches)
        .into_par_iter()
        .flat_map_iter(|(start, end)| {
            let mut g1 = vec![0.0; samples];
            let mut g2 = vec![0.0; samples];
            let mut traj = channel.empty_trajectory();
            (start..end)
                .map(|segment| {
                    channel.fill(&mut stream_rng(sos.seed, SEGMENT_STREAM_BASE + segment), samples, &mut traj);
                    for t in 0..samples {
                        (g1[t], g2[t]) = sinr_pair(traj.user1(t), traj.user2(t), cfg);
                    }
                    thresholds
                        .iter()
                        .map(|&th| {
                            [
                                count_down_crossings(&g1, th),
                                count_down_crossings(&g2, th),
                                g1.iter().filter(|&&v| v < th).count() as u64,
                                g2.iter().filter(|&&v| v < th).count() as u64,
                            ]
                        })
                        .collect::<Vec<_>>()
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let transitions = segments * (samples as u64 - 1);
    let summarize = |j: usize, col: usize, scale: f64, trials: u64| -> McEstimate {
        let values: Vec<f64> = per_segment.iter().map(|s| s[j][col] as f64 / scale).collect();
        McEstimate::from_batches(&values, trials)
    };
    let total_samples = segments * samples as u64;
    Ok(CrossingRates {
        thresholds: thresholds.to_vec(),
        lcr1: (0..k).map(|j| summarize(j, 0, span, transitions)).collect(),
        lcr2: (0..k).map(|j| summarize(j, 1, span, transitions)).collect(),
        cdf1: (0..k).map(|j| summarize(j, 2, samples as f64, total_samples)).collect(),
        cdf2: (0..k).map(|j| summarize(j, 3, samples as f64, total_samples)).collect(),
        total_duration_s: span * segments as f64,
    })
}

/// `count` independent draws of `(γ1, γ2)`, one per channel realization.
pub fn sample_sinr_snapshots(cfg: &SystemConfig, sos: &SosParams, count: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if count == 0 {
        return Err(config("count must be >= 1"));
    }
    let channel = SosChannel::new(cfg, sos)?;
    let blocks = count.div_ceil(SNAPSHOT_BLOCK);
    let pairs: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .flat_map_iter(|block| {
            let mut rng = stream_rng(sos.seed, SNAPSHOT_STREAM_BASE + block as u64);
            let len = SNAPSHOT_BLOCK.min(count - block * SNAPSHOT_BLOCK);
            let mut traj = channel.draw(&mut rng, 1);
            let mut out = Vec::with_capacity(len);
            out.push(sinr_pair(traj.user1(0), traj.user2(0), cfg));
            for _ in 1..len {
                channel.fill(&mut rng, 1, &mut traj);
                out.push(sinr_pair(traj.user1(0), traj.user2(0), cfg));
            }
            out
        })
        .collect();
    Ok(pairs.into_iter().unzip())
}
