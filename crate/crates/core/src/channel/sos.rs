//! Sum-of-sinusoids Rayleigh fading.
//!
//! Each scalar path is a sum of `M` complex Doppler lines
//!
//! ```text
//! h(t) = Σ_m g_m exp(j 2π f cos(φ_m) t),   φ_m = 2π (m + 1/4) / M
//! ```
//!
//! with the arrival angles spread uniformly around the circle and the
//! weights `g_m ~ CN(0, 1/M)` drawn fresh for every path and every
//! realization. The ensemble autocorrelation is the `M`-point trapezoid rule
//! for the Jakes integral, so it equals `J0(2π f τ)` up to a term of order
//! `J_M(2π f τ)`; the Gaussian weights make each sample exactly CN(0, 1)
//! rather than a finite-`M` approximation. The quarter offset keeps all `M`
//! line frequencies distinct.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{config, Error, Result};
use crate::model::SystemConfig;

/// Phasors are recomputed exactly this often to stop rotation drift.
const RESYNC_INTERVAL: usize = 1024;

/// Generator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SosParams {
    /// Complex sinusoids per scalar path, at least 8.
    pub num_sinusoids: usize,
    pub sample_rate_hz: f64,
    pub seed: u64,
}

impl SosParams {
    pub const DEFAULT_SINUSOIDS: usize = 32;
    pub const MIN_SINUSOIDS: usize = 8;
    /// Samples per Doppler cycle used by [`SosParams::for_config`].
    pub const DEFAULT_SAMPLES_PER_CYCLE: f64 = 64.0;
    /// The sample rate may not drop below this many samples per Doppler cycle.
    pub const MIN_SAMPLES_PER_CYCLE: f64 = 32.0;
    /// Minimum samples per packet when the channel is time-varying.
    pub const MIN_SAMPLES_PER_PACKET: f64 = 32.0;

    pub fn new(num_sinusoids: usize, sample_rate_hz: f64, seed: u64) -> Result<Self> {
        if num_sinusoids < Self::MIN_SINUSOIDS {
            return Err(config(format!(
                "num_sinusoids must be >= {}, got {num_sinusoids}",
                Self::MIN_SINUSOIDS
            )));
        }
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(config(format!("sample_rate_hz must be finite and > 0, got {sample_rate_hz}")));
        }
        Ok(Self { num_sinusoids, sample_rate_hz, seed })
    }

    /// Default settings for a link: 32 lines, and a sample rate giving both
    /// 64 samples per Doppler cycle and 64 samples per packet.
    pub fn for_config(cfg: &SystemConfig, seed: u64) -> Self {
        let rate = (Self::DEFAULT_SAMPLES_PER_CYCLE * cfg.max_doppler_hz())
            .max(Self::DEFAULT_SAMPLES_PER_CYCLE / cfg.t_packet_s());
        Self { num_sinusoids: Self::DEFAULT_SINUSOIDS, sample_rate_hz: rate, seed }
    }

    pub fn sample_period_s(&self) -> f64 {
        self.sample_rate_hz.recip()
    }

    /// Checks the oversampling floor `sample_rate >= 32 max(f1, f2)`.
    pub fn check_oversampling(&self, cfg: &SystemConfig) -> Result<()> {
        let floor = Self::MIN_SAMPLES_PER_CYCLE * cfg.max_doppler_hz();
        if self.sample_rate_hz < floor {
            return Err(config(format!(
                "sample rate {} Hz is below the oversampling floor {} Hz (32 x max Doppler)",
                self.sample_rate_hz, floor
            )));
        }
        Ok(())
    }
}

/// Channel vectors of both users sampled over time.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingTrajectory {
    n_antennas: usize,
    sample_period_s: f64,
    // time-major: sample t occupies [t * N, (t + 1) * N)
    samples_u1: Vec<Complex64>,
    samples_u2: Vec<Complex64>,
}

impl FadingTrajectory {
    /// Builds a trajectory from time-major sample arrays.
    pub fn from_samples(
        n_antennas: usize,
        sample_period_s: f64,
        samples_u1: Vec<Complex64>,
        samples_u2: Vec<Complex64>,
    ) -> Result<Self> {
        if n_antennas == 0 {
            return Err(Error::Shape("n_antennas must be >= 1".into()));
        }
        if !(sample_period_s.is_finite() && sample_period_s > 0.0) {
            return Err(config(format!("sample period must be > 0, got {sample_period_s}")));
        }
        if samples_u1.len() != samples_u2.len() || !samples_u1.len().is_multiple_of(n_antennas) {
            return Err(Error::Shape(format!(
                "user arrays of length {} and {} do not form [T x {n_antennas}] matrices",
                samples_u1.len(),
                samples_u2.len()
            )));
        }
        if samples_u1.len() / n_antennas < 2 {
            return Err(Error::Shape("a trajectory needs at least 2 samples".into()));
        }
        Ok(Self { n_antennas, sample_period_s, samples_u1, samples_u2 })
    }

    fn empty(n_antennas: usize, sample_period_s: f64) -> Self {
        Self { n_antennas, sample_period_s, samples_u1: Vec::new(), samples_u2: Vec::new() }
    }

    pub fn n_antennas(&self) -> usize {
        self.n_antennas
    }

    pub fn num_samples(&self) -> usize {
        self.samples_u1.len() / self.n_antennas
    }

    pub fn sample_period_s(&self) -> f64 {
        self.sample_period_s
    }

    /// `h1(t)` at sample index `t`.
    pub fn user1(&self, t: usize) -> &[Complex64] {
        &self.samples_u1[t * self.n_antennas..(t + 1) * self.n_antennas]
    }

    /// `h2(t)` at sample index `t`.
    pub fn user2(&self, t: usize) -> &[Complex64] {
        &self.samples_u2[t * self.n_antennas..(t + 1) * self.n_antennas]
    }

    /// The time series of one scalar path (`user` is 1 or 2).
    pub fn path(&self, user: usize, antenna: usize) -> Vec<Complex64> {
        let data = if user == 1 { &self.samples_u1 } else { &self.samples_u2 };
        data.iter().skip(antenna).step_by(self.n_antennas).copied().collect()
    }

    /// Writes the trajectory as CSV.
    ///
    /// The first line is a comment naming the sample period, seed and antenna
    /// count. The header follows, then one row per sample: the sample index,
    /// then user 1 antennas `0..N` and user 2 antennas `0..N`, each as a
    /// `re,im` pair.
    pub fn write_csv<W: Write>(&self, mut out: W, seed: u64) -> std::io::Result<()> {
        writeln!(
            out,
            "# sample_period_s={:e} seed={} n_antennas={}",
            self.sample_period_s, seed, self.n_antennas
        )?;
        let mut header = vec!["t".to_string()];
        for user in 1..=2 {
            for a in 0..self.n_antennas {
                header.push(format!("u{user}_a{a}_re"));
                header.push(format!("u{user}_a{a}_im"));
            }
        }
        writeln!(out, "{}", header.join(","))?;
        for t in 0..self.num_samples() {
            write!(out, "{t}")?;
            for h in self.user1(t).iter().chain(self.user2(t)) {
                write!(out, ",{:e},{:e}", h.re, h.im)?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Precomputed Doppler lines for one link; draws trajectories on demand.
#[derive(Debug, Clone)]
pub struct SosChannel {
    n_antennas: usize,
    num_sinusoids: usize,
    sample_period_s: f64,
    // angular frequency of each line, per user
    omegas: [Vec<f64>; 2],
    // per-sample rotation e^{j ω Ts}, per user
    steps: [Vec<Complex64>; 2],
}

impl SosChannel {
    pub fn new(cfg: &SystemConfig, sos: &SosParams) -> Result<Self> {
        sos.check_oversampling(cfg)?;
        let m = sos.num_sinusoids;
        let ts = sos.sample_period_s();
        let lines = |doppler_hz: f64| -> Vec<f64> {
            (0..m)
                .map(|k| {
                    let angle = 2.0 * PI * (k as f64 + 0.25) / m as f64;
                    2.0 * PI * doppler_hz * angle.cos()
                })
                .collect()
        };
        let omegas = [lines(cfg.doppler1_hz()), lines(cfg.doppler2_hz())];
        let steps = [
            omegas[0].iter().map(|w| Complex64::from_polar(1.0, w * ts)).collect(),
            omegas[1].iter().map(|w| Complex64::from_polar(1.0, w * ts)).collect(),
        ];
        Ok(Self {
            n_antennas: cfg.n_antennas() as usize,
            num_sinusoids: m,
            sample_period_s: ts,
            omegas,
            steps,
        })
    }

    pub fn sample_period_s(&self) -> f64 {
        self.sample_period_s
    }

    /// Number of samples covering `[0, duration_s]` inclusive.
    pub fn samples_for_duration(&self, duration_s: f64) -> usize {
        (duration_s / self.sample_period_s + 1e-9).floor() as usize + 1
    }

    pub(crate) fn empty_trajectory(&self) -> FadingTrajectory {
        FadingTrajectory::empty(self.n_antennas, self.sample_period_s)
    }

    /// Fills `out` with a fresh realization of `num_samples` samples.
    pub(crate) fn fill<R: Rng>(&self, rng: &mut R, num_samples: usize, out: &mut FadingTrajectory) {
        let n = self.n_antennas;
        let m = self.num_sinusoids;
        let scale = (0.5 / m as f64).sqrt();
        out.n_antennas = n;
        out.sample_period_s = self.sample_period_s;
        let mut weights = vec![Complex64::new(0.0, 0.0); m];
        let mut phasors = vec![Complex64::new(0.0, 0.0); m];
        for user in 0..2 {
            let data = if user == 0 { &mut out.samples_u1 } else { &mut out.samples_u2 };
            data.clear();
            data.resize(num_samples * n, Complex64::new(0.0, 0.0));
            for antenna in 0..n {
                for w in weights.iter_mut() {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    *w = Complex64::new(re, im) * scale;
                }
                for t in 0..num_samples {
                    if t % RESYNC_INTERVAL == 0 {
                        let time = t as f64 * self.sample_period_s;
                        for ((p, w), omega) in phasors.iter_mut().zip(&weights).zip(&self.omegas[user]) {
                            *p = w * Complex64::from_polar(1.0, omega * time);
                        }
                    }
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (p, step) in phasors.iter_mut().zip(&self.steps[user]) {
                        acc += *p;
                        *p *= step;
                    }
                    data[t * n + antenna] = acc;
                }
            }
        }
    }

    /// Draws one trajectory of `num_samples >= 1` samples.
    pub fn draw<R: Rng>(&self, rng: &mut R, num_samples: usize) -> FadingTrajectory {
        let mut out = FadingTrajectory::empty(self.n_antennas, self.sample_period_s);
        self.fill(rng, num_samples, &mut out);
        out
    }
}

/// Seeded generator for realization `stream` under `seed`.
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generates a fading trajectory of length `duration_s` for both users.
///
/// Deterministic in `(sos.seed, cfg, sos, duration_s)`.
pub fn generate_trajectory(cfg: &SystemConfig, sos: &SosParams, duration_s: f64) -> Result<FadingTrajectory> {
    if !(duration_s.is_finite() && duration_s >= 2.0 * sos.sample_period_s() * (1.0 - 1e-12)) {
        return Err(config(format!(
            "duration {duration_s} s is shorter than two sample periods ({} s)",
            2.0 * sos.sample_period_s()
        )));
    }
    let channel = SosChannel::new(cfg, sos)?;
    let num_samples = channel.samples_for_duration(duration_s);
    Ok(channel.draw(&mut stream_rng(sos.seed, 0), num_samples))
}
