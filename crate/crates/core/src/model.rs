//! Link parameterization shared by every layer.

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Maximum Doppler frequency of one user, optionally with the speed and
/// carrier it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MobilityProfile {
    speed_mps: Option<f64>,
    carrier_hz: Option<f64>,
    doppler_hz: f64,
}

impl MobilityProfile {
    pub fn from_doppler(doppler_hz: f64) -> Result<Self> {
        if !doppler_hz.is_finite() || doppler_hz < 0.0 {
            return Err(config(format!("doppler_hz must be finite and >= 0, got {doppler_hz}")));
        }
        Ok(Self { speed_mps: None, carrier_hz: None, doppler_hz })
    }

    /// `f = v / λ` with `λ = c / f_c`.
    pub fn from_speed(speed_mps: f64, carrier_hz: f64) -> Result<Self> {
        if !speed_mps.is_finite() || speed_mps < 0.0 {
            return Err(config(format!("speed must be finite and >= 0, got {speed_mps} m/s")));
        }
        if !carrier_hz.is_finite() || carrier_hz <= 0.0 {
            return Err(config(format!("carrier frequency must be finite and > 0, got {carrier_hz} Hz")));
        }
        let wavelength = SPEED_OF_LIGHT / carrier_hz;
        Ok(Self {
            speed_mps: Some(speed_mps),
            carrier_hz: Some(carrier_hz),
            doppler_hz: speed_mps / wavelength,
        })
    }

    pub fn stationary() -> Self {
        Self { speed_mps: None, carrier_hz: None, doppler_hz: 0.0 }
    }

    pub fn doppler_hz(&self) -> f64 {
        self.doppler_hz
    }

    pub fn speed_mps(&self) -> Option<f64> {
        self.speed_mps
    }

    pub fn carrier_hz(&self) -> Option<f64> {
        self.carrier_hz
    }
}

/// Full parameterization of the two-user uplink.
///
/// Transmit power and noise enter every expression only through their ratio,
/// so only `snr_linear = p / N0` is stored. `alpha2` is always `1 - alpha1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    n_antennas: u32,
    alpha1: f64,
    snr_linear: f64,
    gamma_th: f64,
    t_packet_s: f64,
    mobility: [MobilityProfile; 2],
}

impl SystemConfig {
    pub fn new(
        n_antennas: u32,
        alpha1: f64,
        snr_linear: f64,
        gamma_th: f64,
        t_packet_s: f64,
        mobility_u1: MobilityProfile,
        mobility_u2: MobilityProfile,
    ) -> Result<Self> {
        if n_antennas == 0 {
            return Err(config("n_antennas must be >= 1"));
        }
        if !(alpha1.is_finite() && alpha1 > 0.0 && alpha1 < 1.0) {
            return Err(config(format!("alpha1 must lie in the open interval (0, 1), got {alpha1}")));
        }
        if !(snr_linear.is_finite() && snr_linear > 0.0) {
            return Err(config(format!("snr_linear must be finite and > 0, got {snr_linear}")));
        }
        if !(gamma_th.is_finite() && gamma_th > 0.0) {
            return Err(config(format!("gamma_th must be finite and > 0, got {gamma_th}")));
        }
        if !(t_packet_s.is_finite() && t_packet_s > 0.0) {
            return Err(config(format!("t_packet_s must be finite and > 0, got {t_packet_s}")));
        }
        Ok(Self {
            n_antennas,
            alpha1,
            snr_linear,
            gamma_th,
            t_packet_s,
            mobility: [mobility_u1, mobility_u2],
        })
    }

    pub fn n_antennas(&self) -> u32 {
        self.n_antennas
    }

    pub fn alpha1(&self) -> f64 {
        self.alpha1
    }

    pub fn alpha2(&self) -> f64 {
        1.0 - self.alpha1
    }

    pub fn snr_linear(&self) -> f64 {
        self.snr_linear
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * self.snr_linear.log10()
    }

    pub fn gamma_th(&self) -> f64 {
        self.gamma_th
    }

    pub fn t_packet_s(&self) -> f64 {
        self.t_packet_s
    }

    pub fn mobility_u1(&self) -> &MobilityProfile {
        &self.mobility[0]
    }

    pub fn mobility_u2(&self) -> &MobilityProfile {
        &self.mobility[1]
    }

    pub fn doppler1_hz(&self) -> f64 {
        self.mobility[0].doppler_hz
    }

    pub fn doppler2_hz(&self) -> f64 {
        self.mobility[1].doppler_hz
    }

    pub fn max_doppler_hz(&self) -> f64 {
        self.doppler1_hz().max(self.doppler2_hz())
    }

    fn rebuild(mut self, f: impl FnOnce(&mut Self)) -> Result<Self> {
        f(&mut self);
        Self::new(
            self.n_antennas,
            self.alpha1,
            self.snr_linear,
            self.gamma_th,
            self.t_packet_s,
            self.mobility[0],
            self.mobility[1],
        )
    }

    pub fn with_alpha1(&self, alpha1: f64) -> Result<Self> {
        self.rebuild(|c| c.alpha1 = alpha1)
    }

    pub fn with_snr_linear(&self, snr_linear: f64) -> Result<Self> {
        self.rebuild(|c| c.snr_linear = snr_linear)
    }

    pub fn with_gamma_th(&self, gamma_th: f64) -> Result<Self> {
        self.rebuild(|c| c.gamma_th = gamma_th)
    }

    pub fn with_n_antennas(&self, n_antennas: u32) -> Result<Self> {
        self.rebuild(|c| c.n_antennas = n_antennas)
    }

    pub fn with_t_packet_s(&self, t_packet_s: f64) -> Result<Self> {
        self.rebuild(|c| c.t_packet_s = t_packet_s)
    }

    pub fn with_mobility(&self, u1: MobilityProfile, u2: MobilityProfile) -> Result<Self> {
        self.rebuild(|c| c.mobility = [u1, u2])
    }
}

/// A packet error rate split into the outage floor and the crossing penalty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerBreakdown {
    /// The PER itself, in [0, 1].
    pub total: f64,
    /// `F(γ_th)`, the outage probability at the stage.
    pub outage_term: f64,
    /// `Tp · LCR(γ_th)`.
    pub lcr_penalty: f64,
    /// Set when `1 - F` underflowed and `total` was pinned to 1.
    pub degenerate: bool,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
