//! Physical and algorithmic constants for one simulated cell.
//!
//! Defaults reproduce the reference simulation setup: a 500 m square cell,
//! 15 kHz cellular carriers, a 2160 MHz channel at 60 GHz, 30 degree
//! half-power beams and `beta = 0.01` blockage.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::dbm_to_watts;

/// How the small-scale power gain `|h0|^2` of cellular-band links is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingMode {
    /// `|h0|^2 = 1`, the mean of a unit-variance Rayleigh power.
    #[default]
    AverageChannel,
    /// `|h0|^2 ~ Exp(1)` drawn once per link per scenario.
    SampledRayleigh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemParams {
    pub num_cellular: usize,
    pub num_d2d: usize,
    /// Edge of the square deployment area, meters.
    pub side_length: f64,
    /// Maximum per-axis offset between a D2D transmitter and its receiver.
    pub d2d_axis_offset_max: f64,
    pub cell_bandwidth_hz: f64,
    pub mmwave_bandwidth_hz: f64,
    /// dBm/Hz.
    pub cell_noise_density: f64,
    /// dBm/MHz.
    pub mmwave_noise_density: f64,
    pub cell_tx_power_dbm: f64,
    pub mmwave_tx_power_dbm: f64,
    pub pathloss_exponent: f64,
    /// Multi-user interference factor applied to cross-link mmWave power.
    pub mui_factor: f64,
    pub halfpower_beamwidth_deg: f64,
    /// Blockage density, per meter.
    pub blockage_beta: f64,
    /// Cellular device antenna gain, dBi.
    pub device_gain_dbi: f64,
    /// Base station antenna gain, dBi.
    pub bs_gain_dbi: f64,
    pub mmwave_wavelength_m: f64,
    /// Multiplier on `(lambda / 4 pi)^2` giving the mmWave constant `k0`.
    pub k0_multiplier: f64,
    /// Log-normal shadowing standard deviation in dB; `0` disables it.
    pub shadowing_std_db: f64,
    pub fading_mode: FadingMode,
    pub rng_seed: u64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            num_cellular: 8,
            num_d2d: 30,
            side_length: 500.0,
            d2d_axis_offset_max: 10.0,
            cell_bandwidth_hz: 15e3,
            mmwave_bandwidth_hz: 2160e6,
            cell_noise_density: -174.0,
            mmwave_noise_density: -134.0,
            cell_tx_power_dbm: 23.0,
            mmwave_tx_power_dbm: 20.0,
            pathloss_exponent: 2.0,
            mui_factor: 1.0,
            halfpower_beamwidth_deg: 30.0,
            blockage_beta: 0.01,
            device_gain_dbi: 0.5,
            bs_gain_dbi: 14.0,
            mmwave_wavelength_m: 0.005,
            k0_multiplier: 1.0,
            shadowing_std_db: 0.0,
            fading_mode: FadingMode::AverageChannel,
            rng_seed: 0,
        }
    }
}

impl SystemParams {
    pub fn with_counts(num_cellular: usize, num_d2d: usize) -> Self {
        Self {
            num_cellular,
            num_d2d,
            ..Self::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be positive, got {v}")))
            }
        }
        fn non_negative(name: &str, v: f64) -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be >= 0, got {v}")))
            }
        }
        fn finite(name: &str, v: f64) -> Result<()> {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} must be finite")))
            }
        }

        positive("side_length", self.side_length)?;
        positive("d2d_axis_offset_max", self.d2d_axis_offset_max)?;
        positive("cell_bandwidth_hz", self.cell_bandwidth_hz)?;
        positive("mmwave_bandwidth_hz", self.mmwave_bandwidth_hz)?;
        positive("pathloss_exponent", self.pathloss_exponent)?;
        non_negative("mui_factor", self.mui_factor)?;
        non_negative("blockage_beta", self.blockage_beta)?;
        positive("mmwave_wavelength_m", self.mmwave_wavelength_m)?;
        positive("k0_multiplier", self.k0_multiplier)?;
        for (name, v) in [
            ("cell_noise_density", self.cell_noise_density),
            ("mmwave_noise_density", self.mmwave_noise_density),
            ("cell_tx_power_dbm", self.cell_tx_power_dbm),
            ("mmwave_tx_power_dbm", self.mmwave_tx_power_dbm),
            ("device_gain_dbi", self.device_gain_dbi),
            ("bs_gain_dbi", self.bs_gain_dbi),
        ] {
            finite(name, v)?;
        }
        if !(self.shadowing_std_db.is_finite() && self.shadowing_std_db >= 0.0) {
            return Err(Error::InvalidParams(
                "shadowing_std_db must be finite and >= 0".into(),
            ));
        }
        let beam = self.halfpower_beamwidth_deg;
        if !(beam > 0.0 && beam <= 180.0) {
            return Err(Error::InvalidParams(format!(
                "halfpower_beamwidth_deg must lie in (0, 180], got {beam}"
            )));
        }
        if self.d2d_axis_offset_max * std::f64::consts::SQRT_2 > self.side_length {
            return Err(Error::InvalidParams(format!(
                "D2D offset box ({} m per axis) does not fit a {} m area",
                self.d2d_axis_offset_max, self.side_length
            )));
        }
        Ok(())
    }

    pub fn cell_tx_power_watts(&self) -> f64 {
        dbm_to_watts(self.cell_tx_power_dbm)
    }

    pub fn mmwave_tx_power_watts(&self) -> f64 {
        dbm_to_watts(self.mmwave_tx_power_dbm)
    }

    /// Free-space constant `k0 = multiplier * (lambda / 4 pi)^2`.
    pub fn k0(&self) -> f64 {
        let r = self.mmwave_wavelength_m / (4.0 * std::f64::consts::PI);
        self.k0_multiplier * r * r
    }

    /// Number of coalitions, `C + 1`.
    pub fn num_coalitions(&self) -> usize {
        self.num_cellular + 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        SystemParams::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let mut p = SystemParams::default();
        p.halfpower_beamwidth_deg = 0.0;
        assert!(p.validate().is_err());
        p.halfpower_beamwidth_deg = 181.0;
        assert!(p.validate().is_err());

        let mut p = SystemParams::default();
        p.side_length = 10.0;
        assert!(p.validate().is_err());

        let mut p = SystemParams::default();
        p.blockage_beta = -0.1;
        assert!(p.validate().is_err());
        p.blockage_beta = 0.0;
        p.mui_factor = 0.0;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn partial_json_fills_defaults() {
        let p: SystemParams =
            serde_json::from_str(r#"{"num_cellular": 2, "fading_mode": "sampled_rayleigh"}"#)
                .unwrap();
        assert_eq!(p.num_cellular, 2);
        assert_eq!(p.num_d2d, 30);
        assert_eq!(p.fading_mode, FadingMode::SampledRayleigh);
        assert!(serde_json::from_str::<SystemParams>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn k0_at_60ghz() {
        let k0 = SystemParams::default().k0();
        let expect = (0.005 / (4.0 * std::f64::consts::PI)).powi(2);
        assert_eq!(k0, expect);
    }
}
