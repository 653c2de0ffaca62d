//! Link budgets for the cellular band and the mmWave band.
//!
//! The cellular band uses fixed device and BS gains with a power-law path
//! loss. The mmWave band uses a Gaussian main lobe with a flat side lobe,
//! boresights aligned with each link's peer, and a per-link blockage
//! probability `1 - exp(-beta * l)`.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::scenario::{distance, off_boresight_angles, Scenario, MIN_LINK_DISTANCE_M};
use crate::units::{db_to_linear, dbm_to_watts};

/// Main-lobe width as a multiple of the half-power beamwidth.
pub const MAIN_LOBE_FACTOR: f64 = 2.6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaPattern {
    pub halfpower_beamwidth_deg: f64,
    pub main_lobe_width_deg: f64,
    pub max_gain_db: f64,
    pub side_lobe_gain_db: f64,
}

impl AntennaPattern {
    pub fn new(halfpower_beamwidth_deg: f64) -> Result<Self> {
        let hp = halfpower_beamwidth_deg;
        if !(hp > 0.0 && hp <= 180.0) {
            return Err(Error::InvalidParams(format!(
                "half-power beamwidth {hp} outside (0, 180]"
            )));
        }
        let max_gain_db = 20.0 * (1.6162 / (hp / 2.0).to_radians().sin()).log10();
        let side_lobe_gain_db = -0.4111 * hp.ln() - 10.579;
        Ok(Self {
            halfpower_beamwidth_deg: hp,
            main_lobe_width_deg: MAIN_LOBE_FACTOR * hp,
            max_gain_db,
            side_lobe_gain_db,
        })
    }
}

/// Directional gain in dB at `theta_deg` off boresight.
///
/// At exactly `theta = main_lobe_width / 2` the main-lobe branch is used.
pub fn antenna_gain_db(theta_deg: f64, pattern: &AntennaPattern) -> Result<f64> {
    if !(0.0..=180.0).contains(&theta_deg) {
        return Err(Error::AngleOutOfRange(theta_deg));
    }
    if theta_deg <= pattern.main_lobe_width_deg / 2.0 {
        let x = 2.0 * theta_deg / pattern.halfpower_beamwidth_deg;
        Ok(pattern.max_gain_db - 3.01 * x * x)
    } else {
        Ok(pattern.side_lobe_gain_db)
    }
}

fn check_distance(distance_m: f64) -> Result<()> {
    if distance_m < MIN_LINK_DISTANCE_M || !distance_m.is_finite() {
        Err(Error::TooClose {
            distance: distance_m,
            min: MIN_LINK_DISTANCE_M,
        })
    } else {
        Ok(())
    }
}

/// `|h0|^2 * Gt * Gr * l^-n * P` for a cellular-band link.
pub fn cellular_rx_power(
    tx_power_watts: f64,
    tx_gain_dbi: f64,
    rx_gain_dbi: f64,
    distance_m: f64,
    fading_gain: f64,
    pathloss_exponent: f64,
) -> Result<f64> {
    check_distance(distance_m)?;
    Ok(fading_gain
        * db_to_linear(tx_gain_dbi)
        * db_to_linear(rx_gain_dbi)
        * distance_m.powf(-pathloss_exponent)
        * tx_power_watts)
}

/// Power received over mmWave at pair `victim`'s receiver from pair
/// `interferer`'s transmitter.
///
/// With `victim == interferer` this is the desired signal with both
/// antennas at boresight; otherwise the MUI-scaled interference with gains
/// taken at the geometric off-boresight angles.
pub fn mmwave_rx_power(
    victim: usize,
    interferer: usize,
    scenario: &Scenario,
    params: &SystemParams,
) -> Result<f64> {
    let pattern = AntennaPattern::new(params.halfpower_beamwidth_deg)?;
    mmwave_rx_power_with(victim, interferer, scenario, params, &pattern)
}

fn mmwave_rx_power_with(
    victim: usize,
    interferer: usize,
    scenario: &Scenario,
    params: &SystemParams,
    pattern: &AntennaPattern,
) -> Result<f64> {
    let d = scenario.num_d2d();
    for idx in [victim, interferer] {
        if idx >= d {
            return Err(Error::InvalidIndex {
                what: "D2D pair",
                index: idx,
                len: d,
            });
        }
    }
    let vl = scenario.d2d_link(victim);
    let il = scenario.d2d_link(interferer);
    let l = distance(il.tx, vl.rx);
    check_distance(l)?;
    let (tx_angle, rx_angle) = off_boresight_angles(il, vl)?;
    let gains = db_to_linear(antenna_gain_db(tx_angle, pattern)?)
        * db_to_linear(antenna_gain_db(rx_angle, pattern)?);
    let shadow = scenario
        .channel_gains
        .as_ref()
        .map_or(1.0, |g| g.mmwave[interferer][victim]);
    let mui = if victim == interferer {
        1.0
    } else {
        params.mui_factor
    };
    Ok(mui
        * params.k0()
        * shadow
        * gains
        * l.powf(-params.pathloss_exponent)
        * params.mmwave_tx_power_watts())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DensityUnit {
    DbmPerHz,
    DbmPerMhz,
}

impl FromStr for DensityUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dBm/Hz" => Ok(Self::DbmPerHz),
            "dBm/MHz" => Ok(Self::DbmPerMhz),
            other => Err(Error::UnknownUnit(other.to_string())),
        }
    }
}

/// Thermal noise in watts: the density integrated over `bandwidth_hz`.
pub fn noise_power(bandwidth_hz: f64, density: f64, unit: DensityUnit) -> Result<f64> {
    if bandwidth_hz.is_nan() || bandwidth_hz <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "bandwidth must be positive, got {bandwidth_hz}"
        )));
    }
    let units = match unit {
        DensityUnit::DbmPerHz => bandwidth_hz,
        DensityUnit::DbmPerMhz => bandwidth_hz / 1e6,
    };
    Ok(dbm_to_watts(density) * units)
}

pub fn blockage_probability(distance_m: f64, beta: f64) -> f64 {
    -(-beta * distance_m).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub rx_power_watts: f64,
    pub interference_power_watts: f64,
    pub noise_power_watts: f64,
    pub sinr: f64,
}

impl LinkBudget {
    pub fn new(rx_power_watts: f64, interference_power_watts: f64, noise_power_watts: f64) -> Self {
        Self {
            rx_power_watts,
            interference_power_watts,
            noise_power_watts,
            sinr: rx_power_watts / (interference_power_watts + noise_power_watts),
        }
    }
}

/// Every pairwise received power a scenario can produce, computed once.
///
/// Matrices are indexed `[from][to]`. `d2d_cellular[d][d]` and
/// `mmwave[d][d]` hold pair `d`'s own signal.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkTable {
    /// Cellular user `c` at the BS.
    pub cell_to_bs: Vec<f64>,
    /// D2D transmitter `d` at the BS, cellular band.
    pub d2d_to_bs: Vec<f64>,
    /// Cellular user `c` at D2D receiver `d`.
    pub cell_to_d2d: Vec<Vec<f64>>,
    pub d2d_cellular: Vec<Vec<f64>>,
    pub mmwave: Vec<Vec<f64>>,
    /// Blockage probability of each pair's own mmWave path.
    pub blockage: Vec<f64>,
    pub cell_noise: f64,
    pub mmwave_noise: f64,
}

impl LinkTable {
    pub fn build(scenario: &Scenario, params: &SystemParams) -> Result<Self> {
        params.validate()?;
        scenario.check_dimensions(params)?;
        let pattern = AntennaPattern::new(params.halfpower_beamwidth_deg)?;
        let (c_count, d_count) = (scenario.num_cellular(), scenario.num_d2d());
        let gains = scenario.channel_gains.as_ref();
        let pc = params.cell_tx_power_watts();
        let n = params.pathloss_exponent;
        let g0 = params.device_gain_dbi;
        let gb = params.bs_gain_dbi;
        let bs = scenario.bs_position;

        let cell_to_bs = (0..c_count)
            .map(|c| {
                let h = gains.map_or(1.0, |g| g.cell_to_bs[c]);
                cellular_rx_power(pc, g0, gb, distance(scenario.cellular_positions[c], bs), h, n)
            })
            .collect::<Result<Vec<_>>>()?;
        let d2d_to_bs = (0..d_count)
            .map(|d| {
                let h = gains.map_or(1.0, |g| g.d2d_to_bs[d]);
                cellular_rx_power(pc, g0, gb, distance(scenario.d2d_tx_positions[d], bs), h, n)
            })
            .collect::<Result<Vec<_>>>()?;
        let cell_to_d2d = (0..c_count)
            .map(|c| {
                (0..d_count)
                    .map(|d| {
                        let h = gains.map_or(1.0, |g| g.cell_to_d2d[c][d]);
                        let l = distance(scenario.cellular_positions[c], scenario.d2d_rx_positions[d]);
                        cellular_rx_power(pc, g0, g0, l, h, n)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let d2d_cellular = (0..d_count)
            .map(|j| {
                (0..d_count)
                    .map(|i| {
                        let h = gains.map_or(1.0, |g| g.d2d_to_d2d[j][i]);
                        let l = distance(scenario.d2d_tx_positions[j], scenario.d2d_rx_positions[i]);
                        cellular_rx_power(pc, g0, g0, l, h, n)
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mmwave = (0..d_count)
            .map(|j| {
                (0..d_count)
                    .map(|i| mmwave_rx_power_with(i, j, scenario, params, &pattern))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let blockage = (0..d_count)
            .map(|d| {
                let link = scenario.d2d_link(d);
                blockage_probability(distance(link.tx, link.rx), params.blockage_beta)
            })
            .collect();

        Ok(Self {
            cell_to_bs,
            d2d_to_bs,
            cell_to_d2d,
            d2d_cellular,
            mmwave,
            blockage,
            cell_noise: noise_power(
                params.cell_bandwidth_hz,
                params.cell_noise_density,
                DensityUnit::DbmPerHz,
            )?,
            mmwave_noise: noise_power(
                params.mmwave_bandwidth_hz,
                params.mmwave_noise_density,
                DensityUnit::DbmPerMhz,
            )?,
        })
    }

    pub fn num_cellular(&self) -> usize {
        self.cell_to_bs.len()
    }

    pub fn num_d2d(&self) -> usize {
        self.d2d_to_bs.len()
    }
}
