//! Straight-line recomputation of the system model used as an oracle by the
//! integration and acceptance tests. Shares no code with the library beyond
//! the plain data types it reads.

#![allow(dead_code)]

use d2d_hcn::scenario::{Point, Scenario};
use d2d_hcn::SystemParams;

pub fn dbm(x: f64) -> f64 {
    10f64.powf((x - 30.0) / 10.0)
}

pub fn lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

pub fn dist(a: Point, b: Point) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt()
}

/// Angle in degrees between the rays `from -> a` and `from -> b`.
pub fn angle_between(from: Point, a: Point, b: Point) -> f64 {
    let (ux, uy) = (a.x - from.x, a.y - from.y);
    let (vx, vy) = (b.x - from.x, b.y - from.y);
    let c = (ux * vx + uy * vy) / ((ux * ux + uy * uy).sqrt() * (vx * vx + vy * vy).sqrt());
    c.clamp(-1.0, 1.0).acos().to_degrees()
}

pub fn antenna_db(theta: f64, hp: f64) -> f64 {
    let max = 20.0 * (1.6162 / (hp / 2.0).to_radians().sin()).log10();
    if theta <= 2.6 * hp / 2.0 {
        max - 3.01 * (2.0 * theta / hp).powi(2)
    } else {
        -0.4111 * hp.ln() - 10.579
    }
}

pub fn rate(bw: f64, sinr: f64) -> f64 {
    bw * (1.0 + sinr).log2()
}

fn cell_noise(p: &SystemParams) -> f64 {
    dbm(p.cell_noise_density + 10.0 * p.cell_bandwidth_hz.log10())
}

fn mm_noise(p: &SystemParams) -> f64 {
    dbm(p.mmwave_noise_density + 10.0 * (p.mmwave_bandwidth_hz / 1e6).log10())
}

/// Received power in dB-domain arithmetic for a cellular-band link.
pub fn cell_power(p: &SystemParams, gt: f64, gr: f64, l: f64, h: f64) -> f64 {
    h * dbm(p.cell_tx_power_dbm + gt + gr - 10.0 * p.pathloss_exponent * l.log10())
}

/// mmWave power from pair `j`'s transmitter at pair `i`'s receiver.
pub fn mm_power(s: &Scenario, p: &SystemParams, j: usize, i: usize) -> f64 {
    let (tj, rj) = (s.d2d_tx_positions[j], s.d2d_rx_positions[j]);
    let (ti, ri) = (s.d2d_tx_positions[i], s.d2d_rx_positions[i]);
    let l = dist(tj, ri);
    let at_tx = angle_between(tj, rj, ri);
    let at_rx = angle_between(ri, ti, tj);
    let hp = p.halfpower_beamwidth_deg;
    let k0_db = 20.0 * (p.mmwave_wavelength_m / (4.0 * std::f64::consts::PI)).log10()
        + 10.0 * p.k0_multiplier.log10();
    let shadow = s.channel_gains.as_ref().map_or(1.0, |g| g.mmwave[j][i]);
    let mui = if i == j { 1.0 } else { p.mui_factor };
    mui * shadow
        * dbm(p.mmwave_tx_power_dbm + k0_db + antenna_db(at_tx, hp) + antenna_db(at_rx, hp)
            - 10.0 * p.pathloss_exponent * l.log10())
}

pub struct Oracle {
    pub cellular: Vec<f64>,
    /// Pre-outage rate of each pair on the band it uses.
    pub d2d: Vec<f64>,
    pub total: f64,
}

/// Per-user rates and the system sum rate for `ids` (1-based coalition id
/// per pair, `C + 1` = mmWave), written as explicit indicator sums.
pub fn evaluate(s: &Scenario, p: &SystemParams, ids: &[usize]) -> Oracle {
    let c_n = s.cellular_positions.len();
    let d_n = s.d2d_tx_positions.len();
    let g = s.channel_gains.as_ref();
    let (g0, gb) = (p.device_gain_dbi, p.bs_gain_dbi);
    let x = |c: usize, d: usize| if ids[d] == c + 1 { 1.0 } else { 0.0 };
    let a = |d: usize| if ids[d] <= c_n { 1.0 } else { 0.0 };

    let mut cellular = Vec::new();
    for c in 0..c_n {
        let h = g.map_or(1.0, |g| g.cell_to_bs[c]);
        let sig = cell_power(p, g0, gb, dist(s.cellular_positions[c], s.bs_position), h);
        let mut int = 0.0;
        for d in 0..d_n {
            let h = g.map_or(1.0, |g| g.d2d_to_bs[d]);
            int += x(c, d) * cell_power(p, g0, gb, dist(s.d2d_tx_positions[d], s.bs_position), h);
        }
        cellular.push(rate(p.cell_bandwidth_hz, sig / (int + cell_noise(p))));
    }

    let mut d2d = Vec::new();
    let mut total: f64 = cellular.iter().sum();
    for d in 0..d_n {
        let rd = if a(d) == 1.0 {
            let h = g.map_or(1.0, |g| g.d2d_to_d2d[d][d]);
            let sig = cell_power(p, g0, g0, dist(s.d2d_tx_positions[d], s.d2d_rx_positions[d]), h);
            let mut int = 0.0;
            for c in 0..c_n {
                let h = g.map_or(1.0, |g| g.cell_to_d2d[c][d]);
                int += x(c, d) * cell_power(p, g0, g0, dist(s.cellular_positions[c], s.d2d_rx_positions[d]), h);
            }
            for e in (0..d_n).filter(|&e| e != d) {
                let both: f64 = (0..c_n).map(|c| x(c, d) * x(c, e)).sum();
                let h = g.map_or(1.0, |g| g.d2d_to_d2d[e][d]);
                int += both * cell_power(p, g0, g0, dist(s.d2d_tx_positions[e], s.d2d_rx_positions[d]), h);
            }
            rate(p.cell_bandwidth_hz, sig / (int + cell_noise(p)))
        } else {
            let sig = mm_power(s, p, d, d);
            let int: f64 = (0..d_n)
                .filter(|&e| e != d)
                .map(|e| (1.0 - a(e)) * mm_power(s, p, e, d))
                .sum();
            rate(p.mmwave_bandwidth_hz, sig / (int + mm_noise(p)))
        };
        let l = dist(s.d2d_tx_positions[d], s.d2d_rx_positions[d]);
        let p_out = 1.0 - (-p.blockage_beta * l).exp();
        total += a(d) * rd + (1.0 - a(d)) * (1.0 - p_out) * rd;
        d2d.push(rd);
    }
    Oracle {
        cellular,
        d2d,
        total,
    }
}

pub fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y)
}
