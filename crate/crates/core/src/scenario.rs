//! Random single-cell layouts and the geometry used by the link budgets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{FadingMode, SystemParams};

/// Links shorter than this are treated as an invalid layout.
pub const MIN_LINK_DISTANCE_M: f64 = 0.1;

/// A 2D position in meters. Serialized as `[x, y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    fn sub(self, other: Point) -> (f64, f64) {
        (self.x - other.x, self.y - other.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

/// A directed transmitter -> receiver link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    pub tx: Point,
    pub rx: Point,
}

impl Link {
    pub const fn new(tx: Point, rx: Point) -> Self {
        Self { tx, rx }
    }
}

/// Per-link power multipliers for one scenario.
///
/// Cellular-band entries carry `|h0|^2` (times shadowing when enabled);
/// mmWave entries carry shadowing only. Matrices indexed `[from][to]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkGains {
    pub cell_to_bs: Vec<f64>,
    pub d2d_to_bs: Vec<f64>,
    pub cell_to_d2d: Vec<Vec<f64>>,
    pub d2d_to_d2d: Vec<Vec<f64>>,
    pub mmwave: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub bs_position: Point,
    pub cellular_positions: Vec<Point>,
    pub d2d_tx_positions: Vec<Point>,
    pub d2d_rx_positions: Vec<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channel_gains: Option<LinkGains>,
}

impl Scenario {
    pub fn num_cellular(&self) -> usize {
        self.cellular_positions.len()
    }

    pub fn num_d2d(&self) -> usize {
        self.d2d_tx_positions.len()
    }

    pub fn d2d_link(&self, d: usize) -> Link {
        Link::new(self.d2d_tx_positions[d], self.d2d_rx_positions[d])
    }

    /// Checks list lengths against `params` and the gain matrices against
    /// the layout.
    pub fn check_dimensions(&self, params: &SystemParams) -> Result<()> {
        let (c, d) = (self.num_cellular(), self.num_d2d());
        if c != params.num_cellular || d != params.num_d2d {
            return Err(Error::DimensionMismatch(format!(
                "scenario has C={c}, D={d}; params say C={}, D={}",
                params.num_cellular, params.num_d2d
            )));
        }
        if self.d2d_rx_positions.len() != d {
            return Err(Error::DimensionMismatch(
                "transmitter and receiver lists differ in length".into(),
            ));
        }
        if let Some(g) = &self.channel_gains {
            let square = |m: &Vec<Vec<f64>>, rows: usize, cols: usize| {
                m.len() == rows && m.iter().all(|r| r.len() == cols)
            };
            let ok = g.cell_to_bs.len() == c
                && g.d2d_to_bs.len() == d
                && square(&g.cell_to_d2d, c, d)
                && square(&g.d2d_to_d2d, d, d)
                && square(&g.mmwave, d, d);
            if !ok {
                return Err(Error::DimensionMismatch("channel gain tables".into()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn distance(a: Point, b: Point) -> f64 {
    let (dx, dy) = a.sub(b);
    dx.hypot(dy)
}

/// Unsigned angle in degrees between two non-zero vectors.
fn angle_between(u: (f64, f64), v: (f64, f64)) -> f64 {
    let cross = u.0 * v.1 - u.1 * v.0;
    let dot = u.0 * v.0 + u.1 * v.1;
    cross.abs().atan2(dot).to_degrees()
}

fn nonzero(v: (f64, f64)) -> Result<(f64, f64)> {
    if v.0 == 0.0 && v.1 == 0.0 {
        Err(Error::DegenerateLink)
    } else {
        Ok(v)
    }
}

/// Off-boresight angles seen by an interfering link `j` toward a victim `i`.
///
/// Returns `(tx_angle, rx_angle)`: the angle at `j`'s transmitter between
/// its boresight and the direction to `i`'s receiver, and the angle at `i`'s
/// receiver between its boresight and the direction to `j`'s transmitter.
/// Boresights point at the link peer.
pub fn off_boresight_angles(interferer: Link, victim: Link) -> Result<(f64, f64)> {
    let tx_boresight = nonzero(interferer.rx.sub(interferer.tx))?;
    let rx_boresight = nonzero(victim.tx.sub(victim.rx))?;
    let to_victim = nonzero(victim.rx.sub(interferer.tx))?;
    let to_interferer = nonzero(interferer.tx.sub(victim.rx))?;
    Ok((
        angle_between(tx_boresight, to_victim),
        angle_between(rx_boresight, to_interferer),
    ))
}

fn uniform_point(rng: &mut impl Rng, side: f64) -> Point {
    Point::new(rng.random_range(0.0..=side), rng.random_range(0.0..=side))
}

fn clear_of(p: Point, placed: &[Point]) -> bool {
    placed.iter().all(|&q| distance(p, q) >= MIN_LINK_DISTANCE_M)
}

/// Samples a layout: BS at the center, cellular users and D2D transmitters
/// uniform over the square, each receiver offset from its transmitter by
/// independent per-axis uniforms on `[-a, a]`.
///
/// Out-of-area receivers are resampled (the offset, not the transmitter).
/// Any point within [`MIN_LINK_DISTANCE_M`] of an earlier point is also
/// resampled, so every link in the result is at least that long.
pub fn generate_scenario(params: &SystemParams) -> Result<Scenario> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let side = params.side_length;
    let a = params.d2d_axis_offset_max;
    let bs = Point::new(side / 2.0, side / 2.0);

    let mut placed = vec![bs];
    let mut cellular = Vec::with_capacity(params.num_cellular);
    for _ in 0..params.num_cellular {
        let p = loop {
            let p = uniform_point(&mut rng, side);
            if clear_of(p, &placed) {
                break p;
            }
        };
        placed.push(p);
        cellular.push(p);
    }

    let mut txs = Vec::with_capacity(params.num_d2d);
    let mut rxs = Vec::with_capacity(params.num_d2d);
    for _ in 0..params.num_d2d {
        let tx = loop {
            let p = uniform_point(&mut rng, side);
            if clear_of(p, &placed) {
                break p;
            }
        };
        placed.push(tx);
        let rx = loop {
            let p = Point::new(
                tx.x + rng.random_range(-a..=a),
                tx.y + rng.random_range(-a..=a),
            );
            let inside = (0.0..=side).contains(&p.x) && (0.0..=side).contains(&p.y);
            if inside && clear_of(p, &placed) {
                break p;
            }
        };
        placed.push(rx);
        txs.push(tx);
        rxs.push(rx);
    }

    let channel_gains = sample_gains(params, &mut rng);
    Ok(Scenario {
        bs_position: bs,
        cellular_positions: cellular,
        d2d_tx_positions: txs,
        d2d_rx_positions: rxs,
        channel_gains,
    })
}

fn sample_gains(params: &SystemParams, rng: &mut ChaCha8Rng) -> Option<LinkGains> {
    let rayleigh = params.fading_mode == FadingMode::SampledRayleigh;
    let shadowing = params.shadowing_std_db > 0.0;
    if !rayleigh && !shadowing {
        return None;
    }
    let normal = Normal::new(0.0, params.shadowing_std_db.max(f64::MIN_POSITIVE)).ok()?;
    let mut draw = |fading: bool| -> f64 {
        let mut g = 1.0;
        if fading && rayleigh {
            let e: f64 = Exp1.sample(rng);
            g *= e;
        }
        if shadowing {
            g *= crate::units::db_to_linear(normal.sample(rng));
        }
        g
    };
    let (c, d) = (params.num_cellular, params.num_d2d);
    let cell_to_bs = (0..c).map(|_| draw(true)).collect();
    let d2d_to_bs = (0..d).map(|_| draw(true)).collect();
    let cell_to_d2d = (0..c).map(|_| (0..d).map(|_| draw(true)).collect()).collect();
    let d2d_to_d2d = (0..d).map(|_| (0..d).map(|_| draw(true)).collect()).collect();
    let mmwave = (0..d).map(|_| (0..d).map(|_| draw(false)).collect()).collect();
    Some(LinkGains {
        cell_to_bs,
        d2d_to_bs,
        cell_to_d2d,
        d2d_to_d2d,
        mmwave,
    })
}
