//! Resource allocation for D2D pairs sharing cellular uplinks and a mmWave
//! band, via a utilitarian coalition formation game.
//!
//! The pipeline is scenario -> channel -> rate -> game, with baselines and a
//! sweep harness on top.

pub mod baselines;
pub mod channel;
pub mod cli;
pub mod error;
pub mod game;
pub mod harness;
pub mod params;
pub mod rate;
pub mod scenario;
pub mod seed;
pub mod units;

pub use error::{Error, Result};
pub use game::{form_coalitions, is_nash_stable, FormationConfig, SwitchTrace};
pub use params::{FadingMode, SystemParams};
pub use rate::{Coalition, Partition, RateModel, RateReport};
pub use scenario::{generate_scenario, Scenario};
