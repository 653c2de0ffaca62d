//! Monte-Carlo parameter sweeps over the allocation schemes.
//!
//! Every trial draws one scenario and runs each requested scheme on it, so
//! schemes are compared on identical layouts. Seeds for the scenario and
//! for each scheme come from `(spec.seed, point, trial)`, which makes the
//! result independent of how trials are scheduled across threads.

pub mod stats;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::{
    ccg_partition, check_budget, exhaustive_optimal, fcc_partition, fmc_partition, rc_partition,
    DEFAULT_BUDGET,
};
use crate::error::{Error, Result};
use crate::game::{form_coalitions, random_partition, FormationConfig, StrategySpace, SwitchTrace};
use crate::params::SystemParams;
use crate::rate::{Partition, RateModel};
use crate::scenario::generate_scenario;
use crate::seed;

pub use stats::{average_deviation, convergence_stats, ConvergenceStats};

pub const CSV_HEADER: [&str; 6] = [
    "param_value",
    "scheme",
    "mean_rate_bps",
    "std_rate_bps",
    "trials",
    "mean_switches",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Scheme {
    /// Coalition game over cellular uplinks and mmWave.
    Cg,
    /// Full mmWave.
    Fmc,
    /// Random over all coalitions.
    Rc,
    /// Coalition game over cellular uplinks only.
    Ccg,
    /// Random over cellular uplinks.
    Fcc,
    /// Exhaustive-search optimum.
    Os,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Cg,
        Scheme::Fmc,
        Scheme::Rc,
        Scheme::Ccg,
        Scheme::Fcc,
        Scheme::Os,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Cg => "CG",
            Scheme::Fmc => "FMC",
            Scheme::Rc => "RC",
            Scheme::Ccg => "CCG",
            Scheme::Fcc => "FCC",
            Scheme::Os => "OS",
        }
    }

    pub fn is_game(self) -> bool {
        matches!(self, Scheme::Cg | Scheme::Ccg)
    }

    fn needs_cellular(self) -> bool {
        matches!(self, Scheme::Ccg | Scheme::Fcc)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidParams(format!("unknown scheme `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweptParameter {
    NumCellular,
    NumD2d,
    MmwaveTxPowerDbm,
    CellTxPowerDbm,
    BlockageBeta,
    HalfpowerBeamwidthDeg,
    D2dAxisOffsetMax,
    SideLength,
}

impl SweptParameter {
    fn apply(self, params: &mut SystemParams, value: f64) -> Result<()> {
        let count = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::InvalidParams(format!("{v} is not a valid count")))
            }
        };
        match self {
            SweptParameter::NumCellular => params.num_cellular = count(value)?,
            SweptParameter::NumD2d => params.num_d2d = count(value)?,
            SweptParameter::MmwaveTxPowerDbm => params.mmwave_tx_power_dbm = value,
            SweptParameter::CellTxPowerDbm => params.cell_tx_power_dbm = value,
            SweptParameter::BlockageBeta => params.blockage_beta = value,
            SweptParameter::HalfpowerBeamwidthDeg => params.halfpower_beamwidth_deg = value,
            SweptParameter::D2dAxisOffsetMax => params.d2d_axis_offset_max = value,
            SweptParameter::SideLength => params.side_length = value,
        }
        Ok(())
    }
}

fn default_trials() -> usize {
    20
}

fn default_budget() -> u64 {
    DEFAULT_BUDGET
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub name: String,
    pub swept_parameter: SweptParameter,
    pub values: Vec<f64>,
    /// With `side_length` sweeps: the D2D offset to use at each value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupled_d2d_axis_offset_max: Option<Vec<f64>>,
    #[serde(default = "default_trials")]
    pub trials_per_point: usize,
    pub schemes: Vec<Scheme>,
    #[serde(default)]
    pub base_params: SystemParams,
    /// Formation settings for CG and CCG; the seed is replaced per trial.
    #[serde(default)]
    pub formation: FormationConfig,
    #[serde(default = "default_budget")]
    pub os_budget: u64,
    #[serde(default)]
    pub seed: u64,
    /// Keep the full CG switch trace of every trial.
    #[serde(default)]
    pub record_traces: bool,
}

impl SweepSpec {
    pub fn new(
        name: impl Into<String>,
        swept_parameter: SweptParameter,
        values: Vec<f64>,
        schemes: Vec<Scheme>,
    ) -> Self {
        Self {
            name: name.into(),
            swept_parameter,
            values,
            coupled_d2d_axis_offset_max: None,
            trials_per_point: default_trials(),
            schemes,
            base_params: SystemParams::default(),
            formation: FormationConfig::default(),
            os_budget: DEFAULT_BUDGET,
            seed: 0,
            record_traces: false,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parameters for sweep point `index`, before per-trial seeding.
    pub fn point_params(&self, index: usize) -> Result<SystemParams> {
        let mut p = self.base_params.clone();
        self.swept_parameter.apply(&mut p, self.values[index])?;
        if let Some(offsets) = &self.coupled_d2d_axis_offset_max {
            p.d2d_axis_offset_max = offsets[index];
        }
        p.validate()?;
        Ok(p)
    }

    /// Checks everything that can be checked before running a trial,
    /// including the exhaustive-search budget at every point.
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidParams("sweep has no values".into()));
        }
        if self.trials_per_point == 0 {
            return Err(Error::InvalidParams("trials_per_point must be >= 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidParams("sweep has no schemes".into()));
        }
        if let Some(offsets) = &self.coupled_d2d_axis_offset_max {
            if self.swept_parameter != SweptParameter::SideLength {
                return Err(Error::InvalidParams(
                    "coupled offsets only apply to side_length sweeps".into(),
                ));
            }
            if offsets.len() != self.values.len() {
                return Err(Error::LengthMismatch {
                    left: self.values.len(),
                    right: offsets.len(),
                });
            }
        }
        for i in 0..self.values.len() {
            let p = self.point_params(i)?;
            self.formation.validate(p.num_d2d)?;
            for &scheme in &self.schemes {
                if scheme.needs_cellular() && p.num_cellular == 0 {
                    return Err(Error::NoCellularUsers);
                }
            }
            if self.schemes.contains(&Scheme::Os) {
                check_budget(p.num_cellular, p.num_d2d, StrategySpace::Full, self.os_budget)?;
            }
        }
        Ok(())
    }
}

/// Everything measured in one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub point: usize,
    pub trial: usize,
    pub scenario_seed: u64,
    pub rates: BTreeMap<Scheme, f64>,
    pub switches: BTreeMap<Scheme, usize>,
    /// Sum rate of CG's random starting partition.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cg_initial_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cg_trace: Option<SwitchTrace>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    pub mean_rate_bps: f64,
    pub std_rate_bps: f64,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_switches: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub param_value: f64,
    pub summaries: Vec<SchemeSummary>,
}

impl PointResult {
    pub fn summary(&self, scheme: Scheme) -> Option<&SchemeSummary> {
        self.summaries.iter().find(|s| s.scheme == scheme)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    /// Caller-supplied label; never read from the clock.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    pub points: Vec<PointResult>,
    pub trials: Vec<TrialRecord>,
}

impl SweepResult {
    /// Per-trial rates of `scheme` at `point`, in trial order.
    pub fn trial_rates(&self, point: usize, scheme: Scheme) -> Vec<f64> {
        self.trials
            .iter()
            .filter(|t| t.point == point)
            .filter_map(|t| t.rates.get(&scheme).copied())
            .collect()
    }

    pub fn mean_rates(&self, scheme: Scheme) -> Vec<f64> {
        self.points
            .iter()
            .filter_map(|p| p.summary(scheme).map(|s| s.mean_rate_bps))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for point in &self.points {
            for s in &point.summaries {
                w.write_record([
                    point.param_value.to_string(),
                    s.scheme.name().to_string(),
                    s.mean_rate_bps.to_string(),
                    s.std_rate_bps.to_string(),
                    s.trials.to_string(),
                    s.mean_switches.map(|m| m.to_string()).unwrap_or_default(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

fn run_trial(spec: &SweepSpec, point: usize, trial: usize) -> Result<TrialRecord> {
    let key = |stream: u64| seed::derive(spec.seed, &[point as u64, trial as u64, stream]);
    let scenario_seed = key(0);
    let params = spec.point_params(point)?.with_seed(scenario_seed);
    let scenario = generate_scenario(&params)?;
    let model = RateModel::new(&scenario, &params)?;
    let (c, d) = (params.num_cellular, params.num_d2d);
    let rate = |p: &Partition| -> Result<f64> { Ok(model.system_sum_rate(p)?.system_sum_rate) };

    let mut record = TrialRecord {
        point,
        trial,
        scenario_seed,
        rates: BTreeMap::new(),
        switches: BTreeMap::new(),
        cg_initial_rate: None,
        cg_trace: None,
    };
    for &scheme in &spec.schemes {
        let value = match scheme {
            Scheme::Cg => {
                let initial = random_partition(c, d, StrategySpace::Full, key(1))?;
                let config = FormationConfig {
                    rng_seed: key(2),
                    ..spec.formation.clone()
                };
                let trace = form_coalitions(&model, &initial, &config)?;
                record.cg_initial_rate = Some(rate(&initial)?);
                record.switches.insert(scheme, trace.total_switch_count);
                let v = rate(&trace.final_partition)?;
                if spec.record_traces {
                    record.cg_trace = Some(trace);
                }
                v
            }
            Scheme::Fmc => rate(&fmc_partition(c, d))?,
            Scheme::Rc => rate(&rc_partition(c, d, key(3)))?,
            Scheme::Fcc => rate(&fcc_partition(c, d, key(4))?)?,
            Scheme::Ccg => {
                let config = FormationConfig {
                    rng_seed: key(5),
                    ..spec.formation.clone()
                };
                let trace = ccg_partition(&model, &config)?;
                record.switches.insert(scheme, trace.total_switch_count);
                rate(&trace.final_partition)?
            }
            Scheme::Os => exhaustive_optimal(&model, spec.os_budget)?.sum_rate,
        };
        record.rates.insert(scheme, value);
    }
    Ok(record)
}

fn summarize(spec: &SweepSpec, trials: &[TrialRecord]) -> Vec<PointResult> {
    (0..spec.values.len())
        .map(|point| {
            let rows: Vec<&TrialRecord> = trials.iter().filter(|t| t.point == point).collect();
            let summaries = spec
                .schemes
                .iter()
                .map(|&scheme| {
                    let rates: Vec<f64> = rows.iter().map(|t| t.rates[&scheme]).collect();
                    let mean_switches = scheme.is_game().then(|| {
                        let s: Vec<f64> = rows.iter().map(|t| t.switches[&scheme] as f64).collect();
                        stats::mean(&s)
                    });
                    SchemeSummary {
                        scheme,
                        mean_rate_bps: stats::mean(&rates),
                        std_rate_bps: stats::sample_std(&rates),
                        trials: rates.len(),
                        mean_switches,
                    }
                })
                .collect();
            PointResult {
                param_value: spec.values[point],
                summaries,
            }
        })
        .collect()
}

/// Runs the sweep on the current rayon pool.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> = (0..spec.values.len())
        .flat_map(|p| (0..spec.trials_per_point).map(move |t| (p, t)))
        .collect();
    let trials = jobs
        .par_iter()
        .map(|&(p, t)| run_trial(spec, p, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        spec: spec.clone(),
        timestamp: None,
        points: summarize(spec, &trials),
        trials,
    })
}

/// Runs the sweep on a dedicated pool of `threads` workers.
pub fn run_sweep_with_threads(spec: &SweepSpec, threads: usize) -> Result<SweepResult> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    pool.install(|| run_sweep(spec))
}
