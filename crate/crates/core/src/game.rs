//! Coalition formation among D2D pairs under the utilitarian order.
//!
//! A pair prefers coalition `B` over its current coalition `A` when moving
//! raises `R(A) + R(B)`; since no other coalition value changes, that is
//! exactly an increase of the system sum rate. The formation loop visits
//! pairs in order, proposes one random alternative per visit, and stops
//! after `stop_factor * D` consecutive rejected proposals.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rate::{Coalition, Partition, RateModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderPolicy {
    /// Pairs `0, 1, .., D-1, 0, 1, ..`.
    FixedRoundRobin,
    /// A fresh random permutation of the pairs on every pass.
    #[default]
    RandomPermutationPerPass,
}

/// How the alternative coalition is drawn on each visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateDraw {
    /// Independent uniform draw over the other coalitions.
    WithReplacement,
    /// Each pair walks a shuffled list of the other coalitions, rebuilt
    /// whenever the partition changes. Every single draw is still uniform.
    #[default]
    WithoutReplacement,
}

/// Coalitions a pair may join.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategySpace {
    #[default]
    Full,
    /// mmWave excluded.
    CellularOnly,
}

impl StrategySpace {
    pub fn coalitions(self, num_cellular: usize) -> Vec<Coalition> {
        let mut out: Vec<Coalition> = (0..num_cellular).map(Coalition::Cellular).collect();
        if self == StrategySpace::Full {
            out.push(Coalition::MmWave);
        }
        out
    }

    pub fn allows(self, coalition: Coalition) -> bool {
        self == StrategySpace::Full || coalition.is_cellular()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FormationConfig {
    pub order_policy: OrderPolicy,
    pub candidate_draw: CandidateDraw,
    /// The loop stops after `stop_factor * D` consecutive rejections.
    pub stop_factor: usize,
    pub max_iterations_cap: u64,
    pub rng_seed: u64,
}

impl Default for FormationConfig {
    fn default() -> Self {
        Self {
            order_policy: OrderPolicy::default(),
            candidate_draw: CandidateDraw::default(),
            stop_factor: 10,
            max_iterations_cap: 10_000_000,
            rng_seed: 0,
        }
    }
}

impl FormationConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            rng_seed: seed,
            ..Self::default()
        }
    }

    pub fn validate(&self, num_d2d: usize) -> Result<()> {
        if self.stop_factor < 1 {
            return Err(Error::InvalidParams("stop_factor must be >= 1".into()));
        }
        if (self.max_iterations_cap as u128) < (self.stop_factor as u128) * (num_d2d as u128) {
            return Err(Error::InvalidParams(format!(
                "max_iterations_cap {} is below stop_factor * D = {}",
                self.max_iterations_cap,
                self.stop_factor * num_d2d
            )));
        }
        Ok(())
    }
}

/// One accepted switch. Coalitions are 1-based ids (`C + 1` = mmWave).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchRecord {
    pub iteration: u64,
    pub pair: usize,
    pub from: usize,
    pub to: usize,
    /// Increase of the system sum rate, bit/s.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchTrace {
    pub switches: Vec<SwitchRecord>,
    pub total_switch_count: usize,
    /// Loop bodies executed (one proposal each).
    pub iterations: u64,
    /// Coalition values computed, including the initial `C + 1`.
    pub coalition_evaluations: u64,
    pub initial_partition: Partition,
    pub final_partition: Partition,
}

fn check_pair(partition: &Partition, d: usize) -> Result<Coalition> {
    partition.coalition_of(d)
}

fn check_target(partition: &Partition, d: usize, target: Coalition) -> Result<Coalition> {
    let current = check_pair(partition, d)?;
    if let Coalition::Cellular(c) = target {
        if c >= partition.num_cellular() {
            return Err(Error::InvalidIndex {
                what: "cellular user",
                index: c,
                len: partition.num_cellular(),
            });
        }
    }
    if current == target {
        return Err(Error::SameCoalition { pair: d });
    }
    Ok(current)
}

fn without(members: &[usize], d: usize) -> Vec<usize> {
    members.iter().copied().filter(|&m| m != d).collect()
}

fn with(members: &[usize], d: usize) -> Vec<usize> {
    let mut out = members.to_vec();
    if let Err(pos) = out.binary_search(&d) {
        out.insert(pos, d);
    }
    out
}

/// `[R(current \ d) + R(target + d)] - [R(current) + R(target)]`.
pub fn switch_gain(
    model: &RateModel,
    partition: &Partition,
    d: usize,
    target: Coalition,
) -> Result<f64> {
    partition.check_dimensions(model.num_cellular(), model.num_d2d())?;
    let current = check_target(partition, d, target)?;
    let cur_members = partition.members(current);
    let tgt_members = partition.members(target);
    let before = model.coalition_value_unchecked(current, &cur_members)
        + model.coalition_value_unchecked(target, &tgt_members);
    let after = model.coalition_value_unchecked(current, &without(&cur_members, d))
        + model.coalition_value_unchecked(target, &with(&tgt_members, d));
    Ok(after - before)
}

pub fn apply_switch(partition: &Partition, d: usize, target: Coalition) -> Result<Partition> {
    check_target(partition, d, target)?;
    let mut next = partition.clone();
    next.reassign(d, target);
    Ok(next)
}

/// Initial partition with each pair uniform over the coalitions of `space`.
pub fn random_partition(
    num_cellular: usize,
    num_d2d: usize,
    space: StrategySpace,
    seed: u64,
) -> Result<Partition> {
    let options = space.coalitions(num_cellular);
    if options.is_empty() {
        return Err(Error::NoCellularUsers);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let assignment = (0..num_d2d)
        .map(|_| options[rng.random_range(0..options.len())])
        .collect();
    Partition::new(num_cellular, assignment)
}

/// Runs coalition formation over every coalition, mmWave included.
pub fn form_coalitions(
    model: &RateModel,
    initial: &Partition,
    config: &FormationConfig,
) -> Result<SwitchTrace> {
    form_coalitions_in(model, initial, config, StrategySpace::Full)
}

struct CandidateQueue {
    generation: u64,
    queue: Vec<Coalition>,
}

pub fn form_coalitions_in(
    model: &RateModel,
    initial: &Partition,
    config: &FormationConfig,
    space: StrategySpace,
) -> Result<SwitchTrace> {
    let num_cellular = model.num_cellular();
    let num_d2d = model.num_d2d();
    initial.check_dimensions(num_cellular, num_d2d)?;
    config.validate(num_d2d)?;
    if initial.assignment().iter().any(|&a| !space.allows(a)) {
        return Err(Error::DisallowedCoalition);
    }

    let allowed = space.coalitions(num_cellular);
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut partition = initial.clone();
    let mut members = partition.coalitions();
    let mut values = vec![0.0; num_cellular + 1];
    let mut evaluations = 0u64;
    for &coal in &allowed {
        let slot = coal.slot(num_cellular);
        values[slot] = model.coalition_value_unchecked(coal, &members[slot]);
        evaluations += 1;
    }

    let mut trace = SwitchTrace {
        switches: Vec::new(),
        total_switch_count: 0,
        iterations: 0,
        coalition_evaluations: 0,
        initial_partition: initial.clone(),
        final_partition: initial.clone(),
    };
    if num_d2d == 0 || allowed.len() < 2 {
        trace.coalition_evaluations = evaluations;
        return Ok(trace);
    }

    let stop = (config.stop_factor * num_d2d) as u64;
    let mut order: Vec<usize> = (0..num_d2d).collect();
    let mut pos = num_d2d;
    let mut generation = 0u64;
    let mut queues: Vec<CandidateQueue> = (0..num_d2d)
        .map(|_| CandidateQueue {
            generation: u64::MAX,
            queue: Vec::new(),
        })
        .collect();
    let mut rejected = 0u64;
    let mut iteration = 0u64;

    while rejected < stop {
        if iteration >= config.max_iterations_cap {
            trace.iterations = iteration;
            trace.coalition_evaluations = evaluations;
            trace.total_switch_count = trace.switches.len();
            trace.final_partition = partition;
            return Err(Error::CapExhausted(Box::new(trace)));
        }
        if pos == num_d2d {
            if config.order_policy == OrderPolicy::RandomPermutationPerPass {
                order.shuffle(&mut rng);
            }
            pos = 0;
        }
        let d = order[pos];
        pos += 1;

        let current = partition.assignment()[d];
        let target = match config.candidate_draw {
            CandidateDraw::WithReplacement => {
                let k = rng.random_range(0..allowed.len() - 1);
                let pick = allowed[k];
                if pick >= current && allowed.contains(&current) {
                    allowed[k + 1]
                } else {
                    pick
                }
            }
            CandidateDraw::WithoutReplacement => {
                let q = &mut queues[d];
                if q.generation != generation || q.queue.is_empty() {
                    q.queue = allowed.iter().copied().filter(|&a| a != current).collect();
                    q.queue.shuffle(&mut rng);
                    q.generation = generation;
                }
                q.queue.pop().expect("at least one alternative coalition")
            }
        };

        let cur_slot = current.slot(num_cellular);
        let tgt_slot = target.slot(num_cellular);
        let cur_after = without(&members[cur_slot], d);
        let tgt_after = with(&members[tgt_slot], d);
        let v_cur = model.coalition_value_unchecked(current, &cur_after);
        let v_tgt = model.coalition_value_unchecked(target, &tgt_after);
        evaluations += 2;
        let gain = (v_cur + v_tgt) - (values[cur_slot] + values[tgt_slot]);

        if gain > 0.0 {
            members[cur_slot] = cur_after;
            members[tgt_slot] = tgt_after;
            values[cur_slot] = v_cur;
            values[tgt_slot] = v_tgt;
            partition.reassign(d, target);
            trace.switches.push(SwitchRecord {
                iteration,
                pair: d,
                from: current.id(num_cellular),
                to: target.id(num_cellular),
                gain,
            });
            generation += 1;
            rejected = 0;
        } else {
            rejected += 1;
        }
        iteration += 1;
    }

    trace.iterations = iteration;
    trace.coalition_evaluations = evaluations;
    trace.total_switch_count = trace.switches.len();
    trace.final_partition = partition;
    Ok(trace)
}

/// A profitable unilateral move.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub pair: usize,
    pub target: Coalition,
    pub gain: f64,
}

pub fn is_nash_stable(model: &RateModel, partition: &Partition) -> Result<(bool, Option<Violation>)> {
    is_nash_stable_in(model, partition, StrategySpace::Full)
}

/// Checks every pair against every other allowed coalition.
pub fn is_nash_stable_in(
    model: &RateModel,
    partition: &Partition,
    space: StrategySpace,
) -> Result<(bool, Option<Violation>)> {
    partition.check_dimensions(model.num_cellular(), model.num_d2d())?;
    let allowed = space.coalitions(model.num_cellular());
    for d in 0..partition.num_d2d() {
        let current = partition.assignment()[d];
        for &target in allowed.iter().filter(|&&t| t != current) {
            let gain = switch_gain(model, partition, d, target)?;
            if gain > 0.0 {
                return Ok((false, Some(Violation { pair: d, target, gain })));
            }
        }
    }
    Ok((true, None))
}
