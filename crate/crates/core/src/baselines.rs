//! Comparison schemes and the exhaustive-search optimum.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::game::{form_coalitions_in, random_partition, FormationConfig, StrategySpace, SwitchTrace};
use crate::rate::{Coalition, Partition, RateModel};
use crate::seed;

/// Default cap on partitions the exhaustive search will evaluate.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Full mmWave: every pair on the mmWave band.
pub fn fmc_partition(num_cellular: usize, num_d2d: usize) -> Partition {
    Partition::uniform(num_cellular, num_d2d, Coalition::MmWave)
        .expect("mmWave is always a valid coalition")
}

/// Random: each pair uniform over all `C + 1` coalitions.
pub fn rc_partition(num_cellular: usize, num_d2d: usize, seed: u64) -> Partition {
    random_partition(num_cellular, num_d2d, StrategySpace::Full, seed)
        .expect("full space is never empty")
}

/// Full cellular: each pair uniform over the `C` cellular uplinks.
pub fn fcc_partition(num_cellular: usize, num_d2d: usize, seed: u64) -> Result<Partition> {
    random_partition(num_cellular, num_d2d, StrategySpace::CellularOnly, seed)
}

/// Coalition formation restricted to the cellular uplinks, started from a
/// uniform cellular-only partition.
pub fn ccg_partition(model: &RateModel, config: &FormationConfig) -> Result<SwitchTrace> {
    let initial = fcc_partition(
        model.num_cellular(),
        model.num_d2d(),
        seed::derive(config.rng_seed, &[0xCC6]),
    )?;
    form_coalitions_in(model, &initial, config, StrategySpace::CellularOnly)
}

/// Number of partitions in `space`, saturating.
pub fn search_space_size(num_cellular: usize, num_d2d: usize, space: StrategySpace) -> u128 {
    let radix = space.coalitions(num_cellular).len() as u128;
    let mut total: u128 = 1;
    for _ in 0..num_d2d {
        total = total.saturating_mul(radix);
    }
    total
}

pub fn check_budget(
    num_cellular: usize,
    num_d2d: usize,
    space: StrategySpace,
    budget: u64,
) -> Result<u128> {
    let required = search_space_size(num_cellular, num_d2d, space);
    if required > budget as u128 {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(required)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Optimum {
    pub partition: Partition,
    pub sum_rate: f64,
    pub evaluated: u64,
}

pub fn exhaustive_optimal(model: &RateModel, budget: u64) -> Result<Optimum> {
    exhaustive_optimal_in(model, budget, StrategySpace::Full)
}

const CHUNK: u64 = 1 << 12;

/// Enumerates every assignment in mixed-radix order (pair 0 most
/// significant) and keeps the highest sum rate; ties go to the
/// lexicographically smallest assignment.
pub fn exhaustive_optimal_in(
    model: &RateModel,
    budget: u64,
    space: StrategySpace,
) -> Result<Optimum> {
    let c_count = model.num_cellular();
    let d_count = model.num_d2d();
    let options = space.coalitions(c_count);
    if options.is_empty() {
        return Err(Error::NoCellularUsers);
    }
    let total = check_budget(c_count, d_count, space, budget)? as u64;
    let radix = options.len() as u64;

    let decode = |mut index: u64, digits: &mut [usize]| {
        for slot in digits.iter_mut().rev() {
            *slot = (index % radix) as usize;
            index /= radix;
        }
    };

    let chunks = total.div_ceil(CHUNK);
    let best = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(total);
            let mut digits = vec![0usize; d_count];
            decode(start, &mut digits);
            let mut assignment: Vec<Coalition> = digits.iter().map(|&k| options[k]).collect();
            let mut scratch = Vec::new();
            let mut best = (f64::NEG_INFINITY, u64::MAX);
            for index in start..end {
                let v = model.partition_value(&assignment, &mut scratch);
                if v > best.0 {
                    best = (v, index);
                }
                // increment, least significant digit last
                for pos in (0..d_count).rev() {
                    digits[pos] += 1;
                    if digits[pos] < options.len() {
                        assignment[pos] = options[digits[pos]];
                        break;
                    }
                    digits[pos] = 0;
                    assignment[pos] = options[0];
                }
            }
            best
        })
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX),
            |a, b| {
                if a.0 > b.0 || (a.0 == b.0 && a.1 < b.1) {
                    a
                } else {
                    b
                }
            },
        );

    let mut digits = vec![0usize; d_count];
    decode(best.1, &mut digits);
    let partition = Partition::new(c_count, digits.iter().map(|&k| options[k]).collect())?;
    Ok(Optimum {
        partition,
        sum_rate: best.0,
        evaluated: total,
    })
}
