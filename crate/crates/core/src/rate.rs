//! Per-user rates, coalition values and the system sum rate.
//!
//! A cellular coalition's value is its owner's uplink rate plus the rates
//! of the D2D pairs reusing that uplink. The mmWave coalition's value is the
//! blockage-discounted sum of its members' rates. The system sum rate is the
//! sum of all `C + 1` coalition values; [`RateModel::sum_rate_direct`]
//! computes the same quantity user by user as an independent path.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::{LinkBudget, LinkTable};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::scenario::Scenario;
use crate::units::shannon_rate;

/// One of the `C + 1` coalitions a D2D pair can join.
///
/// Ordered as the 1-based ids `1..=C` for cellular users followed by
/// `C + 1` for mmWave.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Coalition {
    /// Shares the uplink of the cellular user with this 0-based index.
    Cellular(usize),
    MmWave,
}

impl Coalition {
    /// 1-based id, with `C + 1` meaning mmWave.
    pub fn id(self, num_cellular: usize) -> usize {
        match self {
            Coalition::Cellular(c) => c + 1,
            Coalition::MmWave => num_cellular + 1,
        }
    }

    pub fn from_id(id: usize, num_cellular: usize) -> Result<Self> {
        match id {
            0 => Err(Error::InvalidIndex {
                what: "coalition id",
                index: 0,
                len: num_cellular + 1,
            }),
            id if id <= num_cellular => Ok(Coalition::Cellular(id - 1)),
            id if id == num_cellular + 1 => Ok(Coalition::MmWave),
            id => Err(Error::InvalidIndex {
                what: "coalition id",
                index: id,
                len: num_cellular + 1,
            }),
        }
    }

    /// 0-based slot: `0..C` cellular, `C` mmWave.
    pub fn slot(self, num_cellular: usize) -> usize {
        self.id(num_cellular) - 1
    }

    pub fn from_slot(slot: usize, num_cellular: usize) -> Result<Self> {
        Self::from_id(slot + 1, num_cellular)
    }

    pub fn is_cellular(self) -> bool {
        matches!(self, Coalition::Cellular(_))
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coalition::Cellular(c) => write!(f, "cellular#{}", c + 1),
            Coalition::MmWave => f.write_str("mmwave"),
        }
    }
}

/// Assignment of every D2D pair to exactly one coalition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct Partition {
    num_cellular: usize,
    assignment: Vec<Coalition>,
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    num_cellular: usize,
    /// 1-based coalition ids.
    assignment: Vec<usize>,
}

impl TryFrom<PartitionRepr> for Partition {
    type Error = Error;

    fn try_from(r: PartitionRepr) -> Result<Self> {
        Partition::from_ids(r.num_cellular, &r.assignment)
    }
}

impl From<Partition> for PartitionRepr {
    fn from(p: Partition) -> Self {
        PartitionRepr {
            num_cellular: p.num_cellular,
            assignment: p.ids(),
        }
    }
}

impl Partition {
    pub fn new(num_cellular: usize, assignment: Vec<Coalition>) -> Result<Self> {
        for &a in &assignment {
            if let Coalition::Cellular(c) = a {
                if c >= num_cellular {
                    return Err(Error::InvalidIndex {
                        what: "cellular user",
                        index: c,
                        len: num_cellular,
                    });
                }
            }
        }
        Ok(Self {
            num_cellular,
            assignment,
        })
    }

    pub fn from_ids(num_cellular: usize, ids: &[usize]) -> Result<Self> {
        let assignment = ids
            .iter()
            .map(|&id| Coalition::from_id(id, num_cellular))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            num_cellular,
            assignment,
        })
    }

    pub fn uniform(num_cellular: usize, num_d2d: usize, coalition: Coalition) -> Result<Self> {
        Self::new(num_cellular, vec![coalition; num_d2d])
    }

    pub fn ids(&self) -> Vec<usize> {
        self.assignment
            .iter()
            .map(|a| a.id(self.num_cellular))
            .collect()
    }

    pub fn assignment(&self) -> &[Coalition] {
        &self.assignment
    }

    pub fn num_cellular(&self) -> usize {
        self.num_cellular
    }

    pub fn num_d2d(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_coalitions(&self) -> usize {
        self.num_cellular + 1
    }

    pub fn coalition_of(&self, d: usize) -> Result<Coalition> {
        self.assignment.get(d).copied().ok_or(Error::InvalidIndex {
            what: "D2D pair",
            index: d,
            len: self.assignment.len(),
        })
    }

    /// Sorted members of one coalition.
    pub fn members(&self, coalition: Coalition) -> Vec<usize> {
        (0..self.assignment.len())
            .filter(|&d| self.assignment[d] == coalition)
            .collect()
    }

    /// Members of every coalition, indexed by slot (`C` is mmWave).
    pub fn coalitions(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_coalitions()];
        for (d, a) in self.assignment.iter().enumerate() {
            out[a.slot(self.num_cellular)].push(d);
        }
        out
    }

    pub fn all_coalitions(&self) -> impl Iterator<Item = Coalition> {
        (0..self.num_cellular)
            .map(Coalition::Cellular)
            .chain(std::iter::once(Coalition::MmWave))
    }

    pub(crate) fn reassign(&mut self, d: usize, to: Coalition) {
        self.assignment[d] = to;
    }

    pub fn check_dimensions(&self, num_cellular: usize, num_d2d: usize) -> Result<()> {
        if self.num_cellular != num_cellular || self.assignment.len() != num_d2d {
            return Err(Error::DimensionMismatch(format!(
                "partition is for C={}, D={}; scenario has C={num_cellular}, D={num_d2d}",
                self.num_cellular,
                self.assignment.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub per_cellular_rate: Vec<f64>,
    /// Pre-outage rate of every D2D pair in its assigned band.
    pub per_d2d_rate: Vec<f64>,
    /// `C + 1` values, mmWave last.
    pub per_coalition_value: Vec<f64>,
    pub system_sum_rate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellularCoalitionValue {
    pub cellular_rate: f64,
    /// Rates of the members, in the order given.
    pub member_rates: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MmWaveCoalitionValue {
    /// Pre-outage rates of the members, in the order given.
    pub member_rates: Vec<f64>,
    pub value: f64,
}

/// Rate evaluator bound to one scenario.
#[derive(Debug, Clone)]
pub struct RateModel {
    table: LinkTable,
    cell_bandwidth: f64,
    mmwave_bandwidth: f64,
}

impl RateModel {
    pub fn new(scenario: &Scenario, params: &SystemParams) -> Result<Self> {
        Ok(Self {
            table: LinkTable::build(scenario, params)?,
            cell_bandwidth: params.cell_bandwidth_hz,
            mmwave_bandwidth: params.mmwave_bandwidth_hz,
        })
    }

    pub fn table(&self) -> &LinkTable {
        &self.table
    }

    pub fn num_cellular(&self) -> usize {
        self.table.num_cellular()
    }

    pub fn num_d2d(&self) -> usize {
        self.table.num_d2d()
    }

    fn check_members(&self, members: &[usize]) -> Result<()> {
        let d = self.num_d2d();
        let mut seen = vec![false; d];
        for &m in members {
            if m >= d {
                return Err(Error::InvalidIndex {
                    what: "D2D pair",
                    index: m,
                    len: d,
                });
            }
            if std::mem::replace(&mut seen[m], true) {
                return Err(Error::DimensionMismatch(format!("pair {m} listed twice")));
            }
        }
        Ok(())
    }

    fn check_cellular(&self, c: usize) -> Result<()> {
        let len = self.num_cellular();
        if c >= len {
            return Err(Error::InvalidIndex {
                what: "cellular user",
                index: c,
                len,
            });
        }
        Ok(())
    }

    /// Uplink budget of cellular user `c` at the BS with `members` reusing it.
    pub fn cellular_budget(&self, c: usize, members: &[usize]) -> LinkBudget {
        let t = &self.table;
        let interference = members.iter().map(|&d| t.d2d_to_bs[d]).sum();
        LinkBudget::new(t.cell_to_bs[c], interference, t.cell_noise)
    }

    /// Budget at pair `d`'s receiver when it shares `c`'s uplink with `members`
    /// (which may or may not list `d` itself).
    pub fn cellular_d2d_budget(&self, c: usize, d: usize, members: &[usize]) -> LinkBudget {
        let t = &self.table;
        let from_others: f64 = members
            .iter()
            .filter(|&&m| m != d)
            .map(|&m| t.d2d_cellular[m][d])
            .sum();
        LinkBudget::new(
            t.d2d_cellular[d][d],
            t.cell_to_d2d[c][d] + from_others,
            t.cell_noise,
        )
    }

    pub fn mmwave_budget(&self, d: usize, members: &[usize]) -> LinkBudget {
        let t = &self.table;
        let interference = members
            .iter()
            .filter(|&&m| m != d)
            .map(|&m| t.mmwave[m][d])
            .sum();
        LinkBudget::new(t.mmwave[d][d], interference, t.mmwave_noise)
    }

    fn cellular_value_unchecked(&self, c: usize, members: &[usize]) -> f64 {
        let owner = shannon_rate(self.cell_bandwidth, self.cellular_budget(c, members).sinr);
        owner
            + members
                .iter()
                .map(|&d| shannon_rate(self.cell_bandwidth, self.cellular_d2d_budget(c, d, members).sinr))
                .sum::<f64>()
    }

    fn mmwave_value_unchecked(&self, members: &[usize]) -> f64 {
        members
            .iter()
            .map(|&d| {
                let r = shannon_rate(self.mmwave_bandwidth, self.mmwave_budget(d, members).sinr);
                (1.0 - self.table.blockage[d]) * r
            })
            .sum()
    }

    pub fn cellular_coalition_value(
        &self,
        c: usize,
        members: &[usize],
    ) -> Result<CellularCoalitionValue> {
        self.check_cellular(c)?;
        self.check_members(members)?;
        let cellular_rate = shannon_rate(self.cell_bandwidth, self.cellular_budget(c, members).sinr);
        let member_rates: Vec<f64> = members
            .iter()
            .map(|&d| shannon_rate(self.cell_bandwidth, self.cellular_d2d_budget(c, d, members).sinr))
            .collect();
        let value = cellular_rate + member_rates.iter().sum::<f64>();
        Ok(CellularCoalitionValue {
            cellular_rate,
            member_rates,
            value,
        })
    }

    pub fn mmwave_coalition_value(&self, members: &[usize]) -> Result<MmWaveCoalitionValue> {
        self.check_members(members)?;
        let member_rates: Vec<f64> = members
            .iter()
            .map(|&d| shannon_rate(self.mmwave_bandwidth, self.mmwave_budget(d, members).sinr))
            .collect();
        let value = members
            .iter()
            .zip(&member_rates)
            .map(|(&d, r)| (1.0 - self.table.blockage[d]) * r)
            .sum();
        Ok(MmWaveCoalitionValue {
            member_rates,
            value,
        })
    }

    /// `R(F_c)` for any coalition.
    pub fn coalition_value(&self, coalition: Coalition, members: &[usize]) -> Result<f64> {
        self.check_members(members)?;
        match coalition {
            Coalition::Cellular(c) => {
                self.check_cellular(c)?;
                Ok(self.cellular_value_unchecked(c, members))
            }
            Coalition::MmWave => Ok(self.mmwave_value_unchecked(members)),
        }
    }

    /// Caller guarantees valid, duplicate-free indices.
    pub(crate) fn coalition_value_unchecked(&self, coalition: Coalition, members: &[usize]) -> f64 {
        match coalition {
            Coalition::Cellular(c) => self.cellular_value_unchecked(c, members),
            Coalition::MmWave => self.mmwave_value_unchecked(members),
        }
    }

    /// Same number as `system_sum_rate(..).system_sum_rate`, bit for bit,
    /// reusing `scratch` for the member lists.
    pub(crate) fn partition_value(&self, assignment: &[Coalition], scratch: &mut Vec<Vec<usize>>) -> f64 {
        let c_count = self.num_cellular();
        scratch.resize_with(c_count + 1, Vec::new);
        for group in scratch.iter_mut() {
            group.clear();
        }
        for (d, a) in assignment.iter().enumerate() {
            scratch[a.slot(c_count)].push(d);
        }
        let mut total = 0.0;
        for (slot, members) in scratch.iter().enumerate() {
            let coalition = if slot < c_count {
                Coalition::Cellular(slot)
            } else {
                Coalition::MmWave
            };
            total += self.coalition_value_unchecked(coalition, members);
        }
        total
    }

    fn check_partition(&self, partition: &Partition) -> Result<()> {
        partition.check_dimensions(self.num_cellular(), self.num_d2d())
    }

    pub fn system_sum_rate(&self, partition: &Partition) -> Result<RateReport> {
        self.check_partition(partition)?;
        let c_count = self.num_cellular();
        let groups = partition.coalitions();
        let mut per_cellular_rate = Vec::with_capacity(c_count);
        let mut per_d2d_rate = vec![0.0; self.num_d2d()];
        let mut per_coalition_value = Vec::with_capacity(c_count + 1);
        for (c, members) in groups.iter().take(c_count).enumerate() {
            let v = self.cellular_coalition_value(c, members)?;
            for (&d, &r) in members.iter().zip(&v.member_rates) {
                per_d2d_rate[d] = r;
            }
            per_cellular_rate.push(v.cellular_rate);
            per_coalition_value.push(v.value);
        }
        let mm = self.mmwave_coalition_value(&groups[c_count])?;
        for (&d, &r) in groups[c_count].iter().zip(&mm.member_rates) {
            per_d2d_rate[d] = r;
        }
        per_coalition_value.push(mm.value);
        let system_sum_rate = per_coalition_value.iter().fold(0.0, |acc, v| acc + v);
        Ok(RateReport {
            per_cellular_rate,
            per_d2d_rate,
            per_coalition_value,
            system_sum_rate,
        })
    }

    /// System sum rate straight from the per-user sums over the indicator
    /// variables, without grouping into coalitions.
    pub fn sum_rate_direct(&self, partition: &Partition) -> Result<f64> {
        self.check_partition(partition)?;
        Ok(self.sum_rate_direct_unchecked(partition.assignment()))
    }

    pub(crate) fn sum_rate_direct_unchecked(&self, assignment: &[Coalition]) -> f64 {
        let t = &self.table;
        let mut total = 0.0;
        for c in 0..self.num_cellular() {
            let mine = Coalition::Cellular(c);
            let interference: f64 = assignment
                .iter()
                .zip(&t.d2d_to_bs)
                .filter(|(a, _)| **a == mine)
                .map(|(_, p)| p)
                .sum();
            total += shannon_rate(self.cell_bandwidth, t.cell_to_bs[c] / (interference + t.cell_noise));
        }
        for (d, &a) in assignment.iter().enumerate() {
            match a {
                Coalition::Cellular(c) => {
                    let mut interference = t.cell_to_d2d[c][d];
                    for (m, &b) in assignment.iter().enumerate() {
                        if m != d && b == a {
                            interference += t.d2d_cellular[m][d];
                        }
                    }
                    let sinr = t.d2d_cellular[d][d] / (interference + t.cell_noise);
                    total += shannon_rate(self.cell_bandwidth, sinr);
                }
                Coalition::MmWave => {
                    let mut interference = 0.0;
                    for (m, &b) in assignment.iter().enumerate() {
                        if m != d && b == Coalition::MmWave {
                            interference += t.mmwave[m][d];
                        }
                    }
                    let sinr = t.mmwave[d][d] / (interference + t.mmwave_noise);
                    total += (1.0 - t.blockage[d]) * shannon_rate(self.mmwave_bandwidth, sinr);
                }
            }
        }
        total
    }
}
