//! Capital allocation over mining hardware.
//!
//! Three solvers share the same accounting: an upfront unbounded-knapsack
//! dynamic program, an exhaustive enumeration used as its oracle, and an
//! exact search over purchase schedules that may reinvest mid-period income.
//!
//! Proceeds are fresh coins only. Purchase cost consumes capital but is not
//! subtracted from proceeds, so the ROI of capital `v` is `proceeds / v`.

mod brute_force;
mod knapsack;
mod schedule;

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::error::{check, Error, Result};
use crate::market_data::{CoinParams, EconParams, Machine};
use crate::mining_model::income_rate;

pub use brute_force::{brute_force_allocate, brute_force_items, ORACLE_LIMIT};
pub use knapsack::{knapsack_allocate, knapsack_items, KnapsackTable, MAX_DP_CELLS};
pub use schedule::{
    ip_schedule, ip_schedule_with, schedule_items, IpItem, IpObjective, Schedule, MAX_IP_STEPS,
    MAX_IP_TYPES,
};

pub const DEFAULT_GRANULARITY: f64 = 1.0;

/// A purchasable option reduced to its price and its value over the period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Item {
    pub price: f64,
    pub value: f64,
}

/// Item-level solution: one count per input item.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub counts: Vec<u64>,
    pub spent: f64,
    pub value: f64,
}

impl Solution {
    fn empty(n: usize) -> Self {
        Self {
            counts: vec![0; n],
            spent: 0.0,
            value: 0.0,
        }
    }

    /// Recomputes spent and value from counts in item order.
    fn from_counts(counts: Vec<u64>, items: &[Item]) -> Self {
        let (spent, value) = totals(&counts, items);
        Self {
            counts,
            spent,
            value,
        }
    }
}

pub(crate) fn totals(counts: &[u64], items: &[Item]) -> (f64, f64) {
    counts
        .iter()
        .zip(items)
        .fold((0.0, 0.0), |(s, v), (&n, it)| {
            let n = n as f64;
            (s + n * it.price, v + n * it.value)
        })
}

/// A machine configuration bought upfront with a given capital.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub capital: f64,
    /// Nonzero counts, in the order the machines were supplied.
    pub counts: Vec<(Machine, u64)>,
    pub spent: f64,
    pub proceeds: f64,
}

impl Allocation {
    pub fn empty(capital: f64) -> Self {
        Self {
            capital,
            counts: Vec::new(),
            spent: 0.0,
            proceeds: 0.0,
        }
    }

    pub fn count_of(&self, name: &str) -> u64 {
        self.counts
            .iter()
            .find(|(m, _)| m.name == name)
            .map_or(0, |(_, n)| *n)
    }

    pub fn machine_count(&self) -> u64 {
        self.counts.iter().map(|(_, n)| n).sum()
    }

    pub fn roi(&self) -> Result<f64> {
        check_capital_positive(self.capital)?;
        Ok(self.proceeds / self.capital)
    }

    fn from_solution(capital: f64, machines: &[Machine], s: Solution) -> Self {
        Self {
            capital,
            counts: machines
                .iter()
                .zip(s.counts)
                .filter(|(_, n)| *n > 0)
                .map(|(m, n)| (m.clone(), n))
                .collect(),
            spent: s.spent,
            proceeds: s.value,
        }
    }
}

struct Counts<'a>(&'a [(Machine, u64)]);

impl Serialize for Counts<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (m, n) in self.0 {
            map.serialize_entry(&m.name, n)?;
        }
        map.end()
    }
}

impl Serialize for Allocation {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Allocation", 4)?;
        s.serialize_field("capital_usd", &self.capital)?;
        s.serialize_field("spent_usd", &self.spent)?;
        s.serialize_field("proceeds_usd", &self.proceeds)?;
        s.serialize_field("counts", &Counts(&self.counts))?;
        s.end()
    }
}

/// Profitable machines with their knapsack items (value = duration x income rate).
pub(crate) fn machine_items(
    ms: &[Machine],
    c: &CoinParams,
    e: &EconParams,
) -> (Vec<Machine>, Vec<Item>) {
    ms.iter()
        .filter_map(|m| {
            let rate = income_rate(m, c, e).usd_per_hour;
            (rate > 0.0).then(|| {
                (
                    m.clone(),
                    Item {
                        price: m.price,
                        value: e.duration * rate,
                    },
                )
            })
        })
        .unzip()
}

pub(crate) fn check_capital(capital: f64) -> Result<f64> {
    check("capital", capital, |v| v >= 0.0, "capital must be non-negative")
}

pub(crate) fn check_capital_positive(capital: f64) -> Result<f64> {
    check("capital", capital, |v| v > 0.0, "capital must be positive")
}

pub(crate) fn check_granularity(granularity: f64) -> Result<f64> {
    check("granularity", granularity, |v| v > 0.0, "granularity must be positive")
}

/// Best achievable fresh proceeds per unit of capital.
pub fn optimal_roi(
    capital: f64,
    ms: &[Machine],
    c: &CoinParams,
    e: &EconParams,
    granularity: f64,
) -> Result<f64> {
    check_capital_positive(capital)?;
    Ok(knapsack_allocate(capital, ms, c, e, granularity)?.proceeds / capital)
}

/// ROI evaluator for a fixed proof-of-work instance, backed by one DP table
/// shared across every capital up to `max_capital`.
#[derive(Debug, Clone)]
pub struct KnapsackEvaluator {
    machines: Vec<Machine>,
    table: KnapsackTable,
}

impl KnapsackEvaluator {
    pub fn new(
        ms: &[Machine],
        c: &CoinParams,
        e: &EconParams,
        granularity: f64,
        max_capital: f64,
    ) -> Result<Self> {
        check_capital(max_capital)?;
        let (machines, items) = machine_items(ms, c, e);
        let table = KnapsackTable::build(&items, granularity, max_capital)?;
        Ok(Self { machines, table })
    }

    pub fn max_capital(&self) -> f64 {
        self.table.max_capital()
    }

    pub fn allocation(&self, capital: f64) -> Result<Allocation> {
        let s = self.table.solution(capital)?;
        Ok(Allocation::from_solution(capital, &self.machines, s))
    }

    pub fn roi(&self, capital: f64) -> Result<f64> {
        check_capital_positive(capital)?;
        Ok(self.table.solution(capital)?.value / capital)
    }
}

fn unreachable_capital(capital: f64, max: f64) -> Error {
    Error::CapitalOutOfRange { capital, max }
}
