//! Expected per-machine income under a static network snapshot.

use serde::Serialize;

use crate::market_data::{CoinParams, EconParams, Machine};

const SECONDS_PER_HOUR: f64 = 3600.0;
const WATTS_PER_KW: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IncomeRate<'a> {
    pub machine: &'a Machine,
    /// Net USD per hour; negative when electricity outweighs revenue.
    pub usd_per_hour: f64,
}

/// USD of freshly minted tokens per hour, proportional to hash share.
pub fn revenue_per_hour(m: &Machine, c: &CoinParams) -> f64 {
    SECONDS_PER_HOUR
        * (m.hash_rate / c.total_hash_rate)
        * c.block_reward
        * c.block_rate
        * c.token_price
}

pub fn electricity_per_hour(m: &Machine, e: &EconParams) -> f64 {
    m.power / WATTS_PER_KW * e.electricity_cost
}

pub fn income_rate<'a>(m: &'a Machine, c: &CoinParams, e: &EconParams) -> IncomeRate<'a> {
    IncomeRate {
        machine: m,
        usd_per_hour: revenue_per_hour(m, c) - electricity_per_hour(m, e),
    }
}

/// Period income of a single machine relative to its price.
pub fn machine_roi(m: &Machine, c: &CoinParams, e: &EconParams) -> f64 {
    e.duration * income_rate(m, c, e).usd_per_hour / m.price
}

/// Machines with strictly positive income rate, in input order.
pub fn profitable_machines(ms: &[Machine], c: &CoinParams, e: &EconParams) -> Vec<Machine> {
    ms.iter()
        .filter(|m| income_rate(m, c, e).usd_per_hour > 0.0)
        .cloned()
        .collect()
}

/// The machine with the highest period ROI, if any.
pub fn best_machine<'a>(ms: &'a [Machine], c: &CoinParams, e: &EconParams) -> Option<&'a Machine> {
    ms.iter()
        .map(|m| (m, machine_roi(m, c, e)))
        .fold(None, |best: Option<(&Machine, f64)>, (m, roi)| match best {
            Some((_, b)) if b >= roi => best,
            _ => Some((m, roi)),
        })
        .map(|(m, _)| m)
}
