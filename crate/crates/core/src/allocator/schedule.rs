//! Exact search over purchase schedules that may reinvest mining income.
//!
//! The period is split into `steps` equal intervals indexed `1..=steps`;
//! index 0 is the starting point where nothing is held yet. Holdings never
//! decrease. At every step, cumulative purchases plus cumulative electricity
//! minus cumulative gross income (all through that step) must not exceed the
//! initial capital.
//!
//! The search runs forward in time over holdings vectors. For each vector it
//! keeps the Pareto frontier of (slack, gross income), where slack is the
//! capital left after costs and income so far. Both objectives below are
//! monotone in those two quantities, so dominated partial schedules can be
//! dropped without losing the optimum.

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::market_data::{CoinParams, EconParams, Machine};
use crate::mining_model::{electricity_per_hour, revenue_per_hour};

use super::check_capital;

pub const MAX_IP_TYPES: usize = 4;
pub const MAX_IP_STEPS: usize = 24;
/// Upper limit on holdings transitions examined per step.
const MAX_TRANSITIONS: f64 = 2e6;

/// How leftover capital and overflowing costs enter the objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IpObjective {
    /// `max(0, v - purchases - electricity) + gross income`.
    #[default]
    AsWritten,
    /// Costs are paid from capital first; only the overflow reduces gross
    /// income: `gross - max(0, purchases + electricity - v)`.
    CapitalFirst,
}

impl IpObjective {
    fn score(self, gross: f64, slack: f64) -> f64 {
        // with slack = v - purchases - electricity + gross:
        //   as written:    max(0, slack - gross) + gross = max(gross, slack)
        //   capital first: gross - max(0, gross - slack)  = min(gross, slack)
        match self {
            IpObjective::AsWritten => gross.max(slack),
            IpObjective::CapitalFirst => gross.min(slack),
        }
    }
}

/// One machine type as seen by the schedule search, per time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpItem {
    pub price: f64,
    pub gross_per_step: f64,
    pub electricity_per_step: f64,
}

impl IpItem {
    fn net(&self) -> f64 {
        self.gross_per_step - self.electricity_per_step
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub names: Vec<String>,
    pub items: Vec<IpItem>,
    pub capital: f64,
    pub steps: usize,
    pub step_hours: f64,
    pub objective_kind: IpObjective,
    /// `holdings[m][t]` for `t` in `0..=steps`; `holdings[m][0] == 0`.
    pub holdings: Vec<Vec<u64>>,
    pub objective: f64,
}

impl Schedule {
    fn purchases(&self, m: usize, t: usize) -> u64 {
        self.holdings[m][t] - self.holdings[m][t - 1]
    }

    pub fn gross_income(&self) -> f64 {
        (1..=self.steps)
            .flat_map(|t| {
                self.items
                    .iter()
                    .enumerate()
                    .map(move |(m, it)| self.holdings[m][t] as f64 * it.gross_per_step)
            })
            .sum()
    }

    pub fn purchase_cost(&self) -> f64 {
        (1..=self.steps)
            .flat_map(|t| {
                self.items
                    .iter()
                    .enumerate()
                    .map(move |(m, it)| self.purchases(m, t) as f64 * it.price)
            })
            .sum()
    }

    pub fn electricity_cost(&self) -> f64 {
        (1..=self.steps)
            .flat_map(|t| {
                self.items
                    .iter()
                    .enumerate()
                    .map(move |(m, it)| self.holdings[m][t] as f64 * it.electricity_per_step)
            })
            .sum()
    }

    /// Objective recomputed term by term from the holdings.
    pub fn evaluate(&self) -> f64 {
        let gross = self.gross_income();
        let leftover = self.capital - self.purchase_cost() - self.electricity_cost();
        match self.objective_kind {
            IpObjective::AsWritten => leftover.max(0.0) + gross,
            IpObjective::CapitalFirst => gross - (-leftover).max(0.0),
        }
    }

    /// Largest capital shortfall over all steps (`<= 0` when feasible).
    pub fn worst_shortfall(&self) -> f64 {
        let mut spent = 0.0;
        (1..=self.steps)
            .map(|t| {
                for (m, it) in self.items.iter().enumerate() {
                    let held = self.holdings[m][t] as f64;
                    spent += self.purchases(m, t) as f64 * it.price;
                    spent += held * it.electricity_per_step;
                    spent -= held * it.gross_per_step;
                }
                spent - self.capital
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Checks the structural constraints and capital feasibility.
    pub fn is_feasible(&self, tolerance: f64) -> bool {
        let structural = self.holdings.iter().all(|h| {
            h.len() == self.steps + 1 && h[0] == 0 && h.windows(2).all(|w| w[0] <= w[1])
        });
        structural && self.worst_shortfall() <= tolerance
    }
}

impl Serialize for Schedule {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let holdings: std::collections::BTreeMap<&str, &Vec<u64>> = self
            .names
            .iter()
            .map(String::as_str)
            .zip(&self.holdings)
            .collect();
        let mut s = serializer.serialize_struct("Schedule", 7)?;
        s.serialize_field("capital_usd", &self.capital)?;
        s.serialize_field("steps", &self.steps)?;
        s.serialize_field("step_hours", &self.step_hours)?;
        s.serialize_field("objective_kind", &self.objective_kind)?;
        s.serialize_field("objective_usd", &self.objective)?;
        s.serialize_field("gross_income_usd", &self.gross_income())?;
        s.serialize_field("holdings", &holdings)?;
        s.end()
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    slack: f64,
    gross: f64,
    parent_state: u32,
    parent_entry: u32,
}

fn insert_pareto(front: &mut Vec<Entry>, e: Entry) {
    if front
        .iter()
        .any(|f| f.slack >= e.slack && f.gross >= e.gross)
    {
        return;
    }
    front.retain(|f| !(e.slack >= f.slack && e.gross >= f.gross));
    front.push(e);
}

struct Lattice {
    radix: usize,
    digits: Vec<Vec<usize>>,
}

impl Lattice {
    fn new(types: usize, bound: usize) -> Self {
        let radix = bound + 1;
        let size = radix.pow(types as u32);
        let digits = (0..size)
            .map(|mut idx| {
                (0..types)
                    .map(|_| {
                        let d = idx % radix;
                        idx /= radix;
                        d
                    })
                    .collect()
            })
            .collect();
        Self { radix, digits }
    }

    fn len(&self) -> usize {
        self.digits.len()
    }

    /// Calls `f` with every state componentwise at or above `from`.
    fn for_each_above(&self, from: usize, mut f: impl FnMut(usize)) {
        let lo = &self.digits[from];
        let mut cur = lo.clone();
        loop {
            let idx = cur.iter().rev().fold(0, |acc, &d| acc * self.radix + d);
            f(idx);
            let mut k = 0;
            loop {
                if k == cur.len() {
                    return;
                }
                if cur[k] + 1 < self.radix {
                    cur[k] += 1;
                    break;
                }
                cur[k] = lo[k];
                k += 1;
            }
        }
    }
}

/// Exact schedule search over item-level data.
///
/// Holdings of every type are bounded by `floor(capital / cheapest price)`.
pub fn schedule_items(
    capital: f64,
    names: &[String],
    items: &[IpItem],
    steps: usize,
    step_hours: f64,
    objective: IpObjective,
) -> Result<Schedule> {
    check_capital(capital)?;
    if names.len() != items.len() {
        return Err(Error::invalid("schedule", "one name per machine type is required"));
    }
    if items.len() > MAX_IP_TYPES {
        return Err(Error::InstanceTooLarge(format!(
            "{} machine types given; exact schedule search supports at most {MAX_IP_TYPES}",
            items.len()
        )));
    }
    if steps == 0 || steps > MAX_IP_STEPS {
        return Err(Error::InstanceTooLarge(format!(
            "{steps} time steps requested; exact schedule search supports 1 to {MAX_IP_STEPS}"
        )));
    }
    for it in items {
        crate::error::check("price", it.price, |v| v > 0.0, "price must be positive")?;
        crate::error::check("gross income", it.gross_per_step, |_| true, "")?;
        crate::error::check("electricity", it.electricity_per_step, |v| v >= 0.0, "must be non-negative")?;
    }

    let bound = items
        .iter()
        .map(|it| (capital / it.price).floor())
        .fold(0.0, f64::max);
    let pairs_per_type = (bound + 1.0) * (bound + 2.0) / 2.0;
    let transitions = pairs_per_type.powi(items.len() as i32);
    if transitions > MAX_TRANSITIONS {
        return Err(Error::InstanceTooLarge(format!(
            "holdings bound {bound} per type over {} types gives {transitions:.0} transitions \
             per step (limit {MAX_TRANSITIONS:.0}); use fewer types or less capital",
            items.len()
        )));
    }
    let bound = bound as usize;
    let lattice = Lattice::new(items.len(), bound);

    let weighted = |state: usize, f: &dyn Fn(&IpItem) -> f64| -> f64 {
        lattice.digits[state]
            .iter()
            .zip(items)
            .map(|(&n, it)| n as f64 * f(it))
            .sum()
    };
    let cost: Vec<f64> = (0..lattice.len()).map(|s| weighted(s, &|it| it.price)).collect();
    let gross: Vec<f64> = (0..lattice.len())
        .map(|s| weighted(s, &|it| it.gross_per_step))
        .collect();
    let net: Vec<f64> = (0..lattice.len()).map(|s| weighted(s, &IpItem::net)).collect();

    let mut layers: Vec<Vec<Vec<Entry>>> = Vec::with_capacity(steps + 1);
    let mut start = vec![Vec::new(); lattice.len()];
    start[0].push(Entry {
        slack: capital,
        gross: 0.0,
        parent_state: 0,
        parent_entry: 0,
    });
    layers.push(start);

    for _ in 1..=steps {
        let prev = layers.last().expect("layer 0 exists");
        let mut next: Vec<Vec<Entry>> = vec![Vec::new(); lattice.len()];
        for (x, front) in prev.iter().enumerate() {
            if front.is_empty() {
                continue;
            }
            lattice.for_each_above(x, |y| {
                let spend = cost[y] - cost[x];
                for (ei, e) in front.iter().enumerate() {
                    let slack = e.slack - spend + net[y];
                    if slack < 0.0 {
                        continue;
                    }
                    insert_pareto(
                        &mut next[y],
                        Entry {
                            slack,
                            gross: e.gross + gross[y],
                            parent_state: x as u32,
                            parent_entry: ei as u32,
                        },
                    );
                }
            });
        }
        layers.push(next);
    }

    let mut best: Option<(f64, usize, usize)> = None;
    for (state, front) in layers[steps].iter().enumerate() {
        for (ei, e) in front.iter().enumerate() {
            let score = objective.score(e.gross, e.slack);
            if best.map_or(true, |(b, _, _)| score > b) {
                best = Some((score, state, ei));
            }
        }
    }
    // holding nothing is always feasible, so the final layer is never empty
    let (_, mut state, mut entry) = best.expect("empty schedule is feasible");

    let mut holdings = vec![vec![0u64; steps + 1]; items.len()];
    for t in (1..=steps).rev() {
        for (m, h) in holdings.iter_mut().enumerate() {
            h[t] = lattice.digits[state][m] as u64;
        }
        let e = layers[t][state][entry];
        state = e.parent_state as usize;
        entry = e.parent_entry as usize;
    }

    let mut schedule = Schedule {
        names: names.to_vec(),
        items: items.to_vec(),
        capital,
        steps,
        step_hours,
        objective_kind: objective,
        holdings,
        objective: 0.0,
    };
    schedule.objective = schedule.evaluate();
    Ok(schedule)
}

/// Optimal reinvesting purchase schedule for `ms` over `steps` equal intervals.
pub fn ip_schedule(
    capital: f64,
    ms: &[Machine],
    c: &CoinParams,
    e: &EconParams,
    steps: usize,
) -> Result<Schedule> {
    ip_schedule_with(capital, ms, c, e, steps, IpObjective::default())
}

pub fn ip_schedule_with(
    capital: f64,
    ms: &[Machine],
    c: &CoinParams,
    e: &EconParams,
    steps: usize,
    objective: IpObjective,
) -> Result<Schedule> {
    if steps == 0 {
        return Err(Error::InstanceTooLarge(format!(
            "0 time steps requested; exact schedule search supports 1 to {MAX_IP_STEPS}"
        )));
    }
    let step_hours = e.duration / steps as f64;
    let items: Vec<IpItem> = ms
        .iter()
        .map(|m| IpItem {
            price: m.price,
            gross_per_step: revenue_per_hour(m, c) * step_hours,
            electricity_per_step: electricity_per_hour(m, e) * step_hours,
        })
        .collect();
    let names: Vec<String> = ms.iter().map(|m| m.name.clone()).collect();
    schedule_items(capital, &names, &items, steps, step_hours, objective)
}
