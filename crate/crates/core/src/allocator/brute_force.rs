use crate::error::{Error, Result};
use crate::market_data::{CoinParams, EconParams, Machine};

use super::{check_capital, machine_items, totals, Allocation, Item, Solution};

/// Largest number of count vectors the oracle agrees to enumerate.
pub const ORACLE_LIMIT: f64 = 1e7;

/// Exhaustive search over every affordable count vector.
///
/// Items with non-positive value are fixed at zero. Among optimal vectors the
/// one with lower spend wins, then the lexicographically smallest counts.
pub fn brute_force_items(capital: f64, items: &[Item]) -> Result<Solution> {
    check_capital(capital)?;
    let active: Vec<usize> = (0..items.len()).filter(|&i| items[i].value > 0.0).collect();
    let space: f64 = active
        .iter()
        .map(|&i| (capital / items[i].price).floor() + 1.0)
        .product();
    if space > ORACLE_LIMIT {
        return Err(Error::OracleTooLarge(format!(
            "{space} count vectors exceed the limit of {ORACLE_LIMIT}"
        )));
    }

    let mut search = Search {
        items,
        active: &active,
        capital,
        counts: vec![0; items.len()],
        best: Solution::empty(items.len()),
    };
    search.descend(0, 0.0);
    Ok(search.best)
}

struct Search<'a> {
    items: &'a [Item],
    active: &'a [usize],
    capital: f64,
    counts: Vec<u64>,
    best: Solution,
}

impl Search<'_> {
    // Prefix spend accumulates in item order, the same order `totals` uses.
    fn descend(&mut self, depth: usize, spent: f64) {
        let Some(&i) = self.active.get(depth) else {
            self.consider();
            return;
        };
        let price = self.items[i].price;
        let mut n = 0u64;
        loop {
            let with = spent + n as f64 * price;
            if with > self.capital {
                break;
            }
            self.counts[i] = n;
            self.descend(depth + 1, with);
            n += 1;
        }
        self.counts[i] = 0;
    }

    fn consider(&mut self) {
        let (spent, value) = totals(&self.counts, self.items);
        if spent > self.capital {
            return;
        }
        let better = value > self.best.value || (value == self.best.value && spent < self.best.spent);
        // enumeration is lexicographically ascending, so equal candidates keep the first
        if better {
            self.best = Solution {
                counts: self.counts.clone(),
                spent,
                value,
            };
        }
    }
}

/// Oracle counterpart of `knapsack_allocate` using exact prices.
pub fn brute_force_allocate(
    capital: f64,
    ms: &[Machine],
    c: &CoinParams,
    e: &EconParams,
) -> Result<Allocation> {
    check_capital(capital)?;
    let (machines, items) = machine_items(ms, c, e);
    let s = brute_force_items(capital, &items)?;
    Ok(Allocation::from_solution(capital, &machines, s))
}
