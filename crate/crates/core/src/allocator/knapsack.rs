use crate::error::{check, Error, Result};
use crate::market_data::{CoinParams, EconParams, Machine};

use super::{
    check_capital, check_granularity, machine_items, unreachable_capital, Allocation, Item,
    Solution,
};

/// Largest DP table (in capital units) a single solve may allocate.
pub const MAX_DP_CELLS: usize = 10_000_000;

const NO_ITEM: u32 = u32::MAX;

// A cell stores its last item and the cell of the remainder; carried cells
// are copies of their predecessor, so reconstruction never walks carries.
#[derive(Debug, Clone, Copy)]
struct Cell {
    value: f64,
    spent: f64,
    count: u32,
    item: u32,
    from: u32,
}

impl Cell {
    const EMPTY: Cell = Cell {
        value: 0.0,
        spent: 0.0,
        count: 0,
        item: NO_ITEM,
        from: 0,
    };

    /// Higher value, then fewer machines, then lower spend.
    fn beats(&self, other: &Cell) -> bool {
        if self.value != other.value {
            return self.value > other.value;
        }
        if self.count != other.count {
            return self.count < other.count;
        }
        self.spent < other.spent
    }
}

/// Unbounded-knapsack table over capital quantized to `granularity` units.
///
/// Prices round up to whole units and capital rounds down, so any solution
/// read from the table is affordable at the queried capital. Quantities
/// within 1e-9 (relative) of a unit boundary snap to that boundary.
#[derive(Debug, Clone)]
pub struct KnapsackTable {
    items: Vec<Item>,
    weights: Vec<usize>,
    granularity: f64,
    cells: Vec<Cell>,
}

fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x
    }
}

fn units_floor(amount: f64, granularity: f64) -> f64 {
    snap(amount / granularity).floor()
}

fn units_ceil(amount: f64, granularity: f64) -> f64 {
    snap(amount / granularity).ceil()
}

impl KnapsackTable {
    pub fn build(items: &[Item], granularity: f64, max_capital: f64) -> Result<Self> {
        check_granularity(granularity)?;
        check_capital(max_capital)?;
        for it in items {
            check("item price", it.price, |v| v > 0.0, "price must be positive")?;
            check("item value", it.value, |_| true, "")?;
        }
        let capacity = units_floor(max_capital, granularity);
        if capacity >= MAX_DP_CELLS as f64 {
            return Err(Error::InstanceTooLarge(format!(
                "capital {max_capital} at granularity {granularity} needs {capacity} DP cells \
                 (limit {MAX_DP_CELLS}); raise the granularity"
            )));
        }
        let capacity = capacity as usize;
        let weights: Vec<usize> = items
            .iter()
            .map(|it| {
                let w = units_ceil(it.price, granularity);
                // anything past the capacity can never be chosen
                if w > capacity as f64 {
                    usize::MAX
                } else {
                    (w as usize).max(1)
                }
            })
            .collect();
        let usable: Vec<usize> = (0..items.len())
            .filter(|&i| items[i].value > 0.0 && weights[i] <= capacity)
            .collect();

        let mut cells = Vec::with_capacity(capacity + 1);
        cells.push(Cell::EMPTY);
        for c in 1..=capacity {
            let mut best = cells[c - 1];
            for &i in &usable {
                let w = weights[i];
                if w > c {
                    continue;
                }
                let rest = &cells[c - w];
                let cand = Cell {
                    value: rest.value + items[i].value,
                    spent: rest.spent + items[i].price,
                    count: rest.count + 1,
                    item: i as u32,
                    from: (c - w) as u32,
                };
                if cand.beats(&best) {
                    best = cand;
                }
            }
            cells.push(best);
        }
        Ok(Self {
            items: items.to_vec(),
            weights,
            granularity,
            cells,
        })
    }

    pub fn max_capital(&self) -> f64 {
        (self.cells.len() - 1) as f64 * self.granularity
    }

    pub fn granularity(&self) -> f64 {
        self.granularity
    }

    /// Quantized weight of each item; `usize::MAX` when it never fits.
    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    pub fn solution(&self, capital: f64) -> Result<Solution> {
        check_capital(capital)?;
        let units = units_floor(capital, self.granularity);
        if units >= self.cells.len() as f64 {
            return Err(unreachable_capital(capital, self.max_capital()));
        }
        let mut counts = vec![0u64; self.items.len()];
        let mut at = units as usize;
        loop {
            let cell = self.cells[at];
            if cell.item == NO_ITEM {
                break;
            }
            counts[cell.item as usize] += 1;
            at = cell.from as usize;
        }
        Ok(Solution::from_counts(counts, &self.items))
    }
}

/// Item-level knapsack: maximize total value with total price within `capital`.
pub fn knapsack_items(capital: f64, items: &[Item], granularity: f64) -> Result<Solution> {
    KnapsackTable::build(items, granularity, capital)?.solution(capital)
}

/// Best upfront configuration of profitable machines for `capital`.
pub fn knapsack_allocate(
    capital: f64,
    ms: &[Machine],
    c: &CoinParams,
    e: &EconParams,
    granularity: f64,
) -> Result<Allocation> {
    check_capital(capital)?;
    check_granularity(granularity)?;
    let (machines, items) = machine_items(ms, c, e);
    if machines.is_empty() {
        return Ok(Allocation::empty(capital));
    }
    let s = knapsack_items(capital, &items, granularity)?;
    Ok(Allocation::from_solution(capital, &machines, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocator::brute_force_items;

    fn item(price: f64, value: f64) -> Item {
        Item { price, value }
    }

    #[test]
    fn zero_capital_buys_nothing() {
        let s = knapsack_items(0.0, &[item(1.0, 5.0)], 1.0).unwrap();
        assert_eq!(s.counts, [0]);
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn two_of_a_single_machine() {
        // price 1000, 0.1188 USD/h over 8760 h; brute force over counts 0..=2
        let v = 8760.0 * 0.1188;
        let s = knapsack_items(2500.0, &[item(1000.0, v)], 1.0).unwrap();
        assert_eq!(s.counts, [2]);
        assert!((s.value - 2081.376).abs() < 1e-9);
        let best = (0..=2u64)
            .map(|n| n as f64 * v)
            .fold(f64::MIN, f64::max);
        assert_eq!(s.value, best);
    }

    #[test]
    fn textbook_instance() {
        let items = [item(3.0, 4.0), item(4.0, 5.0)];
        let s = knapsack_items(10.0, &items, 1.0).unwrap();
        assert_eq!(s.counts, [2, 1]);
        assert_eq!(s.value, 13.0);
        assert_eq!(s, brute_force_items(10.0, &items).unwrap());
    }

    #[test]
    fn negative_items_never_chosen() {
        let s = knapsack_items(100.0, &[item(1.0, -1.0), item(5.0, 0.0)], 1.0).unwrap();
        assert_eq!(s.counts, [0, 0]);
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn ties_prefer_fewer_machines_then_lower_spend() {
        // one big machine or two small ones with the same value
        let s = knapsack_items(10.0, &[item(4.0, 2.0), item(8.0, 4.0)], 1.0).unwrap();
        assert_eq!(s.counts, [0, 1]);
        let s = knapsack_items(10.0, &[item(9.0, 4.0), item(8.0, 4.0)], 1.0).unwrap();
        assert_eq!(s.counts, [0, 1]);
    }

    #[test]
    fn fractional_prices_round_up() {
        // 354.44 occupies 355 units; capital 709 fits only one
        let s = knapsack_items(709.0, &[item(354.44, 1.0)], 1.0).unwrap();
        assert_eq!(s.counts, [1]);
        let s = knapsack_items(710.0, &[item(354.44, 1.0)], 1.0).unwrap();
        assert_eq!(s.counts, [2]);
        assert!(s.spent <= 710.0);
    }

    #[test]
    fn coarse_granularity_is_conservative() {
        let items = [item(250.0, 10.0)];
        let s = knapsack_items(299.0, &items, 100.0).unwrap();
        assert_eq!(s.counts, [0]);
        let s = knapsack_items(0.3, &[item(0.1, 1.0)], 0.1).unwrap();
        assert_eq!(s.counts, [3]);
    }

    #[test]
    fn errors() {
        assert!(knapsack_items(-1.0, &[], 1.0).is_err());
        assert!(knapsack_items(1.0, &[], 0.0).is_err());
        assert!(matches!(
            knapsack_items(1e12, &[], 1.0),
            Err(Error::InstanceTooLarge(_))
        ));
    }

    #[test]
    fn empty_machine_list() {
        let c = CoinParams::new("x", 1.0, 1.0, 1.0, 1.0).unwrap();
        let a = knapsack_allocate(1e9, &[], &c, &EconParams::default(), 1.0).unwrap();
        assert_eq!(a.proceeds, 0.0);
        assert!(a.counts.is_empty());
    }
}
