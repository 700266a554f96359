use std::fmt;

use serde::{Deserialize, Serialize};

use super::{CapitalGrid, Curve, SweptValue};
use crate::error::Result;
use crate::scenario::PowScenario;

/// Proof-of-work parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    #[value(name = "electricity_cost", alias = "electricity-cost")]
    ElectricityCost,
    #[value(name = "duration", alias = "duration-hours")]
    Duration,
    #[value(name = "token_price", alias = "token-price")]
    TokenPrice,
    #[value(name = "total_hash_rate", alias = "total-hash-rate")]
    TotalHashRate,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::ElectricityCost => "electricity_cost",
            SweepAxis::Duration => "duration",
            SweepAxis::TokenPrice => "token_price",
            SweepAxis::TotalHashRate => "total_hash_rate",
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One curve per value of `axis`, every other parameter held at `base`.
pub fn parameter_sweep(
    base: &PowScenario,
    axis: SweepAxis,
    values: &[f64],
    grid: &CapitalGrid,
) -> Result<Vec<Curve>> {
    let scenarios = values
        .iter()
        .map(|&v| base.with_axis(axis, v))
        .collect::<Result<Vec<_>>>()?;
    scenarios
        .iter()
        .zip(values)
        .map(|(s, &value)| {
            let mut curve = s.curve(grid)?;
            curve.metadata.swept = Some(SweptValue { axis, value });
            Ok(curve)
        })
        .collect()
}
