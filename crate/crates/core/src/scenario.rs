//! Complete model instances that can produce an egalitarian curve.

use std::collections::BTreeMap;

use crate::allocator::KnapsackEvaluator;
use crate::egalitarianism::{
    egalitarian_curve, CapitalGrid, Curve, CurveMetadata, RoiEvaluator, SweepAxis,
};
use crate::error::{check, Result};
use crate::market_data::{CoinParams, EconParams, Machine, MachineCatalog};
use crate::stake_model::{pure_stake_roi, ticket_stake_roi, StakeParams};

/// Mining one coin with upfront knapsack allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct PowScenario {
    pub coin: CoinParams,
    pub machines: Vec<Machine>,
    pub econ: EconParams,
    pub granularity: f64,
}

impl PowScenario {
    pub fn from_catalog(
        catalog: &MachineCatalog,
        coin: &str,
        econ: EconParams,
        granularity: f64,
    ) -> Result<Self> {
        Ok(Self {
            coin: catalog.coin(coin)?.clone(),
            machines: catalog.filter_by_coin(coin)?,
            econ,
            granularity: check("granularity", granularity, |v| v > 0.0, "must be positive")?,
        })
    }

    /// Copy with one parameter replaced, validated like the original.
    pub fn with_axis(&self, axis: SweepAxis, value: f64) -> Result<Self> {
        let mut s = self.clone();
        match axis {
            SweepAxis::ElectricityCost => s.econ = EconParams::new(value, s.econ.duration)?,
            SweepAxis::Duration => s.econ = EconParams::new(s.econ.electricity_cost, value)?,
            SweepAxis::TokenPrice => {
                let c = &self.coin;
                s.coin = CoinParams::new(&c.coin, c.block_rate, c.total_hash_rate, c.block_reward, value)?;
            }
            SweepAxis::TotalHashRate => {
                let c = &self.coin;
                s.coin = CoinParams::new(&c.coin, c.block_rate, value, c.block_reward, c.token_price)?;
            }
        }
        Ok(s)
    }

    pub fn evaluator(&self, max_capital: f64) -> Result<KnapsackEvaluator> {
        KnapsackEvaluator::new(
            &self.machines,
            &self.coin,
            &self.econ,
            self.granularity,
            max_capital,
        )
    }

    pub fn metadata(&self) -> CurveMetadata {
        let params = [
            ("electricity_cost", self.econ.electricity_cost),
            ("duration_hours", self.econ.duration),
            ("granularity", self.granularity),
            ("block_rate", self.coin.block_rate),
            ("total_hash_rate", self.coin.total_hash_rate),
            ("block_reward", self.coin.block_reward),
            ("token_price", self.coin.token_price),
        ];
        CurveMetadata {
            model: "pow".into(),
            coin: Some(self.coin.coin.clone()),
            duration_hours: Some(self.econ.duration),
            parameters: to_map(&params),
            swept: None,
        }
    }

    pub fn curve(&self, grid: &CapitalGrid) -> Result<Curve> {
        let eval = self.evaluator(grid.max_capital)?;
        egalitarian_curve(&eval, grid, self.metadata())
    }
}

impl RoiEvaluator for KnapsackEvaluator {
    fn roi(&self, capital: f64) -> Result<f64> {
        KnapsackEvaluator::roi(self, capital)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Pow(PowScenario),
    PureStake(StakeParams),
    TicketStake(StakeParams),
}

impl Model {
    pub fn id(&self) -> &'static str {
        match self {
            Model::Pow(_) => "pow",
            Model::PureStake(_) => "pure-pos",
            Model::TicketStake(_) => "ticket-pos",
        }
    }

    pub fn metadata(&self) -> CurveMetadata {
        match self {
            Model::Pow(s) => s.metadata(),
            Model::PureStake(p) => stake_metadata(self.id(), &[
                ("rate", p.annual_return_rate),
                ("fee", p.participation_fee),
            ]),
            Model::TicketStake(p) => stake_metadata(self.id(), &[
                ("rate", p.annual_return_rate),
                ("ticket_price", p.ticket_price),
            ]),
        }
    }

    pub fn curve(&self, grid: &CapitalGrid) -> Result<Curve> {
        match self {
            Model::Pow(s) => s.curve(grid),
            Model::PureStake(p) => {
                egalitarian_curve(&|v| pure_stake_roi(v, p), grid, self.metadata())
            }
            Model::TicketStake(p) => {
                egalitarian_curve(&|v| ticket_stake_roi(v, p), grid, self.metadata())
            }
        }
    }
}

fn stake_metadata(model: &str, params: &[(&str, f64)]) -> CurveMetadata {
    CurveMetadata {
        model: model.into(),
        parameters: to_map(params),
        ..CurveMetadata::default()
    }
}

fn to_map(params: &[(&str, f64)]) -> BTreeMap<String, f64> {
    params.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}
