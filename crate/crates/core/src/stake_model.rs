//! Proof-of-stake ROI evaluators.
//!
//! Pure staking pays a fixed participation fee once and stakes the rest.
//! Ticket staking can only lock capital in whole tickets.

use serde::{Deserialize, Serialize};

use crate::error::{check, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StakeParams {
    /// Fresh tokens (in USD) earned per USD staked over the period.
    pub annual_return_rate: f64,
    /// One-off fee in USD paid before staking.
    pub participation_fee: f64,
    /// Price of one ticket in USD; only the ticket model reads it.
    pub ticket_price: f64,
}

impl StakeParams {
    pub const DEFAULT_RATE: f64 = 0.05;
    pub const DEFAULT_FEE: f64 = 0.01;
    pub const DEFAULT_TICKET_PRICE: f64 = 1756.0;

    pub fn new(annual_return_rate: f64, participation_fee: f64, ticket_price: f64) -> Result<Self> {
        Ok(Self {
            annual_return_rate: check(
                "return rate",
                annual_return_rate,
                |v| v >= 0.0,
                "return rate must be non-negative",
            )?,
            participation_fee: check(
                "participation fee",
                participation_fee,
                |v| v >= 0.0,
                "fee must be non-negative",
            )?,
            ticket_price: check(
                "ticket price",
                ticket_price,
                |v| v > 0.0,
                "ticket price must be positive",
            )?,
        })
    }
}

impl Default for StakeParams {
    fn default() -> Self {
        Self {
            annual_return_rate: Self::DEFAULT_RATE,
            participation_fee: Self::DEFAULT_FEE,
            ticket_price: Self::DEFAULT_TICKET_PRICE,
        }
    }
}

fn positive_capital(capital: f64) -> Result<f64> {
    check("capital", capital, |v| v > 0.0, "capital must be positive")
}

/// `rate * max(0, capital - fee) / capital`.
pub fn pure_stake_roi(capital: f64, p: &StakeParams) -> Result<f64> {
    positive_capital(capital)?;
    // 1 - fee/capital is monotone in capital and exactly 1 when the fee is 0
    let staked_fraction = (1.0 - p.participation_fee / capital).max(0.0);
    Ok(p.annual_return_rate * staked_fraction)
}

/// `rate * floor(capital / ticket) * ticket / capital`.
pub fn ticket_stake_roi(capital: f64, p: &StakeParams) -> Result<f64> {
    positive_capital(capital)?;
    let tickets = (capital / p.ticket_price).floor();
    Ok(p.annual_return_rate * (tickets * p.ticket_price / capital))
}
