//! Economic egalitarianism of cryptocurrency consensus mechanisms.
//!
//! For a range of initial capitals the crate computes the best achievable
//! return on investment, either by allocating capital over mining hardware
//! or through staking, and reduces the resulting curve to a single score:
//! the negated variance of ROI across capitals.
//!
//! - [`market_data`]: hardware catalog and coin constants.
//! - [`mining_model`]: expected income of a single machine.
//! - [`allocator`]: knapsack allocation, its brute-force oracle, and exact
//!   reinvesting schedules.
//! - [`stake_model`]: pure and ticket-based staking.
//! - [`egalitarianism`]: curves, the score, the Sybil check and sweeps.
//! - [`cli`]: the batch command-line front end.

pub mod allocator;
pub mod cli;
pub mod egalitarianism;
pub mod error;
pub mod market_data;
pub mod mining_model;
pub mod scenario;
pub mod stake_model;

pub use allocator::{
    brute_force_allocate, ip_schedule, ip_schedule_with, knapsack_allocate, optimal_roi, Allocation,
    Schedule,
};
pub use egalitarianism::{
    egalitarian_curve, egalitarianism, parameter_sweep, sybil_check, CapitalGrid, Curve,
    EgalScore, RoiEvaluator, SweepAxis,
};
pub use error::{Error, Result};
pub use market_data::{parse_catalog, CoinParams, EconParams, Machine, MachineCatalog};
pub use mining_model::{income_rate, machine_roi, profitable_machines, IncomeRate};
pub use scenario::{Model, PowScenario};
pub use stake_model::{pure_stake_roi, ticket_stake_roi, StakeParams};
