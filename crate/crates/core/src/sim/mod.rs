//! Monte Carlo races between issuer and evader.
//!
//! The primary path draws each contest's winner straight from the success
//! function; channel regimes only change how payments are booked and what is
//! publicly observable. [`micro`] holds the exploratory noisy-auction mode.

mod adaptive;
pub mod micro;
mod monte_carlo;
mod race;
mod repeated;
mod rng;

pub use adaptive::{run_adaptive, AdaptiveTrajectory};
pub use micro::{default_bid_ratios, run_gas_auction_micro, MicroAuctionReport, MicroPoint};
pub use monte_carlo::{run_monte_carlo, MonteCarlo, SimReport};
pub use race::{
    evader_best_response, issuer_best_response, run_contest, BidGrid, ChannelRegime, ContestOutcome,
    ResolvedContest, Side, Strategy, Winner,
};
pub use repeated::{run_repeated, RepeatedConfig, RepeatedReport};
pub use rng::{Substreams, GENERATOR};
