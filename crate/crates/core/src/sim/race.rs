use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::contest::{equilibrium, evader_payoff, issuer_payoff, success_unchecked, ContestParams, SuccessProbs};
use crate::{ContestError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Issuer,
    Evader,
}

/// Submission channels used by the two sides.
///
/// `PublicPublic` is an observable gas auction in the mempool, `Mixed` has
/// exactly one side bidding privately, `PrivatePrivate` has both sides bidding
/// to builders and proposers out of public view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "variant")]
pub enum ChannelRegime {
    PublicPublic,
    Mixed { private_side: Side },
    PrivatePrivate,
}

impl ChannelRegime {
    pub const ALL: [ChannelRegime; 4] = [
        ChannelRegime::PublicPublic,
        ChannelRegime::Mixed {
            private_side: Side::Issuer,
        },
        ChannelRegime::Mixed {
            private_side: Side::Evader,
        },
        ChannelRegime::PrivatePrivate,
    ];

    pub fn bid_is_public(&self, side: Side) -> bool {
        match self {
            ChannelRegime::PublicPublic => true,
            ChannelRegime::Mixed { private_side } => *private_side != side,
            ChannelRegime::PrivatePrivate => false,
        }
    }
}

impl std::str::FromStr for ChannelRegime {
    type Err = ContestError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "public-public" => Ok(ChannelRegime::PublicPublic),
            "mixed-issuer-private" => Ok(ChannelRegime::Mixed {
                private_side: Side::Issuer,
            }),
            "mixed-evader-private" => Ok(ChannelRegime::Mixed {
                private_side: Side::Evader,
            }),
            "private-private" => Ok(ChannelRegime::PrivatePrivate),
            other => Err(ContestError::param(
                "regime",
                format!(
                    "unknown regime {other:?} (public-public, mixed-issuer-private, mixed-evader-private, private-private)"
                ),
            )),
        }
    }
}

/// Uniform bid grid `[0, hi]` with `steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BidGrid {
    pub hi: f64,
    pub steps: usize,
}

impl BidGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.hi.is_finite() && self.hi > 0.0) {
            return Err(ContestError::param("grid.hi", format!("must be > 0, got {}", self.hi)));
        }
        if self.steps == 0 {
            return Err(ContestError::param("grid.steps", "must be >= 1"));
        }
        Ok(())
    }

    /// Grid with spacing as close to `step` as possible over `[0, hi]`.
    pub fn with_step(hi: f64, step: f64) -> Self {
        BidGrid {
            hi,
            steps: (hi / step).round().max(1.0) as usize,
        }
    }

    pub fn point(&self, k: usize) -> f64 {
        self.hi * (k as f64 / self.steps as f64)
    }

    pub fn spacing(&self) -> f64 {
        self.hi / self.steps as f64
    }

    /// Maximizer of `payoff` over the grid, ties resolved toward the lower bid.
    pub fn argmax(&self, payoff: impl Fn(f64) -> f64) -> f64 {
        let mut best_bid = 0.0;
        let mut best = payoff(0.0);
        for k in 1..=self.steps {
            let b = self.point(k);
            let u = payoff(b);
            if u > best {
                best = u;
                best_bid = b;
            }
        }
        best_bid
    }
}

/// Grid best response of the issuer against a fixed evader bid.
pub fn issuer_best_response(params: &ContestParams, grid: &BidGrid, b_b: f64) -> f64 {
    grid.argmax(|b| issuer_payoff(params, b, b_b))
}

/// Grid best response of the evader against a fixed issuer bid.
pub fn evader_best_response(params: &ContestParams, grid: &BidGrid, b_i: f64) -> f64 {
    grid.argmax(|b| evader_payoff(params, b_i, b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Strategy {
    /// Bid the contest equilibrium.
    EquilibriumBid,
    FixedBid { amount: f64 },
    /// Best response on a grid to the other side's (non-adaptive) bid.
    GridBestResponse { grid: BidGrid },
}

impl Strategy {
    fn validate(&self) -> Result<()> {
        match self {
            Strategy::FixedBid { amount } if !(amount.is_finite() && *amount >= 0.0) => {
                Err(ContestError::param("amount", format!("fixed bid must be >= 0, got {amount}")))
            }
            Strategy::GridBestResponse { grid } => grid.validate(),
            _ => Ok(()),
        }
    }

    /// Bid when it does not depend on the opponent.
    fn direct_bid(&self, params: &ContestParams, side: Side) -> Result<Option<f64>> {
        Ok(match self {
            Strategy::EquilibriumBid => {
                let eq = equilibrium(params)?;
                Some(match side {
                    Side::Issuer => eq.b_i,
                    Side::Evader => eq.b_b,
                })
            }
            Strategy::FixedBid { amount } => Some(*amount),
            Strategy::GridBestResponse { .. } => None,
        })
    }
}

impl std::str::FromStr for Strategy {
    type Err = ContestError;

    /// `equilibrium`, `fixed:AMOUNT`, or `grid:HI:STEPS`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || ContestError::param("strategy", format!("cannot parse {s:?}"));
        let mut parts = s.split(':');
        let strategy = match parts.next() {
            Some("equilibrium") => Strategy::EquilibriumBid,
            Some("fixed") => Strategy::FixedBid {
                amount: parts.next().and_then(|a| a.parse().ok()).ok_or_else(bad)?,
            },
            Some("grid") => Strategy::GridBestResponse {
                grid: BidGrid {
                    hi: parts.next().and_then(|a| a.parse().ok()).ok_or_else(bad)?,
                    steps: parts.next().and_then(|a| a.parse().ok()).ok_or_else(bad)?,
                },
            },
            _ => return Err(bad()),
        };
        if parts.next().is_some() {
            return Err(bad());
        }
        strategy.validate()?;
        Ok(strategy)
    }
}

/// A bid pair ready to be raced repeatedly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolvedContest {
    pub params: ContestParams,
    pub regime: ChannelRegime,
    pub b_i: f64,
    pub b_b: f64,
    pub probs: SuccessProbs,
}

impl ResolvedContest {
    pub fn new(params: &ContestParams, strat_i: &Strategy, strat_b: &Strategy, regime: ChannelRegime) -> Result<Self> {
        params.validate()?;
        strat_i.validate()?;
        strat_b.validate()?;
        let direct_i = strat_i.direct_bid(params, Side::Issuer)?;
        let direct_b = strat_b.direct_bid(params, Side::Evader)?;
        let (b_i, b_b) = match (direct_i, direct_b) {
            (Some(b_i), Some(b_b)) => (b_i, b_b),
            (None, Some(b_b)) => {
                let Strategy::GridBestResponse { grid } = strat_i else { unreachable!() };
                (issuer_best_response(params, grid, b_b), b_b)
            }
            (Some(b_i), None) => {
                let Strategy::GridBestResponse { grid } = strat_b else { unreachable!() };
                (b_i, evader_best_response(params, grid, b_i))
            }
            (None, None) => {
                return Err(ContestError::Unresolvable(
                    "both sides best-respond; use run_adaptive for dynamics".into(),
                ))
            }
        };
        Ok(ResolvedContest {
            params: *params,
            regime,
            b_i,
            b_b,
            probs: success_unchecked(b_i, b_b, params.r),
        })
    }

    /// Draws the winner and books payments.
    pub fn race<R: Rng + ?Sized>(&self, rng: &mut R) -> ContestOutcome {
        let u: f64 = rng.random();
        let winner = if !self.probs.contested {
            Winner::NoContest
        } else if u < self.probs.p_i {
            Winner::Freeze
        } else {
            Winner::Evade
        };
        self.settle(winner)
    }

    /// Payments for a given winner. The issuer's bid is sunk once it
    /// competes; the evader pays only if its transaction lands first.
    pub fn settle(&self, winner: Winner) -> ContestOutcome {
        let (issuer_paid, evader_paid) = match winner {
            Winner::NoContest => (0.0, 0.0),
            Winner::Freeze => (self.b_i, 0.0),
            Winner::Evade => (self.b_i, self.b_b),
        };
        let direct_proposer_payment = match self.regime {
            ChannelRegime::PrivatePrivate => evader_paid,
            _ => 0.0,
        };
        ContestOutcome {
            winner,
            b_i: self.b_i,
            b_b: self.b_b,
            issuer_paid,
            evader_paid,
            proposer_revenue: issuer_paid + evader_paid,
            direct_proposer_payment,
            issuer_bid_public: self.regime.bid_is_public(Side::Issuer),
            evader_bid_public: self.regime.bid_is_public(Side::Evader),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Winner {
    Freeze,
    Evade,
    NoContest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContestOutcome {
    pub winner: Winner,
    #[serde(rename = "b_I")]
    pub b_i: f64,
    #[serde(rename = "b_B")]
    pub b_b: f64,
    pub issuer_paid: f64,
    pub evader_paid: f64,
    /// Paid bids only; fixed participation costs never reach the proposer.
    pub proposer_revenue: f64,
    /// Part of `evader_paid` transferred to the fee recipient outside fees.
    pub direct_proposer_payment: f64,
    pub issuer_bid_public: bool,
    pub evader_bid_public: bool,
}

/// One contest: resolve bids, draw the winner from the success function.
pub fn run_contest<R: Rng + ?Sized>(
    params: &ContestParams,
    strat_i: &Strategy,
    strat_b: &Strategy,
    regime: ChannelRegime,
    rng: &mut R,
) -> Result<ContestOutcome> {
    Ok(ResolvedContest::new(params, strat_i, strat_b, regime)?.race(rng))
}
