use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::monte_carlo::CHUNK;
use super::race::{ChannelRegime, ResolvedContest, Strategy, Winner};
use super::rng::Substreams;
use crate::contest::ContestParams;
use crate::economics::enforcement_cost;
use crate::{ContestError, Result};

/// Repeated contests where the issuer controls a share `alpha` of proposers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RepeatedConfig {
    pub alpha: f64,
    pub contests: u64,
    pub params: ContestParams,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatedReport {
    pub alpha: f64,
    pub contests: u64,
    pub seed: u64,
    /// Mean realized issuer loss: `C_I` + bid paid + `psi` on evasion.
    pub empirical_cost: f64,
    pub stderr_cost: f64,
    pub analytic_cost: f64,
    pub freeze_rate: f64,
    pub issuer_controlled_blocks: u64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    controlled: u64,
    freezes: u64,
    loss: f64,
    loss_sq: f64,
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.controlled += o.controlled;
        self.freezes += o.freezes;
        self.loss += o.loss;
        self.loss_sq += o.loss_sq;
        self
    }
}

/// Each block is issuer-controlled with probability `alpha` (certain freeze,
/// cost `C_I` only); otherwise the issuer bids the equilibrium against
/// `strat_b` in an ordinary contest.
pub fn run_repeated(cfg: &RepeatedConfig, strat_b: &Strategy) -> Result<RepeatedReport> {
    if !(0.0..=1.0).contains(&cfg.alpha) {
        return Err(ContestError::param("alpha", format!("must lie in [0, 1], got {}", cfg.alpha)));
    }
    if cfg.contests == 0 {
        return Err(ContestError::param("contests", "must be >= 1"));
    }
    let params = cfg.params;
    let contest = ResolvedContest::new(&params, &Strategy::EquilibriumBid, strat_b, ChannelRegime::PublicPublic)?;
    let streams = Substreams::new(cfg.seed);

    let chunk = |c: u64| {
        let end = ((c + 1) * CHUNK).min(cfg.contests);
        let mut t = Tally::default();
        for i in c * CHUNK..end {
            let mut rng = streams.stream(i);
            let controlled = rng.random::<f64>() < cfg.alpha;
            // The fixed cost C_I is common to every block and added once at the end.
            let loss = if controlled {
                t.controlled += 1;
                t.freezes += 1;
                0.0
            } else {
                let o = contest.race(&mut rng);
                match o.winner {
                    Winner::Freeze => {
                        t.freezes += 1;
                        o.issuer_paid
                    }
                    Winner::Evade => o.issuer_paid + params.psi,
                    Winner::NoContest => 0.0,
                }
            };
            t.loss += loss;
            t.loss_sq += loss * loss;
        }
        t
    };
    let chunks: Vec<Tally> = (0..cfg.contests.div_ceil(CHUNK)).into_par_iter().map(chunk).collect();
    let t = chunks.into_iter().fold(Tally::default(), Tally::merge);

    let n = cfg.contests as f64;
    let mean = t.loss / n;
    let var = if cfg.contests > 1 {
        ((t.loss_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(RepeatedReport {
        alpha: cfg.alpha,
        contests: cfg.contests,
        seed: cfg.seed,
        empirical_cost: params.c_i + mean,
        stderr_cost: (var / n).sqrt(),
        analytic_cost: enforcement_cost(cfg.alpha, &params)?,
        freeze_rate: t.freezes as f64 / n,
        issuer_controlled_blocks: t.controlled,
    })
}
