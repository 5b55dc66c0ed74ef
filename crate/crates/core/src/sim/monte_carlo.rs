use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::race::{ChannelRegime, ContestOutcome, ResolvedContest, Strategy, Winner};
use super::rng::{Substreams, GENERATOR};
use crate::contest::ContestParams;
use crate::{ContestError, Result};

/// Trials are reduced in fixed-size chunks, then chunks are folded in index
/// order, so the aggregate is bit-identical whatever the thread count.
pub(crate) const CHUNK: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub trials: u64,
    pub seed: u64,
    pub generator: String,
    pub regime: ChannelRegime,
    #[serde(rename = "b_I")]
    pub b_i: f64,
    #[serde(rename = "b_B")]
    pub b_b: f64,
    /// Win probability implied by the bids.
    #[serde(rename = "analytic_P_I")]
    pub analytic_p_i: f64,
    #[serde(rename = "empirical_P_I")]
    pub empirical_p_i: f64,
    /// `3 sqrt(p (1 - p) / trials)`.
    #[serde(rename = "ci_radius_P_I")]
    pub ci_radius_p_i: f64,
    pub no_contest_trials: u64,
    pub mean_proposer_revenue: f64,
    pub stderr_proposer_revenue: f64,
    pub mean_direct_proposer_payment: f64,
    /// `C_I` plus the issuer's paid bid.
    pub mean_issuer_cost: f64,
    /// `(V - b_B) 1[evade] - C_B`.
    pub mean_evader_payoff: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    freezes: u64,
    no_contest: u64,
    revenue: f64,
    revenue_sq: f64,
    direct: f64,
    issuer_paid: f64,
    evader_gain: f64,
}

impl Tally {
    fn add(&mut self, o: &ContestOutcome, v: f64) {
        match o.winner {
            Winner::Freeze => self.freezes += 1,
            Winner::NoContest => self.no_contest += 1,
            Winner::Evade => self.evader_gain += v - o.b_b,
        }
        self.revenue += o.proposer_revenue;
        self.revenue_sq += o.proposer_revenue * o.proposer_revenue;
        self.direct += o.direct_proposer_payment;
        self.issuer_paid += o.issuer_paid;
    }

    fn merge(mut self, other: Tally) -> Tally {
        self.freezes += other.freezes;
        self.no_contest += other.no_contest;
        self.revenue += other.revenue;
        self.revenue_sq += other.revenue_sq;
        self.direct += other.direct;
        self.issuer_paid += other.issuer_paid;
        self.evader_gain += other.evader_gain;
        self
    }
}

/// A seeded batch of independent contests.
#[derive(Debug, Clone)]
pub struct MonteCarlo {
    contest: ResolvedContest,
    streams: Substreams,
    trials: u64,
    seed: u64,
}

impl MonteCarlo {
    pub fn new(
        params: &ContestParams,
        strat_i: &Strategy,
        strat_b: &Strategy,
        regime: ChannelRegime,
        trials: u64,
        seed: u64,
    ) -> Result<Self> {
        if trials == 0 {
            return Err(ContestError::param("trials", "must be >= 1"));
        }
        Ok(MonteCarlo {
            contest: ResolvedContest::new(params, strat_i, strat_b, regime)?,
            streams: Substreams::new(seed),
            trials,
            seed,
        })
    }

    pub fn contest(&self) -> &ResolvedContest {
        &self.contest
    }

    /// Outcome of trial `index`, independent of every other trial.
    pub fn outcome(&self, index: u64) -> ContestOutcome {
        self.contest.race(&mut self.streams.stream(index))
    }

    pub fn outcomes(&self) -> impl Iterator<Item = (u64, ContestOutcome)> + '_ {
        (0..self.trials).map(|i| (i, self.outcome(i)))
    }

    fn chunk(&self, c: u64) -> Tally {
        let v = self.contest.params.v;
        let end = ((c + 1) * CHUNK).min(self.trials);
        (c * CHUNK..end).fold(Tally::default(), |mut t, i| {
            t.add(&self.outcome(i), v);
            t
        })
    }

    fn n_chunks(&self) -> u64 {
        self.trials.div_ceil(CHUNK)
    }

    pub fn run(&self) -> SimReport {
        let chunks: Vec<Tally> = (0..self.n_chunks()).into_par_iter().map(|c| self.chunk(c)).collect();
        self.report(chunks)
    }

    /// Single-threaded run; identical output to [`MonteCarlo::run`].
    pub fn run_serial(&self) -> SimReport {
        let chunks: Vec<Tally> = (0..self.n_chunks()).map(|c| self.chunk(c)).collect();
        self.report(chunks)
    }

    fn report(&self, chunks: Vec<Tally>) -> SimReport {
        let t = chunks.into_iter().fold(Tally::default(), Tally::merge);
        let n = self.trials as f64;
        let p = t.freezes as f64 / n;
        let mean_rev = t.revenue / n;
        let var_rev = if self.trials > 1 {
            ((t.revenue_sq - n * mean_rev * mean_rev) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        let params = &self.contest.params;
        SimReport {
            trials: self.trials,
            seed: self.seed,
            generator: GENERATOR.to_string(),
            regime: self.contest.regime,
            b_i: self.contest.b_i,
            b_b: self.contest.b_b,
            analytic_p_i: self.contest.probs.p_i,
            empirical_p_i: p,
            ci_radius_p_i: 3.0 * (p * (1.0 - p) / n).sqrt(),
            no_contest_trials: t.no_contest,
            mean_proposer_revenue: mean_rev,
            stderr_proposer_revenue: (var_rev / n).sqrt(),
            mean_direct_proposer_payment: t.direct / n,
            mean_issuer_cost: params.c_i + t.issuer_paid / n,
            mean_evader_payoff: t.evader_gain / n - params.c_b,
        }
    }
}

pub fn run_monte_carlo(
    params: &ContestParams,
    strat_i: &Strategy,
    strat_b: &Strategy,
    regime: ChannelRegime,
    trials: u64,
    seed: u64,
) -> Result<SimReport> {
    Ok(MonteCarlo::new(params, strat_i, strat_b, regime, trials, seed)?.run())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> ContestParams {
        ContestParams::unit_costs(1.0, 2.0, 1.0).unwrap()
    }

    #[test]
    fn serial_matches_parallel() {
        let mc = MonteCarlo::new(&unit(), &Strategy::EquilibriumBid, &Strategy::EquilibriumBid, ChannelRegime::PublicPublic, 50_001, 9).unwrap();
        assert_eq!(mc.run(), mc.run_serial());
    }

    #[test]
    fn single_trial() {
        let rep = run_monte_carlo(&unit(), &Strategy::EquilibriumBid, &Strategy::EquilibriumBid, ChannelRegime::PublicPublic, 1, 3).unwrap();
        assert_eq!(rep.trials, 1);
        assert_eq!(rep.ci_radius_p_i, 0.0);
        assert_eq!(rep.stderr_proposer_revenue, 0.0);
        assert!(rep.empirical_p_i == 0.0 || rep.empirical_p_i == 1.0);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(run_monte_carlo(&unit(), &Strategy::EquilibriumBid, &Strategy::EquilibriumBid, ChannelRegime::PublicPublic, 0, 3).is_err());
    }

    #[test]
    fn costs_stay_out_of_revenue() {
        let p = ContestParams::new(1.0, 2.0, 1.0, 0.3, 0.2).unwrap();
        let mc = MonteCarlo::new(&p, &Strategy::EquilibriumBid, &Strategy::EquilibriumBid, ChannelRegime::PrivatePrivate, 20_000, 1).unwrap();
        let rep = mc.run();
        let paid: f64 = mc.outcomes().map(|(_, o)| o.issuer_paid + o.evader_paid).sum();
        assert!((rep.mean_proposer_revenue - paid / 20_000.0).abs() < 1e-12);
        assert!((rep.mean_issuer_cost - 0.3 - mc.contest().b_i).abs() < 1e-12);
    }
}
