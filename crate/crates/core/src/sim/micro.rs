//! Exploratory micro-mechanism: a noisy highest-priority-wins auction.
//!
//! Each side's effective priority is `bid * exp(noise_scale * g)` with `g`
//! standard normal, drawn independently per side and trial. The Tullock
//! exponent that best matches the resulting win rates is fitted by least
//! squares on `ln(P_I / P_B) = r ln(b_I / b_B)`. This calibrates intuition
//! about `r`; it is not an equivalence with the contest success function.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::Substreams;
use crate::contest::{equilibrium, ContestParams};
use crate::{ContestError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroPoint {
    /// `b_I / b_B`.
    pub bid_ratio: f64,
    #[serde(rename = "empirical_P_I")]
    pub empirical_p_i: f64,
    /// `ln(P_I / P_B)`; absent when one side won every trial.
    pub log_odds: Option<f64>,
    pub residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicroAuctionReport {
    pub noise_scale: f64,
    pub trials_per_point: u64,
    pub seed: u64,
    /// Issuer win rate at the contest's equilibrium bids.
    #[serde(rename = "empirical_P_I")]
    pub empirical_p_i: f64,
    pub points: Vec<MicroPoint>,
    /// `None` when no grid point has interior win rates (the `r -> inf` limit).
    pub fitted_r: Option<f64>,
}

/// Ten log-spaced bid ratios in `[1/4, 4]`.
pub fn default_bid_ratios() -> Vec<f64> {
    let (lo, hi) = (0.25f64.ln(), 4f64.ln());
    (0..10).map(|k| (lo + (hi - lo) * k as f64 / 9.0).exp()).collect()
}

fn win_rate(b_i: f64, b_b: f64, noise_scale: f64, trials: u64, streams: &Substreams, offset: u64) -> f64 {
    let wins: u64 = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = streams.stream(offset + t);
            let g_i: f64 = rng.sample(StandardNormal);
            let g_b: f64 = rng.sample(StandardNormal);
            let pri_i = b_i * (noise_scale * g_i).exp();
            let pri_b = b_b * (noise_scale * g_b).exp();
            let tie_break: bool = rng.random();
            u64::from(pri_i > pri_b || (pri_i == pri_b && tie_break))
        })
        .sum();
    wins as f64 / trials as f64
}

pub fn run_gas_auction_micro(
    params: &ContestParams,
    noise_scale: f64,
    bid_ratios: &[f64],
    trials: u64,
    seed: u64,
) -> Result<MicroAuctionReport> {
    if !(noise_scale.is_finite() && noise_scale >= 0.0) {
        return Err(ContestError::param("noise_scale", format!("must be >= 0, got {noise_scale}")));
    }
    if trials == 0 {
        return Err(ContestError::param("trials", "must be >= 1"));
    }
    if bid_ratios.iter().any(|q| !(q.is_finite() && *q > 0.0)) {
        return Err(ContestError::param("bid_ratios", "must be finite and > 0"));
    }
    let eq = equilibrium(params)?;
    let streams = Substreams::new(seed);
    // Stream blocks: point k uses [k * trials, (k + 1) * trials).
    let empirical_p_i = win_rate(eq.b_i, eq.b_b, noise_scale, trials, &streams, 0);

    let base = eq.b_b.max(f64::MIN_POSITIVE);
    let mut points: Vec<MicroPoint> = bid_ratios
        .iter()
        .enumerate()
        .map(|(k, &q)| {
            let p = win_rate(q * base, base, noise_scale, trials, &streams, (k as u64 + 1) * trials);
            let log_odds = (p > 0.0 && p < 1.0).then(|| (p / (1.0 - p)).ln());
            MicroPoint {
                bid_ratio: q,
                empirical_p_i: p,
                log_odds,
                residual: None,
            }
        })
        .collect();

    // Regression through the origin over interior points.
    let (sxy, sxx) = points
        .iter()
        .filter_map(|pt| pt.log_odds.map(|y| (pt.bid_ratio.ln(), y)))
        .filter(|(x, _)| *x != 0.0)
        .fold((0.0, 0.0), |(sxy, sxx), (x, y)| (sxy + x * y, sxx + x * x));
    let fitted_r = (sxx > 0.0).then(|| sxy / sxx);
    if let Some(r) = fitted_r {
        for pt in &mut points {
            pt.residual = pt.log_odds.map(|y| y - r * pt.bid_ratio.ln());
        }
    }
    Ok(MicroAuctionReport {
        noise_scale,
        trials_per_point: trials,
        seed,
        empirical_p_i,
        points,
        fitted_r,
    })
}
