//! Intent episodes: segmentation, materiality, and time to enforcement.

use serde::{Deserialize, Serialize};

use crate::amount::Amount;
use crate::config::PipelineConfig;
use crate::ingest::{AccountKey, History};
use crate::regimes::RegimeLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntentEpisode {
    pub address: String,
    pub token: String,
    pub tx_ids: Vec<String>,
    pub start_time: i64,
    pub end_time: i64,
    #[serde(rename = "B_start")]
    pub b_start: Amount,
    pub inflow_sum: Amount,
    #[serde(rename = "V_out")]
    pub v_out: Amount,
    #[serde(rename = "L_episode")]
    pub l_episode: Amount,
    pub final_outflow_time: Option<i64>,
    pub delta: Option<i64>,
    pub is_evasion: bool,
    pub regime: Option<RegimeLabel>,
    /// Inflows exceed outflows over the episode.
    pub net_inbound: bool,
}

impl IntentEpisode {
    pub fn key(&self) -> AccountKey {
        AccountKey::new(&self.address, &self.token)
    }
}

/// Splits a time-ordered history wherever a gap reaches `tau`. Delta,
/// materiality and regime are left unset.
pub fn segment_episodes(key: &AccountKey, history: &History, tau: f64) -> Vec<IntentEpisode> {
    let txs = &history.txs;
    let mut episodes = Vec::new();
    let mut start = 0;
    for end in 1..=txs.len() {
        let split = end == txs.len() || (txs[end].block_time - txs[end - 1].block_time) as f64 >= tau;
        if !split {
            continue;
        }
        let run = &txs[start..end];
        let b_start = run[0].balance_before;
        let inflow_sum: Amount = run.iter().map(|t| t.inflow).sum();
        let v_out: Amount = run.iter().map(|t| t.outflow).sum();
        episodes.push(IntentEpisode {
            address: key.address.clone(),
            token: key.token.clone(),
            tx_ids: run.iter().map(|t| t.tx_id.clone()).collect(),
            start_time: run[0].block_time,
            end_time: run[run.len() - 1].block_time,
            b_start,
            inflow_sum,
            v_out,
            l_episode: b_start + inflow_sum,
            final_outflow_time: run.iter().rev().find(|t| t.outflow.is_positive()).map(|t| t.block_time),
            delta: None,
            is_evasion: false,
            regime: None,
            net_inbound: inflow_sum > v_out,
        });
        start = end;
    }
    episodes
}

/// `V_out >= beta` and `V_out / L >= alpha`; never true when `L = 0`.
pub fn classify_materiality(ep: &IntentEpisode, cfg: &PipelineConfig) -> bool {
    if !ep.l_episode.is_positive() {
        return false;
    }
    ep.v_out >= cfg.beta_amount() && ep.v_out.to_f64() / ep.l_episode.to_f64() >= cfg.alpha
}

/// Seconds from the episode's last outflow to `t_exec`; `None` without an
/// outflow strictly before enforcement.
pub fn compute_delta(ep: &IntentEpisode, t_exec: i64) -> Option<i64> {
    let t = ep.final_outflow_time?;
    if t >= t_exec {
        if t == t_exec {
            log::debug!("{}: final outflow at t_exec, delta excluded", ep.key());
        }
        return None;
    }
    Some(t_exec - t)
}
