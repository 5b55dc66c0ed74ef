//! End-to-end pipeline over an ingested dataset.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amount::Amount;
use crate::config::{BoundaryMode, PipelineConfig};
use crate::episodes::{classify_materiality, compute_delta, segment_episodes, IntentEpisode};
use crate::error::PipelineError;
use crate::filters::{adversarial_filter, semantic_filter, RemovalReason};
use crate::gaps::{estimate_gap_threshold, GapThreshold};
use crate::ingest::{AccountKey, Dataset};
use crate::regimes::{assign_regime, check_boundaries, fit_regime_model, select_boundaries, RegimeLabel, RegimeModel};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Funnel {
    pub sanctioned_accounts: usize,
    pub never_blacklisted: usize,
    pub revoked: usize,
    pub recovery_workflow: usize,
    pub after_semantic: usize,
    pub infrastructure: usize,
    pub quarantined: usize,
    pub inert: usize,
    pub after_adversarial: usize,
    pub pooled_gaps: usize,
    pub episodes: usize,
    pub episodes_with_delta: usize,
    pub evasion_episodes: usize,
    pub evasion_with_delta: usize,
    /// Evasion episodes whose last outflow fell between submission and execution.
    pub committed_window_episodes: usize,
    pub committed_window_v_out: Amount,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySource {
    Default,
    Fitted,
    /// Fitted mode was requested but fewer than three valleys were found.
    DefaultFallback,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub model: Option<RegimeModel>,
    pub fit_error: Option<String>,
    pub boundary_source: BoundarySource,
    pub boundaries: [f64; 3],
    pub counts: BTreeMap<RegimeLabel, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Removal {
    pub address: String,
    pub token: String,
    pub reason: RemovalReason,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineOutput {
    pub seed: u64,
    pub tau: GapThreshold,
    pub funnel: Funnel,
    pub removed: Vec<Removal>,
    pub episodes: Vec<IntentEpisode>,
    pub regimes: RegimeReport,
}

pub fn run_pipeline(ds: &Dataset, cfg: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    cfg.validate()?;
    let sed = semantic_filter(&ds.sanctions);
    let aed = adversarial_filter(&sed, ds);
    let mut funnel = Funnel {
        sanctioned_accounts: ds.sanctions.len(),
        never_blacklisted: sed.count(RemovalReason::NeverBlacklisted),
        revoked: sed.count(RemovalReason::Revoked),
        recovery_workflow: sed.count(RemovalReason::RecoveryWorkflow),
        after_semantic: sed.retained.len(),
        infrastructure: aed.count(RemovalReason::Infrastructure),
        quarantined: aed.count(RemovalReason::Quarantined),
        inert: aed.count(RemovalReason::Inert),
        after_adversarial: aed.retained.len(),
        ..Funnel::default()
    };
    log::info!(
        "funnel: {} sanctioned -> {} after semantic -> {} after adversarial",
        funnel.sanctioned_accounts,
        funnel.after_semantic,
        funnel.after_adversarial
    );

    let history = |k: &AccountKey| ds.histories.get(k).expect("retained accounts have histories");
    let gaps: Vec<i64> = aed.retained.iter().flat_map(|r| history(&r.key).gaps()).collect();
    funnel.pooled_gaps = gaps.len();
    let tau = estimate_gap_threshold(&gaps, cfg)?;
    log::info!("tau = {:.1} s ({:?}, {} gaps)", tau.tau, tau.source, gaps.len());

    let mut episodes: Vec<IntentEpisode> = aed
        .retained
        .par_iter()
        .flat_map_iter(|r| {
            let mut eps = segment_episodes(&r.key, history(&r.key), tau.tau);
            for ep in &mut eps {
                ep.is_evasion = classify_materiality(ep, cfg);
                ep.delta = compute_delta(ep, r.t_exec);
            }
            eps
        })
        .collect();

    let evasion_deltas: Vec<f64> = episodes
        .iter()
        .filter(|e| e.is_evasion)
        .filter_map(|e| e.delta.map(|d| d as f64))
        .collect();
    let (model, fit_error) = if evasion_deltas.is_empty() {
        (None, Some("no evasion episodes with a delta".to_string()))
    } else {
        match fit_regime_model(&evasion_deltas, cfg) {
            Ok(m) => (Some(m), None),
            Err(e) => {
                log::warn!("regime model not fitted: {e}");
                (None, Some(e.to_string()))
            }
        }
    };

    let defaults = check_boundaries(&cfg.default_boundaries)?;
    let (boundary_source, boundaries) = match cfg.boundary_mode {
        BoundaryMode::Default => (BoundarySource::Default, defaults),
        BoundaryMode::Fitted => match model.as_ref().and_then(|m| select_boundaries(&m.boundaries, &defaults)) {
            Some(b) => (BoundarySource::Fitted, b),
            None => {
                log::warn!("fewer than three fitted valleys; using default boundaries");
                (BoundarySource::DefaultFallback, defaults)
            }
        },
    };

    let mut counts: BTreeMap<RegimeLabel, usize> = RegimeLabel::ALL.iter().map(|&l| (l, 0)).collect();
    let submits: BTreeMap<&AccountKey, (Option<i64>, i64)> =
        aed.retained.iter().map(|r| (&r.key, (r.t_submit, r.t_exec))).collect();
    for ep in &mut episodes {
        funnel.episodes += 1;
        funnel.episodes_with_delta += ep.delta.is_some() as usize;
        if !ep.is_evasion {
            continue;
        }
        funnel.evasion_episodes += 1;
        if let Some(d) = ep.delta {
            funnel.evasion_with_delta += 1;
            let label = assign_regime(d as f64, &boundaries);
            ep.regime = Some(label);
            *counts.entry(label).or_default() += 1;
        }
        if let (Some(t), (Some(submit), exec)) = (ep.final_outflow_time, submits[&ep.key()]) {
            if submit <= t && t < exec {
                funnel.committed_window_episodes += 1;
                funnel.committed_window_v_out += ep.v_out;
            }
        }
    }

    Ok(PipelineOutput {
        seed: cfg.seed,
        tau,
        funnel,
        removed: aed
            .removed
            .into_iter()
            .map(|(k, reason)| Removal { address: k.address, token: k.token, reason })
            .collect(),
        episodes,
        regimes: RegimeReport { model, fit_error, boundary_source, boundaries, counts },
    })
}

pub const EPISODE_COLUMNS: [&str; 14] = [
    "address",
    "token",
    "tx_ids",
    "start_time",
    "end_time",
    "B_start",
    "inflow_sum",
    "V_out",
    "L_episode",
    "final_outflow_time",
    "delta",
    "is_evasion",
    "regime",
    "net_inbound",
];

/// One row per episode; transaction ids are joined with `;`.
pub fn episodes_csv(episodes: &[IntentEpisode]) -> Result<Vec<u8>, PipelineError> {
    let ser = |e: csv::Error| PipelineError::Serialize(e.to_string());
    let opt = |x: Option<i64>| x.map(|v| v.to_string()).unwrap_or_default();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(EPISODE_COLUMNS).map_err(ser)?;
    for e in episodes {
        w.write_record([
            e.address.clone(),
            e.token.clone(),
            e.tx_ids.join(";"),
            e.start_time.to_string(),
            e.end_time.to_string(),
            e.b_start.to_string(),
            e.inflow_sum.to_string(),
            e.v_out.to_string(),
            e.l_episode.to_string(),
            opt(e.final_outflow_time),
            opt(e.delta),
            e.is_evasion.to_string(),
            e.regime.map(|r| r.to_string()).unwrap_or_default(),
            e.net_inbound.to_string(),
        ])
        .map_err(ser)?;
    }
    w.into_inner().map_err(|e| PipelineError::Serialize(e.to_string()))
}

pub fn to_pretty_json<T: Serialize>(value: &T) -> Result<Vec<u8>, PipelineError> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| PipelineError::Serialize(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{SanctionEvent, SanctionKind, TransferEvent};
    use crate::ingest::ingest_events;

    fn t(tx: &str, time: i64, from: &str, to: &str, amt: i64) -> TransferEvent {
        TransferEvent {
            token: "USDT".into(),
            tx_id: tx.into(),
            block_time: time,
            from_addr: from.into(),
            to_addr: to.into(),
            amount: Amount::from_units(amt),
            reverted: false,
        }
    }

    #[test]
    fn small_dataset_end_to_end() {
        let transfers = [
            t("a", 1_000, "x", "s", 20_000),
            t("b", 1_010, "s", "y", 100),
            t("c", 50_000, "s", "y", 15_000),
            t("d", 50_020, "s", "y", 4_000),
        ];
        let sanctions = [SanctionEvent {
            token: "USDT".into(),
            address: "s".into(),
            kind: SanctionKind::Blacklist,
            t_submit: Some(50_010),
            t_exec: 50_080,
        }];
        let ds = ingest_events(&transfers, &sanctions, &[]);
        let out = run_pipeline(&ds, &PipelineConfig::default()).unwrap();
        assert_eq!(out.tau.tau, 107.0);
        assert_eq!(out.episodes.len(), 2);
        let last = &out.episodes[1];
        assert_eq!(last.tx_ids, ["c", "d"]);
        assert_eq!(last.delta, Some(60));
        assert!(last.is_evasion);
        assert_eq!(last.regime, Some(RegimeLabel::Race));
        assert!(!out.episodes[0].is_evasion);
        assert_eq!(out.funnel.committed_window_episodes, 1);
        assert_eq!(out.funnel.committed_window_v_out, Amount::from_units(19_000));
        assert!(out.regimes.model.is_none());

        let csv = String::from_utf8(episodes_csv(&out.episodes).unwrap()).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), EPISODE_COLUMNS.join(","));
        assert_eq!(
            lines.nth(1).unwrap(),
            "s,USDT,c;d,50000,50020,19900.000000,0.000000,19000.000000,19900.000000,50020,60,true,Race,false"
        );
    }
}
