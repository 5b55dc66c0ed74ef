//! Scores a pipeline run against planted ground truth.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::PipelineError;
use crate::run::PipelineOutput;
use crate::synth::GroundTruth;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub seed: u64,
    pub tau: f64,
    pub planted_tau: f64,
    pub tau_rel_error: f64,
    pub predicted_episodes: usize,
    pub truth_episodes: usize,
    pub matched_episodes: usize,
    pub episode_precision: f64,
    pub episode_recall: f64,
    pub episode_f1: f64,
    /// Over matched episodes where either side carries a regime.
    pub regime_accuracy: Option<f64>,
    pub regime_scored: usize,
    /// Over matched episodes.
    pub materiality_accuracy: Option<f64>,
}

type EpisodeId<'a> = (&'a str, &'a str, &'a [String]);

pub fn evaluate_pipeline(out: &PipelineOutput, truth: &GroundTruth) -> Result<Evaluation, PipelineError> {
    if out.seed != truth.seed {
        return Err(PipelineError::SeedMismatch { pipeline: out.seed, truth: truth.seed });
    }
    let planted: HashMap<EpisodeId, usize> = truth
        .episodes
        .iter()
        .enumerate()
        .map(|(i, e)| ((e.address.as_str(), e.token.as_str(), e.tx_ids.as_slice()), i))
        .collect();
    let mut matched = 0;
    let (mut regime_ok, mut regime_n, mut mat_ok) = (0usize, 0usize, 0usize);
    for e in &out.episodes {
        let Some(&i) = planted.get(&(e.address.as_str(), e.token.as_str(), e.tx_ids.as_slice())) else {
            continue;
        };
        let t = &truth.episodes[i];
        matched += 1;
        mat_ok += (t.is_evasion == e.is_evasion) as usize;
        if t.regime.is_some() || e.regime.is_some() {
            regime_n += 1;
            regime_ok += (t.regime == e.regime) as usize;
        }
    }
    let (p, r) = (out.episodes.len(), truth.episodes.len());
    let ratio = |num: usize, den: usize, empty: f64| if den == 0 { empty } else { num as f64 / den as f64 };
    let precision = ratio(matched, p, if r == 0 { 1.0 } else { 0.0 });
    let recall = ratio(matched, r, if p == 0 { 1.0 } else { 0.0 });
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    Ok(Evaluation {
        seed: out.seed,
        tau: out.tau.tau,
        planted_tau: truth.planted_tau,
        tau_rel_error: (out.tau.tau - truth.planted_tau).abs() / truth.planted_tau,
        predicted_episodes: p,
        truth_episodes: r,
        matched_episodes: matched,
        episode_precision: precision,
        episode_recall: recall,
        episode_f1: f1,
        regime_accuracy: (regime_n > 0).then(|| regime_ok as f64 / regime_n as f64),
        regime_scored: regime_n,
        materiality_accuracy: (matched > 0).then(|| mat_ok as f64 / matched as f64),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::PipelineConfig;
    use crate::ingest::ingest_events;
    use crate::run::run_pipeline;
    use crate::synth::{synth_generate, SynthConfig};

    fn small() -> (PipelineOutput, GroundTruth) {
        let s = synth_generate(&SynthConfig { addresses: 30, seed: 4, ..SynthConfig::default() }).unwrap();
        let ds = ingest_events(&s.transfers, &s.sanctions, &s.labels);
        let out = run_pipeline(&ds, &PipelineConfig { seed: 4, tau: Some(300.0), ..PipelineConfig::default() }).unwrap();
        (out, s.truth)
    }

    #[test]
    fn perfect_at_planted_tau() {
        let (out, truth) = small();
        let ev = evaluate_pipeline(&out, &truth).unwrap();
        assert_eq!(ev.episode_f1, 1.0);
        assert_eq!(ev.materiality_accuracy, Some(1.0));
        assert_eq!(ev.regime_accuracy, Some(1.0));
        assert_eq!(ev.tau_rel_error, 0.0);
    }

    #[test]
    fn seed_mismatch_rejected() {
        let (mut out, truth) = small();
        out.seed += 1;
        assert!(matches!(evaluate_pipeline(&out, &truth), Err(PipelineError::SeedMismatch { .. })));
    }

    #[test]
    fn empty_output_scores_zero() {
        let (mut out, truth) = small();
        out.episodes.clear();
        let ev = evaluate_pipeline(&out, &truth).unwrap();
        assert_eq!(ev.episode_f1, 0.0);
        assert_eq!(ev.materiality_accuracy, None);
    }

    #[test]
    fn empty_against_empty_scores_one() {
        let (mut out, mut truth) = small();
        out.episodes.clear();
        truth.episodes.clear();
        assert_eq!(evaluate_pipeline(&out, &truth).unwrap().episode_f1, 1.0);
    }
}
