//! Episode pipeline for sanctioned stablecoin accounts.
//!
//! Event logs are ingested into per-account histories, filtered down to
//! accounts with real evasion potential, segmented into intent episodes at a
//! gap threshold estimated from the data, and each material episode is
//! assigned a timing regime from its distance to enforcement.
//!
//! [`synth::synth_generate`] produces logs with planted structure, and
//! [`evaluate::evaluate_pipeline`] scores a run against it.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amount;
pub mod config;
pub mod episodes;
mod error;
pub mod evaluate;
pub mod events;
pub mod filters;
pub mod gaps;
pub mod ingest;
pub mod regimes;
pub mod run;
pub mod synth;

pub use amount::Amount;
pub use config::{BoundaryMode, PipelineConfig, DEFAULT_BOUNDARIES};
pub use episodes::{classify_materiality, compute_delta, segment_episodes, IntentEpisode};
pub use error::PipelineError;
pub use evaluate::{evaluate_pipeline, Evaluation};
pub use events::{read_labels, read_sanctions, read_transfers, AddressLabel, LabelCategory, SanctionEvent, SanctionKind, TransferEvent};
pub use filters::{adversarial_filter, semantic_filter, FilterOutcome, RemovalReason};
pub use gaps::{estimate_gap_threshold, GapThreshold, TauSource};
pub use ingest::{ingest_events, AccountKey, Dataset, History, HistoryTx};
pub use regimes::{assign_regimes, fit_regime_model, RegimeLabel, RegimeModel};
pub use run::{episodes_csv, run_pipeline, to_pretty_json, PipelineOutput, RegimeReport};
pub use synth::{synth_generate, GroundTruth, SynthConfig, SynthOutput};
