//! Semantic and adversarial filtering of sanctioned accounts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::amount::Amount;
use crate::events::{LabelCategory, SanctionEvent, SanctionKind};
use crate::ingest::{AccountKey, Dataset};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemovalReason {
    NeverBlacklisted,
    Revoked,
    RecoveryWorkflow,
    Infrastructure,
    Inert,
    Quarantined,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Retained {
    pub key: AccountKey,
    /// Execution time of the earliest blacklist; anchors every delta.
    pub t_exec: i64,
    pub t_submit: Option<i64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterOutcome {
    pub retained: Vec<Retained>,
    pub removed: BTreeMap<AccountKey, RemovalReason>,
}

impl FilterOutcome {
    pub fn count(&self, reason: RemovalReason) -> usize {
        self.removed.values().filter(|&&r| r == reason).count()
    }
}

fn first_blacklist(events: &[SanctionEvent]) -> Option<&SanctionEvent> {
    events.iter().find(|e| e.kind == SanctionKind::Blacklist)
}

fn is_revoked(events: &[SanctionEvent]) -> bool {
    let mut blacklisted = false;
    for e in events {
        match e.kind {
            SanctionKind::Blacklist => blacklisted = true,
            SanctionKind::Unblacklist if blacklisted => return true,
            _ => {}
        }
    }
    false
}

/// Blacklist, DestroyFunds, Reissue as a time-ordered subsequence, no window.
fn is_recovery(events: &[SanctionEvent]) -> bool {
    const PATTERN: [SanctionKind; 3] = [SanctionKind::Blacklist, SanctionKind::DestroyFunds, SanctionKind::Reissue];
    let mut next = 0;
    for e in events {
        if e.kind == PATTERN[next] {
            next += 1;
            if next == PATTERN.len() {
                return true;
            }
        }
    }
    false
}

/// Keeps blacklisted accounts whose sanction was neither lifted nor part of a
/// recovery workflow. Events are expected in time order, as ingest leaves them.
pub fn semantic_filter(sanctions: &BTreeMap<AccountKey, Vec<SanctionEvent>>) -> FilterOutcome {
    let mut out = FilterOutcome::default();
    for (key, events) in sanctions {
        let Some(first) = first_blacklist(events) else {
            out.removed.insert(key.clone(), RemovalReason::NeverBlacklisted);
            continue;
        };
        let reason = if is_revoked(events) {
            Some(RemovalReason::Revoked)
        } else if is_recovery(events) {
            Some(RemovalReason::RecoveryWorkflow)
        } else {
            None
        };
        match reason {
            Some(r) => {
                log::debug!("semantic filter drops {key}: {r:?}");
                out.removed.insert(key.clone(), r);
            }
            None => out.retained.push(Retained {
                key: key.clone(),
                t_exec: first.t_exec,
                t_submit: first.t_submit,
            }),
        }
    }
    out
}

/// Drops shared infrastructure, quarantined accounts, and accounts that never
/// received funds before enforcement.
pub fn adversarial_filter(sed: &FilterOutcome, ds: &Dataset) -> FilterOutcome {
    let mut out = FilterOutcome {
        retained: Vec::new(),
        removed: sed.removed.clone(),
    };
    for r in &sed.retained {
        let label = ds.labels.get(&r.key.address).copied();
        let reason = if label.is_some_and(LabelCategory::is_infrastructure) {
            Some(RemovalReason::Infrastructure)
        } else if ds.quarantined.contains_key(&r.key) {
            Some(RemovalReason::Quarantined)
        } else {
            let inflow = ds.histories.get(&r.key).map_or(Amount::ZERO, |h| h.inflow_before(r.t_exec));
            (!inflow.is_positive()).then_some(RemovalReason::Inert)
        };
        match reason {
            Some(why) => {
                log::debug!("adversarial filter drops {}: {why:?}", r.key);
                out.removed.insert(r.key.clone(), why);
            }
            None => out.retained.push(r.clone()),
        }
    }
    out
}
