//! Per-(address, token) histories with running balances.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::amount::Amount;
use crate::events::{AddressLabel, LabelCategory, SanctionEvent, TransferEvent};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AccountKey {
    pub address: String,
    pub token: String,
}

impl AccountKey {
    pub fn new(address: impl Into<String>, token: impl Into<String>) -> Self {
        AccountKey {
            address: address.into(),
            token: token.into(),
        }
    }
}

impl std::fmt::Display for AccountKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.address, self.token)
    }
}

/// One transaction as seen by one account. Rows sharing a `tx_id` are merged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryTx {
    pub tx_id: String,
    pub block_time: i64,
    /// Effective inflow; zero when reverted.
    pub inflow: Amount,
    /// Effective outflow; zero when reverted.
    pub outflow: Amount,
    /// Every row of the transaction reverted.
    pub reverted: bool,
    /// Amount moved by reverted rows, kept for inspection only.
    pub attempted: Amount,
    pub balance_before: Amount,
    pub balance_after: Amount,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct History {
    pub txs: Vec<HistoryTx>,
}

impl History {
    pub fn balance_trace(&self) -> Vec<Amount> {
        std::iter::once(self.txs.first().map_or(Amount::ZERO, |t| t.balance_before))
            .chain(self.txs.iter().map(|t| t.balance_after))
            .collect()
    }

    /// Non-reverted inflow strictly before `t`.
    pub fn inflow_before(&self, t: i64) -> Amount {
        self.txs.iter().take_while(|tx| tx.block_time < t).map(|tx| tx.inflow).sum()
    }

    pub fn gaps(&self) -> impl Iterator<Item = i64> + '_ {
        self.txs.windows(2).map(|w| w[1].block_time - w[0].block_time)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Dataset {
    /// Histories of sanctioned accounts only; other addresses are counterparties.
    pub histories: BTreeMap<AccountKey, History>,
    /// Sanction events per account in time order.
    pub sanctions: BTreeMap<AccountKey, Vec<SanctionEvent>>,
    pub labels: BTreeMap<String, LabelCategory>,
    /// Accounts dropped because their balance went negative, with the reason.
    pub quarantined: BTreeMap<AccountKey, String>,
}

#[derive(Debug, Default)]
struct Pending {
    tx_id: String,
    block_time: i64,
    inflow: Amount,
    outflow: Amount,
    reverted: bool,
    attempted: Amount,
}

pub fn ingest_events(transfers: &[TransferEvent], sanctions: &[SanctionEvent], labels: &[AddressLabel]) -> Dataset {
    let mut ds = Dataset {
        labels: labels.iter().map(|l| (l.address.clone(), l.category)).collect(),
        ..Dataset::default()
    };

    let mut sorted_sanctions: Vec<&SanctionEvent> = sanctions.iter().collect();
    sorted_sanctions.sort_by_key(|s| s.t_exec);
    for s in sorted_sanctions {
        ds.sanctions
            .entry(AccountKey::new(&s.address, &s.token))
            .or_default()
            .push(s.clone());
    }

    let mut pending: BTreeMap<AccountKey, Vec<Pending>> =
        ds.sanctions.keys().map(|k| (k.clone(), Vec::new())).collect();

    let mut order: Vec<&TransferEvent> = transfers.iter().collect();
    order.sort_by_key(|t| t.block_time);
    for t in order {
        for (addr, incoming) in [(&t.to_addr, true), (&t.from_addr, false)] {
            let key = AccountKey::new(addr, &t.token);
            let Some(list) = pending.get_mut(&key) else { continue };
            let merge = matches!(list.last(), Some(p) if p.tx_id == t.tx_id && p.block_time == t.block_time);
            if !merge {
                list.push(Pending {
                    tx_id: t.tx_id.clone(),
                    block_time: t.block_time,
                    reverted: true,
                    ..Pending::default()
                });
            }
            let p = list.last_mut().expect("just pushed");
            if t.reverted {
                p.attempted += t.amount;
            } else {
                p.reverted = false;
                if incoming {
                    p.inflow += t.amount;
                } else {
                    p.outflow += t.amount;
                }
            }
        }
    }

    for (key, list) in pending {
        let mut balance = Amount::ZERO;
        let mut txs = Vec::with_capacity(list.len());
        let mut bad = None;
        for p in list {
            let before = balance;
            balance = balance + p.inflow - p.outflow;
            if balance.is_negative() {
                bad = Some(format!("balance {} after tx {} at {}", balance, p.tx_id, p.block_time));
                break;
            }
            txs.push(HistoryTx {
                tx_id: p.tx_id,
                block_time: p.block_time,
                inflow: p.inflow,
                outflow: p.outflow,
                reverted: p.reverted,
                attempted: p.attempted,
                balance_before: before,
                balance_after: balance,
            });
        }
        match bad {
            Some(reason) => {
                log::warn!("quarantined {key}: negative {reason}");
                ds.quarantined.insert(key, reason);
            }
            None => {
                ds.histories.insert(key, History { txs });
            }
        }
    }
    ds
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::SanctionKind;

    pub(crate) fn transfer(tx: &str, t: i64, from: &str, to: &str, amt: i64, reverted: bool) -> TransferEvent {
        TransferEvent {
            token: "USDT".into(),
            tx_id: tx.into(),
            block_time: t,
            from_addr: from.into(),
            to_addr: to.into(),
            amount: Amount::from_units(amt),
            reverted,
        }
    }

    fn blacklist(addr: &str, t: i64) -> SanctionEvent {
        SanctionEvent {
            token: "USDT".into(),
            address: addr.into(),
            kind: SanctionKind::Blacklist,
            t_submit: None,
            t_exec: t,
        }
    }

    #[test]
    fn empty_streams() {
        let ds = ingest_events(&[], &[], &[]);
        assert!(ds.histories.is_empty() && ds.sanctions.is_empty() && ds.quarantined.is_empty());
    }

    #[test]
    fn in_then_out_balance_trace() {
        let ds = ingest_events(
            &[transfer("2", 20, "s", "x", 30, false), transfer("1", 10, "y", "s", 100, false)],
            &[blacklist("s", 50)],
            &[],
        );
        let h = &ds.histories[&AccountKey::new("s", "USDT")];
        let trace: Vec<_> = h.balance_trace().into_iter().map(|a| a.to_string()).collect();
        assert_eq!(trace, ["0.000000", "100.000000", "70.000000"]);
        assert_eq!(h.inflow_before(20), Amount::from_units(100));
        assert_eq!(h.inflow_before(10), Amount::ZERO);
    }

    #[test]
    fn reverted_kept_without_moving_balance() {
        let ds = ingest_events(
            &[
                transfer("1", 10, "y", "s", 100, false),
                transfer("2", 20, "s", "x", 80, true),
            ],
            &[blacklist("s", 50)],
            &[],
        );
        let h = &ds.histories[&AccountKey::new("s", "USDT")];
        assert_eq!(h.txs.len(), 2);
        assert!(h.txs[1].reverted);
        assert_eq!(h.txs[1].attempted, Amount::from_units(80));
        assert_eq!(h.txs[1].outflow, Amount::ZERO);
        assert_eq!(h.txs[1].balance_after, Amount::from_units(100));
    }

    #[test]
    fn rows_of_one_tx_merge() {
        let ds = ingest_events(
            &[
                transfer("1", 10, "y", "s", 100, false),
                transfer("2", 20, "s", "x", 30, false),
                transfer("2", 20, "s", "z", 20, false),
            ],
            &[blacklist("s", 50)],
            &[],
        );
        let h = &ds.histories[&AccountKey::new("s", "USDT")];
        assert_eq!(h.txs.len(), 2);
        assert_eq!(h.txs[1].outflow, Amount::from_units(50));
    }

    #[test]
    fn negative_balance_quarantines() {
        let ds = ingest_events(&[transfer("1", 10, "s", "x", 5, false)], &[blacklist("s", 50)], &[]);
        assert!(ds.histories.is_empty());
        assert!(ds.quarantined.contains_key(&AccountKey::new("s", "USDT")));
    }

    #[test]
    fn untracked_and_other_tokens_ignored() {
        let mut other = transfer("1", 10, "y", "s", 5, false);
        other.token = "USDC".into();
        let ds = ingest_events(&[other, transfer("2", 11, "y", "q", 5, false)], &[blacklist("s", 50)], &[]);
        assert_eq!(ds.histories.len(), 1);
        assert!(ds.histories[&AccountKey::new("s", "USDT")].txs.is_empty());
    }
}
