//! Synthetic event logs with planted episodes, deltas, and regimes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::amount::Amount;
use crate::config::DEFAULT_BOUNDARIES;
use crate::error::PipelineError;
use crate::events::{labels_to_csv, to_jsonl, AddressLabel, LabelCategory, SanctionEvent, SanctionKind, TransferEvent};
use crate::regimes::RegimeLabel;
use crate::run::to_pretty_json;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    /// Sanctioned accounts that should survive both filters.
    pub addresses: usize,
    pub revoked: usize,
    pub recovery: usize,
    pub inert: usize,
    pub infrastructure: usize,
    pub planted_tau: f64,
    /// Within-episode gap range in seconds; defaults to `[2, tau/2)`.
    pub intra_gap: Option<[f64; 2]>,
    /// Typical within-episode gap in seconds.
    pub burst_center: f64,
    /// Spread of within-episode gaps, in log10 seconds.
    pub burst_spread: f64,
    /// Between-episode gap range in seconds; defaults to `(2 tau, 100 tau]`.
    pub inter_gap: Option<[f64; 2]>,
    pub routine_episodes: [usize; 2],
    pub txs_per_episode: [usize; 2],
    /// Race, TacticalReactive, StrategicMigration, LongTail.
    pub regime_mix: [f64; 4],
    /// Share of accounts whose last pre-enforcement episode is material.
    pub material_fraction: f64,
    pub post_exec_fraction: f64,
    /// Share of accounts on the token without a submission timestamp.
    pub usdc_fraction: f64,
    /// Materiality thresholds the planted amounts keep clear of.
    pub alpha: f64,
    pub beta: f64,
    pub start_time: i64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            addresses: 100,
            revoked: 5,
            recovery: 5,
            inert: 5,
            infrastructure: 5,
            planted_tau: 300.0,
            intra_gap: None,
            burst_center: 12.0,
            burst_spread: 0.35,
            inter_gap: None,
            routine_episodes: [2, 5],
            txs_per_episode: [1, 5],
            regime_mix: [0.1, 0.3, 0.4, 0.2],
            material_fraction: 0.8,
            post_exec_fraction: 0.3,
            usdc_fraction: 0.4,
            alpha: 0.10,
            beta: 1000.0,
            start_time: 1_600_000_000,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn intra_range(&self) -> [f64; 2] {
        self.intra_gap.unwrap_or([2.0, self.planted_tau / 2.0])
    }

    pub fn inter_range(&self) -> [f64; 2] {
        self.inter_gap.unwrap_or([2.0 * self.planted_tau, 100.0 * self.planted_tau])
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: &str| Err(PipelineError::Config(m.to_string()));
        if self.addresses == 0 {
            return bad("addresses must be at least 1");
        }
        if !(self.planted_tau > 0.0) {
            return bad("planted_tau must be positive");
        }
        let [ilo, ihi] = self.intra_range();
        let [olo, ohi] = self.inter_range();
        if !(ilo >= 1.0 && ihi - ilo >= 1.0 && olo >= 1.0 && olo < ohi) {
            return bad("gap ranges must satisfy 1 <= lo < hi, with room for a whole second within episodes");
        }
        if !(self.burst_center > 0.0 && self.burst_spread > 0.0) {
            return bad("burst_center and burst_spread must be positive");
        }
        let [rlo, rhi] = self.routine_episodes;
        let [tlo, thi] = self.txs_per_episode;
        if rlo == 0 || rlo > rhi || tlo == 0 || tlo > thi {
            return bad("routine_episodes and txs_per_episode need 1 <= lo <= hi");
        }
        if self.regime_mix.iter().any(|p| !(*p >= 0.0)) || (self.regime_mix.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return bad("regime_mix must be nonnegative and sum to 1");
        }
        for (name, p) in [
            ("material_fraction", self.material_fraction),
            ("post_exec_fraction", self.post_exec_fraction),
            ("usdc_fraction", self.usdc_fraction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(PipelineError::Config(format!("{name} must be in [0, 1]")));
            }
        }
        if !(self.alpha > 0.0 && self.alpha <= 0.5 && self.beta > 0.0) {
            return bad("alpha must be in (0, 0.5] and beta positive");
        }
        if self.start_time <= 0 {
            return bad("start_time must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlantedRole {
    Evader,
    Revoked,
    Recovery,
    Inert,
    Infrastructure,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthAccount {
    pub address: String,
    pub token: String,
    pub role: PlantedRole,
    pub t_exec: i64,
    /// Regime drawn for the last pre-enforcement episode.
    pub planted_regime: Option<RegimeLabel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthEpisode {
    pub address: String,
    pub token: String,
    pub tx_ids: Vec<String>,
    pub delta: Option<i64>,
    pub regime: Option<RegimeLabel>,
    pub is_evasion: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub planted_tau: f64,
    pub config: SynthConfig,
    pub accounts: Vec<TruthAccount>,
    pub episodes: Vec<TruthEpisode>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOutput {
    pub transfers: Vec<TransferEvent>,
    pub sanctions: Vec<SanctionEvent>,
    pub labels: Vec<AddressLabel>,
    pub truth: GroundTruth,
}

pub const TRANSFERS_FILE: &str = "transfers.jsonl";
pub const SANCTIONS_FILE: &str = "sanctions.jsonl";
pub const LABELS_FILE: &str = "labels.csv";
pub const TRUTH_FILE: &str = "ground_truth.json";

impl SynthOutput {
    /// File names and contents, in a fixed order.
    pub fn files(&self) -> Result<Vec<(&'static str, Vec<u8>)>, PipelineError> {
        Ok(vec![
            (TRANSFERS_FILE, to_jsonl(&self.transfers)?),
            (SANCTIONS_FILE, to_jsonl(&self.sanctions)?),
            (LABELS_FILE, labels_to_csv(&self.labels)?),
            (TRUTH_FILE, to_pretty_json(&self.truth)?),
        ])
    }
}

/// Delta intervals kept well inside the default regime cut points.
fn regime_delta_range(label: RegimeLabel) -> [f64; 2] {
    let [b1, b2, b3] = DEFAULT_BOUNDARIES;
    match label {
        RegimeLabel::Race => [24.0, 0.8 * b1],
        RegimeLabel::TacticalReactive => [1.25 * b1, 0.8 * b2],
        RegimeLabel::StrategicMigration => [1.25 * b2, 0.8 * b3],
        RegimeLabel::LongTail => [1.25 * b3, 8.0 * b3],
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Flow {
    In,
    Out,
    RevertedIn,
    RevertedOut,
}

struct PlannedTx {
    time: i64,
    flow: Flow,
    amount: Amount,
}

struct Gen {
    rng: ChaCha8Rng,
    cfg: SynthConfig,
    out: SynthOutput,
}

impl Gen {
    fn hex(&mut self, bytes: usize) -> String {
        let mut s = String::with_capacity(2 + 2 * bytes);
        s.push_str("0x");
        for _ in 0..bytes {
            s.push_str(&format!("{:02x}", self.rng.random::<u8>()));
        }
        s
    }

    fn log_uniform(&mut self, [lo, hi]: [f64; 2]) -> f64 {
        (lo.ln() + self.rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
    }

    /// Log-normal around the burst center, truncated to whole seconds in
    /// `[lo, hi)`; the center is pulled into the range first.
    fn intra_gap(&mut self) -> i64 {
        let [lo, hi] = self.cfg.intra_range();
        let (min, max) = (lo.ceil(), hi.ceil() - 1.0);
        let center = self.cfg.burst_center.clamp(lo, hi).log10();
        let dist = Normal::new(center, self.cfg.burst_spread).expect("validated spread");
        loop {
            let g = 10f64.powf(dist.sample(&mut self.rng)).floor();
            if (min..=max).contains(&g) {
                return g as i64;
            }
        }
    }

    /// Strictly above the lower end of the inter range.
    fn inter_gap(&mut self) -> i64 {
        let r = self.cfg.inter_range();
        let g = self.log_uniform(r).ceil();
        g.max(r[0].floor() + 1.0) as i64
    }

    fn count(&mut self, [lo, hi]: [usize; 2]) -> usize {
        self.rng.random_range(lo..=hi)
    }

    /// Whole cents drawn uniformly from `[lo, hi]` dollars.
    fn dollars(&mut self, lo: f64, hi: f64) -> Amount {
        let cents = self.rng.random_range((lo * 100.0).ceil() as i64..=(hi * 100.0).floor() as i64);
        Amount::from_micros(cents as i128 * 10_000)
    }

    /// Splits `total` into `parts` positive whole-cent pieces.
    fn split(&mut self, total: Amount, parts: usize) -> Vec<Amount> {
        let cents = total.micros() / 10_000;
        let mut cuts: Vec<i128> = rand::seq::index::sample(&mut self.rng, cents as usize - 1, parts - 1)
            .into_iter()
            .map(|i| i as i128 + 1)
            .collect();
        cuts.sort_unstable();
        let mut out = Vec::with_capacity(parts);
        let mut prev = 0;
        for c in cuts.into_iter().chain(std::iter::once(cents)) {
            out.push(Amount::from_micros((c - prev) * 10_000));
            prev = c;
        }
        let rest = total - out.iter().copied().sum::<Amount>();
        *out.last_mut().expect("parts >= 1") += rest;
        out
    }

    fn pick_regime(&mut self) -> RegimeLabel {
        let u: f64 = self.rng.random();
        let mut acc = 0.0;
        for (label, p) in RegimeLabel::ALL.into_iter().zip(self.cfg.regime_mix) {
            acc += p;
            if u < acc {
                return label;
            }
        }
        RegimeLabel::LongTail
    }

    /// Times for `n` transactions ending at `end`, spaced by intra gaps.
    fn burst_ending_at(&mut self, end: i64, n: usize) -> Vec<i64> {
        let mut times = vec![end];
        for _ in 1..n {
            let t = times[times.len() - 1] - self.intra_gap();
            times.push(t);
        }
        times.reverse();
        times
    }

    fn emit(&mut self, address: &str, token: &str, episode: &[PlannedTx]) -> Vec<String> {
        let mut ids = Vec::with_capacity(episode.len());
        for tx in episode {
            let tx_id = self.hex(32);
            let peer = self.hex(20);
            let (from_addr, to_addr) = match tx.flow {
                Flow::In | Flow::RevertedIn => (peer, address.to_string()),
                Flow::Out | Flow::RevertedOut => (address.to_string(), peer),
            };
            self.out.transfers.push(TransferEvent {
                token: token.to_string(),
                tx_id: tx_id.clone(),
                block_time: tx.time,
                from_addr,
                to_addr,
                amount: tx.amount,
                reverted: matches!(tx.flow, Flow::RevertedIn | Flow::RevertedOut),
            });
            ids.push(tx_id);
        }
        ids
    }

    fn sanction(&mut self, address: &str, token: &str, kind: SanctionKind, t_exec: i64, t_submit: Option<i64>) {
        self.out.sanctions.push(SanctionEvent {
            token: token.to_string(),
            address: address.to_string(),
            kind,
            t_submit,
            t_exec,
        });
    }

    fn account(&mut self) -> (String, String, i64, Option<i64>) {
        let address = self.hex(20);
        let usdc = self.rng.random::<f64>() < self.cfg.usdc_fraction;
        let t_exec = self.cfg.start_time + self.rng.random_range(100_000_000..200_000_000);
        let t_submit = (!usdc).then(|| t_exec - self.rng.random_range(60..7_200));
        let token = if usdc { "USDC" } else { "USDT" };
        (address, token.to_string(), t_exec, t_submit)
    }

    /// Routine, non-material episodes ending before `end`; returns their
    /// planned transactions and the closing balance.
    fn routine(&mut self, end: i64, episodes: usize) -> (Vec<Vec<PlannedTx>>, Amount) {
        let mut starts = Vec::with_capacity(episodes);
        let mut cursor = end;
        for _ in 0..episodes {
            let n = self.count(self.cfg.txs_per_episode);
            let last = cursor - self.inter_gap();
            let times = self.burst_ending_at(last, n);
            cursor = times[0];
            starts.push(times);
        }
        starts.reverse();
        let beta = self.cfg.beta;
        let mut balance = Amount::ZERO;
        let mut planned = Vec::with_capacity(episodes);
        for (e, times) in starts.into_iter().enumerate() {
            let n = times.len();
            // Outflow budget per transaction keeps the episode total under 0.4 beta.
            let cap = 0.4 * beta / n as f64;
            let mut ep = Vec::with_capacity(n);
            for (j, time) in times.into_iter().enumerate() {
                let want_out = !(e == 0 && j == 0) && self.rng.random::<f64>() < 0.3;
                let small = self.dollars(1.0, cap.max(1.0));
                if want_out && small <= balance {
                    balance -= small;
                    ep.push(PlannedTx { time, flow: Flow::Out, amount: small });
                } else {
                    let amt = self.dollars(5.0 * beta, 50.0 * beta);
                    balance += amt;
                    ep.push(PlannedTx { time, flow: Flow::In, amount: amt });
                }
            }
            planned.push(ep);
        }
        (planned, balance)
    }

    fn evader(&mut self) {
        let (address, token, t_exec, t_submit) = self.account();
        let regime = self.pick_regime();
        let delta = self.log_uniform(regime_delta_range(regime)).round() as i64;
        let material = self.rng.random::<f64>() < self.cfg.material_fraction;
        let n_final = self.count(self.cfg.txs_per_episode);
        let final_times = self.burst_ending_at(t_exec - delta, n_final);
        let n_routine = self.count(self.cfg.routine_episodes);
        let (routine, balance) = self.routine(final_times[0], n_routine);
        let (alpha, beta) = (self.cfg.alpha, self.cfg.beta);

        // Last pre-enforcement episode: optional leading inflow, then outflows.
        let mut final_ep = Vec::with_capacity(n_final);
        let diluted = !material && n_final >= 2 && self.rng.random::<f64>() < 0.5;
        let lead_in = n_final >= 2 && (diluted || self.rng.random::<f64>() < 0.5);
        let mut liquidity = balance;
        if lead_in {
            let amt = if diluted {
                self.dollars(50.0 * beta / alpha, 100.0 * beta / alpha)
            } else {
                self.dollars(5.0 * beta, 50.0 * beta)
            };
            liquidity += amt;
            final_ep.push(PlannedTx { time: final_times[0], flow: Flow::In, amount: amt });
        }
        let outs = n_final - final_ep.len();
        let total_out = if material {
            let share = self.rng.random_range(0.7..=1.0);
            Amount::from_micros((liquidity.micros() as f64 * share) as i128 / 10_000 * 10_000)
        } else if diluted {
            self.dollars(1.5 * beta, 3.0 * beta)
        } else {
            self.dollars(outs as f64, (0.4 * beta).min(liquidity.to_f64()))
        };
        let pieces = self.split(total_out, outs);
        for (k, amount) in pieces.into_iter().enumerate() {
            final_ep.push(PlannedTx { time: final_times[n_final - outs + k], flow: Flow::Out, amount });
        }

        let mut post = Vec::new();
        if self.rng.random::<f64>() < self.cfg.post_exec_fraction {
            let n = self.count(self.cfg.txs_per_episode);
            let start = t_exec + self.inter_gap();
            let mut time = start;
            for j in 0..n {
                if j > 0 {
                    time += self.intra_gap();
                }
                let amount = self.dollars(1.0, 10.0 * beta);
                post.push(PlannedTx { time, flow: Flow::RevertedOut, amount });
            }
        }

        let delta_of = |ep: &[PlannedTx]| {
            ep.iter()
                .rev()
                .find(|t| t.flow == Flow::Out)
                .map(|t| t_exec - t.time)
                .filter(|&d| d > 0)
        };
        let mut truth = Vec::new();
        for ep in &routine {
            truth.push((self.emit(&address, &token, ep), delta_of(ep), None, false));
        }
        let final_ids = self.emit(&address, &token, &final_ep);
        debug_assert_eq!(delta_of(&final_ep), Some(delta));
        truth.push((final_ids, Some(delta), material.then_some(regime), material));
        if !post.is_empty() {
            truth.push((self.emit(&address, &token, &post), None, None, false));
        }
        for (tx_ids, delta, regime, is_evasion) in truth {
            self.out.truth.episodes.push(TruthEpisode {
                address: address.clone(),
                token: token.clone(),
                tx_ids,
                delta,
                regime,
                is_evasion,
            });
        }
        self.sanction(&address, &token, SanctionKind::Blacklist, t_exec, t_submit);
        if self.rng.random::<f64>() < 0.2 {
            let category = if self.rng.random() { LabelCategory::Other } else { LabelCategory::Unknown };
            self.out.labels.push(AddressLabel { address: address.clone(), category });
        }
        self.out.truth.accounts.push(TruthAccount {
            address,
            token,
            role: PlantedRole::Evader,
            t_exec,
            planted_regime: Some(regime),
        });
    }

    fn decoy(&mut self, role: PlantedRole, index: usize) {
        let (address, token, t_exec, t_submit) = self.account();
        match role {
            PlantedRole::Inert => {
                if self.rng.random() {
                    let t = t_exec - self.rng.random_range(1_000..1_000_000);
                    let amount = self.dollars(1.0, 10.0 * self.cfg.beta);
                    self.emit(&address, &token, &[PlannedTx { time: t, flow: Flow::RevertedIn, amount }]);
                }
                if self.rng.random() {
                    let t = t_exec + self.rng.random_range(1_000..1_000_000);
                    let amount = self.dollars(1.0, 10.0 * self.cfg.beta);
                    self.emit(&address, &token, &[PlannedTx { time: t, flow: Flow::In, amount }]);
                }
            }
            _ => {
                let n = self.count(self.cfg.routine_episodes);
                let end = t_exec - self.inter_gap();
                let (eps, _) = self.routine(end, n);
                for ep in &eps {
                    self.emit(&address, &token, ep);
                }
            }
        }
        self.sanction(&address, &token, SanctionKind::Blacklist, t_exec, t_submit);
        match role {
            PlantedRole::Revoked => {
                let t = t_exec + self.rng.random_range(100_000..10_000_000);
                self.sanction(&address, &token, SanctionKind::Unblacklist, t, None);
            }
            PlantedRole::Recovery => {
                let destroy = t_exec + self.rng.random_range(1_000..1_000_000);
                let reissue = destroy + self.rng.random_range(1_000..1_000_000);
                self.sanction(&address, &token, SanctionKind::DestroyFunds, destroy, None);
                self.sanction(&address, &token, SanctionKind::Reissue, reissue, None);
            }
            PlantedRole::Infrastructure => {
                const INFRA: [LabelCategory; 3] =
                    [LabelCategory::MixerCore, LabelCategory::Intermediary, LabelCategory::ExchangeDepositCluster];
                self.out.labels.push(AddressLabel { address: address.clone(), category: INFRA[index % 3] });
            }
            _ => {}
        }
        self.out.truth.accounts.push(TruthAccount { address, token, role, t_exec, planted_regime: None });
    }
}

/// Deterministic for a given config, seed included.
pub fn synth_generate(cfg: &SynthConfig) -> Result<SynthOutput, PipelineError> {
    cfg.validate()?;
    let mut g = Gen {
        rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        cfg: cfg.clone(),
        out: SynthOutput {
            transfers: Vec::new(),
            sanctions: Vec::new(),
            labels: Vec::new(),
            truth: GroundTruth {
                seed: cfg.seed,
                planted_tau: cfg.planted_tau,
                config: cfg.clone(),
                accounts: Vec::new(),
                episodes: Vec::new(),
            },
        },
    };
    for _ in 0..cfg.addresses {
        g.evader();
    }
    let decoys = [
        (PlantedRole::Revoked, cfg.revoked),
        (PlantedRole::Recovery, cfg.recovery),
        (PlantedRole::Inert, cfg.inert),
        (PlantedRole::Infrastructure, cfg.infrastructure),
    ];
    for (role, n) in decoys {
        for i in 0..n {
            g.decoy(role, i);
        }
    }
    let mut out = g.out;
    out.transfers.sort_by_key(|t| t.block_time);
    out.sanctions.sort_by_key(|s| s.t_exec);
    out.labels.sort_by(|a, b| a.address.cmp(&b.address));
    Ok(out)
}
