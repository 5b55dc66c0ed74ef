//! Acceptance checks for the contest model, the simulator and the pipeline.
//!
//! Runs as a plain binary so it can print one PASS/FAIL line per criterion;
//! the process exits nonzero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use semev_core::economics::{delegation_analysis, enforcement_cost_curve, mev_tax, DelegationScenario};
use semev_core::sim::{run_monte_carlo, run_repeated, ChannelRegime, RepeatedConfig, Strategy};
use semev_core::{
    check_lemma_large_psi, check_positive_utility, equilibrium, phi, verify_nash, ContestParams, NashGrid,
};
use semev_pipeline::regimes::assign_regime;
use semev_pipeline::{RegimeLabel, DEFAULT_BOUNDARIES};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

const SWEEP_SIZE: usize = 200;
const NASH_STEPS: usize = 100_000;

/// The shared random instance set: `(prize ratio, r)` pairs.
fn sweep() -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (lo, hi) = (2f64.ln(), 1e4f64.ln());
    (0..SWEEP_SIZE)
        .map(|_| (rng.random_range(lo..=hi).exp(), rng.random_range(1.0..=6.0)))
        .collect()
}

fn unit(ratio: f64, r: f64) -> ContestParams {
    ContestParams::new(1.0, ratio, r, 0.0, 0.0).unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: u64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() <= limit as f64, || format!("took {elapsed:.1?}, limit {limit} s"))
}

fn equilibrium_correctness() -> Check {
    let start = Instant::now();
    let mut worst_residual = 0f64;
    let mut worst_gain = f64::NEG_INFINITY;
    for (ratio, r) in sweep() {
        let p = unit(ratio, r);
        let eq = equilibrium(&p).map_err(|e| e.to_string())?;
        let residual = eq.phi_residual(&p);
        worst_residual = worst_residual.max(residual);
        ensure(residual <= 1e-10, || format!("residual {residual:e} at ratio {ratio} r {r}"))?;
        let audit = verify_nash(&eq, &p, &NashGrid::covering(&eq, NASH_STEPS)).map_err(|e| e.to_string())?;
        worst_gain = worst_gain.max(audit.max_gain_i.max(audit.max_gain_b) / audit.tol);
        ensure(audit.passed, || format!("deviation pays at ratio {ratio} r {r}: {audit:?}"))?;
    }
    within(start.elapsed(), 60)?;
    Ok(format!(
        "max residual {worst_residual:.1e}, max gain/tol {worst_gain:.2e}, {:.1?}",
        start.elapsed()
    ))
}

fn equilibrium_bounds() -> Check {
    let mut min_margin_p = f64::INFINITY;
    let mut min_margin_t = f64::INFINITY;
    for (ratio, r) in sweep() {
        let eq = equilibrium(&unit(ratio, r)).map_err(|e| e.to_string())?;
        let floor_t = r / (r + 2.0);
        ensure(eq.p_i > 0.5, || format!("P_I = {} at ratio {ratio} r {r}", eq.p_i))?;
        ensure(eq.t_star > floor_t, || format!("T* = {} <= {floor_t} at ratio {ratio} r {r}", eq.t_star))?;
        min_margin_p = min_margin_p.min(eq.p_i - 0.5);
        min_margin_t = min_margin_t.min(eq.t_star - floor_t);
    }
    Ok(format!("0 violations; min P_I - 1/2 = {min_margin_p:.3e}, min T* - rV/(r+2) = {min_margin_t:.3e}"))
}

fn supporting_checks() -> Check {
    for n in [2.0, 3.0, 5.0, 10.0] {
        for r in [1.0, 2.0, 4.0] {
            let c = check_lemma_large_psi(n, r).map_err(|e| e.to_string())?;
            ensure(c.holds, || format!("large-prize bound fails at N {n} r {r}: {c:?}"))?;
        }
    }
    for (ratio, r) in sweep() {
        let c = check_positive_utility(&unit(ratio, r)).map_err(|e| e.to_string())?;
        ensure(c.passes && c.proof_condition && c.utility_positive, || {
            format!("positive utility fails at ratio {ratio} r {r}: {c:?}")
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let rs = [1.0, 2.0, 4.0];
    for r in rs {
        for _ in 0..1000 {
            let a = rng.random_range(0.0..6.0f64).exp();
            let b = rng.random_range(0.0..6.0f64).exp();
            if a == b {
                continue;
            }
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let (pl, ph) = (phi(lo, r).map_err(|e| e.to_string())?, phi(hi, r).map_err(|e| e.to_string())?);
            ensure(pl < ph, || format!("phi not increasing at r {r}: phi({lo}) = {pl}, phi({hi}) = {ph}"))?;
        }
    }
    Ok("12 large-prize cases, 200 utility cases, 3000 monotone pairs".into())
}

fn tax_divergence() -> Check {
    let steps = 50;
    let mut gaps = Vec::new();
    for r in [1.0, 2.0, 4.0] {
        let taxes: Vec<f64> = (0..steps)
            .map(|k| {
                let ratio = (2f64.ln() + (1e4f64.ln() - 2f64.ln()) * k as f64 / (steps - 1) as f64).exp();
                mev_tax(&unit(ratio, r)).map(|t| t.tax_over_v)
            })
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ensure(taxes.windows(2).all(|w| w[1] > w[0]), || format!("tax not increasing at r {r}: {taxes:?}"))?;
        let far = mev_tax(&unit(1e4, r)).map_err(|e| e.to_string())?;
        let rel = far.asymptote_gap.abs() / far.asymptote();
        ensure(rel <= 0.01, || format!("gap {rel:.4} at ratio 1e4 r {r}"))?;
        gaps.push(format!("r={r}: {:.3}%", rel * 100.0));
    }
    Ok(format!("increasing on all grids; gap at 1e4 {}", gaps.join(", ")))
}

fn enforcement_curve() -> Check {
    let start = Instant::now();
    let mut worst_affine = 0f64;
    for (ratio, r) in sweep() {
        let p = ContestParams::new(1.0, ratio, r, 0.1, 0.0).unwrap();
        let curve = enforcement_cost_curve(&p, 21).map_err(|e| e.to_string())?;
        let (c0, c1) = (curve.cost[0], *curve.cost.last().unwrap());
        for (a, c) in curve.alpha_grid.iter().zip(&curve.cost) {
            let line = c0 + a * (c1 - c0);
            let rel = (c - line).abs() / c.abs().max(c0.abs());
            worst_affine = worst_affine.max(rel);
            ensure(rel <= 1e-12, || format!("not affine at ratio {ratio} r {r}: {rel:e}"))?;
        }
        ensure(curve.slope.abs() >= 2.0 / 3.0 * curve.t_star, || {
            format!("slope {} below 2/3 T* {} at ratio {ratio} r {r}", curve.slope, curve.t_star)
        })?;
    }
    let p = ContestParams::new(1.0, 2.0, 1.0, 0.1, 0.0).unwrap();
    let mut sims = Vec::new();
    for alpha in [0.0, 0.5, 1.0] {
        let cfg = RepeatedConfig { alpha, contests: 1_000_000, params: p, seed: 11 };
        let rep = run_repeated(&cfg, &Strategy::EquilibriumBid).map_err(|e| e.to_string())?;
        let dev = (rep.empirical_cost - rep.analytic_cost).abs();
        ensure(dev <= 3.0 * rep.stderr_cost, || format!("alpha {alpha}: {rep:?}"))?;
        sims.push(format!("a={alpha}: {:.5} vs {:.5}", rep.empirical_cost, rep.analytic_cost));
    }
    Ok(format!("max affine error {worst_affine:.1e}; {}; {:.1?}", sims.join(", "), start.elapsed()))
}

fn monte_carlo() -> Check {
    let start = Instant::now();
    let p = unit(2.0, 1.0);
    let rep = run_monte_carlo(&p, &Strategy::EquilibriumBid, &Strategy::EquilibriumBid, ChannelRegime::PublicPublic, 1_000_000, 7)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure((rep.empirical_p_i - 0.5732).abs() <= 0.0015, || format!("P_I {}", rep.empirical_p_i))?;
    ensure((rep.mean_proposer_revenue - 0.6448).abs() <= 3.0 * rep.stderr_proposer_revenue, || {
        format!("revenue {} stderr {}", rep.mean_proposer_revenue, rep.stderr_proposer_revenue)
    })?;
    within(elapsed, 30)?;
    Ok(format!(
        "P_I {:.4}, revenue {:.4} (se {:.1e}), {elapsed:.1?}",
        rep.empirical_p_i, rep.mean_proposer_revenue, rep.stderr_proposer_revenue
    ))
}

fn delegation() -> Check {
    let scn = DelegationScenario::equal_split(10, 10.0, 2.0, 1.0, 0.5, 0.1).map_err(|e| e.to_string())?;
    let rep = delegation_analysis(&scn).map_err(|e| e.to_string())?;
    ensure(rep.evaders.len() == 10, || format!("{} evaders", rep.evaders.len()))?;
    for e in &rep.evaders {
        ensure(e.solo < 0.0 && e.delegate > 0.0 && e.prefers_delegate, || format!("{e:?}"))?;
    }
    let e = &rep.evaders[0];
    Ok(format!("each evader: solo {:.4}, delegate {:.4}", e.solo, e.delegate))
}

fn semev(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_semev"))
        .args(args)
        .env("SEMEV_LOG", "error")
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("semev {} failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr).trim())
    })
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth_and_pipeline(root: &Path, seed: &str) -> Result<(), String> {
    let data = root.join("data");
    semev(&["synth", "--seed", seed, "--out", path(&data)])?;
    semev(&[
        "pipeline",
        "--transfers", path(&data.join("transfers.jsonl")),
        "--sanctions", path(&data.join("sanctions.jsonl")),
        "--labels", path(&data.join("labels.csv")),
        "--truth", path(&data.join("ground_truth.json")),
        "--out", path(&root.join("out")),
    ])
}

fn pipeline_recovery() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let start = Instant::now();
    synth_and_pipeline(dir.path(), "42")?;
    let elapsed = start.elapsed();
    let eval: Value = serde_json::from_slice(
        &std::fs::read(dir.path().join("out/evaluation.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let f = |k: &str| eval[k].as_f64().unwrap_or(f64::NAN);
    let (tau, f1, regime, material) = (f("tau"), f("episode_f1"), f("regime_accuracy"), f("materiality_accuracy"));
    ensure((150.0..=600.0).contains(&tau), || format!("tau {tau}"))?;
    ensure(f1 >= 0.95, || format!("episode F1 {f1}"))?;
    ensure(regime >= 0.95, || format!("regime accuracy {regime}"))?;
    ensure(material == 1.0, || format!("materiality accuracy {material}"))?;
    within(elapsed, 60)?;
    Ok(format!("tau {tau:.1} s, F1 {f1:.3}, regime {regime:.3}, materiality {material:.3}, {elapsed:.1?}"))
}

/// Artifact name to digest, from the manifest of `dir`.
fn digests(dir: &Path) -> Result<Vec<(String, String)>, String> {
    let m: Value = serde_json::from_slice(&std::fs::read(dir.join("manifest.json")).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for a in m["artifacts"].as_array().ok_or("manifest without artifacts")? {
        let name = a["name"].as_str().unwrap_or_default().to_string();
        let bytes = std::fs::read(dir.join(&name)).map_err(|e| e.to_string())?;
        let recorded = a["sha256"].as_str().unwrap_or_default().to_string();
        ensure(semev_cli::output::sha256_hex(&bytes) == recorded, || format!("{name}: digest mismatch"))?;
        out.push((name, recorded));
    }
    out.push(("config_hash".into(), m["config_hash"].as_str().unwrap_or_default().to_string()));
    Ok(out)
}

fn determinism() -> Check {
    let runs: [(&str, &[&str]); 7] = [
        ("solve", &["solve", "--v", "1", "--psi", "2", "--r", "1"]),
        ("sweep", &["sweep", "--axis", "prize_ratio", "--from", "2", "--to", "1000", "--steps", "50"]),
        ("race", &["simulate", "--trials", "20000", "--seed", "7", "--regime", "mixed-evader-private", "--trials-csv"]),
        ("repeated", &["simulate", "--alpha", "0.5", "--trials", "20000", "--seed", "7"]),
        ("adaptive", &["simulate", "--mode", "adaptive", "--grid-steps", "4000", "--seed", "7"]),
        ("micro", &["simulate", "--mode", "micro", "--trials", "2000", "--seed", "7"]),
        ("synth", &["synth", "--seed", "9", "--addresses", "30"]),
    ];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut checked = 0;
    for (name, args) in runs {
        let mut seen = Vec::new();
        for k in 0..2 {
            let out = dir.path().join(format!("{name}-{k}"));
            let mut full: Vec<&str> = args.to_vec();
            full.extend(["--out", path(&out)]);
            semev(&full)?;
            seen.push(digests(&out)?);
        }
        ensure(seen[0] == seen[1], || format!("{name}: {:?} vs {:?}", seen[0], seen[1]))?;
        checked += seen[0].len() - 1;
    }
    let mut seen = Vec::new();
    for k in 0..2 {
        let root = dir.path().join(format!("pipeline-{k}"));
        synth_and_pipeline(&root, "3")?;
        seen.push(digests(&root.join("out"))?);
    }
    // Inputs live in different directories, so only the artifacts must agree.
    let artifacts = |d: &[(String, String)]| d.iter().filter(|(n, _)| n != "config_hash").cloned().collect::<Vec<_>>();
    ensure(artifacts(&seen[0]) == artifacts(&seen[1]), || format!("pipeline: {:?} vs {:?}", seen[0], seen[1]))?;
    checked += seen[0].len() - 1;
    Ok(format!("{checked} artifacts identical across reruns of 8 invocations"))
}

fn regime_constants() -> Check {
    let b = DEFAULT_BOUNDARIES;
    let cases = [
        (24.0, RegimeLabel::Race),
        (39_852.0, RegimeLabel::TacticalReactive),
        (242.0, RegimeLabel::Race),
        (243.0, RegimeLabel::TacticalReactive),
        (95_514.0, RegimeLabel::TacticalReactive),
        (95_515.0, RegimeLabel::StrategicMigration),
        (7_614_341.0, RegimeLabel::StrategicMigration),
        (7_614_342.0, RegimeLabel::LongTail),
    ];
    for (delta, want) in cases {
        let got = assign_regime(delta, &b);
        ensure(got == want, || format!("{delta} s -> {got}, expected {want}"))?;
    }
    ensure(b == [242.0, 95_514.0, 7_614_341.0], || format!("default boundaries {b:?}"))?;
    Ok("24 s -> Race, 39852 s -> TacticalReactive, cut points 242/95514/7614341 s right-closed".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("equilibrium residual and Nash audit", equilibrium_correctness),
        ("win probability and expenditure bounds", equilibrium_bounds),
        ("large-prize, positive-utility and monotonicity checks", supporting_checks),
        ("MEV tax divergence and asymptote", tax_divergence),
        ("enforcement cost curve", enforcement_curve),
        ("Monte Carlo agreement", monte_carlo),
        ("small evaders delegate", delegation),
        ("synthetic pipeline recovery", pipeline_recovery),
        ("rerun determinism", determinism),
        ("regime cut points", regime_constants),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.iter().any(|f| f == &n.to_string()) {
            continue;
        }
        match check() {
            Ok(detail) => println!("PASS criterion {n}: {name} ({detail})"),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {n}: {name} ({detail})");
            }
        }
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
