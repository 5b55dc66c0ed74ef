use std::path::Path;

use serde_json::json;

use semev_pipeline::{
    episodes_csv, evaluate_pipeline, ingest_events, read_labels, read_sanctions, read_transfers, run_pipeline,
    to_pretty_json, BoundaryMode, GroundTruth, PipelineConfig,
};

use super::{to_value, Ctx, Outcome};
use crate::error::{CliError, CliResult};
use crate::PipelineArgs;

pub const EPISODES_FILE: &str = "episodes.csv";
pub const REGIMES_FILE: &str = "regimes.json";
pub const FUNNEL_FILE: &str = "funnel.json";
pub const EVALUATION_FILE: &str = "evaluation.json";

fn merge(base: &PipelineConfig, args: &PipelineArgs, seed: u64) -> PipelineConfig {
    let mut c = base.clone();
    if let Some(a) = args.alpha {
        c.alpha = a;
    }
    if let Some(b) = args.beta {
        c.beta = b;
    }
    if let Some(t) = args.tau {
        c.tau = Some(t);
    }
    if let Some(b) = &args.boundaries {
        c.default_boundaries = [b[0], b[1], b[2]];
    }
    if args.fitted_boundaries {
        c.boundary_mode = BoundaryMode::Fitted;
    }
    c.seed = seed;
    c
}

fn read_truth(path: &Path) -> CliResult<GroundTruth> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::usage(format!("{}:{}: {e}", path.display(), e.line()))
    })
}

/// `explicit_seed` is the seed from flags or the top-level config; without
/// one, a supplied ground truth fixes the seed so the two can be compared.
pub fn run(ctx: &Ctx, args: &PipelineArgs, explicit_seed: Option<u64>) -> CliResult<Outcome> {
    if ctx.sink.dir().is_none() {
        return Err(CliError::usage("pipeline writes several files and needs --out"));
    }
    let truth = args.truth.as_deref().map(read_truth).transpose()?;
    let seed = explicit_seed
        .or(truth.as_ref().map(|t| t.seed))
        .unwrap_or(ctx.config.pipeline.seed);
    let cfg = merge(&ctx.config.pipeline, args, seed);
    cfg.validate()?;

    let transfers = read_transfers(&args.transfers)?;
    let sanctions = read_sanctions(&args.sanctions)?;
    let labels = match &args.labels {
        Some(p) => read_labels(p)?,
        None => Vec::new(),
    };
    log::info!("read {} transfers, {} sanction events, {} labels", transfers.len(), sanctions.len(), labels.len());
    let ds = ingest_events(&transfers, &sanctions, &labels);
    let out = run_pipeline(&ds, &cfg)?;

    let mut artifacts = vec![
        ctx.sink.emit(EPISODES_FILE, &episodes_csv(&out.episodes)?)?,
        ctx.sink.emit(REGIMES_FILE, &to_pretty_json(&out.regimes)?)?,
        ctx.sink.emit(
            FUNNEL_FILE,
            &to_pretty_json(&json!({ "tau": out.tau, "funnel": out.funnel, "removed": out.removed }))?,
        )?,
    ];
    if let Some(truth) = &truth {
        let eval = evaluate_pipeline(&out, truth)?;
        artifacts.push(ctx.sink.emit(EVALUATION_FILE, &to_pretty_json(&eval)?)?);
    }
    let counts = json!({
        "funnel": out.funnel,
        "tau": out.tau.tau,
        "tau_source": out.tau.source,
        "regimes": out.regimes.counts,
    });
    let inputs = json!({
        "transfers": args.transfers,
        "sanctions": args.sanctions,
        "labels": args.labels,
        "truth": args.truth,
    });
    Ok(Outcome {
        artifacts,
        effective: json!({ "pipeline": to_value(&cfg)?, "inputs": inputs }),
        counts: Some(counts),
        seed,
    })
}
