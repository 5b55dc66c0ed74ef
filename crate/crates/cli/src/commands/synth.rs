use serde_json::json;

use semev_pipeline::{synth_generate, SynthConfig};

use super::{to_value, Ctx, Outcome};
use crate::error::{CliError, CliResult};
use crate::SynthArgs;

fn merge(base: &SynthConfig, args: &SynthArgs, seed: u64) -> SynthConfig {
    let mut c = base.clone();
    if let Some(n) = args.addresses {
        c.addresses = n;
    }
    if let Some(t) = args.planted_tau {
        c.planted_tau = t;
    }
    if let Some(m) = &args.regime_mix {
        c.regime_mix = [m[0], m[1], m[2], m[3]];
    }
    if let Some(f) = args.material_fraction {
        c.material_fraction = f;
    }
    if let Some(f) = args.post_exec_fraction {
        c.post_exec_fraction = f;
    }
    c.seed = seed;
    c
}

pub fn run(ctx: &Ctx, args: &SynthArgs) -> CliResult<Outcome> {
    if ctx.sink.dir().is_none() {
        return Err(CliError::usage("synth writes several files and needs --out"));
    }
    let cfg = merge(&ctx.config.synth, args, ctx.seed);
    let out = synth_generate(&cfg)?;
    let artifacts = out
        .files()?
        .into_iter()
        .map(|(name, bytes)| ctx.sink.emit(name, &bytes))
        .collect::<CliResult<Vec<_>>>()?;
    Ok(Outcome {
        artifacts,
        effective: to_value(&cfg)?,
        counts: Some(json!({
            "transfers": out.transfers.len(),
            "sanctions": out.sanctions.len(),
            "labels": out.labels.len(),
            "truth_episodes": out.truth.episodes.len(),
        })),
        seed: ctx.seed,
    })
}
