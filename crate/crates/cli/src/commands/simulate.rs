use serde_json::{json, Value};

use semev_core::sim::{
    default_bid_ratios, run_adaptive, run_gas_auction_micro, run_repeated, BidGrid, ChannelRegime, MonteCarlo,
    RepeatedConfig, Strategy, Winner,
};
use semev_core::{equilibrium, ContestParams};

use super::{json_bytes, merge_contest, object_csv, to_value, Ctx, Outcome};
use crate::config::{SimMode, SimulateSection};
use crate::error::{CliError, CliResult};
use crate::output::Artifact;
use crate::{Format, SimulateArgs};

pub const TRIALS_FILE: &str = "trials.csv";

fn merge(base: &SimulateSection, args: &SimulateArgs) -> SimulateSection {
    let alpha = args.alpha.or(base.alpha);
    let mode = match args.mode {
        Some(m) => m,
        None if args.alpha.is_some() => SimMode::Repeated,
        None if base.mode == SimMode::Race && alpha.is_some() => SimMode::Repeated,
        None => base.mode,
    };
    SimulateSection {
        mode,
        trials: args.trials.unwrap_or(base.trials),
        regime: args.regime.clone().unwrap_or_else(|| base.regime.clone()),
        strategy_i: args.strategy_i.clone().unwrap_or_else(|| base.strategy_i.clone()),
        strategy_b: args.strategy_b.clone().unwrap_or_else(|| base.strategy_b.clone()),
        alpha,
        rounds: args.rounds.unwrap_or(base.rounds),
        grid_hi: args.grid_hi.or(base.grid_hi),
        grid_steps: args.grid_steps.unwrap_or(base.grid_steps),
        start: args.start.as_deref().map(|s| [s[0], s[1]]).or(base.start),
        noise: args.noise.unwrap_or(base.noise),
        bid_ratios: args.bid_ratios.clone().or_else(|| base.bid_ratios.clone()),
        trials_csv: args.trials_csv || base.trials_csv,
    }
}

fn trials_csv(mc: &MonteCarlo) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Internal(e.into());
    w.write_record([
        "trial",
        "winner",
        "b_I",
        "b_B",
        "issuer_paid",
        "evader_paid",
        "proposer_revenue",
        "direct_proposer_payment",
        "issuer_bid_public",
        "evader_bid_public",
    ])
    .map_err(err)?;
    for (i, o) in mc.outcomes() {
        let winner = match o.winner {
            Winner::Freeze => "freeze",
            Winner::Evade => "evade",
            Winner::NoContest => "no_contest",
        };
        w.write_record([
            i.to_string(),
            winner.to_string(),
            o.b_i.to_string(),
            o.b_b.to_string(),
            o.issuer_paid.to_string(),
            o.evader_paid.to_string(),
            o.proposer_revenue.to_string(),
            o.direct_proposer_payment.to_string(),
            o.issuer_bid_public.to_string(),
            o.evader_bid_public.to_string(),
        ])
        .map_err(err)?;
    }
    w.into_inner().map_err(|e| CliError::Internal(anyhow::anyhow!("{e}")))
}

fn parse_regime(s: &str) -> CliResult<ChannelRegime> {
    Ok(s.parse::<ChannelRegime>()?)
}

fn parse_strategy(s: &str) -> CliResult<Strategy> {
    Ok(s.parse::<Strategy>()?)
}

fn default_grid_hi(p: &ContestParams) -> CliResult<f64> {
    let eq = equilibrium(p)?;
    Ok(2.0 * eq.b_i.max(eq.b_b))
}

pub fn run(ctx: &Ctx, args: &SimulateArgs) -> CliResult<Outcome> {
    let contest = merge_contest(&ctx.config.contest, &args.contest);
    let sim = merge(&ctx.config.simulate, args);
    let p = contest.params()?;
    let seed = ctx.seed;
    let mut extra: Vec<Artifact> = Vec::new();

    let (name, report): (&str, Value) = match sim.mode {
        SimMode::Race => {
            let mc = MonteCarlo::new(
                &p,
                &parse_strategy(&sim.strategy_i)?,
                &parse_strategy(&sim.strategy_b)?,
                parse_regime(&sim.regime)?,
                sim.trials,
                seed,
            )?;
            if sim.trials_csv {
                if ctx.sink.dir().is_none() {
                    return Err(CliError::usage("--trials-csv needs --out"));
                }
                extra.push(ctx.sink.emit(TRIALS_FILE, &trials_csv(&mc)?)?);
            }
            ("simulate", to_value(&mc.run())?)
        }
        SimMode::Repeated => {
            let alpha = sim.alpha.ok_or_else(|| CliError::usage("repeated mode needs --alpha"))?;
            let cfg = RepeatedConfig { alpha, contests: sim.trials, params: p, seed };
            ("repeated", to_value(&run_repeated(&cfg, &parse_strategy(&sim.strategy_b)?)?)?)
        }
        SimMode::Adaptive => {
            let hi = match sim.grid_hi {
                Some(h) => h,
                None => default_grid_hi(&p)?,
            };
            let grid = BidGrid { hi, steps: sim.grid_steps };
            let start = sim.start.map(|[a, b]| (a, b));
            ("adaptive", to_value(&run_adaptive(&p, &grid, sim.rounds, seed, start)?)?)
        }
        SimMode::Micro => {
            let ratios = sim.bid_ratios.clone().unwrap_or_else(default_bid_ratios);
            ("micro", to_value(&run_gas_auction_micro(&p, sim.noise, &ratios, sim.trials, seed)?)?)
        }
    };

    let main = match ctx.format.unwrap_or(Format::Json) {
        Format::Json => ctx.sink.emit(&format!("{name}.json"), &json_bytes(&report)?)?,
        Format::Csv => ctx.sink.emit(&format!("{name}.csv"), &object_csv(&report)?)?,
    };
    let mut artifacts = vec![main];
    artifacts.extend(extra);
    Ok(Outcome {
        artifacts,
        effective: json!({ "contest": contest, "simulate": sim, "seed": seed }),
        counts: Some(json!({ "trials": sim.trials })),
        seed: ctx.seed,
    })
}
