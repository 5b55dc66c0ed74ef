use serde::Serialize;

use semev_core::equilibrium;

use super::{csv_bytes, json_bytes, merge_contest, to_value, Ctx, Outcome};
use crate::error::CliResult;
use crate::{ContestArgs, Format};

#[derive(Debug, Serialize)]
struct SolveRow {
    #[serde(rename = "V")]
    v: f64,
    #[serde(rename = "Psi")]
    psi: f64,
    r: f64,
    #[serde(rename = "C_I")]
    c_i: f64,
    #[serde(rename = "C_B")]
    c_b: f64,
    prize_ratio: f64,
    s_star: f64,
    #[serde(rename = "P_I")]
    p_i: f64,
    #[serde(rename = "P_B")]
    p_b: f64,
    #[serde(rename = "b_I")]
    b_i: f64,
    #[serde(rename = "b_B")]
    b_b: f64,
    #[serde(rename = "T_star")]
    t_star: f64,
    #[serde(rename = "U_I")]
    u_i: f64,
    #[serde(rename = "U_B")]
    u_b: f64,
    phi_residual: f64,
}

pub fn run(ctx: &Ctx, args: &ContestArgs) -> CliResult<Outcome> {
    let contest = merge_contest(&ctx.config.contest, args);
    let p = contest.params()?;
    let eq = equilibrium(&p)?;
    let row = SolveRow {
        v: p.v,
        psi: p.psi,
        r: p.r,
        c_i: p.c_i,
        c_b: p.c_b,
        prize_ratio: p.prize_ratio(),
        s_star: eq.s_star,
        p_i: eq.p_i,
        p_b: eq.p_b,
        b_i: eq.b_i,
        b_b: eq.b_b,
        t_star: eq.t_star,
        u_i: eq.u_i,
        u_b: eq.u_b,
        phi_residual: eq.phi_residual(&p),
    };
    let artifact = match ctx.format.unwrap_or(Format::Json) {
        Format::Json => ctx.sink.emit("solve.json", &json_bytes(&row)?)?,
        Format::Csv => ctx.sink.emit("solve.csv", &csv_bytes(&[row])?)?,
    };
    Ok(Outcome {
        artifacts: vec![artifact],
        effective: to_value(&contest)?,
        counts: None,
        seed: ctx.seed,
    })
}
