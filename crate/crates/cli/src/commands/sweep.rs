use serde::Serialize;

use semev_core::economics::{contest_exposure, enforcement_cost, mev_tax};
use semev_core::{equilibrium, ContestParams};

use super::{csv_bytes, json_bytes, merge_contest, to_value, Ctx, Outcome};
use crate::config::{Axis, SweepSection};
use crate::error::{CliError, CliResult};
use crate::{Format, SweepArgs};

#[derive(Debug, Serialize)]
struct SweepRow {
    #[serde(rename = "V")]
    v: f64,
    #[serde(rename = "Psi")]
    psi: f64,
    prize_ratio: f64,
    r: f64,
    alpha: f64,
    #[serde(rename = "C_I")]
    c_i: f64,
    #[serde(rename = "C_B")]
    c_b: f64,
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
    #[serde(rename = "tax_over_V")]
    tax_over_v: f64,
    asymptote: f64,
    asymptote_gap: f64,
    exposure: f64,
    enforcement_cost: f64,
}

/// `steps` points from `from` to `to` inclusive; one step yields `from`.
pub fn grid(s: &SweepSection) -> CliResult<Vec<f64>> {
    let bad = |m: String| Err(CliError::Domain(m));
    if s.steps == 0 {
        return bad("steps must be at least 1".into());
    }
    if !(s.from.is_finite() && s.to.is_finite()) {
        return bad("range ends must be finite".into());
    }
    if s.log && !(s.from > 0.0 && s.to > 0.0) {
        return bad("a log sweep needs a positive range".into());
    }
    let (lo, hi) = (s.from.min(s.to), s.from.max(s.to));
    match s.axis {
        Axis::PrizeRatio if lo < 2.0 => return bad(format!("prize ratio below 2 (got {lo})")),
        Axis::R if lo < 1.0 => return bad(format!("r must be >= 1 (got {lo})")),
        Axis::Alpha if lo < 0.0 || hi > 1.0 => return bad(format!("alpha must lie in [0, 1] (got {lo}..{hi})")),
        _ => {}
    }
    if s.steps == 1 {
        return Ok(vec![s.from]);
    }
    let last = (s.steps - 1) as f64;
    Ok((0..s.steps)
        .map(|k| {
            let t = k as f64 / last;
            if k == s.steps - 1 {
                s.to
            } else if s.log {
                (s.from.ln() + t * (s.to.ln() - s.from.ln())).exp()
            } else {
                s.from + t * (s.to - s.from)
            }
        })
        .collect())
}

fn row(p: &ContestParams, alpha: f64) -> CliResult<SweepRow> {
    let eq = equilibrium(p)?;
    let tax = mev_tax(p)?;
    Ok(SweepRow {
        v: p.v,
        psi: p.psi,
        prize_ratio: p.prize_ratio(),
        r: p.r,
        alpha,
        c_i: p.c_i,
        c_b: p.c_b,
        s_star: eq.s_star,
        p_i: eq.p_i,
        p_b: eq.p_b,
        b_i: eq.b_i,
        b_b: eq.b_b,
        t_star: eq.t_star,
        u_i: eq.u_i,
        u_b: eq.u_b,
        phi_residual: eq.phi_residual(p),
        tax_over_v: tax.tax_over_v,
        asymptote: tax.asymptote(),
        asymptote_gap: tax.asymptote_gap,
        exposure: contest_exposure(p)?,
        enforcement_cost: enforcement_cost(alpha, p)?,
    })
}

pub fn run(ctx: &Ctx, args: &SweepArgs) -> CliResult<Outcome> {
    let contest = merge_contest(&ctx.config.contest, &args.contest);
    let base = &ctx.config.sweep;
    let section = SweepSection {
        axis: args.axis.unwrap_or(base.axis),
        from: args.from.unwrap_or(base.from),
        to: args.to.unwrap_or(base.to),
        steps: args.steps.unwrap_or(base.steps),
        log: args.log.unwrap_or(base.log),
        alpha: args.alpha.unwrap_or(base.alpha),
    };
    let p0 = contest.params()?;
    let rows = grid(&section)?
        .into_iter()
        .map(|x| match section.axis {
            Axis::PrizeRatio => row(&ContestParams { psi: x * p0.v, ..p0 }, section.alpha),
            Axis::R => row(&ContestParams { r: x, ..p0 }, section.alpha),
            Axis::Alpha => row(&p0, x),
        })
        .collect::<CliResult<Vec<_>>>()?;
    let artifact = match ctx.format.unwrap_or(Format::Csv) {
        Format::Csv => ctx.sink.emit("sweep.csv", &csv_bytes(&rows)?)?,
        Format::Json => ctx.sink.emit("sweep.json", &json_bytes(&rows)?)?,
    };
    Ok(Outcome {
        artifacts: vec![artifact],
        effective: to_value(&serde_json::json!({ "contest": contest, "sweep": section }))?,
        counts: Some(serde_json::json!({ "rows": rows.len() })),
        seed: ctx.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sec(from: f64, to: f64, steps: usize, log: bool) -> SweepSection {
        SweepSection { axis: Axis::PrizeRatio, from, to, steps, log, alpha: 0.0 }
    }

    #[test]
    fn grids() {
        let g = grid(&sec(2.0, 8.0, 3, true)).unwrap();
        assert_eq!((g[0], g[2]), (2.0, 8.0));
        assert!((g[1] - 4.0).abs() < 1e-12);
        assert_eq!(grid(&sec(2.0, 4.0, 3, false)).unwrap(), vec![2.0, 3.0, 4.0]);
        assert_eq!(grid(&sec(5.0, 9.0, 1, false)).unwrap(), vec![5.0]);
        assert!(grid(&sec(2.0, 8.0, 0, true)).is_err());
        assert!(grid(&sec(1.5, 8.0, 4, true)).is_err());
    }
}
