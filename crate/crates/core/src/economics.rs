//! Quantities derived from the contest equilibrium: the MEV tax paid to
//! proposers, the issuer's enforcement exposure under a proposer share, and
//! the solo-versus-delegate calculus for small evaders.

use serde::{Deserialize, Serialize};

use crate::contest::{check_r, equilibrium, solve_intensity_ratio, ContestParams, MIN_PRIZE_RATIO};
use crate::{ContestError, Result};

/// Expected proposer take relative to the evader's prize.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MevTaxPoint {
    pub prize_ratio: f64,
    pub r: f64,
    pub s_star: f64,
    /// `T* / V`.
    pub tax_over_v: f64,
    /// `tax_over_v - r s* / (1 + r)`.
    pub asymptote_gap: f64,
}

impl MevTaxPoint {
    /// `r s* / (1 + r)`, the large-ratio asymptote of `T*/V`.
    pub fn asymptote(&self) -> f64 {
        self.r / (1.0 + self.r) * self.s_star
    }
}

pub fn mev_tax(params: &ContestParams) -> Result<MevTaxPoint> {
    let eq = equilibrium(params)?;
    let r = params.r;
    let tax_over_v = eq.t_star / params.v;
    Ok(MevTaxPoint {
        prize_ratio: params.prize_ratio(),
        r,
        s_star: eq.s_star,
        tax_over_v,
        asymptote_gap: tax_over_v - r / (1.0 + r) * eq.s_star,
    })
}

/// `T*/V` written purely in terms of `s*`:
/// `r x / (1 + (1 + r) x) * (s + 1 / (1 + x))` with `x = s^r`.
pub fn tax_over_v_from_ratio(s_star: f64, r: f64) -> f64 {
    let x = s_star.powf(r);
    r * x / (1.0 + (1.0 + r) * x) * (s_star + 1.0 / (1.0 + x))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(ContestError::param("alpha", format!("must lie in [0, 1], got {alpha}")))
    }
}

/// Exposure the issuer removes per unit of proposer share:
/// `b_I* + P_B* psi`.
pub fn contest_exposure(params: &ContestParams) -> Result<f64> {
    let eq = equilibrium(params)?;
    Ok(eq.b_i + eq.p_b * params.psi)
}

/// Issuer's expected per-contest enforcement cost when a fraction `alpha` of
/// proposers is issuer-controlled: `C_I + (1 - alpha)(b_I* + P_B* psi)`.
pub fn enforcement_cost(alpha: f64, params: &ContestParams) -> Result<f64> {
    check_alpha(alpha)?;
    let exposure = contest_exposure(params)?;
    Ok(params.c_i + (1.0 - alpha) * exposure)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnforcementCostCurve {
    pub alpha_grid: Vec<f64>,
    pub cost: Vec<f64>,
    /// d cost / d alpha, constant.
    pub slope: f64,
    #[serde(rename = "T_star")]
    pub t_star: f64,
    /// `-slope >= 2/3 T*`.
    pub slope_bound_holds: bool,
}

pub fn enforcement_cost_curve(params: &ContestParams, alpha_steps: usize) -> Result<EnforcementCostCurve> {
    if alpha_steps < 2 {
        return Err(ContestError::param("alpha_steps", "need at least 2 grid points"));
    }
    let eq = equilibrium(params)?;
    let exposure = eq.b_i + eq.p_b * params.psi;
    let last = (alpha_steps - 1) as f64;
    let alpha_grid: Vec<f64> = (0..alpha_steps).map(|k| k as f64 / last).collect();
    let cost = alpha_grid
        .iter()
        .map(|a| params.c_i + (1.0 - a) * exposure)
        .collect();
    Ok(EnforcementCostCurve {
        alpha_grid,
        cost,
        slope: -exposure,
        t_star: eq.t_star,
        slope_bound_holds: exposure >= 2.0 / 3.0 * eq.t_star,
    })
}

/// Payoff of an evader with balance `v_i` contesting alone at a common prize ratio:
/// `v_i / (1 + (1 + r) x) - C_B`.
pub fn solo_payoff(v_i: f64, prize_ratio: f64, r: f64, c_b: f64) -> Result<f64> {
    if !(v_i.is_finite() && v_i > 0.0) {
        return Err(ContestError::param("v_i", format!("must be > 0, got {v_i}")));
    }
    if !(c_b.is_finite() && c_b >= 0.0) {
        return Err(ContestError::param("c_b", format!("must be >= 0, got {c_b}")));
    }
    Ok(v_i * solo_factor(prize_ratio, r)? - c_b)
}

/// Gross solo payoff per unit of balance, `1 / (1 + (1 + r) x)`.
fn solo_factor(prize_ratio: f64, r: f64) -> Result<f64> {
    check_r(r)?;
    let s = solve_intensity_ratio(prize_ratio, r)?;
    Ok(1.0 / (1.0 + (1.0 + r) * s.powf(r)))
}

/// Smallest balance at which contesting alone breaks even.
pub fn solo_breakeven(prize_ratio: f64, r: f64, c_b: f64) -> Result<f64> {
    if !(c_b.is_finite() && c_b > 0.0) {
        return Err(ContestError::param("c_b", format!("must be > 0, got {c_b}")));
    }
    Ok(c_b / solo_factor(prize_ratio, r)?)
}

/// Evaders sharing one prize ratio who may pool through a bot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelegationScenario {
    /// Individual balances; their sum is the pooled `V`.
    pub v_i: Vec<f64>,
    /// Common `psi_i / v_i`.
    pub prize_ratio: f64,
    pub r: f64,
    pub c_b: f64,
    /// Bot commission.
    pub f: f64,
}

impl DelegationScenario {
    pub fn new(v_i: Vec<f64>, prize_ratio: f64, r: f64, c_b: f64, f: f64) -> Result<Self> {
        let scn = DelegationScenario {
            v_i,
            prize_ratio,
            r,
            c_b,
            f,
        };
        scn.validate()?;
        Ok(scn)
    }

    /// `n` evaders with equal shares of `total`.
    pub fn equal_split(n: usize, total: f64, prize_ratio: f64, r: f64, c_b: f64, f: f64) -> Result<Self> {
        if n == 0 {
            return Err(ContestError::param("n", "need at least one evader"));
        }
        Self::new(vec![total / n as f64; n], prize_ratio, r, c_b, f)
    }

    /// Builds a scenario from per-evader prize pairs, which must share one ratio.
    pub fn from_prizes(v_i: Vec<f64>, psi_i: &[f64], r: f64, c_b: f64, f: f64) -> Result<Self> {
        if v_i.len() != psi_i.len() || v_i.is_empty() {
            return Err(ContestError::param("psi_i", "need one penalty per evader"));
        }
        let ratio = psi_i[0] / v_i[0];
        for (v, psi) in v_i.iter().zip(psi_i) {
            let own = psi / v;
            if (own - ratio).abs() > 1e-9 * ratio {
                return Err(ContestError::param(
                    "psi_i",
                    format!("heterogeneous prize ratios ({own} vs {ratio})"),
                ));
            }
        }
        Self::new(v_i, ratio, r, c_b, f)
    }

    pub fn validate(&self) -> Result<()> {
        if self.v_i.is_empty() {
            return Err(ContestError::param("v_i", "need at least one evader"));
        }
        if let Some(bad) = self.v_i.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(ContestError::param("v_i", format!("balances must be > 0, got {bad}")));
        }
        if !(self.f > 0.0 && self.f < 1.0) {
            return Err(ContestError::param("f", format!("commission must lie in (0, 1), got {}", self.f)));
        }
        if !(self.c_b.is_finite() && self.c_b >= 0.0) {
            return Err(ContestError::param("c_b", format!("must be >= 0, got {}", self.c_b)));
        }
        check_r(self.r)?;
        if self.prize_ratio.is_nan() || self.prize_ratio < MIN_PRIZE_RATIO {
            return Err(ContestError::PrizeRatioBelowTwo(self.prize_ratio));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.v_i.len()
    }

    pub fn total(&self) -> f64 {
        self.v_i.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaderChoice {
    pub v_i: f64,
    pub solo: f64,
    pub delegate: f64,
    pub prefers_delegate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelegationReport {
    /// `P_B*(V - b_B*)` on the pooled contest, before the bot's `C_B`.
    pub bot_gross: f64,
    pub evaders: Vec<EvaderChoice>,
}

pub fn delegation_analysis(scn: &DelegationScenario) -> Result<DelegationReport> {
    scn.validate()?;
    let total = scn.total();
    let pooled = ContestParams::new(total, scn.prize_ratio * total, scn.r, 0.0, scn.c_b)?;
    let eq = equilibrium(&pooled)?;
    let bot_gross = eq.p_b * (total - eq.b_b);
    let factor = solo_factor(scn.prize_ratio, scn.r)?;
    let evaders = scn
        .v_i
        .iter()
        .map(|&v_i| {
            let solo = v_i * factor - scn.c_b;
            let delegate = (1.0 - scn.f) * (v_i / total) * (bot_gross - scn.c_b);
            EvaderChoice {
                v_i,
                solo,
                delegate,
                prefers_delegate: delegate > solo,
            }
        })
        .collect();
    Ok(DelegationReport { bot_gross, evaders })
}
