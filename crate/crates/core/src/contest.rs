//! Single-block freeze-vs-evade contest.
//!
//! The issuer values a freeze at `psi` (expected regulatory loss avoided), the
//! evader values escape at `v`. Bids resolve through the Tullock(r) success
//! function. The issuer's bid is paid unconditionally, the evader's only when
//! the evasion lands.
//!
//! With `x = s^r` and `s = b_I / b_B`, the equilibrium intensity ratio solves
//!
//! ```text
//! phi(s) = s (1 + x)^2 / (1 + (1 + r) x) = psi / v
//! ```
//!
//! `phi` is strictly increasing on `[1, inf)` and `phi(1) = 4 / (r + 2) < 2`,
//! so for `psi / v >= 2` the root is unique and lies above 1.

use serde::{Deserialize, Serialize};

use crate::{ContestError, Result};

/// Smallest prize ratio for which the equilibrium is solved.
pub const MIN_PRIZE_RATIO: f64 = 2.0;
/// Relative tolerance on `|phi(s*) - psi/v| / (psi/v)`.
pub const PHI_REL_TOL: f64 = 1e-10;
/// Iteration cap for the bracketed root finder.
pub const MAX_ITERATIONS: usize = 200;
/// Minimum number of grid intervals accepted by [`verify_nash`].
pub const MIN_NASH_GRID_STEPS: usize = 10_000;

/// One contest instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContestParams {
    /// Evader prize (balance at stake), USD.
    pub v: f64,
    /// Issuer prize (regulatory loss avoided by freezing), USD.
    pub psi: f64,
    /// Contest sharpness, `r >= 1`.
    pub r: f64,
    /// Issuer fixed participation cost.
    #[serde(default)]
    pub c_i: f64,
    /// Evader fixed participation cost.
    #[serde(default)]
    pub c_b: f64,
}

impl ContestParams {
    pub fn new(v: f64, psi: f64, r: f64, c_i: f64, c_b: f64) -> Result<Self> {
        let params = ContestParams {
            v,
            psi,
            r,
            c_i,
            c_b,
        };
        params.validate()?;
        Ok(params)
    }

    /// Cost-free instance.
    pub fn unit_costs(v: f64, psi: f64, r: f64) -> Result<Self> {
        Self::new(v, psi, r, 0.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        positive("v", self.v)?;
        positive("psi", self.psi)?;
        check_r(self.r)?;
        nonnegative("c_i", self.c_i)?;
        nonnegative("c_b", self.c_b)?;
        Ok(())
    }

    pub fn prize_ratio(&self) -> f64 {
        self.psi / self.v
    }

    /// Same instance with both prizes multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        ContestParams {
            v: self.v * factor,
            psi: self.psi * factor,
            ..*self
        }
    }
}

fn positive(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(ContestError::param(name, format!("must be finite and > 0, got {x}")))
    }
}

fn nonnegative(name: &'static str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(ContestError::param(name, format!("must be finite and >= 0, got {x}")))
    }
}

pub(crate) fn check_r(r: f64) -> Result<()> {
    if r.is_finite() && r >= 1.0 {
        Ok(())
    } else {
        Err(ContestError::param("r", format!("must be finite and >= 1, got {r}")))
    }
}

/// Win probabilities for a bid pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuccessProbs {
    pub p_i: f64,
    pub p_b: f64,
    /// False when both bids are zero: nobody competes and the state is unchanged.
    pub contested: bool,
}

impl SuccessProbs {
    pub const NO_CONTEST: SuccessProbs = SuccessProbs {
        p_i: 0.0,
        p_b: 0.0,
        contested: false,
    };
}

/// Tullock(r) contest success function.
///
/// Evaluated through the bid ratio so large bids or large `r` do not overflow.
pub fn success_fn(b_i: f64, b_b: f64, r: f64) -> Result<SuccessProbs> {
    nonnegative("b_i", b_i)?;
    nonnegative("b_b", b_b)?;
    check_r(r)?;
    Ok(success_unchecked(b_i, b_b, r))
}

pub(crate) fn success_unchecked(b_i: f64, b_b: f64, r: f64) -> SuccessProbs {
    if b_i == 0.0 && b_b == 0.0 {
        return SuccessProbs::NO_CONTEST;
    }
    let (p_i, p_b) = if b_i >= b_b {
        let t = (b_b / b_i).powf(r);
        (1.0 / (1.0 + t), t / (1.0 + t))
    } else {
        let t = (b_i / b_b).powf(r);
        (t / (1.0 + t), 1.0 / (1.0 + t))
    };
    SuccessProbs {
        p_i,
        p_b,
        contested: true,
    }
}

/// Issuer payoff `P_I * psi - b_I - C_I` at an arbitrary bid pair.
pub fn issuer_payoff(params: &ContestParams, b_i: f64, b_b: f64) -> f64 {
    let p = success_unchecked(b_i, b_b, params.r);
    p.p_i * params.psi - b_i - params.c_i
}

/// Evader payoff `P_B * (V - b_B) - C_B` at an arbitrary bid pair.
pub fn evader_payoff(params: &ContestParams, b_i: f64, b_b: f64) -> f64 {
    let p = success_unchecked(b_i, b_b, params.r);
    p.p_b * (params.v - b_b) - params.c_b
}

/// `phi(s) = s (1 + s^r)^2 / (1 + (1 + r) s^r)`.
pub fn phi(s: f64, r: f64) -> Result<f64> {
    if !(s.is_finite() && s > 0.0) {
        return Err(ContestError::param("s", format!("must be finite and > 0, got {s}")));
    }
    check_r(r)?;
    Ok(phi_unchecked(s, r))
}

fn phi_unchecked(s: f64, r: f64) -> f64 {
    let x = s.powf(r);
    // (1 + x) * [(1 + x) / (1 + (1 + r) x)] avoids squaring a huge x.
    s * (1.0 + x) * ((1.0 + x) / (1.0 + (1.0 + r) * x))
}

/// d/ds ln phi(s).
fn dlog_phi(s: f64, r: f64) -> f64 {
    let x = s.powf(r);
    // x' / x = r / s
    let dx = r * x / s;
    1.0 / s + 2.0 * dx / (1.0 + x) - (1.0 + r) * dx / (1.0 + (1.0 + r) * x)
}

/// Equilibrium intensity ratio `s* = b_I* / b_B*` for a prize ratio `psi / v`.
///
/// Bracketed Newton iteration on `ln phi(s) - ln ratio`. The bracket starts at
/// `[1, 2]` and the upper end doubles until it straddles the root; a Newton
/// step that leaves the bracket is replaced by bisection.
pub fn solve_intensity_ratio(prize_ratio: f64, r: f64) -> Result<f64> {
    check_r(r)?;
    if !prize_ratio.is_finite() {
        return Err(ContestError::param("prize_ratio", "must be finite"));
    }
    if prize_ratio < MIN_PRIZE_RATIO {
        return Err(ContestError::PrizeRatioBelowTwo(prize_ratio));
    }
    let target = prize_ratio.ln();
    let h = |s: f64| phi_unchecked(s, r).ln() - target;

    let mut lo = 1.0_f64;
    let mut hi = 2.0_f64;
    while h(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(ContestError::NonConvergence {
                iterations: 0,
                residual: f64::INFINITY,
            });
        }
    }

    let rel_residual = |s: f64| (phi_unchecked(s, r) - prize_ratio).abs() / prize_ratio;

    let mut s = 0.5 * (lo + hi);
    for iteration in 0..MAX_ITERATIONS {
        let hs = h(s);
        if hs == 0.0 {
            return Ok(s);
        }
        if hs < 0.0 {
            lo = s;
        } else {
            hi = s;
        }
        let newton = s - hs / dlog_phi(s, r);
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        let converged = (next - s).abs() <= 4.0 * f64::EPSILON * s;
        s = next;
        if converged || hi - lo <= 4.0 * f64::EPSILON * lo {
            let residual = rel_residual(s);
            if residual <= PHI_REL_TOL {
                log::trace!("solved ratio {prize_ratio} r {r}: s* = {s} after {iteration} steps");
                return Ok(s);
            }
            // Stalled without meeting the tolerance; nothing left to refine.
            return Err(ContestError::NonConvergence {
                iterations: iteration + 1,
                residual,
            });
        }
    }
    let residual = rel_residual(s);
    if residual <= PHI_REL_TOL {
        Ok(s)
    } else {
        Err(ContestError::NonConvergence {
            iterations: MAX_ITERATIONS,
            residual,
        })
    }
}

/// Solved contest outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub s_star: f64,
    #[serde(rename = "P_I")]
    pub p_i: f64,
    #[serde(rename = "P_B")]
    pub p_b: f64,
    #[serde(rename = "b_I")]
    pub b_i: f64,
    #[serde(rename = "b_B")]
    pub b_b: f64,
    /// Expected total contest expenditure, i.e. what proposers collect.
    #[serde(rename = "T_star")]
    pub t_star: f64,
    #[serde(rename = "U_I")]
    pub u_i: f64,
    #[serde(rename = "U_B")]
    pub u_b: f64,
}

impl Equilibrium {
    /// Relative residual of the fixed-point equation at `s_star`.
    pub fn phi_residual(&self, params: &ContestParams) -> f64 {
        let ratio = params.prize_ratio();
        (phi_unchecked(self.s_star, params.r) - ratio).abs() / ratio
    }
}

/// Unique interior pure-strategy equilibrium of the contest.
pub fn equilibrium(params: &ContestParams) -> Result<Equilibrium> {
    params.validate()?;
    let s_star = solve_intensity_ratio(params.prize_ratio(), params.r)?;
    Ok(equilibrium_from_ratio(params, s_star))
}

pub(crate) fn equilibrium_from_ratio(params: &ContestParams, s_star: f64) -> Equilibrium {
    let r = params.r;
    let x = s_star.powf(r);
    let p_i = x / (1.0 + x);
    let p_b = 1.0 / (1.0 + x);
    let b_i = params.psi * r * p_i * p_b;
    let b_b = r * p_i * params.v / (1.0 + r * p_i);
    Equilibrium {
        s_star,
        p_i,
        p_b,
        b_i,
        b_b,
        t_star: b_i + p_b * b_b,
        u_i: p_i * params.psi - b_i - params.c_i,
        u_b: p_b * (params.v - b_b) - params.c_b,
    }
}

/// Uniform bid grid `lo + k (hi - lo) / steps`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NashGrid {
    pub lo: f64,
    pub hi: f64,
    pub steps: usize,
}

impl NashGrid {
    /// Grid over `[0, 2 max(b_I, b_B)]`.
    pub fn covering(eq: &Equilibrium, steps: usize) -> Self {
        NashGrid {
            lo: 0.0,
            hi: 2.0 * eq.b_i.max(eq.b_b),
            steps,
        }
    }

    fn point(&self, k: usize) -> f64 {
        self.lo + (self.hi - self.lo) * (k as f64 / self.steps as f64)
    }
}

/// Result of the brute-force unilateral-deviation audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NashAudit {
    pub grid_points: usize,
    pub max_gain_i: f64,
    pub max_gain_b: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Checks that neither player can gain more than `1e-6 max(V, psi)` by
/// deviating to any point of `grid` while the other holds its bid.
pub fn verify_nash(eq: &Equilibrium, params: &ContestParams, grid: &NashGrid) -> Result<NashAudit> {
    params.validate()?;
    if grid.steps < MIN_NASH_GRID_STEPS {
        return Err(ContestError::param(
            "grid.steps",
            format!("need at least {MIN_NASH_GRID_STEPS} steps, got {}", grid.steps),
        ));
    }
    if !(grid.lo.is_finite() && grid.hi.is_finite() && grid.lo >= 0.0 && grid.hi > grid.lo) {
        return Err(ContestError::param(
            "grid",
            format!("need 0 <= lo < hi, got [{}, {}]", grid.lo, grid.hi),
        ));
    }
    if !(eq.b_i >= 0.0 && eq.b_b >= 0.0) {
        return Err(ContestError::param("eq", "bids must be nonnegative"));
    }

    let base_i = issuer_payoff(params, eq.b_i, eq.b_b);
    let base_b = evader_payoff(params, eq.b_i, eq.b_b);
    let mut best_i = f64::NEG_INFINITY;
    let mut best_b = f64::NEG_INFINITY;
    for k in 0..=grid.steps {
        let b = grid.point(k);
        best_i = best_i.max(issuer_payoff(params, b, eq.b_b));
        best_b = best_b.max(evader_payoff(params, eq.b_i, b));
    }
    let tol = 1e-6 * params.v.max(params.psi);
    let max_gain_i = best_i - base_i;
    let max_gain_b = best_b - base_b;
    Ok(NashAudit {
        grid_points: grid.steps + 1,
        max_gain_i,
        max_gain_b,
        tol,
        passed: max_gain_i <= tol && max_gain_b <= tol,
    })
}

/// Outcome of checking `P_I* >= 1 - 1/N` above `psi/v = N (N - 1)^(1/r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LargePsiCheck {
    pub n: f64,
    pub r: f64,
    pub threshold: f64,
    #[serde(rename = "P_I_at_threshold")]
    pub p_i_at_threshold: f64,
    /// Prize ratios actually solved (threshold first, clamped up to 2).
    pub sampled_ratios: Vec<f64>,
    pub holds: bool,
}

/// Ratios sampled above the threshold, as powers of ten of this step.
const LARGE_PSI_DECADE_STEP: f64 = 0.5;
const LARGE_PSI_SAMPLES: usize = 10;

pub fn check_lemma_large_psi(n: f64, r: f64) -> Result<LargePsiCheck> {
    if !(n.is_finite() && n > 1.0) {
        return Err(ContestError::param("n", format!("must be > 1, got {n}")));
    }
    check_r(r)?;
    let threshold = n * (n - 1.0).powf(1.0 / r);
    let start = threshold.max(MIN_PRIZE_RATIO);
    let floor_p = 1.0 - 1.0 / n;
    let floor_s = (n - 1.0).powf(1.0 / r);

    let sampled_ratios: Vec<f64> = std::iter::once(start)
        .chain((1..=LARGE_PSI_SAMPLES).map(|j| start * 10f64.powf(j as f64 * LARGE_PSI_DECADE_STEP)))
        .collect();
    let mut holds = true;
    let mut p_i_at_threshold = f64::NAN;
    for (j, &ratio) in sampled_ratios.iter().enumerate() {
        let s = solve_intensity_ratio(ratio, r)?;
        let x = s.powf(r);
        let p_i = x / (1.0 + x);
        if j == 0 {
            p_i_at_threshold = p_i;
        }
        holds &= p_i >= floor_p && s >= floor_s;
    }
    Ok(LargePsiCheck {
        n,
        r,
        threshold,
        p_i_at_threshold,
        sampled_ratios,
        holds,
    })
}

/// Positivity of the issuer's gross equilibrium payoff.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositiveUtilityCheck {
    /// `(s*)^r`.
    pub x: f64,
    /// `U_I* + C_I`.
    pub gross_utility: f64,
    /// `x > r - 1`.
    pub proof_condition: bool,
    /// `U_I* + C_I > 0`.
    pub utility_positive: bool,
    pub passes: bool,
}

pub fn check_positive_utility(params: &ContestParams) -> Result<PositiveUtilityCheck> {
    let eq = equilibrium(params)?;
    let x = eq.s_star.powf(params.r);
    let gross_utility = eq.u_i + params.c_i;
    let proof_condition = x > params.r - 1.0;
    let utility_positive = gross_utility > 0.0;
    if proof_condition != utility_positive {
        log::warn!(
            "positive-utility conditions disagree at ratio {} r {}: x = {x}, gross = {gross_utility}",
            params.prize_ratio(),
            params.r
        );
    }
    Ok(PositiveUtilityCheck {
        x,
        gross_utility,
        proof_condition,
        utility_positive,
        passes: proof_condition && utility_positive,
    })
}
