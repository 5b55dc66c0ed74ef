use serde::{Deserialize, Serialize};

use crate::amount::Amount;
use crate::error::PipelineError;

pub const DEFAULT_BOUNDARIES: [f64; 3] = [242.0, 95_514.0, 7_614_341.0];

/// Real-data reference threshold, used when too few gaps exist to estimate one.
pub const REFERENCE_TAU: f64 = 107.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    Default,
    Fitted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub alpha: f64,
    pub beta: f64,
    pub k_range: [usize; 2],
    pub kde_grid_points: usize,
    /// Minimum valley depth relative to the density peak.
    pub kde_min_depth: f64,
    /// Below this many pooled gaps the fallback threshold is used.
    pub min_gaps: usize,
    pub fallback_tau: f64,
    /// Skips estimation entirely when set.
    pub tau: Option<f64>,
    pub gmm_restarts: usize,
    pub gmm_grid_points: usize,
    pub em_tol: f64,
    pub em_max_iter: usize,
    pub variance_floor: f64,
    pub seed: u64,
    pub default_boundaries: [f64; 3],
    pub boundary_mode: BoundaryMode,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            alpha: 0.10,
            beta: 1000.0,
            k_range: [1, 50],
            kde_grid_points: 512,
            kde_min_depth: 0.01,
            min_gaps: 100,
            fallback_tau: REFERENCE_TAU,
            tau: None,
            gmm_restarts: 8,
            gmm_grid_points: 2048,
            em_tol: 1e-8,
            em_max_iter: 200,
            variance_floor: 1e-6,
            seed: 0,
            default_boundaries: DEFAULT_BOUNDARIES,
            boundary_mode: BoundaryMode::Default,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::Config(m));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must be in (0, 1], got {}", self.alpha));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        let [lo, hi] = self.k_range;
        if lo == 0 || lo > hi {
            return bad(format!("k_range must be a nonempty range of positive integers, got [{lo}, {hi}]"));
        }
        if self.kde_grid_points < 3 || self.gmm_grid_points < 3 {
            return bad("density grids need at least 3 points".into());
        }
        if self.gmm_restarts == 0 || self.em_max_iter == 0 {
            return bad("gmm_restarts and em_max_iter must be positive".into());
        }
        if !(self.fallback_tau > 0.0) || self.tau.is_some_and(|t| !(t > 0.0)) {
            return bad("tau values must be positive".into());
        }
        if !(self.variance_floor > 0.0) || !(self.em_tol > 0.0) {
            return bad("variance_floor and em_tol must be positive".into());
        }
        crate::regimes::check_boundaries(&self.default_boundaries)?;
        Ok(())
    }

    pub fn beta_amount(&self) -> Amount {
        Amount::from_f64(self.beta)
    }
}
