//! Inter-transaction gap threshold from a log-space kernel density.

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauSource {
    Estimated,
    Fallback,
    Override,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapThreshold {
    pub tau: f64,
    pub source: TauSource,
    pub n_gaps: usize,
    /// Bandwidth in log10 seconds; absent unless estimated.
    pub bandwidth: Option<f64>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Silverman's rule: `0.9 min(sd, IQR/1.34) n^(-1/5)`.
pub fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let sd = (sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let iqr = (quantile(sorted, 0.75) - quantile(sorted, 0.25)) / 1.34;
    let spread = if iqr > 0.0 { sd.min(iqr) } else { sd };
    0.9 * spread * n.powf(-0.2)
}

/// Gaussian KDE of sorted samples on `grid`; kernels beyond 8 bandwidths are skipped.
pub fn kde(sorted: &[f64], h: f64, grid: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (sorted.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    grid.iter()
        .map(|&g| {
            let lo = sorted.partition_point(|&x| x < g - 8.0 * h);
            let hi = sorted.partition_point(|&x| x <= g + 8.0 * h);
            sorted[lo..hi].iter().map(|&x| (-0.5 * ((g - x) / h).powi(2)).exp()).sum::<f64>() * norm
        })
        .collect()
}

/// Index of the first local minimum after the first local maximum whose depth
/// is at least `min_depth` of the global maximum. Depth is measured against
/// the lower of the two flanking maxima, each taken up to the nearest point
/// on that side that lies below the minimum.
pub fn first_prominent_valley(density: &[f64], min_depth: f64) -> Option<usize> {
    let n = density.len();
    let global = density.iter().cloned().fold(0.0, f64::max);
    let is_max = |i: usize| density[i] > density[i - 1] && density[i] >= density[i + 1];
    let is_min = |i: usize| density[i] < density[i - 1] && density[i] <= density[i + 1];
    let first_peak = (1..n - 1).find(|&i| is_max(i))?;
    (first_peak + 1..n - 1).filter(|&i| is_min(i)).find(|&i| {
        let v = density[i];
        let left = density[..i].iter().rev().take_while(|&&d| d >= v).cloned().fold(v, f64::max);
        let right = density[i + 1..].iter().take_while(|&&d| d >= v).cloned().fold(v, f64::max);
        left.min(right) - v >= min_depth * global
    })
}

/// Threshold from pooled gaps in seconds. Zero gaps count as one second.
pub fn estimate_gap_threshold(gaps: &[i64], cfg: &PipelineConfig) -> Result<GapThreshold, PipelineError> {
    if let Some(tau) = cfg.tau {
        return Ok(GapThreshold { tau, source: TauSource::Override, n_gaps: gaps.len(), bandwidth: None });
    }
    if gaps.len() < cfg.min_gaps {
        log::warn!(
            "{} gaps is below the minimum of {}; using tau = {}",
            gaps.len(),
            cfg.min_gaps,
            cfg.fallback_tau
        );
        return Ok(GapThreshold {
            tau: cfg.fallback_tau,
            source: TauSource::Fallback,
            n_gaps: gaps.len(),
            bandwidth: None,
        });
    }
    let mut logs: Vec<f64> = gaps.iter().map(|&g| (g.max(1) as f64).log10()).collect();
    logs.sort_by(f64::total_cmp);
    let (lo, hi) = (logs[0], logs[logs.len() - 1]);
    let h = silverman_bandwidth(&logs);
    if !(h > 0.0) || hi <= lo {
        return Err(PipelineError::UnimodalGaps);
    }
    let m = cfg.kde_grid_points;
    let grid: Vec<f64> = (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect();
    let density = kde(&logs, h, &grid);
    let i = first_prominent_valley(&density, cfg.kde_min_depth).ok_or(PipelineError::UnimodalGaps)?;
    Ok(GapThreshold {
        tau: 10f64.powf(grid[i]),
        source: TauSource::Estimated,
        n_gaps: gaps.len(),
        bandwidth: Some(h),
    })
}
