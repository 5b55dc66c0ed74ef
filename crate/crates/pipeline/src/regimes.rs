//! Timing regimes: boundary assignment and a 1-D Gaussian mixture over ln(delta).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::PipelineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum RegimeLabel {
    Race,
    TacticalReactive,
    StrategicMigration,
    LongTail,
}

impl RegimeLabel {
    pub const ALL: [RegimeLabel; 4] = [
        RegimeLabel::Race,
        RegimeLabel::TacticalReactive,
        RegimeLabel::StrategicMigration,
        RegimeLabel::LongTail,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RegimeLabel::Race => "Race",
            RegimeLabel::TacticalReactive => "TacticalReactive",
            RegimeLabel::StrategicMigration => "StrategicMigration",
            RegimeLabel::LongTail => "LongTail",
        }
    }
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Three positive, finite, strictly increasing cut points.
pub fn check_boundaries(b: &[f64]) -> Result<[f64; 3], PipelineError> {
    let arr: [f64; 3] = b
        .try_into()
        .map_err(|_| PipelineError::Boundaries(format!("need exactly 3 cut points, got {}", b.len())))?;
    if arr.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(PipelineError::Boundaries(format!("cut points must be positive and finite: {arr:?}")));
    }
    if !(arr[0] < arr[1] && arr[1] < arr[2]) {
        return Err(PipelineError::Boundaries(format!("cut points must be strictly increasing: {arr:?}")));
    }
    Ok(arr)
}

/// Intervals are closed on the right: `delta <= b1` is a race.
pub fn assign_regime(delta: f64, b: &[f64; 3]) -> RegimeLabel {
    if delta <= b[0] {
        RegimeLabel::Race
    } else if delta <= b[1] {
        RegimeLabel::TacticalReactive
    } else if delta <= b[2] {
        RegimeLabel::StrategicMigration
    } else {
        RegimeLabel::LongTail
    }
}

/// Labels each delta; `None` uses the default cut points.
pub fn assign_regimes(deltas: &[f64], boundaries: Option<&[f64]>) -> Result<Vec<RegimeLabel>, PipelineError> {
    let b = check_boundaries(boundaries.unwrap_or(&crate::config::DEFAULT_BOUNDARIES))?;
    Ok(deltas.iter().map(|&d| assign_regime(d, &b)).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KScore {
    pub k: usize,
    /// Absent when every restart for this k failed.
    pub bic: Option<f64>,
}

/// Mixture over natural-log delta. Boundaries are in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeModel {
    pub k: usize,
    pub n: usize,
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub log_likelihood: f64,
    pub bic: f64,
    pub boundaries: Vec<f64>,
    pub bic_by_k: Vec<KScore>,
}

impl RegimeModel {
    pub fn log_density(&self, y: f64) -> f64 {
        log_mixture(&self.weights, &self.means, &self.variances, y)
    }
}

const LN_2PI: f64 = 1.837_877_066_409_345_3;

fn log_normal_pdf(y: f64, mean: f64, var: f64) -> f64 {
    -0.5 * (LN_2PI + var.ln() + (y - mean).powi(2) / var)
}

fn log_mixture(w: &[f64], mu: &[f64], var: &[f64], y: f64) -> f64 {
    let terms: Vec<f64> = (0..w.len()).map(|j| w[j].ln() + log_normal_pdf(y, mu[j], var[j])).collect();
    log_sum_exp(&terms)
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

#[derive(Debug, Clone)]
struct Fit {
    weights: Vec<f64>,
    means: Vec<f64>,
    variances: Vec<f64>,
    log_likelihood: f64,
}

/// Runs EM from the given means. Without a floor, any variance falling below
/// `cfg.variance_floor` counts as collapse; with one, variances are clamped.
fn em(y: &[f64], init_means: &[f64], init_var: f64, floor: Option<f64>, cfg: &PipelineConfig) -> Option<Fit> {
    let n = y.len();
    let k = init_means.len();
    let mut w = vec![1.0 / k as f64; k];
    let mut mu = init_means.to_vec();
    let mut var = vec![init_var; k];
    let mut resp = vec![0.0; n * k];
    let mut offset = vec![0.0; k];
    let mut half_prec = vec![0.0; k];
    let mut prev = f64::NEG_INFINITY;
    for iter in 0..cfg.em_max_iter {
        for j in 0..k {
            offset[j] = w[j].ln() - 0.5 * (LN_2PI + var[j].ln());
            half_prec[j] = 0.5 / var[j];
        }
        let mut ll = 0.0;
        for (row, &yi) in resp.chunks_exact_mut(k).zip(y) {
            let mut top = f64::NEG_INFINITY;
            for j in 0..k {
                row[j] = offset[j] - half_prec[j] * (yi - mu[j]) * (yi - mu[j]);
                top = top.max(row[j]);
            }
            let mut total = 0.0;
            for r in row.iter_mut() {
                let d = *r - top;
                // Below e^-36 a component cannot move the row sum in f64.
                *r = if d < -36.0 { 0.0 } else { d.exp() };
                total += *r;
            }
            for r in row.iter_mut() {
                *r /= total;
            }
            ll += top + total.ln();
        }
        if !ll.is_finite() {
            return None;
        }
        let done = (ll - prev) / (n as f64) < cfg.em_tol;
        if done || iter + 1 == cfg.em_max_iter {
            if !done {
                log::debug!("EM stopped at {} iterations, k = {k}", cfg.em_max_iter);
            }
            return Some(Fit { weights: w, means: mu, variances: var, log_likelihood: ll });
        }
        prev = ll;
        let mut nk = vec![0.0; k];
        let mut sy = vec![0.0; k];
        for (row, &yi) in resp.chunks_exact(k).zip(y) {
            for j in 0..k {
                nk[j] += row[j];
                sy[j] += row[j] * yi;
            }
        }
        for j in 0..k {
            if !(nk[j] > 1e-10) {
                return None;
            }
            mu[j] = sy[j] / nk[j];
        }
        let mut ss = vec![0.0; k];
        for (row, &yi) in resp.chunks_exact(k).zip(y) {
            for j in 0..k {
                ss[j] += row[j] * (yi - mu[j]) * (yi - mu[j]);
            }
        }
        for j in 0..k {
            let v = ss[j] / nk[j];
            var[j] = match floor {
                Some(f) => v.max(f),
                None if v < cfg.variance_floor || !v.is_finite() => return None,
                None => v,
            };
            w[j] = nk[j] / n as f64;
        }
    }
    unreachable!("loop returns on its last iteration")
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Restart 0 spreads means over exact quantiles; later restarts jitter each
/// quantile within its slot using a stream keyed by `(k, restart)`.
fn initial_means(sorted: &[f64], k: usize, restart: usize, seed: u64) -> Vec<f64> {
    if restart == 0 {
        return (0..k).map(|i| quantile(sorted, (i as f64 + 0.5) / k as f64)).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((k as u64) << 32) | restart as u64);
    (0..k).map(|i| quantile(sorted, (i as f64 + rng.random::<f64>()) / k as f64)).collect()
}

fn fit_k(sorted: &[f64], k: usize, cfg: &PipelineConfig) -> Option<Fit> {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let total_var = sorted.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n;
    let init_var = (total_var / (k * k) as f64).max(10.0 * cfg.variance_floor);
    let mut best: Option<Fit> = None;
    for restart in 0..cfg.gmm_restarts {
        let means = initial_means(sorted, k, restart, cfg.seed);
        let fit = em(sorted, &means, init_var, None, cfg)
            .or_else(|| em(sorted, &means, init_var, Some(cfg.variance_floor), cfg));
        match fit {
            Some(f) if best.as_ref().is_none_or(|b| f.log_likelihood > b.log_likelihood) => best = Some(f),
            Some(_) => {}
            None => log::debug!("k = {k}, restart {restart}: EM collapsed"),
        }
    }
    best
}

fn density_minima(w: &[f64], mu: &[f64], var: &[f64], lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if hi <= lo {
        return Vec::new();
    }
    let grid: Vec<f64> = (0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect();
    let d: Vec<f64> = grid.iter().map(|&y| log_mixture(w, mu, var, y)).collect();
    (1..points - 1)
        .filter(|&i| d[i] < d[i - 1] && d[i] <= d[i + 1])
        .map(|i| grid[i].exp())
        .collect()
}

/// Fits one mixture per k, keeps the lowest BIC (ties go to smaller k).
pub fn fit_regime_model(deltas: &[f64], cfg: &PipelineConfig) -> Result<RegimeModel, PipelineError> {
    if let Some(bad) = deltas.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(PipelineError::InsufficientData(format!("deltas must be positive, got {bad}")));
    }
    let n = deltas.len();
    let [k_lo, k_hi] = cfg.k_range;
    let k_max = k_hi.min(n / 10);
    if k_max < k_lo {
        return Err(PipelineError::InsufficientData(format!(
            "{n} deltas cannot support k = {k_lo} (need 10 per component)"
        )));
    }
    if k_max < k_hi {
        log::info!("k capped at {k_max} for {n} deltas");
    }
    let mut y: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    y.sort_by(f64::total_cmp);

    let fits: Vec<(usize, Option<Fit>)> = (k_lo..=k_max).into_par_iter().map(|k| (k, fit_k(&y, k, cfg))).collect();
    let ln_n = (n as f64).ln();
    let bic = |k: usize, f: &Fit| -2.0 * f.log_likelihood + (3 * k - 1) as f64 * ln_n;
    let bic_by_k: Vec<KScore> = fits
        .iter()
        .map(|(k, f)| KScore { k: *k, bic: f.as_ref().map(|f| bic(*k, f)) })
        .collect();
    let (k, best) = fits
        .into_iter()
        .filter_map(|(k, f)| f.map(|f| (k, f)))
        .min_by(|a, b| bic(a.0, &a.1).total_cmp(&bic(b.0, &b.1)))
        .ok_or(PipelineError::AllRestartsCollapsed { k_min: k_lo, k_max })?;
    let boundaries = density_minima(&best.weights, &best.means, &best.variances, y[0], y[n - 1], cfg.gmm_grid_points);
    Ok(RegimeModel {
        k,
        n,
        bic: bic(k, &best),
        log_likelihood: best.log_likelihood,
        weights: best.weights,
        means: best.means,
        variances: best.variances,
        boundaries,
        bic_by_k,
    })
}

/// The three fitted cut points, in order, closest to `defaults` in log10 space.
pub fn select_boundaries(fitted: &[f64], defaults: &[f64; 3]) -> Option<[f64; 3]> {
    let m = fitted.len();
    let cost = |x: f64, d: f64| (x.log10() - d.log10()).powi(2);
    let mut best: Option<([f64; 3], f64)> = None;
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                let s = cost(fitted[a], defaults[0]) + cost(fitted[b], defaults[1]) + cost(fitted[c], defaults[2]);
                if best.is_none_or(|(_, bs)| s < bs) {
                    best = Some(([fitted[a], fitted[b], fitted[c]], s));
                }
            }
        }
    }
    best.map(|(b, _)| b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bucketing() {
        let b = crate::config::DEFAULT_BOUNDARIES;
        assert_eq!(assign_regime(72.0, &b), RegimeLabel::Race);
        assert_eq!(assign_regime(24.0, &b), RegimeLabel::Race);
        assert_eq!(assign_regime(242.0, &b), RegimeLabel::Race);
        assert_eq!(assign_regime(243.0, &b), RegimeLabel::TacticalReactive);
        assert_eq!(assign_regime(39_852.0, &b), RegimeLabel::TacticalReactive);
        assert_eq!(assign_regime(95_514.0, &b), RegimeLabel::TacticalReactive);
        assert_eq!(assign_regime(95_515.0, &b), RegimeLabel::StrategicMigration);
        assert_eq!(assign_regime(7_614_341.0, &b), RegimeLabel::StrategicMigration);
        assert_eq!(assign_regime(7_614_342.0, &b), RegimeLabel::LongTail);
    }

    #[test]
    fn rejects_bad_boundaries() {
        assert!(assign_regimes(&[1.0], Some(&[5.0, 3.0, 9.0])).is_err());
        assert!(assign_regimes(&[1.0], Some(&[5.0, 5.0, 9.0])).is_err());
        assert!(assign_regimes(&[1.0], Some(&[5.0, 9.0])).is_err());
        assert!(assign_regimes(&[1.0], Some(&[-1.0, 3.0, 9.0])).is_err());
        assert_eq!(assign_regimes(&[1.0, 10.0], Some(&[2.0, 3.0, 9.0])).unwrap()[1], RegimeLabel::LongTail);
    }

    #[test]
    fn selects_nearest_trio() {
        let fitted = [30.0, 250.0, 2_000.0, 100_000.0, 300_000.0, 8e6];
        let b = select_boundaries(&fitted, &crate::config::DEFAULT_BOUNDARIES).unwrap();
        assert_eq!(b, [250.0, 100_000.0, 8e6]);
        assert!(select_boundaries(&fitted[..2], &crate::config::DEFAULT_BOUNDARIES).is_none());
    }

    #[test]
    fn too_few_deltas() {
        let r = fit_regime_model(&[10.0; 9], &PipelineConfig::default());
        assert!(matches!(r, Err(PipelineError::InsufficientData(_))));
    }

    #[test]
    fn identical_deltas_use_floor() {
        let m = fit_regime_model(&[100.0; 40], &PipelineConfig::default()).unwrap();
        assert!(m.variances.iter().all(|&v| v >= 1e-6));
        assert!(m.boundaries.is_empty());
    }

    #[test]
    fn weights_normalized() {
        let d: Vec<f64> = (1..=200).map(|i| (i as f64 * 0.37).exp().min(1e9) + i as f64).collect();
        let m = fit_regime_model(&d, &PipelineConfig { k_range: [1, 6], ..PipelineConfig::default() }).unwrap();
        assert!((m.weights.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(m.variances.iter().all(|&v| v > 0.0));
        assert!(m.boundaries.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(m.bic_by_k.len(), 6);
    }
}
