use rand::Rng;
use serde::{Deserialize, Serialize};

use super::race::{evader_best_response, issuer_best_response, BidGrid};
use super::rng::Substreams;
use crate::contest::{equilibrium, ContestParams};
use crate::{ContestError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptiveTrajectory {
    /// Bid pairs `(b_I, b_B)`, starting point first.
    pub path: Vec<(f64, f64)>,
    pub final_bids: (f64, f64),
    pub equilibrium_bids: (f64, f64),
    /// Max-norm distance from the final pair to the equilibrium pair.
    pub distance: f64,
}

/// Simultaneous-move grid best-response dynamics.
///
/// Each round both sides best-respond to the other's previous bid. Starting
/// bids default to a seeded uniform draw on the grid.
pub fn run_adaptive(
    params: &ContestParams,
    grid: &BidGrid,
    rounds: usize,
    seed: u64,
    start: Option<(f64, f64)>,
) -> Result<AdaptiveTrajectory> {
    grid.validate()?;
    if rounds == 0 {
        return Err(ContestError::param("rounds", "must be >= 1"));
    }
    let eq = equilibrium(params)?;
    let (mut b_i, mut b_b) = match start {
        Some((a, b)) if a >= 0.0 && b >= 0.0 => (a, b),
        Some(_) => return Err(ContestError::param("start", "bids must be >= 0")),
        None => {
            let mut rng = Substreams::new(seed).stream(0);
            (grid.point(rng.random_range(0..=grid.steps)), grid.point(rng.random_range(0..=grid.steps)))
        }
    };
    let mut path = Vec::with_capacity(rounds + 1);
    path.push((b_i, b_b));
    for _ in 0..rounds {
        let next_i = issuer_best_response(params, grid, b_b);
        let next_b = evader_best_response(params, grid, b_i);
        b_i = next_i;
        b_b = next_b;
        path.push((b_i, b_b));
    }
    Ok(AdaptiveTrajectory {
        path,
        final_bids: (b_i, b_b),
        equilibrium_bids: (eq.b_i, eq.b_b),
        distance: (b_i - eq.b_i).abs().max((b_b - eq.b_b).abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounds_must_be_positive() {
        let p = ContestParams::unit_costs(1.0, 2.0, 1.0).unwrap();
        assert!(run_adaptive(&p, &BidGrid::with_step(4.0, 1e-2), 0, 0, None).is_err());
    }

    #[test]
    fn stationary_at_equilibrium() {
        let p = ContestParams::unit_costs(1.0, 2.0, 1.0).unwrap();
        let eq = equilibrium(&p).unwrap();
        let grid = BidGrid::with_step(4.0, 1e-4);
        let traj = run_adaptive(&p, &grid, 5, 0, Some((eq.b_i, eq.b_b))).unwrap();
        for &(a, b) in &traj.path {
            assert!((a - eq.b_i).abs() <= grid.spacing());
            assert!((b - eq.b_b).abs() <= grid.spacing());
        }
    }

    #[test]
    fn seeded_start_is_deterministic() {
        let p = ContestParams::unit_costs(1.0, 2.0, 1.0).unwrap();
        let grid = BidGrid::with_step(4.0, 1e-2);
        let a = run_adaptive(&p, &grid, 3, 42, None).unwrap();
        let b = run_adaptive(&p, &grid, 3, 42, None).unwrap();
        assert_eq!(a, b);
    }
}
