//! Statistical checks of the race simulator against the analytic contest.

use semev_core::sim::{
    run_adaptive, run_monte_carlo, run_repeated, BidGrid, ChannelRegime, MonteCarlo, RepeatedConfig, Strategy,
};
use semev_core::{equilibrium, ContestParams};

fn unit() -> ContestParams {
    ContestParams::unit_costs(1.0, 2.0, 1.0).unwrap()
}

#[test]
fn equilibrium_win_rate_within_three_sigma() {
    let eq = equilibrium(&unit()).unwrap();
    let rep = run_monte_carlo(
        &unit(),
        &Strategy::EquilibriumBid,
        &Strategy::EquilibriumBid,
        ChannelRegime::PublicPublic,
        1_000_000,
        7,
    )
    .unwrap();
    assert!((rep.empirical_p_i - eq.p_i).abs() <= rep.ci_radius_p_i, "{rep:?}");
    assert!((rep.empirical_p_i - 0.5732).abs() <= 0.0015);
    assert!((rep.mean_proposer_revenue - eq.t_star).abs() <= 3.0 * rep.stderr_proposer_revenue);
}

#[test]
fn identical_seed_identical_report() {
    let run = || {
        run_monte_carlo(&unit(), &Strategy::EquilibriumBid, &Strategy::EquilibriumBid, ChannelRegime::Mixed { private_side: semev_core::sim::Side::Evader }, 100_000, 99).unwrap()
    };
    let a = serde_json::to_string(&run()).unwrap();
    let b = serde_json::to_string(&run()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn every_trial_balances_its_books() {
    let p = ContestParams::new(1.0, 3.0, 2.0, 0.05, 0.05).unwrap();
    for regime in ChannelRegime::ALL {
        let mc = MonteCarlo::new(&p, &Strategy::EquilibriumBid, &Strategy::EquilibriumBid, regime, 5_000, 1).unwrap();
        for (_, o) in mc.outcomes() {
            assert_eq!(o.issuer_paid, o.b_i);
            match o.winner {
                semev_core::sim::Winner::Evade => assert_eq!(o.evader_paid, o.b_b),
                _ => assert_eq!(o.evader_paid, 0.0),
            }
            assert_eq!(o.proposer_revenue, o.issuer_paid + o.evader_paid);
            assert!(o.direct_proposer_payment <= o.evader_paid);
        }
    }
}

#[test]
fn regimes_do_not_move_win_rate() {
    let rates: Vec<(f64, f64)> = ChannelRegime::ALL
        .iter()
        .enumerate()
        .map(|(k, &regime)| {
            let rep = run_monte_carlo(&unit(), &Strategy::EquilibriumBid, &Strategy::EquilibriumBid, regime, 200_000, 100 + k as u64).unwrap();
            (rep.empirical_p_i, rep.ci_radius_p_i)
        })
        .collect();
    for a in &rates {
        for b in &rates {
            // Difference of two independent estimates: 3 sigma of the difference.
            let radius = (a.1 * a.1 + b.1 * b.1).sqrt();
            assert!((a.0 - b.0).abs() <= radius, "{rates:?}");
        }
    }
}

#[test]
fn repeated_cost_affine_in_alpha() {
    let p = unit();
    let reps: Vec<_> = [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|&alpha| {
            run_repeated(&RepeatedConfig { alpha, contests: 200_000, params: p, seed: 21 }, &Strategy::EquilibriumBid).unwrap()
        })
        .collect();
    for rep in &reps {
        assert!(
            (rep.empirical_cost - rep.analytic_cost).abs() <= 3.0 * rep.stderr_cost + 1e-15,
            "{rep:?}"
        );
    }
    assert_eq!(reps[4].empirical_cost, 0.0);
}

#[test]
fn best_response_dynamics_converge() {
    let grid = BidGrid::with_step(4.0, 1e-4);
    let traj = run_adaptive(&unit(), &grid, 200, 0, Some((0.01, 0.01))).unwrap();
    assert_eq!(traj.path.len(), 201);
    assert!(traj.distance <= 1e-3, "{:?}", traj.final_bids);
}
