use proptest::prelude::*;
use semev_core::economics::{enforcement_cost, delegation_analysis, mev_tax, solo_payoff, DelegationScenario};
use semev_core::{equilibrium, phi, verify_nash, ContestParams, NashGrid};

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

proptest! {
    #[test]
    fn phi_strictly_increasing(a in log_uniform(1.0, 1e6), b in log_uniform(1.0, 1e6), r in 1.0f64..8.0) {
        prop_assume!(a != b);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(phi(lo, r).unwrap() < phi(hi, r).unwrap());
    }

    #[test]
    fn equilibrium_consistency(ratio in log_uniform(2.0, 1e4), r in 1.0f64..6.0, v in log_uniform(1e-3, 1e6)) {
        let p = ContestParams::unit_costs(v, ratio * v, r).unwrap();
        let eq = equilibrium(&p).unwrap();
        prop_assert!(eq.phi_residual(&p) <= 1e-10);
        prop_assert!(rel(eq.b_i / eq.b_b, eq.s_star) <= 1e-9);
        let x = eq.s_star.powf(r);
        prop_assert!(rel(eq.p_i, x / (1.0 + x)) <= 1e-9);
        prop_assert!((eq.p_i + eq.p_b - 1.0).abs() <= 1e-15);
        prop_assert!(rel(eq.t_star, eq.b_i + eq.p_b * eq.b_b) <= 1e-12);
        prop_assert!(eq.p_i > 0.5);
        prop_assert!(eq.t_star > r / (r + 2.0) * v);
    }

    #[test]
    fn homogeneous_in_prizes(ratio in log_uniform(2.0, 1e4), r in 1.0f64..6.0, lambda in log_uniform(1e-3, 1e3)) {
        let base = ContestParams::unit_costs(1.0, ratio, r).unwrap();
        let a = equilibrium(&base).unwrap();
        let b = equilibrium(&base.scaled(lambda)).unwrap();
        prop_assert!(rel(b.s_star, a.s_star) <= 1e-12);
        prop_assert!(rel(b.p_i, a.p_i) <= 1e-12);
        for (x, y) in [(b.b_i, a.b_i), (b.b_b, a.b_b), (b.t_star, a.t_star), (b.u_i, a.u_i), (b.u_b, a.u_b)] {
            prop_assert!(rel(x, lambda * y) <= 1e-12);
        }
    }

    #[test]
    fn costs_separate(ratio in log_uniform(2.0, 1e4), r in 1.0f64..6.0, c_i in 0.0f64..10.0, c_b in 0.0f64..10.0) {
        let free = equilibrium(&ContestParams::new(1.0, ratio, r, 0.0, 0.0).unwrap()).unwrap();
        let costly = equilibrium(&ContestParams::new(1.0, ratio, r, c_i, c_b).unwrap()).unwrap();
        prop_assert_eq!(free.s_star, costly.s_star);
        prop_assert_eq!(free.b_i, costly.b_i);
        prop_assert_eq!(free.b_b, costly.b_b);
        prop_assert_eq!(free.t_star, costly.t_star);
        prop_assert!((free.u_i - c_i - costly.u_i).abs() <= 1e-12 * (1.0 + free.u_i.abs()));
        prop_assert!((free.u_b - c_b - costly.u_b).abs() <= 1e-12 * (1.0 + free.u_b.abs()));
    }

    #[test]
    fn enforcement_cost_collinear(ratio in log_uniform(2.0, 1e4), r in 1.0f64..6.0,
                                  a1 in 0.0f64..1.0, a2 in 0.0f64..1.0, a3 in 0.0f64..1.0) {
        let p = ContestParams::new(1.0, ratio, r, 0.2, 0.0).unwrap();
        let [c1, c2, c3] = [a1, a2, a3].map(|a| enforcement_cost(a, &p).unwrap());
        // Cross product of (a2 - a1, c2 - c1) and (a3 - a1, c3 - c1).
        let cross = (a2 - a1) * (c3 - c1) - (a3 - a1) * (c2 - c1);
        let scale = c1.abs().max(c2.abs()).max(c3.abs());
        prop_assert!(cross.abs() <= 1e-12 * scale);
    }

    #[test]
    fn delegation_dominates_losing_solo(n in 2usize..50, ratio in log_uniform(2.0, 100.0), r in 1.0f64..4.0,
                                        total in log_uniform(10.0, 1e4), f in 0.01f64..0.99) {
        // Fixed cost between a single share's solo gain and the pooled gain.
        let per_unit = solo_payoff(1.0, ratio, r, 0.0).unwrap();
        let c_b = per_unit * total / n as f64 * 1.5;
        prop_assume!(c_b < per_unit * total);
        let scn = DelegationScenario::equal_split(n, total, ratio, r, c_b, f).unwrap();
        let rep = delegation_analysis(&scn).unwrap();
        prop_assert!(rep.bot_gross > c_b);
        for e in rep.evaders {
            prop_assert!(e.solo < 0.0);
            prop_assert!(e.delegate > 0.0 && e.prefers_delegate);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn nash_audit_passes(ratio in log_uniform(2.0, 1e4), r in 1.0f64..6.0) {
        let p = ContestParams::unit_costs(1.0, ratio, r).unwrap();
        let eq = equilibrium(&p).unwrap();
        let audit = verify_nash(&eq, &p, &NashGrid::covering(&eq, 20_000)).unwrap();
        prop_assert!(audit.passed, "{:?}", audit);
    }

    #[test]
    fn tax_asymptote_shrinks(r in 1.0f64..6.0) {
        let near = mev_tax(&ContestParams::unit_costs(1.0, 1e4, r).unwrap()).unwrap();
        let far = mev_tax(&ContestParams::unit_costs(1.0, 1e6, r).unwrap()).unwrap();
        let gap = |t: &semev_core::economics::MevTaxPoint| (t.asymptote_gap / t.tax_over_v).abs();
        // The sign of the gap can flip for large r, so only the envelope shrinks.
        prop_assert!(gap(&far) <= gap(&near).max(1e-6));
        prop_assert!(gap(&near) <= 0.01);
    }
}
