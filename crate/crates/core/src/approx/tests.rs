use super::*;
use crate::linprog::LpOutcome;
use crate::mdp::{MdpInstance, Uncertainty};
use crate::robust::worst_case;

fn reward_k1(horizon: usize) -> MdpInstance<f64> {
    MdpInstance::new(
        horizon,
        "s0",
        Uncertainty {
            kind: UncertaintyKind::Reward,
            budget: 1,
        },
    )
}

/// `two_terminals` with a pass-through middle state per action.
fn two_terminals_two_stage() -> MdpInstance<f64> {
    let mut m = reward_k1(2);
    m.add_state("s0", 0)
        .add_state("ma", 1)
        .add_state("mb", 1)
        .add_state("t1", 2)
        .add_state("t2", 2);
    m.add_action("s0", "a", [("ma", 1.0)])
        .add_action("s0", "b", [("mb", 1.0)])
        .add_action("ma", "go", [("t1", 1.0)])
        .add_action("mb", "go", [("t2", 1.0)]);
    m.add_reward("t1", 1.0, Some(0.0)).add_reward("t2", 1.0, Some(0.0));
    m
}

fn hand_coeffs(v: Vec<Vec<Vec<f64>>>) -> RewardCoefficients<f64> {
    let n_t = v[0][0].len();
    RewardCoefficients {
        initial: "s0".into(),
        initial_action: "a0".into(),
        middle: (0..v.len()).map(|s| format!("s{}", s + 1)).collect(),
        actions: v
            .iter()
            .map(|acts| (0..acts.len()).map(|a| format!("a{}", a + 1)).collect())
            .collect(),
        terminals: (0..n_t).map(|t| format!("t{}", t + 1)).collect(),
        capable: vec![true; n_t],
        rewards: vec![1.0; n_t],
        v,
    }
}

#[test]
fn two_terminals_coefficients_after_fixing_a() {
    let fixed = fix_initial_action(&two_terminals_two_stage(), "a").unwrap();
    let c = reward_coefficients(&fixed).unwrap();
    assert_eq!(c.middle, vec!["ma", "mb"]);
    assert_eq!(c.v[0][0], vec![1.0, 0.0]);
    assert_eq!(c.v[1][0], vec![0.0, 0.0]);
}

#[test]
fn ub1_without_cover_is_groupwise_max() {
    let c = hand_coeffs(vec![
        vec![vec![0.2, 0.1, 0.0], vec![0.0, 0.05, 0.2]],
        vec![vec![0.1, 0.1, 0.1], vec![0.3, 0.0, 0.0]],
    ]);
    let x = solve_ub1(&c, 0.0, 0, 0.1).unwrap().unwrap();
    // s1: max(0.1, 0.25) ; s2: max(0.2, 0.0)
    assert!((x.objective - 0.45).abs() < 1e-12);
    assert_eq!(x.assignment, Assignment::Actions(vec![1, 0]));
}

#[test]
fn ub1_unreachable_cover_is_infeasible() {
    let c = hand_coeffs(vec![vec![vec![0.2, 0.1], vec![0.3, 0.0]]]);
    assert!(solve_ub1(&c, 0.31, 0, 0.1).unwrap().is_none());
    let x = solve_ub1(&c, 0.3, 0, 0.1).unwrap().unwrap();
    assert_eq!(x.assignment, Assignment::Actions(vec![1]));
}

#[test]
fn ub1_policy_names_actions() {
    let c = hand_coeffs(vec![vec![vec![0.2, 0.1], vec![0.3, 0.0]]]);
    let x = solve_ub1(&c, 0.0, 0, 0.1).unwrap().unwrap();
    let pi = policy_from_ub1(&x, &c).unwrap();
    assert_eq!(pi.action("s0"), Some("a0"));
    assert_eq!(pi.action("s1"), Some("a1"));
    let not_integral = AssignmentSolution {
        assignment: Assignment::Targets(vec![0]),
        ..x
    };
    assert!(matches!(policy_from_ub1(&not_integral, &c), Err(Error::NonIntegral(_))));
}

#[test]
fn ub2_deletes_columns_that_cannot_fit() {
    let c = hand_coeffs(vec![vec![vec![2.0]]]);
    let lp = build_ub2(&c, 1.0).unwrap();
    assert!(lp.fixed_zero.contains(&0));
    assert!(!lp.fixed_zero.contains(&1));
}

#[test]
fn ub2_two_terminals_optimum_is_one() {
    let fixed = fix_initial_action(&two_terminals_two_stage(), "a").unwrap();
    let c = reward_coefficients(&fixed).unwrap();
    let lp = build_ub2(&c, 1.0).unwrap();
    match crate::linprog::solve_extreme_point(&lp).unwrap() {
        LpOutcome::Optimal(s) => assert!((s.value - 1.0).abs() < 1e-9),
        other => panic!("{other:?}"),
    }
}

#[test]
fn ub2_keeps_a_fitting_action_when_another_is_too_heavy() {
    // a: 0.6 on t1 and 0.1 elsewhere; b: everything on t1. With L = 0.6 the
    // policy playing a is feasible, so the bound R/2 = 0.5 must hold.
    let c = hand_coeffs(vec![vec![
        vec![0.6, 0.1, 0.1, 0.1, 0.1],
        vec![1.0, 0.0, 0.0, 0.0, 0.0],
    ]]);
    let y = solve_ub2(&c, 0.6).unwrap();
    assert!(y.objective >= 0.5 - 1e-9, "{}", y.objective);
}

fn fractional(y: Vec<Vec<f64>>, basis: Vec<(usize, usize)>, rows: usize, l: f64) -> AssignmentSolution<f64> {
    AssignmentSolution {
        assignment: Assignment::Fractional { y, basis, rows },
        objective: 0.0,
        l,
        t_hat: None,
        capacity: l,
    }
}

#[test]
fn rounding_keeps_integral_solutions() {
    let c = hand_coeffs(vec![vec![vec![3.0, 0.0], vec![0.0, 1.0]]]);
    let y = fractional(vec![vec![0.0, 1.0, 0.0]], vec![(0, 1)], 3, 3.0);
    let r = round_ub2(&y, &c).unwrap();
    assert_eq!(r.assignment, Assignment::Targets(vec![1]));
    let y = fractional(vec![vec![0.0, 0.0, 1.0]], vec![(0, 2)], 3, 3.0);
    assert_eq!(round_ub2(&y, &c).unwrap().assignment, Assignment::Targets(vec![2]));
}

#[test]
fn rounding_prefers_the_heavier_half() {
    let c = hand_coeffs(vec![vec![vec![3.0, 0.0], vec![0.0, 1.0]]]);
    let y = fractional(vec![vec![0.5, 0.5, 0.0]], vec![(0, 0), (0, 1)], 3, 3.0);
    let r = round_ub2(&y, &c).unwrap();
    assert_eq!(r.assignment, Assignment::Targets(vec![0]));
    assert_eq!(r.objective, 3.0);
    assert_eq!(r.capacity, 6.0);
    assert!(terminal_loads(&c, &[0], 3.0)[0] <= 6.0);
}

#[test]
fn rounding_rejects_non_vertices() {
    let c = hand_coeffs(vec![vec![vec![3.0, 0.0], vec![0.0, 1.0]]]);
    let y = fractional(vec![vec![0.5, 0.5, 0.0]], vec![(0, 0)], 3, 3.0);
    assert!(matches!(round_ub2(&y, &c), Err(Error::NotExtremePoint(_))));
    let y = fractional(vec![vec![0.4, 0.3, 0.3]], vec![(0, 0), (0, 1), (0, 2)], 2, 3.0);
    assert!(matches!(round_ub2(&y, &c), Err(Error::NotExtremePoint(_))));
}

#[test]
fn sink_assignment_picks_the_spread_action() {
    // a spreads (0.3 each on three terminals), b concentrates (0.8 on one)
    let c = hand_coeffs(vec![vec![vec![0.3, 0.3, 0.3], vec![0.8, 0.0, 0.0]]]);
    let sol = AssignmentSolution {
        assignment: Assignment::Targets(vec![3]),
        objective: 0.6,
        l: 1.0,
        t_hat: None,
        capacity: 2.0,
    };
    assert_eq!(policy_from_ub2(&sol, &c).unwrap().action("s1"), Some("a1"));
}

#[test]
fn single_action_states_force_the_policy() {
    let c = hand_coeffs(vec![vec![vec![0.5, 0.5]], vec![vec![1.0, 0.0]]]);
    for target in [vec![0, 0], vec![2, 2], vec![1, 2]] {
        let sol = AssignmentSolution {
            assignment: Assignment::Targets(target),
            objective: 0.0,
            l: 1.0,
            t_hat: None,
            capacity: 2.0,
        };
        let pi = policy_from_ub2(&sol, &c).unwrap();
        assert_eq!(pi.action("s1"), Some("a1"));
        assert_eq!(pi.action("s2"), Some("a1"));
    }
}

#[test]
fn algorithm1_single_middle_state_is_zero() {
    let mut m = reward_k1(2);
    m.add_state("s0", 0).add_state("s", 1).add_state("t1", 2).add_state("t2", 2);
    m.add_action("s0", "a0", [("s", 1.0)]);
    m.add_action("s", "a", [("t1", 1.0)]).add_action("s", "b", [("t2", 1.0)]);
    m.add_reward("t1", 1.0, Some(0.0)).add_reward("t2", 1.0, Some(0.0));
    assert_eq!(algorithm1(&m, 0.1).unwrap().1, 0.0);
}

#[test]
fn algorithm2_two_halves() {
    let mut m = reward_k1(2);
    m.add_state("s0", 0)
        .add_state("s1", 1)
        .add_state("s2", 1)
        .add_state("t1", 2)
        .add_state("t2", 2);
    m.add_action("s0", "a0", [("s1", 0.5), ("s2", 0.5)]);
    m.add_action("s1", "go", [("t1", 1.0)]).add_action("s2", "go", [("t2", 1.0)]);
    m.add_reward("t1", 1.0, Some(0.0)).add_reward("t2", 1.0, Some(0.0));
    let (pi, v) = algorithm2(&m, 0.1).unwrap();
    assert!((v - 0.5).abs() < 1e-12);
    assert!((worst_case(&m, &pi).unwrap().worst_case - 0.5).abs() < 1e-12);
}

#[test]
fn algorithm2_without_rewards_has_no_candidate() {
    let mut c = hand_coeffs(vec![vec![vec![0.0, 0.0]]]);
    c.rewards = vec![0.0, 0.0];
    let grid = GuessGrid::new(&c, 0.1).unwrap();
    assert_eq!(grid.values, vec![0.0]);
    assert_eq!(grid.positive().count(), 0);
}

#[test]
fn approximate_two_terminals_is_zero() {
    let (pi, v, report) = approximate(&two_terminals_two_stage(), 0.5).unwrap();
    assert_eq!(v, 0.0);
    assert_eq!(pi.action("s0"), Some("a"));
    assert_eq!(report.chosen, "alg1");
    let json = serde_json::to_value(&report).unwrap();
    for key in ["epsilon", "epsilon1", "epsilon2", "grid_size", "alg1", "alg2", "chosen"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    assert!(json["alg1"].get("t_hat").is_some());
    assert!(json["alg2"].get("L").is_some());
}

#[test]
fn approximate_single_terminal_is_zero() {
    let mut m = reward_k1(2);
    m.add_state("s0", 0).add_state("s", 1).add_state("t", 2);
    m.add_action("s0", "a0", [("s", 1.0)]);
    m.add_action("s", "x", [("t", 1.0)]).add_action("s", "y", [("t", 1.0)]);
    m.add_reward("t", 2.0, Some(0.5));
    let (_, v, _) = approximate(&m, 0.5).unwrap();
    assert!((v - 0.5).abs() < 1e-12);
    m.rewards[0].alternative = Some(0.0);
    assert_eq!(approximate(&m, 0.5).unwrap().1, 0.0);
}

#[test]
fn approximate_rejects_other_shapes() {
    let mut m = two_terminals_two_stage();
    m.uncertainty.budget = 2;
    assert!(matches!(approximate(&m, 0.5), Err(Error::UnsupportedShape(_))));
    assert!(matches!(
        approximate(&crate::mdp::fixtures::two_terminals(), 0.5),
        Err(Error::UnsupportedShape(_))
    ));
}

#[test]
fn epsilon_split() {
    let (e1, e2) = split_epsilon(0.5f64);
    assert!((e1 - 0.1).abs() < 1e-15);
    assert!((e2 - 0.5 / 11.0).abs() < 1e-15);
}

#[test]
fn grid_is_increasing_and_covers_rewards() {
    let c = hand_coeffs(vec![vec![vec![0.2, 0.1], vec![0.3, 0.0]]]);
    let g = GuessGrid::new(&c, 0.5).unwrap();
    assert!(g.values.windows(2).all(|w| w[0] < w[1]));
    assert!(*g.values.last().unwrap() >= 1.0);
    assert!(g.values[1] <= 0.1);
}
