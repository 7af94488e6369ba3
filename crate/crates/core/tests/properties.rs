mod common;

use common::*;
use ldst::mdp::{
    lift_action_rewards, nominal_optimal_policy, normalize_alternative_rewards, reach_probabilities, validate,
    ActionRewardDecl, MdpInstance, Uncertainty, UncertaintyKind,
};
use ldst::oracle::exact_optimum;
use ldst::robust::{evaluate_scenario, worst_case};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn weights(rng: &mut ChaCha8Rng, targets: &[String]) -> Vec<(String, f64)> {
    let w: Vec<u32> = loop {
        let w: Vec<u32> = targets.iter().map(|_| rng.gen_range(0..4)).collect();
        if w.iter().any(|&x| x > 0) {
            break w;
        }
    };
    let total: u32 = w.iter().sum();
    targets
        .iter()
        .zip(w)
        .filter(|(_, x)| *x > 0)
        .map(|(t, x)| (t.clone(), x as f64 / total as f64))
        .collect()
}

/// Small staged instance: `horizon` stages of up to `width` states, both
/// uncertainty kinds, budget clamped to the number of sites.
fn instance(seed: u64, horizon: usize, width: usize, transition: bool, budget: usize) -> MdpInstance<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kind = if transition {
        UncertaintyKind::Transition
    } else {
        UncertaintyKind::Reward
    };
    let mut m = MdpInstance::new(horizon, "s0", Uncertainty { kind, budget: 0 });
    let mut layers = vec![vec!["s0".to_string()]];
    m.add_state("s0", 0);
    for stage in 1..=horizon {
        let n = rng.gen_range(1..=width);
        let layer: Vec<String> = (0..n).map(|i| format!("x{stage}_{i}")).collect();
        for id in &layer {
            m.add_state(id.clone(), stage);
        }
        layers.push(layer);
    }
    let mut sites = 0;
    for stage in 0..horizon {
        for s in &layers[stage] {
            for a in 0..rng.gen_range(1..=3) {
                let nominal = weights(&mut rng, &layers[stage + 1]);
                let name = format!("a{a}");
                m.add_action(s, &name, nominal.iter().map(|(t, p)| (t.as_str(), *p)));
                if transition {
                    let count = rng.gen_range(0..=2);
                    if count > 0 {
                        sites += 1;
                    }
                    for _ in 0..count {
                        let alt = weights(&mut rng, &layers[stage + 1]).into_iter().collect();
                        m.actions.last_mut().unwrap().alternatives.push(alt);
                    }
                }
            }
        }
    }
    for t in &layers[horizon] {
        let r = rng.gen_range(0..=8) as f64;
        let alt = if transition || rng.gen_bool(0.3) {
            None
        } else {
            Some(r * rng.gen_range(0..=3) as f64 / 4.0)
        };
        if alt.is_some_and(|a| a < r) {
            sites += 1;
        }
        m.add_reward(t, r, alt);
    }
    m.uncertainty.budget = budget.min(sites);
    m
}

fn instances() -> impl Strategy<Value = MdpInstance<f64>> {
    (any::<u64>(), 1usize..=3, 1usize..=3, any::<bool>(), 0usize..=3)
        .prop_map(|(seed, h, w, t, k)| instance(seed, h, w, t, k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn generated_instances_are_valid(m in instances()) {
        prop_assert!(validate(&m).is_empty(), "{:?}", validate(&m));
    }

    #[test]
    fn arrival_mass_is_one(m in instances()) {
        for pi in all_policies(&m) {
            let report = reach_probabilities(&m, &pi).unwrap();
            let mass: f64 = report.arrival.values().sum();
            prop_assert!((mass - 1.0).abs() < 1e-9, "mass {}", mass);
            let total: f64 = report.expected.values().sum();
            prop_assert!((total - report.nominal).abs() < 1e-9);
        }
    }

    #[test]
    fn nominal_optimum_dominates(m in instances()) {
        let (best_pi, best) = nominal_optimal_policy(&m).unwrap();
        prop_assert!((nominal(&m, &best_pi) - best).abs() < 1e-9);
        for pi in all_policies(&m) {
            prop_assert!(nominal(&m, &pi) <= best + 1e-9);
        }
    }

    #[test]
    fn adversary_matches_brute_force(m in instances()) {
        for pi in all_policies(&m) {
            let report = worst_case(&m, &pi).unwrap();
            prop_assert!((report.nominal - nominal(&m, &pi)).abs() < 1e-9);
            prop_assert!((report.worst_case - worst(&m, &pi)).abs() < 1e-9,
                "library {} vs brute force {}", report.worst_case, worst(&m, &pi));
            prop_assert!((report.loss - (report.nominal - report.worst_case)).abs() < 1e-12);
        }
    }

    #[test]
    fn witness_attains_the_worst_case(m in instances()) {
        for pi in all_policies(&m) {
            let report = worst_case(&m, &pi).unwrap();
            prop_assert!(report.witness.len() <= m.uncertainty.budget);
            let v = evaluate_scenario(&m, &pi, &report.witness).unwrap();
            prop_assert!((v - report.worst_case).abs() < 1e-9);
        }
    }

    #[test]
    fn larger_budget_never_helps(m in instances()) {
        let mut bigger = m.clone();
        bigger.uncertainty.budget += 1;
        prop_assume!(validate(&bigger).is_empty());
        for pi in all_policies(&m) {
            let small = worst_case(&m, &pi).unwrap().worst_case;
            let large = worst_case(&bigger, &pi).unwrap().worst_case;
            prop_assert!(large <= small + 1e-12);
            prop_assert!(small <= nominal(&m, &pi) + 1e-12);
        }
    }

    #[test]
    fn exact_optimum_is_attained_and_maximal(m in instances()) {
        let (pi, value) = exact_optimum(&m).unwrap();
        prop_assert!((worst(&m, &pi) - value).abs() < 1e-9);
        prop_assert!((optimum(&m) - value).abs() < 1e-9);
    }

    #[test]
    fn normalization_preserves_values(m in instances()) {
        prop_assume!(m.uncertainty.kind == UncertaintyKind::Reward);
        let norm = normalize_alternative_rewards(&m).unwrap();
        for r in &norm.rewards {
            prop_assert!(r.alternative.is_none_or(|a| a == 0.0 || a == r.nominal));
        }
        for pi in all_policies(&m) {
            prop_assert!((nominal(&norm, &pi) - nominal(&m, &pi)).abs() < 1e-9);
            let (after, before) = (worst(&norm, &pi), worst(&m, &pi));
            if m.uncertainty.budget <= 1 {
                prop_assert!((after - before).abs() < 1e-9);
            } else {
                // the split terminals give a larger budget more places to spend
                prop_assert!(after <= before + 1e-9);
            }
        }
    }

    #[test]
    fn lifting_preserves_values(m in instances(), reward in 0.0f64..5.0) {
        prop_assume!(m.horizon == 2);
        let mut with = m.clone();
        with.action_rewards.push(ActionRewardDecl { state: "s0".into(), action: "a0".into(), reward });
        let lifted = lift_action_rewards(&with, 0.5).unwrap();
        prop_assert!(lifted.action_rewards.is_empty());
        let (_, lifted_opt) = exact_optimum(&lifted).unwrap();
        prop_assert!((lifted_opt - optimum(&with)).abs() < 1e-9);
    }
}

#[test]
fn single_precision_matches_double() {
    for seed in 0..20 {
        let m = instance(seed, 2, 3, seed % 2 == 0, 1);
        let json = serde_json::to_string(&m).unwrap();
        let single: MdpInstance<f32> = serde_json::from_str(&json).unwrap();
        assert!(validate(&single).is_empty(), "{:?}", validate(&single));
        let (pi, v32) = exact_optimum(&single).unwrap();
        let (_, v64) = exact_optimum(&m).unwrap();
        assert!((v32 as f64 - v64).abs() < 1e-4 * (1.0 + v64), "{v32} vs {v64}");
        let report = worst_case(&single, &pi).unwrap();
        assert!((report.worst_case as f64 - worst(&m, &pi)).abs() < 1e-4 * (1.0 + v64));
    }
}
