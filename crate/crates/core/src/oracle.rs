//! Brute-force optimal policies: enumerate every deterministic policy and
//! evaluate each with the exact adversary.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mdp::{DeterministicPolicy, IndexedMdp, MdpInstance, NO_ACTION};
use crate::robust::{worst_case_indexed, DEFAULT_SCENARIO_CAP};
use crate::scalar::Scalar;

pub const DEFAULT_POLICY_CAP: u128 = 1_000_000;

fn check_cap<F: Scalar>(mdp: &IndexedMdp<F>, cap: u128) -> Result<u128> {
    let count = mdp.policy_count();
    if count > cap {
        return Err(Error::CapExceeded {
            what: "policy",
            count,
            cap,
        });
    }
    Ok(count)
}

/// Writes the `index`-th policy of the enumeration order into `choice`.
///
/// Decision states are ordered by (stage, id) with the first one most
/// significant; actions by name.
pub fn decode_policy<F: Scalar>(mdp: &IndexedMdp<F>, mut index: u128, choice: &mut Vec<usize>) {
    choice.clear();
    choice.resize(mdp.len(), NO_ACTION);
    for &s in mdp.decision_states().iter().rev() {
        let n = mdp.actions(s).len() as u128;
        choice[s] = (index % n) as usize;
        index /= n;
    }
}

/// Streaming enumeration of all deterministic policies.
pub struct PolicyEnumerator<F> {
    mdp: IndexedMdp<F>,
    next: u128,
    total: u128,
}

impl<F: Scalar> PolicyEnumerator<F> {
    pub fn total(&self) -> u128 {
        self.total
    }

    pub fn mdp(&self) -> &IndexedMdp<F> {
        &self.mdp
    }
}

impl<F: Scalar> Iterator for PolicyEnumerator<F> {
    type Item = DeterministicPolicy;

    fn next(&mut self) -> Option<DeterministicPolicy> {
        if self.next >= self.total {
            return None;
        }
        let mut choice = Vec::new();
        decode_policy(&self.mdp, self.next, &mut choice);
        self.next += 1;
        Some(self.mdp.policy_of(&choice))
    }
}

pub fn enumerate_policies<F: Scalar>(instance: &MdpInstance<F>) -> Result<PolicyEnumerator<F>> {
    enumerate_policies_with_cap(instance, DEFAULT_POLICY_CAP)
}

pub fn enumerate_policies_with_cap<F: Scalar>(
    instance: &MdpInstance<F>,
    cap: u128,
) -> Result<PolicyEnumerator<F>> {
    let mdp = instance.index()?;
    let total = check_cap(&mdp, cap)?;
    Ok(PolicyEnumerator {
        mdp,
        next: 0,
        total,
    })
}

/// Best policy found by exhaustive search.
#[derive(Clone, Debug, PartialEq)]
pub struct Optimum<F> {
    pub choice: Vec<usize>,
    /// Position of `choice` in the enumeration order.
    pub index: u128,
    pub worst_case: F,
    pub policies: u128,
}

/// Maximizes the worst-case reward over all policies; ties go to the
/// earliest policy in enumeration order.
pub fn exact_optimum_indexed<F: Scalar>(
    mdp: &IndexedMdp<F>,
    policy_cap: u128,
    scenario_cap: u128,
) -> Result<Optimum<F>> {
    let total = check_cap(mdp, policy_cap)?;
    let total64 = u64::try_from(total).map_err(|_| Error::CapExceeded {
        what: "policy",
        count: total,
        cap: u64::MAX as u128,
    })?;
    let best = (0..total64)
        .into_par_iter()
        .map_init(Vec::new, |choice, i| -> Result<(F, u64)> {
            decode_policy(mdp, i as u128, choice);
            Ok((worst_case_indexed(mdp, choice, scenario_cap)?.worst_case, i))
        })
        .try_reduce_with(|a, b| {
            let better_b = b.0 > a.0 || (b.0 == a.0 && b.1 < a.1);
            Ok(if better_b { b } else { a })
        })
        .expect("at least one policy")?;
    let mut choice = Vec::new();
    decode_policy(mdp, best.1 as u128, &mut choice);
    Ok(Optimum {
        choice,
        index: best.1 as u128,
        worst_case: best.0,
        policies: total,
    })
}

/// Optimal deterministic policy and its worst-case reward R^*.
pub fn exact_optimum<F: Scalar>(instance: &MdpInstance<F>) -> Result<(DeterministicPolicy, F)> {
    exact_optimum_with_caps(instance, DEFAULT_POLICY_CAP, DEFAULT_SCENARIO_CAP)
}

pub fn exact_optimum_with_caps<F: Scalar>(
    instance: &MdpInstance<F>,
    policy_cap: u128,
    scenario_cap: u128,
) -> Result<(DeterministicPolicy, F)> {
    let mdp = instance.index()?;
    let opt = exact_optimum_indexed(&mdp, policy_cap, scenario_cap)?;
    Ok((mdp.policy_of(&opt.choice), opt.worst_case))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::fixtures::two_terminals;
    use crate::mdp::nominal_optimal_policy;
    use std::collections::HashSet;

    #[test]
    fn two_terminals_has_two_policies_and_optimum_zero() {
        let all: Vec<_> = enumerate_policies(&two_terminals()).unwrap().collect();
        assert_eq!(all.len(), 2);
        assert_eq!(all[0].action("s0"), Some("a"));
        let (pi, v) = exact_optimum(&two_terminals()).unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(pi.action("s0"), Some("a"));
    }

    #[test]
    fn zero_budget_matches_nominal_optimum() {
        let mut m = two_terminals();
        m.uncertainty.budget = 0;
        let (_, v) = exact_optimum(&m).unwrap();
        assert_eq!(v, nominal_optimal_policy(&m).unwrap().1);
    }

    #[test]
    fn enumeration_is_duplicate_free() {
        let mut m = two_terminals();
        m.add_action("s0", "c", [("t1", 0.5), ("t2", 0.5)]);
        let all: Vec<_> = enumerate_policies(&m).unwrap().collect();
        let set: HashSet<_> = all.iter().cloned().collect();
        assert_eq!(all.len(), 3);
        assert_eq!(set.len(), 3);
    }

    #[test]
    fn policy_cap_is_an_error() {
        assert!(matches!(
            enumerate_policies_with_cap(&two_terminals(), 1),
            Err(Error::CapExceeded { .. })
        ));
    }
}
