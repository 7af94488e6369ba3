//! Worst-case reward of a fixed policy under LDST budgeted uncertainty.
//!
//! Reward uncertainty is solved exactly by a greedy adversary: flipping
//! terminal t costs the policy p(t)(r(t) - r'(t)) regardless of which other
//! terminals are flipped, so the losses are additive and the k largest are
//! the worst choice. Transition uncertainty is NP-hard to evaluate and is
//! enumerated exhaustively under a scenario cap.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{DeterministicPolicy, IndexedMdp, MdpInstance, UncertaintyKind, NO_ACTION};
use crate::scalar::Scalar;

pub const DEFAULT_SCENARIO_CAP: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deviation {
    pub state: String,
    pub action: String,
    /// Index into the action's list of alternative distributions.
    pub alternative: usize,
}

/// One choice of the adversary.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Scenario {
    Reward { flipped: BTreeSet<String> },
    Transition { deviations: Vec<Deviation> },
}

impl Scenario {
    pub fn len(&self) -> usize {
        match self {
            Scenario::Reward { flipped } => flipped.len(),
            Scenario::Transition { deviations } => deviations.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct RobustReport<F> {
    pub nominal: F,
    pub worst_case: F,
    pub loss: F,
    pub witness: Scenario,
}

/// Index-based witness: flipped terminals, or (state, alternative) pairs
/// deviating the played action of `state`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum IndexedScenario {
    Reward(Vec<usize>),
    Transition(Vec<(usize, usize)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct IndexedReport<F> {
    pub nominal: F,
    pub worst_case: F,
    pub witness: IndexedScenario,
}

impl<F: Scalar> IndexedReport<F> {
    pub fn loss(&self) -> F {
        self.nominal - self.worst_case
    }

    pub fn to_report(&self, mdp: &IndexedMdp<F>, choice: &[usize]) -> RobustReport<F> {
        let witness = match &self.witness {
            IndexedScenario::Reward(ts) => Scenario::Reward {
                flipped: ts.iter().map(|&t| mdp.id(t).to_string()).collect(),
            },
            IndexedScenario::Transition(devs) => Scenario::Transition {
                deviations: devs
                    .iter()
                    .map(|&(s, alt)| Deviation {
                        state: mdp.id(s).to_string(),
                        action: mdp.actions(s)[choice[s]].name.clone(),
                        alternative: alt,
                    })
                    .collect(),
            },
        };
        RobustReport {
            nominal: self.nominal,
            worst_case: self.worst_case,
            loss: self.loss(),
            witness,
        }
    }
}

/// Greedy exact adversary for reward uncertainty.
pub fn reward_worst_case<F: Scalar>(mdp: &IndexedMdp<F>, choice: &[usize]) -> Result<IndexedReport<F>> {
    if mdp.kind() != UncertaintyKind::Reward {
        return Err(Error::WrongKind { expected: "reward" });
    }
    let mass = mdp.arrival(choice);
    let nominal = mdp.value_of_mass(&mass);
    let mut losses: Vec<(usize, F)> = mdp
        .terminals()
        .iter()
        .filter(|&&t| mdp.reward_can_deviate(t))
        .map(|&t| (t, mass[t] * (mdp.reward(t) - mdp.alternative_reward(t))))
        .collect();
    // stable: equal losses keep identifier order
    losses.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("finite losses"));
    losses.truncate(mdp.budget());
    let total: F = losses.iter().map(|&(_, l)| l).sum();
    let mut flipped: Vec<usize> = losses.into_iter().map(|(t, _)| t).collect();
    flipped.sort_by(|&a, &b| mdp.id(a).cmp(mdp.id(b)));
    Ok(IndexedReport {
        nominal,
        worst_case: nominal - total,
        witness: IndexedScenario::Reward(flipped),
    })
}

/// Number of scenarios with at most `k` deviations when site i has
/// `counts[i]` alternatives, saturating.
pub fn scenario_count(counts: &[usize], k: usize) -> u128 {
    // e[j] = sum over j-subsets of the product of their counts
    let mut e = vec![0u128; k + 1];
    e[0] = 1;
    for &c in counts {
        for j in (1..=k).rev() {
            e[j] = e[j].saturating_add(e[j - 1].saturating_mul(c as u128));
        }
    }
    e.iter().fold(0u128, |a, &b| a.saturating_add(b))
}

/// Advances `c` to the next j-subset of 0..m in colexicographic order.
fn next_colex(c: &mut [usize], m: usize) -> bool {
    let j = c.len();
    for i in 0..j {
        let limit = if i + 1 < j { c[i + 1] } else { m };
        if c[i] + 1 < limit {
            c[i] += 1;
            for (q, x) in c[..i].iter_mut().enumerate() {
                *x = q;
            }
            return true;
        }
    }
    false
}

/// Exhaustive adversary for transition uncertainty.
///
/// Only sites (s, pi(s)) can change the outcome, so the enumeration runs
/// over the played actions that have alternatives and whose state some
/// scenario can reach, sorted by state id;
/// subsets by size then in colexicographic order, alternative indices as an
/// odometer in list order with the first site most significant. The first
/// minimizer is the witness.
pub fn transition_worst_case<F: Scalar>(
    mdp: &IndexedMdp<F>,
    choice: &[usize],
    cap: u128,
) -> Result<IndexedReport<F>> {
    if mdp.kind() != UncertaintyKind::Transition {
        return Err(Error::WrongKind {
            expected: "transition",
        });
    }
    let mut reachable = vec![false; mdp.len()];
    reachable[mdp.initial()] = true;
    for &s in mdp.decision_states() {
        if !reachable[s] {
            continue;
        }
        let action = &mdp.actions(s)[choice[s]];
        for &(t, p) in action.nominal.iter().chain(action.alternatives.iter().flatten()) {
            if p > F::zero() {
                reachable[t] = true;
            }
        }
    }
    let mut sites: Vec<usize> = mdp
        .decision_states()
        .iter()
        .copied()
        .filter(|&s| reachable[s] && !mdp.actions(s)[choice[s]].alternatives.is_empty())
        .collect();
    sites.sort_by(|&a, &b| mdp.id(a).cmp(mdp.id(b)));
    let counts: Vec<usize> = sites
        .iter()
        .map(|&s| mdp.actions(s)[choice[s]].alternatives.len())
        .collect();
    let k = mdp.budget().min(sites.len());
    let total = scenario_count(&counts, k);
    if total > cap {
        return Err(Error::CapExceeded {
            what: "scenario",
            count: total,
            cap,
        });
    }

    let mut mass = Vec::new();
    mdp.arrival_into(choice, None, &mut mass);
    let nominal = mdp.value_of_mass(&mass);
    let mut best = (nominal, Vec::new());
    let mut overrides = vec![NO_ACTION; mdp.len()];
    for j in 1..=k {
        let mut subset: Vec<usize> = (0..j).collect();
        loop {
            let mut alts = vec![0usize; j];
            loop {
                for (&i, &alt) in subset.iter().zip(&alts) {
                    overrides[sites[i]] = alt;
                }
                mdp.arrival_into(choice, Some(&overrides), &mut mass);
                let v = mdp.value_of_mass(&mass);
                if v < best.0 {
                    best = (v, subset.iter().zip(&alts).map(|(&i, &a)| (sites[i], a)).collect());
                }
                // odometer, last position fastest
                let mut pos = j;
                while pos > 0 {
                    pos -= 1;
                    alts[pos] += 1;
                    if alts[pos] < counts[subset[pos]] {
                        break;
                    }
                    alts[pos] = 0;
                    if pos == 0 {
                        pos = usize::MAX;
                        break;
                    }
                }
                if pos == usize::MAX {
                    break;
                }
            }
            for &i in &subset {
                overrides[sites[i]] = NO_ACTION;
            }
            if !next_colex(&mut subset, sites.len()) {
                break;
            }
        }
    }
    Ok(IndexedReport {
        nominal,
        worst_case: best.0,
        witness: IndexedScenario::Transition(best.1),
    })
}

/// Worst case under the instance's own uncertainty kind.
pub fn worst_case_indexed<F: Scalar>(
    mdp: &IndexedMdp<F>,
    choice: &[usize],
    cap: u128,
) -> Result<IndexedReport<F>> {
    match mdp.kind() {
        UncertaintyKind::Reward => reward_worst_case(mdp, choice),
        UncertaintyKind::Transition => transition_worst_case(mdp, choice, cap),
    }
}

pub fn worst_case_reward_uncertainty<F: Scalar>(
    instance: &MdpInstance<F>,
    policy: &DeterministicPolicy,
) -> Result<RobustReport<F>> {
    let mdp = instance.index()?;
    let choice = mdp.choice_of(policy)?;
    Ok(reward_worst_case(&mdp, &choice)?.to_report(&mdp, &choice))
}

pub fn worst_case_transition_uncertainty<F: Scalar>(
    instance: &MdpInstance<F>,
    policy: &DeterministicPolicy,
) -> Result<RobustReport<F>> {
    worst_case_transition_uncertainty_with_cap(instance, policy, DEFAULT_SCENARIO_CAP)
}

pub fn worst_case_transition_uncertainty_with_cap<F: Scalar>(
    instance: &MdpInstance<F>,
    policy: &DeterministicPolicy,
    cap: u128,
) -> Result<RobustReport<F>> {
    let mdp = instance.index()?;
    let choice = mdp.choice_of(policy)?;
    Ok(transition_worst_case(&mdp, &choice, cap)?.to_report(&mdp, &choice))
}

/// Dispatches on the uncertainty kind.
pub fn worst_case<F: Scalar>(
    instance: &MdpInstance<F>,
    policy: &DeterministicPolicy,
) -> Result<RobustReport<F>> {
    let mdp = instance.index()?;
    let choice = mdp.choice_of(policy)?;
    Ok(worst_case_indexed(&mdp, &choice, DEFAULT_SCENARIO_CAP)?.to_report(&mdp, &choice))
}

/// L(pi) = R(pi) - R^(pi).
pub fn loss<F: Scalar>(instance: &MdpInstance<F>, policy: &DeterministicPolicy) -> Result<F> {
    Ok(worst_case(instance, policy)?.loss)
}

/// Expected reward of `policy` when the adversary plays `scenario`.
pub fn evaluate_scenario<F: Scalar>(
    instance: &MdpInstance<F>,
    policy: &DeterministicPolicy,
    scenario: &Scenario,
) -> Result<F> {
    let mdp = instance.index()?;
    let choice = mdp.choice_of(policy)?;
    if scenario.len() > mdp.budget() {
        return Err(Error::InvalidScenario(format!(
            "{} deviations exceed budget {}",
            scenario.len(),
            mdp.budget()
        )));
    }
    match (scenario, mdp.kind()) {
        (Scenario::Reward { flipped }, UncertaintyKind::Reward) => {
            let mut idx = Vec::new();
            for id in flipped {
                match mdp.index_of(id) {
                    Some(t) if mdp.terminals().contains(&t) && mdp.reward_can_deviate(t) => idx.push(t),
                    _ => {
                        return Err(Error::InvalidScenario(format!(
                            "`{id}` is not a deviation-capable terminal"
                        )))
                    }
                }
            }
            let mass = mdp.arrival(&choice);
            Ok(mdp
                .terminals()
                .iter()
                .map(|&t| {
                    let r = if idx.contains(&t) {
                        mdp.alternative_reward(t)
                    } else {
                        mdp.reward(t)
                    };
                    mass[t] * r
                })
                .sum())
        }
        (Scenario::Transition { deviations }, UncertaintyKind::Transition) => {
            let mut overrides = vec![NO_ACTION; mdp.len()];
            let mut seen = BTreeSet::new();
            for d in deviations {
                let s = mdp
                    .index_of(&d.state)
                    .ok_or_else(|| Error::InvalidScenario(format!("unknown state `{}`", d.state)))?;
                let a = mdp
                    .actions(s)
                    .iter()
                    .position(|x| x.name == d.action)
                    .ok_or_else(|| Error::UnknownAction {
                        state: d.state.clone(),
                        action: d.action.clone(),
                    })?;
                if d.alternative >= mdp.actions(s)[a].alternatives.len() {
                    return Err(Error::InvalidScenario(format!(
                        "`{}`/`{}` has no alternative {}",
                        d.state, d.action, d.alternative
                    )));
                }
                if !seen.insert((s, a)) {
                    return Err(Error::InvalidScenario(format!(
                        "`{}`/`{}` deviates twice",
                        d.state, d.action
                    )));
                }
                if a == choice[s] {
                    overrides[s] = d.alternative;
                }
            }
            let mut mass = Vec::new();
            mdp.arrival_into(&choice, Some(&overrides), &mut mass);
            Ok(mdp.value_of_mass(&mass))
        }
        _ => Err(Error::InvalidScenario(
            "scenario kind does not match the instance".into(),
        )),
    }
}
