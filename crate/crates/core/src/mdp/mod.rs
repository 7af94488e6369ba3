//! Finite-horizon MDP instances, policies and nominal dynamics.
//!
//! [`MdpInstance`] is the string-keyed, serializable form that mirrors the
//! instance file. It may hold invalid data; [`validate`] lists every problem.
//! Solvers work on [`IndexedMdp`], the checked index-based form.

mod model;
mod transform;
mod validate;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::Scalar;

pub use model::{IndexedMdp, IndexedAction, NO_ACTION};
pub use transform::{
    fix_initial_action, lift_action_rewards, normalize_alternative_rewards,
    normalize_alternative_rewards_with_cap, DEFAULT_SPLIT_CAP,
};
pub use validate::{validate, Diagnostic, DiagnosticKind};

/// Probability distribution over next-stage states, keyed by state id.
pub type Distribution<F> = BTreeMap<String, F>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateDecl {
    pub id: String,
    pub stage: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ActionDecl<F> {
    pub state: String,
    pub name: String,
    pub nominal: Distribution<F>,
    /// Finite list of distributions the adversary may substitute
    /// (transition uncertainty only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alternatives: Vec<Distribution<F>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct RewardDecl<F> {
    pub state: String,
    pub nominal: F,
    /// Worst-case reward r'(t). Absent means the reward is certain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternative: Option<F>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct ActionRewardDecl<F> {
    pub state: String,
    pub action: String,
    pub reward: F,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UncertaintyKind {
    Reward,
    Transition,
}

impl UncertaintyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            UncertaintyKind::Reward => "reward",
            UncertaintyKind::Transition => "transition",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Uncertainty {
    pub kind: UncertaintyKind,
    pub budget: usize,
}

/// A staged MDP with terminal rewards and an LDST uncertainty budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct MdpInstance<F> {
    pub horizon: usize,
    pub states: Vec<StateDecl>,
    pub initial: String,
    pub actions: Vec<ActionDecl<F>>,
    pub rewards: Vec<RewardDecl<F>>,
    pub uncertainty: Uncertainty,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub action_rewards: Vec<ActionRewardDecl<F>>,
}

impl<F: Scalar> MdpInstance<F> {
    pub fn new(horizon: usize, initial: impl Into<String>, uncertainty: Uncertainty) -> Self {
        MdpInstance {
            horizon,
            states: Vec::new(),
            initial: initial.into(),
            actions: Vec::new(),
            rewards: Vec::new(),
            uncertainty,
            action_rewards: Vec::new(),
        }
    }

    pub fn add_state(&mut self, id: impl Into<String>, stage: usize) -> &mut Self {
        self.states.push(StateDecl {
            id: id.into(),
            stage,
        });
        self
    }

    pub fn add_action<I, S>(&mut self, state: &str, name: &str, nominal: I) -> &mut Self
    where
        I: IntoIterator<Item = (S, F)>,
        S: Into<String>,
    {
        self.actions.push(ActionDecl {
            state: state.to_string(),
            name: name.to_string(),
            nominal: nominal.into_iter().map(|(k, p)| (k.into(), p)).collect(),
            alternatives: Vec::new(),
        });
        self
    }

    /// Adds an uncertain-deterministic action: nominally to `to`, the
    /// adversary may redirect it to any state of `alternatives`.
    pub fn add_uncertain_action(
        &mut self,
        state: &str,
        name: &str,
        to: &str,
        alternatives: &[&str],
    ) -> &mut Self {
        self.actions.push(ActionDecl {
            state: state.to_string(),
            name: name.to_string(),
            nominal: point_mass(to),
            alternatives: alternatives.iter().map(|z| point_mass(z)).collect(),
        });
        self
    }

    pub fn add_reward(&mut self, state: &str, nominal: F, alternative: Option<F>) -> &mut Self {
        self.rewards.push(RewardDecl {
            state: state.to_string(),
            nominal,
            alternative,
        });
        self
    }

    pub fn stage_of(&self, id: &str) -> Option<usize> {
        self.states.iter().find(|s| s.id == id).map(|s| s.stage)
    }

    /// Ids of the stage-T states, in declaration order.
    pub fn terminals(&self) -> impl Iterator<Item = &str> {
        self.states
            .iter()
            .filter(move |s| s.stage == self.horizon)
            .map(|s| s.id.as_str())
    }

    pub fn actions_of<'a>(&'a self, state: &'a str) -> impl Iterator<Item = &'a ActionDecl<F>> {
        self.actions.iter().filter(move |a| a.state == state)
    }

    pub fn reward_of(&self, state: &str) -> Option<&RewardDecl<F>> {
        self.rewards.iter().find(|r| r.state == state)
    }

    /// Checks the instance and builds its indexed form.
    pub fn index(&self) -> Result<IndexedMdp<F>> {
        IndexedMdp::new(self)
    }
}

pub(crate) fn point_mass<F: Scalar>(to: &str) -> Distribution<F> {
    let mut d = Distribution::new();
    d.insert(to.to_string(), F::one());
    d
}

/// One action per non-terminal state.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DeterministicPolicy {
    pub assignments: BTreeMap<String, String>,
}

impl DeterministicPolicy {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, state: &str, action: &str) -> Self {
        self.assignments.insert(state.to_string(), action.to_string());
        self
    }

    pub fn action(&self, state: &str) -> Option<&str> {
        self.assignments.get(state).map(String::as_str)
    }
}

/// Nominal evaluation of a policy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "F: Scalar")]
pub struct EvalReport<F> {
    /// R(pi)
    pub nominal: F,
    /// Probability of ending in each terminal.
    pub arrival: BTreeMap<String, F>,
    /// Expected nominal reward collected at each terminal, p(t) * r(t).
    pub expected: BTreeMap<String, F>,
}

pub fn reach_probabilities<F: Scalar>(
    instance: &MdpInstance<F>,
    policy: &DeterministicPolicy,
) -> Result<EvalReport<F>> {
    let mdp = instance.index()?;
    let choice = mdp.choice_of(policy)?;
    Ok(mdp.eval_report(&choice))
}

/// Policy maximizing nominal reward, by backward induction.
pub fn nominal_optimal_policy<F: Scalar>(
    instance: &MdpInstance<F>,
) -> Result<(DeterministicPolicy, F)> {
    let mdp = instance.index()?;
    let (choice, value) = mdp.nominal_optimum();
    Ok((mdp.policy_of(&choice), value))
}


#[cfg(test)]
mod tests {
    use super::fixtures::two_terminals;
    use super::*;

    #[test]
    fn two_terminals_reach_through_a() {
        let m = two_terminals();
        let pi = DeterministicPolicy::new().with("s0", "a");
        let rep = reach_probabilities(&m, &pi).unwrap();
        assert_eq!(rep.arrival["t1"], 1.0);
        assert_eq!(rep.arrival["t2"], 0.0);
        assert_eq!(rep.nominal, 1.0);
    }

    #[test]
    fn zero_rewards_give_zero_value() {
        let mut m = two_terminals();
        // no terminal can deviate any more, so no budget is admissible
        m.uncertainty.budget = 0;
        for r in &mut m.rewards {
            r.nominal = 0.0;
            r.alternative = Some(0.0);
        }
        let pi = DeterministicPolicy::new().with("s0", "b");
        assert_eq!(reach_probabilities(&m, &pi).unwrap().nominal, 0.0);
    }

    #[test]
    fn nominal_optimum_prefers_smallest_action_on_ties() {
        let (pi, v) = nominal_optimal_policy(&two_terminals()).unwrap();
        assert_eq!(v, 1.0);
        assert_eq!(pi.action("s0"), Some("a"));
    }

    #[test]
    fn single_path_has_one_policy() {
        let mut m: MdpInstance<f64> = MdpInstance::new(
            2,
            "s0",
            Uncertainty {
                kind: UncertaintyKind::Reward,
                budget: 0,
            },
        );
        m.add_state("s0", 0).add_state("m", 1).add_state("t", 2);
        m.add_action("s0", "go", [("m", 1.0)])
            .add_action("m", "go", [("t", 1.0)]);
        m.add_reward("t", 3.0, None);
        let (pi, v) = nominal_optimal_policy(&m).unwrap();
        assert_eq!(v, 3.0);
        assert_eq!(pi.action("s0"), Some("go"));
        assert_eq!(pi.action("m"), Some("go"));
    }

    #[test]
    fn rejects_foreign_action() {
        let m = two_terminals();
        let pi = DeterministicPolicy::new().with("s0", "zzz");
        assert!(reach_probabilities(&m, &pi).is_err());
        let partial = DeterministicPolicy::new();
        assert!(reach_probabilities(&m, &partial).is_err());
    }

    #[test]
    fn instance_json_roundtrip() {
        let m = two_terminals();
        let text = serde_json::to_string(&m).unwrap();
        let back: MdpInstance<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
        assert!(text.contains("\"kind\":\"reward\""));
    }
}
