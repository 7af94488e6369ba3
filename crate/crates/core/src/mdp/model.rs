use std::collections::{BTreeMap, HashMap};

use super::{validate, DeterministicPolicy, EvalReport, MdpInstance, UncertaintyKind};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Marker for "no action" in index-based policies (terminal states) and
/// "no deviation" in override vectors.
pub const NO_ACTION: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct IndexedAction<F> {
    pub name: String,
    pub nominal: Vec<(usize, F)>,
    pub alternatives: Vec<Vec<(usize, F)>>,
}

/// Validated, index-based view of an [`MdpInstance`].
///
/// States are numbered in declaration order; `order()` lists them by
/// (stage, id), which is also the order policies are enumerated in.
/// Actions of each state are sorted by name. An index-based policy is a
/// `Vec<usize>` holding one action index per state ([`NO_ACTION`] for
/// terminals).
#[derive(Clone, Debug)]
pub struct IndexedMdp<F> {
    ids: Vec<String>,
    stage: Vec<usize>,
    horizon: usize,
    initial: usize,
    index: HashMap<String, usize>,
    order: Vec<usize>,
    decision: Vec<usize>,
    terminals: Vec<usize>,
    actions: Vec<Vec<IndexedAction<F>>>,
    reward: Vec<F>,
    alternative: Vec<F>,
    kind: UncertaintyKind,
    budget: usize,
}

impl<F: Scalar> IndexedMdp<F> {
    pub fn new(instance: &MdpInstance<F>) -> Result<Self> {
        let diags = validate(instance);
        if !diags.is_empty() {
            return Err(Error::InvalidInstance(diags));
        }
        if instance.action_rewards.iter().any(|r| r.reward > F::zero()) {
            return Err(Error::MustNormalize(
                "action rewards must be lifted to terminal rewards first".into(),
            ));
        }
        let ids: Vec<String> = instance.states.iter().map(|s| s.id.clone()).collect();
        let stage: Vec<usize> = instance.states.iter().map(|s| s.stage).collect();
        let index: HashMap<String, usize> =
            ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();

        let mut order: Vec<usize> = (0..ids.len()).collect();
        order.sort_by(|&a, &b| (stage[a], &ids[a]).cmp(&(stage[b], &ids[b])));
        let horizon = instance.horizon;
        let decision: Vec<usize> = order.iter().copied().filter(|&s| stage[s] < horizon).collect();
        let mut terminals: Vec<usize> =
            order.iter().copied().filter(|&s| stage[s] == horizon).collect();
        terminals.sort_by(|&a, &b| ids[a].cmp(&ids[b]));

        let to_vec = |d: &BTreeMap<String, F>| -> Vec<(usize, F)> {
            d.iter()
                .filter(|(_, &p)| p > F::zero())
                .map(|(k, &p)| (index[k], p))
                .collect()
        };
        let mut actions: Vec<Vec<IndexedAction<F>>> = vec![Vec::new(); ids.len()];
        for a in &instance.actions {
            actions[index[&a.state]].push(IndexedAction {
                name: a.name.clone(),
                nominal: to_vec(&a.nominal),
                alternatives: a.alternatives.iter().map(to_vec).collect(),
            });
        }
        for list in &mut actions {
            list.sort_by(|a, b| a.name.cmp(&b.name));
        }

        let mut reward = vec![F::zero(); ids.len()];
        let mut alternative = vec![F::zero(); ids.len()];
        for r in &instance.rewards {
            let i = index[&r.state];
            reward[i] = r.nominal;
            alternative[i] = r.alternative.unwrap_or(r.nominal);
        }

        Ok(IndexedMdp {
            initial: index[&instance.initial],
            ids,
            stage,
            horizon,
            index,
            order,
            decision,
            terminals,
            actions,
            reward,
            alternative,
            kind: instance.uncertainty.kind,
            budget: instance.uncertainty.budget,
        })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn id(&self, s: usize) -> &str {
        &self.ids[s]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn stage(&self, s: usize) -> usize {
        self.stage[s]
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn kind(&self) -> UncertaintyKind {
        self.kind
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    /// All states sorted by (stage, id).
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Non-terminal states sorted by (stage, id).
    pub fn decision_states(&self) -> &[usize] {
        &self.decision
    }

    /// Terminal states sorted by id.
    pub fn terminals(&self) -> &[usize] {
        &self.terminals
    }

    pub fn actions(&self, s: usize) -> &[IndexedAction<F>] {
        &self.actions[s]
    }

    pub fn reward(&self, t: usize) -> F {
        self.reward[t]
    }

    pub fn alternative_reward(&self, t: usize) -> F {
        self.alternative[t]
    }

    /// Whether the adversary can lower the reward at terminal `t`.
    pub fn reward_can_deviate(&self, t: usize) -> bool {
        self.alternative[t] < self.reward[t]
    }

    /// Number of deterministic policies, saturating.
    pub fn policy_count(&self) -> u128 {
        self.decision
            .iter()
            .fold(1u128, |acc, &s| acc.saturating_mul(self.actions[s].len() as u128))
    }

    pub fn choice_of(&self, policy: &DeterministicPolicy) -> Result<Vec<usize>> {
        let mut choice = vec![NO_ACTION; self.len()];
        for (state, action) in &policy.assignments {
            let s = self
                .index_of(state)
                .ok_or_else(|| Error::InvalidPolicy(format!("unknown state `{state}`")))?;
            if self.stage[s] >= self.horizon {
                return Err(Error::InvalidPolicy(format!("`{state}` is terminal")));
            }
            let a = self.actions[s]
                .iter()
                .position(|x| &x.name == action)
                .ok_or_else(|| Error::UnknownAction {
                    state: state.clone(),
                    action: action.clone(),
                })?;
            choice[s] = a;
        }
        if let Some(&s) = self.decision.iter().find(|&&s| choice[s] == NO_ACTION) {
            return Err(Error::InvalidPolicy(format!(
                "no action assigned to `{}`",
                self.ids[s]
            )));
        }
        Ok(choice)
    }

    pub fn policy_of(&self, choice: &[usize]) -> DeterministicPolicy {
        let assignments = self
            .decision
            .iter()
            .map(|&s| (self.ids[s].clone(), self.actions[s][choice[s]].name.clone()))
            .collect();
        DeterministicPolicy { assignments }
    }

    /// Probability of visiting every state under `choice`, with the
    /// distribution of `(s, choice[s])` replaced by alternative
    /// `overrides[s]` wherever that is not [`NO_ACTION`].
    pub fn arrival_into(&self, choice: &[usize], overrides: Option<&[usize]>, mass: &mut Vec<F>) {
        mass.clear();
        mass.resize(self.len(), F::zero());
        mass[self.initial] = F::one();
        for &s in &self.decision {
            let m = mass[s];
            if m == F::zero() {
                continue;
            }
            let action = &self.actions[s][choice[s]];
            let dist = match overrides.map(|o| o[s]) {
                Some(alt) if alt != NO_ACTION => &action.alternatives[alt],
                _ => &action.nominal,
            };
            for &(t, p) in dist {
                mass[t] = mass[t] + m * p;
            }
        }
    }

    pub fn arrival(&self, choice: &[usize]) -> Vec<F> {
        let mut mass = Vec::new();
        self.arrival_into(choice, None, &mut mass);
        mass
    }

    /// Expected terminal reward for visit probabilities `mass`.
    pub fn value_of_mass(&self, mass: &[F]) -> F {
        self.terminals.iter().map(|&t| mass[t] * self.reward[t]).sum()
    }

    pub fn nominal_value(&self, choice: &[usize]) -> F {
        self.value_of_mass(&self.arrival(choice))
    }

    pub fn eval_report(&self, choice: &[usize]) -> EvalReport<F> {
        let mass = self.arrival(choice);
        let arrival: BTreeMap<String, F> =
            self.terminals.iter().map(|&t| (self.ids[t].clone(), mass[t])).collect();
        let expected: BTreeMap<String, F> = self
            .terminals
            .iter()
            .map(|&t| (self.ids[t].clone(), mass[t] * self.reward[t]))
            .collect();
        EvalReport {
            nominal: expected.values().copied().sum(),
            arrival,
            expected,
        }
    }

    /// Backward induction; ties go to the first (smallest-named) action.
    pub fn nominal_optimum(&self) -> (Vec<usize>, F) {
        let mut value = self.reward.clone();
        let mut choice = vec![NO_ACTION; self.len()];
        for &s in self.decision.iter().rev() {
            let mut best: Option<(usize, F)> = None;
            for (i, a) in self.actions[s].iter().enumerate() {
                let v: F = a.nominal.iter().map(|&(t, p)| p * value[t]).sum();
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((i, v));
                }
            }
            let (i, v) = best.expect("validated: every decision state has an action");
            choice[s] = i;
            value[s] = v;
        }
        (choice, value[self.initial])
    }
}
