use serde::Serialize;

use crate::error::{Error, Result};
use crate::mdp::{IndexedMdp, MdpInstance, UncertaintyKind};
use crate::scalar::Scalar;

/// The v-tables of a normalized 2-stage instance with a fixed initial action.
///
/// Middle states, their actions and the terminals are indexed in sorted
/// id/name order, so every argmax below breaks ties toward the smallest
/// identifier by taking the first maximum.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "F: Scalar")]
pub struct RewardCoefficients<F> {
    pub initial: String,
    pub initial_action: String,
    pub middle: Vec<String>,
    pub actions: Vec<Vec<String>>,
    pub terminals: Vec<String>,
    /// Whether the adversary can zero the terminal's reward.
    pub capable: Vec<bool>,
    pub rewards: Vec<F>,
    /// `v[s][a][t] = p(s | s0, a0) p(t | s, a) r(t)`
    pub v: Vec<Vec<Vec<F>>>,
}

fn first_max<F: Scalar>(items: impl Iterator<Item = (usize, F)>) -> Option<(usize, F)> {
    let mut best: Option<(usize, F)> = None;
    for (i, x) in items {
        if best.is_none_or(|(_, b)| x > b) {
            best = Some((i, x));
        }
    }
    best
}

impl<F: Scalar> RewardCoefficients<F> {
    pub fn middle_count(&self) -> usize {
        self.middle.len()
    }

    pub fn terminal_count(&self) -> usize {
        self.terminals.len()
    }

    /// v_st = max_a v^a_st
    pub fn v_st(&self, s: usize, t: usize) -> F {
        self.v[s].iter().map(|row| row[t]).fold(F::zero(), F::max)
    }

    /// Largest v^a_st not exceeding `cap`, with the first action attaining it.
    pub fn v_st_within(&self, s: usize, t: usize, cap: F) -> Option<(usize, F)> {
        first_max(
            self.v[s]
                .iter()
                .enumerate()
                .map(|(a, row)| (a, row[t]))
                .filter(|&(_, x)| x <= cap),
        )
    }

    /// Action of `s` maximizing v^a_st.
    pub fn best_action_for(&self, s: usize, t: usize) -> usize {
        first_max(self.v[s].iter().enumerate().map(|(a, row)| (a, row[t])))
            .expect("every middle state has an action")
            .0
    }

    /// t_s^a: the deviation-capable terminal with the largest v^a_st.
    pub fn heaviest(&self, s: usize, a: usize) -> Option<usize> {
        first_max(
            self.v[s][a]
                .iter()
                .copied()
                .enumerate()
                .filter(|&(t, _)| self.capable[t]),
        )
        .map(|(t, _)| t)
    }

    /// Reward of action `a` at `s` after losing its heaviest terminal.
    pub fn robust_part(&self, s: usize, a: usize) -> F {
        let row = &self.v[s][a];
        let total: F = row.iter().copied().sum();
        match self.heaviest(s, a) {
            Some(t) => total - row[t],
            None => total,
        }
    }

    /// v_st* and the first action attaining it.
    pub fn star(&self, s: usize) -> (usize, F) {
        first_max((0..self.v[s].len()).map(|a| (a, self.robust_part(s, a))))
            .expect("every middle state has an action")
    }

    pub fn has_positive_reward(&self) -> bool {
        self.rewards.iter().any(|&r| r > F::zero())
    }
}

/// Extracts the v-tables of a 2-stage, k = 1 reward-uncertainty instance
/// with a single initial action and r'(t) in {0, r(t)} everywhere.
pub fn reward_coefficients<F: Scalar>(instance: &MdpInstance<F>) -> Result<RewardCoefficients<F>> {
    let mdp = instance.index()?;
    coefficients_of(&mdp)
}

pub(crate) fn coefficients_of<F: Scalar>(mdp: &IndexedMdp<F>) -> Result<RewardCoefficients<F>> {
    if mdp.kind() != UncertaintyKind::Reward {
        return Err(Error::MustNormalize("reward uncertainty required".into()));
    }
    if mdp.horizon() != 2 {
        return Err(Error::MustNormalize(format!(
            "horizon must be 2, got {}",
            mdp.horizon()
        )));
    }
    if mdp.budget() != 1 {
        return Err(Error::MustNormalize(format!(
            "budget must be 1, got {}",
            mdp.budget()
        )));
    }
    let init = mdp.initial();
    if mdp.actions(init).len() != 1 {
        return Err(Error::MustNormalize(format!(
            "initial state must have a single action (assumption 1), has {}",
            mdp.actions(init).len()
        )));
    }
    for &t in mdp.terminals() {
        let (r, alt) = (mdp.reward(t), mdp.alternative_reward(t));
        if alt != F::zero() && alt != r {
            return Err(Error::MustNormalize(format!(
                "terminal `{}` has alternative reward {alt} (assumption 2 needs 0)",
                mdp.id(t)
            )));
        }
    }

    let mut middle: Vec<usize> = mdp
        .decision_states()
        .iter()
        .copied()
        .filter(|&s| mdp.stage(s) == 1)
        .collect();
    middle.sort_by(|&a, &b| mdp.id(a).cmp(mdp.id(b)));
    let terminals: Vec<usize> = mdp.terminals().to_vec();
    let mut term_pos = vec![usize::MAX; mdp.len()];
    for (i, &t) in terminals.iter().enumerate() {
        term_pos[t] = i;
    }
    let a0 = &mdp.actions(init)[0];
    let mut reach = vec![F::zero(); mdp.len()];
    for &(s, p) in &a0.nominal {
        reach[s] = p;
    }

    let v = middle
        .iter()
        .map(|&s| {
            mdp.actions(s)
                .iter()
                .map(|a| {
                    let mut row = vec![F::zero(); terminals.len()];
                    for &(t, p) in &a.nominal {
                        row[term_pos[t]] = reach[s] * p * mdp.reward(t);
                    }
                    row
                })
                .collect()
        })
        .collect();

    Ok(RewardCoefficients {
        initial: mdp.id(init).to_string(),
        initial_action: a0.name.clone(),
        actions: middle
            .iter()
            .map(|&s| mdp.actions(s).iter().map(|a| a.name.clone()).collect())
            .collect(),
        middle: middle.iter().map(|&s| mdp.id(s).to_string()).collect(),
        capable: terminals.iter().map(|&t| mdp.reward_can_deviate(t)).collect(),
        rewards: terminals.iter().map(|&t| mdp.reward(t)).collect(),
        terminals: terminals.iter().map(|&t| mdp.id(t).to_string()).collect(),
        v,
    })
}
