//! The 1/(5 + eps)-approximation for 2-stage reward-uncertain instances with
//! budget 1: two subroutines, each good in a different regime of the optimal
//! policy's loss, and a driver taking the better of the two.
//!
//! `algorithm1` guesses the loss L and the flipped terminal t^ and solves a
//! knapsack-cover relaxation (UB1); it is good when L(pi*) is comparable to
//! R^(pi*). `algorithm2` guesses L only and rounds a generalized-assignment LP
//! (UB2); it is good when L(pi*) is small.

mod assignment;
mod coeffs;
mod grid;
mod ub1;
mod ub2;

use serde::Serialize;

pub use assignment::min_cost_assignment;
pub use coeffs::{reward_coefficients, RewardCoefficients};
pub use grid::GuessGrid;
pub use ub1::{policy_from_ub1, solve_ub1};
pub use ub2::{
    assignment_value, build_ub2, policy_from_ub2, round_ub2, solve_ub2, target_value,
    terminal_loads,
};

use crate::error::{Error, Result};
use crate::mdp::{
    fix_initial_action, normalize_alternative_rewards, DeterministicPolicy, IndexedMdp,
    MdpInstance, UncertaintyKind,
};
use crate::robust::reward_worst_case;
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum Assignment<F> {
    /// UB1: one action index per middle state.
    Actions(Vec<usize>),
    /// UB2 LP solution: `y[s][t]`, t = |S2| meaning t*, with the basic
    /// variables and row count of the vertex it came from.
    Fractional {
        y: Vec<Vec<F>>,
        basis: Vec<(usize, usize)>,
        rows: usize,
    },
    /// Integral UB2: one target per middle state (|S2| meaning t*).
    Targets(Vec<usize>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssignmentSolution<F> {
    pub assignment: Assignment<F>,
    pub objective: F,
    /// The L the relaxation was solved for.
    pub l: F,
    pub t_hat: Option<usize>,
    /// Capacity the assignment is feasible against: L, or 2L after rounding.
    pub capacity: F,
}

/// Best policy found by one subroutine on one sub-instance.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate<F> {
    pub policy: DeterministicPolicy,
    /// R^ of `policy` on the instance the subroutine ran on.
    pub value: F,
    pub l: F,
    pub t_hat: Option<String>,
}

fn keep_better<F: Scalar>(best: &mut Option<Candidate<F>>, cand: Candidate<F>) {
    if best.as_ref().is_none_or(|b| cand.value > b.value) {
        *best = Some(cand);
    }
}

fn evaluate<F: Scalar>(mdp: &IndexedMdp<F>, policy: &DeterministicPolicy) -> Result<F> {
    let choice = mdp.choice_of(policy)?;
    Ok(reward_worst_case(mdp, &choice)?.worst_case)
}

fn prepared<F: Scalar>(instance: &MdpInstance<F>) -> Result<(IndexedMdp<F>, RewardCoefficients<F>)> {
    let mdp = instance.index()?;
    let coeffs = coeffs::coefficients_of(&mdp)?;
    Ok((mdp, coeffs))
}

/// `algorithm1` on `coeffs` with the given grid, scoring candidates on `mdp`.
pub fn algorithm1_on<F: Scalar>(
    mdp: &IndexedMdp<F>,
    coeffs: &RewardCoefficients<F>,
    grid: &GuessGrid<F>,
    eps: F,
) -> Result<Candidate<F>> {
    let mut best = None;
    for &l in &grid.values {
        for t_hat in (0..coeffs.terminal_count()).filter(|&t| coeffs.capable[t]) {
            let Some(x) = solve_ub1(coeffs, l, t_hat, eps)? else {
                continue;
            };
            let policy = policy_from_ub1(&x, coeffs)?;
            let value = evaluate(mdp, &policy)?;
            keep_better(
                &mut best,
                Candidate {
                    policy,
                    value,
                    l,
                    t_hat: Some(coeffs.terminals[t_hat].clone()),
                },
            );
        }
    }
    match best {
        Some(b) => Ok(b),
        // no deviation-capable terminal: every policy keeps its nominal value
        None => {
            let x = solve_ub1(coeffs, F::zero(), 0, eps)?.ok_or_else(|| {
                Error::UnsupportedShape("instance has no terminal states".into())
            })?;
            let policy = policy_from_ub1(&x, coeffs)?;
            let value = evaluate(mdp, &policy)?;
            Ok(Candidate {
                policy,
                value,
                l: F::zero(),
                t_hat: None,
            })
        }
    }
}

/// `algorithm2` on `coeffs`; `None` when the grid has no positive value
/// (all rewards are 0).
pub fn algorithm2_on<F: Scalar>(
    mdp: &IndexedMdp<F>,
    coeffs: &RewardCoefficients<F>,
    grid: &GuessGrid<F>,
) -> Result<Option<Candidate<F>>> {
    let mut best = None;
    for l in grid.positive() {
        let y = solve_ub2(coeffs, l)?;
        let rounded = round_ub2(&y, coeffs)?;
        let policy = policy_from_ub2(&rounded, coeffs)?;
        let value = evaluate(mdp, &policy)?;
        keep_better(
            &mut best,
            Candidate {
                policy,
                value,
                l,
                t_hat: None,
            },
        );
    }
    Ok(best)
}

/// `algorithm1` on a prepared instance (2 stages, k = 1, one initial action,
/// r' in {0, r}). Returns pi_1 and R^(pi_1).
pub fn algorithm1<F: Scalar>(instance: &MdpInstance<F>, eps: F) -> Result<(DeterministicPolicy, F)> {
    let (mdp, coeffs) = prepared(instance)?;
    let grid = GuessGrid::new(&coeffs, eps)?;
    let c = algorithm1_on(&mdp, &coeffs, &grid, eps)?;
    Ok((c.policy, c.value))
}

/// `algorithm2` on a prepared instance. With all rewards 0 every policy is
/// worth 0 and the all-t* assignment is returned.
pub fn algorithm2<F: Scalar>(instance: &MdpInstance<F>, eps: F) -> Result<(DeterministicPolicy, F)> {
    let (mdp, coeffs) = prepared(instance)?;
    let grid = GuessGrid::new(&coeffs, eps)?;
    match algorithm2_on(&mdp, &coeffs, &grid)? {
        Some(c) => Ok((c.policy, c.value)),
        None => {
            let sink = AssignmentSolution {
                assignment: Assignment::Targets(vec![coeffs.terminal_count(); coeffs.middle_count()]),
                objective: F::zero(),
                l: F::zero(),
                t_hat: None,
                capacity: F::zero(),
            };
            let policy = policy_from_ub2(&sink, &coeffs)?;
            let value = evaluate(&mdp, &policy)?;
            Ok((policy, value))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "F: Scalar")]
pub struct SubroutineReport<F> {
    pub value: Option<F>,
    #[serde(rename = "L")]
    pub l: Option<F>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_action: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "F: Scalar")]
pub struct Alg1Report<F> {
    #[serde(flatten)]
    pub common: SubroutineReport<F>,
    pub t_hat: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "F: Scalar")]
pub struct ApproxReport<F> {
    pub epsilon: F,
    pub epsilon1: F,
    pub epsilon2: F,
    /// Grid values summed over all initial actions.
    pub grid_size: usize,
    pub alg1: Alg1Report<F>,
    pub alg2: SubroutineReport<F>,
    /// "alg1" or "alg2".
    pub chosen: String,
    pub value: F,
}

/// epsilon_1 = eps / 5 and epsilon_2 = eps / (10 + 2 eps), so that the
/// combined guarantee is 1 / (5 + eps).
pub fn split_epsilon<F: Scalar>(eps: F) -> (F, F) {
    let five = F::lit(5.0);
    (eps / five, eps / (F::lit(10.0) + eps + eps))
}

/// Approximately optimal policy of a 2-stage reward-uncertain instance with
/// k = 1: R^(pi) >= R^* / (5 + eps).
///
/// Runs both subroutines on every fixed-initial-action, normalized
/// sub-instance and returns the candidate with the best worst-case reward on
/// the original instance (`algorithm1` and smaller initial actions win ties).
pub fn approximate<F: Scalar>(
    instance: &MdpInstance<F>,
    eps: F,
) -> Result<(DeterministicPolicy, F, ApproxReport<F>)> {
    if instance.uncertainty.kind != UncertaintyKind::Reward {
        return Err(Error::UnsupportedShape(
            "approximation needs reward uncertainty".into(),
        ));
    }
    if instance.horizon != 2 {
        return Err(Error::UnsupportedShape(format!(
            "approximation needs horizon 2, got {}",
            instance.horizon
        )));
    }
    if instance.uncertainty.budget != 1 {
        return Err(Error::UnsupportedShape(format!(
            "approximation needs budget 1, got {}",
            instance.uncertainty.budget
        )));
    }
    if !(eps > F::zero()) || !eps.is_finite() {
        return Err(Error::OutOfRange(format!("epsilon {eps} must be positive")));
    }
    let original = instance.index()?;
    let (eps1, eps2) = split_epsilon(eps);
    let init = original.initial();
    let mut grid_size = 0;
    let mut best1: Option<(Candidate<F>, String)> = None;
    let mut best2: Option<(Candidate<F>, String)> = None;
    for a0 in original.actions(init) {
        let sub = normalize_alternative_rewards(&fix_initial_action(instance, &a0.name)?)?;
        let (mdp, coeffs) = prepared(&sub)?;
        let grid1 = GuessGrid::new(&coeffs, eps1)?;
        let grid2 = GuessGrid::new(&coeffs, eps2)?;
        grid_size += grid1.len() + grid2.len();
        let mut c1 = algorithm1_on(&mdp, &coeffs, &grid1, eps1)?;
        c1.value = evaluate(&original, &c1.policy)?;
        if best1.as_ref().is_none_or(|(b, _)| c1.value > b.value) {
            best1 = Some((c1, a0.name.clone()));
        }
        if let Some(mut c2) = algorithm2_on(&mdp, &coeffs, &grid2)? {
            c2.value = evaluate(&original, &c2.policy)?;
            if best2.as_ref().is_none_or(|(b, _)| c2.value > b.value) {
                best2 = Some((c2, a0.name.clone()));
            }
        }
    }
    let (c1, a1) = best1.expect("the initial state has an action");
    let alg1 = Alg1Report {
        common: SubroutineReport {
            value: Some(c1.value),
            l: Some(c1.l),
            initial_action: Some(a1),
        },
        t_hat: c1.t_hat.clone(),
    };
    let alg2 = match &best2 {
        Some((c2, a2)) => SubroutineReport {
            value: Some(c2.value),
            l: Some(c2.l),
            initial_action: Some(a2.clone()),
        },
        None => SubroutineReport {
            value: None,
            l: None,
            initial_action: None,
        },
    };
    let (chosen, policy, value) = match best2 {
        Some((c2, _)) if c2.value > c1.value => ("alg2", c2.policy, c2.value),
        _ => ("alg1", c1.policy, c1.value),
    };
    let report = ApproxReport {
        epsilon: eps,
        epsilon1: eps1,
        epsilon2: eps2,
        grid_size,
        alg1,
        alg2,
        chosen: chosen.to_string(),
        value,
    };
    Ok((policy, value, report))
}

#[cfg(test)]
mod tests;
