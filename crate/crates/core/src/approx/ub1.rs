//! UB1(L, t^): pick one action per middle state, maximizing the reward away
//! from t^ while keeping at least L at t^. This is a multiple-choice
//! knapsack-cover problem, solved here by a profit-scaling FPTAS.

use super::{Assignment, AssignmentSolution, RewardCoefficients};
use crate::error::{Error, Result};
use crate::mdp::DeterministicPolicy;
use crate::scalar::Scalar;

fn total_profit<F: Scalar>(profit: &[Vec<F>], choice: &[usize]) -> F {
    choice.iter().enumerate().map(|(s, &a)| profit[s][a]).sum()
}

fn total_weight<F: Scalar>(weight: &[Vec<F>], choice: &[usize]) -> F {
    choice.iter().enumerate().map(|(s, &a)| weight[s][a]).sum()
}

fn argmax<F: Scalar>(row: &[F]) -> usize {
    let mut best = 0;
    for (i, &x) in row.iter().enumerate() {
        if x > row[best] {
            best = i;
        }
    }
    best
}

/// Largest scaled-profit assignment with cover weight >= `need`, by dynamic
/// programming over groups. `allowed[s][a]` filters items.
fn scaled_dp<F: Scalar>(
    profit: &[Vec<F>],
    weight: &[Vec<F>],
    allowed: &[Vec<bool>],
    scale: F,
    need: F,
) -> Option<Vec<usize>> {
    let n = profit.len();
    let q: Vec<Vec<usize>> = profit
        .iter()
        .map(|row| {
            row.iter()
                .map(|&p| (p / scale).floor().to_usize().unwrap_or(0))
                .collect()
        })
        .collect();
    let q_max: usize = (0..n)
        .map(|s| {
            (0..q[s].len())
                .filter(|&a| allowed[s][a])
                .map(|a| q[s][a])
                .max()
                .unwrap_or(0)
        })
        .sum();
    // best[q] = max weight reaching scaled profit exactly q
    let mut best: Vec<Option<F>> = vec![None; q_max + 1];
    best[0] = Some(F::zero());
    let mut parent: Vec<Vec<(usize, usize)>> = Vec::with_capacity(n);
    for s in 0..n {
        let mut next: Vec<Option<F>> = vec![None; q_max + 1];
        let mut back = vec![(usize::MAX, 0); q_max + 1];
        for (prev, cell) in best.iter().enumerate() {
            let Some(w) = *cell else { continue };
            for a in 0..q[s].len() {
                if !allowed[s][a] {
                    continue;
                }
                let idx = prev + q[s][a];
                let cand = w + weight[s][a];
                if next[idx].is_none_or(|cur| cand > cur) {
                    next[idx] = Some(cand);
                    back[idx] = (a, prev);
                }
            }
        }
        best = next;
        parent.push(back);
    }
    let top = (0..=q_max).rev().find(|&i| best[i].is_some_and(|w| w >= need))?;
    let mut choice = vec![0; n];
    let mut cur = top;
    for s in (0..n).rev() {
        let (a, prev) = parent[s][cur];
        choice[s] = a;
        cur = prev;
    }
    Some(choice)
}

/// Solves UB1(`l`, `t_hat`) to within a factor 1 + `eps` of the integer
/// optimum. Returns `None` exactly when the cover constraint cannot be met,
/// i.e. when sum_s max_a v^a_{s t^} < l - tol.
pub fn solve_ub1<F: Scalar>(
    coeffs: &RewardCoefficients<F>,
    l: F,
    t_hat: usize,
    eps: F,
) -> Result<Option<AssignmentSolution<F>>> {
    if !(eps > F::zero()) {
        return Err(Error::OutOfRange(format!("epsilon {eps} must be positive")));
    }
    if t_hat >= coeffs.terminal_count() {
        return Err(Error::OutOfRange(format!("terminal index {t_hat}")));
    }
    let tol = F::mass_tol();
    let need = l - tol;
    let n = coeffs.middle_count();
    let profit: Vec<Vec<F>> = coeffs
        .v
        .iter()
        .map(|acts| {
            acts.iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|&(t, _)| t != t_hat)
                        .map(|(_, &x)| x)
                        .sum()
                })
                .collect()
        })
        .collect();
    let weight: Vec<Vec<F>> = coeffs
        .v
        .iter()
        .map(|acts| acts.iter().map(|row| row[t_hat]).collect())
        .collect();
    let max_weight: Vec<F> = weight
        .iter()
        .map(|row| row.iter().copied().fold(F::zero(), F::max))
        .collect();
    let reachable: F = max_weight.iter().copied().sum();
    if reachable < need {
        return Ok(None);
    }

    let cover: Vec<usize> = weight.iter().map(|row| argmax(row)).collect();
    let greedy: Vec<usize> = profit.iter().map(|row| argmax(row)).collect();
    let mut candidates = Vec::new();

    // items that can appear in some feasible assignment
    let allowed: Vec<Vec<bool>> = (0..n)
        .map(|s| {
            let rest = reachable - max_weight[s];
            weight[s].iter().map(|&w| w + rest >= need).collect()
        })
        .collect();
    let p1 = (0..n)
        .flat_map(|s| (0..profit[s].len()).map(move |a| (s, a)))
        .filter(|&(s, a)| allowed[s][a])
        .map(|(s, a)| profit[s][a])
        .fold(F::zero(), F::max);
    if p1 > F::zero() {
        let scale = eps / (F::one() + eps) * p1 / F::of_usize(n);
        if let Some(choice) = scaled_dp(&profit, &weight, &allowed, scale, need) {
            candidates.push(choice);
        }
    }
    if total_weight(&weight, &greedy) >= need {
        candidates.push(greedy);
    }
    candidates.push(cover);

    let mut best = candidates.swap_remove(0);
    let mut best_profit = total_profit(&profit, &best);
    for c in candidates {
        let p = total_profit(&profit, &c);
        if p > best_profit {
            best = c;
            best_profit = p;
        }
    }
    Ok(Some(AssignmentSolution {
        assignment: Assignment::Actions(best),
        objective: best_profit,
        l,
        t_hat: Some(t_hat),
        capacity: l,
    }))
}

/// pi_x: the action chosen by `x` at every middle state.
pub fn policy_from_ub1<F: Scalar>(
    solution: &AssignmentSolution<F>,
    coeffs: &RewardCoefficients<F>,
) -> Result<DeterministicPolicy> {
    let Assignment::Actions(choice) = &solution.assignment else {
        return Err(Error::NonIntegral("expected a UB1 action assignment".into()));
    };
    if choice.len() != coeffs.middle_count() {
        return Err(Error::NonIntegral(format!(
            "{} choices for {} middle states",
            choice.len(),
            coeffs.middle_count()
        )));
    }
    let mut policy = DeterministicPolicy::new().with(&coeffs.initial, &coeffs.initial_action);
    for (s, &a) in choice.iter().enumerate() {
        let name = coeffs.actions[s]
            .get(a)
            .ok_or_else(|| Error::NonIntegral(format!("action index {a} out of range")))?;
        policy = policy.with(&coeffs.middle[s], name);
    }
    Ok(policy)
}
