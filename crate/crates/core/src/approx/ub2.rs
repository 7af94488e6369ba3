//! UB2(L): the generalized-assignment relaxation. Each middle state is
//! assigned (fractionally) to one real terminal, whose value concentration
//! is capped by L, or to the artificial sink t* worth v_st*.

use super::assignment::min_cost_assignment;
use super::{Assignment, AssignmentSolution, RewardCoefficients};
use crate::error::{Error, Result};
use crate::linprog::{solve_extreme_point, LinearProgram, LpOutcome};
use crate::mdp::DeterministicPolicy;
use crate::scalar::Scalar;

/// Value and action of assigning middle state `s` to target `t` under
/// capacity `l`; target `terminal_count()` is t*.
///
/// A capacitated terminal is worth the largest v^a_st that fits under `l`
/// (`None` when no action fits, which deletes the column). Certain
/// terminals cannot lose reward, so they are uncapacitated and worth v_st.
pub fn target_value<F: Scalar>(
    coeffs: &RewardCoefficients<F>,
    s: usize,
    t: usize,
    l: F,
) -> Option<(F, usize)> {
    if t == coeffs.terminal_count() {
        let (a, v) = coeffs.star(s);
        Some((v, a))
    } else if coeffs.capable[t] {
        coeffs.v_st_within(s, t, l).map(|(a, v)| (v, a))
    } else {
        let a = coeffs.best_action_for(s, t);
        Some((coeffs.v[s][a][t], a))
    }
}

fn column(coeffs_targets: usize, s: usize, t: usize) -> usize {
    s * coeffs_targets + t
}

/// The LP UB2(`l`) with variables y_st at column `s * (|S2| + 1) + t`.
pub fn build_ub2<F: Scalar>(coeffs: &RewardCoefficients<F>, l: F) -> Result<LinearProgram<F>> {
    if !(l > F::zero()) {
        return Err(Error::OutOfRange(format!("capacity {l} must be positive")));
    }
    let n = coeffs.middle_count();
    let targets = coeffs.terminal_count() + 1;
    let mut lp = LinearProgram::new(vec![F::zero(); n * targets]);
    for s in 0..n {
        for t in 0..targets {
            match target_value(coeffs, s, t, l) {
                Some((v, _)) => lp.objective[column(targets, s, t)] = v,
                None => {
                    lp.fix_zero(column(targets, s, t));
                }
            }
        }
    }
    for t in 0..coeffs.terminal_count() {
        if !coeffs.capable[t] {
            continue;
        }
        let mut row = vec![F::zero(); n * targets];
        for s in 0..n {
            if let Some((v, _)) = target_value(coeffs, s, t, l) {
                row[column(targets, s, t)] = v;
            }
        }
        lp.add_le(row, l);
    }
    for s in 0..n {
        let mut row = vec![F::zero(); n * targets];
        for t in 0..targets {
            row[column(targets, s, t)] = F::one();
        }
        lp.add_eq(row, F::one());
    }
    Ok(lp)
}

/// Optimal extreme point of UB2(`l`).
pub fn solve_ub2<F: Scalar>(coeffs: &RewardCoefficients<F>, l: F) -> Result<AssignmentSolution<F>> {
    let lp = build_ub2(coeffs, l)?;
    let targets = coeffs.terminal_count() + 1;
    match solve_extreme_point(&lp)? {
        LpOutcome::Optimal(sol) => {
            let y = sol.x.chunks(targets).map(<[F]>::to_vec).collect();
            Ok(AssignmentSolution {
                assignment: Assignment::Fractional {
                    y,
                    basis: sol.basis.iter().map(|&c| (c / targets, c % targets)).collect(),
                    rows: sol.rows,
                },
                objective: sol.value,
                l,
                t_hat: None,
                capacity: l,
            })
        }
        // t* is uncapacitated, so y_{s t*} = 1 is always feasible
        other => unreachable!("UB2 is feasible and bounded, solver said {other:?}"),
    }
}

/// Objective of an integral assignment `targets` under capacity `l`.
pub fn assignment_value<F: Scalar>(coeffs: &RewardCoefficients<F>, targets: &[usize], l: F) -> F {
    targets
        .iter()
        .enumerate()
        .map(|(s, &t)| target_value(coeffs, s, t, l).map_or(F::zero(), |(v, _)| v))
        .sum()
}

/// Value concentrated at each capacitated terminal by an integral assignment.
pub fn terminal_loads<F: Scalar>(coeffs: &RewardCoefficients<F>, targets: &[usize], l: F) -> Vec<F> {
    let mut load = vec![F::zero(); coeffs.terminal_count()];
    for (s, &t) in targets.iter().enumerate() {
        if t < coeffs.terminal_count() && coeffs.capable[t] {
            if let Some((v, _)) = target_value(coeffs, s, t, l) {
                load[t] = load[t] + v;
            }
        }
    }
    load
}

/// Rounds an extreme-point solution of UB2(L) to an integral assignment
/// that respects capacity 2L and loses no objective value.
///
/// Slot construction: capacitated terminal t gets ceil(sum_s y_st) unit
/// slots, filled with its states in decreasing v order; t* and certain
/// terminals get one slot per state. The fractional y is then a fractional
/// matching saturating every state, and a maximum-value integral matching on
/// its support is at least as good. Each slot after the first only holds
/// states no more valuable than those of the previous slot, so a terminal's
/// load is at most L plus one coefficient, itself at most L.
pub fn round_ub2<F: Scalar>(
    solution: &AssignmentSolution<F>,
    coeffs: &RewardCoefficients<F>,
) -> Result<AssignmentSolution<F>> {
    let Assignment::Fractional { y, basis, rows } = &solution.assignment else {
        return Err(Error::NotExtremePoint("expected a fractional UB2 solution".into()));
    };
    let tol = F::lp_tol();
    let l = solution.l;
    let n = coeffs.middle_count();
    let targets = coeffs.terminal_count() + 1;
    if y.len() != n || y.iter().any(|row| row.len() != targets) {
        return Err(Error::NotExtremePoint("dimensions do not match coefficients".into()));
    }
    let positive: Vec<(usize, usize)> = (0..n)
        .flat_map(|s| (0..targets).map(move |t| (s, t)))
        .filter(|&(s, t)| y[s][t] > tol)
        .collect();
    if positive.len() > *rows {
        return Err(Error::NotExtremePoint(format!(
            "{} positive variables but only {rows} rows",
            positive.len()
        )));
    }
    if let Some(&(s, t)) = positive.iter().find(|p| !basis.contains(p)) {
        return Err(Error::NotExtremePoint(format!("y[{s}][{t}] is positive but nonbasic")));
    }
    let value = |s: usize, t: usize| target_value(coeffs, s, t, l).map(|(v, _)| v);
    if positive.iter().any(|&(s, t)| value(s, t).is_none()) {
        return Err(Error::NotExtremePoint("mass on a deleted column".into()));
    }

    let integral: Option<Vec<usize>> = (0..n)
        .map(|s| (0..targets).find(|&t| y[s][t] >= F::one() - tol))
        .collect();
    let targets_of = match integral {
        Some(t) => t,
        None => {
            // slots: (target, weight) per column; edges from states
            let mut slot_target: Vec<usize> = Vec::new();
            let mut edges: Vec<Vec<Option<F>>> = vec![Vec::new(); n];
            let mut new_slot = |t: usize, edges: &mut Vec<Vec<Option<F>>>| {
                slot_target.push(t);
                for row in edges.iter_mut() {
                    row.push(None);
                }
                slot_target.len() - 1
            };
            for t in 0..targets {
                let mut users: Vec<usize> = (0..n).filter(|&s| y[s][t] > tol).collect();
                if users.is_empty() {
                    continue;
                }
                let capacitated = t < coeffs.terminal_count() && coeffs.capable[t];
                if !capacitated {
                    for s in users {
                        let j = new_slot(t, &mut edges);
                        edges[s][j] = value(s, t);
                    }
                    continue;
                }
                users.sort_by(|&a, &b| {
                    value(b, t)
                        .partial_cmp(&value(a, t))
                        .expect("finite coefficients")
                        .then(a.cmp(&b))
                });
                let total: F = users.iter().map(|&s| y[s][t]).sum();
                let count = (total - tol).ceil().to_usize().unwrap_or(1).max(1);
                let first = new_slot(t, &mut edges);
                for _ in 1..count {
                    new_slot(t, &mut edges);
                }
                let mut j = 0;
                let mut room = F::one();
                for s in users {
                    let mut amount = y[s][t];
                    while amount > tol {
                        let take = amount.min(room);
                        edges[s][first + j] = value(s, t);
                        amount = amount - take;
                        room = room - take;
                        if room <= tol {
                            if j + 1 < count {
                                j += 1;
                                room = F::one();
                            } else {
                                room = F::infinity();
                            }
                        }
                    }
                }
            }
            let mut big = F::one();
            for row in &edges {
                for v in row.iter().flatten() {
                    big = big + v.abs();
                }
            }
            big = big + big;
            let cost: Vec<Vec<F>> = edges
                .iter()
                .map(|row| row.iter().map(|e| e.map_or(big, |v| -v)).collect())
                .collect();
            let matched = min_cost_assignment(&cost);
            let mut out = Vec::with_capacity(n);
            for (s, &j) in matched.iter().enumerate() {
                if edges[s][j].is_none() {
                    return Err(Error::NotExtremePoint(
                        "support admits no assignment of every state".into(),
                    ));
                }
                out.push(slot_target[j]);
            }
            out
        }
    };
    Ok(AssignmentSolution {
        objective: assignment_value(coeffs, &targets_of, l),
        assignment: Assignment::Targets(targets_of),
        l,
        t_hat: None,
        capacity: l + l,
    })
}

/// pi_y: at a state sent to t*, the action keeping the most reward after
/// losing its heaviest terminal; at a state sent to terminal t, the action
/// realizing the assignment's value there.
pub fn policy_from_ub2<F: Scalar>(
    solution: &AssignmentSolution<F>,
    coeffs: &RewardCoefficients<F>,
) -> Result<DeterministicPolicy> {
    let Assignment::Targets(targets) = &solution.assignment else {
        return Err(Error::NonIntegral("expected an integral UB2 assignment".into()));
    };
    if targets.len() != coeffs.middle_count() {
        return Err(Error::NonIntegral(format!(
            "{} targets for {} middle states",
            targets.len(),
            coeffs.middle_count()
        )));
    }
    let mut policy = DeterministicPolicy::new().with(&coeffs.initial, &coeffs.initial_action);
    for (s, &t) in targets.iter().enumerate() {
        if t > coeffs.terminal_count() {
            return Err(Error::NonIntegral(format!("target index {t} out of range")));
        }
        let (_, a) = target_value(coeffs, s, t, solution.l).ok_or_else(|| {
            Error::NonIntegral(format!(
                "`{}` assigned to deleted column `{}`",
                coeffs.middle[s], coeffs.terminals[t]
            ))
        })?;
        policy = policy.with(&coeffs.middle[s], &coeffs.actions[s][a]);
    }
    Ok(policy)
}
