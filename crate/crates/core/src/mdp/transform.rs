//! Instance rewrites that keep every policy's value: fixing the initial
//! action, splitting terminals so that r' = 0, and moving action rewards
//! onto terminals.

use std::collections::HashSet;

use super::{point_mass, validate, ActionDecl, Distribution, MdpInstance, RewardDecl, StateDecl};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::mdp::UncertaintyKind;

pub const DEFAULT_SPLIT_CAP: usize = 10_000;

fn checked<F: Scalar>(instance: &MdpInstance<F>) -> Result<()> {
    let diags = validate(instance);
    if diags.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidInstance(diags))
    }
}

/// Keeps only action `action` at the initial state.
pub fn fix_initial_action<F: Scalar>(instance: &MdpInstance<F>, action: &str) -> Result<MdpInstance<F>> {
    let init = &instance.initial;
    if !instance.actions_of(init).any(|a| a.name == action) {
        return Err(Error::UnknownAction {
            state: init.clone(),
            action: action.to_string(),
        });
    }
    let mut out = instance.clone();
    out.actions.retain(|a| &a.state != init || a.name == action);
    out.action_rewards
        .retain(|r| &r.state != init || r.action == action);
    Ok(out)
}

/// [`normalize_alternative_rewards_with_cap`] with the default cap.
pub fn normalize_alternative_rewards<F: Scalar>(instance: &MdpInstance<F>) -> Result<MdpInstance<F>> {
    normalize_alternative_rewards_with_cap(instance, DEFAULT_SPLIT_CAP)
}

/// Rewrites a reward-uncertainty instance so that every deviation-capable
/// terminal has r' = 0.
///
/// A terminal with 0 < r' < r becomes h + 1 terminals `t~0 .. t~h`, with
/// h = ceil(r' / (r - r')), r(t~0) = (r - r')(h + 1), r(t~i) = (h + 1) r' / h,
/// and each incoming probability divided by h + 1. Terminals with r' = r are
/// marked certain. Nominal values are preserved for every policy; worst-case
/// values are preserved when k <= 1, since flipping `t~0` costs exactly the
/// original loss and dominates flipping any `t~i`.
pub fn normalize_alternative_rewards_with_cap<F: Scalar>(
    instance: &MdpInstance<F>,
    cap: usize,
) -> Result<MdpInstance<F>> {
    if instance.uncertainty.kind != UncertaintyKind::Reward {
        return Err(Error::WrongKind { expected: "reward" });
    }
    checked(instance)?;

    let mut splits: Vec<(String, usize, F, F)> = Vec::new();
    let mut total = 0usize;
    for t in instance.terminals() {
        let Some(r) = instance.reward_of(t) else { continue };
        match r.alternative {
            Some(alt) if alt > F::zero() && alt < r.nominal => {
                let ratio = (alt / (r.nominal - alt)).ceil();
                let h = ratio.to_usize().filter(|&h| h < cap).unwrap_or(cap);
                total = total.saturating_add(h + 1);
                splits.push((t.to_string(), h, r.nominal, alt));
            }
            _ => total = total.saturating_add(1),
        }
    }
    if total > cap {
        return Err(Error::SizeExplosion { needed: total, cap });
    }

    let mut out = instance.clone();
    for r in &mut out.rewards {
        if r.alternative == Some(r.nominal) {
            r.alternative = None;
        }
    }
    if splits.is_empty() {
        return Ok(out);
    }

    let split_ids: HashSet<&str> = splits.iter().map(|s| s.0.as_str()).collect();
    let stage = instance.horizon;
    out.states.retain(|s| !split_ids.contains(s.id.as_str()));
    out.rewards.retain(|r| !split_ids.contains(r.state.as_str()));
    for (t, h, r, alt) in &splits {
        let parts = F::of_usize(h + 1);
        for i in 0..=*h {
            let id = format!("{t}~{i}");
            let nominal = if i == 0 {
                (*r - *alt) * parts
            } else {
                parts / F::of_usize(*h) * *alt
            };
            out.states.push(StateDecl {
                id: id.clone(),
                stage,
            });
            out.rewards.push(RewardDecl {
                state: id,
                nominal,
                alternative: Some(F::zero()),
            });
        }
    }

    let split_of = |t: &str| splits.iter().find(|s| s.0 == t).map(|s| s.1);
    let rewrite = |d: &Distribution<F>| -> Distribution<F> {
        let mut nd = Distribution::new();
        for (k, &p) in d {
            match split_of(k) {
                Some(h) => {
                    let q = p / F::of_usize(h + 1);
                    for i in 0..=h {
                        nd.insert(format!("{k}~{i}"), q);
                    }
                }
                None => {
                    nd.insert(k.clone(), p);
                }
            }
        }
        nd
    };
    for a in &mut out.actions {
        a.nominal = rewrite(&a.nominal);
        for alt in &mut a.alternatives {
            *alt = rewrite(alt);
        }
    }
    Ok(out)
}

/// Replaces action rewards of a 2-stage instance by terminal rewards, using
/// split parameter `eps` in (0, 1).
///
/// Middle-stage actions first: every action `a` at a stage-1 state `s` sends
/// mass `eps` to a new certain terminal `s.a` paying r(a) / eps, the rest of
/// its mass is scaled by 1 - eps and original terminal rewards are scaled by
/// 1 / (1 - eps). Then, if initial actions carry rewards, each initial action
/// gets a stage-1 pass-through state leading to its own reward terminal, and
/// all other terminal rewards are scaled once more. Every action of a stage
/// is rewritten, even one without a reward, so that all paths are scaled
/// alike.
pub fn lift_action_rewards<F: Scalar>(instance: &MdpInstance<F>, eps: F) -> Result<MdpInstance<F>> {
    if !(eps > F::zero() && eps < F::one()) {
        return Err(Error::OutOfRange(format!("split parameter {eps} not in (0, 1)")));
    }
    checked(instance)?;
    let positive: Vec<_> = instance
        .action_rewards
        .iter()
        .filter(|r| r.reward > F::zero())
        .collect();
    if positive.is_empty() {
        let mut out = instance.clone();
        out.action_rewards.clear();
        return Ok(out);
    }
    if instance.horizon != 2 {
        return Err(Error::UnsupportedShape(format!(
            "action rewards can only be lifted for horizon 2, got {}",
            instance.horizon
        )));
    }
    let reward_of = |state: &str, action: &str| -> F {
        instance
            .action_rewards
            .iter()
            .filter(|r| r.state == state && r.action == action)
            .map(|r| r.reward)
            .sum()
    };
    let keep = F::one() - eps;
    let mut out = instance.clone();
    out.action_rewards.clear();
    let taken: HashSet<String> = instance.states.iter().map(|s| s.id.clone()).collect();
    let fresh = |base: String| -> String {
        let mut id = base;
        while taken.contains(&id) {
            id.push('\'');
        }
        id
    };

    let scale_terminals = |out: &mut MdpInstance<F>| {
        for r in &mut out.rewards {
            r.nominal = r.nominal / keep;
            r.alternative = r.alternative.map(|a| a / keep);
        }
    };
    let divert = |d: &Distribution<F>, to: &str| -> Distribution<F> {
        let mut nd: Distribution<F> = d.iter().map(|(k, &p)| (k.clone(), p * keep)).collect();
        nd.insert(to.to_string(), eps);
        nd
    };

    let middle_rewarded = positive
        .iter()
        .any(|r| instance.stage_of(&r.state) == Some(1));
    if middle_rewarded {
        scale_terminals(&mut out);
        let mut added = Vec::new();
        for a in &mut out.actions {
            if instance.stage_of(&a.state) != Some(1) {
                continue;
            }
            let sink = fresh(format!("{}.{}", a.state, a.name));
            a.nominal = divert(&a.nominal, &sink);
            for alt in &mut a.alternatives {
                *alt = divert(alt, &sink);
            }
            added.push((sink, reward_of(&a.state, &a.name) / eps));
        }
        for (sink, r) in added {
            out.add_state(sink.clone(), 2);
            out.rewards.push(RewardDecl {
                state: sink,
                nominal: r,
                alternative: None,
            });
        }
    }

    let initial_rewarded = positive.iter().any(|r| r.state == instance.initial);
    if initial_rewarded {
        scale_terminals(&mut out);
        let mut added = Vec::new();
        for a in &mut out.actions {
            if a.state != instance.initial {
                continue;
            }
            let sink = fresh(format!("{}.{}", a.state, a.name));
            let via = fresh(format!("{}.{}.via", a.state, a.name));
            a.nominal = divert(&a.nominal, &via);
            for alt in &mut a.alternatives {
                *alt = divert(alt, &via);
            }
            added.push((via, sink, reward_of(&a.state, &a.name) / eps));
        }
        for (via, sink, r) in added {
            out.add_state(via.clone(), 1).add_state(sink.clone(), 2);
            out.actions.push(ActionDecl {
                state: via,
                name: "go".to_string(),
                nominal: point_mass(&sink),
                alternatives: Vec::new(),
            });
            out.rewards.push(RewardDecl {
                state: sink,
                nominal: r,
                alternative: None,
            });
        }
    }
    Ok(out)
}
