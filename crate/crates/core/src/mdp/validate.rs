use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Distribution, MdpInstance, UncertaintyKind};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiagnosticKind {
    DuplicateState,
    StageOutOfRange,
    UnknownState,
    InitialState,
    TerminalHasActions,
    MissingActions,
    DuplicateAction,
    BadProbability,
    Support,
    ProbabilityMass,
    MissingReward,
    DuplicateReward,
    RewardPlacement,
    NegativeReward,
    AlternativeReward,
    UnexpectedAlternatives,
    ActionReward,
    BudgetExceedsSites,
}

impl DiagnosticKind {
    pub fn label(self) -> &'static str {
        match self {
            DiagnosticKind::DuplicateState => "duplicate state",
            DiagnosticKind::StageOutOfRange => "stage out of range",
            DiagnosticKind::UnknownState => "unknown state",
            DiagnosticKind::InitialState => "initial state",
            DiagnosticKind::TerminalHasActions => "terminal has actions",
            DiagnosticKind::MissingActions => "missing actions",
            DiagnosticKind::DuplicateAction => "duplicate action",
            DiagnosticKind::BadProbability => "bad probability",
            DiagnosticKind::Support => "support outside next stage",
            DiagnosticKind::ProbabilityMass => "probability mass",
            DiagnosticKind::MissingReward => "missing reward",
            DiagnosticKind::DuplicateReward => "duplicate reward",
            DiagnosticKind::RewardPlacement => "reward on non-terminal",
            DiagnosticKind::NegativeReward => "negative reward",
            DiagnosticKind::AlternativeReward => "alternative reward",
            DiagnosticKind::UnexpectedAlternatives => "unexpected alternatives",
            DiagnosticKind::ActionReward => "action reward",
            DiagnosticKind::BudgetExceedsSites => "budget exceeds sites",
        }
    }
}

/// One violated instance invariant.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Diagnostic {
    /// State id the problem is attached to (or a top-level key such as
    /// `uncertainty`).
    pub location: String,
    pub kind: DiagnosticKind,
    pub detail: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.location, self.kind.label(), self.detail)
    }
}

struct Collector(Vec<Diagnostic>);

impl Collector {
    fn push(&mut self, location: &str, kind: DiagnosticKind, detail: String) {
        self.0.push(Diagnostic {
            location: location.to_string(),
            kind,
            detail,
        });
    }
}

/// Returns every violated invariant, sorted by location then kind. Empty
/// iff the instance is valid.
pub fn validate<F: Scalar>(instance: &MdpInstance<F>) -> Vec<Diagnostic> {
    use DiagnosticKind::*;

    let mut out = Collector(Vec::new());
    let horizon = instance.horizon;
    let tol = F::mass_tol();

    let mut stage: BTreeMap<&str, usize> = BTreeMap::new();
    for s in &instance.states {
        if stage.insert(s.id.as_str(), s.stage).is_some() {
            out.push(&s.id, DuplicateState, "declared more than once".into());
        }
        if s.stage > horizon {
            out.push(
                &s.id,
                StageOutOfRange,
                format!("stage {} beyond horizon {}", s.stage, horizon),
            );
        }
    }

    match stage.get(instance.initial.as_str()) {
        None => out.push(&instance.initial, InitialState, "initial state not declared".into()),
        Some(&st) if st != 0 => {
            out.push(&instance.initial, InitialState, format!("initial state at stage {st}"))
        }
        _ => {}
    }
    for s in &instance.states {
        if s.stage == 0 && s.id != instance.initial {
            out.push(&s.id, InitialState, "second stage-0 state".into());
        }
    }

    let mut names: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut transition_sites = 0usize;
    for a in &instance.actions {
        let Some(&st) = stage.get(a.state.as_str()) else {
            out.push(&a.state, UnknownState, format!("action `{}` on undeclared state", a.name));
            continue;
        };
        if st >= horizon {
            out.push(&a.state, TerminalHasActions, format!("action `{}`", a.name));
            continue;
        }
        if !names.entry(a.state.as_str()).or_default().insert(a.name.as_str()) {
            out.push(&a.state, DuplicateAction, format!("action `{}`", a.name));
        }
        check_distribution(&mut out, &stage, &a.state, &a.name, "nominal", &a.nominal, st, tol);
        for (i, alt) in a.alternatives.iter().enumerate() {
            let label = format!("alternative {i}");
            check_distribution(&mut out, &stage, &a.state, &a.name, &label, alt, st, tol);
        }
        if !a.alternatives.is_empty() {
            transition_sites += 1;
            if instance.uncertainty.kind == UncertaintyKind::Reward {
                out.push(
                    &a.state,
                    UnexpectedAlternatives,
                    format!("action `{}` has alternative distributions under reward uncertainty", a.name),
                );
            }
        }
    }
    for s in &instance.states {
        if s.stage < horizon && !names.contains_key(s.id.as_str()) {
            out.push(&s.id, MissingActions, "non-terminal state without actions".into());
        }
    }

    let mut rewarded: BTreeSet<&str> = BTreeSet::new();
    let mut reward_sites = 0usize;
    for r in &instance.rewards {
        match stage.get(r.state.as_str()) {
            None => {
                out.push(&r.state, UnknownState, "reward on undeclared state".into());
                continue;
            }
            Some(&st) if st != horizon => {
                out.push(&r.state, RewardPlacement, format!("state at stage {st}"));
                continue;
            }
            _ => {}
        }
        if !rewarded.insert(r.state.as_str()) {
            out.push(&r.state, DuplicateReward, "reward declared more than once".into());
            continue;
        }
        if !r.nominal.is_finite() || r.nominal < F::zero() {
            out.push(&r.state, NegativeReward, format!("nominal reward {}", r.nominal));
        }
        match (instance.uncertainty.kind, r.alternative) {
            (UncertaintyKind::Reward, Some(alt)) => {
                if !alt.is_finite() || alt < F::zero() || alt > r.nominal {
                    out.push(
                        &r.state,
                        AlternativeReward,
                        format!("alternative {} outside [0, {}]", alt, r.nominal),
                    );
                } else if alt < r.nominal {
                    reward_sites += 1;
                }
            }
            (UncertaintyKind::Transition, Some(alt)) => out.push(
                &r.state,
                AlternativeReward,
                format!("alternative {alt} under transition uncertainty"),
            ),
            (_, None) => {}
        }
    }
    for s in &instance.states {
        if s.stage == horizon && !rewarded.contains(s.id.as_str()) {
            out.push(&s.id, MissingReward, "terminal without reward".into());
        }
    }

    for ar in &instance.action_rewards {
        let known = names
            .get(ar.state.as_str())
            .is_some_and(|set| set.contains(ar.action.as_str()));
        if !known {
            out.push(&ar.state, ActionReward, format!("unknown action `{}`", ar.action));
        } else if !ar.reward.is_finite() || ar.reward < F::zero() {
            out.push(&ar.state, ActionReward, format!("negative reward {}", ar.reward));
        }
    }

    let sites = match instance.uncertainty.kind {
        UncertaintyKind::Reward => reward_sites,
        UncertaintyKind::Transition => transition_sites,
    };
    if instance.uncertainty.budget > sites {
        out.push(
            "uncertainty",
            BudgetExceedsSites,
            format!("budget {} but only {} deviation-capable sites", instance.uncertainty.budget, sites),
        );
    }

    let mut diags = out.0;
    diags.sort();
    diags
}

#[allow(clippy::too_many_arguments)]
fn check_distribution<F: Scalar>(
    out: &mut Collector,
    stage: &BTreeMap<&str, usize>,
    state: &str,
    action: &str,
    label: &str,
    dist: &Distribution<F>,
    from_stage: usize,
    tol: F,
) {
    use DiagnosticKind::*;

    let mut total = F::zero();
    for (target, &p) in dist {
        if !p.is_finite() || p < F::zero() {
            out.push(state, BadProbability, format!("action `{action}` {label}: p({target}) = {p}"));
            continue;
        }
        total = total + p;
        match stage.get(target.as_str()) {
            None => out.push(
                state,
                UnknownState,
                format!("action `{action}` {label} targets undeclared `{target}`"),
            ),
            Some(&st) if st != from_stage + 1 && p > F::zero() => out.push(
                state,
                Support,
                format!("action `{action}` {label} targets `{target}` at stage {st}"),
            ),
            _ => {}
        }
    }
    if (total - F::one()).abs() > tol {
        out.push(
            state,
            ProbabilityMass,
            format!("action `{action}` {label} sums to {total}"),
        );
    }
}
