//! Builds strictly staged instances from a DAG of states: stages are
//! longest-path levels from the initial state, every terminal sits on the
//! last stage, and arcs spanning several stages go through chains of
//! single-action pass-through states `via_<from>_<to>_<stage>`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::mdp::{ActionDecl, Distribution, MdpInstance, Uncertainty};

pub(crate) struct DagAction {
    pub state: String,
    pub name: String,
    pub nominal: Vec<(String, f64)>,
    pub alternatives: Vec<Vec<(String, f64)>>,
}

pub(crate) struct DagMdp {
    pub initial: String,
    /// Declared states in output order; terminals are the ones without actions.
    pub states: Vec<String>,
    pub actions: Vec<DagAction>,
    /// (terminal, r, r')
    pub rewards: Vec<(String, f64, Option<f64>)>,
    pub uncertainty: Uncertainty,
}

impl DagMdp {
    pub fn new(initial: &str, uncertainty: Uncertainty) -> Self {
        DagMdp {
            initial: initial.to_string(),
            states: vec![initial.to_string()],
            actions: Vec::new(),
            rewards: Vec::new(),
            uncertainty,
        }
    }

    pub fn state(&mut self, id: impl Into<String>) -> &mut Self {
        self.states.push(id.into());
        self
    }

    pub fn action(&mut self, state: &str, name: &str, nominal: Vec<(String, f64)>) -> &mut Self {
        self.actions.push(DagAction {
            state: state.to_string(),
            name: name.to_string(),
            nominal,
            alternatives: Vec::new(),
        });
        self
    }

    /// Uncertain-deterministic action: nominally to `to`, alternatively to
    /// any of `alternatives`.
    pub fn uncertain(&mut self, state: &str, name: &str, to: &str, alternatives: &[&str]) -> &mut Self {
        self.actions.push(DagAction {
            state: state.to_string(),
            name: name.to_string(),
            nominal: vec![(to.to_string(), 1.0)],
            alternatives: alternatives
                .iter()
                .map(|z| vec![(z.to_string(), 1.0)])
                .collect(),
        });
        self
    }

    pub fn reward(&mut self, state: &str, r: f64, alt: Option<f64>) -> &mut Self {
        self.rewards.push((state.to_string(), r, alt));
        self
    }

    pub fn build(&self) -> Result<MdpInstance<f64>> {
        let known: BTreeSet<&str> = self.states.iter().map(String::as_str).collect();
        if known.len() != self.states.len() {
            return Err(Error::Generator("duplicate state id".into()));
        }
        let mut succ: HashMap<&str, BTreeSet<&str>> = HashMap::new();
        for a in &self.actions {
            for (to, p) in a.nominal.iter().chain(a.alternatives.iter().flatten()) {
                if !known.contains(to.as_str()) {
                    return Err(Error::Generator(format!("unknown state `{to}`")));
                }
                if *p > 0.0 {
                    succ.entry(a.state.as_str()).or_default().insert(to.as_str());
                }
            }
        }

        // longest-path levels by repeated relaxation in topological order
        let mut indeg: HashMap<&str, usize> = known.iter().map(|&s| (s, 0)).collect();
        for targets in succ.values() {
            for t in targets {
                *indeg.get_mut(t).expect("known") += 1;
            }
        }
        let mut ready: Vec<&str> = known.iter().copied().filter(|s| indeg[s] == 0).collect();
        let mut level: HashMap<&str, usize> = known.iter().map(|&s| (s, 0)).collect();
        let mut seen = 0;
        while let Some(s) = ready.pop() {
            seen += 1;
            if let Some(targets) = succ.get(s) {
                for &t in targets {
                    let l = level[s] + 1;
                    if l > level[t] {
                        level.insert(t, l);
                    }
                    let d = indeg.get_mut(t).expect("known");
                    *d -= 1;
                    if *d == 0 {
                        ready.push(t);
                    }
                }
            }
        }
        if seen != known.len() {
            return Err(Error::Generator("transition graph has a cycle".into()));
        }
        let has_actions: BTreeSet<&str> = self.actions.iter().map(|a| a.state.as_str()).collect();
        let horizon = known
            .iter()
            .map(|s| level[s] + usize::from(has_actions.contains(s)))
            .max()
            .unwrap_or(0);
        let stage = |s: &str| -> usize {
            if has_actions.contains(s) {
                level[s]
            } else {
                horizon
            }
        };

        let mut m = MdpInstance::new(horizon, self.initial.clone(), self.uncertainty);
        for s in &self.states {
            m.add_state(s.clone(), stage(s));
        }
        let mut chains: BTreeMap<(String, String), String> = BTreeMap::new();
        let mut chain_states: Vec<(String, usize)> = Vec::new();
        let mut chain_actions: Vec<ActionDecl<f64>> = Vec::new();
        let mut hop = |from: &str, to: &str| -> String {
            let (a, b) = (stage(from), stage(to));
            if b == a + 1 {
                return to.to_string();
            }
            chains
                .entry((from.to_string(), to.to_string()))
                .or_insert_with(|| {
                    let ids: Vec<String> = (a + 1..b).map(|l| format!("via_{from}_{to}_{l}")).collect();
                    for (i, id) in ids.iter().enumerate() {
                        chain_states.push((id.clone(), a + 1 + i));
                        let next = ids.get(i + 1).cloned().unwrap_or_else(|| to.to_string());
                        let mut d = Distribution::new();
                        d.insert(next, 1.0);
                        chain_actions.push(ActionDecl {
                            state: id.clone(),
                            name: "a".to_string(),
                            nominal: d,
                            alternatives: Vec::new(),
                        });
                    }
                    ids[0].clone()
                })
                .clone()
        };
        let mut out_actions = Vec::new();
        for a in &self.actions {
            let convert = |d: &[(String, f64)], hop: &mut dyn FnMut(&str, &str) -> String| {
                let mut out = Distribution::new();
                for (to, p) in d {
                    let key = hop(&a.state, to);
                    *out.entry(key).or_insert(0.0) += p;
                }
                out
            };
            let nominal = convert(&a.nominal, &mut hop);
            let alternatives = a.alternatives.iter().map(|d| convert(d, &mut hop)).collect();
            out_actions.push(ActionDecl {
                state: a.state.clone(),
                name: a.name.clone(),
                nominal,
                alternatives,
            });
        }
        for (id, s) in chain_states {
            m.add_state(id, s);
        }
        m.actions = out_actions;
        m.actions.extend(chain_actions);
        for (t, r, alt) in &self.rewards {
            m.add_reward(t, *r, *alt);
        }
        let diags = crate::mdp::validate(&m);
        if !diags.is_empty() {
            return Err(Error::InvalidInstance(diags));
        }
        Ok(m)
    }
}
