use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::{MdpInstance, Uncertainty, UncertaintyKind};

/// A DAG whose vertices are split into layers V_1..V_T with arcs only from
/// one layer to the next; V_1 holds exactly the sources and V_T exactly the
/// sinks of the (source, sink) pairs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeredDigraph {
    pub layers: Vec<Vec<String>>,
    pub arcs: Vec<(String, String)>,
    pub pairs: Vec<(String, String)>,
}

/// Arbitrary DAG with (source, sink) pairs, the input of [`layerize`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Digraph {
    #[serde(default)]
    pub vertices: Vec<String>,
    pub arcs: Vec<(String, String)>,
    pub pairs: Vec<(String, String)>,
}

fn gen_err(msg: impl Into<String>) -> Error {
    Error::Generator(msg.into())
}

impl LayeredDigraph {
    pub fn check(&self) -> Result<()> {
        if self.pairs.is_empty() {
            return Err(gen_err("no source/sink pairs"));
        }
        if self.layers.len() < 2 {
            return Err(gen_err("need at least two layers"));
        }
        let mut layer_of = HashMap::new();
        for (i, layer) in self.layers.iter().enumerate() {
            for v in layer {
                if layer_of.insert(v.as_str(), i).is_some() {
                    return Err(gen_err(format!("vertex `{v}` appears twice")));
                }
            }
        }
        let sources: BTreeSet<&str> = self.pairs.iter().map(|p| p.0.as_str()).collect();
        let sinks: BTreeSet<&str> = self.pairs.iter().map(|p| p.1.as_str()).collect();
        if sources.len() != self.pairs.len() || sinks.len() != self.pairs.len() {
            return Err(gen_err("sources and sinks must be distinct"));
        }
        let first: BTreeSet<&str> = self.layers[0].iter().map(String::as_str).collect();
        let last: BTreeSet<&str> = self.layers.last().expect("two layers").iter().map(String::as_str).collect();
        if first != sources {
            return Err(gen_err("first layer must hold exactly the sources"));
        }
        if last != sinks {
            return Err(gen_err("last layer must hold exactly the sinks"));
        }
        let mut has_out = BTreeSet::new();
        for (u, v) in &self.arcs {
            let (Some(&a), Some(&b)) = (layer_of.get(u.as_str()), layer_of.get(v.as_str())) else {
                return Err(gen_err(format!("arc ({u}, {v}) uses an unknown vertex")));
            };
            if b != a + 1 {
                return Err(gen_err(format!("arc ({u}, {v}) does not join consecutive layers")));
            }
            has_out.insert(u.as_str());
        }
        let t = self.layers.len();
        for layer in &self.layers[..t - 1] {
            if let Some(v) = layer.iter().find(|v| !has_out.contains(v.as_str())) {
                return Err(gen_err(format!("vertex `{v}` has no outgoing arc")));
            }
        }
        Ok(())
    }

    fn successors(&self) -> BTreeMap<&str, BTreeSet<&str>> {
        let mut succ: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for (u, v) in &self.arcs {
            succ.entry(u.as_str()).or_default().insert(v.as_str());
        }
        succ
    }
}

/// Orders a DAG into layers: arcs into sources and out of sinks are dropped
/// (no path of a disjoint system can use them), vertices off every
/// source-to-sink route are removed, vertices are placed at their longest
/// distance from the sources with all sinks on the last layer, and arcs that
/// skip layers are subdivided by vertices `via_<u>_<v>_<layer>`.
pub fn layerize(g: &Digraph) -> Result<LayeredDigraph> {
    let sources: BTreeSet<&str> = g.pairs.iter().map(|p| p.0.as_str()).collect();
    let sinks: BTreeSet<&str> = g.pairs.iter().map(|p| p.1.as_str()).collect();
    if g.pairs.is_empty() || sources.len() != g.pairs.len() || sinks.len() != g.pairs.len() {
        return Err(gen_err("pairs must have distinct sources and distinct sinks"));
    }
    if sources.intersection(&sinks).next().is_some() {
        return Err(gen_err("a vertex cannot be both a source and a sink"));
    }
    let arcs: BTreeSet<(&str, &str)> = g
        .arcs
        .iter()
        .map(|(u, v)| (u.as_str(), v.as_str()))
        .filter(|(u, v)| !sources.contains(v) && !sinks.contains(u))
        .collect();
    if arcs.iter().any(|(u, v)| u == v) {
        return Err(gen_err("self-loop in a DAG"));
    }
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut pred: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for &(u, v) in &arcs {
        succ.entry(u).or_default().push(v);
        pred.entry(v).or_default().push(u);
    }
    let reach = |start: &BTreeSet<&str>, adj: &BTreeMap<&str, Vec<&str>>| -> BTreeSet<String> {
        let mut seen: BTreeSet<String> = start.iter().map(|s| s.to_string()).collect();
        let mut stack: Vec<String> = seen.iter().cloned().collect();
        while let Some(x) = stack.pop() {
            for &y in adj.get(x.as_str()).into_iter().flatten() {
                if seen.insert(y.to_string()) {
                    stack.push(y.to_string());
                }
            }
        }
        seen
    };
    let forward = reach(&sources, &succ);
    let backward = reach(&sinks, &pred);
    let keep = |v: &str| sinks.contains(v) || (forward.contains(v) && backward.contains(v));
    for s in &sources {
        if !backward.contains(*s) {
            return Err(gen_err(format!("source `{s}` cannot reach any sink")));
        }
    }
    let kept_arcs: Vec<(&str, &str)> = arcs
        .iter()
        .copied()
        .filter(|&(u, v)| keep(u) && keep(v))
        .collect();

    // longest distance from the sources, Kahn order
    let mut vertices: BTreeSet<&str> = sources.iter().copied().chain(sinks.iter().copied()).collect();
    for &(u, v) in &kept_arcs {
        vertices.insert(u);
        vertices.insert(v);
    }
    let mut indeg: BTreeMap<&str, usize> = vertices.iter().map(|&v| (v, 0)).collect();
    let mut out: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for &(u, v) in &kept_arcs {
        *indeg.get_mut(v).expect("vertex") += 1;
        out.entry(u).or_default().push(v);
    }
    let mut level: BTreeMap<&str, usize> = vertices.iter().map(|&v| (v, 0)).collect();
    let mut ready: Vec<&str> = vertices.iter().copied().filter(|v| indeg[v] == 0).collect();
    let mut done = 0;
    while let Some(u) = ready.pop() {
        done += 1;
        for &v in out.get(u).into_iter().flatten() {
            let l = level[u] + 1;
            if l > level[v] {
                level.insert(v, l);
            }
            let d = indeg.get_mut(v).expect("vertex");
            *d -= 1;
            if *d == 0 {
                ready.push(v);
            }
        }
    }
    if done != vertices.len() {
        return Err(gen_err("graph has a directed cycle"));
    }
    let last = vertices.iter().map(|v| level[v]).max().unwrap_or(0).max(1);
    for s in &sinks {
        level.insert(s, last);
    }

    let mut layers: Vec<Vec<String>> = vec![Vec::new(); last + 1];
    for &v in &vertices {
        layers[level[v]].push(v.to_string());
    }
    let mut new_arcs = Vec::new();
    for &(u, v) in &kept_arcs {
        let (a, b) = (level[u], level[v]);
        let mut prev = u.to_string();
        for l in a + 1..b {
            let via = format!("via_{u}_{v}_{}", l + 1);
            layers[l].push(via.clone());
            new_arcs.push((prev, via.clone()));
            prev = via;
        }
        new_arcs.push((prev, v.to_string()));
    }
    for layer in &mut layers {
        layer.sort();
    }
    let out = LayeredDigraph {
        layers,
        arcs: new_arcs,
        pairs: g.pairs.clone(),
    };
    out.check()?;
    Ok(out)
}

/// The disjoint-paths instance: s0 enters source s_i with probability
/// eps^i / delta (delta = sum_i eps^i), every vertex chooses one outgoing
/// arc, sink t_i pays delta / eps^i and can drop to 0, and k = l - 1.
/// The best worst case is 1 if the pairs can be joined by vertex-disjoint
/// paths and at most eps otherwise.
pub fn gen_disjoint_paths(g: &LayeredDigraph, eps: f64) -> Result<MdpInstance<f64>> {
    g.check()?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(gen_err(format!("epsilon {eps} not in (0, 1)")));
    }
    if g.layers.iter().flatten().any(|v| v == "s0") {
        return Err(gen_err("vertex id `s0` is reserved for the initial state"));
    }
    let ell = g.pairs.len();
    let powers: Vec<f64> = (1..=ell as i32).map(|i| eps.powi(i)).collect();
    let delta: f64 = powers.iter().sum();
    let horizon = g.layers.len();
    let mut m = MdpInstance::new(
        horizon,
        "s0",
        Uncertainty {
            kind: UncertaintyKind::Reward,
            budget: ell - 1,
        },
    );
    m.add_state("s0", 0);
    for (i, layer) in g.layers.iter().enumerate() {
        for v in layer {
            m.add_state(v.clone(), i + 1);
        }
    }
    m.add_action(
        "s0",
        "a0",
        g.pairs
            .iter()
            .zip(&powers)
            .map(|((s, _), &p)| (s.clone(), p / delta)),
    );
    for (u, targets) in g.successors() {
        for v in targets {
            m.add_action(u, &format!("a_{v}"), [(v.to_string(), 1.0)]);
        }
    }
    for ((_, t), &p) in g.pairs.iter().zip(&powers) {
        m.add_reward(t, delta / p, Some(0.0));
    }
    Ok(m)
}

/// Whether every pair can be joined by pairwise vertex-disjoint paths, by
/// exhaustive search.
pub fn disjoint_paths_exist(g: &LayeredDigraph) -> bool {
    let succ = g.successors();
    fn route<'a>(
        i: usize,
        pairs: &'a [(String, String)],
        succ: &BTreeMap<&'a str, BTreeSet<&'a str>>,
        used: &mut BTreeSet<&'a str>,
    ) -> bool {
        if i == pairs.len() {
            return true;
        }
        let (s, t) = (&pairs[i].0, &pairs[i].1);
        if used.contains(s.as_str()) {
            return false;
        }
        used.insert(s.as_str());
        let found = walk(s.as_str(), t.as_str(), i, pairs, succ, used);
        used.remove(s.as_str());
        found
    }
    fn walk<'a>(
        at: &'a str,
        target: &'a str,
        i: usize,
        pairs: &'a [(String, String)],
        succ: &BTreeMap<&'a str, BTreeSet<&'a str>>,
        used: &mut BTreeSet<&'a str>,
    ) -> bool {
        if at == target {
            return route(i + 1, pairs, succ, used);
        }
        for &next in succ.get(at).into_iter().flatten() {
            if used.contains(next) {
                continue;
            }
            used.insert(next);
            let ok = walk(next, target, i, pairs, succ, used);
            used.remove(next);
            if ok {
                return true;
            }
        }
        false
    }
    let mut used = BTreeSet::new();
    route(0, &g.pairs, &succ, &mut used)
}

/// Three source/sink pairs on three layers; the routes for pairs 1 and 3
/// both need vertex v, so the graph is not routable.
pub fn three_pairs_graph() -> LayeredDigraph {
    let s = |x: &str| x.to_string();
    LayeredDigraph {
        layers: vec![
            vec![s("s1"), s("s2"), s("s3")],
            vec![s("u"), s("v"), s("w")],
            vec![s("t1"), s("t2"), s("t3")],
        ],
        arcs: [
            ("s1", "u"),
            ("s1", "v"),
            ("s2", "u"),
            ("s2", "w"),
            ("s3", "v"),
            ("u", "t2"),
            ("v", "t3"),
            ("v", "t1"),
            ("w", "t2"),
        ]
        .iter()
        .map(|&(a, b)| (s(a), s(b)))
        .collect(),
        pairs: vec![(s("s1"), s("t1")), (s("s2"), s("t2")), (s("s3"), s("t3"))],
    }
}
