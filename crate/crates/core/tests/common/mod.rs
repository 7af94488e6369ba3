//! Independent brute-force evaluators and shared corpora for the
//! integration tests. Nothing here goes through the indexed model.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use ldst::mdp::{DeterministicPolicy, MdpInstance, UncertaintyKind};
use ldst::reductions::{three_pairs_graph, layerize, CnfFormula, Digraph, LayeredDigraph, PartitionedGraph, RandomSpec};

pub fn s(x: &str) -> String {
    x.to_string()
}

pub fn pairs(list: &[(&str, &str)]) -> Vec<(String, String)> {
    list.iter().map(|&(a, b)| (s(a), s(b))).collect()
}

/// Every deterministic policy, by recursion over non-terminal states.
pub fn all_policies(m: &MdpInstance<f64>) -> Vec<DeterministicPolicy> {
    let mut states: Vec<&str> = m
        .states
        .iter()
        .filter(|x| x.stage < m.horizon)
        .map(|x| x.id.as_str())
        .collect();
    states.sort();
    let mut out = vec![DeterministicPolicy::new()];
    for st in states {
        let names: Vec<&str> = m.actions.iter().filter(|a| a.state == st).map(|a| a.name.as_str()).collect();
        out = out
            .into_iter()
            .flat_map(|p| names.iter().map(move |&a| p.clone().with(st, a)))
            .collect();
    }
    out
}

/// Visit probability of every state when the played action of each state
/// in `deviate` uses the given alternative distribution.
pub fn visits(m: &MdpInstance<f64>, pi: &DeterministicPolicy, deviate: &BTreeMap<String, usize>) -> BTreeMap<String, f64> {
    let mut mass: BTreeMap<String, f64> = BTreeMap::new();
    mass.insert(m.initial.clone(), 1.0);
    for stage in 0..m.horizon {
        for st in m.states.iter().filter(|x| x.stage == stage) {
            let p = mass.get(&st.id).copied().unwrap_or(0.0);
            if p == 0.0 {
                continue;
            }
            let name = pi.action(&st.id).expect("policy is total");
            let a = m.actions.iter().find(|a| a.state == st.id && a.name == name).expect("action exists");
            let dist = match deviate.get(&st.id) {
                Some(&k) => &a.alternatives[k],
                None => &a.nominal,
            };
            for (t, q) in dist {
                *mass.entry(t.clone()).or_insert(0.0) += p * q;
            }
        }
    }
    mass
}

fn action_part(m: &MdpInstance<f64>, pi: &DeterministicPolicy, mass: &BTreeMap<String, f64>) -> f64 {
    m.action_rewards
        .iter()
        .filter(|r| pi.action(&r.state) == Some(r.action.as_str()))
        .map(|r| mass.get(&r.state).copied().unwrap_or(0.0) * r.reward)
        .sum()
}

/// Expected reward with terminal rewards `r`, action rewards included.
fn value(m: &MdpInstance<f64>, pi: &DeterministicPolicy, mass: &BTreeMap<String, f64>, flipped: &BTreeSet<&str>) -> f64 {
    let terminal: f64 = m
        .rewards
        .iter()
        .map(|r| {
            let rr = if flipped.contains(r.state.as_str()) {
                r.alternative.unwrap_or(r.nominal)
            } else {
                r.nominal
            };
            mass.get(&r.state).copied().unwrap_or(0.0) * rr
        })
        .sum();
    terminal + action_part(m, pi, mass)
}

pub fn nominal(m: &MdpInstance<f64>, pi: &DeterministicPolicy) -> f64 {
    let mass = visits(m, pi, &BTreeMap::new());
    value(m, pi, &mass, &BTreeSet::new())
}

fn subsets<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out = vec![vec![]];
    for x in items {
        let grown: Vec<Vec<T>> = out
            .iter()
            .filter(|c| c.len() < k)
            .map(|c| {
                let mut c = c.clone();
                c.push(x.clone());
                c
            })
            .collect();
        out.extend(grown);
    }
    out
}

/// Worst case by trying every admissible scenario.
pub fn worst(m: &MdpInstance<f64>, pi: &DeterministicPolicy) -> f64 {
    let k = m.uncertainty.budget;
    match m.uncertainty.kind {
        UncertaintyKind::Reward => {
            let mass = visits(m, pi, &BTreeMap::new());
            let terminals: Vec<&str> = m.rewards.iter().map(|r| r.state.as_str()).collect();
            subsets(&terminals, k)
                .iter()
                .map(|c| value(m, pi, &mass, &c.iter().copied().collect()))
                .fold(f64::INFINITY, f64::min)
        }
        UncertaintyKind::Transition => {
            let sites: Vec<(String, usize)> = m
                .actions
                .iter()
                .filter(|a| pi.action(&a.state) == Some(a.name.as_str()))
                .map(|a| (a.state.clone(), a.alternatives.len()))
                .filter(|x| x.1 > 0)
                .collect();
            let mut best = f64::INFINITY;
            for c in subsets(&sites, k) {
                let mut choice = vec![0usize; c.len()];
                loop {
                    let dev = c.iter().zip(&choice).map(|((st, _), &j)| (st.clone(), j)).collect();
                    let mass = visits(m, pi, &dev);
                    best = best.min(value(m, pi, &mass, &BTreeSet::new()));
                    let mut i = 0;
                    while i < c.len() {
                        choice[i] += 1;
                        if choice[i] < c[i].1 {
                            break;
                        }
                        choice[i] = 0;
                        i += 1;
                    }
                    if i == c.len() {
                        break;
                    }
                }
            }
            best
        }
    }
}

/// Best worst case over all policies.
pub fn optimum(m: &MdpInstance<f64>) -> f64 {
    all_policies(m).iter().map(|p| worst(m, p)).fold(f64::NEG_INFINITY, f64::max)
}

pub fn random_spec(seed: u64) -> RandomSpec {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    RandomSpec {
        s1_count: rng.gen_range(1..=6),
        s2_count: rng.gen_range(1..=5),
        actions_per_state: rng.gen_range(1..=3),
        reward_range: (0.0, 10.0),
        seed,
    }
}

/// Equal-sum grouping by trying every assignment of items to n bins.
pub fn groups_exist(b: &[u64], big_b: u64) -> bool {
    let n = b.len() / 3;
    let total = (n as u64).pow(b.len() as u32);
    (0..total).any(|mut code| {
        let mut bins = vec![0u64; n];
        for &x in b {
            bins[(code % n as u64) as usize] += x;
            code /= n as u64;
        }
        bins.iter().all(|&x| x == big_b)
    })
}

pub type PartitionCase = (&'static [u64], u64);

pub const PARTITION_YES: &[PartitionCase] = &[
    (&[1, 1, 1, 1, 1, 1], 3),
    (&[1, 2, 3, 1, 2, 3], 6),
    (&[2, 2, 3, 1, 3, 1], 6),
    (&[1, 1, 1, 1, 4, 4], 6),
    (&[1, 2, 3, 1, 2, 3, 1, 2, 3], 6),
    (&[3, 3, 4, 2, 4, 4, 5, 1, 4], 10),
];

pub const PARTITION_NO: &[PartitionCase] = &[
    (&[1, 1, 1, 1, 1, 7], 6),
    (&[2, 2, 2, 2, 2, 4], 7),
    (&[3, 3, 3, 3, 3, 5], 10),
    (&[4, 4, 4, 4, 4, 6], 13),
    (&[1, 1, 1, 1, 1, 1, 1, 1, 10], 6),
];

pub fn three_pairs_routable() -> LayeredDigraph {
    let mut g = three_pairs_graph();
    g.arcs.retain(|a| a != &(s("v"), s("t1")));
    g.arcs.push((s("u"), s("t1")));
    g.arcs.push((s("s2"), s("w")));
    g
}

pub fn layered_corpus() -> Vec<LayeredDigraph> {
    let dag = |arcs: &[(&str, &str)], ps: &[(&str, &str)]| {
        layerize(&Digraph {
            vertices: vec![],
            arcs: pairs(arcs),
            pairs: pairs(ps),
        })
        .unwrap()
    };
    vec![
        three_pairs_graph(),
        three_pairs_routable(),
        LayeredDigraph {
            layers: vec![vec![s("s1")], vec![s("t1")]],
            arcs: pairs(&[("s1", "t1")]),
            pairs: pairs(&[("s1", "t1")]),
        },
        dag(
            &[("s1", "m"), ("s2", "m"), ("m", "t1"), ("m", "t2"), ("s2", "q"), ("q", "r"), ("r", "t1")],
            &[("s1", "t1"), ("s2", "t2")],
        ),
        dag(
            &[("s1", "a"), ("s1", "b"), ("s2", "b"), ("a", "c"), ("b", "d"), ("c", "t2"), ("d", "t1"), ("c", "t1"), ("b", "c")],
            &[("s1", "t1"), ("s2", "t2")],
        ),
        // three pairs on a 3x3 grid, straight routes exist
        dag(
            &[
                ("s1", "a1"), ("s2", "a2"), ("s3", "a3"), ("s1", "a2"), ("s2", "a3"),
                ("a1", "t1"), ("a2", "t2"), ("a3", "t3"), ("a1", "t2"), ("a3", "t2"),
            ],
            &[("s1", "t1"), ("s2", "t2"), ("s3", "t3")],
        ),
        // every route of pair 2 crosses pair 1's only route
        dag(
            &[("s1", "x"), ("x", "y"), ("y", "t1"), ("s2", "x"), ("s2", "z"), ("z", "y"), ("y", "t2")],
            &[("s1", "t1"), ("s2", "t2")],
        ),
    ]
}

/// Vertex-disjoint routing by trying every combination of paths.
pub fn routable(g: &LayeredDigraph) -> bool {
    fn paths(g: &LayeredDigraph, from: &str, to: &str) -> Vec<Vec<String>> {
        if from == to {
            return vec![vec![s(to)]];
        }
        g.arcs
            .iter()
            .filter(|(u, _)| u == from)
            .flat_map(|(_, v)| paths(g, v, to))
            .map(|mut p| {
                p.insert(0, s(from));
                p
            })
            .collect()
    }
    let options: Vec<Vec<Vec<String>>> = g.pairs.iter().map(|(a, b)| paths(g, a, b)).collect();
    fn pick(options: &[Vec<Vec<String>>], used: &BTreeSet<String>) -> bool {
        let Some((first, rest)) = options.split_first() else {
            return true;
        };
        first.iter().any(|p| {
            if p.iter().any(|v| used.contains(v)) {
                return false;
            }
            let mut u = used.clone();
            u.extend(p.iter().cloned());
            pick(rest, &u)
        })
    }
    pick(&options, &BTreeSet::new())
}

pub fn cnf(n: usize, clauses: &[[i32; 3]]) -> CnfFormula {
    CnfFormula {
        variables: n,
        clauses: clauses.to_vec(),
    }
}

pub fn cnf_corpus() -> Vec<CnfFormula> {
    vec![
        cnf(1, &[[1, 1, 1]]),
        cnf(1, &[[1, 1, 1], [-1, -1, -1]]),
        cnf(2, &[[1, 2, 2], [-1, 2, 2], [1, -2, -2], [-1, -2, -2]]),
        cnf(2, &[[1, 2, -1], [-2, -2, 1]]),
        cnf(3, &[[1, 2, 3], [-1, -2, -3], [1, -2, 3], [-1, 2, -3]]),
        cnf(3, &[[1, 1, 1], [-1, 2, 2], [-2, 3, 3], [-3, -3, -3]]),
        cnf(3, &[[1, 2, 3]]),
        cnf(2, &[[1, 1, 2], [-1, -1, 2], [-2, -2, 1], [-2, -2, -1]]),
        cnf(3, &[[-1, -2, -3], [1, 1, 2], [2, 3, 3]]),
    ]
}

pub fn sat_brute(f: &CnfFormula) -> bool {
    (0..1u32 << f.variables).any(|bits| {
        f.clauses
            .iter()
            .all(|c| c.iter().any(|&l| ((bits >> (l.abs() - 1)) & 1 == 1) == (l > 0)))
    })
}

pub fn partitioned(edges: &[(&str, &str)], blocks: &[(&str, &[&str])], ell: usize) -> PartitionedGraph {
    PartitionedGraph {
        edges: pairs(edges),
        partition: blocks.iter().map(|&(k, vs)| (s(k), vs.iter().map(|v| s(v)).collect())).collect(),
        ell,
    }
}

pub fn partitioned_corpus() -> Vec<PartitionedGraph> {
    let triangle: &[(&str, &str)] = &[("a", "b"), ("b", "c"), ("a", "c")];
    vec![
        partitioned(triangle, &[("1,1", &["a", "b", "c"])], 2),
        partitioned(triangle, &[("1,1", &["a", "b", "c"])], 3),
        partitioned(
            &[("a", "b"), ("b", "c"), ("d", "e"), ("a", "d")],
            &[("1,1", &["a", "b", "c"]), ("1,2", &["d", "e"])],
            2,
        ),
        partitioned(&[("a", "b"), ("c", "d"), ("a", "c")], &[("1,1", &["a", "b"]), ("2,1", &["c", "d"])], 2),
        partitioned(&[("a", "b"), ("c", "d"), ("a", "c")], &[("1,1", &["a", "b"]), ("2,1", &["c", "d"])], 3),
        partitioned(
            &[("a", "c"), ("b", "d")],
            &[("1,1", &["a"]), ("1,2", &["b"]), ("2,1", &["c"]), ("2,2", &["d"])],
            3,
        ),
        partitioned(&[], &[("1,1", &["a"])], 1),
    ]
}

pub fn vc_brute(edges: &[(String, String)]) -> usize {
    let vs: Vec<&String> = edges.iter().flat_map(|(u, v)| [u, v]).collect::<BTreeSet<_>>().into_iter().collect();
    (0u32..1 << vs.len())
        .filter(|mask| {
            edges.iter().all(|(u, v)| {
                let hit = |x: &String| vs.iter().position(|y| *y == x).is_some_and(|i| mask >> i & 1 == 1);
                hit(u) || hit(v)
            })
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
        .unwrap_or(0)
}
