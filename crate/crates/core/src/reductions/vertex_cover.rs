use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::staging::DagMdp;
use crate::error::{Error, Result};
use crate::mdp::{MdpInstance, Uncertainty, UncertaintyKind};

/// Undirected multigraph with its vertex set split into blocks V_{i,j}
/// (keys `"i,j"`) and the cover threshold l.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionedGraph {
    pub edges: Vec<(String, String)>,
    pub partition: BTreeMap<String, Vec<String>>,
    pub ell: usize,
}

/// A partitioned graph after padding: every block induces exactly `m_bar`
/// edges and every two blocks with different i are joined by exactly
/// `m_bar` edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaddedGraph {
    pub rows: Vec<String>,
    pub columns: Vec<String>,
    /// `blocks[i][j]` lists the vertices of V_{i,j}.
    pub blocks: Vec<Vec<Vec<String>>>,
    pub edges: Vec<(String, String)>,
    pub m_bar: usize,
    pub ell: usize,
}

fn gen_err(msg: impl Into<String>) -> Error {
    Error::Generator(msg.into())
}

impl PaddedGraph {
    pub fn vertex_count(&self) -> usize {
        self.blocks.iter().flatten().map(Vec::len).sum()
    }

    /// Edges of G_t, for t given as a column index per row.
    pub fn selected_edges(&self, t: &[usize]) -> Vec<(String, String)> {
        let chosen: BTreeSet<&str> = t
            .iter()
            .enumerate()
            .flat_map(|(i, &j)| self.blocks[i][j].iter().map(String::as_str))
            .collect();
        self.edges
            .iter()
            .filter(|(u, v)| chosen.contains(u.as_str()) && chosen.contains(v.as_str()))
            .cloned()
            .collect()
    }

    /// m = |I| m_bar + C(|I|, 2) m_bar, the edge count of every G_t.
    pub fn m(&self) -> usize {
        let n = self.rows.len();
        n * (n + 1) / 2 * self.m_bar
    }
}

/// Deletes edges inside a row between different columns and pads with
/// the dummy vertices `d1_<i>_<j>`, `d2_<i>_<j>` plus parallel edges until
/// every block and every cross-row block pair carries m_bar >= 1 edges.
pub fn pad(g: &PartitionedGraph) -> Result<PaddedGraph> {
    let mut rows = BTreeSet::new();
    let mut columns = BTreeSet::new();
    let mut home: BTreeMap<&str, (String, String)> = BTreeMap::new();
    for (key, vertices) in &g.partition {
        let (i, j) = key
            .split_once(',')
            .ok_or_else(|| gen_err(format!("partition key `{key}` is not `i,j`")))?;
        let (i, j) = (i.trim().to_string(), j.trim().to_string());
        rows.insert(i.clone());
        columns.insert(j.clone());
        for v in vertices {
            if home.insert(v.as_str(), (i.clone(), j.clone())).is_some() {
                return Err(gen_err(format!("vertex `{v}` is in two blocks")));
            }
        }
    }
    if rows.is_empty() {
        return Err(gen_err("empty partition"));
    }
    let rows: Vec<String> = rows.into_iter().collect();
    let columns: Vec<String> = columns.into_iter().collect();
    let row_ix = |i: &str| rows.iter().position(|r| r == i).expect("row");
    let col_ix = |j: &str| columns.iter().position(|c| c == j).expect("column");
    let (ni, nj) = (rows.len(), columns.len());

    let mut blocks = vec![vec![Vec::new(); nj]; ni];
    for (key, vertices) in &g.partition {
        let (i, j) = key.split_once(',').expect("checked");
        blocks[row_ix(i.trim())][col_ix(j.trim())].extend(vertices.iter().cloned());
    }
    let mut edges = Vec::new();
    // inner[i][j] and cross[(i, j), (i', j')] with i < i'
    let mut inner = vec![vec![0usize; nj]; ni];
    let mut cross: BTreeMap<((usize, usize), (usize, usize)), usize> = BTreeMap::new();
    for (u, v) in &g.edges {
        let (Some(hu), Some(hv)) = (home.get(u.as_str()), home.get(v.as_str())) else {
            return Err(gen_err(format!("edge ({u}, {v}) has an endpoint outside the partition")));
        };
        if u == v {
            return Err(gen_err(format!("self-loop at `{u}`")));
        }
        let a = (row_ix(&hu.0), col_ix(&hu.1));
        let b = (row_ix(&hv.0), col_ix(&hv.1));
        if a.0 == b.0 {
            if a.1 != b.1 {
                continue;
            }
            inner[a.0][a.1] += 1;
        } else {
            *cross.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
        edges.push((u.clone(), v.clone()));
    }
    let m_bar = inner
        .iter()
        .flatten()
        .chain(cross.values())
        .copied()
        .max()
        .unwrap_or(0)
        .max(1);
    let dummy = |n: u8, i: usize, j: usize| format!("d{n}_{}_{}", rows[i], columns[j]);
    for i in 0..ni {
        for j in 0..nj {
            blocks[i][j].push(dummy(1, i, j));
            blocks[i][j].push(dummy(2, i, j));
            for _ in inner[i][j]..m_bar {
                edges.push((dummy(1, i, j), dummy(2, i, j)));
            }
        }
    }
    for i in 0..ni {
        for i2 in i + 1..ni {
            for j in 0..nj {
                for j2 in 0..nj {
                    let have = cross.get(&((i, j), (i2, j2))).copied().unwrap_or(0);
                    for _ in have..m_bar {
                        edges.push((dummy(1, i, j), dummy(1, i2, j2)));
                    }
                }
            }
        }
    }
    Ok(PaddedGraph {
        rows,
        columns,
        blocks,
        edges,
        m_bar,
        ell: g.ell,
    })
}

/// Probabilities of the construction: `c` per cross edge and `2c` per
/// inner edge at (s_i, a_j), `eps` for each s_i from s0, and the rest split
/// evenly over the vertex states so that p_v = 1.5 eps c sits halfway
/// between the two edge-reach probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxMinParams {
    pub c: f64,
    pub epsilon: f64,
    pub p_vertex: f64,
    pub theta: f64,
}

pub fn maxmin_params(g: &PaddedGraph) -> MaxMinParams {
    let (ni, nj) = (g.rows.len() as f64, g.columns.len() as f64);
    let m_bar = g.m_bar as f64;
    let c = 1.0 / (m_bar * (2.0 + (ni - 1.0) * nj));
    let epsilon = 1.0 / (ni + 1.5 * c * g.vertex_count() as f64);
    let p_vertex = (1.0 - ni * epsilon) / g.vertex_count() as f64;
    let theta = 1.0 - (g.ell as f64 - 1.0) * p_vertex - g.m() as f64 * 2.0 * epsilon * c;
    MaxMinParams {
        c,
        epsilon,
        p_vertex,
        theta,
    }
}

fn vertex_state(v: &str) -> String {
    format!("v_{v}")
}

fn edge_state(k: usize, (u, v): &(String, String)) -> String {
    format!("e{k}_{u}_{v}")
}

/// The Max-Min Vertex Cover instance (transition uncertainty): a policy
/// picks a column a_j at every row state s_i, and its worst case exceeds
/// `theta` exactly when the padded G_t has no vertex cover of size below l.
pub fn gen_maxmin_vc(g: &PartitionedGraph) -> Result<(MdpInstance<f64>, PaddedGraph, MaxMinParams)> {
    if g.ell == 0 {
        return Err(gen_err("threshold l must be at least 1"));
    }
    let padded = pad(g)?;
    let params = maxmin_params(&padded);
    let mut home: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (i, row) in padded.blocks.iter().enumerate() {
        for (j, block) in row.iter().enumerate() {
            for v in block {
                home.insert(v.as_str(), (i, j));
            }
        }
    }

    let mut d = DagMdp::new(
        "s0",
        Uncertainty {
            kind: UncertaintyKind::Transition,
            budget: padded.m() + g.ell - 1,
        },
    );
    let row_state = |i: usize| format!("s_{}", padded.rows[i]);
    let mut start = Vec::new();
    for i in 0..padded.rows.len() {
        d.state(row_state(i));
        start.push((row_state(i), params.epsilon));
    }
    for (k, e) in padded.edges.iter().enumerate() {
        d.state(edge_state(k, e));
    }
    for v in padded.blocks.iter().flatten().flatten() {
        d.state(vertex_state(v));
        start.push((vertex_state(v), params.p_vertex));
    }
    d.state("t0").state("t1");
    d.reward("t0", 0.0, None).reward("t1", 1.0, None);
    d.action("s0", "a0", start);
    for i in 0..padded.rows.len() {
        for j in 0..padded.columns.len() {
            let mut out = Vec::new();
            for (k, e) in padded.edges.iter().enumerate() {
                let ends = [home[e.0.as_str()], home[e.1.as_str()]];
                let hits = ends.iter().filter(|&&h| h == (i, j)).count();
                let p = match hits {
                    2 => 2.0 * params.c,
                    1 => params.c,
                    _ => continue,
                };
                out.push((edge_state(k, e), p));
            }
            d.action(&row_state(i), &format!("a_{}", padded.columns[j]), out);
        }
    }
    for (k, e) in padded.edges.iter().enumerate() {
        let (u, v) = (vertex_state(&e.0), vertex_state(&e.1));
        d.uncertain(&edge_state(k, e), "a0", "t1", &[&u, &v]);
    }
    for v in padded.blocks.iter().flatten().flatten() {
        d.uncertain(&vertex_state(v), "a0", "t1", &["t0"]);
    }
    Ok((d.build()?, padded, params))
}

/// Size of a minimum vertex cover, by exhaustive search over subsets.
pub fn min_vertex_cover(edges: &[(String, String)]) -> usize {
    let vertices: Vec<&str> = edges
        .iter()
        .flat_map(|(u, v)| [u.as_str(), v.as_str()])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let ix: BTreeMap<&str, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let masks: Vec<u64> = edges
        .iter()
        .map(|(u, v)| (1u64 << ix[u.as_str()]) | (1u64 << ix[v.as_str()]))
        .collect();
    assert!(vertices.len() < 64, "graph too large for exhaustive cover search");
    (0u64..1 << vertices.len())
        .filter(|s| masks.iter().all(|m| s & m != 0))
        .map(|s| s.count_ones() as usize)
        .min()
        .unwrap_or(0)
}
