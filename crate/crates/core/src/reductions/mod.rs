//! Instance generators: the four hardness constructions, each with an
//! exhaustive checker for the source problem, and a seeded random
//! generator for test corpora.

mod partition;
mod paths;
mod random;
mod sat;
mod staging;
mod vertex_cover;

use serde::{Deserialize, Serialize};

pub use partition::{gen_3partition, partition_exists};
pub use paths::{disjoint_paths_exist, three_pairs_graph, gen_disjoint_paths, layerize, Digraph, LayeredDigraph};
pub use random::{gen_random, RandomSpec};
pub use sat::{gen_3sat, satisfiable, CnfFormula};
pub use vertex_cover::{
    gen_maxmin_vc, maxmin_params, min_vertex_cover, pad, MaxMinParams, PaddedGraph, PartitionedGraph,
};

/// What the best worst case of a generated instance says about the source
/// problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// Optimum equals `threshold` = 1 - 1/n iff the numbers 3-partition,
    /// and is below it otherwise.
    ThreePartition { n: usize, threshold: f64 },
    /// Optimum is 1 iff the pairs have vertex-disjoint paths, and at most
    /// `epsilon` otherwise.
    DisjointPaths { pairs: usize, epsilon: f64 },
    /// A policy's worst case exceeds `params.theta` iff the padded G_t it
    /// selects has no vertex cover smaller than `ell`.
    MaxminVc {
        ell: usize,
        m: usize,
        params: MaxMinParams,
        padded: PaddedGraph,
    },
    /// Optimum is at least `threshold` = 1/2 iff the formula is
    /// satisfiable, and 0 otherwise.
    ThreeSat { threshold: f64 },
    Random { spec: RandomSpec },
}
