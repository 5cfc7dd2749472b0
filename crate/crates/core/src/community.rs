//! Louvain community detection with a resolution parameter.
//!
//! Modularity follows the weighted definition with the resolution gamma
//! scaling the null-model term:
//!
//! ```text
//! Q = sum_c [ W_in(c)/m - gamma * (S_c / 2m)^2 ]
//! ```
//!
//! where `m` is the total edge weight (self-loops counted once), `W_in(c)`
//! the intra-community weight, and `S_c` the total weighted degree of the
//! community (a self-loop contributes twice its weight to the degree, which
//! is what makes aggregation preserve Q).
//!
//! [`exact_best_partition`] enumerates every set partition (usable up to 12
//! nodes) and serves as the oracle for Louvain's near-optimality tests.

use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::rng::{component_rng, Stream};
use crate::topicnet::TopicGraph;
use crate::{Error, Result};

pub const EXACT_NODE_LIMIT: usize = 12;

/// Tiny positive gain threshold: moves below it are floating-point noise and
/// would stall termination.
const GAIN_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModularityParams {
    pub resolution: f64,
}

impl Default for ModularityParams {
    fn default() -> Self {
        ModularityParams { resolution: 1.0 }
    }
}

impl ModularityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.resolution > 0.0) {
            return Err(Error::Config("resolution must be positive".into()));
        }
        Ok(())
    }
}

/// Node-to-community assignment with its modularity at the resolution used.
/// Community ids are dense, numbered by first occurrence in node order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Partition {
    pub assignment: Vec<usize>,
    pub modularity: f64,
    pub resolution: f64,
}

impl Partition {
    pub fn community_count(&self) -> usize {
        self.assignment.iter().copied().max().map_or(0, |m| m + 1)
    }

    /// Nodes grouped per community, ids ascending within each.
    pub fn communities(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.community_count()];
        for (node, &c) in self.assignment.iter().enumerate() {
            groups[c].push(node);
        }
        groups
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        #[derive(Serialize)]
        struct File<'a> {
            resolution: f64,
            modularity: f64,
            communities: Vec<Vec<usize>>,
            assignment: &'a [usize],
        }
        let file = File {
            resolution: self.resolution,
            modularity: self.modularity,
            communities: self.communities(),
            assignment: &self.assignment,
        };
        let json = serde_json::to_string_pretty(&file)
            .map_err(|e| Error::Internal(format!("partition serialization failed: {e}")))?;
        fs::write(path, json).map_err(|e| Error::io(path, e))
    }
}

/// Renumber communities densely in first-occurrence order.
fn canonicalize(raw: &[usize]) -> Vec<usize> {
    let mut map: Vec<Option<usize>> = vec![None; raw.len()];
    let mut next = 0usize;
    raw.iter()
        .map(|&c| {
            *map[c].get_or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}

/// Internal weighted graph: adjacency lists plus self-loop weights.
struct WGraph {
    adj: Vec<Vec<(usize, f64)>>,
    self_loop: Vec<f64>,
    /// Weighted degree; a self-loop counts twice.
    degree: Vec<f64>,
    /// Total edge weight, self-loops counted once.
    total_weight: f64,
}

impl WGraph {
    fn from_topic_graph(graph: &TopicGraph) -> Result<Self> {
        let n = graph.node_count;
        let mut g = WGraph {
            adj: vec![Vec::new(); n],
            self_loop: vec![0.0; n],
            degree: vec![0.0; n],
            total_weight: 0.0,
        };
        for e in &graph.edges {
            if e.source >= n || e.target >= n {
                return Err(Error::Internal(format!(
                    "edge ({}, {}) out of range for {n} nodes",
                    e.source, e.target
                )));
            }
            if e.source == e.target {
                return Err(Error::Internal("self-loop in topic graph".into()));
            }
            g.adj[e.source].push((e.target, e.weight));
            g.adj[e.target].push((e.source, e.weight));
            g.degree[e.source] += e.weight;
            g.degree[e.target] += e.weight;
            g.total_weight += e.weight;
        }
        if g.total_weight <= 0.0 {
            return Err(Error::EdgelessGraph);
        }
        Ok(g)
    }

    fn node_count(&self) -> usize {
        self.adj.len()
    }

    fn modularity(&self, assignment: &[usize], gamma: f64) -> f64 {
        let m = self.total_weight;
        let communities = assignment.iter().copied().max().map_or(0, |x| x + 1);
        let mut w_in = vec![0.0f64; communities];
        let mut s = vec![0.0f64; communities];
        for node in 0..self.node_count() {
            let c = assignment[node];
            s[c] += self.degree[node] + 2.0 * self.self_loop[node];
            w_in[c] += self.self_loop[node];
            for &(other, w) in &self.adj[node] {
                if other > node && assignment[other] == c {
                    w_in[c] += w;
                }
            }
        }
        (0..communities)
            .map(|c| w_in[c] / m - gamma * (s[c] / (2.0 * m)).powi(2))
            .sum()
    }

    /// Collapse communities into super-nodes; intra-community weight becomes
    /// a self-loop. `assignment` must already be dense.
    fn aggregate(&self, assignment: &[usize]) -> WGraph {
        let communities = assignment.iter().copied().max().map_or(0, |x| x + 1);
        let mut self_loop = vec![0.0f64; communities];
        let mut between = vec![std::collections::BTreeMap::<usize, f64>::new(); communities];
        for node in 0..self.node_count() {
            let a = assignment[node];
            self_loop[a] += self.self_loop[node];
            for &(other, w) in &self.adj[node] {
                if other < node {
                    continue;
                }
                let b = assignment[other];
                if a == b {
                    self_loop[a] += w;
                } else {
                    let (lo, hi) = (a.min(b), a.max(b));
                    *between[lo].entry(hi).or_insert(0.0) += w;
                }
            }
        }
        let mut g = WGraph {
            adj: vec![Vec::new(); communities],
            self_loop,
            degree: vec![0.0; communities],
            total_weight: 0.0,
        };
        for (a, edges) in between.iter().enumerate() {
            for (&b, &w) in edges {
                g.adj[a].push((b, w));
                g.adj[b].push((a, w));
                g.degree[a] += w;
                g.degree[b] += w;
            }
        }
        for c in 0..communities {
            g.total_weight += g.self_loop[c];
        }
        g.total_weight += g
            .adj
            .iter()
            .enumerate()
            .flat_map(|(a, es)| es.iter().filter(move |(b, _)| *b > a))
            .map(|&(_, w)| w)
            .sum::<f64>();
        g
    }
}

/// Modularity of `assignment` on `graph` at resolution `gamma`.
pub fn modularity(graph: &TopicGraph, assignment: &[usize], gamma: f64) -> Result<f64> {
    if assignment.len() != graph.node_count {
        return Err(Error::DimensionMismatch(format!(
            "assignment covers {} nodes, graph has {}",
            assignment.len(),
            graph.node_count
        )));
    }
    let g = WGraph::from_topic_graph(graph)?;
    Ok(g.modularity(&canonicalize(assignment), gamma))
}

/// Exhaustive best partition over all set partitions (restricted-growth
/// enumeration). Q ties go to the lexicographically smallest canonical
/// assignment. Only feasible for small graphs; errors above
/// [`EXACT_NODE_LIMIT`] nodes.
pub fn exact_best_partition(graph: &TopicGraph, gamma: f64) -> Result<Partition> {
    let n = graph.node_count;
    if n > EXACT_NODE_LIMIT {
        return Err(Error::TooManyNodes {
            max: EXACT_NODE_LIMIT,
            got: n,
        });
    }
    let g = WGraph::from_topic_graph(graph)?;

    // Enumerate restricted growth strings in lexicographic order; keeping
    // only strict improvements makes ties resolve to the smallest string.
    let mut rgs = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let q = g.modularity(&rgs, gamma);
        if best.as_ref().map_or(true, |(bq, _)| q > bq + GAIN_EPS) {
            best = Some((q, rgs.clone()));
        }
        // Advance to the next restricted growth string.
        let mut i = n;
        loop {
            if i == 1 {
                let (q, assignment) = best.unwrap();
                return Ok(Partition {
                    assignment,
                    modularity: q,
                    resolution: gamma,
                });
            }
            i -= 1;
            let max_prefix = rgs[..i].iter().copied().max().unwrap();
            if rgs[i] <= max_prefix {
                rgs[i] += 1;
                for x in rgs[i + 1..].iter_mut() {
                    *x = 0;
                }
                break;
            }
        }
    }
}

/// Louvain heuristic: seeded local moves plus aggregation, repeated until a
/// pass yields no improvement. Returns the flattened assignment with its
/// modularity; `trace` (second element) holds Q after every phase-1
/// completion and never decreases.
pub fn louvain_with_trace(
    graph: &TopicGraph,
    params: &ModularityParams,
    seed: u64,
) -> Result<(Partition, Vec<f64>)> {
    params.validate()?;
    let gamma = params.resolution;
    let mut g = WGraph::from_topic_graph(graph)?;
    let mut rng = component_rng(seed, Stream::Louvain);

    // node_map[i] = community of original node i in the current level.
    let mut node_map: Vec<usize> = (0..graph.node_count).collect();
    let mut trace = Vec::new();

    loop {
        let (assignment, moved) = local_moves(&g, gamma, &mut rng);
        let assignment = canonicalize(&assignment);
        trace.push(g.modularity(&assignment, gamma));

        if !moved {
            let assignment = canonicalize(&node_map);
            let q = WGraph::from_topic_graph(graph)?.modularity(&assignment, gamma);
            return Ok((
                Partition {
                    assignment,
                    modularity: q,
                    resolution: gamma,
                },
                trace,
            ));
        }

        for c in node_map.iter_mut() {
            *c = assignment[*c];
        }
        g = g.aggregate(&assignment);
    }
}

pub fn louvain(graph: &TopicGraph, params: &ModularityParams, seed: u64) -> Result<Partition> {
    louvain_with_trace(graph, params, seed).map(|(p, _)| p)
}

/// Phase 1: repeated passes of single-node moves until none improves Q.
/// Returns the assignment and whether any move happened at all.
fn local_moves(
    g: &WGraph,
    gamma: f64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> (Vec<usize>, bool) {
    let n = g.node_count();
    let m = g.total_weight;
    let mut community: Vec<usize> = (0..n).collect();
    // Total degree per community.
    let mut s_tot: Vec<f64> = (0..n).map(|i| g.degree[i] + 2.0 * g.self_loop[i]).collect();

    let mut order: Vec<usize> = (0..n).collect();
    let mut moved_any = false;
    let mut weight_to: Vec<f64> = vec![0.0; n];

    loop {
        let mut moved_this_pass = false;
        order.shuffle(rng);

        for &node in &order {
            let own = community[node];
            let k_i = g.degree[node] + 2.0 * g.self_loop[node];

            // Weight from `node` to each neighboring community.
            let mut touched: Vec<usize> = Vec::with_capacity(g.adj[node].len() + 1);
            for &(other, w) in &g.adj[node] {
                let c = community[other];
                if weight_to[c] == 0.0 && !touched.contains(&c) {
                    touched.push(c);
                }
                weight_to[c] += w;
            }
            if !touched.contains(&own) {
                touched.push(own);
            }

            // Gain of joining community c (node removed from its own first):
            // dQ(c) = w(node->c)/m - gamma * k_i * S_c / (2 m^2)
            let s_own_without = s_tot[own] - k_i;
            let gain = |c: usize| -> f64 {
                let s = if c == own { s_own_without } else { s_tot[c] };
                weight_to[c] / m - gamma * k_i * s / (2.0 * m * m)
            };

            let stay = gain(own);
            let mut best_c = own;
            let mut best_gain = stay;
            touched.sort_unstable();
            for &c in &touched {
                let d = gain(c);
                if d > best_gain + GAIN_EPS {
                    best_gain = d;
                    best_c = c;
                }
            }

            if best_c != own {
                community[node] = best_c;
                s_tot[own] -= k_i;
                s_tot[best_c] += k_i;
                moved_this_pass = true;
                moved_any = true;
            }

            for &c in &touched {
                weight_to[c] = 0.0;
            }
        }

        if !moved_this_pass {
            return (community, moved_any);
        }
    }
}
