//! Higher-order De Bruijn graphs.
//!
//! In the order-`k` graph a node is a walk of `k` nodes (length `k - 1`) and
//! an edge `(u, v)` is a walk of length `k` whose first `k` nodes are `u` and
//! whose last `k` nodes are `v`. Edge weights are raw instantiation counts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::temporal::{NodeId, StaticWeightedGraph};
use crate::walks::{Walk, WalkBag};

/// Default cap on the size of [`feasible_debruijn`] results.
pub const DEFAULT_FEASIBLE_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeBruijnGraph {
    order: usize,
    first_order_nodes: usize,
    nodes: Vec<Walk>,
    index: HashMap<Walk, usize>,
    edges: BTreeMap<(usize, usize), u64>,
}

impl DeBruijnGraph {
    /// Assembles an order-`order` graph from walks of length `order` and their
    /// weights. `extra_nodes` are added even without incident edges.
    pub fn from_walk_counts<'a>(
        order: usize,
        first_order_nodes: usize,
        extra_nodes: impl IntoIterator<Item = &'a Walk>,
        walks: impl IntoIterator<Item = (&'a Walk, u64)>,
    ) -> Result<Self> {
        if order < 1 {
            return Err(Error::arg("De Bruijn order must be >= 1"));
        }
        let walks: Vec<(&Walk, u64)> = walks.into_iter().filter(|(_, c)| *c > 0).collect();
        let mut node_set: BTreeSet<Walk> = BTreeSet::new();
        for n in extra_nodes {
            if n.len() != order {
                return Err(Error::arg(format!(
                    "node with {} entries in an order-{order} graph",
                    n.len()
                )));
            }
            node_set.insert(n.clone());
        }
        for (w, _) in &walks {
            if w.len() != order + 1 {
                return Err(Error::arg(format!(
                    "walk with {} nodes cannot be an order-{order} edge",
                    w.len()
                )));
            }
            node_set.insert(w[..order].to_vec());
            node_set.insert(w[1..].to_vec());
        }
        if let Some(bad) = node_set.iter().flatten().find(|&&v| v as usize >= first_order_nodes) {
            return Err(Error::UnknownNode(format!("node index {bad}")));
        }
        let nodes: Vec<Walk> = node_set.into_iter().collect();
        let index: HashMap<Walk, usize> = nodes.iter().cloned().enumerate().map(|(i, n)| (n, i)).collect();
        let mut edges = BTreeMap::new();
        for (w, c) in walks {
            let u = index[&w[..order]];
            let v = index[&w[1..]];
            *edges.entry((u, v)).or_insert(0) += c;
        }
        Ok(Self {
            order,
            first_order_nodes,
            nodes,
            index,
            edges,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn first_order_node_count(&self) -> usize {
        self.first_order_nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[Walk] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &[NodeId] {
        &self.nodes[i]
    }

    pub fn node_index(&self, node: &[NodeId]) -> Option<usize> {
        self.index.get(node).copied()
    }

    pub fn weight(&self, u: usize, v: usize) -> u64 {
        self.edges.get(&(u, v)).copied().unwrap_or(0)
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    /// `(source index, target index, weight)` in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.edges.iter().map(|(&(u, v), &w)| (u, v, w))
    }

    /// Sum of incoming edge weights, without any implicit self-loop.
    pub fn in_strength(&self, node: &[NodeId]) -> Result<u64> {
        let v = self
            .node_index(node)
            .ok_or_else(|| Error::UnknownNode(format!("{node:?} is not a node of this graph")))?;
        Ok(self.in_strengths()[v])
    }

    pub fn in_strengths(&self) -> Vec<u64> {
        let mut s = vec![0; self.nodes.len()];
        for (&(_, v), &w) in &self.edges {
            s[v] += w;
        }
        s
    }

    /// Order-1 graphs map back to a static weighted graph.
    pub fn to_static(&self) -> Result<StaticWeightedGraph> {
        if self.order != 1 {
            return Err(Error::arg("only order-1 De Bruijn graphs are static graphs"));
        }
        StaticWeightedGraph::from_edges(
            self.first_order_nodes,
            self.edges
                .iter()
                .map(|(&(u, v), &w)| ((self.nodes[u][0], self.nodes[v][0]), w)),
        )
    }

    /// One `u0|u1|...<TAB>v0|v1|...<TAB>weight` line per edge.
    pub fn to_text(&self, labels: &[String]) -> String {
        let name = |n: &Walk| {
            n.iter()
                .map(|&v| labels.get(v as usize).map(String::as_str).unwrap_or("?"))
                .collect::<Vec<_>>()
                .join("|")
        };
        let mut out = String::new();
        for (&(u, v), &w) in &self.edges {
            let _ = writeln!(out, "{}\t{}\t{}", name(&self.nodes[u]), name(&self.nodes[v]), w);
        }
        out
    }
}

/// Order-`k` graph of the observed causal walks in `bag`.
///
/// Nodes are the observed walks of length `k - 1` together with every prefix
/// and suffix of an observed length-`k` walk.
pub fn build_debruijn(bag: &WalkBag, k: usize) -> Result<DeBruijnGraph> {
    if k < 1 || k > bag.max_length() {
        return Err(Error::arg(format!(
            "order {k} outside 1..={} supported by the walk bag",
            bag.max_length()
        )));
    }
    // every first-order node is an order-1 node, observed or not
    let singles: Vec<Walk> = (0..bag.node_count() as NodeId).map(|v| vec![v]).collect();
    let extra: Box<dyn Iterator<Item = &Walk>> = if k == 1 {
        Box::new(singles.iter())
    } else {
        Box::new(bag.of_length(k - 1).keys())
    };
    DeBruijnGraph::from_walk_counts(
        k,
        bag.node_count(),
        extra,
        bag.of_length(k).iter().map(|(w, &c)| (w, c)),
    )
}

/// Order-`k` graph of every walk the static topology admits, with unit
/// weights. Fails when the node or edge count would exceed `cap`.
pub fn feasible_debruijn(s: &StaticWeightedGraph, k: usize, cap: usize) -> Result<DeBruijnGraph> {
    if k < 1 {
        return Err(Error::arg("De Bruijn order must be >= 1"));
    }
    let succ = s.successors();
    let mut walks: Vec<Walk> = (0..s.node_count() as NodeId).map(|v| vec![v]).collect();
    for nodes_per_walk in 1..=k {
        let next_len: usize = walks.iter().map(|w| succ[*w.last().unwrap() as usize].len()).sum();
        if next_len > cap {
            return Err(Error::TooLarge(format!(
                "feasible order-{k} graph needs more than {cap} walks"
            )));
        }
        let mut next = Vec::with_capacity(next_len);
        for w in &walks {
            for &x in &succ[*w.last().unwrap() as usize] {
                let mut e = w.clone();
                e.push(x);
                next.push(e);
            }
        }
        if nodes_per_walk == k {
            // `walks` are the order-k nodes, `next` the edges.
            return DeBruijnGraph::from_walk_counts(k, s.node_count(), walks.iter(), next.iter().map(|w| (w, 1)));
        }
        walks = next;
    }
    unreachable!("loop returns at nodes_per_walk == k")
}

/// Maps every higher-order node `(u0, ..., u_{k-1})` to its last entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BipartiteProjection {
    targets: Vec<NodeId>,
    first_order_nodes: usize,
}

impl BipartiteProjection {
    pub fn new(targets: Vec<NodeId>, first_order_nodes: usize) -> Result<Self> {
        if let Some(bad) = targets.iter().find(|&&v| v as usize >= first_order_nodes) {
            return Err(Error::UnknownNode(format!("projection target {bad}")));
        }
        Ok(Self {
            targets,
            first_order_nodes,
        })
    }

    pub fn target(&self, ho_node: usize) -> NodeId {
        self.targets[ho_node]
    }

    pub fn targets(&self) -> &[NodeId] {
        &self.targets
    }

    pub fn ho_node_count(&self) -> usize {
        self.targets.len()
    }

    pub fn first_order_node_count(&self) -> usize {
        self.first_order_nodes
    }

    /// Higher-order nodes grouped by the first-order node they project to.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.first_order_nodes];
        for (u, &v) in self.targets.iter().enumerate() {
            out[v as usize].push(u);
        }
        out
    }
}

pub fn bipartite_projection(d: &DeBruijnGraph) -> BipartiteProjection {
    BipartiteProjection {
        targets: d.nodes.iter().map(|n| *n.last().expect("nodes are non-empty")).collect(),
        first_order_nodes: d.first_order_nodes,
    }
}
