//! Synthetic dynamic graph with clusters that exist only in the causal
//! topology.
//!
//! The static topology is a uniform random directed graph. Pairs of
//! consecutive events `(v0, v1; t), (v1, v2; t + 1)` are drawn uniformly among
//! all compatible edge pairs and placed three time units apart, so with
//! `delta = 1` each pair forms exactly one causal walk of length two. A swap
//! pass then exchanges the timestamps of second events around each centre so
//! that length-two walks staying inside one cluster become over-represented.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::temporal::{NodeId, TemporalEdge, TemporalGraph};

/// Time between the starts of consecutive event pairs.
pub const PAIR_SPACING: i64 = 3;
pub const CLUSTER_COUNT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TempClustersParams {
    pub nodes: usize,
    pub edges: usize,
    pub pairs: usize,
    pub seed: u64,
}

impl Default for TempClustersParams {
    fn default() -> Self {
        Self {
            nodes: 30,
            edges: 560,
            pairs: 30_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    clusters: Vec<usize>,
}

impl ClusterAssignment {
    pub fn cluster(&self, v: NodeId) -> usize {
        self.clusters[v as usize]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.clusters
    }

    pub fn sizes(&self) -> [usize; CLUSTER_COUNT] {
        let mut sizes = [0; CLUSTER_COUNT];
        for &c in &self.clusters {
            sizes[c] += 1;
        }
        sizes
    }

    /// `node,label` lines for the nodes of `g`.
    pub fn to_csv(&self, g: &TemporalGraph) -> String {
        let mut out = String::from("node,label\n");
        for (v, &c) in self.clusters.iter().enumerate() {
            out.push_str(&format!("{},{}\n", g.label(v as NodeId), c));
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
struct EventPair {
    first: usize,
    second: usize,
}

/// Generates the temporal-clusters graph; nodes are labelled `0..n`.
pub fn generate_temp_clusters(params: &TempClustersParams) -> Result<(TemporalGraph, ClusterAssignment)> {
    let n = params.nodes;
    let m = params.edges;
    if n < CLUSTER_COUNT || !n.is_multiple_of(CLUSTER_COUNT) {
        return Err(Error::arg(format!("node count {n} must be a positive multiple of 3")));
    }
    if m > n * (n - 1) {
        return Err(Error::arg(format!("{m} edges do not fit a simple directed graph on {n} nodes")));
    }
    if m == 0 || params.pairs == 0 {
        return Err(Error::arg("edge and pair counts must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    // (1) uniform random simple directed graph
    let slots = rand::seq::index::sample(&mut rng, n * (n - 1), m);
    let mut edges: Vec<(NodeId, NodeId)> = slots
        .iter()
        .map(|i| {
            let v = i / (n - 1);
            let mut w = i % (n - 1);
            if w >= v {
                w += 1;
            }
            (v as NodeId, w as NodeId)
        })
        .collect();
    edges.sort_unstable();

    // (2) equal-sized clusters
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut clusters = vec![0; n];
    for (rank, &v) in order.iter().enumerate() {
        clusters[v] = rank * CLUSTER_COUNT / n;
    }

    // (3) compatible pairs ((a, b), (b, c)), drawn uniformly
    let mut out_edges: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for &(v, w) in &edges {
        out_edges[v as usize].push(w);
    }
    let compatible: Vec<(NodeId, NodeId, NodeId)> = edges
        .iter()
        .flat_map(|&(a, b)| out_edges[b as usize].iter().map(move |&c| (a, b, c)))
        .collect();
    if compatible.is_empty() {
        return Err(Error::arg("random graph has no walk of length two"));
    }

    let mut events = Vec::with_capacity(2 * params.pairs);
    let mut pairs = Vec::with_capacity(params.pairs);
    for i in 0..params.pairs {
        let (a, b, c) = compatible[rng.gen_range(0..compatible.len())];
        let t = PAIR_SPACING * i as i64;
        pairs.push(EventPair {
            first: events.len(),
            second: events.len() + 1,
        });
        events.push(TemporalEdge::new(a, b, t));
        events.push(TemporalEdge::new(b, c, t + 1));
    }

    // (4) swap pass. Candidates per centre: A = (same, same, other),
    // B = (other, same, same). Each pair takes part in at most one swap.
    let mut mixed_out: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut mixed_in: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, p) in pairs.iter().enumerate() {
        let (u, centre, w) = (events[p.first].source, events[p.first].target, events[p.second].target);
        let (cu, cc, cw) = (clusters[u as usize], clusters[centre as usize], clusters[w as usize]);
        if cu == cc && cc != cw {
            mixed_out[centre as usize].push(i);
        } else if cc == cw && cu != cc {
            mixed_in[centre as usize].push(i);
        }
    }
    for list in mixed_out.iter_mut().chain(mixed_in.iter_mut()) {
        list.shuffle(&mut rng);
    }
    for p in &pairs {
        let centre = events[p.first].target as usize;
        if mixed_out[centre].is_empty() || mixed_in[centre].is_empty() {
            continue;
        }
        let a = pairs[mixed_out[centre].pop().unwrap()];
        let b = pairs[mixed_in[centre].pop().unwrap()];
        // (u, c; t1) (c, w; t1 + 1) and (x, c; t2) (c, z; t2 + 1) become
        // (u, c; t1) (c, z; t1 + 1) and (x, c; t2) (c, w; t2 + 1)
        let ta = events[a.second].timestamp;
        let tb = events[b.second].timestamp;
        events[a.second].timestamp = tb;
        events[b.second].timestamp = ta;
    }

    let mut g = TemporalGraph::new(true);
    for v in 0..n {
        g.add_node(&v.to_string());
    }
    let g = g.with_events(events)?;
    Ok((g, ClusterAssignment { clusters }))
}

/// Uniformly permutes the timestamps across events.
pub fn shuffle_timestamps(g: &TemporalGraph, seed: u64) -> TemporalGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stamps: Vec<i64> = g.events().iter().map(|e| e.timestamp).collect();
    stamps.shuffle(&mut rng);
    let events = g
        .events()
        .iter()
        .zip(stamps)
        .map(|(e, t)| TemporalEdge::new(e.source, e.target, t))
        .collect();
    g.with_events(events).expect("same node table")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walks::count_causal_walks;

    fn small(seed: u64) -> TempClustersParams {
        TempClustersParams {
            nodes: 12,
            edges: 70,
            pairs: 2_000,
            seed,
        }
    }

    #[test]
    fn sizes_match_parameters() {
        let (g, c) = generate_temp_clusters(&small(1)).unwrap();
        assert_eq!(g.node_count(), 12);
        assert_eq!(g.event_count(), 4_000);
        assert_eq!(c.sizes(), [4, 4, 4]);
        let s = g.aggregate();
        assert!(s.edge_count() <= 70);
        assert!(s.edges().all(|(v, w, _)| v != w));
    }

    #[test]
    fn invalid_parameters() {
        let mut p = small(0);
        p.nodes = 10;
        assert!(generate_temp_clusters(&p).is_err());
        let mut p = small(0);
        p.edges = 12 * 11 + 1;
        assert!(generate_temp_clusters(&p).is_err());
    }

    #[test]
    fn every_pair_is_one_causal_walk() {
        let (g, _) = generate_temp_clusters(&small(3)).unwrap();
        let bag = count_causal_walks(&g, 1, 2).unwrap();
        assert_eq!(bag.total(2), 2_000);
    }

    #[test]
    fn deterministic_per_seed() {
        assert_eq!(
            generate_temp_clusters(&small(5)).unwrap(),
            generate_temp_clusters(&small(5)).unwrap()
        );
        assert_ne!(
            generate_temp_clusters(&small(5)).unwrap().0,
            generate_temp_clusters(&small(6)).unwrap().0
        );
    }

    #[test]
    fn shuffle_keeps_aggregate() {
        let (g, _) = generate_temp_clusters(&small(2)).unwrap();
        let s = shuffle_timestamps(&g, 7);
        assert_eq!(s.aggregate(), g.aggregate());
        assert_ne!(s, g);

        let one = TemporalGraph::parse_edge_list("a b 4", true).unwrap();
        assert_eq!(shuffle_timestamps(&one, 1), one);
    }

    #[test]
    fn csv_lists_every_node() {
        let (g, c) = generate_temp_clusters(&small(4)).unwrap();
        let csv = c.to_csv(&g);
        assert_eq!(csv.lines().count(), 13);
        assert!(csv.starts_with("node,label\n"));
    }
}
