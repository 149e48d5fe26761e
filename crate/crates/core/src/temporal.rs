//! Dynamic graph data model.
//!
//! A [`TemporalGraph`] is a node table plus a multiset of time-stamped edges.
//! Node labels are arbitrary strings externally and dense `u32` indices
//! internally, assigned in first-seen order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type NodeId = u32;

/// One activation `(source, target; timestamp)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TemporalEdge {
    pub source: NodeId,
    pub target: NodeId,
    pub timestamp: i64,
}

impl TemporalEdge {
    pub fn new(source: NodeId, target: NodeId, timestamp: i64) -> Self {
        Self {
            source,
            target,
            timestamp,
        }
    }
}

/// Column layout of an edge-list file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ColumnOrder {
    #[default]
    SourceTargetTime,
    TimeSourceTarget,
}

impl std::str::FromStr for ColumnOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vwt" | "source-target-time" => Ok(Self::SourceTargetTime),
            "tvw" | "time-source-target" => Ok(Self::TimeSourceTarget),
            other => Err(Error::arg(format!("unknown column order {other:?} (expected vwt or tvw)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalGraph {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
    events: Vec<TemporalEdge>,
    directed: bool,
}

impl TemporalGraph {
    pub fn new(directed: bool) -> Self {
        Self {
            labels: Vec::new(),
            index: HashMap::new(),
            events: Vec::new(),
            directed,
        }
    }

    /// Registers `label` if unseen and returns its index.
    pub fn add_node(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len() as NodeId;
        self.labels.push(label.to_owned());
        self.index.insert(label.to_owned(), id);
        id
    }

    pub fn add_event(&mut self, source: &str, target: &str, timestamp: i64) {
        let source = self.add_node(source);
        let target = self.add_node(target);
        self.events.push(TemporalEdge::new(source, target, timestamp));
    }

    /// Appends an event between already registered nodes.
    pub fn push_event(&mut self, event: TemporalEdge) -> Result<()> {
        let n = self.labels.len() as NodeId;
        if event.source >= n || event.target >= n {
            return Err(Error::UnknownNode(format!(
                "event ({}, {}; {}) references an unregistered node",
                event.source, event.target, event.timestamp
            )));
        }
        self.events.push(event);
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn events(&self) -> &[TemporalEdge] {
        &self.events
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.labels[id as usize]
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    /// Same node table, different events. Used by transformations that only
    /// touch timestamps.
    pub fn with_events(&self, events: Vec<TemporalEdge>) -> Result<Self> {
        let mut g = Self {
            labels: self.labels.clone(),
            index: self.index.clone(),
            events: Vec::with_capacity(events.len()),
            directed: self.directed,
        };
        for e in events {
            g.push_event(e)?;
        }
        Ok(g)
    }

    /// Events as seen by walk extraction and aggregation. Undirected contacts
    /// are expanded into both orientations; an undirected self-loop yields a
    /// single directed event.
    pub fn directed_events(&self) -> Vec<TemporalEdge> {
        if self.directed {
            return self.events.clone();
        }
        let mut out = Vec::with_capacity(2 * self.events.len());
        for e in &self.events {
            out.push(*e);
            if e.source != e.target {
                out.push(TemporalEdge::new(e.target, e.source, e.timestamp));
            }
        }
        out
    }

    /// Parses an edge list: one `source target timestamp` event per line,
    /// fields separated by commas or whitespace, `#` starts a comment line.
    pub fn parse_edge_list(text: &str, directed: bool) -> Result<Self> {
        Self::parse_edge_list_with(text, directed, ColumnOrder::SourceTargetTime)
    }

    /// Like [`TemporalGraph::parse_edge_list`] with a choice of column order.
    /// `TimeSourceTarget` ignores trailing columns (contact files often carry
    /// node metadata after `t i j`).
    pub fn parse_edge_list_with(text: &str, directed: bool, order: ColumnOrder) -> Result<Self> {
        let mut g = Self::new(directed);
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            let arity_ok = match order {
                ColumnOrder::SourceTargetTime => fields.len() == 3,
                ColumnOrder::TimeSourceTarget => fields.len() >= 3,
            };
            if !arity_ok {
                return Err(Error::parse(
                    line_no,
                    format!("expected 3 fields, found {}", fields.len()),
                ));
            }
            let (v, w, t) = match order {
                ColumnOrder::SourceTargetTime => (fields[0], fields[1], fields[2]),
                ColumnOrder::TimeSourceTarget => (fields[1], fields[2], fields[0]),
            };
            let t: i64 = t
                .parse()
                .map_err(|_| Error::parse(line_no, format!("timestamp {t:?} is not an integer")))?;
            g.add_event(v, w, t);
        }
        if g.events.is_empty() {
            return Err(Error::EmptyInput);
        }
        Ok(g)
    }

    /// Serializes as a whitespace-separated edge list readable by
    /// [`TemporalGraph::parse_edge_list`].
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(self.events.len() * 12);
        for e in &self.events {
            let _ = writeln!(
                out,
                "{} {} {}",
                self.labels[e.source as usize], self.labels[e.target as usize], e.timestamp
            );
        }
        out
    }

    /// Time-aggregated weighted graph: `w(v, w)` counts activations of `(v, w)`.
    pub fn aggregate(&self) -> StaticWeightedGraph {
        let mut edges = BTreeMap::new();
        for e in self.directed_events() {
            *edges.entry((e.source, e.target)).or_insert(0u64) += 1;
        }
        StaticWeightedGraph {
            node_count: self.node_count(),
            edges,
        }
    }

    /// Replaces every timestamp `t` by `floor(t / bin_width)`. Events that
    /// collide in a bin are kept.
    pub fn coarsen(&self, bin_width: i64) -> Result<Self> {
        if bin_width < 1 {
            return Err(Error::arg(format!("bin width must be >= 1, got {bin_width}")));
        }
        let events = self
            .events
            .iter()
            .map(|e| TemporalEdge::new(e.source, e.target, e.timestamp.div_euclid(bin_width)))
            .collect();
        self.with_events(events)
    }

    /// Drops repeated `(source, target, timestamp)` events, keeping the first.
    pub fn dedup_events(&self) -> Self {
        let mut seen = HashSet::with_capacity(self.events.len());
        let events = self
            .events
            .iter()
            .copied()
            .filter(|e| seen.insert(*e))
            .collect();
        Self {
            labels: self.labels.clone(),
            index: self.index.clone(),
            events,
            directed: self.directed,
        }
    }
}

/// Weighted static graph sharing the node index space of its temporal source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StaticWeightedGraph {
    node_count: usize,
    edges: BTreeMap<(NodeId, NodeId), u64>,
}

impl StaticWeightedGraph {
    pub fn new(node_count: usize) -> Self {
        Self {
            node_count,
            edges: BTreeMap::new(),
        }
    }

    pub fn from_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = ((NodeId, NodeId), u64)>,
    ) -> Result<Self> {
        let mut g = Self::new(node_count);
        for ((v, w), weight) in edges {
            g.add_weight(v, w, weight)?;
        }
        Ok(g)
    }

    pub fn add_weight(&mut self, v: NodeId, w: NodeId, weight: u64) -> Result<()> {
        if v as usize >= self.node_count || w as usize >= self.node_count {
            return Err(Error::UnknownNode(format!("edge ({v}, {w}) out of range")));
        }
        if weight == 0 {
            return Err(Error::arg("edge weights must be positive"));
        }
        *self.edges.entry((v, w)).or_insert(0) += weight;
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn weight(&self, v: NodeId, w: NodeId) -> u64 {
        self.edges.get(&(v, w)).copied().unwrap_or(0)
    }

    pub fn total_weight(&self) -> u64 {
        self.edges.values().sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, u64)> + '_ {
        self.edges.iter().map(|(&(v, w), &c)| (v, w, c))
    }

    /// Sorted out-neighbour lists, one per node.
    pub fn successors(&self) -> Vec<Vec<NodeId>> {
        let mut out = vec![Vec::new(); self.node_count];
        for &(v, w) in self.edges.keys() {
            out[v as usize].push(w);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_whitespace_separated() {
        let g = TemporalGraph::parse_edge_list("a b 1\nb c 2", true).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.event_count(), 2);
        let ts: Vec<i64> = g.events().iter().map(|e| e.timestamp).collect();
        assert_eq!(ts, vec![1, 2]);
        assert_eq!(g.labels(), &["a", "b", "c"]);
    }

    #[test]
    fn parses_commas_and_comments() {
        let g = TemporalGraph::parse_edge_list("# header\na,b,1\n\na,b,5\nb,c,2\n", true).unwrap();
        let (a, b, c) = (0, 1, 2);
        assert_eq!(
            g.events(),
            &[
                TemporalEdge::new(a, b, 1),
                TemporalEdge::new(a, b, 5),
                TemporalEdge::new(b, c, 2)
            ]
        );
    }

    #[test]
    fn rejects_non_integer_timestamp() {
        match TemporalGraph::parse_edge_list("a b x", true) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        match TemporalGraph::parse_edge_list("a b 1\na b", true) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_empty_input() {
        assert!(matches!(
            TemporalGraph::parse_edge_list("# nothing\n\n", true),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn aggregate_counts_activations() {
        let g = TemporalGraph::parse_edge_list("a b 1\na b 5\nb c 2", true).unwrap();
        let s = g.aggregate();
        assert_eq!(s.weight(0, 1), 2);
        assert_eq!(s.weight(1, 2), 1);
        assert_eq!(s.edge_count(), 2);
        assert_eq!(s.total_weight(), 3);

        let single = TemporalGraph::parse_edge_list("a b 1", true).unwrap().aggregate();
        assert_eq!(single.edge_count(), 1);
        assert_eq!(single.weight(0, 1), 1);
    }

    #[test]
    fn undirected_aggregate_is_symmetric() {
        let g = TemporalGraph::parse_edge_list("a b 1\na b 2\nb c 3\nc c 4", false).unwrap();
        let s = g.aggregate();
        assert_eq!(s.weight(0, 1), 2);
        assert_eq!(s.weight(1, 0), 2);
        assert_eq!(s.weight(2, 1), 1);
        assert_eq!(s.weight(2, 2), 1);
        assert_eq!(g.directed_events().len(), 7);
    }

    #[test]
    fn coarsen_bins_and_keeps_duplicates() {
        let g = TemporalGraph::parse_edge_list("a b 20\na b 899", true).unwrap();
        let c = g.coarsen(900).unwrap();
        assert_eq!(c.event_count(), 2);
        assert!(c.events().iter().all(|e| e.timestamp == 0));
        assert_eq!(c.dedup_events().event_count(), 1);

        let g = TemporalGraph::parse_edge_list("a b 900\nb c 1800", true).unwrap();
        let ts: Vec<i64> = g.coarsen(900).unwrap().events().iter().map(|e| e.timestamp).collect();
        assert_eq!(ts, vec![1, 2]);

        assert_eq!(g.coarsen(1).unwrap(), g);
        assert!(g.coarsen(0).is_err());
    }

    #[test]
    fn coarsen_floors_negative_timestamps() {
        let g = TemporalGraph::parse_edge_list("a b -1", true).unwrap();
        assert_eq!(g.coarsen(10).unwrap().events()[0].timestamp, -1);
    }

    #[test]
    fn push_event_validates_nodes() {
        let mut g = TemporalGraph::new(true);
        g.add_node("a");
        assert!(g.push_event(TemporalEdge::new(0, 1, 0)).is_err());
        assert!(g.push_event(TemporalEdge::new(0, 0, 0)).is_ok());
    }

    #[test]
    fn time_first_columns() {
        let g = TemporalGraph::parse_edge_list_with("20 1 2 A B\n40 2 3 B C\n", false, ColumnOrder::TimeSourceTarget)
            .unwrap();
        assert_eq!(g.events(), &[TemporalEdge::new(0, 1, 20), TemporalEdge::new(1, 2, 40)]);
        assert!(TemporalGraph::parse_edge_list_with("20 1\n", false, ColumnOrder::TimeSourceTarget).is_err());
        assert!(TemporalGraph::parse_edge_list("1 2 3 4\n", false).is_err());
        assert_eq!("tvw".parse::<ColumnOrder>().unwrap(), ColumnOrder::TimeSourceTarget);
    }
}
