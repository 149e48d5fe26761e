//! Time-respecting walk statistics.
//!
//! A causal walk of length `l` is a node sequence `v0, ..., vl` realised by
//! events `(v_{i-1}, v_i; t_i)` with `0 < t_{i+1} - t_i <= delta` for each
//! pair of consecutive events. Every distinct event combination realising a
//! sequence counts once, and walks are not required to be maximal.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::temporal::{NodeId, TemporalEdge, TemporalGraph};

/// Upper bound on the event count accepted by [`enumerate_causal_walks`].
pub const ORACLE_MAX_EVENTS: usize = 10_000;

pub type Walk = Vec<NodeId>;

/// Observed causal walk counts for lengths `0..=max_length`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkBag {
    delta: i64,
    max_length: usize,
    labels: Vec<String>,
    // indexed by walk length (edges); keys have length + 1 nodes
    counts: Vec<BTreeMap<Walk, u64>>,
}

impl WalkBag {
    pub fn new(delta: i64, max_length: usize, labels: Vec<String>) -> Result<Self> {
        check_args(delta, max_length)?;
        Ok(Self {
            delta,
            max_length,
            labels,
            counts: vec![BTreeMap::new(); max_length + 1],
        })
    }

    /// Builds a bag from explicit `(sequence, count)` pairs. Zero counts are
    /// ignored.
    pub fn from_counts(
        delta: i64,
        max_length: usize,
        labels: Vec<String>,
        counts: impl IntoIterator<Item = (Walk, u64)>,
    ) -> Result<Self> {
        let mut bag = Self::new(delta, max_length, labels)?;
        for (walk, c) in counts {
            bag.add(walk, c)?;
        }
        Ok(bag)
    }

    pub fn add(&mut self, walk: Walk, count: u64) -> Result<()> {
        if walk.is_empty() || walk.len() > self.max_length + 1 {
            return Err(Error::arg(format!(
                "walk with {} nodes does not fit max length {}",
                walk.len(),
                self.max_length
            )));
        }
        if let Some(&bad) = walk.iter().find(|&&v| v as usize >= self.labels.len()) {
            return Err(Error::UnknownNode(format!("node index {bad}")));
        }
        if count > 0 {
            *self.counts[walk.len() - 1].entry(walk).or_insert(0) += count;
        }
        Ok(())
    }

    pub fn delta(&self) -> i64 {
        self.delta
    }

    pub fn max_length(&self) -> usize {
        self.max_length
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Walks of exactly `length` edges.
    pub fn of_length(&self, length: usize) -> &BTreeMap<Walk, u64> {
        static EMPTY: BTreeMap<Walk, u64> = BTreeMap::new();
        self.counts.get(length).unwrap_or(&EMPTY)
    }

    pub fn count(&self, walk: &[NodeId]) -> u64 {
        if walk.is_empty() {
            return 0;
        }
        self.of_length(walk.len() - 1).get(walk).copied().unwrap_or(0)
    }

    pub fn total(&self, length: usize) -> u64 {
        self.of_length(length).values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Walk, u64)> + '_ {
        self.counts.iter().flat_map(|m| m.iter().map(|(w, &c)| (w, c)))
    }

    /// Same walks with every count multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        let mut out = self.clone();
        for m in &mut out.counts {
            for c in m.values_mut() {
                *c *= factor;
            }
            m.retain(|_, c| *c > 0);
        }
        out
    }

    /// Text form: header comment with `delta` and `max_length`, then one
    /// `node,node,...<TAB>count` line per sequence, shortest walks first.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# delta={} max_length={}", self.delta, self.max_length);
        for (walk, c) in self.iter() {
            let names: Vec<&str> = walk.iter().map(|&v| self.labels[v as usize].as_str()).collect();
            let _ = writeln!(out, "{}\t{}", names.join(","), c);
        }
        out
    }

    /// Parses [`WalkBag::to_text`] output. Node indices are assigned in
    /// first-seen order.
    pub fn parse(text: &str) -> Result<Self> {
        let mut delta = None;
        let mut max_length = None;
        let mut labels: Vec<String> = Vec::new();
        let mut index: HashMap<String, NodeId> = HashMap::new();
        let mut rows = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(header) = line.strip_prefix('#') {
                for kv in header.split_whitespace() {
                    if let Some(v) = kv.strip_prefix("delta=") {
                        delta = Some(v.parse::<i64>().map_err(|_| Error::parse(line_no, "bad delta"))?);
                    } else if let Some(v) = kv.strip_prefix("max_length=") {
                        max_length =
                            Some(v.parse::<usize>().map_err(|_| Error::parse(line_no, "bad max_length"))?);
                    }
                }
                continue;
            }
            let (seq, count) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(line_no, "expected <walk>\\t<count>"))?;
            let count: u64 = count
                .trim()
                .parse()
                .map_err(|_| Error::parse(line_no, format!("count {count:?} is not an integer")))?;
            let walk: Walk = seq
                .split(',')
                .map(|name| {
                    let name = name.trim();
                    *index.entry(name.to_owned()).or_insert_with(|| {
                        labels.push(name.to_owned());
                        (labels.len() - 1) as NodeId
                    })
                })
                .collect();
            rows.push((line_no, walk, count));
        }
        let delta = delta.ok_or_else(|| Error::parse(1, "missing delta header"))?;
        let max_length = match max_length {
            Some(k) => k,
            None => rows.iter().map(|(_, w, _)| w.len().saturating_sub(1)).max().unwrap_or(1),
        };
        let mut bag = Self::new(delta, max_length, labels)?;
        for (line_no, walk, count) in rows {
            bag.add(walk, count).map_err(|e| Error::parse(line_no, e.to_string()))?;
        }
        Ok(bag)
    }
}

fn check_args(delta: i64, max_length: usize) -> Result<()> {
    if max_length < 1 {
        return Err(Error::arg("maximum walk length must be >= 1"));
    }
    if delta < 1 {
        return Err(Error::arg("delta must be >= 1"));
    }
    Ok(())
}

/// Counts causal walks of lengths `0..=max_length`.
///
/// Events are swept in time order. For every node we keep, per recent
/// timestamp, the walks (up to `max_length - 1` edges) whose last event
/// arrived at that node then; an event `(u, v; t)` extends exactly the walks
/// stored at `u` for timestamps in `[t - delta, t)`.
pub fn count_causal_walks(g: &TemporalGraph, delta: i64, max_length: usize) -> Result<WalkBag> {
    check_args(delta, max_length)?;
    let mut bag = WalkBag::new(delta, max_length, g.labels().to_vec())?;
    for v in 0..g.node_count() as NodeId {
        bag.counts[0].insert(vec![v], 1);
    }

    let mut events = g.directed_events();
    events.sort_by_key(|e| e.timestamp);

    type Frontier = HashMap<Walk, u64>;
    let mut recent: Vec<VecDeque<(i64, Frontier)>> = vec![VecDeque::new(); g.node_count()];

    let mut start = 0;
    while start < events.len() {
        let t = events[start].timestamp;
        let end = start + events[start..].iter().take_while(|e| e.timestamp == t).count();

        let mut arrivals: BTreeMap<NodeId, Frontier> = BTreeMap::new();
        for e in &events[start..end] {
            let mut local: Frontier = HashMap::new();
            local.insert(vec![e.source, e.target], 1);
            let window = &mut recent[e.source as usize];
            while window.front().is_some_and(|(t0, _)| *t0 < t - delta) {
                window.pop_front();
            }
            for (_, frontier) in window.iter() {
                for (walk, &c) in frontier {
                    let mut ext = Vec::with_capacity(walk.len() + 1);
                    ext.extend_from_slice(walk);
                    ext.push(e.target);
                    *local.entry(ext).or_insert(0) += c;
                }
            }
            let sink = arrivals.entry(e.target).or_default();
            for (walk, c) in local {
                let length = walk.len() - 1;
                if length < max_length {
                    *sink.entry(walk.clone()).or_insert(0) += c;
                }
                *bag.counts[length].entry(walk).or_insert(0) += c;
            }
        }

        for (v, frontier) in arrivals {
            if frontier.is_empty() {
                continue;
            }
            let window = &mut recent[v as usize];
            while window.front().is_some_and(|(t0, _)| *t0 < t - delta) {
                window.pop_front();
            }
            window.push_back((t, frontier));
        }
        start = end;
    }
    Ok(bag)
}

/// Exhaustive reference enumeration of causal walks. Exponential in the
/// walk length; intended for testing.
pub fn enumerate_causal_walks(g: &TemporalGraph, delta: i64, max_length: usize) -> Result<WalkBag> {
    check_args(delta, max_length)?;
    if g.event_count() > ORACLE_MAX_EVENTS {
        return Err(Error::TooLarge(format!(
            "{} events exceed the enumeration limit of {}",
            g.event_count(),
            ORACLE_MAX_EVENTS
        )));
    }
    let mut bag = WalkBag::new(delta, max_length, g.labels().to_vec())?;
    for v in 0..g.node_count() as NodeId {
        bag.counts[0].insert(vec![v], 1);
    }
    let events = g.directed_events();

    fn extend(
        events: &[TemporalEdge],
        last: &TemporalEdge,
        walk: &mut Walk,
        delta: i64,
        max_length: usize,
        counts: &mut [BTreeMap<Walk, u64>],
    ) {
        *counts[walk.len() - 1].entry(walk.clone()).or_insert(0) += 1;
        if walk.len() - 1 == max_length {
            return;
        }
        for next in events {
            let gap = next.timestamp - last.timestamp;
            if next.source == last.target && gap > 0 && gap <= delta {
                walk.push(next.target);
                extend(events, next, walk, delta, max_length, counts);
                walk.pop();
            }
        }
    }

    for first in &events {
        let mut walk = vec![first.source, first.target];
        extend(&events, first, &mut walk, delta, max_length, &mut bag.counts);
    }
    Ok(bag)
}
