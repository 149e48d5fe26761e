//! Selection of the De Bruijn graph order by nested likelihood-ratio tests.
//!
//! All models compared at evaluation order `K` score the same data: each
//! observed walk of length `K` contributes one transition, from its first `K`
//! nodes to its last node. The order-`k` model conditions that transition on
//! the last `k` nodes only, with maximum-likelihood probabilities given by the
//! normalised edge weights of the order-`k` De Bruijn graph of the walks'
//! length-`k` suffixes. For `k = K` this is exactly the De Bruijn graph of the
//! bag, and lower orders are restrictions of higher ones, so likelihoods are
//! nested.
//!
//! Degrees of freedom come from the static topology: the number of feasible
//! order-`k` transitions minus one normalisation constraint per feasible
//! state that has at least one transition.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::debruijn::{DeBruijnGraph, DEFAULT_FEASIBLE_CAP};
use crate::error::{Error, Result};
use crate::numerics::chi_squared_sf;
use crate::temporal::{NodeId, StaticWeightedGraph};
use crate::walks::{Walk, WalkBag};

pub const DEFAULT_ALPHA: f64 = 0.01;

/// Row-normalised transition probabilities of an order-`k` model.
#[derive(Debug, Clone)]
pub struct TransitionModel {
    graph: DeBruijnGraph,
    out_strength: Vec<u64>,
}

impl TransitionModel {
    pub fn from_debruijn(graph: DeBruijnGraph) -> Self {
        let mut out_strength = vec![0; graph.node_count()];
        for (u, _, w) in graph.edges() {
            out_strength[u] += w;
        }
        Self { graph, out_strength }
    }

    pub fn order(&self) -> usize {
        self.graph.order()
    }

    pub fn graph(&self) -> &DeBruijnGraph {
        &self.graph
    }

    /// Probability of the transition encoded by the walk `(x_0, ..., x_k)`.
    pub fn probability(&self, walk: &[NodeId]) -> f64 {
        let k = self.graph.order();
        if walk.len() != k + 1 {
            return 0.0;
        }
        let (Some(u), Some(v)) = (self.graph.node_index(&walk[..k]), self.graph.node_index(&walk[1..])) else {
            return 0.0;
        };
        match self.out_strength[u] {
            0 => 0.0,
            total => self.graph.weight(u, v) as f64 / total as f64,
        }
    }

    /// Sum of outgoing probabilities for each state with at least one
    /// transition.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.graph.node_count()];
        for (u, _, w) in self.graph.edges() {
            sums[u] += w as f64 / self.out_strength[u] as f64;
        }
        sums.into_iter()
            .zip(&self.out_strength)
            .filter(|(_, &s)| s > 0)
            .map(|(p, _)| p)
            .collect()
    }
}

fn check_orders(bag: &WalkBag, k: usize, eval_order: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::arg("model order must be >= 1"));
    }
    if k > eval_order {
        return Err(Error::arg(format!("model order {k} exceeds evaluation order {eval_order}")));
    }
    if eval_order > bag.max_length() {
        return Err(Error::arg(format!(
            "evaluation order {eval_order} exceeds the bag's maximum walk length {}",
            bag.max_length()
        )));
    }
    Ok(())
}

/// Maximum-likelihood order-`k` model for the transitions scored at
/// `eval_order`.
pub fn transition_model(bag: &WalkBag, k: usize, eval_order: usize) -> Result<TransitionModel> {
    check_orders(bag, k, eval_order)?;
    let mut suffixes: BTreeMap<Walk, u64> = BTreeMap::new();
    for (walk, &c) in bag.of_length(eval_order) {
        *suffixes.entry(walk[eval_order - k..].to_vec()).or_insert(0) += c;
    }
    let graph = DeBruijnGraph::from_walk_counts(
        k,
        bag.node_count(),
        std::iter::empty(),
        suffixes.iter().map(|(w, &c)| (w, c)),
    )?;
    Ok(TransitionModel::from_debruijn(graph))
}

/// Log-likelihood of the length-`eval_order` walks under the order-`k` model.
pub fn log_likelihood(bag: &WalkBag, k: usize, eval_order: usize) -> Result<f64> {
    let model = transition_model(bag, k, eval_order)?;
    let mut total = 0.0;
    for (walk, &c) in bag.of_length(eval_order) {
        let p = model.probability(&walk[eval_order - k..]);
        if p <= 0.0 {
            return Err(Error::Numeric(format!("zero-probability transition {walk:?}")));
        }
        total += c as f64 * p.ln();
    }
    Ok(total)
}

/// Free parameters of the order-`k` model constrained by the topology of `s`.
pub fn dof(s: &StaticWeightedGraph, k: usize) -> Result<u64> {
    dof_with_cap(s, k, DEFAULT_FEASIBLE_CAP)
}

/// [`dof`] with an explicit cap on the number of feasible higher-order
/// states. Counts walks per end node instead of materialising them.
pub fn dof_with_cap(s: &StaticWeightedGraph, k: usize, cap: usize) -> Result<u64> {
    if k < 1 {
        return Err(Error::arg("model order must be >= 1"));
    }
    let n = s.node_count();
    let succ = s.successors();
    // ending[v] = number of walks of the current length ending in v
    let mut ending = vec![1u128; n];
    for _ in 1..k {
        let mut next = vec![0u128; n];
        for (v, out) in succ.iter().enumerate() {
            for &w in out {
                next[w as usize] = next[w as usize].saturating_add(ending[v]);
            }
        }
        ending = next;
    }
    let states: u128 = ending.iter().fold(0u128, |a, &b| a.saturating_add(b));
    if states > cap as u128 {
        return Err(Error::TooLarge(format!(
            "feasible order-{k} model has {states} states, cap is {cap}"
        )));
    }
    let mut transitions = 0u128;
    let mut rows = 0u128;
    for (v, out) in succ.iter().enumerate() {
        if !out.is_empty() {
            transitions += ending[v] * out.len() as u128;
            rows += ending[v];
        }
    }
    u64::try_from(transitions - rows).map_err(|_| Error::TooLarge("degrees of freedom overflow u64".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LikelihoodRatioTest {
    pub null_order: usize,
    pub alt_order: usize,
    pub statistic: f64,
    pub delta_dof: i64,
    pub p_value: f64,
}

/// Tests order `k0` (null) against `k1`, both evaluated at `k1`.
pub fn likelihood_ratio_test(
    bag: &WalkBag,
    s: &StaticWeightedGraph,
    k0: usize,
    k1: usize,
) -> Result<LikelihoodRatioTest> {
    if k0 >= k1 {
        return Err(Error::arg(format!("null order {k0} must be below alternative order {k1}")));
    }
    let l0 = log_likelihood(bag, k0, k1)?;
    let l1 = log_likelihood(bag, k1, k1)?;
    let statistic = -2.0 * (l0 - l1);
    let delta_dof = dof(s, k1)? as i64 - dof(s, k0)? as i64;
    let p_value = if delta_dof <= 0 {
        1.0
    } else {
        chi_squared_sf(statistic.max(0.0), delta_dof as u64)?
    };
    Ok(LikelihoodRatioTest {
        null_order: k0,
        alt_order: k1,
        statistic,
        delta_dof,
        p_value,
    })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::arg(format!("significance level must be in (0, 1), got {alpha}")));
    }
    Ok(())
}

/// Smallest order `k` such that `k` vs `k + 1` is not rejected at `alpha`
/// (capped at `k_max`).
pub fn select_order(bag: &WalkBag, s: &StaticWeightedGraph, k_max: usize, alpha: f64) -> Result<usize> {
    Ok(order_selection(bag, s, k_max, alpha)?.chosen_order)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderFit {
    pub order: usize,
    pub log_likelihood: f64,
    pub dof: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderSelectionResult {
    /// Walk length at which the per-order log-likelihoods are evaluated.
    pub eval_order: usize,
    pub alpha: f64,
    pub orders: Vec<OrderFit>,
    pub tests: Vec<LikelihoodRatioTest>,
    pub chosen_order: usize,
}

impl OrderSelectionResult {
    pub fn to_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "log-likelihoods evaluated on walks of length {}", self.eval_order);
        let _ = writeln!(out, "{:>5}  {:>18}  {:>12}", "order", "log L", "dof");
        for f in &self.orders {
            let _ = writeln!(out, "{:>5}  {:>18.6}  {:>12}", f.order, f.log_likelihood, f.dof);
        }
        let _ = writeln!(out, "{:>7}  {:>16}  {:>10}  {:>12}", "test", "statistic", "delta dof", "p-value");
        for t in &self.tests {
            let _ = writeln!(
                out,
                "{:>3} v {:<1}  {:>16.6}  {:>10}  {:>12.6e}",
                t.null_order, t.alt_order, t.statistic, t.delta_dof, t.p_value
            );
        }
        let _ = writeln!(out, "chosen order: {} (alpha = {})", self.chosen_order, self.alpha);
        out
    }
}

/// Full report for orders `1..=k_max`.
pub fn order_selection(
    bag: &WalkBag,
    s: &StaticWeightedGraph,
    k_max: usize,
    alpha: f64,
) -> Result<OrderSelectionResult> {
    check_alpha(alpha)?;
    if k_max < 1 || k_max > bag.max_length() {
        return Err(Error::arg(format!(
            "maximum order {k_max} outside 1..={}",
            bag.max_length()
        )));
    }
    let orders = (1..=k_max)
        .map(|k| {
            Ok(OrderFit {
                order: k,
                log_likelihood: log_likelihood(bag, k, k_max)?,
                dof: dof(s, k)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tests = (1..k_max)
        .map(|k| likelihood_ratio_test(bag, s, k, k + 1))
        .collect::<Result<Vec<_>>>()?;
    let chosen_order = 1 + tests.iter().take_while(|t| t.p_value < alpha).count();
    Ok(OrderSelectionResult {
        eval_order: k_max,
        alpha,
        orders,
        tests,
        chosen_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("n{i}")).collect()
    }

    fn complete(n: u32) -> StaticWeightedGraph {
        let edges = (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| ((a, b), 1)));
        StaticWeightedGraph::from_edges(n as usize, edges).unwrap()
    }

    #[test]
    fn two_successors_halve_the_likelihood() {
        let bag = WalkBag::from_counts(
            1,
            2,
            labels(4),
            [
                (vec![0, 1], 2),
                (vec![1, 2], 1),
                (vec![1, 3], 1),
                (vec![0, 1, 2], 1),
                (vec![0, 1, 3], 1),
            ],
        )
        .unwrap();
        let l = log_likelihood(&bag, 1, 2).unwrap();
        assert!((l - 2.0 * 0.5f64.ln()).abs() < 1e-14);
        // order 2 sees the same ambiguity
        assert!((log_likelihood(&bag, 2, 2).unwrap() - l).abs() < 1e-14);
    }

    #[test]
    fn deterministic_chain_has_zero_likelihood_loss() {
        let bag = WalkBag::from_counts(
            1,
            3,
            labels(4),
            [(vec![0, 1, 2, 3], 5), (vec![0, 1, 2], 5), (vec![1, 2, 3], 5), (vec![0, 1], 5)],
        )
        .unwrap();
        for eval in 1..=3 {
            for k in 1..=eval {
                assert_eq!(log_likelihood(&bag, k, eval).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn order_arguments_are_checked() {
        let bag = WalkBag::new(1, 2, labels(2)).unwrap();
        assert!(log_likelihood(&bag, 3, 2).is_err());
        assert!(log_likelihood(&bag, 2, 1).is_err());
        assert!(log_likelihood(&bag, 0, 1).is_err());
        let s = complete(2);
        assert!(likelihood_ratio_test(&bag, &s, 2, 2).is_err());
        assert!(order_selection(&bag, &s, 3, 0.01).is_err());
        assert!(order_selection(&bag, &s, 2, 1.0).is_err());
    }

    #[test]
    fn dof_examples() {
        let cycle = StaticWeightedGraph::from_edges(2, [((0, 1), 1), ((1, 0), 1)]).unwrap();
        assert_eq!(dof(&cycle, 1).unwrap(), 0);
        assert_eq!(dof(&cycle, 2).unwrap(), 0);
        assert_eq!(dof(&complete(3), 1).unwrap(), 3);
        let chain = StaticWeightedGraph::from_edges(3, [((0, 1), 1), ((1, 2), 1)]).unwrap();
        assert_eq!(dof(&chain, 2).unwrap(), 0);
        // complete graph on 3 nodes, order 2: 6 states, 2 transitions each
        assert_eq!(dof(&complete(3), 2).unwrap(), 6);
    }

    #[test]
    fn dof_cap() {
        assert!(matches!(dof_with_cap(&complete(5), 3, 10), Err(Error::TooLarge(_))));
    }

    #[test]
    fn zero_delta_dof_gives_unit_p() {
        let cycle = StaticWeightedGraph::from_edges(2, [((0, 1), 1), ((1, 0), 1)]).unwrap();
        let bag = WalkBag::from_counts(1, 2, labels(2), [(vec![0, 1, 0], 3), (vec![1, 0, 1], 2)]).unwrap();
        let t = likelihood_ratio_test(&bag, &cycle, 1, 2).unwrap();
        assert_eq!(t.delta_dof, 0);
        assert_eq!(t.p_value, 1.0);
    }

    #[test]
    fn rows_normalise() {
        let bag = WalkBag::from_counts(
            1,
            2,
            labels(3),
            [(vec![0, 1, 2], 3), (vec![0, 1, 0], 1), (vec![2, 1, 2], 7), (vec![1, 2, 1], 2)],
        )
        .unwrap();
        for k in 1..=2 {
            for s in transition_model(&bag, k, 2).unwrap().row_sums() {
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn report_text_mentions_choice() {
        let bag = WalkBag::from_counts(1, 2, labels(3), [(vec![0, 1, 2], 3), (vec![2, 1, 0], 3)]).unwrap();
        let r = order_selection(&bag, &complete(3), 2, 0.01).unwrap();
        assert!(r.to_text().contains("chosen order: 1"));
        assert_eq!(r.orders.len(), 2);
        assert_eq!(r.tests.len(), 1);
    }
}
