//! Layer primitives with hand-derived backward passes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::debruijn::{BipartiteProjection, DeBruijnGraph};
use crate::error::{Error, Result};
use crate::numerics::{elu, elu_derivative, Matrix};
use crate::temporal::StaticWeightedGraph;

/// Symmetrically normalised weighted adjacency with unit self-loops, stored
/// by target row: `out[v] = sum_u w(u, v) h[u] / sqrt(S(v) S(u))` where `u`
/// ranges over in-neighbours of `v` and `v` itself, and `S(x)` is the
/// in-strength of `x` plus one.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    offsets: Vec<usize>,
    sources: Vec<usize>,
    coefficients: Vec<f64>,
}

impl Propagation {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let mut by_target: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for v in 0..n {
            by_target.insert((v, v), 1.0);
        }
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::UnknownNode(format!("edge ({u}, {v}) in a {n}-node graph")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::arg(format!("edge weight {w} must be positive")));
            }
            *by_target.entry((v, u)).or_insert(0.0) += w;
        }
        let mut strength = vec![0.0; n];
        for (&(v, _), &w) in &by_target {
            strength[v] += w;
        }
        let mut offsets = vec![0; n + 1];
        let mut sources = Vec::with_capacity(by_target.len());
        let mut coefficients = Vec::with_capacity(by_target.len());
        for (&(v, u), &w) in &by_target {
            offsets[v + 1] += 1;
            sources.push(u);
            coefficients.push(w / (strength[v] * strength[u]).sqrt());
        }
        for v in 0..n {
            offsets[v + 1] += offsets[v];
        }
        Ok(Self {
            offsets,
            sources,
            coefficients,
        })
    }

    pub fn from_debruijn(d: &DeBruijnGraph) -> Result<Self> {
        Self::new(d.node_count(), d.edges().map(|(u, v, w)| (u, v, w as f64)))
    }

    pub fn from_static(s: &StaticWeightedGraph) -> Result<Self> {
        Self::new(
            s.node_count(),
            s.edges().map(|(u, v, w)| (u as usize, v as usize, w as f64)),
        )
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.sources.len()
    }

    fn check(&self, h: &Matrix) -> Result<()> {
        if h.rows() != self.node_count() {
            return Err(Error::Shape(format!(
                "{} feature rows for a {}-node propagation",
                h.rows(),
                self.node_count()
            )));
        }
        Ok(())
    }

    pub fn apply(&self, h: &Matrix) -> Result<Matrix> {
        self.check(h)?;
        let mut out = Matrix::zeros(h.rows(), h.cols());
        for v in 0..self.node_count() {
            let dst = out.row_mut(v);
            for e in self.offsets[v]..self.offsets[v + 1] {
                let c = self.coefficients[e];
                for (d, &x) in dst.iter_mut().zip(h.row(self.sources[e])) {
                    *d += c * x;
                }
            }
        }
        Ok(out)
    }

    /// Adjoint of [`Propagation::apply`].
    pub fn apply_transpose(&self, g: &Matrix) -> Result<Matrix> {
        self.check(g)?;
        let mut out = Matrix::zeros(g.rows(), g.cols());
        for v in 0..self.node_count() {
            for e in self.offsets[v]..self.offsets[v + 1] {
                let c = self.coefficients[e];
                let u = self.sources[e];
                for j in 0..g.cols() {
                    let x = g.get(v, j);
                    out.row_mut(u)[j] += c * x;
                }
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Matrix {
        let n = self.node_count();
        let mut m = Matrix::zeros(n, n);
        for v in 0..n {
            for e in self.offsets[v]..self.offsets[v + 1] {
                m.set(v, self.sources[e], self.coefficients[e]);
            }
        }
        m
    }
}

/// Node features entering a layer. One-hot features are kept implicit.
#[derive(Debug, Clone, PartialEq)]
pub enum Features {
    OneHot(usize),
    Dense(Matrix),
}

impl Features {
    pub fn shape(&self) -> (usize, usize) {
        match self {
            Self::OneHot(n) => (*n, *n),
            Self::Dense(m) => m.shape(),
        }
    }

    pub fn to_dense(&self) -> Matrix {
        match self {
            Self::OneHot(n) => Matrix::identity(*n),
            Self::Dense(m) => m.clone(),
        }
    }

    /// `self * w`.
    pub fn matmul(&self, w: &Matrix) -> Result<Matrix> {
        match self {
            Self::OneHot(n) if *n == w.rows() => Ok(w.clone()),
            Self::OneHot(n) => Err(Error::Shape(format!("{n}x{n} one-hot * {}x{}", w.rows(), w.cols()))),
            Self::Dense(m) => m.matmul(w),
        }
    }

    /// `self^T * g`.
    pub fn t_matmul(&self, g: &Matrix) -> Result<Matrix> {
        match self {
            Self::OneHot(n) if *n == g.rows() => Ok(g.clone()),
            Self::OneHot(n) => Err(Error::Shape(format!("({n}x{n})^T * {}x{}", g.rows(), g.cols()))),
            Self::Dense(m) => m.t_matmul(g),
        }
    }
}

impl From<Matrix> for Features {
    fn from(m: Matrix) -> Self {
        Self::Dense(m)
    }
}

/// Saved activations of a message-passing layer.
#[derive(Debug, Clone)]
pub struct ConvCache {
    input: Features,
    pre: Matrix,
}

/// `elu(P (h W))` for propagation `P`.
pub fn conv_forward(prop: &Propagation, h: &Features, w: &Matrix) -> Result<(Matrix, ConvCache)> {
    let pre = prop.apply(&h.matmul(w)?)?;
    let out = pre.map(elu);
    Ok((
        out,
        ConvCache {
            input: h.clone(),
            pre,
        },
    ))
}

/// Returns `(dW, dh)`; `dh` only when requested.
pub fn conv_backward(
    prop: &Propagation,
    w: &Matrix,
    cache: &ConvCache,
    d_out: &Matrix,
    want_input_grad: bool,
) -> Result<(Matrix, Option<Matrix>)> {
    if d_out.shape() != cache.pre.shape() {
        return Err(Error::Shape("upstream gradient does not match layer output".into()));
    }
    let mut d_pre = d_out.clone();
    for (g, &z) in d_pre.data_mut().iter_mut().zip(cache.pre.data()) {
        *g *= elu_derivative(z);
    }
    let d_hw = prop.apply_transpose(&d_pre)?;
    let d_w = cache.input.t_matmul(&d_hw)?;
    let d_h = if want_input_grad {
        Some(d_hw.matmul_t(w)?)
    } else {
        None
    };
    Ok((d_w, d_h))
}

/// One message-passing step in a De Bruijn graph.
pub fn ho_layer_forward(h: &Matrix, d: &DeBruijnGraph, w: &Matrix) -> Result<Matrix> {
    Ok(conv_forward(&Propagation::from_debruijn(d)?, &Features::Dense(h.clone()), w)?.0)
}

/// One GCN step in the time-aggregated weighted graph.
pub fn fo_layer_forward(h: &Matrix, s: &StaticWeightedGraph, w: &Matrix) -> Result<Matrix> {
    Ok(conv_forward(&Propagation::from_static(s)?, &Features::Dense(h.clone()), w)?.0)
}

/// Set function used by the bipartite layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Aggregator {
    #[default]
    Sum,
    Mean,
    Max,
    Min,
}

impl std::str::FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sum" => Ok(Self::Sum),
            "mean" => Ok(Self::Mean),
            "max" => Ok(Self::Max),
            "min" => Ok(Self::Min),
            other => Err(Error::arg(format!("unknown aggregator {other:?}"))),
        }
    }
}

impl std::fmt::Display for Aggregator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Sum => "sum",
            Self::Mean => "mean",
            Self::Max => "max",
            Self::Min => "min",
        })
    }
}

const FALLBACK: usize = usize::MAX;

#[derive(Debug, Clone)]
pub struct BipartiteCache {
    aggregated: Matrix,
    pre: Matrix,
    // for MAX/MIN: chosen higher-order node per (first-order node, column)
    choice: Vec<usize>,
    ho_rows: usize,
}

/// `elu(F({h_ho[u] + h_fo[v] : u -> v}) W_b)` per first-order node `v`. Nodes
/// with no incoming higher-order node use `h_fo[v]` as the aggregate.
pub fn bipartite_forward(
    h_ho: &Matrix,
    h_fo: &Matrix,
    projection: &BipartiteProjection,
    w_b: &Matrix,
    aggregator: Aggregator,
) -> Result<(Matrix, BipartiteCache)> {
    if h_ho.cols() != h_fo.cols() {
        return Err(Error::Shape(format!(
            "higher-order width {} differs from first-order width {}",
            h_ho.cols(),
            h_fo.cols()
        )));
    }
    if h_ho.rows() != projection.ho_node_count() || h_fo.rows() != projection.first_order_node_count() {
        return Err(Error::Shape("representations do not match the bipartite projection".into()));
    }
    let members = projection.members();
    let cols = h_fo.cols();
    let mut aggregated = Matrix::zeros(h_fo.rows(), cols);
    let mut choice = Vec::new();
    if matches!(aggregator, Aggregator::Max | Aggregator::Min) {
        choice = vec![FALLBACK; h_fo.rows() * cols];
    }
    for (v, us) in members.iter().enumerate() {
        let fo = h_fo.row(v);
        let dst = aggregated.row_mut(v);
        if us.is_empty() {
            dst.copy_from_slice(fo);
            continue;
        }
        match aggregator {
            Aggregator::Sum | Aggregator::Mean => {
                for &u in us {
                    for (d, &x) in dst.iter_mut().zip(h_ho.row(u)) {
                        *d += x;
                    }
                }
                let scale = if aggregator == Aggregator::Mean {
                    1.0 / us.len() as f64
                } else {
                    1.0
                };
                let fo_weight = if aggregator == Aggregator::Mean { 1.0 } else { us.len() as f64 };
                for (d, &f) in dst.iter_mut().zip(fo) {
                    *d = *d * scale + fo_weight * f;
                }
            }
            Aggregator::Max | Aggregator::Min => {
                let better = |a: f64, b: f64| {
                    if aggregator == Aggregator::Max {
                        a > b
                    } else {
                        a < b
                    }
                };
                for j in 0..cols {
                    let mut best = us[0];
                    for &u in &us[1..] {
                        if better(h_ho.get(u, j), h_ho.get(best, j)) {
                            best = u;
                        }
                    }
                    choice[v * cols + j] = best;
                    dst[j] = h_ho.get(best, j) + fo[j];
                }
            }
        }
    }
    let pre = aggregated.matmul(w_b)?;
    let out = pre.map(elu);
    Ok((
        out,
        BipartiteCache {
            aggregated,
            pre,
            choice,
            ho_rows: h_ho.rows(),
        },
    ))
}

/// Returns `(d h_ho, d h_fo, d W_b)`.
pub fn bipartite_backward(
    projection: &BipartiteProjection,
    w_b: &Matrix,
    aggregator: Aggregator,
    cache: &BipartiteCache,
    d_out: &Matrix,
) -> Result<(Matrix, Matrix, Matrix)> {
    if d_out.shape() != cache.pre.shape() {
        return Err(Error::Shape("upstream gradient does not match bipartite output".into()));
    }
    let mut d_pre = d_out.clone();
    for (g, &z) in d_pre.data_mut().iter_mut().zip(cache.pre.data()) {
        *g *= elu_derivative(z);
    }
    let d_w = cache.aggregated.t_matmul(&d_pre)?;
    let d_agg = d_pre.matmul_t(w_b)?;
    let cols = d_agg.cols();
    let mut d_ho = Matrix::zeros(cache.ho_rows, cols);
    let mut d_fo = Matrix::zeros(d_agg.rows(), cols);
    for (v, us) in projection.members().iter().enumerate() {
        let g = d_agg.row(v);
        if us.is_empty() {
            d_fo.row_mut(v).copy_from_slice(g);
            continue;
        }
        match aggregator {
            Aggregator::Sum | Aggregator::Mean => {
                let (ho_scale, fo_scale) = if aggregator == Aggregator::Mean {
                    (1.0 / us.len() as f64, 1.0)
                } else {
                    (1.0, us.len() as f64)
                };
                for &u in us {
                    for (d, &x) in d_ho.row_mut(u).iter_mut().zip(g) {
                        *d += ho_scale * x;
                    }
                }
                for (d, &x) in d_fo.row_mut(v).iter_mut().zip(g) {
                    *d += fo_scale * x;
                }
            }
            Aggregator::Max | Aggregator::Min => {
                for (j, &x) in g.iter().enumerate() {
                    let u = cache.choice[v * cols + j];
                    d_ho.row_mut(u)[j] += x;
                    d_fo.row_mut(v)[j] += x;
                }
            }
        }
    }
    Ok((d_ho, d_fo, d_w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::debruijn::{bipartite_projection, build_debruijn};
    use crate::walks::WalkBag;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn self_loops_only_is_elementwise_elu() {
        let bag = WalkBag::from_counts(1, 1, labels(3), []).unwrap();
        let d = build_debruijn(&bag, 1).unwrap();
        let h = Matrix::from_rows(&[vec![1.0, -1.0], vec![0.5, 2.0], vec![-3.0, 0.0]]).unwrap();
        let out = ho_layer_forward(&h, &d, &Matrix::identity(2)).unwrap();
        assert_eq!(out, h.map(elu));
    }

    #[test]
    fn single_weighted_edge_by_hand() {
        // edge u=0 -> v=1 with weight 3
        let p = Propagation::new(2, [(0, 1, 3.0)]).unwrap();
        let h = Matrix::from_rows(&[vec![0.7], vec![-0.4]]).unwrap();
        let pre = p.apply(&h).unwrap();
        let s_v = 4.0f64;
        let s_u = 1.0f64;
        let expected_v = 3.0 * 0.7 / (s_v * s_u).sqrt() + (-0.4) / s_v;
        assert!((pre.get(1, 0) - expected_v).abs() < 1e-15);
        assert!((pre.get(0, 0) - 0.7).abs() < 1e-15);
    }

    #[test]
    fn symmetric_pair_averages() {
        let s = StaticWeightedGraph::from_edges(2, [((0, 1), 1), ((1, 0), 1)]).unwrap();
        let p = Propagation::from_static(&s).unwrap();
        let h = Matrix::from_rows(&[vec![2.0], vec![4.0]]).unwrap();
        let pre = p.apply(&h).unwrap();
        assert!((pre.get(0, 0) - 3.0).abs() < 1e-15);
        assert!((pre.get(1, 0) - 3.0).abs() < 1e-15);
        let zero = fo_layer_forward(&Matrix::zeros(2, 1), &s, &Matrix::identity(1)).unwrap();
        assert_eq!(zero, Matrix::zeros(2, 1));
    }

    #[test]
    fn transpose_is_adjoint() {
        let p = Propagation::new(4, [(0, 1, 2.0), (1, 2, 1.0), (3, 1, 5.0), (2, 2, 1.0)]).unwrap();
        let dense = p.to_dense();
        let g = Matrix::from_rows(&[vec![1.0, 2.0], vec![-1.0, 0.5], vec![3.0, 1.0], vec![0.0, -2.0]]).unwrap();
        let via_dense = dense.t_matmul(&g).unwrap();
        assert!(p.apply_transpose(&g).unwrap().max_abs_diff(&via_dense) < 1e-15);
    }

    #[test]
    fn bipartite_singleton_and_mean_vs_sum() {
        // ho nodes (0,2) and (1,2) both project to node 2; node 0 and 1 get nothing
        let bag = WalkBag::from_counts(1, 2, labels(3), [(vec![0, 2, 2], 1), (vec![1, 2, 2], 1)]).unwrap();
        let d = build_debruijn(&bag, 2).unwrap();
        let proj = bipartite_projection(&d);
        assert_eq!(d.node_count(), 3); // (0,2), (1,2), (2,2)
        let h_ho = Matrix::from_rows(&[vec![0.5, -0.25], vec![0.5, -0.25], vec![0.0, 0.0]]).unwrap();
        let h_fo = Matrix::from_rows(&[vec![1.0, 1.0], vec![-2.0, 0.1], vec![0.25, 0.5]]).unwrap();
        let id = Matrix::identity(2);

        let (sum, _) = bipartite_forward(&h_ho, &h_fo, &proj, &id, Aggregator::Sum).unwrap();
        let (mean, _) = bipartite_forward(&h_ho, &h_fo, &proj, &id, Aggregator::Mean).unwrap();
        // node 2: members (0,2), (1,2), (2,2)
        let expect_sum = [elu(1.0 + 0.75), elu(-0.5 + 1.5)];
        let expect_mean = [elu(1.0 / 3.0 + 0.25), elu(-0.5 / 3.0 + 0.5)];
        for j in 0..2 {
            assert!((sum.get(2, j) - expect_sum[j]).abs() < 1e-15);
            assert!((mean.get(2, j) - expect_mean[j]).abs() < 1e-15);
        }
        // fallback for nodes without higher-order members
        assert_eq!(sum.row(0), &[elu(1.0), elu(1.0)]);
        assert_eq!(mean.row(1), &[elu(-2.0), elu(0.1)]);
    }

    #[test]
    fn bipartite_width_mismatch() {
        let bag = WalkBag::from_counts(1, 1, labels(2), [(vec![0, 1], 1)]).unwrap();
        let d = build_debruijn(&bag, 1).unwrap();
        let proj = bipartite_projection(&d);
        let r = bipartite_forward(&Matrix::zeros(2, 3), &Matrix::zeros(2, 2), &proj, &Matrix::identity(2), Aggregator::Sum);
        assert!(matches!(r, Err(Error::Shape(_))));
    }

    #[test]
    fn aggregator_parse() {
        assert_eq!("MEAN".parse::<Aggregator>().unwrap(), Aggregator::Mean);
        assert!("median".parse::<Aggregator>().is_err());
        assert_eq!(Aggregator::Max.to_string(), "max");
    }
}
