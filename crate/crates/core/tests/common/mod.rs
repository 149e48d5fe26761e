#![allow(dead_code)]

use dbgnn_core::dbgnn::{
    bipartite_backward, bipartite_forward, conv_backward, conv_forward, Aggregator, Features, Propagation,
};
use dbgnn_core::debruijn::BipartiteProjection;
use dbgnn_core::numerics::{softmax_cross_entropy, Matrix};
use dbgnn_core::temporal::{NodeId, TemporalEdge, TemporalGraph};
use dbgnn_core::NodeClassifier;
use rand::Rng;

pub const FD_STEP: f64 = 1e-5;
pub const FD_TOLERANCE: f64 = 1e-4;

/// Random temporal graph on `nodes` nodes (all registered, some possibly
/// isolated) with timestamps in `0..max_time`.
pub fn random_temporal_graph<R: Rng>(rng: &mut R, nodes: usize, events: usize, max_time: i64, directed: bool) -> TemporalGraph {
    let mut g = TemporalGraph::new(directed);
    for v in 0..nodes {
        g.add_node(&format!("n{v}"));
    }
    for _ in 0..events {
        let s = rng.gen_range(0..nodes) as NodeId;
        let t = rng.gen_range(0..nodes) as NodeId;
        g.push_event(TemporalEdge::new(s, t, rng.gen_range(0..max_time))).unwrap();
    }
    g
}

pub fn graph_from_parts(nodes: usize, events: &[(usize, usize, i64)], directed: bool) -> TemporalGraph {
    let mut g = TemporalGraph::new(directed);
    for v in 0..nodes {
        g.add_node(&format!("n{v}"));
    }
    for &(s, t, time) in events {
        g.push_event(TemporalEdge::new((s % nodes) as NodeId, (t % nodes) as NodeId, time)).unwrap();
    }
    g
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::uniform(rows, cols, 1.0, rng)
}

/// Norm-wise relative error between two gradients.
pub fn relative_error(analytic: &Matrix, numeric: &Matrix) -> f64 {
    let diff: f64 = analytic
        .data()
        .iter()
        .zip(numeric.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let norm = |m: &Matrix| m.data().iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = norm(analytic).max(norm(numeric));
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}

/// Central differences of `f` with respect to every entry of `x`.
pub fn numeric_gradient(x: &Matrix, mut f: impl FnMut(&Matrix) -> f64) -> Matrix {
    let mut grad = Matrix::zeros(x.rows(), x.cols());
    let mut probe = x.clone();
    for i in 0..x.rows() {
        for j in 0..x.cols() {
            let orig = x.get(i, j);
            probe.set(i, j, orig + FD_STEP);
            let up = f(&probe);
            probe.set(i, j, orig - FD_STEP);
            let down = f(&probe);
            probe.set(i, j, orig);
            grad.set(i, j, (up - down) / (2.0 * FD_STEP));
        }
    }
    grad
}

fn dot(a: &Matrix, b: &Matrix) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| x * y).sum()
}

/// Worst relative error over the weight and input gradients of one
/// message-passing layer, objective `<layer(h), r>`.
pub fn conv_layer_error(prop: &Propagation, h: &Matrix, w: &Matrix, r: &Matrix) -> f64 {
    let (_, cache) = conv_forward(prop, &Features::Dense(h.clone()), w).unwrap();
    let (d_w, d_h) = conv_backward(prop, w, &cache, r, true).unwrap();
    let obj = |h: &Matrix, w: &Matrix| dot(&conv_forward(prop, &Features::Dense(h.clone()), w).unwrap().0, r);
    let n_w = numeric_gradient(w, |w| obj(h, w));
    let n_h = numeric_gradient(h, |h| obj(h, w));
    relative_error(&d_w, &n_w).max(relative_error(&d_h.unwrap(), &n_h))
}

/// Worst relative error over the three gradients of the bipartite layer.
pub fn bipartite_layer_error(
    proj: &BipartiteProjection,
    h_ho: &Matrix,
    h_fo: &Matrix,
    w_b: &Matrix,
    agg: Aggregator,
    r: &Matrix,
) -> f64 {
    let (_, cache) = bipartite_forward(h_ho, h_fo, proj, w_b, agg).unwrap();
    let (d_ho, d_fo, d_w) = bipartite_backward(proj, w_b, agg, &cache, r).unwrap();
    let obj = |a: &Matrix, b: &Matrix, w: &Matrix| dot(&bipartite_forward(a, b, proj, w, agg).unwrap().0, r);
    let n_ho = numeric_gradient(h_ho, |a| obj(a, h_fo, w_b));
    let n_fo = numeric_gradient(h_fo, |b| obj(h_ho, b, w_b));
    let n_w = numeric_gradient(w_b, |w| obj(h_ho, h_fo, w));
    relative_error(&d_ho, &n_ho)
        .max(relative_error(&d_fo, &n_fo))
        .max(relative_error(&d_w, &n_w))
}

/// Relative error of the cross-entropy gradient with respect to the logits.
pub fn loss_error(logits: &Matrix, labels: &[usize], mask: &[usize]) -> f64 {
    let (_, grad) = softmax_cross_entropy(logits, labels, mask).unwrap();
    let numeric = numeric_gradient(logits, |z| softmax_cross_entropy(z, labels, mask).unwrap().0);
    relative_error(&grad, &numeric)
}

/// Worst relative error over every parameter of a composed model, objective
/// the masked cross-entropy.
pub fn model_error<M: NodeClassifier + Clone>(
    model: &M,
    inputs: &dbgnn_core::dbgnn::ModelInputs,
    labels: &[usize],
    mask: &[usize],
) -> f64 {
    let pass = model.forward(inputs).unwrap();
    let (_, d_logits) = softmax_cross_entropy(&pass.logits, labels, mask).unwrap();
    let grads = model.backward(&pass, &d_logits).unwrap();
    let params: Vec<Matrix> = model.parameters().into_iter().cloned().collect();
    let mut worst: f64 = 0.0;
    for (i, p) in params.iter().enumerate() {
        let numeric = numeric_gradient(p, |probe| {
            let mut m = model.clone();
            *m.parameters_mut()[i] = probe.clone();
            let logits = m.forward(inputs).unwrap().logits;
            softmax_cross_entropy(&logits, labels, mask).unwrap().0
        });
        worst = worst.max(relative_error(&grads[i], &numeric));
    }
    worst
}
