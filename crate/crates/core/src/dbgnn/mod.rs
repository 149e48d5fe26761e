//! De Bruijn graph neural network.
//!
//! Two message-passing branches run side by side: one over the order-`k` De
//! Bruijn graph, one GCN over the weighted time-aggregated graph. A bipartite
//! layer folds higher-order representations onto their last first-order
//! node, and a linear layer produces class logits.

mod layers;

pub use layers::{
    bipartite_backward, bipartite_forward, conv_backward, conv_forward, fo_layer_forward, ho_layer_forward,
    Aggregator, BipartiteCache, ConvCache, Features, Propagation,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::debruijn::{bipartite_projection, BipartiteProjection, DeBruijnGraph};
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::temporal::StaticWeightedGraph;

/// RNG stream used for weight initialisation; splits use a different one.
pub const INIT_STREAM: u64 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DbgnnConfig {
    pub order: usize,
    /// `[H0, H1, ..., Hl]`; `H0` is the higher-order input width.
    pub ho_dims: Vec<usize>,
    /// `[F0, F1, ..., Fg]`; `F0` is the first-order input width.
    pub fo_dims: Vec<usize>,
    pub aggregator: Aggregator,
    pub repr_dim: usize,
    pub classes: usize,
    pub seed: u64,
}

impl DbgnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::arg("order must be >= 1"));
        }
        if self.ho_dims.len() < 2 || self.fo_dims.len() < 2 {
            return Err(Error::arg("each branch needs an input width and at least one layer"));
        }
        if self
            .ho_dims
            .iter()
            .chain(&self.fo_dims)
            .chain([&self.repr_dim, &self.classes])
            .any(|&d| d == 0)
        {
            return Err(Error::arg("all dimensions must be >= 1"));
        }
        if self.ho_dims.last() != self.fo_dims.last() {
            return Err(Error::arg(format!(
                "last higher-order width {} must equal last first-order width {}",
                self.ho_dims.last().unwrap(),
                self.fo_dims.last().unwrap()
            )));
        }
        Ok(())
    }
}

/// Node features for both branches.
#[derive(Debug, Clone)]
pub struct ModelInputs {
    pub ho: Features,
    pub fo: Features,
}

impl ModelInputs {
    pub fn one_hot(ho_nodes: usize, fo_nodes: usize) -> Self {
        Self {
            ho: Features::OneHot(ho_nodes),
            fo: Features::OneHot(fo_nodes),
        }
    }

    pub fn dense(ho: Matrix, fo: Matrix) -> Self {
        Self {
            ho: Features::Dense(ho),
            fo: Features::Dense(fo),
        }
    }
}

/// Everything a backward pass needs from the forward pass.
#[derive(Debug, Clone)]
pub struct ForwardPass {
    pub logits: Matrix,
    /// Input to the classifier: bipartite output for DBGNN, last GCN layer for
    /// the baseline.
    pub representation: Matrix,
    ho: Vec<ConvCache>,
    fo: Vec<ConvCache>,
    bipartite: Option<BipartiteCache>,
}

pub trait NodeClassifier {
    fn forward(&self, inputs: &ModelInputs) -> Result<ForwardPass>;

    /// Gradients of every parameter (in [`NodeClassifier::parameters`] order)
    /// given the loss gradient with respect to the logits.
    fn backward(&self, pass: &ForwardPass, d_logits: &Matrix) -> Result<Vec<Matrix>>;

    fn parameters(&self) -> Vec<&Matrix>;

    fn parameters_mut(&mut self) -> Vec<&mut Matrix>;

    fn class_count(&self) -> usize;

    fn load_parameters(&mut self, values: Vec<Matrix>) -> Result<()> {
        let mut params = self.parameters_mut();
        if params.len() != values.len() {
            return Err(Error::Shape(format!(
                "model has {} parameter matrices, got {}",
                params.len(),
                values.len()
            )));
        }
        for (p, v) in params.iter().zip(&values) {
            if p.shape() != v.shape() {
                return Err(Error::Shape(format!("parameter {:?} vs {:?}", p.shape(), v.shape())));
            }
        }
        for (p, v) in params.iter_mut().zip(values) {
            **p = v;
        }
        Ok(())
    }
}

fn check_inputs(h: &Features, rows: usize, cols: usize, what: &str) -> Result<()> {
    if h.shape() != (rows, cols) {
        return Err(Error::Shape(format!(
            "{what} features are {:?}, expected {:?}",
            h.shape(),
            (rows, cols)
        )));
    }
    Ok(())
}

fn run_branch(prop: &Propagation, weights: &[Matrix], input: &Features) -> Result<(Matrix, Vec<ConvCache>)> {
    let mut caches = Vec::with_capacity(weights.len());
    let mut out = None;
    for w in weights {
        let h = out.take().map_or_else(|| input.clone(), Features::Dense);
        let (next, cache) = conv_forward(prop, &h, w)?;
        caches.push(cache);
        out = Some(next);
    }
    Ok((out.unwrap_or_else(|| input.to_dense()), caches))
}

fn branch_backward(
    prop: &Propagation,
    weights: &[Matrix],
    caches: &[ConvCache],
    mut grad: Matrix,
) -> Result<Vec<Matrix>> {
    let mut grads = vec![Matrix::zeros(0, 0); weights.len()];
    for i in (0..weights.len()).rev() {
        let (d_w, d_h) = conv_backward(prop, &weights[i], &caches[i], &grad, i > 0)?;
        grads[i] = d_w;
        if let Some(d_h) = d_h {
            grad = d_h;
        }
    }
    Ok(grads)
}

#[derive(Debug, Clone)]
pub struct DbgnnModel {
    config: DbgnnConfig,
    ho_weights: Vec<Matrix>,
    fo_weights: Vec<Matrix>,
    bipartite_weight: Matrix,
    classifier: Matrix,
    ho_prop: Propagation,
    fo_prop: Propagation,
    projection: BipartiteProjection,
}

impl DbgnnModel {
    /// Builds the frozen propagation structures and Glorot-initialises all
    /// weights from `config.seed`.
    pub fn new(config: DbgnnConfig, debruijn: &DeBruijnGraph, first_order: &StaticWeightedGraph) -> Result<Self> {
        config.validate()?;
        if debruijn.order() != config.order {
            return Err(Error::arg(format!(
                "config order {} but De Bruijn graph of order {}",
                config.order,
                debruijn.order()
            )));
        }
        if debruijn.first_order_node_count() != first_order.node_count() {
            return Err(Error::Shape("De Bruijn graph and first-order graph disagree on |V|".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(INIT_STREAM);
        let ho_weights = config
            .ho_dims
            .windows(2)
            .map(|d| Matrix::glorot(d[0], d[1], &mut rng))
            .collect();
        let fo_weights = config
            .fo_dims
            .windows(2)
            .map(|d| Matrix::glorot(d[0], d[1], &mut rng))
            .collect();
        let last = *config.fo_dims.last().unwrap();
        let bipartite_weight = Matrix::glorot(last, config.repr_dim, &mut rng);
        let classifier = Matrix::glorot(config.repr_dim, config.classes, &mut rng);
        Ok(Self {
            ho_prop: Propagation::from_debruijn(debruijn)?,
            fo_prop: Propagation::from_static(first_order)?,
            projection: bipartite_projection(debruijn),
            config,
            ho_weights,
            fo_weights,
            bipartite_weight,
            classifier,
        })
    }

    pub fn config(&self) -> &DbgnnConfig {
        &self.config
    }

    pub fn ho_node_count(&self) -> usize {
        self.ho_prop.node_count()
    }

    pub fn fo_node_count(&self) -> usize {
        self.fo_prop.node_count()
    }

    pub fn one_hot_inputs(&self) -> ModelInputs {
        ModelInputs::one_hot(self.ho_node_count(), self.fo_node_count())
    }
}

impl NodeClassifier for DbgnnModel {
    fn forward(&self, inputs: &ModelInputs) -> Result<ForwardPass> {
        check_inputs(&inputs.ho, self.ho_node_count(), self.config.ho_dims[0], "higher-order")?;
        check_inputs(&inputs.fo, self.fo_node_count(), self.config.fo_dims[0], "first-order")?;
        let (h_ho, ho) = run_branch(&self.ho_prop, &self.ho_weights, &inputs.ho)?;
        let (h_fo, fo) = run_branch(&self.fo_prop, &self.fo_weights, &inputs.fo)?;
        let (h_b, bip) = bipartite_forward(
            &h_ho,
            &h_fo,
            &self.projection,
            &self.bipartite_weight,
            self.config.aggregator,
        )?;
        let logits = h_b.matmul(&self.classifier)?;
        Ok(ForwardPass {
            logits,
            representation: h_b,
            ho,
            fo,
            bipartite: Some(bip),
        })
    }

    fn backward(&self, pass: &ForwardPass, d_logits: &Matrix) -> Result<Vec<Matrix>> {
        let bip = pass
            .bipartite
            .as_ref()
            .ok_or_else(|| Error::arg("forward pass was not produced by a DBGNN"))?;
        let d_classifier = pass.representation.t_matmul(d_logits)?;
        let d_hb = d_logits.matmul_t(&self.classifier)?;
        let (d_ho, d_fo, d_bip) = bipartite_backward(
            &self.projection,
            &self.bipartite_weight,
            self.config.aggregator,
            bip,
            &d_hb,
        )?;
        let mut grads = branch_backward(&self.ho_prop, &self.ho_weights, &pass.ho, d_ho)?;
        grads.extend(branch_backward(&self.fo_prop, &self.fo_weights, &pass.fo, d_fo)?);
        grads.push(d_bip);
        grads.push(d_classifier);
        Ok(grads)
    }

    fn parameters(&self) -> Vec<&Matrix> {
        self.ho_weights
            .iter()
            .chain(&self.fo_weights)
            .chain([&self.bipartite_weight, &self.classifier])
            .collect()
    }

    fn parameters_mut(&mut self) -> Vec<&mut Matrix> {
        self.ho_weights
            .iter_mut()
            .chain(self.fo_weights.iter_mut())
            .chain([&mut self.bipartite_weight, &mut self.classifier])
            .collect()
    }

    fn class_count(&self) -> usize {
        self.config.classes
    }
}

/// First-order GCN branch plus linear classifier, trained under the same
/// protocol as [`DbgnnModel`].
#[derive(Debug, Clone)]
pub struct GcnModel {
    dims: Vec<usize>,
    classes: usize,
    weights: Vec<Matrix>,
    classifier: Matrix,
    prop: Propagation,
}

impl GcnModel {
    /// `dims = [F0, F1, ..., Fg]`.
    pub fn new(dims: Vec<usize>, classes: usize, seed: u64, graph: &StaticWeightedGraph) -> Result<Self> {
        if dims.len() < 2 || dims.contains(&0) || classes == 0 {
            return Err(Error::arg("GCN needs an input width, at least one layer and positive sizes"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(INIT_STREAM);
        let weights = dims.windows(2).map(|d| Matrix::glorot(d[0], d[1], &mut rng)).collect();
        let classifier = Matrix::glorot(*dims.last().unwrap(), classes, &mut rng);
        Ok(Self {
            dims,
            classes,
            weights,
            classifier,
            prop: Propagation::from_static(graph)?,
        })
    }

    pub fn node_count(&self) -> usize {
        self.prop.node_count()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn one_hot_inputs(&self) -> ModelInputs {
        ModelInputs::one_hot(0, self.node_count())
    }
}

impl NodeClassifier for GcnModel {
    fn forward(&self, inputs: &ModelInputs) -> Result<ForwardPass> {
        check_inputs(&inputs.fo, self.node_count(), self.dims[0], "first-order")?;
        let (h, fo) = run_branch(&self.prop, &self.weights, &inputs.fo)?;
        let logits = h.matmul(&self.classifier)?;
        Ok(ForwardPass {
            logits,
            representation: h,
            ho: Vec::new(),
            fo,
            bipartite: None,
        })
    }

    fn backward(&self, pass: &ForwardPass, d_logits: &Matrix) -> Result<Vec<Matrix>> {
        let d_classifier = pass.representation.t_matmul(d_logits)?;
        let d_h = d_logits.matmul_t(&self.classifier)?;
        let mut grads = branch_backward(&self.prop, &self.weights, &pass.fo, d_h)?;
        grads.push(d_classifier);
        Ok(grads)
    }

    fn parameters(&self) -> Vec<&Matrix> {
        self.weights.iter().chain([&self.classifier]).collect()
    }

    fn parameters_mut(&mut self) -> Vec<&mut Matrix> {
        self.weights.iter_mut().chain([&mut self.classifier]).collect()
    }

    fn class_count(&self) -> usize {
        self.classes
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::debruijn::build_debruijn;
    use crate::temporal::TemporalGraph;
    use crate::walks::count_causal_walks;

    fn toy() -> (DeBruijnGraph, StaticWeightedGraph) {
        let g = TemporalGraph::parse_edge_list(
            "a b 1\nb c 2\nc d 3\nd e 4\nb d 3\ne a 5\na c 6\nc e 7",
            true,
        )
        .unwrap();
        let bag = count_causal_walks(&g, 1, 2).unwrap();
        (build_debruijn(&bag, 2).unwrap(), g.aggregate())
    }

    fn config(d: &DeBruijnGraph, fo: usize, seed: u64) -> DbgnnConfig {
        DbgnnConfig {
            order: 2,
            ho_dims: vec![d.node_count(), 4, 3],
            fo_dims: vec![fo, 5, 3],
            aggregator: Aggregator::Sum,
            repr_dim: 3,
            classes: 2,
            seed,
        }
    }

    #[test]
    fn config_validation() {
        let (d, s) = toy();
        let mut c = config(&d, s.node_count(), 0);
        c.fo_dims = vec![5, 4];
        assert!(DbgnnModel::new(c.clone(), &d, &s).is_err());
        c.fo_dims = vec![5];
        assert!(c.validate().is_err());
        let mut c = config(&d, s.node_count(), 0);
        c.order = 1;
        assert!(DbgnnModel::new(c, &d, &s).is_err());
    }

    #[test]
    fn seeded_forward_is_bitwise_reproducible() {
        let (d, s) = toy();
        let a = DbgnnModel::new(config(&d, s.node_count(), 9), &d, &s).unwrap();
        let b = DbgnnModel::new(config(&d, s.node_count(), 9), &d, &s).unwrap();
        let la = a.forward(&a.one_hot_inputs()).unwrap().logits;
        let lb = b.forward(&b.one_hot_inputs()).unwrap().logits;
        assert_eq!(la.data(), lb.data());
        let c = DbgnnModel::new(config(&d, s.node_count(), 10), &d, &s).unwrap();
        assert_ne!(c.forward(&c.one_hot_inputs()).unwrap().logits, la);
    }

    #[test]
    fn gcn_on_isolated_nodes_uses_own_row_only() {
        let s = StaticWeightedGraph::new(3);
        let m = GcnModel::new(vec![3, 2], 2, 1, &s).unwrap();
        let pass = m.forward(&m.one_hot_inputs()).unwrap();
        let w = m.parameters();
        for v in 0..3 {
            let h: Vec<f64> = w[0].row(v).iter().map(|&x| crate::numerics::elu(x)).collect();
            let expected: Vec<f64> = (0..2)
                .map(|c| h.iter().enumerate().map(|(j, x)| x * w[1].get(j, c)).sum())
                .collect();
            for (c, e) in expected.iter().enumerate() {
                assert!((pass.logits.get(v, c) - e).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn unused_parameter_gets_zero_gradient() {
        let (d, s) = toy();
        let m = DbgnnModel::new(config(&d, s.node_count(), 2), &d, &s).unwrap();
        let pass = m.forward(&m.one_hot_inputs()).unwrap();
        // loss depends on nothing: every gradient is exactly zero
        let zero = Matrix::zeros(pass.logits.rows(), pass.logits.cols());
        for g in m.backward(&pass, &zero).unwrap() {
            assert!(g.data().iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn load_parameters_checks_shapes() {
        let s = StaticWeightedGraph::new(2);
        let mut m = GcnModel::new(vec![2, 2], 2, 1, &s).unwrap();
        assert!(m.load_parameters(vec![Matrix::zeros(2, 2)]).is_err());
        assert!(m.load_parameters(vec![Matrix::zeros(2, 3), Matrix::zeros(2, 2)]).is_err());
        m.load_parameters(vec![Matrix::zeros(2, 2), Matrix::zeros(2, 2)]).unwrap();
        assert!(m.parameters().iter().all(|p| p.data().iter().all(|&x| x == 0.0)));
    }
}
