//! Training, evaluation and embedding export for node classification.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dbgnn::{Aggregator, DbgnnConfig, DbgnnModel, ForwardPass, GcnModel, ModelInputs, NodeClassifier};
use crate::debruijn::{build_debruijn, DeBruijnGraph};
use crate::error::{Error, Result};
use crate::numerics::{softmax_cross_entropy, AdamState, Matrix};
use crate::temporal::{StaticWeightedGraph, TemporalGraph};
use crate::walks::count_causal_walks;

/// RNG stream used for train/test splits.
pub const SPLIT_STREAM: u64 = 0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub lr: f64,
    pub epochs: usize,
    pub train_fraction: f64,
    pub seed: u64,
    pub runs: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.001,
            epochs: 5000,
            train_fraction: 0.7,
            seed: 0,
            runs: 50,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::arg(format!(
                "train fraction must be in (0, 1), got {}",
                self.train_fraction
            )));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::arg("learning rate must be positive"));
        }
        if self.runs == 0 {
            return Err(Error::arg("at least one run is required"));
        }
        Ok(())
    }
}

/// Class label per node plus the class names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeLabels {
    pub class_names: Vec<String>,
    pub of_node: Vec<usize>,
}

impl NodeLabels {
    pub fn class_count(&self) -> usize {
        self.class_names.len()
    }

    /// Parses `node,label` CSV. Class indices follow the sorted label names.
    /// Every node of `g` needs exactly one label.
    pub fn parse_csv(text: &str, g: &TemporalGraph) -> Result<Self> {
        let mut raw: Vec<Option<String>> = vec![None; g.node_count()];
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') || (line_no == 1 && line == "node,label") {
                continue;
            }
            let (node, label) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(line_no, "expected node,label"))?;
            let v = g
                .node_id(node.trim())
                .ok_or_else(|| Error::UnknownNode(format!("{} (labels line {line_no})", node.trim())))?;
            if raw[v as usize].replace(label.trim().to_owned()).is_some() {
                return Err(Error::parse(line_no, format!("node {} labelled twice", node.trim())));
            }
        }
        let names: Vec<String> = raw
            .iter()
            .enumerate()
            .map(|(v, l)| {
                l.clone()
                    .ok_or_else(|| Error::arg(format!("node {} has no label", g.label(v as u32))))
            })
            .collect::<Result<_>>()?;
        let mut class_names: Vec<String> = names.clone();
        class_names.sort();
        class_names.dedup();
        let index: HashMap<&str, usize> = class_names.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
        let of_node = names.iter().map(|n| index[n.as_str()]).collect();
        Ok(Self { class_names, of_node })
    }

    pub fn from_indices(of_node: Vec<usize>) -> Self {
        let classes = of_node.iter().max().map_or(0, |m| m + 1);
        Self {
            class_names: (0..classes).map(|c| c.to_string()).collect(),
            of_node,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// Stratified split: per class, `round(fraction * count)` nodes train, the rest
/// test. A class left without test nodes gives one node back.
pub fn split(labels: &[usize], train_fraction: f64, seed: u64) -> Result<Split> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::arg(format!("train fraction must be in (0, 1), got {train_fraction}")));
    }
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SPLIT_STREAM);
    let mut by_class: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (v, &c) in labels.iter().enumerate() {
        by_class.entry(c).or_default().push(v);
    }
    let mut train = Vec::new();
    let mut test = Vec::new();
    for nodes in by_class.values_mut() {
        nodes.shuffle(&mut rng);
        let mut n_train = (train_fraction * nodes.len() as f64).round() as usize;
        if n_train >= nodes.len() {
            n_train = nodes.len() - 1;
        }
        train.extend_from_slice(&nodes[..n_train]);
        test.extend_from_slice(&nodes[n_train..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

/// Full-batch training with Adam. Returns the loss before each update.
pub fn train(
    model: &mut dyn NodeClassifier,
    inputs: &ModelInputs,
    labels: &[usize],
    train_nodes: &[usize],
    lr: f64,
    epochs: usize,
) -> Result<Vec<f64>> {
    let mut adam = AdamState::new(lr, model.parameters());
    let mut trace = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        let pass = model.forward(inputs)?;
        let (loss, d_logits) = softmax_cross_entropy(&pass.logits, labels, train_nodes)?;
        if !loss.is_finite() {
            return Err(Error::Numeric(format!("loss became {loss} at epoch {epoch}")));
        }
        let grads = model.backward(&pass, &d_logits)?;
        adam.step(&mut model.parameters_mut(), &grads)?;
        trace.push(loss);
    }
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Metrics {
    pub balanced_accuracy: f64,
    pub precision_macro: f64,
    pub recall_macro: f64,
    pub f1_macro: f64,
}

/// `counts[truth][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(counts: Vec<Vec<u64>>) -> Result<Self> {
        let k = counts.len();
        if counts.iter().any(|r| r.len() != k) {
            return Err(Error::Shape("confusion matrix must be square".into()));
        }
        Ok(Self { counts })
    }

    pub fn from_predictions(truth: &[usize], predicted: &[usize], classes: usize) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::Shape("truth and prediction lengths differ".into()));
        }
        let mut counts = vec![vec![0; classes]; classes];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= classes || p >= classes {
                return Err(Error::arg(format!("class index out of range 0..{classes}")));
            }
            counts[t][p] += 1;
        }
        Ok(Self { counts })
    }

    /// Per-class recall over classes present in the truth (balanced
    /// accuracy), and macro precision/recall/F1 over classes present in the
    /// truth or the predictions. Zero divisions count as 0.
    pub fn metrics(&self) -> Result<Metrics> {
        let k = self.counts.len();
        let support: Vec<u64> = self.counts.iter().map(|r| r.iter().sum()).collect();
        let predicted: Vec<u64> = (0..k).map(|c| self.counts.iter().map(|r| r[c]).sum()).collect();
        if support.iter().all(|&s| s == 0) {
            return Err(Error::EmptyInput);
        }
        let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let mut recall_present = Vec::new();
        let (mut p_sum, mut r_sum, mut f_sum, mut labels) = (0.0, 0.0, 0.0, 0usize);
        for c in 0..k {
            let tp = self.counts[c][c];
            let recall = ratio(tp, support[c]);
            if support[c] > 0 {
                recall_present.push(recall);
            }
            if support[c] > 0 || predicted[c] > 0 {
                let precision = ratio(tp, predicted[c]);
                let f1 = if precision + recall > 0.0 {
                    2.0 * precision * recall / (precision + recall)
                } else {
                    0.0
                };
                p_sum += precision;
                r_sum += recall;
                f_sum += f1;
                labels += 1;
            }
        }
        let n = labels as f64;
        Ok(Metrics {
            balanced_accuracy: recall_present.iter().sum::<f64>() / recall_present.len() as f64,
            precision_macro: p_sum / n,
            recall_macro: r_sum / n,
            f1_macro: f_sum / n,
        })
    }
}

fn argmax_rows(logits: &Matrix) -> Vec<usize> {
    (0..logits.rows())
        .map(|r| {
            let row = logits.row(r);
            let mut best = 0;
            for (c, &x) in row.iter().enumerate() {
                if x > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Metrics of the argmax predictions on `test_nodes`.
pub fn evaluate(
    model: &dyn NodeClassifier,
    inputs: &ModelInputs,
    labels: &[usize],
    test_nodes: &[usize],
) -> Result<Metrics> {
    if test_nodes.is_empty() {
        return Err(Error::arg("evaluation needs at least one test node"));
    }
    let pass = model.forward(inputs)?;
    evaluate_pass(&pass, labels, test_nodes, model.class_count())
}

pub fn evaluate_pass(pass: &ForwardPass, labels: &[usize], test_nodes: &[usize], classes: usize) -> Result<Metrics> {
    let predicted = argmax_rows(&pass.logits);
    let truth: Vec<usize> = test_nodes.iter().map(|&v| labels[v]).collect();
    let pred: Vec<usize> = test_nodes.iter().map(|&v| predicted[v]).collect();
    ConfusionMatrix::from_predictions(&truth, &pred, classes)?.metrics()
}

/// Top-two principal component scores of the rows of `x`.
pub fn pca_2d(x: &Matrix) -> Matrix {
    let (n, d) = x.shape();
    let mut centered = x.clone();
    for j in 0..d {
        let mean = (0..n).map(|i| x.get(i, j)).sum::<f64>() / n.max(1) as f64;
        for i in 0..n {
            centered.set(i, j, x.get(i, j) - mean);
        }
    }
    let mut cov = centered.t_matmul(&centered).expect("square");
    let mut scores = Matrix::zeros(n, 2);
    for comp in 0..2.min(d) {
        // power iteration from a fixed start
        let mut v: Vec<f64> = (0..d).map(|j| 1.0 + 0.01 * j as f64).collect();
        let mut lambda = 0.0;
        for _ in 0..1000 {
            let mut w = vec![0.0; d];
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = cov.row(i).iter().zip(&v).map(|(a, b)| a * b).sum();
            }
            let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm < 1e-300 {
                lambda = 0.0;
                break;
            }
            let next: Vec<f64> = w.iter().map(|a| a / norm).collect();
            let change: f64 = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).sum();
            v = next;
            lambda = norm;
            if change < 1e-13 {
                break;
            }
        }
        if lambda == 0.0 {
            break;
        }
        // sign convention: largest-magnitude loading positive
        let pivot = v.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
        if pivot < 0.0 {
            v.iter_mut().for_each(|a| *a = -*a);
        }
        for i in 0..n {
            let s: f64 = centered.row(i).iter().zip(&v).map(|(a, b)| a * b).sum();
            scores.set(i, comp, s);
        }
        for i in 0..d {
            for j in 0..d {
                let updated = cov.get(i, j) - lambda * v[i] * v[j];
                cov.set(i, j, updated);
            }
        }
    }
    scores
}

/// CSV with one row per node: label, the representation, and optionally two
/// principal-component columns.
pub fn export_embeddings(node_labels: &[String], representation: &Matrix, with_pca: bool) -> Result<String> {
    if node_labels.len() != representation.rows() {
        return Err(Error::Shape(format!(
            "{} node labels for {} embedding rows",
            node_labels.len(),
            representation.rows()
        )));
    }
    let d = representation.cols();
    let pcs = with_pca.then(|| pca_2d(representation));
    let mut out = String::from("node");
    for j in 0..d {
        let _ = write!(out, ",h{j}");
    }
    if with_pca {
        out.push_str(",pc1,pc2");
    }
    out.push('\n');
    for (i, name) in node_labels.iter().enumerate() {
        out.push_str(name);
        for &x in representation.row(i) {
            let _ = write!(out, ",{x}");
        }
        if let Some(p) = &pcs {
            let _ = write!(out, ",{},{}", p.get(i, 0), p.get(i, 1));
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dbgnn,
    Gcn,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dbgnn" => Ok(Self::Dbgnn),
            "gcn" => Ok(Self::Gcn),
            other => Err(Error::arg(format!("unknown method {other:?}"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Dbgnn => "dbgnn",
            Self::Gcn => "gcn",
        })
    }
}

/// Architecture hyperparameters shared by both methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub order: usize,
    pub ho_hidden: Vec<usize>,
    pub fo_hidden: Vec<usize>,
    pub repr_dim: usize,
    pub aggregator: Aggregator,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            order: 2,
            ho_hidden: vec![16, 16],
            fo_hidden: vec![16, 16],
            repr_dim: 16,
            aggregator: Aggregator::Sum,
        }
    }
}

/// Graph structures a model is built on.
#[derive(Debug, Clone)]
pub struct PreparedGraph {
    pub first_order: StaticWeightedGraph,
    pub debruijn: DeBruijnGraph,
}

impl PreparedGraph {
    pub fn new(g: &TemporalGraph, delta: i64, order: usize) -> Result<Self> {
        let bag = count_causal_walks(g, delta, order)?;
        Ok(Self {
            first_order: g.aggregate(),
            debruijn: build_debruijn(&bag, order)?,
        })
    }
}

#[derive(Debug, Clone)]
pub enum AnyModel {
    Dbgnn(Box<DbgnnModel>),
    Gcn(GcnModel),
}

impl AnyModel {
    pub fn build(method: Method, spec: &ModelSpec, graph: &PreparedGraph, classes: usize, seed: u64) -> Result<Self> {
        let n = graph.first_order.node_count();
        let mut fo_dims = vec![n];
        fo_dims.extend_from_slice(&spec.fo_hidden);
        Ok(match method {
            Method::Dbgnn => {
                let mut ho_dims = vec![graph.debruijn.node_count()];
                ho_dims.extend_from_slice(&spec.ho_hidden);
                let config = DbgnnConfig {
                    order: spec.order,
                    ho_dims,
                    fo_dims,
                    aggregator: spec.aggregator,
                    repr_dim: spec.repr_dim,
                    classes,
                    seed,
                };
                Self::Dbgnn(Box::new(DbgnnModel::new(config, &graph.debruijn, &graph.first_order)?))
            }
            Method::Gcn => Self::Gcn(GcnModel::new(fo_dims, classes, seed, &graph.first_order)?),
        })
    }

    pub fn one_hot_inputs(&self) -> ModelInputs {
        match self {
            Self::Dbgnn(m) => m.one_hot_inputs(),
            Self::Gcn(m) => m.one_hot_inputs(),
        }
    }

    fn inner(&self) -> &dyn NodeClassifier {
        match self {
            Self::Dbgnn(m) => m.as_ref(),
            Self::Gcn(m) => m,
        }
    }

    fn inner_mut(&mut self) -> &mut dyn NodeClassifier {
        match self {
            Self::Dbgnn(m) => m.as_mut(),
            Self::Gcn(m) => m,
        }
    }
}

impl NodeClassifier for AnyModel {
    fn forward(&self, inputs: &ModelInputs) -> Result<ForwardPass> {
        self.inner().forward(inputs)
    }

    fn backward(&self, pass: &ForwardPass, d_logits: &Matrix) -> Result<Vec<Matrix>> {
        self.inner().backward(pass, d_logits)
    }

    fn parameters(&self) -> Vec<&Matrix> {
        self.inner().parameters()
    }

    fn parameters_mut(&mut self) -> Vec<&mut Matrix> {
        self.inner_mut().parameters_mut()
    }

    fn class_count(&self) -> usize {
        self.inner().class_count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub seed: u64,
    pub metrics: Metrics,
    pub final_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub method: Method,
    pub runs: Vec<RunResult>,
    pub mean: Metrics,
    /// Population standard deviation over runs.
    pub std: Metrics,
}

impl ExperimentReport {
    pub fn from_runs(method: Method, runs: Vec<RunResult>) -> Self {
        let all: Vec<Metrics> = runs.iter().map(|r| r.metrics).collect();
        let (mean, std) = summarize(&all);
        Self { method, runs, mean, std }
    }
}

fn field_stats(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Mean and population standard deviation of each metric.
pub fn summarize(all: &[Metrics]) -> (Metrics, Metrics) {
    let (ba, ba_s) = field_stats(all.iter().map(|m| m.balanced_accuracy));
    let (p, p_s) = field_stats(all.iter().map(|m| m.precision_macro));
    let (r, r_s) = field_stats(all.iter().map(|m| m.recall_macro));
    let (f, f_s) = field_stats(all.iter().map(|m| m.f1_macro));
    (
        Metrics {
            balanced_accuracy: ba,
            precision_macro: p,
            recall_macro: r,
            f1_macro: f,
        },
        Metrics {
            balanced_accuracy: ba_s,
            precision_macro: p_s,
            recall_macro: r_s,
            f1_macro: f_s,
        },
    )
}

/// One independent run: fresh split and initialisation from `seed`.
pub fn run_once(
    method: Method,
    spec: &ModelSpec,
    graph: &PreparedGraph,
    labels: &NodeLabels,
    config: &TrainConfig,
    seed: u64,
) -> Result<(AnyModel, Split, RunResult)> {
    let masks = split(&labels.of_node, config.train_fraction, seed)?;
    let mut model = AnyModel::build(method, spec, graph, labels.class_count(), seed)?;
    let inputs = model.one_hot_inputs();
    let trace = train(&mut model, &inputs, &labels.of_node, &masks.train, config.lr, config.epochs)?;
    let metrics = evaluate(&model, &inputs, &labels.of_node, &masks.test)?;
    let final_loss = trace.last().copied().unwrap_or(f64::NAN);
    Ok((
        model,
        masks,
        RunResult {
            seed,
            metrics,
            final_loss,
        },
    ))
}

/// `config.runs` independent runs with seeds `config.seed + r`. Runs execute
/// in parallel; each run is itself deterministic.
pub fn run_experiment(
    method: Method,
    spec: &ModelSpec,
    graph: &PreparedGraph,
    labels: &NodeLabels,
    config: &TrainConfig,
) -> Result<ExperimentReport> {
    config.validate()?;
    if labels.of_node.len() != graph.first_order.node_count() {
        return Err(Error::Shape("labels do not cover the graph's nodes".into()));
    }
    let runs = (0..config.runs as u64)
        .into_par_iter()
        .map(|r| run_once(method, spec, graph, labels, config, config.seed + r).map(|(_, _, res)| res))
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentReport::from_runs(method, runs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_ten_balanced() {
        let labels = [0, 0, 0, 0, 0, 1, 1, 1, 1, 1];
        let s = split(&labels, 0.7, 3).unwrap();
        assert_eq!(s.train.len() + s.test.len(), 10);
        for c in 0..2 {
            assert!(s.test.iter().any(|&v| labels[v] == c));
        }
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..10).collect::<Vec<_>>());
        assert_eq!(s, split(&labels, 0.7, 3).unwrap());
    }

    #[test]
    fn split_half_of_two() {
        let s = split(&[4, 4], 0.5, 0).unwrap();
        assert_eq!((s.train.len(), s.test.len()), (1, 1));
    }

    #[test]
    fn split_singleton_class_goes_to_test() {
        let s = split(&[0, 1, 1, 1], 0.7, 0).unwrap();
        assert!(s.test.contains(&0));
        assert!(split(&[0], 1.5, 0).is_err());
    }

    #[test]
    fn confusion_example() {
        let cm = ConfusionMatrix::new(vec![vec![2, 0, 0], vec![1, 1, 0], vec![0, 0, 2]]).unwrap();
        let m = cm.metrics().unwrap();
        assert!((m.balanced_accuracy - 5.0 / 6.0).abs() < 1e-15);
        assert!((m.recall_macro - 5.0 / 6.0).abs() < 1e-15);
        // precisions 2/3, 1, 1
        assert!((m.precision_macro - (2.0 / 3.0 + 2.0) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn perfect_and_constant_predictors() {
        let truth = [0, 1, 2, 1, 0];
        let m = ConfusionMatrix::from_predictions(&truth, &truth, 3).unwrap().metrics().unwrap();
        assert_eq!(m, Metrics { balanced_accuracy: 1.0, precision_macro: 1.0, recall_macro: 1.0, f1_macro: 1.0 });

        let truth = [0, 0, 1, 1];
        let m = ConfusionMatrix::from_predictions(&truth, &[1, 1, 1, 1], 2).unwrap().metrics().unwrap();
        assert_eq!(m.balanced_accuracy, 0.5);
        // precision of class 0 is 0/0 -> 0
        assert_eq!(m.precision_macro, 0.25);
    }

    #[test]
    fn summary_of_one_run() {
        let m = Metrics { balanced_accuracy: 0.8, precision_macro: 0.7, recall_macro: 0.8, f1_macro: 0.75 };
        let (mean, std) = summarize(&[m]);
        assert_eq!(mean, m);
        assert_eq!(std, Metrics::default());
    }

    #[test]
    fn pca_scores_are_centered() {
        let x = Matrix::from_rows(&[
            vec![1.0, 2.0, 0.5],
            vec![2.0, 1.0, -0.5],
            vec![4.0, 0.0, 1.0],
            vec![0.0, 3.0, 2.0],
        ])
        .unwrap();
        let p = pca_2d(&x);
        for c in 0..2 {
            let mean: f64 = (0..4).map(|i| p.get(i, c)).sum::<f64>() / 4.0;
            assert!(mean.abs() < 1e-12);
        }
        let var0: f64 = (0..4).map(|i| p.get(i, 0).powi(2)).sum();
        let var1: f64 = (0..4).map(|i| p.get(i, 1).powi(2)).sum();
        assert!(var0 >= var1);
    }

    #[test]
    fn embedding_csv_shape() {
        let names = vec!["a".to_string(), "b".to_string()];
        let rep = Matrix::from_rows(&[vec![0.5, 1.0], vec![-1.0, 2.0]]).unwrap();
        let csv = export_embeddings(&names, &rep, true).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "node,h0,h1,pc1,pc2");
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1].split(',').count(), 5);
        assert!(export_embeddings(&names[..1], &rep, false).is_err());
    }

    #[test]
    fn labels_csv() {
        let g = TemporalGraph::parse_edge_list("a b 1\nb c 2", true).unwrap();
        let l = NodeLabels::parse_csv("node,label\na,x\nb,y\nc,x\n", &g).unwrap();
        assert_eq!(l.class_names, vec!["x", "y"]);
        assert_eq!(l.of_node, vec![0, 1, 0]);
        assert!(NodeLabels::parse_csv("a,x\nb,y\n", &g).is_err());
        assert!(NodeLabels::parse_csv("a,x\nb,y\nc,x\nd,y\n", &g).is_err());
        assert!(NodeLabels::parse_csv("a,x\na,y\nb,y\nc,x\n", &g).is_err());
    }

    #[test]
    fn zero_epochs_leave_model_unchanged() {
        let g = TemporalGraph::parse_edge_list("a b 1\nb c 2\nc a 3\na c 4", true).unwrap();
        let graph = PreparedGraph::new(&g, 1, 2).unwrap();
        let mut m = AnyModel::build(Method::Dbgnn, &ModelSpec::default(), &graph, 2, 1).unwrap();
        let before: Vec<Matrix> = m.parameters().into_iter().cloned().collect();
        let inputs = m.one_hot_inputs();
        let trace = train(&mut m, &inputs, &[0, 1, 0], &[0, 1], 0.001, 0).unwrap();
        assert!(trace.is_empty());
        let after: Vec<Matrix> = m.parameters().into_iter().cloned().collect();
        assert_eq!(before, after);
    }
}
