use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dbgnn_core::debruijn::build_debruijn;
use dbgnn_core::experiment::{
    evaluate, export_embeddings, run_experiment, run_once, AnyModel, Method, ModelSpec, NodeLabels, PreparedGraph,
};
use dbgnn_core::order::order_selection;
use dbgnn_core::synthetic::{generate_temp_clusters, shuffle_timestamps, TempClustersParams};
use dbgnn_core::walks::{count_causal_walks, WalkBag};
use dbgnn_core::{ColumnOrder, Matrix, NodeClassifier, TemporalGraph, TrainConfig};

use crate::config::Settings;
use crate::failure::{read_file, write_file, Failure, Stage};

pub const CHECKPOINT_FORMAT: &str = "dbgnn-checkpoint";
pub const CHECKPOINT_VERSION: u32 = 1;

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).stage("json")?;
    s.push('\n');
    Ok(s)
}

fn require<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path, Failure> {
    path.as_deref().ok_or_else(|| Failure::usage(format!("missing --{what}")))
}

/// Reads and preprocesses the input edge list.
pub fn load_graph(settings: &Settings) -> Result<TemporalGraph, Failure> {
    let path = require(&settings.input, "input")?;
    let text = read_file(path, "ingest")?;
    let mut g = TemporalGraph::parse_edge_list_with(&text, settings.directed, settings.columns).stage("ingest")?;
    if let Some(width) = settings.bin_width {
        g = g.coarsen(width).stage("ingest")?;
    }
    if settings.dedup_bins {
        g = g.dedup_events();
    }
    Ok(g)
}

fn load_labels(settings: &Settings, g: &TemporalGraph) -> Result<NodeLabels, Failure> {
    let path = require(&settings.labels, "labels")?;
    NodeLabels::parse_csv(&read_file(path, "labels")?, g).map_err(|e| Failure::data(format!("labels: {e}")))
}

fn load_bag(path: &Path) -> Result<WalkBag, Failure> {
    WalkBag::parse(&read_file(path, "walks")?).stage("walks")
}

pub fn ingest(settings: &Settings, out: &Path) -> Result<(), Failure> {
    let g = load_graph(settings)?;
    write_file(out, &g.to_edge_list(), "ingest")?;
    println!(
        "{} nodes, {} events, {} aggregated edges",
        g.node_count(),
        g.event_count(),
        g.aggregate().edge_count()
    );
    Ok(())
}

pub fn walks(settings: &Settings, out: &Path) -> Result<(), Failure> {
    let g = load_graph(settings)?;
    let bag = count_causal_walks(&g, settings.delta, settings.max_order).stage("walks")?;
    write_file(out, &bag.to_text(), "walks")?;
    for k in 1..=settings.max_order {
        println!("length {k}: {} walks, {} distinct", bag.total(k), bag.of_length(k).len());
    }
    Ok(())
}

pub fn debruijn(walks: &Path, order: usize, out: &Path) -> Result<(), Failure> {
    let bag = load_bag(walks)?;
    let d = build_debruijn(&bag, order).stage("debruijn")?;
    write_file(out, &d.to_text(bag.labels()), "debruijn")?;
    println!("order {order}: {} nodes, {} edges", d.node_count(), d.edge_count());
    Ok(())
}

pub fn select_order(walks: &Path, max_order: Option<usize>, alpha: f64, out: Option<&Path>) -> Result<(), Failure> {
    let bag = load_bag(walks)?;
    // length-1 walk counts are the aggregated edge weights
    let s = build_debruijn(&bag, 1).and_then(|d| d.to_static()).stage("select-order")?;
    let report = order_selection(&bag, &s, max_order.unwrap_or(bag.max_length()), alpha).stage("select-order")?;
    print!("{}", report.to_text());
    if let Some(out) = out {
        write_file(out, &to_json(&report)?, "select-order")?;
    }
    Ok(())
}

pub fn generate(params: &TempClustersParams, out: &Path, labels: &Path) -> Result<(), Failure> {
    let (g, clusters) = generate_temp_clusters(params).stage("generate")?;
    write_file(out, &g.to_edge_list(), "generate")?;
    write_file(labels, &clusters.to_csv(&g), "generate")?;
    println!("{} nodes, {} events", g.node_count(), g.event_count());
    Ok(())
}

pub fn shuffle(settings: &Settings, seed: u64, out: &Path) -> Result<(), Failure> {
    let g = load_graph(settings)?;
    write_file(out, &shuffle_timestamps(&g, seed).to_edge_list(), "shuffle")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Preprocessing {
    pub directed: bool,
    pub columns: String,
    pub bin_width: Option<i64>,
    pub dedup_bins: bool,
}

impl Preprocessing {
    fn from_settings(s: &Settings) -> Self {
        Self {
            directed: s.directed,
            columns: match s.columns {
                ColumnOrder::SourceTargetTime => "vwt".into(),
                ColumnOrder::TimeSourceTarget => "tvw".into(),
            },
            bin_width: s.bin_width,
            dedup_bins: s.dedup_bins,
        }
    }

    fn apply_to(&self, s: &mut Settings) -> Result<(), Failure> {
        s.directed = self.directed;
        s.columns = self.columns.parse::<ColumnOrder>().stage("checkpoint")?;
        s.bin_width = self.bin_width;
        s.dedup_bins = self.dedup_bins;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub method: Method,
    pub spec: ModelSpec,
    pub delta: i64,
    pub preprocessing: Preprocessing,
    pub seed: u64,
    pub nodes: Vec<String>,
    pub classes: Vec<String>,
    pub train_nodes: Vec<usize>,
    pub test_nodes: Vec<usize>,
    pub parameters: Vec<Matrix>,
}

fn model_order(settings: &Settings) -> usize {
    settings.order.unwrap_or(settings.max_order)
}

pub fn train(settings: &Settings, method: Method, out: &Path) -> Result<(), Failure> {
    let g = load_graph(settings)?;
    let labels = load_labels(settings, &g)?;
    let order = model_order(settings);
    let graph = PreparedGraph::new(&g, settings.delta, order).stage("debruijn")?;
    let spec = settings.model_spec(order);
    let seed = settings.train.seed;
    let (model, split, result) = run_once(method, &spec, &graph, &labels, &settings.train, seed).stage("train")?;
    let checkpoint = Checkpoint {
        format: CHECKPOINT_FORMAT.into(),
        version: CHECKPOINT_VERSION,
        method,
        spec,
        delta: settings.delta,
        preprocessing: Preprocessing::from_settings(settings),
        seed,
        nodes: g.labels().to_vec(),
        classes: labels.class_names.clone(),
        train_nodes: split.train,
        test_nodes: split.test,
        parameters: model.parameters().into_iter().cloned().collect(),
    };
    write_file(out, &to_json(&checkpoint)?, "train")?;
    println!("final loss {:.6}", result.final_loss);
    print!("{}", to_json(&result.metrics)?);
    Ok(())
}

/// Rebuilds a trained model on the checkpoint's graph.
fn restore(settings: &Settings, checkpoint_path: &Path) -> Result<(Checkpoint, TemporalGraph, AnyModel), Failure> {
    let checkpoint: Checkpoint =
        serde_json::from_str(&read_file(checkpoint_path, "checkpoint")?).stage("checkpoint")?;
    if checkpoint.format != CHECKPOINT_FORMAT || checkpoint.version != CHECKPOINT_VERSION {
        return Err(Failure::data(format!(
            "checkpoint: unsupported format {} version {}",
            checkpoint.format, checkpoint.version
        )));
    }
    let mut settings = settings.clone();
    checkpoint.preprocessing.apply_to(&mut settings)?;
    let g = load_graph(&settings)?;
    if g.labels() != checkpoint.nodes.as_slice() {
        return Err(Failure::data("checkpoint: input graph has a different node table than the trained one"));
    }
    let graph = PreparedGraph::new(&g, checkpoint.delta, checkpoint.spec.order).stage("debruijn")?;
    let mut model = AnyModel::build(
        checkpoint.method,
        &checkpoint.spec,
        &graph,
        checkpoint.classes.len(),
        checkpoint.seed,
    )
    .stage("checkpoint")?;
    model.load_parameters(checkpoint.parameters.clone()).stage("checkpoint")?;
    Ok((checkpoint, g, model))
}

pub fn evaluate_checkpoint(settings: &Settings, checkpoint: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let (checkpoint, g, model) = restore(settings, checkpoint)?;
    let labels = load_labels(settings, &g)?;
    if labels.class_names != checkpoint.classes {
        return Err(Failure::data("labels: class names differ from the checkpoint's"));
    }
    let metrics =
        evaluate(&model, &model.one_hot_inputs(), &labels.of_node, &checkpoint.test_nodes).stage("evaluate")?;
    let json = to_json(&metrics)?;
    print!("{json}");
    if let Some(out) = out {
        write_file(out, &json, "evaluate")?;
    }
    Ok(())
}

pub fn embed(settings: &Settings, checkpoint: &Path, out: &Path) -> Result<(), Failure> {
    let (_, g, model) = restore(settings, checkpoint)?;
    let pass = model.forward(&model.one_hot_inputs()).stage("embed")?;
    let csv = export_embeddings(g.labels(), &pass.representation, settings.pca).stage("embed")?;
    write_file(out, &csv, "embed")
}

#[derive(Debug, Serialize)]
struct GraphSummary {
    nodes: usize,
    events: usize,
    order: usize,
    debruijn_nodes: usize,
    debruijn_edges: usize,
}

#[derive(Debug, Serialize)]
struct PipelineReport<'a> {
    delta: i64,
    chosen_order: usize,
    model_order: usize,
    graphs: Vec<GraphSummary>,
    train: &'a TrainConfig,
    experiments: Vec<dbgnn_core::experiment::ExperimentReport>,
}

pub fn pipeline(settings: &Settings) -> Result<(), Failure> {
    let dir = &settings.out_dir;
    let (g, labels) = if settings.input.is_some() {
        let g = load_graph(settings)?;
        let labels = match settings.labels {
            Some(_) => Some(load_labels(settings, &g)?),
            None => None,
        };
        (g, labels)
    } else if settings.preset.as_deref() == Some("temp-clusters") {
        let (g, clusters) = generate_temp_clusters(&settings.generator).stage("generate")?;
        write_file(&dir.join("edges.txt"), &g.to_edge_list(), "generate")?;
        write_file(&dir.join("labels.csv"), &clusters.to_csv(&g), "generate")?;
        let labels = NodeLabels::parse_csv(&clusters.to_csv(&g), &g).stage("generate")?;
        (g, Some(labels))
    } else {
        return Err(Failure::usage("pipeline needs --input (or the temp-clusters preset)"));
    };

    let bag = count_causal_walks(&g, settings.delta, settings.max_order).stage("walks")?;
    write_file(&dir.join("walks.txt"), &bag.to_text(), "walks")?;

    let mut graphs = Vec::new();
    for k in 1..=settings.max_order {
        let d = build_debruijn(&bag, k).stage("debruijn")?;
        write_file(&dir.join(format!("debruijn-{k}.txt")), &d.to_text(g.labels()), "debruijn")?;
        graphs.push(GraphSummary {
            nodes: g.node_count(),
            events: g.event_count(),
            order: k,
            debruijn_nodes: d.node_count(),
            debruijn_edges: d.edge_count(),
        });
    }

    let selection = order_selection(&bag, &g.aggregate(), settings.max_order, settings.alpha).stage("select-order")?;
    write_file(&dir.join("order-selection.txt"), &selection.to_text(), "select-order")?;
    write_file(&dir.join("order-selection.json"), &to_json(&selection)?, "select-order")?;
    let order = settings.order.unwrap_or(selection.chosen_order);

    let mut summary = String::new();
    for s in &graphs {
        let _ = writeln!(summary, "order {}: |V|={} |E|={}", s.order, s.debruijn_nodes, s.debruijn_edges);
    }
    for t in &selection.tests {
        let _ = writeln!(summary, "test {} vs {}: p = {:e}", t.null_order, t.alt_order, t.p_value);
    }
    let _ = writeln!(summary, "chosen order: {} (model order {order})", selection.chosen_order);

    let mut experiments = Vec::new();
    match labels {
        Some(labels) => {
            let graph = PreparedGraph::new(&g, settings.delta, order).stage("debruijn")?;
            let spec = settings.model_spec(order);
            for method in [Method::Dbgnn, Method::Gcn] {
                let report = run_experiment(method, &spec, &graph, &labels, &settings.train).stage("train")?;
                let _ = writeln!(
                    summary,
                    "{method}: balanced accuracy {:.4} +- {:.4}, macro F1 {:.4} over {} runs",
                    report.mean.balanced_accuracy,
                    report.std.balanced_accuracy,
                    report.mean.f1_macro,
                    report.runs.len()
                );
                experiments.push(report);
            }
            let (model, _, _) =
                run_once(Method::Dbgnn, &spec, &graph, &labels, &settings.train, settings.train.seed).stage("train")?;
            let pass = model.forward(&model.one_hot_inputs()).stage("embed")?;
            let csv = export_embeddings(g.labels(), &pass.representation, true).stage("embed")?;
            write_file(&dir.join("embeddings.csv"), &csv, "embed")?;
        }
        None => summary.push_str("no labels given; training skipped\n"),
    }

    let report = PipelineReport {
        delta: settings.delta,
        chosen_order: selection.chosen_order,
        model_order: order,
        graphs,
        train: &settings.train,
        experiments,
    };
    write_file(&dir.join("metrics.json"), &to_json(&report)?, "report")?;
    print!("{summary}");
    Ok(())
}
