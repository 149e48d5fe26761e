//! `dbgnn`: causal-walk statistics, De Bruijn order selection and DBGNN node
//! classification for dynamic graphs.

mod commands;
mod config;
mod failure;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dbgnn_core::experiment::Method;

use crate::config::{resolve, Settings};
use crate::failure::{Failure, EXIT_USAGE};

#[derive(Debug, Parser)]
#[command(name = "dbgnn", version, about = "De Bruijn graph neural networks for dynamic graphs")]
struct Cli {
    /// Flat `key = value` settings file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Default, Args)]
struct DataArgs {
    /// Named settings bundle (temp-clusters, student-sms, workplace, hospital, high-school).
    #[arg(long)]
    preset: Option<String>,
    /// Edge list with one event per line.
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Treat events as directed.
    #[arg(long, conflicts_with = "undirected")]
    directed: bool,
    /// Treat events as undirected contacts.
    #[arg(long)]
    undirected: bool,
    /// Column order: vwt (source target time) or tvw (time source target).
    #[arg(long)]
    columns: Option<String>,
    /// Coarsen timestamps into bins of this width.
    #[arg(long)]
    bin_width: Option<i64>,
    /// Drop duplicate events after binning.
    #[arg(long)]
    dedup_bins: bool,
}

impl DataArgs {
    fn push(&self, out: &mut Vec<(String, String)>) {
        push_opt(out, "preset", &self.preset);
        push_opt(out, "input", &self.input.as_ref().map(|p| p.display().to_string()));
        if self.directed {
            out.push(("directed".into(), "true".into()));
        }
        if self.undirected {
            out.push(("directed".into(), "false".into()));
        }
        push_opt(out, "columns", &self.columns);
        push_opt(out, "bin_width", &self.bin_width);
        if self.dedup_bins {
            out.push(("dedup_bins".into(), "true".into()));
        }
    }
}

#[derive(Debug, Default, Args)]
struct ModelArgs {
    /// `node,label` CSV.
    #[arg(long, value_name = "FILE")]
    labels: Option<PathBuf>,
    /// Maximum time difference between consecutive events of a walk.
    #[arg(long)]
    delta: Option<i64>,
    /// De Bruijn order of the model.
    #[arg(long)]
    order: Option<usize>,
    /// Comma-separated widths of the message-passing layers.
    #[arg(long)]
    hidden: Option<String>,
    #[arg(long)]
    repr_dim: Option<usize>,
    /// sum, mean, max or min.
    #[arg(long)]
    aggregator: Option<String>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    train_fraction: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl ModelArgs {
    fn push(&self, out: &mut Vec<(String, String)>) {
        push_opt(out, "labels", &self.labels.as_ref().map(|p| p.display().to_string()));
        push_opt(out, "delta", &self.delta);
        push_opt(out, "order", &self.order);
        push_opt(out, "hidden", &self.hidden);
        push_opt(out, "repr_dim", &self.repr_dim);
        push_opt(out, "aggregator", &self.aggregator);
        push_opt(out, "lr", &self.lr);
        push_opt(out, "epochs", &self.epochs);
        push_opt(out, "runs", &self.runs);
        push_opt(out, "train_fraction", &self.train_fraction);
        push_opt(out, "seed", &self.seed);
    }
}

fn push_opt<T: ToString>(out: &mut Vec<(String, String)>, key: &str, value: &Option<T>) {
    if let Some(v) = value {
        out.push((key.into(), v.to_string()));
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Full run: walks, De Bruijn graphs, order selection, training, evaluation, embeddings.
    Pipeline {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        max_order: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_name = "DIR")]
        out_dir: Option<PathBuf>,
    },
    /// Parse and preprocess an edge list, writing it back normalised.
    Ingest {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Count causal walks up to a maximum length.
    Walks {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        delta: Option<i64>,
        #[arg(long)]
        max_order: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the De Bruijn graph of one order from a walk file.
    Debruijn {
        #[arg(long, value_name = "FILE")]
        walks: PathBuf,
        #[arg(long)]
        order: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Likelihood-ratio order selection on a walk file.
    SelectOrder {
        #[arg(long, value_name = "FILE")]
        walks: PathBuf,
        #[arg(long)]
        max_order: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        /// JSON report path; the text report goes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Train one model and write a checkpoint.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "dbgnn")]
        method: Method,
        #[arg(long)]
        out: PathBuf,
    },
    /// Metrics of a checkpoint on its held-out nodes.
    Evaluate {
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
        #[arg(long, value_name = "FILE")]
        input: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        labels: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate synthetic data.
    #[command(subcommand)]
    Generate(Generator),
    /// Randomly permute timestamps across events.
    Shuffle {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export node representations of a checkpoint as CSV.
    Embed {
        #[arg(long, value_name = "FILE")]
        checkpoint: PathBuf,
        #[arg(long, value_name = "FILE")]
        input: Option<PathBuf>,
        /// Append two principal-component columns.
        #[arg(long)]
        pca: bool,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum Generator {
    /// Random directed graph with three clusters visible only in causal walks.
    TempClusters {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        pairs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_name = "FILE")]
        labels: PathBuf,
    },
}

fn settings(cli_config: Option<&std::path::Path>, overrides: Vec<(String, String)>) -> Result<Settings, Failure> {
    resolve(cli_config, std::env::vars(), &overrides)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::usage(format!("--threads: {e}")))?;
    }
    let config = cli.config.as_deref();
    let mut o = Vec::new();
    match cli.command {
        Command::Pipeline { data, model, max_order, alpha, out_dir } => {
            data.push(&mut o);
            model.push(&mut o);
            push_opt(&mut o, "max_order", &max_order);
            push_opt(&mut o, "alpha", &alpha);
            push_opt(&mut o, "out_dir", &out_dir.map(|p| p.display().to_string()));
            commands::pipeline(&settings(config, o)?)
        }
        Command::Ingest { data, out } => {
            data.push(&mut o);
            commands::ingest(&settings(config, o)?, &out)
        }
        Command::Walks { data, delta, max_order, out } => {
            data.push(&mut o);
            push_opt(&mut o, "delta", &delta);
            push_opt(&mut o, "max_order", &max_order);
            commands::walks(&settings(config, o)?, &out)
        }
        Command::Debruijn { walks, order, out } => commands::debruijn(&walks, order, &out),
        Command::SelectOrder { walks, max_order, alpha, out } => {
            push_opt(&mut o, "alpha", &alpha);
            let s = settings(config, o)?;
            commands::select_order(&walks, max_order, s.alpha, out.as_deref())
        }
        Command::Train { data, model, method, out } => {
            data.push(&mut o);
            model.push(&mut o);
            commands::train(&settings(config, o)?, method, &out)
        }
        Command::Evaluate { checkpoint, input, labels, out } => {
            push_opt(&mut o, "input", &input.map(|p| p.display().to_string()));
            push_opt(&mut o, "labels", &labels.map(|p| p.display().to_string()));
            commands::evaluate_checkpoint(&settings(config, o)?, &checkpoint, out.as_deref())
        }
        Command::Generate(Generator::TempClusters { n, m, pairs, seed, out, labels }) => {
            push_opt(&mut o, "n", &n);
            push_opt(&mut o, "m", &m);
            push_opt(&mut o, "pairs", &pairs);
            push_opt(&mut o, "seed", &seed);
            let s = settings(config, o)?;
            commands::generate(&s.generator, &out, &labels)
        }
        Command::Shuffle { data, seed, out } => {
            data.push(&mut o);
            commands::shuffle(&settings(config, o)?, seed, &out)
        }
        Command::Embed { checkpoint, input, pca, out } => {
            push_opt(&mut o, "input", &input.map(|p| p.display().to_string()));
            if pca {
                o.push(("pca".into(), "true".into()));
            }
            commands::embed(&settings(config, o)?, &checkpoint, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE as u8) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code as u8)
        }
    }
}
