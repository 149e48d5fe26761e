//! Run settings: presets, flat `key = value` files, `DBGNN_*` environment
//! variables and command-line flags, applied in that order.

use std::path::PathBuf;

use dbgnn_core::experiment::{ModelSpec, TrainConfig};
use dbgnn_core::order::DEFAULT_ALPHA;
use dbgnn_core::synthetic::TempClustersParams;
use dbgnn_core::{Aggregator, ColumnOrder};

use crate::failure::Failure;

pub const ENV_PREFIX: &str = "DBGNN_";

pub const PRESETS: [&str; 7] = [
    "temp-clusters",
    "student-sms",
    "workplace",
    "hospital",
    "high-school",
    "high-school-2011",
    "high-school-2012",
];

/// Every key accepted in config files and as `DBGNN_<KEY>`.
pub const KEYS: [&str; 24] = [
    "preset",
    "input",
    "labels",
    "directed",
    "columns",
    "bin_width",
    "dedup_bins",
    "delta",
    "max_order",
    "alpha",
    "order",
    "hidden",
    "repr_dim",
    "aggregator",
    "lr",
    "epochs",
    "runs",
    "train_fraction",
    "seed",
    "out_dir",
    "n",
    "m",
    "pairs",
    "pca",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub preset: Option<String>,
    pub input: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub directed: bool,
    pub columns: ColumnOrder,
    pub bin_width: Option<i64>,
    pub dedup_bins: bool,
    pub delta: i64,
    pub max_order: usize,
    pub alpha: f64,
    /// Model order; the selected order when absent.
    pub order: Option<usize>,
    pub hidden: Vec<usize>,
    pub repr_dim: usize,
    pub aggregator: Aggregator,
    pub train: TrainConfig,
    pub out_dir: PathBuf,
    pub generator: TempClustersParams,
    pub pca: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            preset: None,
            input: None,
            labels: None,
            directed: true,
            columns: ColumnOrder::SourceTargetTime,
            bin_width: None,
            dedup_bins: false,
            delta: 1,
            max_order: 2,
            alpha: DEFAULT_ALPHA,
            order: None,
            hidden: vec![16, 16],
            repr_dim: 16,
            aggregator: Aggregator::Sum,
            train: TrainConfig::default(),
            out_dir: PathBuf::from("dbgnn-out"),
            generator: TempClustersParams::default(),
            pca: false,
        }
    }
}

fn normalize_key(key: &str) -> String {
    key.trim().to_ascii_lowercase().replace('-', "_")
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, Failure> {
    value
        .trim()
        .parse()
        .map_err(|_| Failure::usage(format!("invalid value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, Failure> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Failure::usage(format!("invalid value {value:?} for {key}, expected true or false"))),
    }
}

impl Settings {
    pub fn apply_preset(&mut self, name: &str) -> Result<(), Failure> {
        match name {
            "temp-clusters" => {
                self.directed = true;
                self.delta = 1;
                self.max_order = 2;
            }
            "student-sms" => {
                self.directed = true;
                self.delta = 40;
            }
            "workplace" | "hospital" | "high-school" | "high-school-2011" | "high-school-2012" => {
                self.directed = false;
                self.columns = ColumnOrder::TimeSourceTarget;
                self.bin_width = Some(900);
                self.delta = 4;
            }
            other => {
                return Err(Failure::usage(format!(
                    "unknown preset {other:?}; available: {}",
                    PRESETS.join(", ")
                )))
            }
        }
        self.preset = Some(name.to_owned());
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Failure> {
        let key = normalize_key(key);
        let v = value.trim();
        match key.as_str() {
            "preset" => self.apply_preset(v)?,
            "input" => self.input = Some(PathBuf::from(v)),
            "labels" => self.labels = Some(PathBuf::from(v)),
            "directed" => self.directed = parse_bool(&key, v)?,
            "columns" => self.columns = parse(&key, v)?,
            "bin_width" => self.bin_width = Some(parse(&key, v)?),
            "dedup_bins" => self.dedup_bins = parse_bool(&key, v)?,
            "delta" => self.delta = parse(&key, v)?,
            "max_order" => self.max_order = parse(&key, v)?,
            "alpha" => self.alpha = parse(&key, v)?,
            "order" => self.order = Some(parse(&key, v)?),
            "hidden" => {
                self.hidden = v
                    .split(',')
                    .map(|d| parse(&key, d))
                    .collect::<Result<Vec<usize>, _>>()?
            }
            "repr_dim" => self.repr_dim = parse(&key, v)?,
            "aggregator" => self.aggregator = parse(&key, v)?,
            "lr" => self.train.lr = parse(&key, v)?,
            "epochs" => self.train.epochs = parse(&key, v)?,
            "runs" => self.train.runs = parse(&key, v)?,
            "train_fraction" => self.train.train_fraction = parse(&key, v)?,
            "seed" => {
                let seed = parse(&key, v)?;
                self.train.seed = seed;
                self.generator.seed = seed;
            }
            "out_dir" => self.out_dir = PathBuf::from(v),
            "n" => self.generator.nodes = parse(&key, v)?,
            "m" => self.generator.edges = parse(&key, v)?,
            "pairs" => self.generator.pairs = parse(&key, v)?,
            "pca" => self.pca = parse_bool(&key, v)?,
            _ => return Err(Failure::usage(format!("unknown setting {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if self.delta < 1 {
            return Err(Failure::usage("delta must be >= 1"));
        }
        if self.max_order < 1 {
            return Err(Failure::usage("max order must be >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Failure::usage("alpha must be in (0, 1)"));
        }
        if matches!(self.bin_width, Some(w) if w < 1) {
            return Err(Failure::usage("bin width must be >= 1"));
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) || self.repr_dim == 0 {
            return Err(Failure::usage("layer widths must be >= 1"));
        }
        self.train.validate().map_err(|e| Failure::usage(e.to_string()))
    }

    pub fn model_spec(&self, order: usize) -> ModelSpec {
        ModelSpec {
            order,
            ho_hidden: self.hidden.clone(),
            fo_hidden: self.hidden.clone(),
            repr_dim: self.repr_dim,
            aggregator: self.aggregator,
        }
    }
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>, Failure> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("config line {}: expected key = value", i + 1)))?;
        out.push((normalize_key(k), v.trim().to_owned()));
    }
    Ok(out)
}

/// Resolves settings from (in increasing precedence) a preset, a config
/// file, the environment and explicit overrides.
pub fn resolve(
    config_file: Option<&std::path::Path>,
    env: impl IntoIterator<Item = (String, String)>,
    overrides: &[(String, String)],
) -> Result<Settings, Failure> {
    let mut layers: Vec<Vec<(String, String)>> = Vec::new();
    if let Some(path) = config_file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::data(format!("config: cannot read {}: {e}", path.display())))?;
        layers.push(parse_config_file(&text)?);
    }
    let env: Vec<(String, String)> = env
        .into_iter()
        .filter_map(|(k, v)| {
            let key = k.strip_prefix(ENV_PREFIX)?.to_ascii_lowercase();
            KEYS.contains(&key.as_str()).then_some((key, v))
        })
        .collect();
    layers.push(env);
    layers.push(overrides.to_vec());

    let mut settings = Settings::default();
    // the preset sets defaults for everything else, so it goes first
    let preset = layers.iter().flatten().rfind(|(k, _)| normalize_key(k) == "preset");
    if let Some((_, name)) = preset {
        settings.apply_preset(name.trim())?;
    }
    for (k, v) in layers.iter().flatten() {
        if normalize_key(k) != "preset" {
            settings.set(k, v)?;
        }
    }
    settings.validate()?;
    Ok(settings)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(items: &[(&str, &str)]) -> Vec<(String, String)> {
        items.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn precedence_order() {
        let dir = std::env::temp_dir().join(format!("dbgnn-config-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("run.conf");
        std::fs::write(&file, "# comment\npreset = workplace\ndelta = 6\nepochs = 10\nseed=3\n").unwrap();
        let s = resolve(
            Some(&file),
            pairs(&[("DBGNN_EPOCHS", "20"), ("DBGNN_UNRELATED_THING", "x"), ("PATH", "/bin")]),
            &pairs(&[("epochs", "30")]),
        )
        .unwrap();
        assert_eq!(s.delta, 6);
        assert_eq!(s.bin_width, Some(900));
        assert!(!s.directed);
        assert_eq!(s.train.epochs, 30);
        assert_eq!(s.train.seed, 3);

        let s = resolve(Some(&file), pairs(&[("DBGNN_EPOCHS", "20")]), &[]).unwrap();
        assert_eq!(s.train.epochs, 20);
        std::fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn presets() {
        let s = resolve(None, [], &pairs(&[("preset", "student-sms")])).unwrap();
        assert_eq!((s.delta, s.directed, s.bin_width), (40, true, None));
        assert!(resolve(None, [], &pairs(&[("preset", "nope")])).is_err());
    }

    #[test]
    fn rejects_bad_values() {
        assert!(resolve(None, [], &pairs(&[("delta", "0")])).is_err());
        assert!(resolve(None, [], &pairs(&[("delta", "x")])).is_err());
        assert!(resolve(None, [], &pairs(&[("colour", "red")])).is_err());
        assert!(parse_config_file("no equals sign").is_err());
        let s = resolve(None, [], &pairs(&[("hidden", "8,4"), ("aggregator", "max")])).unwrap();
        assert_eq!(s.hidden, vec![8, 4]);
        assert_eq!(s.aggregator, Aggregator::Max);
    }
}
