//! The `gso` command line. [`run`] parses arguments, dispatches and returns
//! the process exit code: 0 on success, 1 on a domain error, 2 on a usage
//! error.

use clap::{Args, Parser, Subcommand};
use gso::annotation::{AnnotationStore, StoreConfig, SystemClock};
use gso::classifiers::{Algorithm, AlgorithmParams, TrainParams, TrainedModel};
use gso::dataset::{
    compute_stats, generate_synthetic, load_dataset, save_dataset, stratified_kfold, Dataset, LoadMode, SyntheticConfig,
};
use gso::eval::{cross_validate, fit_fold, run_suite, ConfusionMatrix, FeatureConfig, Representation, SuiteConfig};
use gso::features::{binarize_columns, build_vocabulary, cfs_select, CfsConfig, FeatureMode, FeatureOptions, FeatureSpace, SparseVector};
use gso::ontology::{enumerate_pairs, fixture_lexicon, read_lexicon_file, write_lexicon, PairKind, Pos, SentiPairSequence, SynsetForest};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const DATA_DIR_ENV: &str = "GSO_DATA_DIR";

#[derive(Debug, Parser)]
#[command(name = "gso", version, about = "SentiPair ontology, datasets, classifiers and the annotation service")]
pub struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Lexicon or forest file. Defaults to `$GSO_DATA_DIR/lexicon.jsonl`,
    /// then to the bundled lexicon.
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// Default location for inputs and outputs.
    #[arg(long, global = true, env = DATA_DIR_ENV)]
    pub data_dir: Option<PathBuf>,
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synset Forest operations.
    #[command(subcommand)]
    Forest(ForestCmd),
    /// SentiPair vocabulary.
    #[command(subcommand)]
    Pairs(PairsCmd),
    /// GSO-2015 dataset files.
    #[command(subcommand)]
    Dataset(DatasetCmd),
    /// Bag-of-pairs feature spaces.
    #[command(subcommand)]
    Features(FeaturesCmd),
    /// Train and apply classifiers.
    #[command(subcommand)]
    Model(ModelCmd),
    /// Cross-validation and the experiment suite.
    #[command(subcommand)]
    Eval(EvalCmd),
    /// Run the annotation HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Subcommand)]
pub enum ForestCmd {
    /// Build and propagate scores, write the forest, print per-tree counts.
    Build {
        /// Output file; defaults to `forest.jsonl` in the data directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-tree counts, depths and warnings.
    Stats,
    /// Prefix search over lemmas.
    Search {
        query: String,
        #[arg(long)]
        pos: Option<Pos>,
        #[arg(long, default_value_t = 20)]
        limit: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum PairsCmd {
    /// List valid ANPs and VNPs with their weights.
    Enumerate {
        #[arg(long, default_value_t = usize::MAX)]
        max: usize,
        /// Only `anp` or `vnp`.
        #[arg(long)]
        kind: Option<String>,
    },
}

#[derive(Args, Debug, Clone)]
pub struct DatasetIn {
    /// `.gso.jsonl` file.
    #[arg(long = "in", alias = "dataset")]
    pub input: PathBuf,
    /// Drop unresolved pairs instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Subcommand)]
pub enum DatasetCmd {
    /// Load strictly and report problems.
    Validate(DatasetIn),
    /// Class shares, durations, noise flags, sequence lengths.
    Stats(DatasetIn),
    /// Generate a dataset with a planted labelling rule.
    GenSynthetic(GenArgs),
    /// Stratified k-fold split into train/test files.
    Split {
        #[command(flatten)]
        input: DatasetIn,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1869)]
    pub n: usize,
    /// Positive,Negative,Neutral.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.603, 0.078, 0.321])]
    pub ratios: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.4)]
    pub vnp_share: f64,
    #[arg(long, default_value_t = 20)]
    pub pairs_per_kind: usize,
    #[arg(long, default_value_t = 2)]
    pub min_len: usize,
    #[arg(long, default_value_t = 6)]
    pub max_len: usize,
    #[arg(long, default_value_t = 0.1)]
    pub margin: f64,
    /// Also write the planted signal as JSON.
    #[arg(long)]
    pub signal_out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct FeatureArgs {
    #[arg(long, default_value = "binary")]
    pub mode: FeatureMode,
    #[arg(long, default_value_t = 1)]
    pub min_freq: usize,
    /// Add consecutive-pair features.
    #[arg(long)]
    pub bigrams: bool,
    /// `anp`, `vnp` or `sentipair`.
    #[arg(long, default_value = "sentipair")]
    pub representation: Representation,
}

impl FeatureArgs {
    fn options(&self) -> FeatureOptions {
        FeatureOptions { mode: self.mode, min_freq: self.min_freq, pair_bigrams: self.bigrams }
    }

    fn config(&self, selection: bool) -> FeatureConfig {
        FeatureConfig { mode: self.mode, min_freq: self.min_freq, selection, representation: self.representation, pair_bigrams: self.bigrams }
    }
}

#[derive(Debug, Subcommand)]
pub enum FeaturesCmd {
    /// Build a vocabulary and write the feature space.
    Build {
        #[command(flatten)]
        input: DatasetIn,
        #[command(flatten)]
        features: FeatureArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run CFS over a feature space and write the reduced space.
    Select {
        #[command(flatten)]
        input: DatasetIn,
        #[arg(long)]
        space: PathBuf,
        #[arg(long, default_value_t = 5)]
        stall_limit: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug, Clone)]
pub struct AlgoArgs {
    /// nb, smo, logistic, adaboost or rf.
    #[arg(long, default_value = "smo")]
    pub algorithm: Algorithm,
    /// Hyperparameter override, e.g. `c=0.5` or `trees=50` (repeatable).
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
}

impl AlgoArgs {
    fn train_params(&self, seed: u64) -> Result<TrainParams, CliError> {
        Ok(TrainParams { params: override_params(self.algorithm, &self.params)?, seed })
    }
}

#[derive(Debug, Subcommand)]
pub enum ModelCmd {
    /// Fit on a whole dataset and write a model bundle.
    Train {
        #[command(flatten)]
        input: DatasetIn,
        #[command(flatten)]
        algo: AlgoArgs,
        #[command(flatten)]
        features: FeatureArgs,
        /// Run CFS before training.
        #[arg(long)]
        select: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Label every instance of a dataset with a trained bundle.
    Predict {
        #[command(flatten)]
        input: DatasetIn,
        #[arg(long)]
        model: PathBuf,
        /// Write predictions as `.gso.jsonl` here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum EvalCmd {
    /// Stratified k-fold cross-validation of one configuration.
    Run {
        #[command(flatten)]
        input: DatasetIn,
        #[command(flatten)]
        algo: AlgoArgs,
        #[command(flatten)]
        features: FeatureArgs,
        #[arg(long)]
        select: bool,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Write the report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Every algorithm x selection x representation, rendered as tables.
    Suite {
        #[command(flatten)]
        input: DatasetIn,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value = "binary")]
        mode: FeatureMode,
        /// Restrict the algorithms (comma separated).
        #[arg(long, value_delimiter = ',')]
        algorithms: Option<Vec<Algorithm>>,
        /// Rows and columns exactly as the three published tables, three decimals.
        #[arg(long)]
        paper_format: bool,
        /// Write the machine-readable report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: std::net::SocketAddr,
    /// Store directory; defaults to `annotations/` in the data directory.
    #[arg(long)]
    pub store: Option<PathBuf>,
    #[arg(long, default_value_t = 7)]
    pub required_workers: usize,
    #[arg(long, default_value_t = 600)]
    pub lease_secs: u64,
    /// Seed tasks from a JSON-lines file of `{"gif_id", "gif_uri"}`.
    #[arg(long)]
    pub tasks: Option<PathBuf>,
    /// Register these worker ids (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub workers: Vec<String>,
}

/// A domain failure with its machine-readable code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: String,
    pub message: String,
}

impl CliError {
    fn new(code: &str, message: impl Into<String>) -> Self {
        CliError { code: code.to_string(), message: message.into() }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::new("Io", format!("{}: {e}", path.display()))
    }
}

macro_rules! domain_error {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::new(e.code(), e.to_string())
            }
        }
    )*};
}

domain_error!(
    gso::ontology::OntologyError,
    gso::ontology::PairError,
    gso::dataset::DatasetError,
    gso::features::FeatureError,
    gso::classifiers::ClassifierError,
    gso::eval::EvalError,
    gso::annotation::AnnotationError
);

/// What a command produced: human text and the JSON equivalent.
struct Output {
    text: String,
    json: Value,
}

impl Output {
    fn new(text: impl Into<String>, json: Value) -> Self {
        Output { text: text.into(), json }
    }
}

/// Parses `args` (program name first) and runs the command, writing to the
/// given streams.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    let level = ["warn", "info", "debug", "trace"][usize::from(cli.verbose.min(3))];
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let json = cli.json;
    match execute(&cli) {
        Ok(out) => {
            let _ = if json { writeln!(stdout, "{}", serde_json::to_string_pretty(&out.json).expect("json")) } else { write!(stdout, "{}", out.text) };
            0
        }
        Err(e) => {
            if json {
                let _ = writeln!(stdout, "{}", json!({ "error": { "code": e.code, "message": e.message } }));
            }
            let _ = writeln!(stderr, "error[{}]: {}", e.code, e.message);
            1
        }
    }
}

fn execute(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Forest(cmd) => forest_cmd(cli, cmd),
        Command::Pairs(PairsCmd::Enumerate { max, kind }) => pairs_enumerate(cli, *max, kind.as_deref()),
        Command::Dataset(cmd) => dataset_cmd(cli, cmd),
        Command::Features(cmd) => features_cmd(cli, cmd),
        Command::Model(cmd) => model_cmd(cli, cmd),
        Command::Eval(cmd) => eval_cmd(cli, cmd),
        Command::Serve(args) => serve(cli, args),
    }
}

fn lexicon_path(cli: &Cli) -> Option<PathBuf> {
    if let Some(p) = &cli.lexicon {
        return Some(p.clone());
    }
    let default = cli.data_dir.as_ref()?.join("lexicon.jsonl");
    default.exists().then_some(default)
}

/// Builds and propagates the forest from the configured lexicon.
fn load_forest(cli: &Cli) -> Result<SynsetForest, CliError> {
    let records = match lexicon_path(cli) {
        Some(p) => read_lexicon_file(&p)?,
        None => {
            log::info!("no lexicon given; using the bundled one");
            fixture_lexicon()
        }
    };
    Ok(SynsetForest::build(records)?.propagate_scores()?)
}

fn in_data_dir(cli: &Cli, name: &str) -> PathBuf {
    cli.data_dir.as_ref().map_or_else(|| PathBuf::from(name), |d| d.join(name))
}

fn load(forest: &SynsetForest, input: &DatasetIn) -> Result<Dataset, CliError> {
    let mode = if input.lenient { LoadMode::Lenient } else { LoadMode::Strict };
    Ok(load_dataset(&input.input, forest, mode)?)
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn forest_cmd(cli: &Cli, cmd: &ForestCmd) -> Result<Output, CliError> {
    let forest = load_forest(cli)?;
    match cmd {
        ForestCmd::Build { out } => {
            let out = out.clone().unwrap_or_else(|| in_data_dir(cli, "forest.jsonl"));
            let mut buf = Vec::new();
            write_lexicon(&forest, &mut buf).map_err(|e| CliError::io(&out, e))?;
            write_file(&out, &buf)?;
            let summary = forest.summary();
            let text = format!("{}wrote {}\n", summary.render(), out.display());
            Ok(Output::new(text, json!({ "out": out, "summary": summary })))
        }
        ForestCmd::Stats => {
            let summary = forest.summary();
            Ok(Output::new(summary.render(), serde_json::to_value(&summary).expect("json")))
        }
        ForestCmd::Search { query, pos, limit } => {
            let hits: Vec<_> = forest.search(query, *pos).into_iter().take(*limit).collect();
            let mut text = String::new();
            for s in &hits {
                let score = s.score.map_or_else(|| "-".into(), |v| format!("{v:+.3}"));
                text.push_str(&format!("{:<22} {:<10} {:>7}  {}\n", s.id.as_str(), s.pos.as_str(), score, s.gloss));
            }
            Ok(Output::new(text, serde_json::to_value(&hits).expect("json")))
        }
    }
}

fn pairs_enumerate(cli: &Cli, max: usize, kind: Option<&str>) -> Result<Output, CliError> {
    let kind = match kind.map(str::to_ascii_lowercase).as_deref() {
        None => None,
        Some("anp") => Some(PairKind::Anp),
        Some("vnp") => Some(PairKind::Vnp),
        Some(other) => return Err(CliError::new("InvalidArgument", format!("unknown pair kind `{other}`"))),
    };
    let forest = load_forest(cli)?;
    let pairs: Vec<_> = enumerate_pairs(&forest, usize::MAX)?.into_iter().filter(|p| kind.is_none_or(|k| p.kind() == k)).take(max).collect();
    let mut text = String::new();
    for p in &pairs {
        text.push_str(&format!("{:<24} {} {:+.3}\n", p.label(), p.kind().as_str(), p.weight()));
    }
    let rows: Vec<Value> = pairs
        .iter()
        .map(|p| json!({ "modifier": p.modifier(), "noun": p.noun(), "kind": p.kind(), "weight": p.weight(), "label": p.label() }))
        .collect();
    Ok(Output::new(text, Value::Array(rows)))
}

fn dataset_cmd(cli: &Cli, cmd: &DatasetCmd) -> Result<Output, CliError> {
    let forest = load_forest(cli)?;
    match cmd {
        DatasetCmd::Validate(input) => {
            let ds = load(&forest, input)?;
            let text = format!("{}: {} instances valid, {} pairs dropped\n", input.input.display(), ds.len(), ds.dropped_pairs);
            Ok(Output::new(text, json!({ "valid": true, "instances": ds.len(), "dropped_pairs": ds.dropped_pairs })))
        }
        DatasetCmd::Stats(input) => {
            let stats = compute_stats(&load(&forest, input)?);
            Ok(Output::new(stats.render(), serde_json::to_value(&stats).expect("json")))
        }
        DatasetCmd::GenSynthetic(a) => {
            let config = SyntheticConfig {
                n: a.n,
                class_ratios: [a.ratios[0], a.ratios[1], a.ratios[2]],
                signal: None,
                pairs_per_kind: a.pairs_per_kind,
                noise_rate: a.noise,
                vnp_signal_share: a.vnp_share,
                min_len: a.min_len,
                max_len: a.max_len,
                margin: a.margin,
                seed: cli.seed,
            };
            let synth = generate_synthetic(&forest, &config)?;
            save_dataset(&synth.dataset, &a.out).map_err(|e| CliError::io(&a.out, e))?;
            if let Some(p) = &a.signal_out {
                write_file(p, serde_json::to_string_pretty(&synth.signal).expect("json").as_bytes())?;
            }
            let flipped = synth.clean_labels.iter().zip(&synth.dataset.instances).filter(|(c, i)| **c != i.label).count();
            let stats = compute_stats(&synth.dataset);
            let text = format!("{}wrote {} ({} labels flipped by noise)\n", stats.render(), a.out.display(), flipped);
            Ok(Output::new(text, json!({ "out": a.out, "instances": synth.dataset.len(), "flipped": flipped, "stats": stats })))
        }
        DatasetCmd::Split { input, k, out_dir } => {
            let ds = load(&forest, input)?;
            let folds = stratified_kfold(&ds, *k, cli.seed)?;
            let mut text = String::new();
            for (i, f) in folds.iter().enumerate() {
                for (part, idx) in [("train", &f.train), ("test", &f.test)] {
                    let path = out_dir.join(format!("fold-{i:02}.{part}.gso.jsonl"));
                    let mut buf = Vec::new();
                    gso::dataset::write_dataset(&ds.subset(idx), &mut buf).map_err(|e| CliError::io(&path, e))?;
                    write_file(&path, &buf)?;
                }
                text.push_str(&format!("fold {i}: {} train, {} test\n", f.train.len(), f.test.len()));
            }
            write_file(&out_dir.join("folds.json"), serde_json::to_string_pretty(&folds).expect("json").as_bytes())?;
            Ok(Output::new(text, json!({ "k": k, "seed": cli.seed, "folds": folds })))
        }
    }
}

fn sequences(ds: &Dataset, idx: &[usize], rep: Representation) -> Vec<SentiPairSequence> {
    idx.iter().map(|&i| rep.apply(&ds.instances[i].sequence)).collect()
}

fn features_cmd(cli: &Cli, cmd: &FeaturesCmd) -> Result<Output, CliError> {
    let forest = load_forest(cli)?;
    match cmd {
        FeaturesCmd::Build { input, features, out } => {
            let ds = load(&forest, input)?;
            let seqs = sequences(&ds, &(0..ds.len()).collect::<Vec<_>>(), features.representation);
            let space = build_vocabulary(&seqs, features.options())?;
            write_file(out, space.to_json().as_bytes())?;
            let text = format!("{} features ({:?}) written to {}\n", space.dim(), space.mode(), out.display());
            Ok(Output::new(text, json!({ "out": out, "features": space.dim() })))
        }
        FeaturesCmd::Select { input, space, stall_limit, out } => {
            let ds = load(&forest, input)?;
            let text = std::fs::read_to_string(space).map_err(|e| CliError::io(space, e))?;
            let space = FeatureSpace::from_json(&text)?.without_selection();
            let idx = ds.trainable_indices();
            let rows: Vec<SparseVector> = idx.iter().map(|&i| space.featurize(&ds.instances[i].sequence)).collect();
            let y: Vec<u32> = idx.iter().map(|&i| ds.instances[i].label.class_index().expect("trainable") as u32).collect();
            let result = cfs_select(&binarize_columns(&rows, space.dim()), &y, CfsConfig { stall_limit: *stall_limit })?;
            let selected = space.select_indices(&result.selected)?;
            write_file(out, selected.to_json().as_bytes())?;
            let mut text = format!("CFS kept {} of {} features, merit {:.4}, {} subsets evaluated\n", result.selected.len(), space.dim(), result.merit, result.evaluated);
            for e in selected.active_entries() {
                text.push_str(&format!("  {}\n", e.label));
            }
            let labels: Vec<&str> = selected.active_entries().iter().map(|e| e.label.as_str()).collect();
            Ok(Output::new(text, json!({ "out": out, "selected": labels, "merit": result.merit, "evaluated": result.evaluated })))
        }
    }
}

/// Applies `key=value` overrides on top of an algorithm's defaults.
pub fn override_params(algorithm: Algorithm, overrides: &[String]) -> Result<AlgorithmParams, CliError> {
    let mut v = serde_json::to_value(algorithm.default_params()).expect("params serialize");
    for o in overrides {
        let (key, raw) = o.split_once('=').ok_or_else(|| CliError::new("InvalidParams", format!("expected KEY=VALUE, got `{o}`")))?;
        if key == "algorithm" {
            return Err(CliError::new("InvalidParams", "use --algorithm to pick the algorithm"));
        }
        let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
        v[key] = value;
    }
    let params: AlgorithmParams = serde_json::from_value(v).map_err(|e| CliError::new("InvalidParams", e.to_string()))?;
    params.validate()?;
    Ok(params)
}

/// Model file written by `model train`: the fitted feature space, the
/// representation filter, and the classifier.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelBundle {
    pub representation: Representation,
    pub space: Value,
    pub model: TrainedModel,
}

fn model_cmd(cli: &Cli, cmd: &ModelCmd) -> Result<Output, CliError> {
    let forest = load_forest(cli)?;
    match cmd {
        ModelCmd::Train { input, algo, features, select, out } => {
            let ds = load(&forest, input)?;
            let params = algo.train_params(cli.seed)?;
            let idx = ds.trainable_indices();
            let fitted = fit_fold(&ds, &idx, &features.config(*select), &params)?;
            let bundle = ModelBundle {
                representation: features.representation,
                space: serde_json::from_str(&fitted.space.to_json()).expect("space json"),
                model: fitted.model,
            };
            write_file(out, serde_json::to_string_pretty(&bundle).expect("json").as_bytes())?;
            let text = format!(
                "trained {} on {} instances, {} features; wrote {}\n",
                params.algorithm(),
                idx.len(),
                bundle.model.dim,
                out.display()
            );
            Ok(Output::new(text, json!({ "out": out, "algorithm": params.algorithm(), "instances": idx.len(), "features": bundle.model.dim })))
        }
        ModelCmd::Predict { input, model, out } => {
            let ds = load(&forest, input)?;
            let text = std::fs::read_to_string(model).map_err(|e| CliError::io(model, e))?;
            let bundle: ModelBundle = serde_json::from_str(&text).map_err(|e| CliError::new("Format", format!("{}: {e}", model.display())))?;
            if bundle.model.format_version != gso::classifiers::MODEL_FORMAT_VERSION {
                return Err(CliError::new("VersionMismatch", format!("model format {}", bundle.model.format_version)));
            }
            let space = FeatureSpace::from_json(&bundle.space.to_string())?;
            let mut predicted = ds.clone();
            let mut cm = ConfusionMatrix::default();
            let mut text = String::new();
            let mut rows = Vec::new();
            for (inst, slot) in ds.instances.iter().zip(predicted.instances.iter_mut()) {
                let label = bundle.model.predict(&space.featurize(&bundle.representation.apply(&inst.sequence)))?;
                if inst.label.is_trainable() {
                    cm.add(inst.label, label)?;
                }
                text.push_str(&format!("{}\t{}\n", inst.gif_id, label));
                rows.push(json!({ "gif_id": inst.gif_id, "predicted": label, "label": inst.label }));
                slot.label = label;
            }
            if let Some(out) = out {
                save_dataset(&predicted, out).map_err(|e| CliError::io(out, e))?;
            }
            let accuracy = (cm.total() > 0).then(|| cm.trace() as f64 / cm.total() as f64);
            if let Some(a) = accuracy {
                text.push_str(&format!("accuracy {:.1}% on {} labelled instances\n", a * 100.0, cm.total()));
            }
            Ok(Output::new(text, json!({ "predictions": rows, "accuracy": accuracy })))
        }
    }
}

fn eval_cmd(cli: &Cli, cmd: &EvalCmd) -> Result<Output, CliError> {
    let forest = load_forest(cli)?;
    match cmd {
        EvalCmd::Run { input, algo, features, select, k, out } => {
            let ds = load(&forest, input)?;
            let report = cross_validate(&ds, &features.config(*select), &algo.train_params(cli.seed)?, *k, cli.seed)?;
            if let Some(out) = out {
                write_file(out, serde_json::to_string_pretty(&report).expect("json").as_bytes())?;
            }
            Ok(Output::new(report.render(), serde_json::to_value(&report).expect("json")))
        }
        EvalCmd::Suite { input, k, mode, algorithms, paper_format, out } => {
            let ds = load(&forest, input)?;
            let mut config = SuiteConfig { k: *k, seed: cli.seed, mode: *mode, ..Default::default() };
            if let Some(a) = algorithms {
                config.algorithms = a.clone();
            }
            let report = run_suite(&ds, &forest, &config)?;
            if let Some(out) = out {
                write_file(out, report.to_json().as_bytes())?;
            }
            let text = if *paper_format { report.render_paper() } else { report.render() };
            Ok(Output::new(text, serde_json::from_str(&report.to_json()).expect("json")))
        }
    }
}

#[derive(Deserialize)]
struct TaskLine {
    gif_id: String,
    gif_uri: String,
    required_workers: Option<usize>,
}

fn serve(cli: &Cli, args: &ServeArgs) -> Result<Output, CliError> {
    let forest = Arc::new(load_forest(cli)?);
    let dir = args.store.clone().unwrap_or_else(|| in_data_dir(cli, "annotations"));
    let config = StoreConfig { required_workers: args.required_workers, lease_ms: args.lease_secs * 1000, ..Default::default() };
    let store = Arc::new(AnnotationStore::open(&dir, forest, config, Arc::new(SystemClock))?);
    if let Some(path) = &args.tasks {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let t: TaskLine = serde_json::from_str(line).map_err(|e| CliError::new("ParseError", format!("{} line {}: {e}", path.display(), i + 1)))?;
            store.add_task(&t.gif_id, &t.gif_uri, t.required_workers)?;
        }
    }
    for w in &args.workers {
        store.register_worker(w)?;
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::new("Io", e.to_string()))?;
    runtime.block_on(gso_server::serve(args.addr, store.clone())).map_err(|e| CliError::new("Io", format!("{}: {e}", args.addr)))?;
    store.checkpoint()?;
    let stats = store.stats()?;
    Ok(Output::new(format!("stopped; {} tasks, {} done\n", stats.tasks, stats.done), serde_json::to_value(&stats).expect("json")))
}
