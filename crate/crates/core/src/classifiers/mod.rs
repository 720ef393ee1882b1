//! The five sentiment classifiers behind one train/predict contract.
//!
//! All of them consume [`SparseVector`] rows and [`SentimentLabel`] targets
//! and produce a [`TrainedModel`] that serializes to a versioned JSON file.
//! Training is deterministic given the data, the hyperparameters and the
//! seed; the random forest is the only algorithm that draws from the seed.

mod boosting;
mod logistic;
mod naive_bayes;
mod svm;
mod tree;

pub use boosting::{AdaBoostModel, AdaBoostTrace, Stump};
pub use logistic::{cross_entropy_gradient, cross_entropy_loss, LogisticFit, LogisticModel};
pub use naive_bayes::NaiveBayesModel;
pub use svm::{smo_solve, PairwiseMachine, SmoSolution, SvmModel};
pub use tree::{DecisionTree, ForestModel, TreeNode};

use crate::dataset::SentimentLabel;
use crate::features::SparseVector;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use thiserror::Error;

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifierError {
    #[error("training data contains a single class ({0})")]
    SingleClass(SentimentLabel),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("row {row} holds a non-finite feature value")]
    NonFiniteFeature { row: usize },
    #[error("row {row} holds a negative feature value; naive Bayes needs counts")]
    NegativeFeature { row: usize },
    #[error("invalid hyperparameter: {0}")]
    InvalidParams(String),
    #[error("model file has format version {found}, this build reads {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("model file: {0}")]
    Format(String),
}

impl ClassifierError {
    pub fn code(&self) -> &'static str {
        match self {
            ClassifierError::SingleClass(_) => "SingleClass",
            ClassifierError::EmptyTrainingSet => "EmptyTrainingSet",
            ClassifierError::DimensionMismatch { .. } => "DimensionMismatch",
            ClassifierError::NonFiniteFeature { .. } => "NonFiniteFeature",
            ClassifierError::NegativeFeature { .. } => "NegativeFeature",
            ClassifierError::InvalidParams(_) => "InvalidParams",
            ClassifierError::VersionMismatch { .. } => "VersionMismatch",
            ClassifierError::Format(_) => "FormatError",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    NaiveBayes,
    #[serde(rename = "SMO")]
    Smo,
    Logistic,
    AdaBoost,
    RandomForest,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::NaiveBayes, Algorithm::Smo, Algorithm::Logistic, Algorithm::AdaBoost, Algorithm::RandomForest];

    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::NaiveBayes => "NaiveBayes",
            Algorithm::Smo => "SMO",
            Algorithm::Logistic => "Logistic",
            Algorithm::AdaBoost => "AdaBoost",
            Algorithm::RandomForest => "RandomForest",
        }
    }

    pub fn default_params(self) -> AlgorithmParams {
        match self {
            Algorithm::NaiveBayes => AlgorithmParams::NaiveBayes { alpha: 1.0 },
            Algorithm::Smo => AlgorithmParams::Smo { c: 1.0, tol: 1e-3, max_passes: 1000 },
            Algorithm::Logistic => AlgorithmParams::Logistic { l2: 1e-4, max_epochs: 500, grad_tol: 1e-6 },
            Algorithm::AdaBoost => AlgorithmParams::AdaBoost { rounds: 10 },
            Algorithm::RandomForest => AlgorithmParams::RandomForest { trees: 100, max_features: None, bootstrap: true },
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "naivebayes" | "nb" => Ok(Algorithm::NaiveBayes),
            "smo" | "svm" => Ok(Algorithm::Smo),
            "logistic" | "lr" => Ok(Algorithm::Logistic),
            "adaboost" => Ok(Algorithm::AdaBoost),
            "randomforest" | "rf" => Ok(Algorithm::RandomForest),
            _ => Err(format!("unknown algorithm `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", deny_unknown_fields)]
pub enum AlgorithmParams {
    NaiveBayes {
        /// Laplace smoothing added to every feature count.
        alpha: f64,
    },
    #[serde(rename = "SMO")]
    Smo {
        c: f64,
        tol: f64,
        /// Pair updates are capped at `max_passes * n`.
        max_passes: usize,
    },
    Logistic {
        l2: f64,
        max_epochs: usize,
        grad_tol: f64,
    },
    AdaBoost {
        rounds: usize,
    },
    RandomForest {
        trees: usize,
        /// Candidate features per split; `None` means `ceil(sqrt(d))`.
        max_features: Option<usize>,
        bootstrap: bool,
    },
}

impl AlgorithmParams {
    pub fn algorithm(&self) -> Algorithm {
        match self {
            AlgorithmParams::NaiveBayes { .. } => Algorithm::NaiveBayes,
            AlgorithmParams::Smo { .. } => Algorithm::Smo,
            AlgorithmParams::Logistic { .. } => Algorithm::Logistic,
            AlgorithmParams::AdaBoost { .. } => Algorithm::AdaBoost,
            AlgorithmParams::RandomForest { .. } => Algorithm::RandomForest,
        }
    }

    pub fn validate(&self) -> Result<(), ClassifierError> {
        let bad = |m: &str| Err(ClassifierError::InvalidParams(m.to_string()));
        match *self {
            AlgorithmParams::NaiveBayes { alpha } if !(alpha > 0.0 && alpha.is_finite()) => bad("alpha must be > 0"),
            AlgorithmParams::Smo { c, .. } if !(c > 0.0 && c.is_finite()) => bad("C must be > 0"),
            AlgorithmParams::Smo { tol, .. } if !(tol > 0.0) => bad("tol must be > 0"),
            AlgorithmParams::Smo { max_passes: 0, .. } => bad("max_passes must be >= 1"),
            AlgorithmParams::Logistic { l2, .. } if !(l2 >= 0.0 && l2.is_finite()) => bad("l2 must be >= 0"),
            AlgorithmParams::Logistic { max_epochs: 0, .. } => bad("max_epochs must be >= 1"),
            AlgorithmParams::Logistic { grad_tol, .. } if !(grad_tol >= 0.0) => bad("grad_tol must be >= 0"),
            AlgorithmParams::AdaBoost { rounds: 0 } => bad("rounds must be >= 1"),
            AlgorithmParams::RandomForest { trees: 0, .. } => bad("trees must be >= 1"),
            AlgorithmParams::RandomForest { max_features: Some(0), .. } => bad("max_features must be >= 1"),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainParams {
    pub params: AlgorithmParams,
    pub seed: u64,
}

impl TrainParams {
    pub fn new(algorithm: Algorithm, seed: u64) -> Self {
        TrainParams { params: algorithm.default_params(), seed }
    }

    pub fn algorithm(&self) -> Algorithm {
        self.params.algorithm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelParams {
    NaiveBayes(NaiveBayesModel),
    Smo(SvmModel),
    Logistic(LogisticModel),
    AdaBoost(AdaBoostModel),
    RandomForest(ForestModel),
}

/// A fitted classifier. Class indices inside `model` refer to positions in
/// `labels`, which is sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub format_version: u32,
    pub params: TrainParams,
    pub labels: Vec<SentimentLabel>,
    pub dim: usize,
    pub model: ModelParams,
}

/// Validated training data with labels mapped to class indices.
pub(crate) struct Prepared {
    pub labels: Vec<SentimentLabel>,
    pub y: Vec<usize>,
    pub dim: usize,
}

pub(crate) fn prepare(x: &[SparseVector], y: &[SentimentLabel]) -> Result<Prepared, ClassifierError> {
    if x.len() != y.len() {
        return Err(ClassifierError::DimensionMismatch { expected: y.len(), got: x.len() });
    }
    if x.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    let dim = x[0].dim();
    for (row, v) in x.iter().enumerate() {
        if v.dim() != dim {
            return Err(ClassifierError::DimensionMismatch { expected: dim, got: v.dim() });
        }
        if !v.is_finite() {
            return Err(ClassifierError::NonFiniteFeature { row });
        }
    }
    let mut labels = y.to_vec();
    labels.sort();
    labels.dedup();
    if labels.len() < 2 {
        return Err(ClassifierError::SingleClass(labels[0]));
    }
    let y = y.iter().map(|l| labels.binary_search(l).expect("label collected")).collect();
    Ok(Prepared { labels, y, dim })
}

/// Index of the largest value; ties go to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Fits a model. Rows must share one dimension and contain only finite values.
pub fn train(x: &[SparseVector], y: &[SentimentLabel], params: &TrainParams) -> Result<TrainedModel, ClassifierError> {
    params.params.validate()?;
    let data = prepare(x, y)?;
    let k = data.labels.len();
    let model = match params.params {
        AlgorithmParams::NaiveBayes { alpha } => ModelParams::NaiveBayes(NaiveBayesModel::fit(x, &data.y, k, data.dim, alpha)?),
        AlgorithmParams::Smo { c, tol, max_passes } => ModelParams::Smo(SvmModel::fit(x, &data.y, k, c, tol, max_passes)?),
        AlgorithmParams::Logistic { l2, max_epochs, grad_tol } => {
            ModelParams::Logistic(LogisticModel::fit(x, &data.y, k, l2, max_epochs, grad_tol).model)
        }
        AlgorithmParams::AdaBoost { rounds } => ModelParams::AdaBoost(AdaBoostModel::fit(x, &data.y, k, rounds).0),
        AlgorithmParams::RandomForest { trees, max_features, bootstrap } => {
            ModelParams::RandomForest(ForestModel::fit(x, &data.y, k, trees, max_features, bootstrap, params.seed))
        }
    };
    Ok(TrainedModel { format_version: MODEL_FORMAT_VERSION, params: *params, labels: data.labels, dim: data.dim, model })
}

/// Predicts the label of one row.
pub fn predict(model: &TrainedModel, x: &SparseVector) -> Result<SentimentLabel, ClassifierError> {
    model.predict(x)
}

impl TrainedModel {
    pub fn algorithm(&self) -> Algorithm {
        self.params.algorithm()
    }

    pub fn predict(&self, x: &SparseVector) -> Result<SentimentLabel, ClassifierError> {
        if x.dim() != self.dim {
            return Err(ClassifierError::DimensionMismatch { expected: self.dim, got: x.dim() });
        }
        if !x.is_finite() {
            return Err(ClassifierError::NonFiniteFeature { row: 0 });
        }
        let class = match &self.model {
            ModelParams::NaiveBayes(m) => m.predict(x),
            ModelParams::Smo(m) => m.predict(x),
            ModelParams::Logistic(m) => m.predict(x),
            ModelParams::AdaBoost(m) => m.predict(x),
            ModelParams::RandomForest(m) => m.predict(x),
        };
        Ok(self.labels[class])
    }

    pub fn predict_all(&self, rows: &[SparseVector]) -> Result<Vec<SentimentLabel>, ClassifierError> {
        rows.iter().map(|r| self.predict(r)).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<TrainedModel, ClassifierError> {
        let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| ClassifierError::Format(e.to_string()))?;
        let found = raw.get("format_version").and_then(|v| v.as_u64()).ok_or_else(|| ClassifierError::Format("missing format_version".into()))?;
        if found != MODEL_FORMAT_VERSION as u64 {
            return Err(ClassifierError::VersionMismatch { found: found as u32, expected: MODEL_FORMAT_VERSION });
        }
        let model: TrainedModel = serde_json::from_value(raw).map_err(|e| ClassifierError::Format(e.to_string()))?;
        if model.params.algorithm() != model.kind() {
            return Err(ClassifierError::Format("params and model disagree on the algorithm".into()));
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_json() + "\n")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TrainedModel, ClassifierError> {
        let text = std::fs::read_to_string(path).map_err(|e| ClassifierError::Format(e.to_string()))?;
        TrainedModel::from_json(&text)
    }

    fn kind(&self) -> Algorithm {
        match self.model {
            ModelParams::NaiveBayes(_) => Algorithm::NaiveBayes,
            ModelParams::Smo(_) => Algorithm::Smo,
            ModelParams::Logistic(_) => Algorithm::Logistic,
            ModelParams::AdaBoost(_) => Algorithm::AdaBoost,
            ModelParams::RandomForest(_) => Algorithm::RandomForest,
        }
    }
}
