use super::{metrics, ConfusionMatrix, EvalError, Metrics};
use crate::classifiers::{train, Algorithm, TrainParams, TrainedModel};
use crate::dataset::{stratified_kfold, Dataset, SentimentLabel};
use crate::features::{binarize_columns, build_vocabulary, cfs_select, CfsConfig, FeatureMode, FeatureOptions, FeatureSpace, SparseVector};
use crate::ontology::{PairKind, SentiPairSequence};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Which pairs of each sequence the classifier gets to see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Representation {
    #[serde(rename = "ANP")]
    AnpOnly,
    #[serde(rename = "VNP")]
    VnpOnly,
    SentiPair,
}

impl Representation {
    pub const ALL: [Representation; 3] = [Representation::AnpOnly, Representation::VnpOnly, Representation::SentiPair];

    pub fn apply(self, seq: &SentiPairSequence) -> SentiPairSequence {
        match self {
            Representation::AnpOnly => seq.filtered(PairKind::Anp),
            Representation::VnpOnly => seq.filtered(PairKind::Vnp),
            Representation::SentiPair => seq.clone(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Representation::AnpOnly => "ANP only",
            Representation::VnpOnly => "VNP only",
            Representation::SentiPair => "SentiPair",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Representation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_', ' '], "").as_str() {
            "anp" | "anponly" => Ok(Representation::AnpOnly),
            "vnp" | "vnponly" => Ok(Representation::VnpOnly),
            "sentipair" | "all" => Ok(Representation::SentiPair),
            _ => Err(format!("unknown representation `{s}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub mode: FeatureMode,
    pub min_freq: usize,
    /// Run CFS on each training fold and keep only the selected pairs.
    pub selection: bool,
    pub representation: Representation,
    pub pair_bigrams: bool,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            mode: FeatureMode::Binary,
            min_freq: 1,
            selection: false,
            representation: Representation::SentiPair,
            pair_bigrams: false,
        }
    }
}

impl FeatureConfig {
    pub fn options(&self) -> FeatureOptions {
        FeatureOptions { mode: self.mode, min_freq: self.min_freq, pair_bigrams: self.pair_bigrams }
    }
}

/// Feature space and model fitted on one training set.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedFold {
    pub space: FeatureSpace,
    pub model: TrainedModel,
    /// Vocabulary size before selection.
    pub vocabulary: usize,
}

impl FittedFold {
    pub fn predict(&self, seq: &SentiPairSequence, representation: Representation) -> Result<SentimentLabel, EvalError> {
        Ok(self.model.predict(&self.space.featurize(&representation.apply(seq)))?)
    }
}

/// Builds the vocabulary, optionally runs CFS, and trains, all from the
/// instances at `train_idx` alone.
pub fn fit_fold(ds: &Dataset, train_idx: &[usize], features: &FeatureConfig, params: &TrainParams) -> Result<FittedFold, EvalError> {
    let seqs: Vec<SentiPairSequence> = train_idx.iter().map(|&i| features.representation.apply(&ds.instances[i].sequence)).collect();
    let labels: Vec<SentimentLabel> = train_idx.iter().map(|&i| ds.instances[i].label).collect();
    if let Some(l) = labels.iter().find(|l| !l.is_trainable()) {
        return Err(EvalError::Invalid(format!("training set contains {l}")));
    }
    let mut space = build_vocabulary(&seqs, features.options())?;
    let vocabulary = space.vocab_len();
    if features.selection {
        let rows: Vec<SparseVector> = seqs.iter().map(|s| space.featurize(s)).collect();
        let columns = binarize_columns(&rows, space.dim());
        let y: Vec<u32> = labels.iter().map(|l| l.class_index().expect("trainable") as u32).collect();
        let picked = cfs_select(&columns, &y, CfsConfig::default())?;
        // An empty pick means no pair correlates with the label; keep them all.
        if !picked.selected.is_empty() {
            space = space.select_indices(&picked.selected)?;
        }
    }
    let x: Vec<SparseVector> = seqs.iter().map(|s| space.featurize(s)).collect();
    let model = train(&x, &labels, params)?;
    Ok(FittedFold { space, model, vocabulary })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub train_size: usize,
    pub test_size: usize,
    pub vocabulary: usize,
    /// Dimensions the model was trained on (after selection).
    pub features: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub algorithm: Algorithm,
    pub params: TrainParams,
    pub features: FeatureConfig,
    pub k: usize,
    pub seed: u64,
    /// Pooled over all test folds.
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    pub folds: Vec<FoldReport>,
}

impl EvalReport {
    pub fn render(&self) -> String {
        let m = &self.metrics;
        let mut out = format!(
            "{} | {} | selection {} | {}-fold, seed {}\n",
            self.algorithm,
            self.features.representation,
            if self.features.selection { "on" } else { "off" },
            self.k,
            self.seed
        );
        out.push_str(&format!("{:<10} {:>7} {:>7} {:>7} {:>7}\n", "class", "prec", "recall", "f1", "support"));
        for c in &m.per_class {
            out.push_str(&format!(
                "{:<10} {:>6.1}% {:>6.1}% {:>6.1}% {:>7}\n",
                c.label.as_str(),
                c.precision * 100.0,
                c.recall * 100.0,
                c.f1 * 100.0,
                c.support
            ));
        }
        out.push_str(&format!(
            "{:<10} {:>6.1}% {:>6.1}% {:>6.1}% {:>7}\n",
            "weighted",
            m.precision * 100.0,
            m.recall * 100.0,
            m.f1 * 100.0,
            m.total
        ));
        out.push_str(&format!("accuracy {:.1}%\n", m.accuracy * 100.0));
        out.push_str(&self.confusion.render());
        out
    }
}

/// Stratified k-fold evaluation with a pooled confusion matrix. Everything
/// learned from data (vocabulary, selection, model) is refit per fold on the
/// training part only.
pub fn cross_validate(ds: &Dataset, features: &FeatureConfig, params: &TrainParams, k: usize, seed: u64) -> Result<EvalReport, EvalError> {
    let folds = stratified_kfold(ds, k, seed)?;
    let mut confusion = ConfusionMatrix::default();
    let mut reports = Vec::with_capacity(k);
    for fold in &folds {
        let fitted = fit_fold(ds, &fold.train, features, params)?;
        let mut cm = ConfusionMatrix::default();
        for &i in &fold.test {
            let inst = &ds.instances[i];
            cm.add(inst.label, fitted.predict(&inst.sequence, features.representation)?)?;
        }
        reports.push(FoldReport {
            train_size: fold.train.len(),
            test_size: fold.test.len(),
            vocabulary: fitted.vocabulary,
            features: fitted.space.dim(),
            accuracy: cm.trace() as f64 / cm.total().max(1) as f64,
        });
        confusion.merge(&cm);
    }
    Ok(EvalReport {
        algorithm: params.algorithm(),
        params: *params,
        features: *features,
        k,
        seed,
        metrics: metrics(&confusion)?,
        confusion,
        folds: reports,
    })
}
