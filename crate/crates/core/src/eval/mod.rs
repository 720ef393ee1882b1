//! Metrics, cross-validation and the experiment suite.

mod cv;
mod suite;

pub use cv::{cross_validate, fit_fold, EvalReport, FeatureConfig, FittedFold, FoldReport, Representation};
pub use suite::{run_suite, SuiteCell, SuiteConfig, SuiteReport};

use crate::classifiers::ClassifierError;
use crate::dataset::{DatasetError, SentimentLabel};
use crate::features::FeatureError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("confusion matrix is empty")]
    EmptyMatrix,
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

impl EvalError {
    pub fn code(&self) -> &'static str {
        match self {
            EvalError::EmptyMatrix => "EmptyMatrix",
            EvalError::Invalid(_) => "InvalidConfig",
            EvalError::Dataset(e) => e.code(),
            EvalError::Feature(e) => e.code(),
            EvalError::Classifier(e) => e.code(),
        }
    }
}

/// Counts indexed by (true class, predicted class) in
/// [`SentimentLabel::CLASSES`] order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; 3]; 3],
}

impl ConfusionMatrix {
    pub fn new(counts: [[u64; 3]; 3]) -> Self {
        ConfusionMatrix { counts }
    }

    /// Records one prediction. `CantJudge` on either side is an error.
    pub fn add(&mut self, truth: SentimentLabel, predicted: SentimentLabel) -> Result<(), EvalError> {
        match (truth.class_index(), predicted.class_index()) {
            (Some(t), Some(p)) => {
                self.counts[t][p] += 1;
                Ok(())
            }
            _ => Err(EvalError::Invalid(format!("cannot score {truth} -> {predicted}"))),
        }
    }

    pub fn from_pairs(truth: &[SentimentLabel], predicted: &[SentimentLabel]) -> Result<Self, EvalError> {
        if truth.len() != predicted.len() {
            return Err(EvalError::Invalid(format!("{} truths, {} predictions", truth.len(), predicted.len())));
        }
        let mut cm = ConfusionMatrix::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            cm.add(t, p)?;
        }
        Ok(cm)
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        for t in 0..3 {
            for p in 0..3 {
                self.counts[t][p] += other.counts[t][p];
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..3).map(|i| self.counts[i][i]).sum()
    }

    pub fn support(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn predicted(&self, class: usize) -> u64 {
        (0..3).map(|t| self.counts[t][class]).sum()
    }

    pub fn render(&self) -> String {
        let mut out = format!("{:<10}", "true\\pred");
        for l in SentimentLabel::CLASSES {
            out.push_str(&format!("{:>10}", l.as_str()));
        }
        out.push('\n');
        for (t, l) in SentimentLabel::CLASSES.iter().enumerate() {
            out.push_str(&format!("{:<10}", l.as_str()));
            for p in 0..3 {
                out.push_str(&format!("{:>10}", self.counts[t][p]));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: SentimentLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

/// Per-class and support-weighted scores. Empty denominators score 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub per_class: Vec<ClassMetrics>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub accuracy: f64,
    pub total: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics, EvalError> {
    let total = cm.total();
    if total == 0 {
        return Err(EvalError::EmptyMatrix);
    }
    let per_class: Vec<ClassMetrics> = (0..3)
        .map(|c| {
            let tp = cm.counts[c][c];
            let precision = ratio(tp, cm.predicted(c));
            let recall = ratio(tp, cm.support(c));
            let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
            ClassMetrics { label: SentimentLabel::CLASSES[c], precision, recall, f1, support: cm.support(c) }
        })
        .collect();
    let weighted = |get: fn(&ClassMetrics) -> f64| per_class.iter().map(|m| get(m) * m.support as f64).sum::<f64>() / total as f64;
    Ok(Metrics {
        precision: weighted(|m| m.precision),
        recall: weighted(|m| m.recall),
        f1: weighted(|m| m.f1),
        accuracy: ratio(cm.trace(), total),
        per_class,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use SentimentLabel::*;

    #[test]
    fn perfect_classifier() {
        let m = metrics(&ConfusionMatrix::new([[4, 0, 0], [0, 2, 0], [0, 0, 9]])).unwrap();
        assert_eq!((m.precision, m.recall, m.f1, m.accuracy), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn hand_computed_example() {
        let m = metrics(&ConfusionMatrix::new([[5, 0, 0], [0, 0, 2], [0, 0, 3]])).unwrap();
        assert_eq!(m.per_class[1].precision, 0.0);
        assert_eq!(m.per_class[2].precision, 3.0 / 5.0);
        assert_eq!(m.accuracy, 8.0 / 10.0);
        // recall: 1, 0, 1 with supports 5, 2, 3.
        assert_eq!(m.recall, 0.8);
        assert_eq!(metrics(&ConfusionMatrix::default()), Err(EvalError::EmptyMatrix));
    }

    #[test]
    fn cant_judge_is_not_scored() {
        let mut cm = ConfusionMatrix::default();
        assert!(cm.add(CantJudge, Positive).is_err());
        cm.add(Negative, Neutral).unwrap();
        assert_eq!(cm.counts[1][2], 1);
        assert!(cm.render().contains("negative"));
    }
}
