//! Bag-of-pairs features and correlation-based feature subset selection.

mod cfs;
mod space;
mod sparse;

pub use cfs::{binarize_columns, cfs_merit, cfs_select, symmetric_uncertainty, CfsConfig, CfsResult};
pub use space::{build_vocabulary, featurize, FeatureKey, FeatureMode, FeatureOptions, FeatureSpace, VocabEntry};
pub use sparse::SparseVector;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("no pair reaches the minimum frequency; vocabulary is empty")]
    EmptyVocabulary,
    #[error("columns differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("columns are empty")]
    EmptyColumn,
    #[error("degenerate selection input: {0}")]
    DegenerateInput(String),
    #[error("selection mask has length {got}, vocabulary has {expected}")]
    InvalidMask { expected: usize, got: usize },
    #[error("invalid sparse vector: {0}")]
    InvalidVector(String),
    #[error("feature space file: {0}")]
    Format(String),
}

impl FeatureError {
    pub fn code(&self) -> &'static str {
        match self {
            FeatureError::EmptyVocabulary => "EmptyVocabulary",
            FeatureError::LengthMismatch { .. } => "LengthMismatch",
            FeatureError::EmptyColumn => "EmptyColumn",
            FeatureError::DegenerateInput(_) => "DegenerateInput",
            FeatureError::InvalidMask { .. } => "InvalidMask",
            FeatureError::InvalidVector(_) => "InvalidVector",
            FeatureError::Format(_) => "FormatError",
        }
    }
}
