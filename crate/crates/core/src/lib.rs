//! GIF sentiment analysis over a mid-level ontology of sentiment pairs.
//!
//! The crate is organised along the pipeline:
//!
//! - [`ontology`]: the Synset Forest (adjective, verb and noun trees with
//!   sentiment scores) and the SentiPairs (ANP / VNP) built from it.
//! - [`dataset`]: annotated GIF records, corpus statistics, stratified folds
//!   and a synthetic generator with a planted labelling rule.
//! - [`features`]: bag-of-pairs featurization and correlation-based feature
//!   subset selection.
//! - [`classifiers`]: naive Bayes, linear SVM trained by SMO, multinomial
//!   logistic regression, AdaBoost over stumps and a random forest.
//! - [`eval`]: metrics, cross-validation and the three-table experiment suite.
//! - [`annotation`]: the task queue, vote consolidation and dataset export
//!   behind the crowd annotation service.
//!
//! Runnable walkthroughs of each part live in `examples/`.

pub mod ontology;
pub mod dataset;
pub mod features;
pub mod classifiers;
pub mod eval;
pub mod annotation;
