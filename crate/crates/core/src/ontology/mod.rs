//! The Synset Forest and the SentiPair vocabulary built on top of it.
//!
//! A forest holds three rooted trees of word senses, one each for adjectives,
//! verbs and nouns. Every node carries a sentiment score in `[-1, 1]`. Pairs
//! are formed from an adjective or verb (the modifier) and a noun: adjective
//! pairs are ANPs ("cute dog"), verb pairs are VNPs ("falling cup"). A GIF is
//! described by the sequence of pairs in the order they occur.

mod forest;
mod lexicon;
mod pair;

pub use forest::{ForestSummary, ForestWarning, SynsetForest, TreeNode, TreeSummary};
pub use lexicon::{fixture_lexicon, parse_lexicon, read_lexicon_file, write_lexicon};
pub use pair::{
    enumerate_pairs, make_pair, pair_weight, validate_sequence, PairError, PairKey, PairKind,
    SentiPair, SentiPairSequence, ValidationEntry, ValidationReport,
};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Part of speech of a synset. Each one owns exactly one tree of the forest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pos {
    Adjective,
    Verb,
    Noun,
}

impl Pos {
    pub const ALL: [Pos; 3] = [Pos::Adjective, Pos::Verb, Pos::Noun];

    pub fn index(self) -> usize {
        match self {
            Pos::Adjective => 0,
            Pos::Verb => 1,
            Pos::Noun => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Adjective => "adjective",
            Pos::Verb => "verb",
            Pos::Noun => "noun",
        }
    }

    /// Adjectives and verbs can fill the modifier slot of a pair.
    pub fn is_modifier(self) -> bool {
        matches!(self, Pos::Adjective | Pos::Verb)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Pos {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "adjective" | "adj" | "a" => Ok(Pos::Adjective),
            "verb" | "v" => Ok(Pos::Verb),
            "noun" | "n" => Ok(Pos::Noun),
            other => Err(format!("unknown part of speech `{other}`")),
        }
    }
}

/// Opaque synset key, unique across the whole forest.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SynsetId(pub String);

impl SynsetId {
    pub fn new(id: impl Into<String>) -> Self {
        SynsetId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SynsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SynsetId {
    fn from(s: &str) -> Self {
        SynsetId(s.to_owned())
    }
}

/// One word sense. `score` is `None` when the lexicon leaves it open; such
/// gaps are filled from the nearest scored ancestor by
/// [`SynsetForest::propagate_scores`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Synset {
    pub id: SynsetId,
    pub lemma: String,
    pub sense: u32,
    pub pos: Pos,
    #[serde(default)]
    pub gloss: String,
    pub score: Option<f64>,
    pub parent: Option<SynsetId>,
}

impl Synset {
    /// `lemma#sense`, the form shown to annotators.
    pub fn display_name(&self) -> String {
        format!("{}#{}", self.lemma, self.sense)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OntologyError {
    #[error("lexicon line {line}: {message}")]
    LexiconParse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(String),
    #[error("duplicate synset id `{0}`")]
    DuplicateId(SynsetId),
    #[error("synset `{id}` has an empty lemma")]
    EmptyLemma { id: SynsetId },
    #[error("synset `{id}` has sense 0; senses start at 1")]
    InvalidSense { id: SynsetId },
    #[error("synset `{id}` score {score} outside [-1, 1]")]
    ScoreOutOfRange { id: SynsetId, score: f64 },
    #[error("{pos} tree has two synsets for {lemma}#{sense}: `{first}` and `{second}`")]
    DiscrepancyViolation {
        pos: Pos,
        lemma: String,
        sense: u32,
        first: SynsetId,
        second: SynsetId,
    },
    #[error("synset `{id}` names unknown parent `{parent}`")]
    DanglingParent { id: SynsetId, parent: SynsetId },
    #[error("synset `{id}` has parent `{parent}` of a different part of speech")]
    CrossPosParent { id: SynsetId, parent: SynsetId },
    #[error("{pos} tree has {} roots: {roots:?}", roots.len())]
    MultipleRoots { pos: Pos, roots: Vec<SynsetId> },
    #[error("{0} tree has no root")]
    MissingRoot(Pos),
    #[error("synset `{id}` is not reachable from its root (parent cycle)")]
    Cycle { id: SynsetId },
    #[error("root `{0}` has no score; roots must be scored")]
    UnscoredRoot(SynsetId),
    #[error(transparent)]
    Pair(#[from] PairError),
}

impl OntologyError {
    /// Machine-readable code, used by the service and the `--json` CLI output.
    pub fn code(&self) -> &'static str {
        match self {
            OntologyError::LexiconParse { .. } => "LexiconParse",
            OntologyError::Io(_) => "Io",
            OntologyError::DuplicateId(_) => "DuplicateId",
            OntologyError::EmptyLemma { .. } => "EmptyLemma",
            OntologyError::InvalidSense { .. } => "InvalidSense",
            OntologyError::ScoreOutOfRange { .. } => "ScoreOutOfRange",
            OntologyError::DiscrepancyViolation { .. } => "DiscrepancyViolation",
            OntologyError::DanglingParent { .. } => "DanglingParent",
            OntologyError::CrossPosParent { .. } => "CrossPosParent",
            OntologyError::MultipleRoots { .. } => "MultipleRoots",
            OntologyError::MissingRoot(_) => "MissingRoot",
            OntologyError::Cycle { .. } => "Cycle",
            OntologyError::UnscoredRoot(_) => "UnscoredRoot",
            OntologyError::Pair(e) => e.code(),
        }
    }
}

/// Builds a forest from lexicon records. See [`SynsetForest::build`].
pub fn build_forest(records: Vec<Synset>) -> Result<SynsetForest, OntologyError> {
    SynsetForest::build(records)
}

/// Prefix search over lemmas. See [`SynsetForest::search`].
pub fn search_synsets<'a>(forest: &'a SynsetForest, query: &str, pos: Option<Pos>) -> Vec<&'a Synset> {
    forest.search(query, pos)
}
