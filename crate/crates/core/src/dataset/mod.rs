//! Annotated GIF datasets in the `.gso.jsonl` record format.
//!
//! One record per line:
//!
//! ```text
//! {"gif_id":"g1","pairs":[{"modifier":"cute.a.01","noun":"dog.n.01"}],"label":"positive","duration_s":3.2,"noise_flags":["mixed_content"]}
//! ```
//!
//! The order of `pairs` is the order of occurrence in the GIF. `duration_s`
//! and `noise_flags` are optional.

mod split;
mod stats;
mod synthetic;

pub use split::{stratified_kfold, Fold};
pub use stats::{compute_stats, DatasetStats, DurationStats, NoiseStat};
pub use synthetic::{generate_synthetic, PlantedSignal, Synthetic, SyntheticConfig, NEUTRAL_BAND};

use crate::ontology::{validate_sequence, PairKey, SentiPairSequence, SynsetForest, ValidationReport};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentimentLabel {
    Positive,
    Negative,
    Neutral,
    CantJudge,
}

impl SentimentLabel {
    /// The three trainable classes, in confusion-matrix order.
    pub const CLASSES: [SentimentLabel; 3] = [SentimentLabel::Positive, SentimentLabel::Negative, SentimentLabel::Neutral];
    pub const ALL: [SentimentLabel; 4] =
        [SentimentLabel::Positive, SentimentLabel::Negative, SentimentLabel::Neutral, SentimentLabel::CantJudge];

    pub fn as_str(self) -> &'static str {
        match self {
            SentimentLabel::Positive => "positive",
            SentimentLabel::Negative => "negative",
            SentimentLabel::Neutral => "neutral",
            SentimentLabel::CantJudge => "cant_judge",
        }
    }

    /// Position in [`SentimentLabel::CLASSES`]; `None` for `CantJudge`.
    pub fn class_index(self) -> Option<usize> {
        match self {
            SentimentLabel::Positive => Some(0),
            SentimentLabel::Negative => Some(1),
            SentimentLabel::Neutral => Some(2),
            SentimentLabel::CantJudge => None,
        }
    }

    pub fn is_trainable(self) -> bool {
        self != SentimentLabel::CantJudge
    }
}

impl fmt::Display for SentimentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SentimentLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '\'', ' '], "_").as_str() {
            "positive" => Ok(SentimentLabel::Positive),
            "negative" => Ok(SentimentLabel::Negative),
            "neutral" => Ok(SentimentLabel::Neutral),
            "cant_judge" | "cantjudge" | "can_t_judge" => Ok(SentimentLabel::CantJudge),
            other => Err(format!("unknown sentiment label `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseFlag {
    MixedContent,
    ExplanativeText,
    MotionBlur,
    IlluminationChange,
}

impl NoiseFlag {
    pub const ALL: [NoiseFlag; 4] =
        [NoiseFlag::MixedContent, NoiseFlag::ExplanativeText, NoiseFlag::MotionBlur, NoiseFlag::IlluminationChange];

    pub fn as_str(self) -> &'static str {
        match self {
            NoiseFlag::MixedContent => "mixed_content",
            NoiseFlag::ExplanativeText => "explanative_text",
            NoiseFlag::MotionBlur => "motion_blur",
            NoiseFlag::IlluminationChange => "illumination_change",
        }
    }
}

/// On-disk form of one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceRecord {
    pub gif_id: String,
    pub pairs: Vec<PairKey>,
    pub label: SentimentLabel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_flags: Option<Vec<NoiseFlag>>,
}

/// One GIF with its resolved pair sequence and overall label.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedInstance {
    pub gif_id: String,
    pub sequence: SentiPairSequence,
    pub label: SentimentLabel,
    pub duration_s: Option<f64>,
    pub noise_flags: Option<Vec<NoiseFlag>>,
}

impl AnnotatedInstance {
    pub fn to_record(&self) -> InstanceRecord {
        InstanceRecord {
            gif_id: self.gif_id.clone(),
            pairs: self.sequence.keys(),
            label: self.label,
            duration_s: self.duration_s,
            noise_flags: self.noise_flags.clone(),
        }
    }

    pub fn has_flag(&self, flag: NoiseFlag) -> bool {
        self.noise_flags.as_ref().is_some_and(|f| f.contains(&flag))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    pub instances: Vec<AnnotatedInstance>,
    /// Pairs dropped by a lenient load because they did not resolve.
    pub dropped_pairs: usize,
}

impl Dataset {
    pub fn new(instances: Vec<AnnotatedInstance>) -> Self {
        Dataset { instances, dropped_pairs: 0 }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn labels(&self) -> Vec<SentimentLabel> {
        self.instances.iter().map(|i| i.label).collect()
    }

    /// Indices of instances that can enter a training or evaluation matrix.
    pub fn trainable_indices(&self) -> Vec<usize> {
        (0..self.instances.len()).filter(|&i| self.instances[i].label.is_trainable()).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset { instances: indices.iter().map(|&i| self.instances[i].clone()).collect(), dropped_pairs: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// Every pair id must resolve.
    #[default]
    Strict,
    /// Unresolved pairs are dropped and counted.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DatasetError {
    #[error("dataset line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("io error: {0}")]
    Io(String),
    #[error("dataset line {line} (gif `{gif_id}`): {report}")]
    UnresolvedPair { line: usize, gif_id: String, report: ValidationReport },
    #[error("class {label} has {count} instances, fewer than k = {k}")]
    ClassTooSmall { label: SentimentLabel, count: usize, k: usize },
    #[error("invalid fold count {0}; need k >= 2")]
    InvalidFolds(usize),
    #[error("invalid class ratios: {0}")]
    InvalidRatio(String),
    #[error("invalid synthetic configuration: {0}")]
    InvalidConfig(String),
    #[error("could not sample a {0} sequence from the planted signal")]
    GenerationStalled(SentimentLabel),
}

impl DatasetError {
    pub fn code(&self) -> &'static str {
        match self {
            DatasetError::Parse { .. } => "ParseError",
            DatasetError::Io(_) => "Io",
            DatasetError::UnresolvedPair { .. } => "UnresolvedPair",
            DatasetError::ClassTooSmall { .. } => "ClassTooSmall",
            DatasetError::InvalidFolds(_) => "InvalidFolds",
            DatasetError::InvalidRatio(_) => "InvalidRatio",
            DatasetError::InvalidConfig(_) => "InvalidConfig",
            DatasetError::GenerationStalled(_) => "GenerationStalled",
        }
    }
}

/// Reads records and resolves their pairs against `forest`.
pub fn read_dataset<R: BufRead>(reader: R, forest: &SynsetForest, mode: LoadMode) -> Result<Dataset, DatasetError> {
    let mut ds = Dataset::default();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| DatasetError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: InstanceRecord = serde_json::from_str(&line)
            .map_err(|e| DatasetError::Parse { line: line_no, message: e.to_string() })?;
        ds.instances.push(resolve_record(rec, forest, mode, line_no, &mut ds.dropped_pairs)?);
    }
    Ok(ds)
}

fn resolve_record(
    rec: InstanceRecord,
    forest: &SynsetForest,
    mode: LoadMode,
    line: usize,
    dropped: &mut usize,
) -> Result<AnnotatedInstance, DatasetError> {
    let sequence = match validate_sequence(&rec.pairs, forest) {
        Ok(seq) => seq,
        Err(report) => match mode {
            LoadMode::Strict => return Err(DatasetError::UnresolvedPair { line, gif_id: rec.gif_id, report }),
            LoadMode::Lenient => {
                *dropped += report.entries.len();
                let bad: Vec<usize> = report.entries.iter().map(|e| e.position).collect();
                let kept: Vec<PairKey> = rec
                    .pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !bad.contains(i))
                    .map(|(_, k)| k.clone())
                    .collect();
                validate_sequence(&kept, forest).expect("remaining pairs resolved")
            }
        },
    };
    let noise_flags = rec.noise_flags.map(|mut f| {
        f.sort_unstable();
        f.dedup();
        f
    });
    Ok(AnnotatedInstance { gif_id: rec.gif_id, sequence, label: rec.label, duration_s: rec.duration_s, noise_flags })
}

pub fn load_dataset(path: impl AsRef<Path>, forest: &SynsetForest, mode: LoadMode) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| DatasetError::Io(format!("{}: {e}", path.display())))?;
    read_dataset(std::io::BufReader::new(file), forest, mode)
}

pub fn write_dataset<W: Write>(ds: &Dataset, mut w: W) -> std::io::Result<()> {
    for inst in &ds.instances {
        serde_json::to_writer(&mut w, &inst.to_record())?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn save_dataset(ds: &Dataset, path: impl AsRef<Path>) -> std::io::Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_dataset(ds, &mut w)?;
    w.flush()
}
