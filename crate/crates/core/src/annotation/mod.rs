//! Crowd annotation: task queue, worker submissions, vote consolidation and
//! export to the `.gso.jsonl` dataset format.
//!
//! Each GIF is a task that needs `required_workers` distinct annotators. A
//! worker polls for a task, composes a SentiPair sequence and gives an
//! overall judgment. Submissions are validated against the forest and
//! written to an append-only log before they are acknowledged.

mod store;

pub use store::{AnnotationStore, StoreConfig};

use crate::dataset::SentimentLabel;
use crate::ontology::{PairKey, ValidationReport};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnnotationError {
    #[error("unknown worker `{0}`")]
    UnknownWorker(String),
    #[error("unknown task `{0}`")]
    UnknownTask(String),
    #[error("invalid sequence: {0}")]
    InvalidSequence(ValidationReport),
    #[error("task `{0}` has no annotations")]
    NoAnnotations(String),
    #[error("task `{0}` already exists with a different media reference")]
    DuplicateTask(String),
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("storage: {0}")]
    Io(String),
    #[error("corrupt annotation log: {0}")]
    Corrupt(String),
}

impl AnnotationError {
    pub fn code(&self) -> &'static str {
        match self {
            AnnotationError::UnknownWorker(_) => "UnknownWorker",
            AnnotationError::UnknownTask(_) => "UnknownTask",
            AnnotationError::InvalidSequence(_) => "InvalidSequence",
            AnnotationError::NoAnnotations(_) => "NoAnnotations",
            AnnotationError::DuplicateTask(_) => "DuplicateTask",
            AnnotationError::InvalidRequest(_) => "InvalidRequest",
            AnnotationError::Io(_) => "IoError",
            AnnotationError::Corrupt(_) => "CorruptLog",
        }
    }
}

impl From<std::io::Error> for AnnotationError {
    fn from(e: std::io::Error) -> Self {
        AnnotationError::Io(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskStatus {
    Open,
    InProgress,
    Done,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationTask {
    pub gif_id: String,
    /// Opaque media reference; never fetched or decoded here.
    pub gif_uri: String,
    pub status: TaskStatus,
    pub required_workers: usize,
    /// Sorted.
    pub completed_worker_ids: Vec<String>,
}

/// What a worker sends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Submission {
    pub worker_id: String,
    pub gif_id: String,
    /// Pairs in order of occurrence in the GIF.
    pub sequence: Vec<PairKey>,
    pub judgment: SentimentLabel,
}

/// A stored submission.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerAnnotation {
    pub worker_id: String,
    pub gif_id: String,
    pub sequence: Vec<PairKey>,
    pub judgment: SentimentLabel,
    /// Milliseconds since the Unix epoch.
    pub submitted_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ack {
    pub gif_id: String,
    pub worker_id: String,
    pub status: TaskStatus,
    pub completed: usize,
    pub required_workers: usize,
    /// A previous annotation by this worker was replaced.
    pub replaced: bool,
    /// Same content as the stored annotation; nothing was written.
    pub unchanged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsolidatedLabel {
    pub gif_id: String,
    pub label: SentimentLabel,
    /// Votes for every label, zeros included.
    pub votes: BTreeMap<SentimentLabel, usize>,
    /// Sequence of the median-length annotation among the winning voters.
    pub sequence: Vec<PairKey>,
    pub sequence_worker: String,
    pub annotations: usize,
}

/// Which done tasks to export.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportFilter {
    pub include_cant_judge: bool,
}

impl Default for ExportFilter {
    fn default() -> Self {
        ExportFilter { include_cant_judge: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoreStats {
    pub tasks: usize,
    pub open: usize,
    pub in_progress: usize,
    pub done: usize,
    pub workers: usize,
    pub annotations: usize,
    /// Consolidated labels of done tasks.
    pub labels: BTreeMap<SentimentLabel, usize>,
}

/// Plurality vote over the four labels; a tie for first place is
/// `CantJudge`. The sequence comes from the winning voters' annotation of
/// median length (lower median, ties by worker id). When nobody voted for
/// the resulting label, all annotations are considered.
pub fn consolidate_votes(gif_id: &str, annotations: &[&WorkerAnnotation]) -> Result<ConsolidatedLabel, AnnotationError> {
    if annotations.is_empty() {
        return Err(AnnotationError::NoAnnotations(gif_id.to_string()));
    }
    let mut votes: BTreeMap<SentimentLabel, usize> = SentimentLabel::ALL.iter().map(|&l| (l, 0)).collect();
    for a in annotations {
        *votes.get_mut(&a.judgment).expect("all labels present") += 1;
    }
    let top = *votes.values().max().expect("four labels");
    let leaders: Vec<SentimentLabel> = votes.iter().filter(|(_, &v)| v == top).map(|(&l, _)| l).collect();
    let label = if leaders.len() == 1 { leaders[0] } else { SentimentLabel::CantJudge };

    let mut pool: Vec<&WorkerAnnotation> = annotations.iter().copied().filter(|a| a.judgment == label).collect();
    if pool.is_empty() {
        pool = annotations.to_vec();
    }
    pool.sort_by(|a, b| a.sequence.len().cmp(&b.sequence.len()).then_with(|| a.worker_id.cmp(&b.worker_id)));
    let chosen = pool[(pool.len() - 1) / 2];
    Ok(ConsolidatedLabel {
        gif_id: gif_id.to_string(),
        label,
        votes,
        sequence: chosen.sequence.clone(),
        sequence_worker: chosen.worker_id.clone(),
        annotations: annotations.len(),
    })
}

/// Source of timestamps, swappable in tests.
pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
    }
}

/// Clock that only moves when told to.
#[derive(Debug, Clone, Default)]
pub struct ManualClock(Arc<AtomicU64>);

impl ManualClock {
    pub fn new(start_ms: u64) -> Self {
        ManualClock(Arc::new(AtomicU64::new(start_ms)))
    }

    pub fn advance_ms(&self, ms: u64) {
        self.0.fetch_add(ms, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now_ms(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use SentimentLabel::*;

    fn ann(worker: &str, judgment: SentimentLabel, len: usize) -> WorkerAnnotation {
        WorkerAnnotation {
            worker_id: worker.into(),
            gif_id: "g".into(),
            sequence: (0..len).map(|i| PairKey::new(format!("m{i}"), "n")).collect(),
            judgment,
            submitted_at: 0,
        }
    }

    fn run(v: &[WorkerAnnotation]) -> ConsolidatedLabel {
        consolidate_votes("g", &v.iter().collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn majority_wins() {
        let mut v: Vec<_> = (0..4).map(|i| ann(&format!("p{i}"), Positive, i + 1)).collect();
        v.extend((0..3).map(|i| ann(&format!("n{i}"), Negative, 1)));
        let c = run(&v);
        assert_eq!(c.label, Positive);
        assert_eq!(c.votes[&Positive], 4);
        assert_eq!(c.votes[&Negative], 3);
        // Positive voters have lengths 1..=4; lower median is length 2.
        assert_eq!(c.sequence.len(), 2);
        assert_eq!(c.sequence_worker, "p1");
    }

    #[test]
    fn tie_for_first_is_cant_judge() {
        let mut v: Vec<_> = (0..3).map(|i| ann(&format!("p{i}"), Positive, 1)).collect();
        v.extend((0..3).map(|i| ann(&format!("n{i}"), Negative, 2)));
        v.push(ann("u", Neutral, 3));
        let c = run(&v);
        assert_eq!(c.label, CantJudge);
        assert_eq!(c.annotations, 7);
    }

    #[test]
    fn unanimous() {
        let v: Vec<_> = (0..7).map(|i| ann(&format!("w{i}"), Neutral, 2)).collect();
        let c = run(&v);
        assert_eq!(c.label, Neutral);
        assert_eq!(c.votes.values().copied().collect::<Vec<_>>(), vec![0, 0, 7, 0]);
        assert_eq!(consolidate_votes("g", &[]), Err(AnnotationError::NoAnnotations("g".into())));
    }
}
