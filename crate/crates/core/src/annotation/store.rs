use super::{
    consolidate_votes, Ack, AnnotationError, AnnotationTask, Clock, ConsolidatedLabel, ExportFilter, StoreStats, Submission, SystemClock,
    TaskStatus, WorkerAnnotation,
};
use crate::dataset::{InstanceRecord, SentimentLabel};
use crate::ontology::{validate_sequence, SynsetForest};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard};

const LOG_FILE: &str = "annotations.log.jsonl";
const SNAPSHOT_FILE: &str = "snapshot.json";
const SNAPSHOT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StoreConfig {
    pub required_workers: usize,
    pub lease_ms: u64,
    /// Write a snapshot after this many logged events; 0 disables snapshots.
    pub snapshot_every: usize,
}

impl Default for StoreConfig {
    fn default() -> Self {
        StoreConfig { required_workers: 7, lease_ms: 10 * 60 * 1000, snapshot_every: 256 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct TaskRecord {
    gif_uri: String,
    required_workers: usize,
    annotations: BTreeMap<String, WorkerAnnotation>,
    /// Worker id to lease expiry; not persisted.
    #[serde(skip)]
    leases: BTreeMap<String, u64>,
}

impl TaskRecord {
    fn done(&self) -> bool {
        self.annotations.len() >= self.required_workers
    }

    fn active_leases(&self, now: u64) -> impl Iterator<Item = &String> {
        self.leases.iter().filter(move |(_, &exp)| exp > now).map(|(w, _)| w)
    }

    fn status(&self, now: u64) -> TaskStatus {
        if self.done() {
            TaskStatus::Done
        } else if self.active_leases(now).next().is_some() {
            TaskStatus::InProgress
        } else {
            TaskStatus::Open
        }
    }

    fn view(&self, gif_id: &str, now: u64) -> AnnotationTask {
        AnnotationTask {
            gif_id: gif_id.to_string(),
            gif_uri: self.gif_uri.clone(),
            status: self.status(now),
            required_workers: self.required_workers,
            completed_worker_ids: self.annotations.keys().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct State {
    workers: BTreeSet<String>,
    tasks: BTreeMap<String, TaskRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
enum Event {
    Worker { worker_id: String },
    Task { gif_id: String, gif_uri: String, required_workers: usize },
    Annotation(WorkerAnnotation),
}

impl State {
    fn apply(&mut self, event: Event) -> Result<(), AnnotationError> {
        match event {
            Event::Worker { worker_id } => {
                self.workers.insert(worker_id);
            }
            Event::Task { gif_id, gif_uri, required_workers } => {
                self.tasks.entry(gif_id).or_insert(TaskRecord { gif_uri, required_workers, ..Default::default() });
            }
            Event::Annotation(a) => {
                let task = self.tasks.get_mut(&a.gif_id).ok_or_else(|| AnnotationError::Corrupt(format!("annotation for unknown task {}", a.gif_id)))?;
                task.leases.remove(&a.worker_id);
                task.annotations.insert(a.worker_id.clone(), a);
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct Snapshot {
    format_version: u32,
    /// Number of log lines already folded into `state`.
    log_lines: u64,
    state: State,
}

#[derive(Debug)]
struct Journal {
    dir: PathBuf,
    log: File,
    lines: u64,
    since_snapshot: usize,
}

impl Journal {
    /// Appends and syncs one event. Returns only once it is on disk.
    fn append(&mut self, event: &Event) -> Result<(), AnnotationError> {
        let mut line = serde_json::to_vec(event).map_err(|e| AnnotationError::Io(e.to_string()))?;
        line.push(b'\n');
        self.log.write_all(&line)?;
        self.log.sync_data()?;
        self.lines += 1;
        self.since_snapshot += 1;
        Ok(())
    }

    fn snapshot(&mut self, state: &State) -> Result<(), AnnotationError> {
        let snap = Snapshot { format_version: SNAPSHOT_VERSION, log_lines: self.lines, state: state.clone() };
        let tmp = self.dir.join(format!("{SNAPSHOT_FILE}.tmp"));
        {
            let mut f = File::create(&tmp)?;
            serde_json::to_writer(&mut f, &snap).map_err(|e| AnnotationError::Io(e.to_string()))?;
            f.sync_all()?;
        }
        std::fs::rename(&tmp, self.dir.join(SNAPSHOT_FILE))?;
        if let Ok(d) = File::open(&self.dir) {
            let _ = d.sync_all();
        }
        self.since_snapshot = 0;
        Ok(())
    }
}

struct Inner {
    state: State,
    journal: Option<Journal>,
}

/// Thread-safe annotation store. With a data directory every state change
/// is appended to a log and synced before the call returns.
pub struct AnnotationStore {
    forest: Arc<SynsetForest>,
    config: StoreConfig,
    clock: Arc<dyn Clock>,
    inner: Mutex<Inner>,
}

impl std::fmt::Debug for AnnotationStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AnnotationStore").field("config", &self.config).finish_non_exhaustive()
    }
}

impl AnnotationStore {
    pub fn in_memory(forest: Arc<SynsetForest>, config: StoreConfig) -> Self {
        Self::with_clock(forest, config, Arc::new(SystemClock))
    }

    pub fn with_clock(forest: Arc<SynsetForest>, config: StoreConfig, clock: Arc<dyn Clock>) -> Self {
        AnnotationStore { forest, config, clock, inner: Mutex::new(Inner { state: State::default(), journal: None }) }
    }

    /// Opens (or creates) a persistent store in `dir`, replaying the
    /// snapshot and the log written after it. A torn final log line, left by
    /// a crash mid-append, is dropped; it was never acknowledged.
    pub fn open(dir: impl AsRef<Path>, forest: Arc<SynsetForest>, config: StoreConfig, clock: Arc<dyn Clock>) -> Result<Self, AnnotationError> {
        let dir = dir.as_ref().to_path_buf();
        std::fs::create_dir_all(&dir)?;
        let (mut state, covered) = match std::fs::read(dir.join(SNAPSHOT_FILE)) {
            Ok(bytes) => {
                let snap: Snapshot = serde_json::from_slice(&bytes).map_err(|e| AnnotationError::Corrupt(format!("snapshot: {e}")))?;
                if snap.format_version != SNAPSHOT_VERSION {
                    return Err(AnnotationError::Corrupt(format!("snapshot version {}", snap.format_version)));
                }
                (snap.state, snap.log_lines)
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => (State::default(), 0),
            Err(e) => return Err(e.into()),
        };

        let path = dir.join(LOG_FILE);
        let mut log = OpenOptions::new().read(true).append(true).create(true).open(&path)?;
        let mut reader = BufReader::new(&mut log);
        let (mut lines, mut good_end) = (0u64, 0u64);
        let mut buf = String::new();
        loop {
            buf.clear();
            let n = reader.read_line(&mut buf)?;
            if n == 0 {
                break;
            }
            let complete = buf.ends_with('\n');
            let parsed: Result<Event, _> = serde_json::from_str(buf.trim_end());
            match parsed {
                Ok(event) if complete => {
                    if lines >= covered {
                        state.apply(event)?;
                    }
                    lines += 1;
                    good_end += n as u64;
                }
                _ if !complete => {
                    log::warn!("dropping torn final line of {}", path.display());
                    break;
                }
                Ok(_) => unreachable!(),
                Err(e) => return Err(AnnotationError::Corrupt(format!("{} line {}: {e}", path.display(), lines + 1))),
            }
        }
        drop(reader);
        if lines < covered {
            return Err(AnnotationError::Corrupt(format!("snapshot covers {covered} log lines but the log has {lines}")));
        }
        if log.metadata()?.len() != good_end {
            log.set_len(good_end)?;
            log.sync_all()?;
        }
        log.seek(SeekFrom::End(0))?;

        let journal = Journal { dir, log, lines, since_snapshot: (lines - covered) as usize };
        Ok(AnnotationStore { forest, config, clock, inner: Mutex::new(Inner { state, journal: Some(journal) }) })
    }

    pub fn forest(&self) -> &SynsetForest {
        &self.forest
    }

    pub fn config(&self) -> StoreConfig {
        self.config
    }

    fn lock(&self) -> MutexGuard<'_, Inner> {
        // A panic while holding the lock cannot leave a half-applied event:
        // state changes happen after the log write, in one `apply`.
        self.inner.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn commit(&self, inner: &mut Inner, event: Event) -> Result<(), AnnotationError> {
        if let Some(j) = inner.journal.as_mut() {
            j.append(&event)?;
        }
        inner.state.apply(event)?;
        if let Some(j) = inner.journal.as_mut() {
            if self.config.snapshot_every > 0 && j.since_snapshot >= self.config.snapshot_every {
                j.snapshot(&inner.state)?;
            }
        }
        Ok(())
    }

    /// Writes a snapshot now (no-op for in-memory stores).
    pub fn checkpoint(&self) -> Result<(), AnnotationError> {
        let mut guard = self.lock();
        let inner = &mut *guard;
        match inner.journal.as_mut() {
            Some(j) => j.snapshot(&inner.state),
            None => Ok(()),
        }
    }

    pub fn register_worker(&self, worker_id: &str) -> Result<(), AnnotationError> {
        let id = worker_id.trim();
        if id.is_empty() {
            return Err(AnnotationError::InvalidRequest("worker id is empty".into()));
        }
        let mut inner = self.lock();
        if inner.state.workers.contains(id) {
            return Ok(());
        }
        self.commit(&mut inner, Event::Worker { worker_id: id.to_string() })
    }

    pub fn workers(&self) -> Vec<String> {
        self.lock().state.workers.iter().cloned().collect()
    }

    /// Adds a GIF to annotate. Re-adding the same id and uri is a no-op.
    pub fn add_task(&self, gif_id: &str, gif_uri: &str, required_workers: Option<usize>) -> Result<AnnotationTask, AnnotationError> {
        if gif_id.trim().is_empty() {
            return Err(AnnotationError::InvalidRequest("gif id is empty".into()));
        }
        let required = required_workers.unwrap_or(self.config.required_workers);
        if required == 0 {
            return Err(AnnotationError::InvalidRequest("required_workers must be at least 1".into()));
        }
        let now = self.clock.now_ms();
        let mut inner = self.lock();
        if let Some(t) = inner.state.tasks.get(gif_id) {
            return if t.gif_uri == gif_uri { Ok(t.view(gif_id, now)) } else { Err(AnnotationError::DuplicateTask(gif_id.to_string())) };
        }
        self.commit(&mut inner, Event::Task { gif_id: gif_id.to_string(), gif_uri: gif_uri.to_string(), required_workers: required })?;
        Ok(inner.state.tasks[gif_id].view(gif_id, now))
    }

    pub fn task(&self, gif_id: &str) -> Result<AnnotationTask, AnnotationError> {
        let now = self.clock.now_ms();
        let inner = self.lock();
        inner.state.tasks.get(gif_id).map(|t| t.view(gif_id, now)).ok_or_else(|| AnnotationError::UnknownTask(gif_id.to_string()))
    }

    pub fn tasks(&self) -> Vec<AnnotationTask> {
        let now = self.clock.now_ms();
        self.lock().state.tasks.iter().map(|(id, t)| t.view(id, now)).collect()
    }

    /// Hands `worker_id` a task and leases it to them. Tasks with the fewest
    /// completed annotations come first, then fewest live leases, then gif
    /// id. A task stays available to several workers while completions plus
    /// other workers' live leases are below its requirement. A worker who
    /// already holds a live lease gets the same task back. `None` when
    /// nothing is left for this worker.
    pub fn next_task(&self, worker_id: &str) -> Result<Option<AnnotationTask>, AnnotationError> {
        let now = self.clock.now_ms();
        let mut inner = self.lock();
        if !inner.state.workers.contains(worker_id) {
            return Err(AnnotationError::UnknownWorker(worker_id.to_string()));
        }
        let tasks = &mut inner.state.tasks;
        for t in tasks.values_mut() {
            t.leases.retain(|_, &mut exp| exp > now);
        }
        if let Some((id, t)) = tasks.iter().find(|(_, t)| !t.done() && t.leases.contains_key(worker_id) && !t.annotations.contains_key(worker_id)) {
            return Ok(Some(t.view(id, now)));
        }
        let pick = tasks
            .iter()
            .filter(|(_, t)| {
                let others = t.active_leases(now).filter(|w| w.as_str() != worker_id).count();
                !t.done() && !t.annotations.contains_key(worker_id) && t.annotations.len() + others < t.required_workers
            })
            .min_by_key(|(id, t)| (t.annotations.len(), t.active_leases(now).count(), id.as_str()))
            .map(|(id, _)| id.clone());
        Ok(pick.map(|id| {
            let t = tasks.get_mut(&id).expect("picked from map");
            t.leases.insert(worker_id.to_string(), now + self.config.lease_ms);
            t.view(&id, now)
        }))
    }

    /// Validates and durably stores a submission. A worker's later
    /// submission for the same GIF replaces the earlier one; an identical
    /// resubmission writes nothing.
    pub fn submit(&self, sub: &Submission) -> Result<Ack, AnnotationError> {
        let now = self.clock.now_ms();
        let mut inner = self.lock();
        if !inner.state.workers.contains(&sub.worker_id) {
            return Err(AnnotationError::UnknownWorker(sub.worker_id.clone()));
        }
        let task = inner.state.tasks.get(&sub.gif_id).ok_or_else(|| AnnotationError::UnknownTask(sub.gif_id.clone()))?;
        validate_sequence(&sub.sequence, &self.forest).map_err(AnnotationError::InvalidSequence)?;
        let previous = task.annotations.get(&sub.worker_id);
        let unchanged = previous.is_some_and(|p| p.sequence == sub.sequence && p.judgment == sub.judgment);
        let replaced = previous.is_some() && !unchanged;
        if !unchanged {
            let annotation = WorkerAnnotation {
                worker_id: sub.worker_id.clone(),
                gif_id: sub.gif_id.clone(),
                sequence: sub.sequence.clone(),
                judgment: sub.judgment,
                submitted_at: now,
            };
            self.commit(&mut inner, Event::Annotation(annotation))?;
        }
        let task = &inner.state.tasks[&sub.gif_id];
        Ok(Ack {
            gif_id: sub.gif_id.clone(),
            worker_id: sub.worker_id.clone(),
            status: task.status(now),
            completed: task.annotations.len(),
            required_workers: task.required_workers,
            replaced,
            unchanged,
        })
    }

    pub fn annotations(&self, gif_id: &str) -> Result<Vec<WorkerAnnotation>, AnnotationError> {
        let inner = self.lock();
        let t = inner.state.tasks.get(gif_id).ok_or_else(|| AnnotationError::UnknownTask(gif_id.to_string()))?;
        Ok(t.annotations.values().cloned().collect())
    }

    /// Vote over whatever annotations exist so far, done or not.
    pub fn consolidate(&self, gif_id: &str) -> Result<ConsolidatedLabel, AnnotationError> {
        let inner = self.lock();
        let t = inner.state.tasks.get(gif_id).ok_or_else(|| AnnotationError::UnknownTask(gif_id.to_string()))?;
        consolidate_votes(gif_id, &t.annotations.values().collect::<Vec<_>>())
    }

    /// Consolidated records of every done task, sorted by gif id.
    pub fn export_records(&self, filter: ExportFilter) -> Result<Vec<InstanceRecord>, AnnotationError> {
        let inner = self.lock();
        let mut out = Vec::new();
        for (id, t) in inner.state.tasks.iter().filter(|(_, t)| t.done()) {
            let c = consolidate_votes(id, &t.annotations.values().collect::<Vec<_>>())?;
            if c.label == SentimentLabel::CantJudge && !filter.include_cant_judge {
                continue;
            }
            out.push(InstanceRecord { gif_id: c.gif_id, pairs: c.sequence, label: c.label, duration_s: None, noise_flags: None });
        }
        Ok(out)
    }

    /// `.gso.jsonl` bytes; identical state gives identical bytes.
    pub fn export(&self, filter: ExportFilter) -> Result<String, AnnotationError> {
        let mut out = String::new();
        for r in self.export_records(filter)? {
            out.push_str(&serde_json::to_string(&r).map_err(|e| AnnotationError::Io(e.to_string()))?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn stats(&self) -> Result<StoreStats, AnnotationError> {
        let now = self.clock.now_ms();
        let inner = self.lock();
        let mut s = StoreStats {
            tasks: inner.state.tasks.len(),
            open: 0,
            in_progress: 0,
            done: 0,
            workers: inner.state.workers.len(),
            annotations: 0,
            labels: SentimentLabel::ALL.iter().map(|&l| (l, 0)).collect(),
        };
        for (id, t) in &inner.state.tasks {
            s.annotations += t.annotations.len();
            match t.status(now) {
                TaskStatus::Open => s.open += 1,
                TaskStatus::InProgress => s.in_progress += 1,
                TaskStatus::Done => {
                    s.done += 1;
                    let c = consolidate_votes(id, &t.annotations.values().collect::<Vec<_>>())?;
                    *s.labels.entry(c.label).or_default() += 1;
                }
            }
        }
        Ok(s)
    }
}
