//! Event-sourced annotation store.
//!
//! Every accepted write is appended to a JSONL log before the in-memory
//! index changes, so replaying the log reproduces the store exactly.
//! Leases are not logged: they are short-lived and a restart simply makes
//! every item available again.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use avqa_core::agreement::{agreement_report, AgreementError, AgreementReport};
use avqa_core::clustering::PriorityItem;
use avqa_core::corpus::{
    grouping_to_line, validate_against, AnnotatorId, AnswerGroup, AnswerGrouping, Invariant,
    QuestionId, SplitName, Splits, Violation, VqaExample,
};
use avqa_core::eval::{category_stats, dataset_summary, CategoryStats, DatasetSummary};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SKIP_REASON: &str = "All answers to the same question";
pub const DEFAULT_LEASE_TTL: Duration = Duration::from_secs(30 * 60);

pub trait Clock: Send + Sync {
    /// Milliseconds since the Unix epoch.
    fn now_ms(&self) -> u64;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis() as u64)
            .unwrap_or(0)
    }
}

/// A clock that only moves when told to. For tests.
#[derive(Debug, Default)]
pub struct ManualClock(AtomicU64);

impl ManualClock {
    pub fn new(start_ms: u64) -> Self {
        Self(AtomicU64::new(start_ms))
    }

    pub fn advance(&self, by: Duration) {
        self.0.fetch_add(by.as_millis() as u64, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now_ms(&self) -> u64 {
        self.0.load(Ordering::SeqCst)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("invariant {0}")]
    Validation(Violation),
    #[error("{annotator} holds no active lease on {question_id}")]
    NoLease {
        question_id: QuestionId,
        annotator: AnnotatorId,
    },
    #[error("unknown example {0}")]
    UnknownExample(QuestionId),
    #[error("no annotation by {annotator} on {question_id} to vet")]
    NothingToVet {
        question_id: QuestionId,
        annotator: AnnotatorId,
    },
    #[error("{0}")]
    Forbidden(String),
    #[error("no dev/test split is configured")]
    NoSplits,
    #[error("queue item {question_id}: {message}")]
    BadQueue {
        question_id: QuestionId,
        message: String,
    },
    #[error("{path}: line {line}: {message}")]
    CorruptLog {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventPayload {
    Annotation {
        grouping: AnswerGrouping,
    },
    Skip {
        question_id: QuestionId,
        annotator_id: AnnotatorId,
        reason: String,
    },
    /// A privileged edit of an existing annotation. The grouping keeps the
    /// original annotator's id; the editor is recorded separately.
    Vetting {
        vetter_id: AnnotatorId,
        grouping: AnswerGrouping,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub timestamp_ms: u64,
    #[serde(flatten)]
    pub payload: EventPayload,
}

impl Event {
    fn key(&self) -> (QuestionId, AnnotatorId) {
        match &self.payload {
            EventPayload::Annotation { grouping } | EventPayload::Vetting { grouping, .. } => {
                (grouping.question_id.clone(), grouping.annotator_id.clone())
            }
            EventPayload::Skip {
                question_id,
                annotator_id,
                ..
            } => (question_id.clone(), annotator_id.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lease {
    pub question_id: QuestionId,
    pub annotator_id: AnnotatorId,
    pub issued_at_ms: u64,
    pub expires_at_ms: u64,
}

#[derive(Debug, Clone)]
pub struct StoreOptions {
    pub lease_ttl: Duration,
    /// How many distinct annotators each example is served to.
    pub redundancy: usize,
    pub splits: Option<Splits>,
}

impl Default for StoreOptions {
    fn default() -> Self {
        Self {
            lease_ttl: DEFAULT_LEASE_TTL,
            redundancy: 1,
            splits: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeasedExample {
    pub rank: usize,
    pub score: f64,
    pub balance: f64,
    pub example: VqaExample,
    /// Clustering-derived groups, each titled with the original question.
    pub prefill: Vec<AnswerGroup>,
    pub lease: Lease,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NextExample {
    /// Items still available to this annotator after this one.
    pub remaining: usize,
    pub item: Option<LeasedExample>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportFilter {
    #[serde(default)]
    pub vetted_only: bool,
    #[serde(default)]
    pub split: Option<SplitName>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Export {
    pub groupings: Vec<AnswerGrouping>,
    pub summary: DatasetSummary,
}

impl Export {
    pub fn to_jsonl(&self) -> String {
        self.groupings
            .iter()
            .map(|g| grouping_to_line(g) + "\n")
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiveAgreement {
    pub annotators: Vec<AnnotatorId>,
    /// True when fewer than two annotators share an example.
    pub empty_overlap: bool,
    pub report: Option<AgreementReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueueStats {
    pub items: usize,
    pub active_leases: usize,
    /// Items annotated or skipped by `redundancy` annotators.
    pub completed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub events: usize,
    pub queue: QueueStats,
    pub summary: DatasetSummary,
    pub categories: CategoryStats,
}

type Key = (QuestionId, AnnotatorId);

pub struct Store {
    examples: BTreeMap<QuestionId, VqaExample>,
    queue: Vec<PriorityItem>,
    opts: StoreOptions,
    clock: Arc<dyn Clock>,
    events: Vec<Event>,
    /// Latest annotation or skip per key (index into `events`).
    authored: BTreeMap<Key, usize>,
    /// Latest vetting edit per key.
    vetted: BTreeMap<Key, usize>,
    done: BTreeMap<QuestionId, BTreeSet<AnnotatorId>>,
    leases: BTreeMap<Key, Lease>,
    log: Option<(PathBuf, File)>,
}

impl Store {
    /// A store without a backing file.
    pub fn in_memory(
        examples: Vec<VqaExample>,
        queue: Vec<PriorityItem>,
        opts: StoreOptions,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, StoreError> {
        let examples: BTreeMap<QuestionId, VqaExample> = examples
            .into_iter()
            .map(|e| (e.question_id.clone(), e))
            .collect();
        for item in &queue {
            let bad = |message: String| StoreError::BadQueue {
                question_id: item.question_id.clone(),
                message,
            };
            let ex = examples
                .get(&item.question_id)
                .ok_or_else(|| bad("no such example".into()))?;
            if item.assignments.len() != ex.answers.len() {
                return Err(bad(format!(
                    "{} assignments for {} answers",
                    item.assignments.len(),
                    ex.answers.len()
                )));
            }
        }
        let mut queue = queue;
        queue.sort_by_key(|i| i.rank);
        Ok(Self {
            examples,
            queue,
            opts,
            clock,
            events: Vec::new(),
            authored: BTreeMap::new(),
            vetted: BTreeMap::new(),
            done: BTreeMap::new(),
            leases: BTreeMap::new(),
            log: None,
        })
    }

    /// Opens (or creates) the event log at `path`, replays it, and appends
    /// new events to it.
    pub fn open(
        path: &Path,
        examples: Vec<VqaExample>,
        queue: Vec<PriorityItem>,
        opts: StoreOptions,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, StoreError> {
        let mut store = Self::in_memory(examples, queue, opts, clock)?;
        if path.exists() {
            store.replay_file(path)?;
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|source| StoreError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        store.log = Some((path.to_path_buf(), file));
        Ok(store)
    }

    /// Replays an existing log without attaching it: later writes stay in
    /// memory. Used for offline export.
    pub fn replay(
        path: &Path,
        examples: Vec<VqaExample>,
        opts: StoreOptions,
    ) -> Result<Self, StoreError> {
        Self::replay_with_queue(path, examples, Vec::new(), opts)
    }

    /// Like [`Store::replay`], but keeps a queue so that queue statistics
    /// reflect what a server started on this log would see.
    pub fn replay_with_queue(
        path: &Path,
        examples: Vec<VqaExample>,
        queue: Vec<PriorityItem>,
        opts: StoreOptions,
    ) -> Result<Self, StoreError> {
        let mut store = Self::in_memory(examples, queue, opts, Arc::new(SystemClock))?;
        if path.exists() {
            store.replay_file(path)?;
        }
        Ok(store)
    }

    fn replay_file(&mut self, path: &Path) -> Result<(), StoreError> {
        let io = |source| StoreError::Io {
            path: path.to_path_buf(),
            source,
        };
        let reader = BufReader::new(File::open(path).map_err(io)?);
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            let corrupt = |message: String| StoreError::CorruptLog {
                path: path.to_path_buf(),
                line: i + 1,
                message,
            };
            let event: Event = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
            let expected = self.events.len() as u64 + 1;
            if event.seq != expected {
                return Err(corrupt(format!(
                    "sequence {} (expected {expected})",
                    event.seq
                )));
            }
            let (q, _) = event.key();
            if !self.examples.contains_key(&q) {
                return Err(corrupt(format!("event for unknown example {q}")));
            }
            self.apply(event);
        }
        Ok(())
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn example(&self, id: &QuestionId) -> Option<&VqaExample> {
        self.examples.get(id)
    }

    fn apply(&mut self, event: Event) {
        let key = event.key();
        let idx = self.events.len();
        match &event.payload {
            EventPayload::Annotation { .. } | EventPayload::Skip { .. } => {
                self.done
                    .entry(key.0.clone())
                    .or_default()
                    .insert(key.1.clone());
                self.authored.insert(key, idx);
            }
            EventPayload::Vetting { .. } => {
                self.vetted.insert(key, idx);
            }
        }
        self.events.push(event);
    }

    fn append(&mut self, payload: EventPayload) -> Result<u64, StoreError> {
        let event = Event {
            seq: self.events.len() as u64 + 1,
            timestamp_ms: self.clock.now_ms(),
            payload,
        };
        if let Some((path, file)) = &mut self.log {
            let mut line = serde_json::to_string(&event).expect("events serialize");
            line.push('\n');
            file.write_all(line.as_bytes())
                .and_then(|_| file.sync_data())
                .map_err(|source| StoreError::Io {
                    path: path.clone(),
                    source,
                })?;
        }
        let seq = event.seq;
        self.apply(event);
        Ok(seq)
    }

    fn expire_leases(&mut self, now: u64) {
        self.leases.retain(|_, l| l.expires_at_ms > now);
    }

    fn available_to(&self, item: &PriorityItem, annotator: &AnnotatorId) -> bool {
        let q = &item.question_id;
        let done = self.done.get(q);
        if done.is_some_and(|d| d.contains(annotator))
            || self.leases.contains_key(&(q.clone(), annotator.clone()))
        {
            return false;
        }
        let taken = done.map_or(0, BTreeSet::len)
            + self
                .leases
                .range((q.clone(), AnnotatorId(String::new()))..)
                .take_while(|((lq, _), _)| lq == q)
                .count();
        taken < self.opts.redundancy
    }

    /// Leases the highest-priority item this annotator may still work on.
    pub fn next_example(&mut self, annotator: &AnnotatorId) -> NextExample {
        let now = self.clock.now_ms();
        self.expire_leases(now);
        let Some(pos) = self
            .queue
            .iter()
            .position(|i| self.available_to(i, annotator))
        else {
            return NextExample {
                remaining: 0,
                item: None,
            };
        };
        let item = self.queue[pos].clone();
        let lease = Lease {
            question_id: item.question_id.clone(),
            annotator_id: annotator.clone(),
            issued_at_ms: now,
            expires_at_ms: now + self.opts.lease_ttl.as_millis() as u64,
        };
        self.leases
            .insert((item.question_id.clone(), annotator.clone()), lease.clone());
        let remaining = self.queue[pos + 1..]
            .iter()
            .filter(|i| self.available_to(i, annotator))
            .count();
        let example = self.examples[&item.question_id].clone();
        let prefill = item
            .prefill_groups()
            .into_iter()
            .map(|members| AnswerGroup {
                rewritten_question: example.question.clone(),
                answer_texts: members
                    .iter()
                    .map(|&i| example.answers[i].text.clone())
                    .collect(),
                member_indices: members.into_iter().collect(),
                labels: BTreeSet::new(),
            })
            .collect();
        NextExample {
            remaining,
            item: Some(LeasedExample {
                rank: item.rank,
                score: item.score,
                balance: item.balance,
                example,
                prefill,
                lease,
            }),
        }
    }

    fn take_lease(&mut self, q: &QuestionId, a: &AnnotatorId) -> Result<(), StoreError> {
        let now = self.clock.now_ms();
        self.expire_leases(now);
        if self.leases.contains_key(&(q.clone(), a.clone())) {
            Ok(())
        } else {
            Err(StoreError::NoLease {
                question_id: q.clone(),
                annotator: a.clone(),
            })
        }
    }

    fn validate(&self, g: &AnswerGrouping) -> Result<(), StoreError> {
        let ex = self
            .examples
            .get(&g.question_id)
            .ok_or_else(|| StoreError::UnknownExample(g.question_id.clone()))?;
        validate_against(g, ex.answers.len()).map_err(StoreError::Validation)
    }

    pub fn submit_annotation(
        &mut self,
        annotator: &AnnotatorId,
        grouping: AnswerGrouping,
    ) -> Result<u64, StoreError> {
        if &grouping.annotator_id != annotator {
            return Err(StoreError::Forbidden(format!(
                "grouping is attributed to {}, caller is {annotator}",
                grouping.annotator_id
            )));
        }
        self.validate(&grouping)?;
        self.take_lease(&grouping.question_id, annotator)?;
        let key = (grouping.question_id.clone(), annotator.clone());
        let seq = self.append(EventPayload::Annotation { grouping })?;
        self.leases.remove(&key);
        Ok(seq)
    }

    pub fn skip_example(
        &mut self,
        annotator: &AnnotatorId,
        question_id: &QuestionId,
        reason: Option<String>,
    ) -> Result<u64, StoreError> {
        if !self.examples.contains_key(question_id) {
            return Err(StoreError::UnknownExample(question_id.clone()));
        }
        let reason = reason.unwrap_or_else(|| DEFAULT_SKIP_REASON.to_owned());
        if reason.trim().is_empty() {
            return Err(StoreError::Validation(Violation {
                invariant: Invariant::SkipReasonRequired,
                detail: "skip reason is blank".into(),
            }));
        }
        self.take_lease(question_id, annotator)?;
        let seq = self.append(EventPayload::Skip {
            question_id: question_id.clone(),
            annotator_id: annotator.clone(),
            reason,
        })?;
        self.leases
            .remove(&(question_id.clone(), annotator.clone()));
        Ok(seq)
    }

    /// Records a vetted replacement for an existing annotation. The caller
    /// is responsible for checking that `vetter` is privileged.
    pub fn vet(
        &mut self,
        vetter: &AnnotatorId,
        grouping: AnswerGrouping,
    ) -> Result<u64, StoreError> {
        self.validate(&grouping)?;
        let key = (grouping.question_id.clone(), grouping.annotator_id.clone());
        if !self.authored.contains_key(&key) {
            return Err(StoreError::NothingToVet {
                question_id: key.0,
                annotator: key.1,
            });
        }
        self.append(EventPayload::Vetting {
            vetter_id: vetter.clone(),
            grouping,
        })
    }

    fn as_grouping(&self, event: &Event) -> AnswerGrouping {
        match &event.payload {
            EventPayload::Annotation { grouping } | EventPayload::Vetting { grouping, .. } => {
                grouping.clone()
            }
            EventPayload::Skip {
                question_id,
                annotator_id,
                reason,
            } => {
                let ex = &self.examples[question_id];
                AnswerGrouping {
                    question_id: question_id.clone(),
                    image_id: ex.image_id.clone(),
                    image_uri: ex.image_uri.clone(),
                    original_question: ex.question.clone(),
                    annotator_id: annotator_id.clone(),
                    ambiguous: false,
                    groups: Vec::new(),
                    skip_reason: Some(reason.clone()),
                    deleted_indices: BTreeSet::new(),
                }
            }
        }
    }

    /// Latest record per (question, annotator), ordered by key.
    pub fn export(&self, filter: ExportFilter) -> Result<Export, StoreError> {
        let split = match filter.split {
            None => None,
            Some(name) => Some((name, self.opts.splits.as_ref().ok_or(StoreError::NoSplits)?)),
        };
        let keys: BTreeSet<&Key> = if filter.vetted_only {
            self.vetted.keys().collect()
        } else {
            self.authored.keys().chain(self.vetted.keys()).collect()
        };
        let groupings: Vec<AnswerGrouping> = keys
            .into_iter()
            .filter(|(q, _)| split.is_none_or(|(name, s)| s.contains(name, q)))
            .map(|key| {
                let idx = if filter.vetted_only {
                    self.vetted[key]
                } else {
                    self.authored
                        .get(key)
                        .into_iter()
                        .chain(self.vetted.get(key))
                        .copied()
                        .max()
                        .expect("key came from one of the maps")
                };
                self.as_grouping(&self.events[idx])
            })
            .collect();
        let summary = dataset_summary(&groupings);
        Ok(Export { groupings, summary })
    }

    /// Pairwise agreement over the annotators' own (un-vetted) records.
    pub fn agreement(&self) -> LiveAgreement {
        let groupings: Vec<AnswerGrouping> = self
            .authored
            .values()
            .map(|&i| self.as_grouping(&self.events[i]))
            .collect();
        let annotators: Vec<AnnotatorId> = groupings
            .iter()
            .map(|g| g.annotator_id.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        match agreement_report(&groupings) {
            Ok(report) => LiveAgreement {
                annotators,
                empty_overlap: false,
                report: Some(report),
            },
            Err(
                AgreementError::TooFewAnnotators(_)
                | AgreementError::NoComparablePairs
                | AgreementError::NoSharedItems,
            ) => LiveAgreement {
                annotators,
                empty_overlap: true,
                report: None,
            },
            Err(e) => unreachable!("validated groupings cannot fail agreement: {e}"),
        }
    }

    pub fn stats(&mut self) -> Stats {
        let now = self.clock.now_ms();
        self.expire_leases(now);
        let export = self
            .export(ExportFilter::default())
            .expect("no split filter");
        let completed = self
            .queue
            .iter()
            .filter(|i| {
                self.done
                    .get(&i.question_id)
                    .is_some_and(|d| d.len() >= self.opts.redundancy)
            })
            .count();
        Stats {
            events: self.events.len(),
            queue: QueueStats {
                items: self.queue.len(),
                active_leases: self.leases.len(),
                completed,
            },
            categories: category_stats(&export.groupings),
            summary: export.summary,
        }
    }
}
