use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{default_penalty, is_yes_no_only, select_k, InitStrategy, KMeansOptions, Restarts};
use crate::corpus::{normalize_for_match, QuestionId, VqaExample};
use crate::embeddings::{embed_answer, EmbeddingTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SortPolicy {
    /// Ascending score, then descending balance.
    #[default]
    ScoreThenBalance,
    /// Descending balance, then ascending score.
    BalanceThenScore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PrioritizeConfig {
    /// Per-cluster penalty; `None` derives it from the corpus
    /// (see [`super::default_penalty`]).
    pub penalty: Option<f64>,
    pub k_max: usize,
    pub restarts: usize,
    pub seed: u64,
    pub sort: SortPolicy,
    pub init: InitStrategy,
    pub max_iter: usize,
}

impl Default for PrioritizeConfig {
    fn default() -> Self {
        Self {
            penalty: None,
            k_max: 5,
            restarts: 10,
            seed: 0,
            sort: SortPolicy::default(),
            init: InitStrategy::RandomDistinct,
            max_iter: super::DEFAULT_MAX_ITER,
        }
    }
}

impl PrioritizeConfig {
    fn kmeans_options(&self) -> KMeansOptions {
        KMeansOptions {
            restarts: Restarts::Seeded(self.restarts),
            seed: self.seed,
            max_iter: self.max_iter,
            init: self.init,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorityItem {
    pub rank: usize,
    pub question_id: QuestionId,
    pub score: f64,
    pub balance: f64,
    pub k: usize,
    pub inertia: f64,
    /// Cluster id per answer, in answer order.
    pub assignments: Vec<usize>,
    /// Answers with no in-vocabulary word; clustered as zero vectors.
    pub oov_answers: Vec<usize>,
}

impl PriorityItem {
    /// Answer indices per cluster, largest cluster first (ties by first member).
    pub fn prefill_groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.k];
        for (i, &a) in self.assignments.iter().enumerate() {
            groups[a].push(i);
        }
        groups.retain(|g| !g.is_empty());
        groups.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
        groups
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrioritizeReport {
    pub n_input: usize,
    pub n_queued: usize,
    pub yes_no_dropped: Vec<QuestionId>,
    pub quarantined: Vec<QuestionId>,
    pub penalty: f64,
    /// Answers are normalized (punctuation stripped, articles removed)
    /// before the yes/no test and before embedding.
    pub normalized_before_yes_no: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorityQueue {
    pub items: Vec<PriorityItem>,
    pub report: PrioritizeReport,
}

struct Embedded<'a> {
    example: &'a VqaExample,
    vectors: Vec<Vec<f64>>,
    oov: Vec<usize>,
}

fn embed_example<'a>(example: &'a VqaExample, table: &EmbeddingTable) -> Embedded<'a> {
    let mut vectors = Vec::with_capacity(example.answers.len());
    let mut oov = Vec::new();
    for (i, a) in example.answers.iter().enumerate() {
        match embed_answer(table, &normalize_for_match(&a.text)) {
            Ok(v) => {
                if v.all_oov() {
                    oov.push(i);
                }
                vectors.push(v.vector);
            }
            Err(_) => {
                oov.push(i);
                vectors.push(vec![0.0; table.dim()]);
            }
        }
    }
    Embedded {
        example,
        vectors,
        oov,
    }
}

fn compare(a: &PriorityItem, b: &PriorityItem, policy: SortPolicy) -> Ordering {
    let by_score = a.score.total_cmp(&b.score);
    let by_balance = b.balance.total_cmp(&a.balance);
    let primary = match policy {
        SortPolicy::ScoreThenBalance => by_score.then(by_balance),
        SortPolicy::BalanceThenScore => by_balance.then(by_score),
    };
    primary.then_with(|| a.question_id.cmp(&b.question_id))
}

/// Builds the annotation priority queue.
///
/// Yes/no-only examples are dropped, the rest are embedded and clustered
/// with [`select_k`]; examples whose answers are all out of vocabulary are
/// quarantined. Output order is independent of the rayon thread count.
pub fn prioritize(
    examples: &[VqaExample],
    table: &EmbeddingTable,
    config: &PrioritizeConfig,
) -> PriorityQueue {
    let mut yes_no_dropped = Vec::new();
    let mut quarantined = Vec::new();
    let mut candidates = Vec::new();
    for ex in examples {
        if is_yes_no_only(ex) {
            yes_no_dropped.push(ex.question_id.clone());
            continue;
        }
        let emb = embed_example(ex, table);
        if emb.vectors.is_empty() || emb.oov.len() == emb.vectors.len() {
            quarantined.push(ex.question_id.clone());
            continue;
        }
        candidates.push(emb);
    }

    let penalty = config.penalty.unwrap_or_else(|| {
        let all: Vec<Vec<f64>> = candidates
            .iter()
            .flat_map(|c| c.vectors.iter().cloned())
            .collect();
        default_penalty(&all)
    });
    let opts = config.kmeans_options();

    let mut items: Vec<PriorityItem> = candidates
        .par_iter()
        .map(|c| {
            let k_max = config.k_max.clamp(1, c.vectors.len());
            let r = select_k(&c.vectors, k_max, penalty, &opts)
                .expect("non-empty, uniform-dimension points");
            PriorityItem {
                rank: 0,
                question_id: c.example.question_id.clone(),
                score: r.score,
                balance: r.balance,
                k: r.k,
                inertia: r.inertia,
                assignments: r.assignments,
                oov_answers: c.oov.clone(),
            }
        })
        .collect();
    items.sort_by(|a, b| compare(a, b, config.sort));
    for (i, item) in items.iter_mut().enumerate() {
        item.rank = i + 1;
    }

    PriorityQueue {
        report: PrioritizeReport {
            n_input: examples.len(),
            n_queued: items.len(),
            yes_no_dropped,
            quarantined,
            penalty,
            normalized_before_yes_no: true,
        },
        items,
    }
}
