//! Clustering evaluation, text-similarity metrics, significance statistics
//! and ontology statistics.

mod harness;
mod ontology;
mod stats;
mod text;

use std::path::PathBuf;

pub use harness::{
    baseline_perfect_precision, baseline_perfect_recall, baseline_random, baseline_random_seeded,
    cluster_representations, evaluate_clustering, evaluate_random_seeds, gold_examples,
    load_representations, EvalOptions, ExampleScore, GoldExample, Method, MethodRow, Partition,
    ReprFormat, ReprManifest, RepresentationFile, SeedSweep, Weighting,
};
pub use ontology::{
    category_stats, dataset_summary, why_crosstab, CategoryStats, DatasetSummary, LabelPair,
    WhyCell, WhyCrosstab, WhyRecord,
};
pub use stats::{
    acceptability_report, bootstrap_ci, mcnemar, mcnemar_pairs, quantile_sorted,
    AcceptabilityRecord, AcceptabilityRow, BootstrapOptions, McNemar, McNemarMethod, PairedCounts,
    EXACT_THRESHOLD,
};
pub use text::{
    bleu, cider, corpus_bleu, lcs_len, rouge_l, tokenize, BleuScore, CiderScores, RougeL, Smoothing,
};

use crate::agreement::AgreementError;
use crate::clustering::ClusterError;
use crate::corpus::QuestionId;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{0}")]
    Argument(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("representation file: {0}")]
    Representation(String),
    #[error("no representation vector for ({question_id}, {answer_index})")]
    MissingVector {
        question_id: QuestionId,
        answer_index: usize,
    },
    #[error("gold grouping for {question_id} has no text for answer {answer_index}")]
    MissingText {
        question_id: QuestionId,
        answer_index: usize,
    },
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Agreement(#[from] AgreementError),
}
