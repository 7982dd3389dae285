use std::collections::{BTreeMap, BTreeSet};

use avqa_core::agreement::{agreement_report, ambiguity_agreement, cluster_f1};
use avqa_core::corpus::{
    grouping_from_line, grouping_to_line, validate_grouping, AnswerGroup, AnswerGrouping,
    OntologyLabel,
};
use avqa_core::embeddings::{embed_answer, EmbeddingTable};
use avqa_core::eval::{
    bootstrap_ci, category_stats, evaluate_clustering, mcnemar, why_crosstab, BootstrapOptions,
    EvalOptions, Method, WhyRecord,
};
use proptest::prelude::*;

/// A random partition of `0..n` given as a label per item.
fn partition_from_labels(labels: &[usize]) -> Vec<BTreeSet<usize>> {
    let mut m: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        m.entry(l).or_default().insert(i);
    }
    m.into_values().collect()
}

fn labels(n: std::ops::Range<usize>) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0usize..4, n)
}

fn grouping(partition: &[BTreeSet<usize>], annotator: &str, q: &str) -> AnswerGrouping {
    AnswerGrouping {
        question_id: q.into(),
        image_id: "img".into(),
        image_uri: String::new(),
        original_question: "What kind of flowers are these?".into(),
        annotator_id: annotator.into(),
        ambiguous: partition.len() >= 2,
        groups: if partition.len() >= 2 {
            partition
                .iter()
                .enumerate()
                .map(|(i, m)| AnswerGroup {
                    rewritten_question: format!("rewrite {i}"),
                    member_indices: m.clone(),
                    answer_texts: m.iter().map(|j| format!("answer {j}")).collect(),
                    labels: BTreeSet::from([OntologyLabel::ALL[i % OntologyLabel::ALL.len()]]),
                })
                .collect()
        } else {
            vec![]
        },
        skip_reason: (partition.len() < 2).then(|| "All answers to the same question".into()),
        deleted_indices: BTreeSet::new(),
    }
}

proptest! {
    #[test]
    fn swapping_sides_swaps_precision_and_recall(a in labels(1..9), b in labels(1..9)) {
        let n = a.len().min(b.len());
        let (pa, pb) = (partition_from_labels(&a[..n]), partition_from_labels(&b[..n]));
        let x = cluster_f1(&pa, &pb).unwrap();
        let y = cluster_f1(&pb, &pa).unwrap();
        prop_assert!((x.precision - y.recall).abs() < 1e-9);
        prop_assert!((x.recall - y.precision).abs() < 1e-9);
        prop_assert!((x.f1 - y.f1).abs() < 1e-9);
    }

    #[test]
    fn cluster_order_does_not_matter(a in labels(1..9), b in labels(1..9)) {
        let n = a.len().min(b.len());
        let (pa, pb) = (partition_from_labels(&a[..n]), partition_from_labels(&b[..n]));
        let mut ra = pa.clone();
        ra.reverse();
        prop_assert_eq!(cluster_f1(&pa, &pb).unwrap(), cluster_f1(&ra, &pb).unwrap());
    }

    #[test]
    fn item_relabeling_does_not_matter(a in labels(1..9), b in labels(1..9), shift in 1usize..9) {
        let n = a.len().min(b.len());
        let (pa, pb) = (partition_from_labels(&a[..n]), partition_from_labels(&b[..n]));
        // reversal composed with a rotation, applied to both sides
        let rename = |p: &[BTreeSet<usize>]| -> Vec<BTreeSet<usize>> {
            p.iter().map(|c| c.iter().map(|&i| (n - 1 - i + shift) % n).collect()).collect()
        };
        let x = cluster_f1(&pa, &pb).unwrap();
        let y = cluster_f1(&rename(&pa), &rename(&pb)).unwrap();
        prop_assert!((x.precision - y.precision).abs() < 1e-9, "{:?} vs {:?}", x, y);
        prop_assert!((x.recall - y.recall).abs() < 1e-9);
        prop_assert!((x.f1 - y.f1).abs() < 1e-9);
    }

    #[test]
    fn identical_partitions_and_trivial_baselines(a in labels(1..9)) {
        let p = partition_from_labels(&a);
        let s = cluster_f1(&p, &p).unwrap();
        prop_assert_eq!((s.precision, s.recall, s.f1), (100.0, 100.0, 100.0));
        let items: Vec<usize> = (0..a.len()).collect();
        let singletons: Vec<BTreeSet<usize>> = items.iter().map(|&i| BTreeSet::from([i])).collect();
        prop_assert_eq!(cluster_f1(&singletons, &p).unwrap().precision, 100.0);
        let all = vec![items.iter().copied().collect::<BTreeSet<usize>>()];
        prop_assert_eq!(cluster_f1(&all, &p).unwrap().recall, 100.0);
    }

    #[test]
    fn f1_bounded(a in labels(1..9), b in labels(1..9)) {
        let n = a.len().min(b.len());
        let s = cluster_f1(&partition_from_labels(&a[..n]), &partition_from_labels(&b[..n])).unwrap();
        for v in [s.precision, s.recall, s.f1] {
            prop_assert!((0.0..=100.0 + 1e-9).contains(&v));
        }
    }

    #[test]
    fn perfect_baselines_on_any_gold(parts in prop::collection::vec(labels(2..9), 1..8)) {
        let gold: Vec<AnswerGrouping> = parts
            .iter()
            .enumerate()
            .map(|(i, l)| grouping(&partition_from_labels(l), "gold", &i.to_string()))
            .collect();
        prop_assume!(gold.iter().any(|g| g.ambiguous));
        let p = evaluate_clustering(&Method::PerfectPrecision, &gold, &EvalOptions::default()).unwrap();
        let r = evaluate_clustering(&Method::PerfectRecall, &gold, &EvalOptions::default()).unwrap();
        prop_assert_eq!(p.precision, 100.0);
        prop_assert_eq!(r.recall, 100.0);
    }

    #[test]
    fn jsonl_round_trip(a in labels(2..9)) {
        let g = grouping(&partition_from_labels(&a), "ann", "42");
        prop_assert!(validate_grouping(&g).is_ok());
        let line = grouping_to_line(&g);
        prop_assert_eq!(grouping_from_line(&line, 1).unwrap(), g);
    }

    #[test]
    fn embedding_is_word_order_invariant_and_linear(
        words in prop::collection::vec(prop::sample::select(vec!["red", "blue", "daisy", "zzz"]), 1..6),
        factor in 0.5f32..4.0,
    ) {
        let table = EmbeddingTable::from_entries(
            3,
            [("red", vec![1.0, 0.0, 2.0]), ("blue", vec![0.0, 1.0, -1.0]), ("daisy", vec![0.5, 0.5, 0.5])],
        ).unwrap();
        let text = words.join(" ");
        let mut rev = words.clone();
        rev.reverse();
        let a = embed_answer(&table, &text).unwrap();
        let b = embed_answer(&table, &rev.join(" ")).unwrap();
        for (x, y) in a.vector.iter().zip(&b.vector) {
            prop_assert!((x - y).abs() < 1e-9);
        }
        let scaled = embed_answer(&table.scaled(factor), &text).unwrap();
        for (x, y) in a.vector.iter().zip(&scaled.vector) {
            prop_assert!((x * factor as f64 - y).abs() < 1e-4);
        }
        prop_assert_eq!(a.all_oov(), words.iter().all(|w| *w == "zzz"));
    }

    #[test]
    fn mcnemar_symmetric_and_bounded(b in 0usize..60, c in 0usize..60) {
        let x = mcnemar(b, c);
        let y = mcnemar(c, b);
        prop_assert!((x.p_value - y.p_value).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&x.p_value));
    }

    #[test]
    fn bootstrap_interval_brackets_mean(v in prop::collection::vec(any::<bool>(), 1..60), seed in any::<u64>()) {
        let (lo, hi) = bootstrap_ci(&v, &BootstrapOptions { resamples: 300, level: 0.95, seed }).unwrap();
        prop_assert!(0.0 <= lo && lo <= hi && hi <= 1.0);
    }

    #[test]
    fn category_stats_invariants(parts in prop::collection::vec(labels(2..9), 1..10)) {
        let gs: Vec<AnswerGrouping> = parts
            .iter()
            .enumerate()
            .map(|(i, l)| grouping(&partition_from_labels(l), "a", &i.to_string()))
            .collect();
        let s = category_stats(&gs);
        for p in &s.cooccurrence {
            prop_assert!(p.a < p.b);
            prop_assert!(p.count <= s.frequency[&p.a].min(s.frequency[&p.b]));
        }
        prop_assert!(s.reported_pairs().iter().all(|p| p.count > 1));
    }

    #[test]
    fn crosstab_preserves_total(v in prop::collection::vec((any::<bool>(), any::<bool>(), any::<bool>()), 0..150)) {
        let recs: Vec<WhyRecord> = v.iter().map(|&(a, d, g)| WhyRecord { ambiguous: a, dynamic: d, agentive: g }).collect();
        prop_assert_eq!(why_crosstab(&recs).total(), recs.len());
    }
}

#[test]
fn duplicate_annotators_agree_fully() {
    let parts = [vec![0, 0, 1, 2], vec![0, 1, 1], vec![0, 0, 0]];
    let mut pool = Vec::new();
    for ann in ["a", "b"] {
        for (i, l) in parts.iter().enumerate() {
            pool.push(grouping(&partition_from_labels(l), ann, &i.to_string()));
        }
    }
    let r = agreement_report(&pool).unwrap();
    assert_eq!(r.observed.mean, 100.0);
    assert_eq!(r.cluster_f1.unwrap().mean, 100.0);
    // literal reading: 2 of 3 shared examples are ambiguous for both
    assert!((r.ambiguity.mean - 200.0 / 3.0).abs() < 1e-9);
}

#[test]
fn ambiguity_agreement_on_all_ambiguous_duplicates_is_100() {
    let m: BTreeMap<u32, bool> = (0..10).map(|i| (i, true)).collect();
    assert_eq!(ambiguity_agreement(&m, &m.clone()).unwrap(), 100.0);
}

#[test]
fn crosstab_117_records() {
    let recs: Vec<WhyRecord> = (0..117)
        .map(|i| WhyRecord {
            ambiguous: i % 2 == 0,
            dynamic: i % 3 == 0,
            agentive: i % 5 == 0,
        })
        .collect();
    assert_eq!(why_crosstab(&recs).total(), 117);
    assert_eq!(why_crosstab(&[]).total(), 0);
}

#[test]
fn bootstrap_width_halves_when_n_quadruples() {
    let make = |n: usize| -> Vec<bool> { (0..n).map(|i| i % 10 < 7).collect() };
    let mut ratios = Vec::new();
    for seed in 0..20 {
        let o = BootstrapOptions {
            resamples: 4000,
            level: 0.95,
            seed,
        };
        let (a, b) = bootstrap_ci(&make(100), &o).unwrap();
        let (c, d) = bootstrap_ci(&make(400), &o).unwrap();
        ratios.push((d - c) / (b - a));
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    assert!((mean - 0.5).abs() <= 0.075, "{mean}");
    let (lo, hi) = bootstrap_ci(&make(100), &BootstrapOptions::default()).unwrap();
    assert!(lo < 0.7 && 0.7 < hi);
    assert!(
        (lo - 0.61).abs() < 0.03 && (hi - 0.79).abs() < 0.03,
        "({lo}, {hi})"
    );
}
