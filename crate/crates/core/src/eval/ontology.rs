//! Ontology label statistics, the why-question cross-tabulation and the
//! dataset summary.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{AnswerGrouping, OntologyLabel, QuestionId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelPair {
    pub a: OntologyLabel,
    pub b: OntologyLabel,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategoryStats {
    pub n_examples: usize,
    /// Examples carrying each label at least once.
    pub frequency: BTreeMap<OntologyLabel, usize>,
    /// Unordered label pairs (`a < b`) co-occurring in one example.
    pub cooccurrence: Vec<LabelPair>,
}

impl CategoryStats {
    /// Labels by descending frequency, ties in label order.
    pub fn top(&self, n: usize) -> Vec<(OntologyLabel, usize)> {
        let mut v: Vec<_> = self.frequency.iter().map(|(&l, &c)| (l, c)).collect();
        v.sort_by(|x, y| y.1.cmp(&x.1).then(x.0.cmp(&y.0)));
        v.truncate(n);
        v
    }

    /// Co-occurring pairs seen more than once.
    pub fn reported_pairs(&self) -> Vec<LabelPair> {
        self.cooccurrence
            .iter()
            .copied()
            .filter(|p| p.count > 1)
            .collect()
    }
}

/// Label frequencies and pairwise co-occurrence. An example's label set is
/// the union over its groups (and over all groupings of the same question).
pub fn category_stats(groupings: &[AnswerGrouping]) -> CategoryStats {
    let mut per_example: BTreeMap<&QuestionId, BTreeSet<OntologyLabel>> = BTreeMap::new();
    for g in groupings {
        per_example
            .entry(&g.question_id)
            .or_default()
            .extend(g.labels());
    }
    let mut frequency = BTreeMap::new();
    let mut pairs: BTreeMap<(OntologyLabel, OntologyLabel), usize> = BTreeMap::new();
    for labels in per_example.values() {
        let v: Vec<_> = labels.iter().copied().collect();
        for (i, &a) in v.iter().enumerate() {
            *frequency.entry(a).or_insert(0) += 1;
            for &b in &v[i + 1..] {
                *pairs.entry((a, b)).or_insert(0) += 1;
            }
        }
    }
    CategoryStats {
        n_examples: per_example.len(),
        frequency,
        cooccurrence: pairs
            .into_iter()
            .map(|((a, b), count)| LabelPair { a, b, count })
            .collect(),
    }
}

/// A "why" question with its three binary judgments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhyRecord {
    pub ambiguous: bool,
    pub dynamic: bool,
    pub agentive: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhyCell {
    pub dynamic: bool,
    pub agentive: bool,
    pub ambiguous: bool,
    pub count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct WhyCrosstab {
    /// Indexed `[dynamic][agentive][ambiguous]`.
    pub counts: [[[usize; 2]; 2]; 2],
}

impl WhyCrosstab {
    pub fn get(&self, dynamic: bool, agentive: bool, ambiguous: bool) -> usize {
        self.counts[dynamic as usize][agentive as usize][ambiguous as usize]
    }

    pub fn total(&self) -> usize {
        self.cells().iter().map(|c| c.count).sum()
    }

    pub fn cells(&self) -> Vec<WhyCell> {
        let mut out = Vec::with_capacity(8);
        for dynamic in [false, true] {
            for agentive in [false, true] {
                for ambiguous in [false, true] {
                    out.push(WhyCell {
                        dynamic,
                        agentive,
                        ambiguous,
                        count: self.get(dynamic, agentive, ambiguous),
                    });
                }
            }
        }
        out
    }

    /// Fraction ambiguous among questions with the given event properties.
    pub fn ambiguity_rate(&self, dynamic: bool, agentive: bool) -> Option<f64> {
        let amb = self.get(dynamic, agentive, true);
        let n = amb + self.get(dynamic, agentive, false);
        (n > 0).then(|| amb as f64 / n as f64)
    }
}

impl Serialize for WhyCrosstab {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.cells().serialize(s)
    }
}

pub fn why_crosstab(records: &[WhyRecord]) -> WhyCrosstab {
    let mut t = WhyCrosstab::default();
    for r in records {
        t.counts[r.dynamic as usize][r.agentive as usize][r.ambiguous as usize] += 1;
    }
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    /// Ambiguous examples (distinct question ids).
    pub n_examples: usize,
    pub n_rewritten_questions: usize,
    pub mean_answers_per_question: f64,
    /// Groupings excluded because they were not marked ambiguous.
    pub n_unambiguous_excluded: usize,
}

/// Counts over ambiguous groupings only: examples, rewritten questions, and
/// the mean number of grouped answers per rewritten question.
pub fn dataset_summary(groupings: &[AnswerGrouping]) -> DatasetSummary {
    let mut ids = BTreeSet::new();
    let (mut rewrites, mut answers, mut excluded) = (0usize, 0usize, 0usize);
    for g in groupings {
        if !g.ambiguous {
            excluded += 1;
            continue;
        }
        ids.insert(&g.question_id);
        rewrites += g.groups.len();
        answers += g
            .groups
            .iter()
            .map(|gr| gr.member_indices.len())
            .sum::<usize>();
    }
    DatasetSummary {
        n_examples: ids.len(),
        n_rewritten_questions: rewrites,
        mean_answers_per_question: if rewrites == 0 {
            0.0
        } else {
            answers as f64 / rewrites as f64
        },
        n_unambiguous_excluded: excluded,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AnswerGroup;
    use OntologyLabel::*;

    fn grouping(id: &str, groups: &[(&[usize], &[OntologyLabel])]) -> AnswerGrouping {
        AnswerGrouping {
            question_id: id.into(),
            image_id: "i".into(),
            image_uri: String::new(),
            original_question: String::new(),
            annotator_id: "a".into(),
            ambiguous: !groups.is_empty(),
            groups: groups
                .iter()
                .enumerate()
                .map(|(i, (m, l))| AnswerGroup {
                    rewritten_question: format!("q{i}"),
                    member_indices: m.iter().copied().collect(),
                    answer_texts: vec![],
                    labels: l.iter().copied().collect(),
                })
                .collect(),
            skip_reason: (groups.is_empty()).then(|| "x".into()),
            deleted_indices: BTreeSet::new(),
        }
    }

    #[test]
    fn frequencies_count_examples_not_groups() {
        let gs = vec![
            grouping("1", &[(&[0], &[Location]), (&[1], &[Location, Kind])]),
            grouping("2", &[(&[0], &[Kind]), (&[1], &[Location])]),
            grouping("3", &[(&[0], &[Time]), (&[1], &[Time])]),
        ];
        let s = category_stats(&gs);
        assert_eq!(s.frequency[&Location], 2);
        assert_eq!(s.frequency[&Kind], 2);
        assert_eq!(s.top(2), vec![(Location, 2), (Kind, 2)]);
        assert_eq!(
            s.cooccurrence,
            vec![LabelPair {
                a: Location,
                b: Kind,
                count: 2
            }]
        );
        assert_eq!(s.reported_pairs().len(), 1);
    }

    #[test]
    fn singleton_pairs_not_reported() {
        let s = category_stats(&[grouping("1", &[(&[0], &[Time]), (&[1], &[Cause])])]);
        assert_eq!(s.cooccurrence.len(), 1);
        assert!(s.reported_pairs().is_empty());
    }

    #[test]
    fn crosstab_counts() {
        let recs = [
            WhyRecord {
                ambiguous: true,
                dynamic: true,
                agentive: true,
            },
            WhyRecord {
                ambiguous: true,
                dynamic: true,
                agentive: true,
            },
            WhyRecord {
                ambiguous: false,
                dynamic: true,
                agentive: true,
            },
            WhyRecord {
                ambiguous: false,
                dynamic: false,
                agentive: false,
            },
        ];
        let t = why_crosstab(&recs);
        assert_eq!(t.get(true, true, true), 2);
        assert_eq!(t.total(), 4);
        assert!((t.ambiguity_rate(true, true).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(t.ambiguity_rate(false, true), None);
        assert_eq!(
            serde_json::to_value(t).unwrap().as_array().unwrap().len(),
            8
        );
    }

    #[test]
    fn summary_counts_ambiguous_only() {
        let gs = vec![
            grouping("1", &[(&[0, 1, 2], &[]), (&[3], &[])]),
            grouping("2", &[(&[0, 1], &[]), (&[2, 3], &[]), (&[4], &[])]),
            grouping("3", &[]),
        ];
        let s = dataset_summary(&gs);
        assert_eq!(s.n_examples, 2);
        assert_eq!(s.n_rewritten_questions, 5);
        assert!((s.mean_answers_per_question - 9.0 / 5.0).abs() < 1e-12);
        assert_eq!(s.n_unambiguous_excluded, 1);
    }
}
