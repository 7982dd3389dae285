use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::{ConstraintSet, DecodeError, TokenId};

/// Penn Treebank and Universal Dependencies noun tags.
pub const NOUN_TAGS: &[&str] = &["NN", "NNS", "NNP", "NNPS", "NOUN", "PROPN"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NounSpan {
    pub text: String,
    /// Token range `[start, end)` in the question.
    pub start: usize,
    pub end: usize,
}

/// Maximal runs of noun-tagged tokens, in order, deduplicated by text.
pub fn extract_noun_spans<S: AsRef<str>, T: AsRef<str>>(
    tokens: &[S],
    tags: &[T],
) -> Result<Vec<NounSpan>, DecodeError> {
    if tokens.len() != tags.len() {
        return Err(DecodeError::Argument(format!(
            "{} tokens but {} tags",
            tokens.len(),
            tags.len()
        )));
    }
    let is_noun = |i: usize| NOUN_TAGS.contains(&tags[i].as_ref());
    let mut spans = Vec::new();
    let mut seen = HashSet::new();
    let mut i = 0;
    while i < tokens.len() {
        if !is_noun(i) {
            i += 1;
            continue;
        }
        let start = i;
        while i < tokens.len() && is_noun(i) {
            i += 1;
        }
        let text = tokens[start..i]
            .iter()
            .map(AsRef::as_ref)
            .collect::<Vec<_>>()
            .join(" ");
        if seen.insert(text.clone()) {
            spans.push(NounSpan {
                text,
                start,
                end: i,
            });
        }
    }
    Ok(spans)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledConstraints {
    pub sets: Vec<ConstraintSet>,
    /// Spans that produced no usable token sequence.
    pub dropped: Vec<String>,
}

/// One disjunctive set whose alternatives are the tokenized spans: the
/// output must contain at least one span. `tokenize` returns `None` for
/// text it cannot encode; such spans, and empty ones, are dropped.
pub fn compile_constraints<F>(spans: &[NounSpan], tokenize: F) -> CompiledConstraints
where
    F: Fn(&str) -> Option<Vec<TokenId>>,
{
    let mut alternatives = Vec::new();
    let mut dropped = Vec::new();
    for s in spans {
        match tokenize(&s.text) {
            Some(t) if !t.is_empty() => {
                if !alternatives.contains(&t) {
                    alternatives.push(t);
                }
            }
            _ => dropped.push(s.text.clone()),
        }
    }
    let sets = if alternatives.is_empty() {
        Vec::new()
    } else {
        vec![ConstraintSet::new(alternatives).expect("non-empty alternatives")]
    };
    CompiledConstraints { sets, dropped }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TaggedSentence {
    pub tokens: Vec<String>,
    pub tags: Vec<String>,
}

/// Parses `token<TAB>tag` lines with a blank line between sentences.
pub fn parse_pos_file(text: &str) -> Result<Vec<TaggedSentence>, DecodeError> {
    let mut out = Vec::new();
    let mut cur = TaggedSentence::default();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            if !cur.tokens.is_empty() {
                out.push(std::mem::take(&mut cur));
            }
            continue;
        }
        let (tok, tag) = line.split_once('\t').ok_or_else(|| {
            DecodeError::Argument(format!("POS line {}: expected token<TAB>tag", n + 1))
        })?;
        cur.tokens.push(tok.to_owned());
        cur.tags.push(tag.trim().to_owned());
    }
    if !cur.tokens.is_empty() {
        out.push(cur);
    }
    Ok(out)
}

/// Fallback tagger: a token is `NOUN` if it is in the word list
/// (case-insensitive), otherwise `X`.
#[derive(Debug, Clone, Default)]
pub struct LexiconTagger {
    nouns: BTreeSet<String>,
}

impl LexiconTagger {
    pub fn new<I: IntoIterator<Item = S>, S: AsRef<str>>(nouns: I) -> Self {
        Self {
            nouns: nouns
                .into_iter()
                .map(|s| s.as_ref().to_lowercase())
                .collect(),
        }
    }

    pub fn tag<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<String> {
        tokens
            .iter()
            .map(|t| {
                if self.nouns.contains(&t.as_ref().to_lowercase()) {
                    "NOUN"
                } else {
                    "X"
                }
                .to_owned()
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_noun() {
        let toks = ["Where", "are", "the", "people", "sitting", "?"];
        let tags = ["WRB", "VBP", "DT", "NNS", "VBG", "."];
        let spans = extract_noun_spans(&toks, &tags).unwrap();
        assert_eq!(
            spans,
            vec![NounSpan {
                text: "people".into(),
                start: 3,
                end: 4
            }]
        );
    }

    #[test]
    fn maximal_run_and_dedup() {
        let toks = ["the", "dog", "collar", "and", "dog", "collar"];
        let tags = ["DT", "NN", "NN", "CC", "NN", "NN"];
        let spans = extract_noun_spans(&toks, &tags).unwrap();
        assert_eq!(spans.len(), 1);
        assert_eq!(spans[0].text, "dog collar");
    }

    #[test]
    fn no_nouns_and_mismatch() {
        assert!(extract_noun_spans(&["is", "it"], &["VBZ", "PRP"])
            .unwrap()
            .is_empty());
        assert!(extract_noun_spans(&["a"], &["DT", "NN"]).is_err());
    }

    #[test]
    fn one_disjunctive_set() {
        let spans = vec![
            NounSpan {
                text: "flowers".into(),
                start: 0,
                end: 1,
            },
            NounSpan {
                text: "species".into(),
                start: 1,
                end: 2,
            },
            NounSpan {
                text: "zzz".into(),
                start: 2,
                end: 3,
            },
        ];
        let c = compile_constraints(&spans, |t| match t {
            "flowers" => Some(vec![1]),
            "species" => Some(vec![2]),
            _ => None,
        });
        assert_eq!(c.sets.len(), 1);
        assert_eq!(c.sets[0].alternatives(), &[vec![1], vec![2]]);
        assert_eq!(c.dropped, vec!["zzz".to_string()]);
        assert!(compile_constraints(&[], |_| None).sets.is_empty());
    }

    #[test]
    fn pos_file() {
        let s = parse_pos_file("what\tWP\nflowers\tNNS\n\nwhy\tWRB\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].tags, vec!["WP", "NNS"]);
        assert!(parse_pos_file("no-tab\n").is_err());
    }

    #[test]
    fn lexicon_tagger() {
        let t = LexiconTagger::new(["flowers"]);
        assert_eq!(t.tag(&["What", "Flowers"]), vec!["X", "NOUN"]);
    }
}
