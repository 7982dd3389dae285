//! Structural invariants of [`AnswerGrouping`].
//!
//! Every rejection names exactly one [`Invariant`], whose string form is
//! the machine-readable code the service returns to clients.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::types::AnswerGrouping;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Invariant {
    /// An ambiguous grouping needs at least two groups.
    AmbiguousMinGroups,
    /// A skipped (unambiguous) grouping carries no groups.
    UnambiguousNoGroups,
    /// A skipped grouping must say why.
    SkipReasonRequired,
    GroupNonempty,
    RewriteNonempty,
    GroupsDisjoint,
    DeletedDisjoint,
    IndicesInRange,
    AnswerTextsAligned,
    DuplicateRewrite,
}

impl Invariant {
    pub fn as_str(self) -> &'static str {
        match self {
            Invariant::AmbiguousMinGroups => "ambiguous-min-groups",
            Invariant::UnambiguousNoGroups => "unambiguous-no-groups",
            Invariant::SkipReasonRequired => "skip-reason-required",
            Invariant::GroupNonempty => "group-nonempty",
            Invariant::RewriteNonempty => "rewrite-nonempty",
            Invariant::GroupsDisjoint => "groups-disjoint",
            Invariant::DeletedDisjoint => "deleted-disjoint",
            Invariant::IndicesInRange => "indices-in-range",
            Invariant::AnswerTextsAligned => "answer-texts-aligned",
            Invariant::DuplicateRewrite => "duplicate-rewrite",
        }
    }
}

impl fmt::Display for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub invariant: Invariant,
    pub detail: String,
}

impl Violation {
    fn new(invariant: Invariant, detail: impl Into<String>) -> Self {
        Self {
            invariant,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.invariant, self.detail)
    }
}

/// Checks the invariants that hold without knowing the source example.
pub fn validate_grouping(g: &AnswerGrouping) -> Result<(), Violation> {
    if g.ambiguous {
        if g.groups.len() < 2 {
            return Err(Violation::new(
                Invariant::AmbiguousMinGroups,
                format!("ambiguous grouping has {} group(s)", g.groups.len()),
            ));
        }
    } else {
        if !g.groups.is_empty() {
            return Err(Violation::new(
                Invariant::UnambiguousNoGroups,
                format!("unambiguous grouping has {} group(s)", g.groups.len()),
            ));
        }
        if g.skip_reason
            .as_deref()
            .map_or(true, |r| r.trim().is_empty())
        {
            return Err(Violation::new(
                Invariant::SkipReasonRequired,
                "missing skip reason",
            ));
        }
    }

    let mut seen = BTreeSet::new();
    for (i, group) in g.groups.iter().enumerate() {
        if group.member_indices.is_empty() {
            return Err(Violation::new(
                Invariant::GroupNonempty,
                format!("group {i} is empty"),
            ));
        }
        if group.rewritten_question.trim().is_empty() {
            return Err(Violation::new(
                Invariant::RewriteNonempty,
                format!("group {i} has a blank rewritten question"),
            ));
        }
        if !group.answer_texts.is_empty() && group.answer_texts.len() != group.member_indices.len()
        {
            return Err(Violation::new(
                Invariant::AnswerTextsAligned,
                format!(
                    "group {i} lists {} answer texts for {} indices",
                    group.answer_texts.len(),
                    group.member_indices.len()
                ),
            ));
        }
        for &idx in &group.member_indices {
            if !seen.insert(idx) {
                return Err(Violation::new(
                    Invariant::GroupsDisjoint,
                    format!("answer {idx} appears in more than one group"),
                ));
            }
        }
    }
    if let Some(&idx) = g.deleted_indices.intersection(&seen).next() {
        return Err(Violation::new(
            Invariant::DeletedDisjoint,
            format!("answer {idx} is both grouped and deleted"),
        ));
    }
    Ok(())
}

/// Full validation against the example the grouping annotates: index bounds
/// and distinct rewrites on top of [`validate_grouping`].
pub fn validate_against(g: &AnswerGrouping, n_answers: usize) -> Result<(), Violation> {
    validate_grouping(g)?;
    let out_of_range = g
        .groups
        .iter()
        .flat_map(|gr| gr.member_indices.iter())
        .chain(g.deleted_indices.iter())
        .find(|&&i| i >= n_answers);
    if let Some(&idx) = out_of_range {
        return Err(Violation::new(
            Invariant::IndicesInRange,
            format!("answer index {idx} out of range for {n_answers} answers"),
        ));
    }
    let mut rewrites = BTreeSet::new();
    for (i, group) in g.groups.iter().enumerate() {
        let key = group.rewritten_question.trim().to_lowercase();
        if !rewrites.insert(key) {
            return Err(Violation::new(
                Invariant::DuplicateRewrite,
                format!("group {i} repeats another group's rewritten question"),
            ));
        }
    }
    Ok(())
}
