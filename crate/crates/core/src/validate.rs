//! Consistency checks between rankings, candidate sets, and evaluation mode.

use std::collections::HashSet;
use std::fmt;

use crate::config::EvalConfig;
use crate::types::{DocId, RankingSequence, Request};

/// A single inconsistency found while validating a run against a request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    /// A document id appears more than once within one ranking.
    DuplicateDocument {
        ranking_index: usize,
        /// 1-based rank of the repeated occurrence.
        position: usize,
        doc_id: DocId,
    },
    /// A ranked document is not in the request's candidate set.
    UnknownDocument {
        ranking_index: usize,
        /// 1-based rank of the offending document.
        position: usize,
        doc_id: DocId,
    },
    /// The sequence contains no rankings at all.
    EmptySequence,
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::DuplicateDocument {
                ranking_index,
                position,
                doc_id,
            } => write!(
                f,
                "ranking {ranking_index}: duplicate document {doc_id} at position {position}"
            ),
            ValidationIssue::UnknownDocument {
                ranking_index,
                position,
                doc_id,
            } => write!(
                f,
                "ranking {ranking_index}: document {doc_id} at position {position} is not in the candidate set"
            ),
            ValidationIssue::EmptySequence => write!(f, "ranking sequence is empty"),
        }
    }
}

/// Outcome of validating one ranking sequence against its request.
///
/// Violations break Ranking invariants; warnings flag conditions that are
/// tolerated in the current mode. Validation never aborts evaluation by
/// itself; callers decide what to do with the report.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<ValidationIssue>,
    pub warnings: Vec<ValidationIssue>,
}

impl ValidationReport {
    /// True when no violations were found (warnings may still be present).
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.violations.is_empty() && self.warnings.is_empty()
    }
}

/// Checks every ranking in `seq` against `request`'s candidate set.
///
/// Duplicate documents within a ranking are always violations. Documents
/// outside the candidate set are violations in strict mode and warnings
/// otherwise. Pure and idempotent: the same inputs produce the same report.
pub fn validate_request_run(
    request: &Request,
    seq: &RankingSequence,
    config: &EvalConfig,
) -> ValidationReport {
    let mut report = ValidationReport::default();
    if seq.is_empty() {
        report.violations.push(ValidationIssue::EmptySequence);
    }
    for (ranking_index, ranking) in seq.rankings.iter().enumerate() {
        let mut seen: HashSet<&str> = HashSet::with_capacity(ranking.len());
        for (i, doc_id) in ranking.iter().enumerate() {
            let position = i + 1;
            if !seen.insert(doc_id.as_str()) {
                report.violations.push(ValidationIssue::DuplicateDocument {
                    ranking_index,
                    position,
                    doc_id: doc_id.clone(),
                });
            }
            if !request.contains(doc_id) {
                let issue = ValidationIssue::UnknownDocument {
                    ranking_index,
                    position,
                    doc_id: doc_id.clone(),
                };
                if config.strict_candidates {
                    report.violations.push(issue);
                } else {
                    report.warnings.push(issue);
                }
            }
        }
    }
    report
}
