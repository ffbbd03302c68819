//! Error types shared across the crate.

use thiserror::Error;

use crate::validate::ValidationIssue;

/// Errors raised by the evaluation kernel (configuration, exposure, metrics).
#[derive(Debug, Error)]
pub enum EvalError {
    #[error("continuation probability must lie in [0, 1], got {0}")]
    InvalidContinuation(f64),

    #[error(
        "stop probabilities must satisfy 0 <= nonrelevant ({nonrelevant}) <= relevant ({relevant}) <= 1"
    )]
    InvalidStopProbabilities { relevant: f64, nonrelevant: f64 },

    #[error("query {qid}: ranking refers to document {doc_id} outside the candidate set")]
    UnknownDocument { qid: String, doc_id: String },

    #[error("query {qid}: candidate set is empty")]
    EmptyCandidates { qid: String },

    #[error("query {qid}: ranking sequence is empty")]
    EmptySequence { qid: String },

    #[error(
        "query {qid}: {count} candidates exceed the exhaustive enumeration cap of {cap}"
    )]
    EnumerationCapExceeded { qid: String, count: usize, cap: usize },

    #[error("query {qid}: run failed validation: {}", format_issues(.issues))]
    ValidationFailed { qid: String, issues: Vec<ValidationIssue> },

    #[error("run contains sequence for unknown query {qid}")]
    UnknownQuery { qid: String },

    #[error("run is missing a sequence for query {qid}")]
    MissingQuery { qid: String },
}

fn format_issues(issues: &[ValidationIssue]) -> String {
    let mut out = String::new();
    for (i, issue) in issues.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        out.push_str(&issue.to_string());
        if i == 2 && issues.len() > 3 {
            out.push_str(&format!("; ... ({} more)", issues.len() - 3));
            break;
        }
    }
    out
}

/// Errors raised while parsing external files. Every variant carries enough
/// location information to point at the offending line or field.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: invalid JSON: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },

    #[error("line {line}: q_num {q_num:?} is not of the form <sequence id>.<impression index>")]
    MalformedQNum { line: usize, q_num: String },

    #[error("line {line}: duplicate impression {index} in sequence {sequence_id}")]
    DuplicateImpression {
        line: usize,
        sequence_id: String,
        index: u64,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("missing required column {column:?}")]
    MissingColumn { column: &'static str },

    #[error("record {record}: field {field:?}: {message}")]
    InvalidField {
        record: usize,
        field: &'static str,
        message: String,
    },

    #[error("author {author} is assigned to both group {existing} and group {conflicting}")]
    ConflictingGroup {
        author: String,
        existing: String,
        conflicting: String,
    },

    #[error("line {line}: duplicate query {qid}")]
    DuplicateQuery { line: usize, qid: String },

    #[error("line {line}: query {qid}: candidate document {doc_id} listed twice")]
    DuplicateCandidate {
        line: usize,
        qid: String,
        doc_id: String,
    },

    #[error("line {line}: query {qid}, document {doc_id}: relevance grade {value} is not binary (0 or 1)")]
    NonBinaryRelevance {
        line: usize,
        qid: String,
        doc_id: String,
        value: i64,
    },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// A non-fatal problem noticed while parsing or evaluating. Warnings never
/// abort processing; callers decide whether to surface them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub message: String,
}

impl Warning {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "warning: {}", self.message)
    }
}
