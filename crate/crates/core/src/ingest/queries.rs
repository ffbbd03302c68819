//! Query files: one JSON object per line describing a query and its
//! candidate documents.
//!
//! ```json
//! {"qid": "q7", "query": "deep learning", "documents": [
//!     {"doc_id": "d1", "relevance": 1, "authors": ["a1", "a2"]},
//!     {"doc_id": "d2", "relevance": 0}
//! ]}
//! ```
//!
//! Relevance must be binary. The `authors` array is optional; when a document
//! has no inline authors and a metadata catalog is supplied, the author list
//! is joined from `authors_for_papers.csv` by doc id.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{ParseError, Warning};
use crate::ingest::metadata::Catalog;
use crate::types::{DocumentRecord, Request};

/// Wire representation of one query line.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryRecord {
    pub qid: String,
    pub query: String,
    pub documents: Vec<QueryDoc>,
}

/// Wire representation of one candidate document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QueryDoc {
    pub doc_id: String,
    pub relevance: i64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub authors: Vec<String>,
}

/// Parses a queries file into requests, joining author lists from `catalog`
/// for documents without inline authors.
pub fn parse_queries_file<R: BufRead>(
    reader: R,
    catalog: Option<&Catalog>,
) -> Result<(Vec<Request>, Vec<Warning>), ParseError> {
    let mut requests = Vec::new();
    let mut warnings = Vec::new();
    let mut seen_qids = std::collections::HashSet::new();

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        let record: QueryRecord =
            serde_json::from_str(&text).map_err(|source| ParseError::Json {
                line: line_no,
                source,
            })?;
        let qid = record.qid.clone();
        if !seen_qids.insert(qid.clone()) {
            return Err(ParseError::DuplicateQuery { line: line_no, qid });
        }

        let mut candidates = Vec::with_capacity(record.documents.len());
        let mut seen_docs = std::collections::HashSet::new();
        for doc in record.documents {
            if !seen_docs.insert(doc.doc_id.clone()) {
                return Err(ParseError::DuplicateCandidate {
                    line: line_no,
                    qid,
                    doc_id: doc.doc_id,
                });
            }
            let relevant = match doc.relevance {
                0 => false,
                1 => true,
                other => {
                    return Err(ParseError::NonBinaryRelevance {
                        line: line_no,
                        qid,
                        doc_id: doc.doc_id,
                        value: other,
                    })
                }
            };
            let authors = if doc.authors.is_empty() {
                match catalog {
                    Some(catalog) => match catalog.author_list(&doc.doc_id) {
                        Some(list) => list,
                        None => {
                            warnings.push(Warning::new(format!(
                                "query {qid}: document {} not in the metadata catalog; author list left empty",
                                doc.doc_id
                            )));
                            Vec::new()
                        }
                    },
                    None => Vec::new(),
                }
            } else {
                doc.authors
            };
            candidates.push(DocumentRecord::new(doc.doc_id, authors, relevant));
        }
        requests.push(Request::new(qid, record.query, candidates));
    }

    Ok((requests, warnings))
}

/// Serializes requests back to the line-delimited query format, with author
/// lists inlined.
pub fn write_queries_file<W: Write>(requests: &[Request], mut writer: W) -> Result<(), ParseError> {
    for request in requests {
        let record = QueryRecord {
            qid: request.qid().clone(),
            query: request.query_text().to_string(),
            documents: request
                .candidates()
                .iter()
                .map(|d| QueryDoc {
                    doc_id: d.doc_id.clone(),
                    relevance: i64::from(d.relevant),
                    authors: d.authors.clone(),
                })
                .collect(),
        };
        serde_json::to_writer(&mut writer, &record).map_err(|e| ParseError::Io(e.into()))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Keeps the queries suitable for evaluation sequences: at least two relevant
/// candidates and a query text of at most four whitespace-delimited tokens.
pub fn filter_queries(requests: Vec<Request>) -> Vec<Request> {
    requests
        .into_iter()
        .filter(|r| r.relevant_count() >= 2 && r.query_text().split_whitespace().count() <= 4)
        .collect()
}
