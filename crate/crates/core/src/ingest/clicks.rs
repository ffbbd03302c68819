//! Click logs and propensity-weighted relevance estimation.
//!
//! Click logs are CSV with columns `qid,doc_id,position,clicked,propensity`:
//! one row per impression of a query-document pair, `clicked` as `0`/`1` (or
//! `true`/`false`), `position` the 1-based rank at which the document was
//! shown, and `propensity` the estimated examination probability of that
//! rank, in `(0, 1]`.

use std::collections::BTreeMap;
use std::io::Read;

use crate::error::ParseError;
use crate::types::{DocId, Qid};

/// One logged impression of a query-document pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickRecord {
    pub qid: Qid,
    pub doc_id: DocId,
    /// 1-based rank at which the document was shown.
    pub position: u64,
    pub clicked: bool,
    /// Examination propensity of the rank, in `(0, 1]`.
    pub propensity: f64,
}

fn column_index(headers: &csv::StringRecord, name: &'static str) -> Result<usize, ParseError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or(ParseError::MissingColumn { column: name })
}

/// Parses a click log.
pub fn parse_clicks_file<R: Read>(reader: R) -> Result<Vec<ClickRecord>, ParseError> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let qid_col = column_index(&headers, "qid")?;
    let doc_col = column_index(&headers, "doc_id")?;
    let position_col = column_index(&headers, "position")?;
    let clicked_col = column_index(&headers, "clicked")?;
    let propensity_col = column_index(&headers, "propensity")?;

    let mut records = Vec::new();
    for (i, record) in csv_reader.records().enumerate() {
        let record = record?;
        let record_no = i + 1;
        let field = |col: usize| record.get(col).unwrap_or("").trim();

        let clicked = match field(clicked_col) {
            "0" | "false" => false,
            "1" | "true" => true,
            other => {
                return Err(ParseError::InvalidField {
                    record: record_no,
                    field: "clicked",
                    message: format!("{other:?} is not 0/1 or true/false"),
                })
            }
        };
        let position: u64 = field(position_col).parse().map_err(|_| {
            ParseError::InvalidField {
                record: record_no,
                field: "position",
                message: format!("{:?} is not a positive integer", field(position_col)),
            }
        })?;
        let propensity: f64 = field(propensity_col).parse().map_err(|_| {
            ParseError::InvalidField {
                record: record_no,
                field: "propensity",
                message: format!("{:?} is not a number", field(propensity_col)),
            }
        })?;
        if !(propensity > 0.0 && propensity <= 1.0) {
            return Err(ParseError::InvalidField {
                record: record_no,
                field: "propensity",
                message: format!("{propensity} is outside (0, 1]"),
            });
        }

        records.push(ClickRecord {
            qid: field(qid_col).to_string(),
            doc_id: field(doc_col).to_string(),
            position,
            clicked,
            propensity,
        });
    }
    Ok(records)
}

/// Estimates binary relevance from click logs.
///
/// Per query-document pair the score is the inverse-propensity-weighted click
/// rate: `sum(clicked / propensity) / sum(1 / propensity)` over all logged
/// impressions of the pair. Weighting by inverse propensity corrects for
/// documents shown at poorly examined ranks. A pair is relevant when its
/// score reaches `threshold`.
///
/// Addends are summed in a canonical order, so the result is bit-identical
/// under any permutation of the input records.
pub fn estimate_relevance(
    clicks: &[ClickRecord],
    threshold: f64,
) -> BTreeMap<(Qid, DocId), bool> {
    let mut weights: BTreeMap<(Qid, DocId), Vec<(bool, f64)>> = BTreeMap::new();
    for record in clicks {
        weights
            .entry((record.qid.clone(), record.doc_id.clone()))
            .or_default()
            .push((record.clicked, 1.0 / record.propensity));
    }
    weights
        .into_iter()
        .map(|(key, mut addends)| {
            addends.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
            let mut clicked_mass = 0.0;
            let mut total_mass = 0.0;
            for (clicked, inverse) in addends {
                if clicked {
                    clicked_mass += inverse;
                }
                total_mass += inverse;
            }
            (key, clicked_mass / total_mass >= threshold)
        })
        .collect()
}
