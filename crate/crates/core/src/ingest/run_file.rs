//! Run files: the rankings a system submitted, one JSON object per line.
//!
//! Each line carries three keys:
//!
//! ```json
//! {"q_num": "7.0", "qid": "q7", "ranking": ["d2", "d1", "d3"]}
//! ```
//!
//! `q_num` is `<sequence id>.<impression index>`; the index is split off at
//! the final dot. Impression indices within a sequence must be unique and are
//! expected to be dense and increasing, starting at 0 or 1 (auto-detected per
//! sequence); gaps or disorder are warnings, duplicates are errors.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ParseError, Warning};
use crate::types::{Qid, Ranking, RankingSequence};

/// One parsed run-file line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLine {
    pub sequence_id: String,
    pub impression_index: u64,
    pub qid: Qid,
    pub ranking: Vec<String>,
}

/// Wire representation of one line.
#[derive(Serialize, Deserialize)]
struct RawRunLine {
    q_num: String,
    qid: String,
    ranking: Vec<String>,
}

/// A parsed run file: its identifier plus every line in file order.
///
/// Lines are kept verbatim so that re-serialization reproduces the input; the
/// grouped view used by evaluation is derived on demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunData {
    pub run_id: String,
    pub lines: Vec<RunLine>,
}

impl RunData {
    /// Groups lines into per-query ranking sequences, ordered by
    /// `(sequence_id, impression_index)` within each query.
    pub fn sequences(&self) -> BTreeMap<Qid, RankingSequence> {
        let mut grouped: BTreeMap<Qid, Vec<&RunLine>> = BTreeMap::new();
        for line in &self.lines {
            grouped.entry(line.qid.clone()).or_default().push(line);
        }
        grouped
            .into_iter()
            .map(|(qid, mut lines)| {
                lines.sort_by(|a, b| {
                    a.sequence_id
                        .cmp(&b.sequence_id)
                        .then(a.impression_index.cmp(&b.impression_index))
                });
                let rankings = lines
                    .into_iter()
                    .map(|l| Ranking::new(l.ranking.clone()))
                    .collect();
                (qid.clone(), RankingSequence::new(qid, rankings))
            })
            .collect()
    }
}

/// Parses a run file from a line source. `run_id` conventionally comes from
/// the file name; [`load_run_file`] derives it automatically.
pub fn parse_run_file<R: BufRead>(
    reader: R,
    run_id: impl Into<String>,
) -> Result<(RunData, Vec<Warning>), ParseError> {
    let mut lines = Vec::new();
    let mut warnings = Vec::new();
    let mut seen: HashMap<(String, u64), usize> = HashMap::new();
    let mut last_index: HashMap<String, (u64, usize)> = HashMap::new();

    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let text = line?;
        if text.trim().is_empty() {
            continue;
        }
        let raw: RawRunLine =
            serde_json::from_str(&text).map_err(|source| ParseError::Json {
                line: line_no,
                source,
            })?;
        let (sequence_id, index_text) =
            raw.q_num.rsplit_once('.').ok_or_else(|| ParseError::MalformedQNum {
                line: line_no,
                q_num: raw.q_num.clone(),
            })?;
        let impression_index: u64 =
            index_text.parse().map_err(|_| ParseError::MalformedQNum {
                line: line_no,
                q_num: raw.q_num.clone(),
            })?;

        let key = (sequence_id.to_string(), impression_index);
        if seen.insert(key, line_no).is_some() {
            return Err(ParseError::DuplicateImpression {
                line: line_no,
                sequence_id: sequence_id.to_string(),
                index: impression_index,
            });
        }

        match last_index.get(sequence_id) {
            None => {
                if impression_index > 1 {
                    warnings.push(Warning::new(format!(
                        "line {line_no}: sequence {sequence_id} starts at impression {impression_index}, expected 0 or 1"
                    )));
                }
            }
            Some(&(prev, prev_line)) => {
                if impression_index != prev + 1 {
                    warnings.push(Warning::new(format!(
                        "line {line_no}: sequence {sequence_id} jumps from impression {prev} (line {prev_line}) to {impression_index}"
                    )));
                }
            }
        }
        last_index.insert(sequence_id.to_string(), (impression_index, line_no));

        lines.push(RunLine {
            sequence_id: sequence_id.to_string(),
            impression_index,
            qid: raw.qid,
            ranking: raw.ranking,
        });
    }

    Ok((
        RunData {
            run_id: run_id.into(),
            lines,
        },
        warnings,
    ))
}

/// Opens a run file, deriving the run id from the file stem
/// (`runs/mysystem.jsonl` -> `mysystem`).
pub fn load_run_file(path: &Path) -> Result<(RunData, Vec<Warning>), ParseError> {
    let run_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string_lossy().into_owned());
    let file = std::fs::File::open(path)?;
    parse_run_file(std::io::BufReader::new(file), run_id)
}

/// Serializes a run back to the line-delimited format. Parsing the output
/// reproduces `data` exactly.
pub fn write_run_file<W: Write>(data: &RunData, mut writer: W) -> Result<(), ParseError> {
    for line in &data.lines {
        let raw = RawRunLine {
            q_num: format!("{}.{}", line.sequence_id, line.impression_index),
            qid: line.qid.clone(),
            ranking: line.ranking.clone(),
        };
        serde_json::to_writer(&mut writer, &raw).map_err(|e| ParseError::Io(e.into()))?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Builds run lines from simulator output: sequence id equals the qid and
/// impression indices count from 0.
pub fn run_data_from_sequences(
    run_id: impl Into<String>,
    sequences: &BTreeMap<Qid, RankingSequence>,
) -> RunData {
    let mut lines = Vec::new();
    for (qid, seq) in sequences {
        for (i, ranking) in seq.rankings.iter().enumerate() {
            lines.push(RunLine {
                sequence_id: qid.clone(),
                impression_index: i as u64,
                qid: qid.clone(),
                ranking: ranking.items().to_vec(),
            });
        }
    }
    RunData {
        run_id: run_id.into(),
        lines,
    }
}
