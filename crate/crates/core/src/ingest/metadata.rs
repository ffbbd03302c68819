//! Paper and author metadata: three CSV files tying documents to their
//! ordered author lists plus summary statistics usable as policy features.
//!
//! * `paper_metadata.csv` — `paper_id,title,year,venue,n_citations`
//! * `author_metadata.csv` — `author_id,name,citation_count,paper_count,h_index`
//! * `authors_for_papers.csv` — `paper_id,author_id,position`

use std::collections::BTreeMap;
use std::io::Read;

use crate::error::{ParseError, Warning};
use crate::types::{AuthorId, DocId};

#[derive(Debug, Clone, PartialEq)]
pub struct PaperInfo {
    pub title: String,
    pub year: Option<i32>,
    pub venue: String,
    pub n_citations: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuthorInfo {
    pub name: String,
    pub citation_count: Option<u64>,
    pub paper_count: Option<u64>,
    pub h_index: Option<f64>,
}

/// The joined metadata catalog: per-paper info, per-author info, and the
/// ordered author list of every paper.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Catalog {
    pub papers: BTreeMap<DocId, PaperInfo>,
    pub authors: BTreeMap<AuthorId, AuthorInfo>,
    author_lists: BTreeMap<DocId, Vec<(u64, AuthorId)>>,
}

impl Catalog {
    /// Author list of a paper, ordered by the position column.
    pub fn author_list(&self, doc_id: &str) -> Option<Vec<AuthorId>> {
        self.author_lists
            .get(doc_id)
            .map(|entries| entries.iter().map(|(_, a)| a.clone()).collect())
    }

    pub fn has_paper(&self, doc_id: &str) -> bool {
        self.papers.contains_key(doc_id) || self.author_lists.contains_key(doc_id)
    }
}

fn column_index(headers: &csv::StringRecord, name: &'static str) -> Result<usize, ParseError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or(ParseError::MissingColumn { column: name })
}

fn parse_optional<T: std::str::FromStr>(value: &str) -> Option<T> {
    let trimmed = value.trim();
    if trimmed.is_empty() {
        None
    } else {
        trimmed.parse().ok()
    }
}

/// Parses the three metadata files into a joined catalog.
///
/// Authorship rows referencing unknown papers or authors are kept and
/// reported as warnings; per-paper position gaps are also warnings. Rows with
/// an unparsable position column are an error.
pub fn parse_metadata<R1: Read, R2: Read, R3: Read>(
    paper_metadata: R1,
    author_metadata: R2,
    authors_for_papers: R3,
) -> Result<(Catalog, Vec<Warning>), ParseError> {
    let mut catalog = Catalog::default();
    let mut warnings = Vec::new();

    let mut reader = csv::Reader::from_reader(paper_metadata);
    let headers = reader.headers()?.clone();
    let id_col = column_index(&headers, "paper_id")?;
    let title_col = column_index(&headers, "title")?;
    let year_col = column_index(&headers, "year")?;
    let venue_col = column_index(&headers, "venue")?;
    let citations_col = column_index(&headers, "n_citations")?;
    for record in reader.records() {
        let record = record?;
        let get = |i: usize| record.get(i).unwrap_or("").to_string();
        catalog.papers.insert(
            get(id_col),
            PaperInfo {
                title: get(title_col),
                year: parse_optional(&get(year_col)),
                venue: get(venue_col),
                n_citations: parse_optional(&get(citations_col)),
            },
        );
    }

    let mut reader = csv::Reader::from_reader(author_metadata);
    let headers = reader.headers()?.clone();
    let id_col = column_index(&headers, "author_id")?;
    let name_col = column_index(&headers, "name")?;
    let citations_col = column_index(&headers, "citation_count")?;
    let papers_col = column_index(&headers, "paper_count")?;
    let h_col = column_index(&headers, "h_index")?;
    for record in reader.records() {
        let record = record?;
        let get = |i: usize| record.get(i).unwrap_or("").to_string();
        catalog.authors.insert(
            get(id_col),
            AuthorInfo {
                name: get(name_col),
                citation_count: parse_optional(&get(citations_col)),
                paper_count: parse_optional(&get(papers_col)),
                h_index: parse_optional(&get(h_col)),
            },
        );
    }

    let mut reader = csv::Reader::from_reader(authors_for_papers);
    let headers = reader.headers()?.clone();
    let paper_col = column_index(&headers, "paper_id")?;
    let author_col = column_index(&headers, "author_id")?;
    let position_col = column_index(&headers, "position")?;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let paper_id = record.get(paper_col).unwrap_or("").to_string();
        let author_id = record.get(author_col).unwrap_or("").to_string();
        let position_text = record.get(position_col).unwrap_or("");
        let position: u64 = position_text.trim().parse().map_err(|_| {
            ParseError::InvalidField {
                record: i + 1,
                field: "position",
                message: format!("{position_text:?} is not a nonnegative integer"),
            }
        })?;
        if !catalog.papers.contains_key(&paper_id) {
            warnings.push(Warning::new(format!(
                "authorship row for paper {paper_id} has no paper_metadata entry"
            )));
        }
        if !catalog.authors.contains_key(&author_id) {
            warnings.push(Warning::new(format!(
                "paper {paper_id} references author {author_id} with no author_metadata entry"
            )));
        }
        catalog
            .author_lists
            .entry(paper_id)
            .or_default()
            .push((position, author_id));
    }

    for (paper_id, entries) in &mut catalog.author_lists {
        entries.sort();
        let first = entries.first().map(|(p, _)| *p).unwrap_or(0);
        let contiguous = first <= 1
            && entries
                .windows(2)
                .all(|w| w[1].0 == w[0].0 + 1);
        if !contiguous {
            warnings.push(Warning::new(format!(
                "paper {paper_id} has gaps in its author positions"
            )));
        }
    }

    Ok((catalog, warnings))
}
