//! Group definition files: CSV with an `author` and a `gid` column.

use std::io::{Read, Write};

use crate::error::ParseError;
use crate::types::GroupAssignment;

fn column_index(headers: &csv::StringRecord, name: &'static str) -> Result<usize, ParseError> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or(ParseError::MissingColumn { column: name })
}

/// Parses an author-to-group CSV. Duplicate rows repeating the same
/// assignment are accepted; an author mapped to two different groups is an
/// error, since each author belongs to exactly one group.
pub fn parse_group_file<R: Read>(reader: R) -> Result<GroupAssignment, ParseError> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    let headers = csv_reader.headers()?.clone();
    let author_col = column_index(&headers, "author")?;
    let gid_col = column_index(&headers, "gid")?;

    let mut assignment = GroupAssignment::new();
    for record in csv_reader.records() {
        let record = record?;
        let author = record.get(author_col).unwrap_or("").to_string();
        let gid = record.get(gid_col).unwrap_or("").to_string();
        if let Err(existing) = assignment.assign(author.clone(), gid.clone()) {
            return Err(ParseError::ConflictingGroup {
                author,
                existing,
                conflicting: gid,
            });
        }
    }
    Ok(assignment)
}

/// Writes a group assignment back out, rows sorted by author id.
pub fn write_group_file<W: Write>(
    assignment: &GroupAssignment,
    writer: W,
) -> Result<(), ParseError> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer.write_record(["author", "gid"])?;
    for (author, gid) in assignment.iter() {
        csv_writer.write_record([author.as_str(), gid.as_str()])?;
    }
    csv_writer.flush()?;
    Ok(())
}
