//! Parsers and writers for every external file format.
//!
//! All formats are UTF-8. CSV files use a comma separator with a header row;
//! quoted fields are allowed. JSON formats are line-delimited: one object per
//! line, no enclosing array. Parsers never panic on malformed input; every
//! failure is a [`crate::error::ParseError`] carrying the offending line or
//! field, and tolerated oddities come back as [`crate::error::Warning`]s.

pub mod clicks;
pub mod groups;
pub mod metadata;
pub mod queries;
pub mod report;
pub mod run_file;

pub use clicks::{estimate_relevance, parse_clicks_file, ClickRecord};
pub use groups::{parse_group_file, write_group_file};
pub use metadata::{parse_metadata, AuthorInfo, Catalog, PaperInfo};
pub use queries::{filter_queries, parse_queries_file, write_queries_file, QueryRecord};
pub use report::{
    read_leaderboard_records, write_leaderboard_records, write_leaderboard_table, write_plot_data,
    write_query_details, write_report, ReportFormat,
};
pub use run_file::{load_run_file, parse_run_file, write_run_file, RunData, RunLine};
