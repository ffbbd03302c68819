//! Expected-exposure evaluation for stochastic ranking systems.
//!
//! A ranking system answering repeated impressions of a query distributes
//! user attention — exposure — over the authors of the documents it ranks.
//! This crate measures how far the exposure a system actually delivers to
//! author groups is from what an ideal relevance-respecting randomized policy
//! would deliver, using a position-based browsing model with a continuation
//! probability and relevance-dependent stopping.
//!
//! The pieces:
//!
//! * [`types`] — requests, rankings, group assignments, exposure vectors.
//! * [`exposure`] — per-ranking and per-sequence author exposure, the
//!   closed-form target exposure, and a brute-force enumeration oracle.
//! * [`metrics`] — group aggregation, the expected-exposure distance, its
//!   disparity/relevance decomposition, and run-level summaries.
//! * [`policies`] — baseline ranking policies (deterministic, uniform, ideal
//!   sampler, greedy balancer) and the protocol loop driving them.
//! * [`ingest`] — run files, query files, group/metadata CSVs, click logs,
//!   and report writers.
//!
//! # Example
//!
//! ```
//! use fair_exposure::config::EvalConfig;
//! use fair_exposure::metrics::evaluate_query;
//! use fair_exposure::types::{
//!     DocumentRecord, GroupAssignment, Ranking, RankingSequence, Request,
//! };
//!
//! let request = Request::new(
//!     "q1",
//!     "fairness in ranking",
//!     vec![
//!         DocumentRecord::new("d1", vec!["a1".into()], true),
//!         DocumentRecord::new("d2", vec!["a2".into()], true),
//!         DocumentRecord::new("d3", vec!["a2".into()], false),
//!     ],
//! );
//! let groups: GroupAssignment = [
//!     ("a1".to_string(), "g1".to_string()),
//!     ("a2".to_string(), "g2".to_string()),
//! ]
//! .into_iter()
//! .collect();
//! let seq = RankingSequence::new(
//!     "q1",
//!     vec![Ranking::new(vec!["d1".into(), "d2".into(), "d3".into()])],
//! );
//!
//! let metrics = evaluate_query(&request, &seq, &groups, &EvalConfig::default()).unwrap();
//! assert!((metrics.ee - 0.601041).abs() < 1e-6);
//! ```

pub mod config;
pub mod error;
pub mod exposure;
pub mod ingest;
pub mod metrics;
pub mod policies;
pub mod types;
pub mod validate;

pub use config::EvalConfig;
pub use error::{EvalError, ParseError, Warning};
pub use types::{
    DocumentRecord, ExposureVector, GroupAssignment, GroupExposure, Ranking, RankingSequence,
    Request,
};
