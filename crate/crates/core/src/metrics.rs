//! Group-level aggregation and the expected-exposure distance metric.
//!
//! Author exposure is summed into group exposure, and a system is scored by
//! the Euclidean distance between its group-exposure vector and the target
//! group-exposure vector. Squaring that distance and expanding gives
//!
//! `ee^2 = disparity - 2 * relevance + sum_g (target_g)^2`
//!
//! where `disparity = sum_g system_g^2` (lower is better) and
//! `relevance = sum_g system_g * target_g` (higher is better). The last term
//! does not depend on the system, so runs can be compared on the
//! disparity/relevance plane.

use std::collections::BTreeMap;

use crate::config::EvalConfig;
use crate::error::{EvalError, Warning};
use crate::exposure::{sequence_exposure, target_exposure};
use crate::types::{
    ExposureVector, GroupAssignment, GroupExposure, Qid, RankingSequence, Request,
};
use crate::validate::validate_request_run;

/// Sums author exposure into group exposure. Exposure of authors without a
/// group assignment accumulates into the second component and joins no group,
/// so mass is conserved: `sum_g result.0 + result.1 == exposure.total()`.
pub fn group_exposure(exposure: &ExposureVector, groups: &GroupAssignment) -> (GroupExposure, f64) {
    let mut grouped = GroupExposure::new();
    let mut unassigned = 0.0;
    for (author, amount) in exposure.iter() {
        match groups.group_of(author) {
            Some(group) => grouped.add(group.clone(), amount),
            None => unassigned += amount,
        }
    }
    (grouped, unassigned)
}

/// Euclidean distance between system and target group exposure, taken over
/// the union of group ids (a group absent from one side counts as zero).
pub fn ee_metric(system: &GroupExposure, target: &GroupExposure) -> f64 {
    let mut sum = 0.0;
    for group in system.group_union(target) {
        let diff = system.get(group) - target.get(group);
        sum += diff * diff;
    }
    sum.sqrt()
}

/// Splits the squared distance into its system-dependent components:
/// `(disparity, relevance) = (sum_g system_g^2, sum_g system_g * target_g)`.
pub fn decompose(system: &GroupExposure, target: &GroupExposure) -> (f64, f64) {
    let mut disparity = 0.0;
    let mut relevance = 0.0;
    for group in system.group_union(target) {
        let s = system.get(group);
        disparity += s * s;
        relevance += s * target.get(group);
    }
    (disparity, relevance)
}

/// Per-query evaluation results.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryMetrics {
    pub qid: Qid,
    /// Distance between system and target group exposure; lower is better.
    pub ee: f64,
    /// `sum_g system_g^2`; lower is better.
    pub disparity: f64,
    /// `sum_g system_g * target_g`; higher is better.
    pub relevance: f64,
    pub system_group_exposure: GroupExposure,
    pub target_group_exposure: GroupExposure,
    /// System exposure delivered to authors without a group assignment.
    /// Excluded from every group sum and from the metric.
    pub unassigned_author_exposure: f64,
}

/// Evaluates one query: system exposure over the emitted rankings against the
/// target computed for the same impression count.
///
/// In strict mode, validation violations abort with
/// [`EvalError::ValidationFailed`]. Otherwise evaluation proceeds over the
/// rankings as given (out-of-candidate documents absorb browsing mass but
/// credit no author).
pub fn evaluate_query(
    request: &Request,
    seq: &RankingSequence,
    groups: &GroupAssignment,
    config: &EvalConfig,
) -> Result<QueryMetrics, EvalError> {
    if seq.is_empty() {
        return Err(EvalError::EmptySequence {
            qid: seq.qid.clone(),
        });
    }
    if config.strict_candidates {
        let report = validate_request_run(request, seq, config);
        if !report.is_clean() {
            return Err(EvalError::ValidationFailed {
                qid: request.qid().clone(),
                issues: report.violations,
            });
        }
    }

    let system_authors = sequence_exposure(seq, request, config)?;
    let target_authors = target_exposure(request, seq.len(), config)?;

    let (system_groups, unassigned) = group_exposure(&system_authors, groups);
    let (target_groups, _) = group_exposure(&target_authors, groups);

    let ee = ee_metric(&system_groups, &target_groups);
    let (disparity, relevance) = decompose(&system_groups, &target_groups);

    Ok(QueryMetrics {
        qid: request.qid().clone(),
        ee,
        disparity,
        relevance,
        system_group_exposure: system_groups,
        target_group_exposure: target_groups,
        unassigned_author_exposure: unassigned,
    })
}

/// Whole-run evaluation results: per-query metrics plus their arithmetic
/// means. `per_query` is sorted by qid, making the reduction order (and thus
/// the means) independent of input order.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub run_id: String,
    pub per_query: Vec<QueryMetrics>,
    pub mean_ee: f64,
    pub mean_disparity: f64,
    pub mean_relevance: f64,
}

impl RunMetrics {
    /// Assembles run metrics from per-query results, sorting by qid and
    /// averaging. Means over an empty query set are NaN.
    pub fn from_query_metrics(run_id: impl Into<String>, mut per_query: Vec<QueryMetrics>) -> Self {
        per_query.sort_by(|a, b| a.qid.cmp(&b.qid));
        let n = per_query.len() as f64;
        let mean = |f: fn(&QueryMetrics) -> f64| per_query.iter().map(f).sum::<f64>() / n;
        Self {
            mean_ee: mean(|q| q.ee),
            mean_disparity: mean(|q| q.disparity),
            mean_relevance: mean(|q| q.relevance),
            run_id: run_id.into(),
            per_query,
        }
    }
}

/// Request/sequence pairs produced by [`match_run`], sorted by qid.
pub type MatchedRun<'a> = Vec<(&'a Request, &'a RankingSequence)>;

/// Pairs requests with their run sequences by qid, sorted by qid.
///
/// In strict mode any mismatch in either direction is an error; otherwise
/// unmatched entries are skipped with a warning.
pub fn match_run<'a>(
    run_id: &str,
    requests: &'a [Request],
    runs: &'a BTreeMap<Qid, RankingSequence>,
    config: &EvalConfig,
) -> Result<(MatchedRun<'a>, Vec<Warning>), EvalError> {
    let mut warnings = Vec::new();
    let by_qid: BTreeMap<&Qid, &Request> = requests.iter().map(|r| (r.qid(), r)).collect();

    for qid in runs.keys() {
        if !by_qid.contains_key(qid) {
            if config.strict_candidates {
                return Err(EvalError::UnknownQuery { qid: qid.clone() });
            }
            warnings.push(Warning::new(format!(
                "run {run_id}: sequence for unknown query {qid} skipped"
            )));
        }
    }

    let mut pairs = Vec::new();
    for (qid, request) in &by_qid {
        match runs.get(*qid) {
            Some(seq) => pairs.push((*request, seq)),
            None => {
                if config.strict_candidates {
                    return Err(EvalError::MissingQuery {
                        qid: (*qid).clone(),
                    });
                }
                warnings.push(Warning::new(format!(
                    "run {run_id}: no sequence for query {qid}, skipped"
                )));
            }
        }
    }
    Ok((pairs, warnings))
}

/// Evaluates a whole run against a query set.
///
/// Queries and sequences are matched by qid per [`match_run`]; means are
/// taken over the evaluated queries.
pub fn evaluate_run(
    run_id: &str,
    requests: &[Request],
    runs: &BTreeMap<Qid, RankingSequence>,
    groups: &GroupAssignment,
    config: &EvalConfig,
) -> Result<(RunMetrics, Vec<Warning>), EvalError> {
    let (pairs, warnings) = match_run(run_id, requests, runs, config)?;
    let mut per_query = Vec::new();
    for (request, seq) in pairs {
        per_query.push(evaluate_query(request, seq, groups, config)?);
    }
    Ok((RunMetrics::from_query_metrics(run_id, per_query), warnings))
}

/// One leaderboard entry.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LeaderboardRow {
    pub run_id: String,
    pub mean_ee: f64,
    pub mean_disparity: f64,
    pub mean_relevance: f64,
    pub num_queries: usize,
}

impl From<&RunMetrics> for LeaderboardRow {
    fn from(rm: &RunMetrics) -> Self {
        Self {
            run_id: rm.run_id.clone(),
            mean_ee: rm.mean_ee,
            mean_disparity: rm.mean_disparity,
            mean_relevance: rm.mean_relevance,
            num_queries: rm.per_query.len(),
        }
    }
}

/// Orders runs by ascending mean distance (smaller is better), breaking ties
/// lexicographically by run id.
pub fn leaderboard(runs: &[RunMetrics]) -> Vec<LeaderboardRow> {
    let mut rows: Vec<LeaderboardRow> = runs.iter().map(LeaderboardRow::from).collect();
    sort_leaderboard(&mut rows);
    rows
}

/// Sorting rule shared by [`leaderboard`] and report merging.
pub fn sort_leaderboard(rows: &mut [LeaderboardRow]) {
    rows.sort_by(|a, b| {
        a.mean_ee
            .total_cmp(&b.mean_ee)
            .then_with(|| a.run_id.cmp(&b.run_id))
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{DocumentRecord, Ranking};
    use approx::assert_abs_diff_eq;

    fn ev(pairs: &[(&str, f64)]) -> ExposureVector {
        pairs.iter().map(|(a, v)| (a.to_string(), *v)).collect()
    }

    fn ge(pairs: &[(&str, f64)]) -> GroupExposure {
        pairs.iter().map(|(g, v)| (g.to_string(), *v)).collect()
    }

    fn groups(pairs: &[(&str, &str)]) -> GroupAssignment {
        pairs
            .iter()
            .map(|(a, g)| (a.to_string(), g.to_string()))
            .collect()
    }

    #[test]
    fn group_exposure_partitions() {
        let (g, unassigned) = group_exposure(
            &ev(&[("a1", 1.0), ("a2", 0.15)]),
            &groups(&[("a1", "g1"), ("a2", "g2")]),
        );
        assert_eq!(g.get("g1"), 1.0);
        assert_eq!(g.get("g2"), 0.15);
        assert_eq!(unassigned, 0.0);
    }

    #[test]
    fn group_exposure_sums_within_group() {
        let (g, unassigned) = group_exposure(
            &ev(&[("a1", 1.0), ("a2", 0.5)]),
            &groups(&[("a1", "g1"), ("a2", "g1")]),
        );
        assert_eq!(g.get("g1"), 1.5);
        assert_eq!(g.len(), 1);
        assert_eq!(unassigned, 0.0);
    }

    #[test]
    fn group_exposure_spills_unassigned() {
        let (g, unassigned) =
            group_exposure(&ev(&[("a1", 1.0), ("a3", 0.2)]), &groups(&[("a1", "g1")]));
        assert_eq!(g.get("g1"), 1.0);
        assert_eq!(g.len(), 1);
        assert_abs_diff_eq!(unassigned, 0.2, epsilon = 0.0);
    }

    #[test]
    fn ee_zero_iff_equal() {
        let a = ge(&[("g1", 1.0), ("g2", 0.5)]);
        assert_eq!(ee_metric(&a, &a), 0.0);
        let b = ge(&[("g1", 1.0), ("g2", 0.6)]);
        assert!(ee_metric(&a, &b) > 0.0);
    }

    #[test]
    fn ee_simple_arithmetic() {
        let system = ge(&[("g1", 2.0), ("g2", 0.0)]);
        let target = ge(&[("g1", 1.0), ("g2", 1.0)]);
        assert_abs_diff_eq!(ee_metric(&system, &target), 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn ee_worked_scenario() {
        let system = ge(&[("g1", 1.0), ("g2", 0.1725)]);
        let target = ge(&[("g1", 0.575), ("g2", 0.5975)]);
        assert_abs_diff_eq!(ee_metric(&system, &target), 0.601041, epsilon = 1e-6);
    }

    #[test]
    fn ee_handles_disjoint_groups() {
        // A group present only in the target contributes its full mass.
        let system = ge(&[("g1", 1.0)]);
        let target = ge(&[("g2", 1.0)]);
        assert_abs_diff_eq!(ee_metric(&system, &target), 2.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn decompose_simple_arithmetic() {
        let system = ge(&[("g1", 1.0), ("g2", 2.0)]);
        let target = ge(&[("g1", 2.0), ("g2", 1.0)]);
        assert_eq!(decompose(&system, &target), (5.0, 4.0));
    }

    #[test]
    fn decompose_all_zero_system() {
        let system = GroupExposure::new();
        let target = ge(&[("g1", 2.0)]);
        assert_eq!(decompose(&system, &target), (0.0, 0.0));
    }

    #[test]
    fn decompose_worked_scenario_and_identity() {
        let system = ge(&[("g1", 1.0), ("g2", 0.1725)]);
        let target = ge(&[("g1", 0.575), ("g2", 0.5975)]);
        let (disparity, relevance) = decompose(&system, &target);
        assert_abs_diff_eq!(disparity, 1.029756, epsilon = 1e-6);
        assert_abs_diff_eq!(relevance, 0.678069, epsilon = 1e-6);
        let ee = ee_metric(&system, &target);
        let target_sq: f64 = target.iter().map(|(_, v)| v * v).sum();
        assert_abs_diff_eq!(ee * ee, disparity - 2.0 * relevance + target_sq, epsilon = 1e-9);
    }

    fn worked_request() -> Request {
        Request::new(
            "q1",
            "worked scenario",
            vec![
                DocumentRecord::new("d1", vec!["a1".into()], true),
                DocumentRecord::new("d2", vec!["a2".into()], true),
                DocumentRecord::new("d3", vec!["a2".into()], false),
            ],
        )
    }

    fn worked_groups() -> GroupAssignment {
        groups(&[("a1", "g1"), ("a2", "g2")])
    }

    fn ranking(ids: &[&str]) -> Ranking {
        Ranking::new(ids.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn evaluate_query_worked_scenario() {
        let req = worked_request();
        let seq = RankingSequence::new("q1", vec![ranking(&["d1", "d2", "d3"])]);
        let qm = evaluate_query(&req, &seq, &worked_groups(), &EvalConfig::default()).unwrap();
        assert_abs_diff_eq!(qm.system_group_exposure.get("g1"), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(qm.system_group_exposure.get("g2"), 0.1725, epsilon = 1e-12);
        assert_abs_diff_eq!(qm.target_group_exposure.get("g1"), 0.575, epsilon = 1e-12);
        assert_abs_diff_eq!(qm.target_group_exposure.get("g2"), 0.5975, epsilon = 1e-12);
        assert_abs_diff_eq!(qm.ee, 0.601041, epsilon = 1e-6);
        assert_abs_diff_eq!(qm.disparity, 1.029756, epsilon = 1e-6);
        assert_abs_diff_eq!(qm.relevance, 0.678069, epsilon = 1e-6);
        assert_eq!(qm.unassigned_author_exposure, 0.0);
    }

    #[test]
    fn evaluate_query_exhaustive_ideal_sequence_scores_zero() {
        let req = worked_request();
        let perms = crate::exposure::monotone_permutations(&req).unwrap();
        let seq = RankingSequence::new("q1", perms);
        let qm = evaluate_query(&req, &seq, &worked_groups(), &EvalConfig::default()).unwrap();
        assert!(qm.ee < 1e-9, "ee = {}", qm.ee);
    }

    #[test]
    fn evaluate_query_scales_linearly_in_repeats() {
        let req = worked_request();
        let g = worked_groups();
        let config = EvalConfig::default();
        let base = evaluate_query(
            &req,
            &RankingSequence::new("q1", vec![ranking(&["d1", "d2", "d3"])]),
            &g,
            &config,
        )
        .unwrap();
        for k in [2usize, 5] {
            let seq = RankingSequence::new("q1", vec![ranking(&["d1", "d2", "d3"]); k]);
            let qm = evaluate_query(&req, &seq, &g, &config).unwrap();
            assert_abs_diff_eq!(qm.ee, base.ee * k as f64, epsilon = 1e-9);
        }
    }

    #[test]
    fn evaluate_query_strict_propagates_validation() {
        let req = worked_request();
        let seq = RankingSequence::new("q1", vec![ranking(&["d1", "dX", "d3"])]);
        let strict = EvalConfig::default().with_strict(true);
        assert!(matches!(
            evaluate_query(&req, &seq, &worked_groups(), &strict),
            Err(EvalError::ValidationFailed { .. })
        ));
        // Lenient mode evaluates the same sequence.
        assert!(evaluate_query(&req, &seq, &worked_groups(), &EvalConfig::default()).is_ok());
    }

    #[test]
    fn evaluate_run_single_query_mean() {
        let req = worked_request();
        let mut runs = BTreeMap::new();
        runs.insert(
            "q1".to_string(),
            RankingSequence::new("q1", vec![ranking(&["d1", "d2", "d3"])]),
        );
        let (rm, warnings) = evaluate_run(
            "runA",
            std::slice::from_ref(&req),
            &runs,
            &worked_groups(),
            &EvalConfig::default(),
        )
        .unwrap();
        assert!(warnings.is_empty());
        assert_eq!(rm.per_query.len(), 1);
        assert_abs_diff_eq!(rm.mean_ee, rm.per_query[0].ee, epsilon = 0.0);
    }

    #[test]
    fn evaluate_run_skips_missing_queries_when_lenient() {
        let req_a = worked_request();
        let req_b = Request::new(
            "q2",
            "other",
            vec![DocumentRecord::new("d1", vec!["a1".into()], true)],
        );
        let mut runs = BTreeMap::new();
        runs.insert(
            "q1".to_string(),
            RankingSequence::new("q1", vec![ranking(&["d1", "d2", "d3"])]),
        );
        let requests = vec![req_a, req_b];
        let g = worked_groups();

        let (rm, warnings) =
            evaluate_run("runA", &requests, &runs, &g, &EvalConfig::default()).unwrap();
        assert_eq!(rm.per_query.len(), 1);
        assert_eq!(warnings.len(), 1);

        let strict = EvalConfig::default().with_strict(true);
        assert!(matches!(
            evaluate_run("runA", &requests, &runs, &g, &strict),
            Err(EvalError::MissingQuery { .. })
        ));
    }

    #[test]
    fn evaluate_run_mean_of_two_queries() {
        let q1 = QueryMetrics {
            qid: "q1".into(),
            ee: 0.4,
            disparity: 1.0,
            relevance: 0.5,
            system_group_exposure: GroupExposure::new(),
            target_group_exposure: GroupExposure::new(),
            unassigned_author_exposure: 0.0,
        };
        let q2 = QueryMetrics {
            qid: "q2".into(),
            ee: 0.6,
            ..q1.clone()
        };
        let rm = RunMetrics::from_query_metrics("r", vec![q2, q1]);
        assert_abs_diff_eq!(rm.mean_ee, 0.5, epsilon = 1e-12);
        assert_eq!(rm.per_query[0].qid, "q1");
    }

    #[test]
    fn leaderboard_sorts_ascending_with_ties_by_run_id() {
        let mk = |id: &str, ee: f64| RunMetrics {
            run_id: id.into(),
            per_query: vec![],
            mean_ee: ee,
            mean_disparity: 0.0,
            mean_relevance: 0.0,
        };
        let rows = leaderboard(&[mk("B", 0.5), mk("A", 0.7)]);
        assert_eq!(rows[0].run_id, "B");
        assert_eq!(rows[1].run_id, "A");

        let rows = leaderboard(&[mk("x", 0.5), mk("a", 0.5)]);
        assert_eq!(rows[0].run_id, "a");
        assert_eq!(rows[1].run_id, "x");

        assert!(leaderboard(&[]).is_empty());
    }
}
