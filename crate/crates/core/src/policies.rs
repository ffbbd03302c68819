//! Baseline ranking policies and the protocol loop that drives them.
//!
//! A policy answers each impression of a query with a full permutation of the
//! candidate set. Policies may depend on the rankings already emitted for the
//! same query (the greedy balancer does), so one policy instance serves one
//! query sequence. Distinct sequences are independent and may run
//! concurrently.
//!
//! Randomness contract: every stochastic decision comes from a ChaCha8 stream
//! seeded with `SHA-256(seed_le || qid || impression_index_le)`. Both ChaCha8
//! and SHA-256 are portable, publicly documented algorithms, so identical
//! seeds reproduce identical rankings on any platform, regardless of the
//! order in which queries or impressions are generated.

use std::collections::BTreeMap;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::config::EvalConfig;
use crate::exposure::{ranking_exposure, target_exposure};
use crate::types::{ExposureVector, Qid, Ranking, RankingSequence, Request};

/// The built-in baseline policies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    /// Relevant documents before non-relevant, ties by ascending doc id.
    /// Ignores history: every impression is identical.
    DeterministicRelevance,
    /// A uniformly random permutation of the candidate set.
    UniformRandom,
    /// A uniform draw from the permutations whose relevance grades are
    /// non-increasing by rank: the ideal randomized policy.
    IdealSampler,
    /// Relevance-major ordering that rotates documents by their authors'
    /// exposure deficit (target so far minus delivered so far), amortizing
    /// exposure across impressions. Deficits are tracked per author, not per
    /// group, so the policy needs no knowledge of group definitions.
    GreedyBalancer,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::DeterministicRelevance,
        PolicyKind::UniformRandom,
        PolicyKind::IdealSampler,
        PolicyKind::GreedyBalancer,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::DeterministicRelevance => "deterministic-relevance",
            PolicyKind::UniformRandom => "uniform-random",
            PolicyKind::IdealSampler => "ideal-sampler",
            PolicyKind::GreedyBalancer => "greedy-balancer",
        }
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .iter()
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| {
                format!(
                    "unknown policy {s:?}; expected one of: {}",
                    PolicyKind::ALL.map(|k| k.name()).join(", ")
                )
            })
    }
}

/// A policy choice plus the seed that fully determines its randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub seed: u64,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind, seed: u64) -> Self {
        Self { kind, seed }
    }
}

fn impression_rng(seed: u64, qid: &str, impression_index: u64) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(qid.as_bytes());
    hasher.update(impression_index.to_le_bytes());
    ChaCha8Rng::from_seed(hasher.finalize().into())
}

/// Candidate ids sorted ascending, the base order for every policy.
fn sorted_ids(request: &Request, relevant: Option<bool>) -> Vec<String> {
    let mut ids: Vec<String> = request
        .candidates()
        .iter()
        .filter(|d| relevant.is_none_or(|r| d.relevant == r))
        .map(|d| d.doc_id.clone())
        .collect();
    ids.sort();
    ids
}

/// One policy instance bound to one query sequence. Call
/// [`SequencePolicy::next_ranking`] once per impression.
pub struct SequencePolicy<'a> {
    spec: PolicySpec,
    request: &'a Request,
    config: EvalConfig,
    emitted: u64,
    /// Exposure delivered so far; maintained only for the greedy balancer.
    delivered: ExposureVector,
    /// Per-impression target exposure; computed once for the greedy balancer.
    per_impression_target: ExposureVector,
}

impl<'a> SequencePolicy<'a> {
    pub fn new(spec: PolicySpec, request: &'a Request, config: &EvalConfig) -> Self {
        let per_impression_target = if spec.kind == PolicyKind::GreedyBalancer
            && !request.candidates().is_empty()
        {
            target_exposure(request, 1, config)
                .expect("nonempty candidate set has a target exposure")
        } else {
            ExposureVector::new()
        };
        Self {
            spec,
            request,
            config: *config,
            emitted: 0,
            delivered: ExposureVector::new(),
            per_impression_target,
        }
    }

    /// Feeds a previously emitted ranking into the policy state without
    /// generating anything, so a fresh instance can catch up to a history.
    pub fn observe(&mut self, ranking: &Ranking) {
        if self.spec.kind == PolicyKind::GreedyBalancer {
            let exposure = ranking_exposure(ranking, self.request, &self.config)
                .expect("history rankings draw from the candidate set");
            self.delivered.merge(&exposure);
        }
        self.emitted += 1;
    }

    /// Produces the ranking for the next impression and updates policy state.
    pub fn next_ranking(&mut self) -> Ranking {
        let ranking = match self.spec.kind {
            PolicyKind::DeterministicRelevance => self.rank_deterministic(),
            PolicyKind::UniformRandom => self.rank_uniform(),
            PolicyKind::IdealSampler => self.rank_ideal(),
            PolicyKind::GreedyBalancer => self.rank_greedy(),
        };
        self.observe(&ranking);
        ranking
    }

    fn rank_deterministic(&self) -> Ranking {
        sorted_ids(self.request, Some(true))
            .into_iter()
            .chain(sorted_ids(self.request, Some(false)))
            .collect()
    }

    fn rank_uniform(&self) -> Ranking {
        let mut rng = impression_rng(self.spec.seed, self.request.qid(), self.emitted);
        let mut ids = sorted_ids(self.request, None);
        ids.shuffle(&mut rng);
        Ranking::new(ids)
    }

    fn rank_ideal(&self) -> Ranking {
        let mut rng = impression_rng(self.spec.seed, self.request.qid(), self.emitted);
        let mut relevant = sorted_ids(self.request, Some(true));
        let mut nonrelevant = sorted_ids(self.request, Some(false));
        relevant.shuffle(&mut rng);
        nonrelevant.shuffle(&mut rng);
        relevant.into_iter().chain(nonrelevant).collect()
    }

    fn rank_greedy(&self) -> Ranking {
        // A document's score is the summed deficit of its authors: how far
        // behind their pro-rata target they are after the impressions
        // emitted so far. Relevance stays the major key, so every ranking is
        // a monotone-degrading permutation.
        let emitted = self.emitted as f64;
        let deficit_of = |doc_id: &str| -> f64 {
            let sum: f64 = self
                .request
                .document(doc_id)
                .map(|doc| {
                    doc.authors
                        .iter()
                        .map(|a| {
                            self.per_impression_target.get(a) * emitted - self.delivered.get(a)
                        })
                        .sum()
                })
                .unwrap_or(0.0);
            // An empty author sum is -0.0, which total_cmp orders below +0.0;
            // adding 0.0 canonicalizes the sign so zero deficits tie.
            sum + 0.0
        };
        let order = |ids: Vec<String>| -> Vec<(f64, String)> {
            let mut scored: Vec<(f64, String)> =
                ids.into_iter().map(|id| (deficit_of(&id), id)).collect();
            scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
            scored
        };
        order(sorted_ids(self.request, Some(true)))
            .into_iter()
            .chain(order(sorted_ids(self.request, Some(false))))
            .map(|(_, id)| id)
            .collect()
    }
}

/// Produces the ranking a policy would emit after the given history.
///
/// Equivalent to replaying `history` through a fresh [`SequencePolicy`] and
/// asking for one more ranking; the stateful form is preferable when
/// generating whole sequences.
pub fn policy_rank(
    policy: &PolicySpec,
    request: &Request,
    history: &[Ranking],
    config: &EvalConfig,
) -> Ranking {
    let mut state = SequencePolicy::new(*policy, request, config);
    for ranking in history {
        state.observe(ranking);
    }
    state.next_ranking()
}

/// Runs the evaluation protocol: for every request, asks the policy for one
/// ranking per impression and collects the resulting sequences.
///
/// Output is keyed by qid and fully determined by `(policy, requests,
/// impressions_per_query, config)`.
pub fn run_protocol(
    requests: &[Request],
    impressions_per_query: usize,
    policy: &PolicySpec,
    config: &EvalConfig,
) -> BTreeMap<Qid, RankingSequence> {
    assert!(impressions_per_query >= 1, "at least one impression per query");
    let mut result = BTreeMap::new();
    for request in requests {
        let mut state = SequencePolicy::new(*policy, request, config);
        let rankings: Vec<Ranking> = (0..impressions_per_query)
            .map(|_| state.next_ranking())
            .collect();
        result.insert(
            request.qid().clone(),
            RankingSequence::new(request.qid().clone(), rankings),
        );
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::evaluate_query;
    use crate::types::{DocumentRecord, GroupAssignment};
    use std::collections::HashSet;

    fn doc(id: &str, authors: &[&str], relevant: bool) -> DocumentRecord {
        DocumentRecord::new(id, authors.iter().map(|a| a.to_string()).collect(), relevant)
    }

    fn request() -> Request {
        Request::new(
            "q1",
            "test",
            vec![
                doc("d1", &["a1"], true),
                doc("d2", &["a2"], false),
                doc("d3", &["a3"], true),
                doc("d4", &[], false),
            ],
        )
    }

    fn spec(kind: PolicyKind) -> PolicySpec {
        PolicySpec::new(kind, 42)
    }

    #[test]
    fn policy_names_round_trip() {
        for kind in PolicyKind::ALL {
            assert_eq!(kind.name().parse::<PolicyKind>().unwrap(), kind);
        }
        assert!("nonsense".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn deterministic_relevance_orders_by_grade_then_id() {
        let req = request();
        let r = policy_rank(
            &spec(PolicyKind::DeterministicRelevance),
            &req,
            &[],
            &EvalConfig::default(),
        );
        assert_eq!(r.items(), &["d1", "d3", "d2", "d4"]);
    }

    #[test]
    fn every_policy_emits_full_permutations() {
        let req = request();
        let config = EvalConfig::default();
        for kind in PolicyKind::ALL {
            let runs = run_protocol(std::slice::from_ref(&req), 20, &spec(kind), &config);
            let seq = &runs["q1"];
            assert_eq!(seq.len(), 20);
            for ranking in &seq.rankings {
                assert_eq!(ranking.len(), 4, "{kind}");
                let unique: HashSet<&String> = ranking.iter().collect();
                assert_eq!(unique.len(), 4, "{kind}");
            }
        }
    }

    #[test]
    fn ideal_sampler_only_emits_monotone_permutations() {
        let req = request();
        let runs = run_protocol(
            std::slice::from_ref(&req),
            50,
            &spec(PolicyKind::IdealSampler),
            &EvalConfig::default(),
        );
        for ranking in &runs["q1"].rankings {
            let grades: Vec<bool> = ranking
                .iter()
                .map(|id| req.document(id).unwrap().relevant)
                .collect();
            let mut sorted = grades.clone();
            sorted.sort_by(|a, b| b.cmp(a));
            assert_eq!(grades, sorted);
        }
    }

    #[test]
    fn ideal_sampler_with_uniform_grades_is_a_plain_shuffle() {
        // R = N and R = 0 each collapse to a single equivalence class.
        for relevant in [true, false] {
            let req = Request::new(
                "q1",
                "t",
                (0..4)
                    .map(|i| doc(&format!("d{i}"), &[], relevant))
                    .collect(),
            );
            let ideal = run_protocol(
                std::slice::from_ref(&req),
                5,
                &spec(PolicyKind::IdealSampler),
                &EvalConfig::default(),
            );
            let uniform = run_protocol(
                std::slice::from_ref(&req),
                5,
                &spec(PolicyKind::UniformRandom),
                &EvalConfig::default(),
            );
            // Same seed, same RNG stream, same shuffle of the same base
            // order: the two policies coincide exactly.
            assert_eq!(ideal["q1"], uniform["q1"]);
        }
    }

    #[test]
    fn seeds_determine_output() {
        let req = request();
        let config = EvalConfig::default();
        let a = run_protocol(std::slice::from_ref(&req), 10, &spec(PolicyKind::UniformRandom), &config);
        let b = run_protocol(std::slice::from_ref(&req), 10, &spec(PolicyKind::UniformRandom), &config);
        assert_eq!(a, b);
        let c = run_protocol(
            std::slice::from_ref(&req),
            10,
            &PolicySpec::new(PolicyKind::UniformRandom, 43),
            &config,
        );
        assert_ne!(a, c);
    }

    #[test]
    fn policy_rank_matches_stateful_generation() {
        let req = request();
        let config = EvalConfig::default();
        for kind in PolicyKind::ALL {
            let runs = run_protocol(std::slice::from_ref(&req), 6, &spec(kind), &config);
            let seq = &runs["q1"];
            for i in 0..seq.len() {
                let replayed = policy_rank(&spec(kind), &req, &seq.rankings[..i], &config);
                assert_eq!(replayed, seq.rankings[i], "{kind} impression {i}");
            }
        }
    }

    #[test]
    fn greedy_balancer_alternates_two_relevant_docs() {
        let req = Request::new(
            "q1",
            "t",
            vec![doc("d1", &["a1"], true), doc("d2", &["a2"], true)],
        );
        let config = EvalConfig::default();
        let runs = run_protocol(
            std::slice::from_ref(&req),
            2,
            &spec(PolicyKind::GreedyBalancer),
            &config,
        );
        let seq = &runs["q1"];
        // Impression 1: all deficits zero, tie broken by doc id.
        assert_eq!(seq.rankings[0].items(), &["d1", "d2"]);
        // Impression 2: a2 is behind target after impression 1.
        assert_eq!(seq.rankings[1].items(), &["d2", "d1"]);
    }

    #[test]
    fn greedy_balancer_beats_deterministic_on_the_worked_scenario() {
        let req = Request::new(
            "q1",
            "t",
            vec![
                doc("d1", &["a1"], true),
                doc("d2", &["a2"], true),
                doc("d3", &["a2"], false),
            ],
        );
        let groups: GroupAssignment = [
            ("a1".to_string(), "g1".to_string()),
            ("a2".to_string(), "g2".to_string()),
        ]
        .into_iter()
        .collect();
        let config = EvalConfig::default();
        for k in [1usize, 2, 4, 8] {
            let mut ees = Vec::new();
            for kind in [PolicyKind::GreedyBalancer, PolicyKind::DeterministicRelevance] {
                let runs = run_protocol(std::slice::from_ref(&req), k, &spec(kind), &config);
                let qm = evaluate_query(&req, &runs["q1"], &groups, &config).unwrap();
                ees.push(qm.ee);
            }
            assert!(
                ees[0] <= ees[1] + 1e-12,
                "k = {k}: greedy {} vs deterministic {}",
                ees[0],
                ees[1]
            );
        }
    }

    #[test]
    fn ideal_sampler_converges_toward_target() {
        // Three candidates, two relevant; per-impression EE shrinks as
        // 1/sqrt(k) under Monte-Carlo sampling of the ideal policy.
        let req = Request::new(
            "q1",
            "t",
            vec![
                doc("d1", &["a1"], true),
                doc("d2", &["a2"], true),
                doc("d3", &["a2"], false),
            ],
        );
        let groups: GroupAssignment = [
            ("a1".to_string(), "g1".to_string()),
            ("a2".to_string(), "g2".to_string()),
        ]
        .into_iter()
        .collect();
        let config = EvalConfig::default();
        let impressions = 10_000;
        let runs = run_protocol(
            std::slice::from_ref(&req),
            impressions,
            &spec(PolicyKind::IdealSampler),
            &config,
        );
        let qm = evaluate_query(&req, &runs["q1"], &groups, &config).unwrap();
        let normalized = qm.ee / impressions as f64;
        assert!(normalized < 0.05, "normalized ee = {normalized}");
    }

    #[test]
    fn empty_candidate_set_yields_empty_rankings() {
        let req = Request::new("q1", "t", vec![]);
        for kind in PolicyKind::ALL {
            let runs = run_protocol(
                std::slice::from_ref(&req),
                2,
                &spec(kind),
                &EvalConfig::default(),
            );
            assert!(runs["q1"].rankings.iter().all(|r| r.is_empty()), "{kind}");
        }
    }
}
