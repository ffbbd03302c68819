//! Author exposure under the position-based browsing model.
//!
//! A user scans a ranking top-down. The probability mass reaching position
//! `i` is `gamma^(i-1) * prod_{j<i} (1 - p_stop(doc_j))`: the user must have
//! continued past, and not been satisfied by, every earlier document. That
//! mass is the exposure of the document at position `i`, credited in full to
//! each of its authors.
//!
//! Expected exposure over a query sequence is the sum (not the mean) of
//! per-ranking exposure across all impressions. The target expected exposure
//! is what an ideal policy would deliver: one that randomizes uniformly over
//! all permutations whose relevance grades are non-increasing by rank. For
//! binary grades the target has a closed form, verified here against a
//! brute-force enumeration oracle.

use itertools::Itertools;

use crate::config::EvalConfig;
use crate::error::EvalError;
use crate::types::{ExposureVector, Ranking, RankingSequence, Request};

/// Maximum candidate count accepted by the exhaustive enumeration oracle.
pub const ENUMERATION_CAP: usize = 8;

/// Browsing-probability weights per rank position, for one ranking.
///
/// `w_1 = 1` for any nonempty ranking, and weights are non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionWeights(Vec<f64>);

impl PositionWeights {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Looks up a ranked document's relevance. Unknown documents are an error in
/// strict mode and treated as non-relevant otherwise.
fn grade_of(request: &Request, doc_id: &str, config: &EvalConfig) -> Result<bool, EvalError> {
    match request.document(doc_id) {
        Some(doc) => Ok(doc.relevant),
        None if config.strict_candidates => Err(EvalError::UnknownDocument {
            qid: request.qid().clone(),
            doc_id: doc_id.to_string(),
        }),
        None => Ok(false),
    }
}

/// Computes the browsing-model weight of every position in `ranking`.
pub fn position_weights(
    ranking: &Ranking,
    request: &Request,
    config: &EvalConfig,
) -> Result<PositionWeights, EvalError> {
    let mut weights = Vec::with_capacity(ranking.len());
    let mut mass = 1.0;
    for doc_id in ranking.iter() {
        weights.push(mass);
        let relevant = grade_of(request, doc_id, config)?;
        mass *= config.gamma * (1.0 - config.stop_probability(relevant));
    }
    Ok(PositionWeights(weights))
}

/// Exposure each author receives from a single ranking: the sum of position
/// weights over the positions of documents they authored.
pub fn ranking_exposure(
    ranking: &Ranking,
    request: &Request,
    config: &EvalConfig,
) -> Result<ExposureVector, EvalError> {
    let weights = position_weights(ranking, request, config)?;
    let mut exposure = ExposureVector::new();
    for (doc_id, &w) in ranking.iter().zip(weights.values()) {
        if let Some(doc) = request.document(doc_id) {
            for author in &doc.authors {
                exposure.add(author.clone(), w);
            }
        }
        // Documents outside the candidate set have no known authors; in
        // non-strict mode they absorb browsing mass and credit nobody.
    }
    Ok(exposure)
}

/// Expected exposure over a query sequence: the pointwise sum of per-ranking
/// exposure across all impressions.
pub fn sequence_exposure(
    seq: &RankingSequence,
    request: &Request,
    config: &EvalConfig,
) -> Result<ExposureVector, EvalError> {
    if seq.is_empty() {
        return Err(EvalError::EmptySequence {
            qid: seq.qid.clone(),
        });
    }
    let mut total = ExposureVector::new();
    for ranking in &seq.rankings {
        total.merge(&ranking_exposure(ranking, request, config)?);
    }
    Ok(total)
}

/// Per-document target exposure for a single impression, in closed form.
///
/// Under the ideal randomized policy every relevant document is equally
/// likely to occupy each of the first `R` positions, and every non-relevant
/// document each of the remaining `N - R`. A position's weight depends only
/// on how many relevant and non-relevant documents precede it, so:
///
/// * relevant:     `(1/R)       * sum_{i=1..R}   (gamma * (1 - p_rel))^(i-1)`
/// * non-relevant: `(1/(N-R))   * sum_{i=R+1..N} gamma^(i-1) * (1 - p_rel)^R * (1 - p_nonrel)^(i-1-R)`
///
/// Returns `(relevant_share, nonrelevant_share)`.
fn document_target_shares(
    relevant_count: usize,
    total_count: usize,
    config: &EvalConfig,
) -> (f64, f64) {
    let r = relevant_count;
    let n = total_count;
    let cont_rel = config.gamma * (1.0 - config.stop_prob_relevant);
    let cont_nonrel = config.gamma * (1.0 - config.stop_prob_nonrelevant);

    let relevant_share = if r > 0 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for _ in 0..r {
            sum += term;
            term *= cont_rel;
        }
        sum / r as f64
    } else {
        0.0
    };

    let nonrelevant_share = if n > r {
        // Mass reaching position R+1: every earlier position holds a
        // relevant document.
        let mut term = cont_rel.powi(r as i32);
        let mut sum = 0.0;
        for _ in r..n {
            sum += term;
            term *= cont_nonrel;
        }
        sum / (n - r) as f64
    } else {
        0.0
    };

    (relevant_share, nonrelevant_share)
}

/// Target expected exposure per author over `num_rankings` impressions.
///
/// The per-document target depends only on the document's relevance grade, so
/// an author's target is the sum of the per-document shares over every
/// document they authored, scaled by the impression count.
pub fn target_exposure(
    request: &Request,
    num_rankings: usize,
    config: &EvalConfig,
) -> Result<ExposureVector, EvalError> {
    if request.candidates().is_empty() {
        return Err(EvalError::EmptyCandidates {
            qid: request.qid().clone(),
        });
    }
    let (rel_share, nonrel_share) = document_target_shares(
        request.relevant_count(),
        request.candidates().len(),
        config,
    );
    let mut target = ExposureVector::new();
    for doc in request.candidates() {
        let share = if doc.relevant { rel_share } else { nonrel_share };
        for author in &doc.authors {
            target.add(author.clone(), share);
        }
    }
    target.scale(num_rankings as f64);
    Ok(target)
}

/// Per-document target exposure for a single impression. Exposed for tests
/// and reporting; equals the per-document shares used by [`target_exposure`].
pub fn document_target_exposure(
    request: &Request,
    config: &EvalConfig,
) -> Result<Vec<(String, f64)>, EvalError> {
    if request.candidates().is_empty() {
        return Err(EvalError::EmptyCandidates {
            qid: request.qid().clone(),
        });
    }
    let (rel_share, nonrel_share) = document_target_shares(
        request.relevant_count(),
        request.candidates().len(),
        config,
    );
    Ok(request
        .candidates()
        .iter()
        .map(|d| {
            let share = if d.relevant { rel_share } else { nonrel_share };
            (d.doc_id.clone(), share)
        })
        .collect())
}

/// Enumerates every permutation of the candidate set whose relevance grades
/// are non-increasing by rank. With binary grades these are exactly the
/// permutations placing all relevant documents before all non-relevant ones.
///
/// Refuses candidate sets larger than [`ENUMERATION_CAP`]; the enumeration is
/// factorial and exists for verification, not production evaluation.
pub fn monotone_permutations(request: &Request) -> Result<Vec<Ranking>, EvalError> {
    let n = request.candidates().len();
    if n > ENUMERATION_CAP {
        return Err(EvalError::EnumerationCapExceeded {
            qid: request.qid().clone(),
            count: n,
            cap: ENUMERATION_CAP,
        });
    }
    let relevant: Vec<&str> = request
        .candidates()
        .iter()
        .filter(|d| d.relevant)
        .map(|d| d.doc_id.as_str())
        .collect();
    let nonrelevant: Vec<&str> = request
        .candidates()
        .iter()
        .filter(|d| !d.relevant)
        .map(|d| d.doc_id.as_str())
        .collect();

    let mut rankings = Vec::new();
    for rel_perm in relevant.iter().permutations(relevant.len()) {
        for nonrel_perm in nonrelevant.iter().permutations(nonrelevant.len()) {
            let items: Vec<String> = rel_perm
                .iter()
                .chain(nonrel_perm.iter())
                .map(|s| s.to_string())
                .collect();
            rankings.push(Ranking::new(items));
        }
    }
    Ok(rankings)
}

/// Brute-force target exposure: the exact average of per-ranking exposure
/// over all monotone-degrading permutations, scaled by `num_rankings`.
///
/// This is the verification oracle for [`target_exposure`]. It recomputes
/// position weights with its own literal loop rather than reusing the closed
/// form, and only runs for candidate sets of at most [`ENUMERATION_CAP`]
/// documents.
pub fn target_exposure_bruteforce(
    request: &Request,
    num_rankings: usize,
    config: &EvalConfig,
) -> Result<ExposureVector, EvalError> {
    if request.candidates().is_empty() {
        return Err(EvalError::EmptyCandidates {
            qid: request.qid().clone(),
        });
    }
    let permutations = monotone_permutations(request)?;
    let count = permutations.len() as f64;

    // Accumulate per-document exposure across all permutations.
    let mut per_doc: std::collections::BTreeMap<&str, f64> = std::collections::BTreeMap::new();
    for ranking in &permutations {
        let mut mass = 1.0;
        for doc_id in ranking.iter() {
            *per_doc.entry(doc_id.as_str()).or_insert(0.0) += mass;
            let relevant = request
                .document(doc_id)
                .expect("enumerated permutations only contain candidates")
                .relevant;
            mass *= config.gamma * (1.0 - config.stop_probability(relevant));
        }
    }

    let mut target = ExposureVector::new();
    for (doc_id, total) in per_doc {
        let doc = request.document(doc_id).unwrap();
        let average = total / count;
        for author in &doc.authors {
            target.add(author.clone(), average);
        }
    }
    target.scale(num_rankings as f64);
    Ok(target)
}
