//! Browsing-model configuration.

use crate::error::EvalError;

/// Parameters of the position-based browsing model and evaluation mode.
///
/// The model assumes a user scanning a ranking top-down: after examining the
/// document at a position, they stop with a probability determined by the
/// document's relevance grade, and otherwise continue to the next position
/// with probability `gamma`.
///
/// Relevance is binary, so the grade-to-stop-probability transform collapses
/// to two values. [`EvalConfig::default`] uses `gamma = 0.5`,
/// `stop_prob_relevant = 0.7`, and `stop_prob_nonrelevant = 0.0`. The gamma
/// default is the conventional discounting factor for this browsing model;
/// the stop probabilities are toolkit defaults with no canonical published
/// value, and callers evaluating against an external setup should set them
/// explicitly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalConfig {
    /// Probability of continuing past a position, in `[0, 1]`.
    pub gamma: f64,
    /// Stop probability after examining a relevant document, in `[0, 1]`.
    pub stop_prob_relevant: f64,
    /// Stop probability after examining a non-relevant document, in `[0, 1]`.
    pub stop_prob_nonrelevant: f64,
    /// When true, rankings containing documents outside the candidate set are
    /// rejected; otherwise such documents are treated as non-relevant,
    /// authorless placeholders and reported as warnings.
    pub strict_candidates: bool,
}

impl EvalConfig {
    /// Builds a config, validating `0 <= gamma <= 1` and
    /// `0 <= stop_prob_nonrelevant <= stop_prob_relevant <= 1` (the transform
    /// from grades to stop probabilities must be monotone).
    pub fn new(
        gamma: f64,
        stop_prob_relevant: f64,
        stop_prob_nonrelevant: f64,
        strict_candidates: bool,
    ) -> Result<Self, EvalError> {
        if !(0.0..=1.0).contains(&gamma) || !gamma.is_finite() {
            return Err(EvalError::InvalidContinuation(gamma));
        }
        let monotone = (0.0..=1.0).contains(&stop_prob_nonrelevant)
            && stop_prob_nonrelevant <= stop_prob_relevant
            && stop_prob_relevant <= 1.0
            && stop_prob_relevant.is_finite()
            && stop_prob_nonrelevant.is_finite();
        if !monotone {
            return Err(EvalError::InvalidStopProbabilities {
                relevant: stop_prob_relevant,
                nonrelevant: stop_prob_nonrelevant,
            });
        }
        Ok(Self {
            gamma,
            stop_prob_relevant,
            stop_prob_nonrelevant,
            strict_candidates,
        })
    }

    /// Stop probability for a binary relevance grade.
    pub fn stop_probability(&self, relevant: bool) -> f64 {
        if relevant {
            self.stop_prob_relevant
        } else {
            self.stop_prob_nonrelevant
        }
    }

    /// Returns a copy with strict candidate checking switched on or off.
    pub fn with_strict(mut self, strict: bool) -> Self {
        self.strict_candidates = strict;
        self
    }
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            gamma: 0.5,
            stop_prob_relevant: 0.7,
            stop_prob_nonrelevant: 0.0,
            strict_candidates: false,
        }
    }
}
