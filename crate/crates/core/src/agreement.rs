//! The metric core: token rank/set agreement for token-importance
//! explanations, entailment-based agreement for chains of thought, and
//! the mean-agreement uncertainty scores over probing sets.
//!
//! All scores live in `[0, 1]`. Token rank agreement counts top-k tokens
//! that appear in both explanations at the same rank; token set
//! agreement only requires membership, so it always dominates rank
//! agreement. Chain-of-thought agreement runs a binary entailment
//! function over the full step-pair matrix and asks, for every step,
//! whether some step of the other explanation mutually entails it.

use std::collections::{HashMap, HashSet};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    normalize_token, CoTExplanation, ConfidenceScore, ExplanationMode, GenerationParams,
    TokenImportanceExplanation,
};
use crate::gateway::{CompletionRequest, Gateway, GatewayError};
use crate::parser::{parse_entailment_label, NliLabel, ParseError};
use crate::perturbation::ProbingSet;
use crate::prompting::entailment_judge_prompt;

#[derive(Debug, Error)]
pub enum AgreementError {
    #[error("probing set has no perturbed records")]
    EmptyProbingSet,
    #[error("probing set holds {found:?} records, expected {expected:?}")]
    WrongMode {
        expected: ExplanationMode,
        found: ExplanationMode,
    },
    #[error("entailment judge needs a configured gateway")]
    JudgeUnavailable,
    #[error("entailment judge: {0}")]
    Judge(#[from] ParseError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("entailment threshold {0} outside [0, 1]")]
    BadThreshold(f64),
    #[error("entailment inputs must be non-empty")]
    EmptyStepText,
}

/// How two reasoning steps are judged to entail each other.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntailmentBackendSpec {
    /// Equal after token normalization.
    ExactMatch,
    /// Token-set Jaccard overlap at or above the threshold.
    NormalizedOverlap { threshold: f64 },
    /// Ask the completion backend for an NLI label per direction.
    LlmJudge,
}

impl EntailmentBackendSpec {
    pub fn validate(&self) -> Result<(), AgreementError> {
        if let EntailmentBackendSpec::NormalizedOverlap { threshold } = self {
            if !(0.0..=1.0).contains(threshold) {
                return Err(AgreementError::BadThreshold(*threshold));
            }
        }
        Ok(())
    }
}

/// Whether E requires entailment in both directions (the default) or
/// only premise-to-hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntailmentDirection {
    #[default]
    Mutual,
    Forward,
}

/// Binary entailment function with per-pair memoization.
///
/// The judge variant prompts the gateway once per direction; results are
/// memoized per pair for the lifetime of the entailer, so the full CoTA
/// matrix never asks the same question twice.
pub struct Entailer<'g> {
    spec: EntailmentBackendSpec,
    direction: EntailmentDirection,
    gateway: Option<&'g Gateway>,
    judge_params: Option<GenerationParams>,
    memo: Mutex<HashMap<(String, String), bool>>,
}

impl<'g> Entailer<'g> {
    /// Offline entailer; `LlmJudge` calls will fail.
    pub fn offline(spec: EntailmentBackendSpec) -> Result<Self, AgreementError> {
        spec.validate()?;
        Ok(Entailer {
            spec,
            direction: EntailmentDirection::Mutual,
            gateway: None,
            judge_params: None,
            memo: Mutex::new(HashMap::new()),
        })
    }

    /// Entailer backed by a gateway for the judge variant. The judge runs
    /// at temperature 0 regardless of the elicitation temperature.
    pub fn with_gateway(
        spec: EntailmentBackendSpec,
        gateway: &'g Gateway,
        params: GenerationParams,
    ) -> Result<Self, AgreementError> {
        spec.validate()?;
        Ok(Entailer {
            spec,
            direction: EntailmentDirection::Mutual,
            gateway: Some(gateway),
            judge_params: Some(params.at_temperature(0.0)),
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_direction(mut self, direction: EntailmentDirection) -> Self {
        self.direction = direction;
        self
    }

    pub fn spec(&self) -> &EntailmentBackendSpec {
        &self.spec
    }

    /// Binary entailment between two step texts.
    pub fn entail(&self, a: &str, b: &str) -> Result<bool, AgreementError> {
        if a.trim().is_empty() || b.trim().is_empty() {
            return Err(AgreementError::EmptyStepText);
        }
        let memo_key = match self.direction {
            // Mutual entailment is symmetric, so memoize unordered.
            EntailmentDirection::Mutual => {
                if a <= b {
                    (a.to_string(), b.to_string())
                } else {
                    (b.to_string(), a.to_string())
                }
            }
            EntailmentDirection::Forward => (a.to_string(), b.to_string()),
        };
        if let Some(&hit) = self.memo.lock().expect("memo lock").get(&memo_key) {
            return Ok(hit);
        }
        let verdict = match &self.spec {
            EntailmentBackendSpec::ExactMatch => {
                let na = normalize_token(a);
                let nb = normalize_token(b);
                !na.is_empty() && na == nb
            }
            EntailmentBackendSpec::NormalizedOverlap { threshold } => jaccard(a, b) >= *threshold,
            EntailmentBackendSpec::LlmJudge => {
                let forward = self.judge_one(a, b)?;
                match self.direction {
                    EntailmentDirection::Forward => forward,
                    // Short-circuit: mutual entailment needs both.
                    EntailmentDirection::Mutual => forward && self.judge_one(b, a)?,
                }
            }
        };
        self.memo
            .lock()
            .expect("memo lock")
            .insert(memo_key, verdict);
        Ok(verdict)
    }

    fn judge_one(&self, premise: &str, hypothesis: &str) -> Result<bool, AgreementError> {
        let gateway = self.gateway.ok_or(AgreementError::JudgeUnavailable)?;
        let params = self
            .judge_params
            .as_ref()
            .ok_or(AgreementError::JudgeUnavailable)?;
        let prompt = entailment_judge_prompt(premise, hypothesis);
        let text = gateway.complete(&CompletionRequest::new(prompt, params.clone()))?;
        Ok(parse_entailment_label(&text)? == NliLabel::Entailment)
    }
}

fn token_set(text: &str) -> HashSet<String> {
    text.split_whitespace()
        .map(normalize_token)
        .filter(|t| !t.is_empty())
        .collect()
}

/// Token-set Jaccard similarity after normalization (symmetric).
pub fn jaccard(a: &str, b: &str) -> f64 {
    let sa = token_set(a);
    let sb = token_set(b);
    let union = sa.union(&sb).count();
    if union == 0 {
        return 0.0;
    }
    sa.intersection(&sb).count() as f64 / union as f64
}

/// Fraction of the top-k tokens shared by both explanations at the same
/// rank position. When an explanation has fewer than k tokens its full
/// list is used, but the divisor stays k.
///
/// `k` must be at least 1.
pub fn token_rank_agreement(
    a: &TokenImportanceExplanation,
    b: &TokenImportanceExplanation,
    k: usize,
) -> f64 {
    assert!(k >= 1, "k must be >= 1");
    let top_b: HashSet<&str> = b.top_k(k).collect();
    let matches = a
        .top_k(k)
        .filter(|token| top_b.contains(token) && a.rank_of(token) == b.rank_of(token))
        .count();
    matches as f64 / k as f64
}

/// Fraction of the top-k tokens shared by both explanations regardless
/// of position. Divisor stays k for short explanations, as above.
pub fn token_set_agreement(
    a: &TokenImportanceExplanation,
    b: &TokenImportanceExplanation,
    k: usize,
) -> f64 {
    assert!(k >= 1, "k must be >= 1");
    let top_b: HashSet<&str> = b.top_k(k).collect();
    let matches = a.top_k(k).filter(|token| top_b.contains(token)).count();
    matches as f64 / k as f64
}

/// Mean rank agreement between each perturbed explanation and the
/// original: the token-importance uncertainty score.
pub fn ti_uncertainty(set: &ProbingSet, k: usize) -> Result<ConfidenceScore, AgreementError> {
    let original = require_ti(&set.original.explanation)?;
    if set.perturbed.is_empty() {
        return Err(AgreementError::EmptyProbingSet);
    }
    let mut sum = 0.0;
    for record in &set.perturbed {
        let ti = require_ti(&record.explanation)?;
        sum += token_rank_agreement(ti, original, k);
    }
    Ok(ConfidenceScore::saturating(
        sum / set.perturbed.len() as f64,
    ))
}

/// Agreement between two chains of thought: for every step, does some
/// step of the other chain entail it, averaged over both chains. The
/// entailment matrix is evaluated once and reused for both sums.
pub fn cot_agreement(
    a: &CoTExplanation,
    b: &CoTExplanation,
    entailer: &Entailer<'_>,
) -> Result<f64, AgreementError> {
    let n_a = a.len();
    let n_b = b.len();
    let mut matrix = vec![vec![false; n_b]; n_a];
    for (i, step_a) in a.steps().iter().enumerate() {
        for (j, step_b) in b.steps().iter().enumerate() {
            matrix[i][j] = entailer.entail(&step_a.text, &step_b.text)?;
        }
    }
    let rows_hit = matrix.iter().filter(|row| row.iter().any(|&e| e)).count();
    let cols_hit = (0..n_b)
        .filter(|&j| matrix.iter().any(|row| row[j]))
        .count();
    Ok((rows_hit + cols_hit) as f64 / (n_a + n_b) as f64)
}

/// Mean chain-of-thought agreement between each perturbed explanation
/// and the original: the CoT uncertainty score.
pub fn cot_uncertainty(
    set: &ProbingSet,
    entailer: &Entailer<'_>,
) -> Result<ConfidenceScore, AgreementError> {
    let original = require_cot(&set.original.explanation)?;
    if set.perturbed.is_empty() {
        return Err(AgreementError::EmptyProbingSet);
    }
    let mut sum = 0.0;
    for record in &set.perturbed {
        let cot = require_cot(&record.explanation)?;
        sum += cot_agreement(cot, original, entailer)?;
    }
    Ok(ConfidenceScore::saturating(
        sum / set.perturbed.len() as f64,
    ))
}

/// The probing-set uncertainty score for whichever mode the set holds.
pub fn probing_uncertainty(
    set: &ProbingSet,
    k: usize,
    entailer: &Entailer<'_>,
) -> Result<ConfidenceScore, AgreementError> {
    match set.original.explanation.mode() {
        ExplanationMode::TokenImportance => ti_uncertainty(set, k),
        ExplanationMode::Cot => cot_uncertainty(set, entailer),
    }
}

fn require_ti(
    explanation: &crate::domain::Explanation,
) -> Result<&TokenImportanceExplanation, AgreementError> {
    explanation
        .as_token_importance()
        .ok_or(AgreementError::WrongMode {
            expected: ExplanationMode::TokenImportance,
            found: explanation.mode(),
        })
}

fn require_cot(
    explanation: &crate::domain::Explanation,
) -> Result<&CoTExplanation, AgreementError> {
    explanation.as_cot().ok_or(AgreementError::WrongMode {
        expected: ExplanationMode::Cot,
        found: explanation.mode(),
    })
}
