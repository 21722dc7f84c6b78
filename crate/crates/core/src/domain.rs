//! Shared domain types: questions, answers, explanations, and the
//! elicitation records tying them together.
//!
//! Everything here is immutable after construction and safe to share
//! across threads.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decimal::Decimal;

/// Errors constructing domain values.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("confidence {0} outside [0, 1]")]
    ConfidenceOutOfRange(f64),
    #[error("question text is empty")]
    EmptyQuestion,
    #[error("token importance explanation has no entries")]
    NoEntries,
    #[error("token importance weight {0} is negative or not finite")]
    InvalidWeight(f64),
    #[error("chain-of-thought explanation has no steps")]
    NoSteps,
    #[error("chain-of-thought step {0} has empty text")]
    EmptyStep(usize),
    #[error("answer {raw:?} is not a valid {} answer", kind.as_str())]
    MalformedAnswer { kind: DatasetKind, raw: String },
}

/// Which answer format a dataset expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    /// Math word problems with a numeric answer.
    MathWord,
    /// Yes/No reasoning questions.
    YesNo,
    /// Plausible / implausible judgments.
    PlausibleImplausible,
}

impl DatasetKind {
    /// Stable token used in file names and report columns.
    pub fn as_str(&self) -> &'static str {
        match self {
            DatasetKind::MathWord => "math_word",
            DatasetKind::YesNo => "yes_no",
            DatasetKind::PlausibleImplausible => "plausible_implausible",
        }
    }
}

/// Plausibility verdict for sentence-judgment datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Plausibility {
    Plausible,
    Implausible,
}

/// A typed final answer.
///
/// Numeric answers are exact decimals so "28" and "28.0" compare equal
/// without any float rounding.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Answer {
    Numeric(Decimal),
    YesNo(bool),
    Plausibility(Plausibility),
}

impl Answer {
    /// Parses an answer literal under the given dataset kind.
    ///
    /// Numeric literals tolerate currency signs, thousands separators,
    /// and a trailing period; Yes/No accepts yes/no/true/false in any
    /// case; plausibility requires the exact word after normalization.
    pub fn parse_text(kind: DatasetKind, raw: &str) -> Result<Self, DomainError> {
        let malformed = || DomainError::MalformedAnswer {
            kind,
            raw: raw.to_string(),
        };
        match kind {
            DatasetKind::MathWord => {
                let cleaned: String = raw
                    .trim()
                    .trim_end_matches('.')
                    .chars()
                    .filter(|c| !matches!(c, '$' | ',' | ' '))
                    .collect();
                cleaned
                    .parse::<Decimal>()
                    .map(Answer::Numeric)
                    .map_err(|_| malformed())
            }
            DatasetKind::YesNo => match normalize_token(raw).as_str() {
                "yes" | "true" => Ok(Answer::YesNo(true)),
                "no" | "false" => Ok(Answer::YesNo(false)),
                _ => Err(malformed()),
            },
            DatasetKind::PlausibleImplausible => match normalize_token(raw).as_str() {
                "plausible" => Ok(Answer::Plausibility(Plausibility::Plausible)),
                "implausible" => Ok(Answer::Plausibility(Plausibility::Implausible)),
                _ => Err(malformed()),
            },
        }
    }

    /// The dataset kind this answer variant belongs to.
    pub fn kind(&self) -> DatasetKind {
        match self {
            Answer::Numeric(_) => DatasetKind::MathWord,
            Answer::YesNo(_) => DatasetKind::YesNo,
            Answer::Plausibility(_) => DatasetKind::PlausibleImplausible,
        }
    }

    /// Human-readable form, as it would appear in a model response.
    pub fn display_text(&self) -> String {
        match self {
            Answer::Numeric(d) => d.to_string(),
            Answer::YesNo(true) => "Yes".to_string(),
            Answer::YesNo(false) => "No".to_string(),
            Answer::Plausibility(Plausibility::Plausible) => "plausible".to_string(),
            Answer::Plausibility(Plausibility::Implausible) => "implausible".to_string(),
        }
    }
}

/// True iff both answers have the same variant and equal canonical values.
///
/// A variant mismatch is an unequal pair, not an error.
pub fn answers_equal(a: &Answer, b: &Answer) -> bool {
    a == b
}

/// A confidence score in `[0, 1]`.
///
/// Prompt-facing percentages are divided by 100 at the parse boundary;
/// nothing outside `[0, 1]` can be constructed.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ConfidenceScore(f64);

impl ConfidenceScore {
    pub fn new(value: f64) -> Result<Self, DomainError> {
        if value.is_finite() && (0.0..=1.0).contains(&value) {
            Ok(ConfidenceScore(value))
        } else {
            Err(DomainError::ConfidenceOutOfRange(value))
        }
    }

    /// Clamps into `[0, 1]`; used where the format tolerates drift
    /// (e.g. a model answering "150%").
    pub fn saturating(value: f64) -> Self {
        if value.is_nan() {
            ConfidenceScore(0.0)
        } else {
            ConfidenceScore(value.clamp(0.0, 1.0))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for ConfidenceScore {
    type Error = DomainError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        ConfidenceScore::new(value)
    }
}

impl From<ConfidenceScore> for f64 {
    fn from(c: ConfidenceScore) -> f64 {
        c.0
    }
}

/// A natural-language problem instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub text: String,
    pub dataset_kind: DatasetKind,
    /// Gold answer when the dataset provides one.
    pub gold_answer: Option<Answer>,
}

impl Question {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        dataset_kind: DatasetKind,
        gold_answer: Option<Answer>,
    ) -> Result<Self, DomainError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(DomainError::EmptyQuestion);
        }
        Ok(Question {
            id: id.into(),
            text,
            dataset_kind,
            gold_answer,
        })
    }

    /// A copy of this question with different text (for paraphrases or
    /// synonym substitutions); keeps id, kind, and gold answer.
    pub fn with_text(&self, text: impl Into<String>) -> Result<Self, DomainError> {
        Question::new(&self.id, text, self.dataset_kind, self.gold_answer.clone())
    }
}

/// Lowercases, strips surrounding punctuation, and collapses internal
/// whitespace. Idempotent; may return an empty string (callers drop
/// empty tokens).
pub fn normalize_token(raw: &str) -> String {
    let lowered = raw.to_lowercase();
    let trimmed = lowered.trim_matches(|c: char| !c.is_alphanumeric());
    let mut out = String::with_capacity(trimmed.len());
    let mut words = trimmed.split_whitespace();
    if let Some(first) = words.next() {
        out.push_str(first);
        for w in words {
            out.push(' ');
            out.push_str(w);
        }
    }
    out
}

/// A token-importance explanation: normalized tokens with non-negative
/// weights, sorted by weight descending, ties keeping response order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenImportanceExplanation {
    entries: Vec<(String, f64)>,
}

impl TokenImportanceExplanation {
    /// Builds the explanation from `(token, weight)` pairs in response
    /// order. Tokens are normalized; empty tokens are dropped and only
    /// the first occurrence of a repeated token is kept, so ranks stay
    /// well defined. The stable sort preserves response order on weight
    /// ties.
    pub fn new(raw_entries: Vec<(String, f64)>) -> Result<Self, DomainError> {
        let mut entries: Vec<(String, f64)> = Vec::with_capacity(raw_entries.len());
        for (token, weight) in raw_entries {
            if !weight.is_finite() || weight < 0.0 {
                return Err(DomainError::InvalidWeight(weight));
            }
            let norm = normalize_token(&token);
            if norm.is_empty() || entries.iter().any(|(t, _)| *t == norm) {
                continue;
            }
            entries.push((norm, weight));
        }
        if entries.is_empty() {
            return Err(DomainError::NoEntries);
        }
        entries.sort_by(|a, b| b.1.partial_cmp(&a.1).expect("weights are finite"));
        Ok(TokenImportanceExplanation { entries })
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The first `k` tokens (fewer if the explanation is shorter).
    pub fn top_k(&self, k: usize) -> impl Iterator<Item = &str> {
        self.entries.iter().take(k).map(|(t, _)| t.as_str())
    }

    /// 1-based rank of a normalized token, if present.
    pub fn rank_of(&self, token: &str) -> Option<usize> {
        self.entries
            .iter()
            .position(|(t, _)| t == token)
            .map(|i| i + 1)
    }
}

/// One reasoning step of a chain-of-thought explanation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoTStep {
    pub text: String,
    /// Verbalized per-step confidence, when the format carried one.
    pub confidence: Option<ConfidenceScore>,
}

/// An ordered chain-of-thought explanation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoTExplanation {
    steps: Vec<CoTStep>,
}

impl CoTExplanation {
    pub fn new(steps: Vec<CoTStep>) -> Result<Self, DomainError> {
        if steps.is_empty() {
            return Err(DomainError::NoSteps);
        }
        for (i, step) in steps.iter().enumerate() {
            if step.text.trim().is_empty() {
                return Err(DomainError::EmptyStep(i + 1));
            }
        }
        Ok(CoTExplanation { steps })
    }

    pub fn steps(&self) -> &[CoTStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Which explanation style an elicitation requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExplanationMode {
    TokenImportance,
    Cot,
}

impl ExplanationMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExplanationMode::TokenImportance => "ti",
            ExplanationMode::Cot => "cot",
        }
    }
}

/// A parsed explanation of either kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Explanation {
    TokenImportance(TokenImportanceExplanation),
    Cot(CoTExplanation),
}

impl Explanation {
    pub fn mode(&self) -> ExplanationMode {
        match self {
            Explanation::TokenImportance(_) => ExplanationMode::TokenImportance,
            Explanation::Cot(_) => ExplanationMode::Cot,
        }
    }

    pub fn as_token_importance(&self) -> Option<&TokenImportanceExplanation> {
        match self {
            Explanation::TokenImportance(ti) => Some(ti),
            Explanation::Cot(_) => None,
        }
    }

    pub fn as_cot(&self) -> Option<&CoTExplanation> {
        match self {
            Explanation::Cot(cot) => Some(cot),
            Explanation::TokenImportance(_) => None,
        }
    }
}

/// Where a record came from within a probing set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "source", content = "index", rename_all = "snake_case")]
pub enum Provenance {
    Original,
    /// i-th paraphrase elicitation, 1-based.
    Paraphrase(u32),
    /// i-th temperature sample, 1-based.
    TemperatureSample(u32),
}

/// Sampling parameters for one completion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub temperature: f64,
    pub model_name: String,
    pub max_tokens: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl GenerationParams {
    pub fn new(model_name: impl Into<String>, temperature: f64, max_tokens: u32) -> Self {
        GenerationParams {
            temperature,
            model_name: model_name.into(),
            max_tokens,
            seed: None,
        }
    }

    /// Same parameters at a different temperature.
    pub fn at_temperature(&self, temperature: f64) -> Self {
        GenerationParams {
            temperature,
            ..self.clone()
        }
    }
}

/// A non-fatal problem recorded during a run: parse failures, dropped
/// perturbations, skipped synonyms. Serialized into run reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub question_id: String,
    /// Pipeline stage that produced the diagnostic, e.g. "sample_probe".
    pub stage: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offending_line: Option<String>,
}

impl Diagnostic {
    pub fn new(
        question_id: impl Into<String>,
        stage: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Diagnostic {
            question_id: question_id.into(),
            stage: stage.into(),
            provenance: None,
            message: message.into(),
            offending_line: None,
        }
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn with_offending_line(mut self, line: impl Into<String>) -> Self {
        self.offending_line = Some(line.into());
        self
    }
}

/// One elicitation event: the prompt sent, the raw response, and what was
/// parsed out of it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplanationRecord {
    pub question_id: String,
    pub prompt_text: String,
    pub raw_response: String,
    pub explanation: Explanation,
    pub parsed_answer: Answer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verbalized_confidence: Option<ConfidenceScore>,
    pub generation: GenerationParams,
    pub provenance: Provenance,
}
