//! Faithfulness checks for the two explanation kinds.
//!
//! Token importance: swap the top-k tokens for synonyms, re-elicit, and
//! measure rank agreement against the explanation we would expect if the
//! model truly relied on those tokens (same ranks and weights, token
//! text substituted).
//!
//! Chain of thought: early answering. Ask for the final answer from each
//! reasoning prefix and count how often it already equals the full-chain
//! answer. A high fraction means the conclusion never depended on the
//! later steps — evidence the written reasoning is post-hoc.

use std::collections::HashMap;
use std::path::Path;

use thiserror::Error;

use crate::agreement::token_rank_agreement;
use crate::domain::{
    answers_equal, normalize_token, Answer, CoTExplanation, Diagnostic, DomainError,
    ExplanationMode, ExplanationRecord, GenerationParams, Provenance, Question,
    TokenImportanceExplanation,
};
use crate::gateway::{CompletionRequest, Gateway, GatewayError};
use crate::parser::{parse_early_answer, ParseError};
use crate::perturbation::{elicit_record, ElicitError};
use crate::prompting::{early_answer_prompt, synonym_prompt};

#[derive(Debug, Error)]
pub enum FaithfulnessError {
    #[error("target token {target:?} does not occur in the question")]
    TargetNotFound { target: String },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("cannot read wordlist {path}: {message}")]
    Wordlist { path: String, message: String },
}

impl From<ElicitError> for FaithfulnessError {
    fn from(e: ElicitError) -> Self {
        match e {
            ElicitError::Gateway(g) => FaithfulnessError::Gateway(g),
            ElicitError::Parse(p) => FaithfulnessError::Parse(p),
        }
    }
}

/// Source of in-context synonyms. Returning `Ok(None)` means "no synonym
/// available" — the token is skipped and recorded, never a hard error.
pub trait SynonymProvider {
    fn synonym_for(&self, word: &str, sentence: &str) -> Result<Option<String>, FaithfulnessError>;
}

/// Static synonym table keyed by normalized token.
pub struct WordlistSynonyms {
    map: HashMap<String, String>,
}

impl WordlistSynonyms {
    pub fn new(entries: impl IntoIterator<Item = (String, String)>) -> Self {
        WordlistSynonyms {
            map: entries
                .into_iter()
                .map(|(k, v)| (normalize_token(&k), v))
                .collect(),
        }
    }

    /// Loads a JSON object `{"word": "synonym", …}`.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, FaithfulnessError> {
        let path = path.as_ref();
        let mk_err = |message: String| FaithfulnessError::Wordlist {
            path: path.display().to_string(),
            message,
        };
        let text = std::fs::read_to_string(path).map_err(|e| mk_err(e.to_string()))?;
        let map: HashMap<String, String> =
            serde_json::from_str(&text).map_err(|e| mk_err(e.to_string()))?;
        Ok(WordlistSynonyms::new(map))
    }
}

impl SynonymProvider for WordlistSynonyms {
    fn synonym_for(
        &self,
        word: &str,
        _sentence: &str,
    ) -> Result<Option<String>, FaithfulnessError> {
        Ok(self.map.get(&normalize_token(word)).cloned())
    }
}

/// Synonyms asked from the completion backend, one word at a time.
pub struct LlmSynonyms<'g> {
    gateway: &'g Gateway,
    params: GenerationParams,
}

impl<'g> LlmSynonyms<'g> {
    pub fn new(gateway: &'g Gateway, params: GenerationParams) -> Self {
        LlmSynonyms {
            gateway,
            params: params.at_temperature(0.0),
        }
    }
}

impl SynonymProvider for LlmSynonyms<'_> {
    fn synonym_for(&self, word: &str, sentence: &str) -> Result<Option<String>, FaithfulnessError> {
        let prompt = synonym_prompt(word, sentence);
        let text = self
            .gateway
            .complete(&CompletionRequest::new(prompt, self.params.clone()))?;
        let first_line = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
        let synonym = normalize_token(first_line);
        if synonym.is_empty() || synonym == normalize_token(word) {
            return Ok(None);
        }
        Ok(Some(synonym))
    }
}

/// Result of a synonym substitution pass.
#[derive(Debug, Clone, PartialEq)]
pub struct Substitution {
    /// Question text with every target occurrence replaced.
    pub text: String,
    /// Normalized `old -> new` pairs actually applied.
    pub map: Vec<(String, String)>,
    /// Targets skipped because no synonym was available.
    pub skipped: Vec<String>,
}

fn occurs(text: &str, target_norm: &str) -> bool {
    text.split_whitespace()
        .any(|chunk| normalize_token(chunk) == target_norm)
}

/// Replaces every whitespace-delimited word whose normalized form equals
/// `target` with `replacement`, keeping surrounding punctuation and
/// transferring leading capitalization.
fn substitute_word(text: &str, target: &str, replacement: &str) -> (String, usize) {
    let mut out = String::with_capacity(text.len());
    let mut count = 0;
    let mut word = String::new();
    let flush = |word: &mut String, out: &mut String, count: &mut usize| {
        if word.is_empty() {
            return;
        }
        let chunk = std::mem::take(word);
        if normalize_token(&chunk) == target {
            *count += 1;
            out.push_str(&swap_core(&chunk, replacement));
        } else {
            out.push_str(&chunk);
        }
    };
    for c in text.chars() {
        if c.is_whitespace() {
            flush(&mut word, &mut out, &mut count);
            out.push(c);
        } else {
            word.push(c);
        }
    }
    flush(&mut word, &mut out, &mut count);
    (out, count)
}

/// Replaces the alphanumeric core of a chunk, keeping punctuation
/// around it ("peaches," -> "nectarines,").
fn swap_core(chunk: &str, replacement: &str) -> String {
    let start = match chunk.find(|c: char| c.is_alphanumeric()) {
        Some(i) => i,
        None => return replacement.to_string(),
    };
    let end = chunk
        .rfind(|c: char| c.is_alphanumeric())
        .map(|i| i + chunk[i..].chars().next().expect("char at index").len_utf8())
        .unwrap_or(chunk.len());
    let core = &chunk[start..end];
    let cased = if core.chars().next().is_some_and(|c| c.is_uppercase()) {
        let mut chars = replacement.chars();
        match chars.next() {
            Some(first) => first.to_uppercase().collect::<String>() + chars.as_str(),
            None => String::new(),
        }
    } else {
        replacement.to_string()
    };
    format!("{}{}{}", &chunk[..start], cased, &chunk[end..])
}

/// Substitutes a synonym for every target token in the question text.
///
/// Every target must occur in the question; a target with no available
/// synonym is skipped and recorded.
pub fn synonym_substitute(
    q: &Question,
    targets: &[&str],
    provider: &dyn SynonymProvider,
) -> Result<Substitution, FaithfulnessError> {
    for raw in targets {
        let target = normalize_token(raw);
        if !occurs(&q.text, &target) {
            return Err(FaithfulnessError::TargetNotFound { target });
        }
    }
    substitute_present(q, targets, provider)
}

/// Substitution over targets already known to occur.
fn substitute_present(
    q: &Question,
    targets: &[&str],
    provider: &dyn SynonymProvider,
) -> Result<Substitution, FaithfulnessError> {
    let mut text = q.text.clone();
    let mut map = Vec::new();
    let mut skipped = Vec::new();
    for raw in targets {
        let target = normalize_token(raw);
        let synonym = provider
            .synonym_for(&target, &q.text)?
            .map(|s| normalize_token(&s))
            .filter(|s| !s.is_empty() && *s != target);
        match synonym {
            Some(replacement) => {
                let (next, _count) = substitute_word(&text, &target, &replacement);
                text = next;
                map.push((target, replacement));
            }
            None => skipped.push(target),
        }
    }
    Ok(Substitution { text, map, skipped })
}

/// Outcome of the counterfactual token-importance test.
#[derive(Debug, Clone)]
pub struct CounterfactualOutcome {
    /// Rank agreement between the fresh explanation and the expected
    /// intervened explanation.
    pub score: f64,
    pub substituted_question: String,
    pub substitutions: Vec<(String, String)>,
    /// Top-k targets that could not be intervened on (absent from the
    /// text or no synonym available).
    pub skipped_targets: Vec<String>,
    /// The fresh elicitation on the substituted question.
    pub record: ExplanationRecord,
}

/// Counterfactual test: substitute synonyms for the explanation's top-k
/// tokens, re-elicit, and score rank agreement against the expected
/// intervened explanation.
pub fn ti_counterfactual_faithfulness(
    gateway: &Gateway,
    q: &Question,
    ti: &TokenImportanceExplanation,
    k: usize,
    provider: &dyn SynonymProvider,
    params: &GenerationParams,
) -> Result<CounterfactualOutcome, FaithfulnessError> {
    let top: Vec<&str> = ti.top_k(k).collect();
    let mut present = Vec::new();
    let mut skipped = Vec::new();
    // Missing targets reduce the intervened set instead of failing.
    for token in top {
        if occurs(&q.text, token) {
            present.push(token);
        } else {
            skipped.push(token.to_string());
        }
    }
    let substitution = substitute_present(q, &present, provider)?;
    skipped.extend(substitution.skipped.iter().cloned());

    let expected_entries: Vec<(String, f64)> = ti
        .entries()
        .iter()
        .map(|(token, weight)| {
            let mapped = substitution
                .map
                .iter()
                .find(|(old, _)| old == token)
                .map(|(_, new)| new.clone())
                .unwrap_or_else(|| token.clone());
            (mapped, *weight)
        })
        .collect();
    let expected = TokenImportanceExplanation::new(expected_entries)?;

    let perturbed_q = q.with_text(substitution.text.clone())?;
    let elicited = elicit_record(
        gateway,
        &perturbed_q,
        ExplanationMode::TokenImportance,
        params,
        Provenance::Original,
        1,
    )?;
    let fresh = elicited
        .record
        .explanation
        .as_token_importance()
        .expect("token-importance elicitation");
    let score = token_rank_agreement(fresh, &expected, k);
    Ok(CounterfactualOutcome {
        score,
        substituted_question: substitution.text,
        substitutions: substitution.map,
        skipped_targets: skipped,
        record: elicited.record.clone(),
    })
}

/// Outcome of the early-answering test.
#[derive(Debug, Clone)]
pub struct EarlyAnsweringOutcome {
    /// Fraction of reasoning prefixes whose answer equals the full
    /// answer. Lower means less of the reasoning is post-hoc.
    pub fraction: f64,
    /// Parsed answer per prefix length 1..=n; `None` when unparseable
    /// (counted as non-matching).
    pub prefix_answers: Vec<Option<Answer>>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Early answering: for every prefix of the chain, ask for the final
/// answer given only those steps, and count agreement with the full
/// answer. Only step text matters; per-step confidences never reach the
/// prompt.
pub fn cot_early_answering(
    gateway: &Gateway,
    q: &Question,
    cot: &CoTExplanation,
    full_answer: &Answer,
    params: &GenerationParams,
) -> Result<EarlyAnsweringOutcome, FaithfulnessError> {
    let n = cot.len();
    let mut prefix_answers = Vec::with_capacity(n);
    let mut diagnostics = Vec::new();
    let mut matches = 0usize;
    for t in 1..=n {
        let steps: Vec<&str> = cot.steps()[..t].iter().map(|s| s.text.as_str()).collect();
        let prompt = early_answer_prompt(q, &steps);
        let text = gateway.complete(&CompletionRequest::new(prompt, params.clone()))?;
        match parse_early_answer(&text, q.dataset_kind) {
            Ok(answer) => {
                if answers_equal(&answer, full_answer) {
                    matches += 1;
                }
                prefix_answers.push(Some(answer));
            }
            Err(e) => {
                diagnostics.push(
                    Diagnostic::new(
                        &q.id,
                        "early_answering",
                        format!("prefix {t}: unparseable answer counted as non-matching ({e})"),
                    )
                    .with_offending_line(e.offending_line()),
                );
                prefix_answers.push(None);
            }
        }
    }
    Ok(EarlyAnsweringOutcome {
        fraction: matches as f64 / n as f64,
        prefix_answers,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{CoTStep, DatasetKind};
    use crate::gateway::{MockBackend, MockFixture, MockRule, ResponseCache};
    use crate::testkit::{early_answer_response, rule_containing, ti_weighted_response};
    use std::sync::Arc;

    const PEACHES_QUESTION: &str =
        "Jake has 11 fewer peaches than Steven. If Jake has 17 peaches. How many peaches does Steven have?";

    fn question() -> Question {
        Question::new(
            "q1",
            PEACHES_QUESTION,
            DatasetKind::MathWord,
            Some(Answer::Numeric("28".parse().unwrap())),
        )
        .unwrap()
    }

    fn params() -> GenerationParams {
        GenerationParams::new("mock-model", 0.0, 512)
    }

    fn gateway(rules: Vec<MockRule>) -> (Gateway, tempfile::TempDir) {
        let dir = tempfile::tempdir().unwrap();
        let cache = ResponseCache::open(dir.path().join("cache.jsonl")).unwrap();
        let backend = Arc::new(MockBackend::from_fixture(MockFixture { rules }).unwrap());
        (Gateway::new(backend).with_cache(cache), dir)
    }

    fn wordlist() -> WordlistSynonyms {
        WordlistSynonyms::new([
            ("peaches".to_string(), "nectarines".to_string()),
            ("jake".to_string(), "james".to_string()),
            ("steven".to_string(), "stephen".to_string()),
        ])
    }

    fn ti(tokens: &[(&str, f64)]) -> TokenImportanceExplanation {
        TokenImportanceExplanation::new(tokens.iter().map(|(t, w)| (t.to_string(), *w)).collect())
            .unwrap()
    }

    #[test]
    fn wordlist_substitution_replaces_all_occurrences() {
        let sub = synonym_substitute(&question(), &["peaches"], &wordlist()).unwrap();
        assert!(!sub.text.contains("peaches"));
        assert_eq!(sub.text.matches("nectarines").count(), 3);
        assert_eq!(
            sub.map,
            vec![("peaches".to_string(), "nectarines".to_string())]
        );
        assert!(sub.skipped.is_empty());
    }

    #[test]
    fn empty_targets_change_nothing() {
        let sub = synonym_substitute(&question(), &[], &wordlist()).unwrap();
        assert_eq!(sub.text, question().text);
        assert!(sub.map.is_empty());
    }

    #[test]
    fn absent_target_is_an_error() {
        let err = synonym_substitute(&question(), &["bananas"], &wordlist()).unwrap_err();
        assert!(matches!(
            err,
            FaithfulnessError::TargetNotFound { target } if target == "bananas"
        ));
    }

    #[test]
    fn missing_synonym_is_skipped_and_recorded() {
        let provider = WordlistSynonyms::new([("peaches".to_string(), "nectarines".to_string())]);
        let sub = synonym_substitute(&question(), &["peaches", "jake"], &provider).unwrap();
        assert_eq!(sub.skipped, vec!["jake".to_string()]);
        assert_eq!(sub.map.len(), 1);
        assert!(sub.text.contains("Jake"));
    }

    #[test]
    fn capitalization_transfers_to_replacement() {
        let q = Question::new(
            "c1",
            "Peaches are great. I love peaches!",
            DatasetKind::MathWord,
            None,
        )
        .unwrap();
        let sub = synonym_substitute(&q, &["peaches"], &wordlist()).unwrap();
        assert_eq!(sub.text, "Nectarines are great. I love nectarines!");
    }

    #[test]
    fn perfect_reflector_scores_one() {
        let original = ti(&[("peaches", 0.6), ("jake", 0.3), ("steven", 0.1)]);
        // The fresh explanation mirrors every substitution at its rank.
        let reflected = ti_weighted_response(
            &[("nectarines", 60), ("james", 30), ("stephen", 10)],
            "28",
            100,
        );
        let (gw, _dir) = gateway(vec![rule_containing("nectarines", vec![reflected])]);
        let outcome =
            ti_counterfactual_faithfulness(&gw, &question(), &original, 3, &wordlist(), &params())
                .unwrap();
        assert_eq!(outcome.score, 1.0);
        assert_eq!(outcome.substitutions.len(), 3);
        assert!(outcome.skipped_targets.is_empty());
    }

    #[test]
    fn partial_reflection_scores_one_third() {
        let original = ti(&[("peaches", 0.6), ("jake", 0.3), ("steven", 0.1)]);
        let partial =
            ti_weighted_response(&[("nectarines", 60), ("bob", 30), ("carol", 10)], "28", 100);
        let (gw, _dir) = gateway(vec![rule_containing("nectarines", vec![partial])]);
        let outcome =
            ti_counterfactual_faithfulness(&gw, &question(), &original, 3, &wordlist(), &params())
                .unwrap();
        assert_eq!(outcome.score, 1.0 / 3.0);
    }

    #[test]
    fn zero_reflection_scores_zero() {
        let original = ti(&[("peaches", 0.6), ("jake", 0.3), ("steven", 0.1)]);
        let oblivious =
            ti_weighted_response(&[("peaches", 60), ("jake", 30), ("steven", 10)], "28", 100);
        let (gw, _dir) = gateway(vec![rule_containing("nectarines", vec![oblivious])]);
        let outcome =
            ti_counterfactual_faithfulness(&gw, &question(), &original, 3, &wordlist(), &params())
                .unwrap();
        assert_eq!(outcome.score, 0.0);
    }

    fn cot(steps: &[&str]) -> CoTExplanation {
        CoTExplanation::new(
            steps
                .iter()
                .map(|s| CoTStep {
                    text: s.to_string(),
                    confidence: None,
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_answer_gives_fraction_one() {
        let (gw, _dir) = gateway(vec![rule_containing(
            "Read the question and the reasoning steps",
            vec![early_answer_response("28")],
        )]);
        let chain = cot(&["a", "b", "c"]);
        let outcome = cot_early_answering(
            &gw,
            &question(),
            &chain,
            &Answer::Numeric("28".parse().unwrap()),
            &params(),
        )
        .unwrap();
        assert_eq!(outcome.fraction, 1.0);
    }

    #[test]
    fn full_context_only_mock_gives_one_over_n() {
        // Prefix rules: the longest prefix matches first.
        let (gw, _dir) = gateway(vec![
            rule_containing("Step 3:", vec![early_answer_response("28")]),
            rule_containing("Step 2:", vec![early_answer_response("17")]),
            rule_containing("Step 1:", vec![early_answer_response("17")]),
        ]);
        let chain = cot(&["first fact", "second fact", "the conclusion"]);
        let outcome = cot_early_answering(
            &gw,
            &question(),
            &chain,
            &Answer::Numeric("28".parse().unwrap()),
            &params(),
        )
        .unwrap();
        assert_eq!(outcome.fraction, 1.0 / 3.0);
        assert_eq!(
            outcome.prefix_answers,
            vec![
                Some(Answer::Numeric("17".parse().unwrap())),
                Some(Answer::Numeric("17".parse().unwrap())),
                Some(Answer::Numeric("28".parse().unwrap())),
            ]
        );
    }

    #[test]
    fn single_step_mismatch_gives_zero() {
        let (gw, _dir) = gateway(vec![rule_containing(
            "Step 1:",
            vec![early_answer_response("17")],
        )]);
        let chain = cot(&["only step"]);
        let outcome = cot_early_answering(
            &gw,
            &question(),
            &chain,
            &Answer::Numeric("28".parse().unwrap()),
            &params(),
        )
        .unwrap();
        assert_eq!(outcome.fraction, 0.0);
    }

    #[test]
    fn unparseable_prefixes_count_as_non_matching() {
        let (gw, _dir) = gateway(vec![
            rule_containing("Step 2:", vec![early_answer_response("28")]),
            rule_containing("Step 1:", vec!["shrug".to_string()]),
        ]);
        let chain = cot(&["first", "second"]);
        let outcome = cot_early_answering(
            &gw,
            &question(),
            &chain,
            &Answer::Numeric("28".parse().unwrap()),
            &params(),
        )
        .unwrap();
        assert_eq!(outcome.fraction, 0.5);
        assert_eq!(outcome.prefix_answers[0], None);
        assert_eq!(outcome.diagnostics.len(), 1);
    }

    #[test]
    fn confidences_do_not_affect_early_answering() {
        let with_conf = CoTExplanation::new(vec![
            CoTStep {
                text: "alpha".into(),
                confidence: Some(crate::domain::ConfidenceScore::new(0.2).unwrap()),
            },
            CoTStep {
                text: "beta".into(),
                confidence: Some(crate::domain::ConfidenceScore::new(0.9).unwrap()),
            },
        ])
        .unwrap();
        let without = cot(&["alpha", "beta"]);
        let (gw, _dir) = gateway(vec![rule_containing(
            "reasoning steps",
            vec![early_answer_response("28")],
        )]);
        let a = cot_early_answering(
            &gw,
            &question(),
            &with_conf,
            &Answer::Numeric("28".parse().unwrap()),
            &params(),
        )
        .unwrap();
        let b = cot_early_answering(
            &gw,
            &question(),
            &without,
            &Answer::Numeric("28".parse().unwrap()),
            &params(),
        )
        .unwrap();
        assert_eq!(a.fraction, b.fraction);
        assert_eq!(a.prefix_answers, b.prefix_answers);
    }
}
