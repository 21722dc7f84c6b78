//! Builders for scripted mock fixtures.
//!
//! Tests (and demos) need responses that conform to the instructed
//! output formats; assembling those strings by hand is error-prone.
//! These helpers render format-conforming responses and fixture rules
//! from structured inputs.

use crate::gateway::{MockBackend, MockMatcher, MockRule};

/// Weighted token-importance response: "Word: w, Importance: p%" lines
/// plus the final-answer line. Percentages are integers on the 0-100
/// scale.
pub fn ti_weighted_response(entries: &[(&str, u32)], answer: &str, confidence: u32) -> String {
    let mut out = String::new();
    for (word, pct) in entries {
        out.push_str(&format!("Word: {word}, Importance: {pct}%\n"));
    }
    out.push_str(&format!(
        "Final answer and overall confidence (0-100): {answer}, {confidence}%"
    ));
    out
}

/// Rank-only token-importance response: a numbered word list plus the
/// final-answer line.
pub fn ti_ranked_response(tokens: &[&str], answer: &str, confidence: u32) -> String {
    let mut out = String::new();
    for (i, token) in tokens.iter().enumerate() {
        out.push_str(&format!("{}. {token}\n", i + 1));
    }
    out.push_str(&format!(
        "Final Answer and Overall Confidence (0-100): {answer}, {confidence}%"
    ));
    out
}

/// Chain-of-thought response: "Step k:" lines with optional per-step
/// confidences plus the final-answer line.
pub fn cot_response(steps: &[(&str, Option<u32>)], answer: &str, confidence: u32) -> String {
    let mut out = String::new();
    for (i, (text, conf)) in steps.iter().enumerate() {
        match conf {
            Some(pct) => out.push_str(&format!("Step {}: {text}, Confidence: {pct}%\n", i + 1)),
            None => out.push_str(&format!("Step {}: {text}\n", i + 1)),
        }
    }
    out.push_str(&format!(
        "Final answer and overall confidence (0-100): {answer}, {confidence}%"
    ));
    out
}

/// Paraphrase response in the instructed Python-list shape.
pub fn paraphrase_list_response(items: &[&str]) -> String {
    let quoted: Vec<String> = items.iter().map(|s| format!("\"{s}\"")).collect();
    format!("[{}]", quoted.join(", "))
}

/// Early-answering response.
pub fn early_answer_response(answer: &str) -> String {
    format!("Final Answer: {answer}")
}

/// Rule matching any prompt that contains the given text literally.
pub fn rule_containing(text: &str, responses: Vec<String>) -> MockRule {
    MockRule {
        matcher: MockMatcher::Regex(format!("(?s){}", regex::escape(text))),
        responses,
    }
}

/// Rule with a raw regex.
pub fn rule_regex(pattern: &str, responses: Vec<String>) -> MockRule {
    MockRule {
        matcher: MockMatcher::Regex(pattern.to_string()),
        responses,
    }
}

/// Rule matching one exact prompt by digest.
pub fn rule_for_prompt(prompt: &str, responses: Vec<String>) -> MockRule {
    MockRule {
        matcher: MockMatcher::ExactDigest(MockBackend::prompt_digest(prompt)),
        responses,
    }
}

/// Regex matching the token-importance prompt (either family) for one
/// exact question text.
pub fn ti_prompt_pattern(question_text: &str) -> String {
    format!(
        r"(?s)^Read the question, and .*Q: {}$",
        regex::escape(question_text)
    )
}

/// Regex matching the chain-of-thought prompt for one exact question
/// text.
pub fn cot_prompt_pattern(question_text: &str) -> String {
    format!(
        r"(?s)^Read the question, give your answer.*Q: {}$",
        regex::escape(question_text)
    )
}

/// Regex matching the early-answering prompt for one question.
pub fn early_answer_pattern(question_text: &str) -> String {
    format!(
        r"(?s)^Read the question and the reasoning steps.*Q: {}",
        regex::escape(question_text)
    )
}

/// Regex matching the paraphrase prompt for one question.
pub fn paraphrase_prompt_pattern(question_text: &str) -> String {
    format!(
        r"(?s)^Paraphrase the question.*{}$",
        regex::escape(question_text)
    )
}

/// One way a scripted model answers a question.
#[derive(Debug, Clone)]
pub struct ResponseScript {
    /// Weighted token-importance entries (percent scale).
    pub ti_entries: Vec<(String, u32)>,
    pub cot_steps: Vec<String>,
    pub answer: String,
    pub confidence_pct: u32,
}

impl ResponseScript {
    fn ti_text(&self) -> String {
        let entries: Vec<(&str, u32)> = self
            .ti_entries
            .iter()
            .map(|(t, w)| (t.as_str(), *w))
            .collect();
        ti_weighted_response(&entries, &self.answer, self.confidence_pct)
    }

    fn cot_text(&self) -> String {
        let steps: Vec<(&str, Option<u32>)> = self
            .cot_steps
            .iter()
            .map(|s| (s.as_str(), Some(self.confidence_pct)))
            .collect();
        cot_response(&steps, &self.answer, self.confidence_pct)
    }
}

/// Scripted behavior for one question across the whole pipeline.
///
/// With a single variant the mock is fully consistent: every paraphrase
/// and every temperature draw yields the same explanation. With several
/// variants, temperature draw i serves variant `(i-1) % len` and the
/// j-th paraphrase (1-based) serves variant `j % len`, so probing sees
/// divergent explanations.
#[derive(Debug, Clone)]
pub struct QuestionScript {
    pub paraphrases: Vec<String>,
    pub variants: Vec<ResponseScript>,
}

/// Builds the full rule set for one scripted question: paraphrase list,
/// explanation responses for the question and each paraphrase, and an
/// early-answer script (variant 0's answer).
pub fn scripted_question_rules(question_text: &str, script: &QuestionScript) -> Vec<MockRule> {
    assert!(!script.variants.is_empty(), "need at least one variant");
    let mut rules = Vec::new();
    let paraphrase_refs: Vec<&str> = script.paraphrases.iter().map(String::as_str).collect();
    rules.push(rule_regex(
        &paraphrase_prompt_pattern(question_text),
        vec![paraphrase_list_response(&paraphrase_refs)],
    ));

    let ti_variants: Vec<String> = script
        .variants
        .iter()
        .map(ResponseScript::ti_text)
        .collect();
    let cot_variants: Vec<String> = script
        .variants
        .iter()
        .map(ResponseScript::cot_text)
        .collect();
    rules.push(rule_regex(&ti_prompt_pattern(question_text), ti_variants));
    rules.push(rule_regex(&cot_prompt_pattern(question_text), cot_variants));

    for (j, paraphrase) in script.paraphrases.iter().enumerate() {
        let variant = &script.variants[(j + 1) % script.variants.len()];
        rules.push(rule_regex(
            &ti_prompt_pattern(paraphrase),
            vec![variant.ti_text()],
        ));
        rules.push(rule_regex(
            &cot_prompt_pattern(paraphrase),
            vec![variant.cot_text()],
        ));
    }

    rules.push(rule_regex(
        &early_answer_pattern(question_text),
        vec![early_answer_response(&script.variants[0].answer)],
    ));
    rules
}

/// The signatures question used across fixtures.
pub const SIGNATURES_QUESTION: &str =
    "How many signatures do the sisters need to collect to reach their goal?";

/// Ten reference paraphrases of [`SIGNATURES_QUESTION`].
pub const SIGNATURES_PARAPHRASES: [&str; 10] = [
    "What is the number of signatures the sisters need to collect to reach their goal?",
    "How many signatures must the sisters acquire to reach their goal?",
    "What is the amount of signatures the sisters need to collect to reach their goal?",
    "How many signatures do the sisters have to collect to reach their goal?",
    "What is the total number of signatures the sisters need to collect to reach their goal?",
    "How many signatures do the sisters require to reach their goal?",
    "What is the quantity of signatures the sisters need to collect to reach their goal?",
    "How many signatures do the sisters need to gather to reach their goal?",
    "What is the sum of signatures the sisters need to collect to reach their goal?",
    "How many signatures do the sisters need to acquire to reach their goal?",
];
