//! Parsers for the instructed response formats.
//!
//! The prompts pin down rigid output shapes, but real models drift:
//! casing changes, "%" appears or disappears, punctuation moves around.
//! These parsers tolerate that drift while staying typed — anything that
//! cannot be read under the instructed format is a [`ParseError`], never
//! a best-effort guess, and every error carries the offending line.

use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use crate::domain::{
    Answer, CoTExplanation, CoTStep, ConfidenceScore, DatasetKind, DomainError,
    TokenImportanceExplanation,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("no final-answer line found (last line: {context:?})")]
    MissingFinalAnswer { context: String },
    #[error("no token-importance entries found (context: {context:?})")]
    NoTokens { context: String },
    #[error("no reasoning steps found (context: {context:?})")]
    NoSteps { context: String },
    #[error("malformed answer in line {line:?}: {source}")]
    MalformedAnswer { line: String, source: DomainError },
    #[error("no paraphrases could be extracted (context: {context:?})")]
    EmptyParaphraseSet { context: String },
    #[error("entailment judge response unparseable: {response:?}")]
    JudgeUnparseable { response: String },
}

impl ParseError {
    /// The response line (or closest context) behind this error, for
    /// diagnostics records.
    pub fn offending_line(&self) -> &str {
        match self {
            ParseError::MissingFinalAnswer { context }
            | ParseError::NoTokens { context }
            | ParseError::NoSteps { context }
            | ParseError::EmptyParaphraseSet { context } => context,
            ParseError::MalformedAnswer { line, .. } => line,
            ParseError::JudgeUnparseable { response } => response,
        }
    }
}

/// NLI verdict emitted by the entailment judge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NliLabel {
    Entailment,
    Contradiction,
    Neutral,
}

/// Parsed token-importance response.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTokenImportance {
    pub explanation: TokenImportanceExplanation,
    pub answer: Answer,
    pub overall_confidence: Option<ConfidenceScore>,
    /// Sum of the raw weights (already divided by 100) before
    /// renormalization; `None` for rank-only responses.
    pub raw_weight_total: Option<f64>,
    pub warnings: Vec<String>,
}

/// Parsed chain-of-thought response.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCot {
    pub explanation: CoTExplanation,
    pub answer: Answer,
    pub overall_confidence: Option<ConfidenceScore>,
    pub warnings: Vec<String>,
}

fn weighted_entry_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)^\s*word\s*:?\s*(.+)\s*,\s*importance\s*:?\s*([0-9]+(?:\.[0-9]+)?)\s*%?\s*\.?\s*$")
            .expect("static regex")
    })
}

fn ranked_entry_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*[0-9]{1,3}[.)]\s+(.+?)\s*$").expect("static regex"))
}

fn final_answer_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)final\s+answer\s+and\s+overall\s+confidence[^:]*:\s*(.+)$")
            .expect("static regex")
    })
}

fn step_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^\s*step\s+([0-9]+)\s*:\s*(.*)$").expect("static regex"))
}

fn step_confidence_suffix_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i),?\s*confidence\s*:?\s*([0-9]+(?:\.[0-9]+)?)\s*%?\s*\.?\s*$")
            .expect("static regex")
    })
}

fn percentage_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^\s*([0-9]+(?:\.[0-9]+)?)\s*%?\s*\.?\s*$").expect("static regex")
    })
}

fn quoted_string_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r#""((?:[^"\\]|\\.)*)""#).expect("static regex"))
}

fn last_nonempty_line(text: &str) -> String {
    text.lines()
        .rev()
        .find(|l| !l.trim().is_empty())
        .unwrap_or("")
        .trim()
        .to_string()
}

/// Parses "NN" or "NN%" (0–100 scale) into a value in that scale.
///
/// Integers with leading zeros ("000", "075") are rejected: after a
/// comma those are thousands groups of the answer, never confidences.
fn parse_percentage(text: &str) -> Option<f64> {
    let caps = percentage_re().captures(text)?;
    let digits = &caps[1];
    let integer_part = digits.split('.').next().unwrap_or(digits);
    if integer_part.len() > 1 && integer_part.starts_with('0') {
        return None;
    }
    digits.parse::<f64>().ok()
}

fn percent_to_confidence(raw: f64, warnings: &mut Vec<String>) -> ConfidenceScore {
    if raw > 100.0 {
        warnings.push(format!("confidence {raw}% clamped to 100%"));
    }
    ConfidenceScore::saturating(raw / 100.0)
}

/// Splits the text after the final-answer anchor into answer text and an
/// optional trailing confidence. The confidence, when present, is the
/// part after the last comma that reads as a percentage; answers may
/// themselves contain commas ("1,000").
fn split_answer_and_confidence(rest: &str) -> (&str, Option<f64>) {
    if let Some(idx) = rest.rfind(',') {
        let (left, right) = (rest[..idx].trim(), &rest[idx + 1..]);
        if let Some(pct) = parse_percentage(right) {
            return (left, Some(pct));
        }
    }
    (rest.trim(), None)
}

struct FinalAnswerLine {
    answer: Answer,
    confidence: Option<ConfidenceScore>,
}

fn parse_final_answer_line(
    text: &str,
    kind: DatasetKind,
    warnings: &mut Vec<String>,
) -> Result<FinalAnswerLine, ParseError> {
    let mut anchored = None;
    for line in text.lines() {
        if let Some(caps) = final_answer_re().captures(line) {
            anchored = Some((line, caps.get(1).expect("group 1").as_str()));
        }
    }
    let (line, rest) = anchored.ok_or_else(|| ParseError::MissingFinalAnswer {
        context: last_nonempty_line(text),
    })?;
    let (answer_text, pct) = split_answer_and_confidence(rest);
    let answer =
        Answer::parse_text(kind, answer_text).map_err(|source| ParseError::MalformedAnswer {
            line: line.trim().to_string(),
            source,
        })?;
    Ok(FinalAnswerLine {
        answer,
        confidence: pct.map(|p| percent_to_confidence(p, warnings)),
    })
}

/// Parses a token-importance response in either instructed format:
/// "Word: w, Importance: p" lines (weights read as percents) or a
/// numbered rank list (synthetic descending weights `n-i+1`, renormalized
/// to sum 1 so only rank information survives, which is all the rank
/// metric consumes).
pub fn parse_token_importance(
    text: &str,
    kind: DatasetKind,
) -> Result<ParsedTokenImportance, ParseError> {
    let mut warnings = Vec::new();
    let final_line = parse_final_answer_line(text, kind, &mut warnings)?;

    let lines: Vec<&str> = text
        .lines()
        .filter(|l| !final_answer_re().is_match(l))
        .collect();

    let mut entries: Vec<(String, f64)> = Vec::new();
    let mut raw_weight_total = None;
    for line in &lines {
        if let Some(caps) = weighted_entry_re().captures(line) {
            let token = caps[1].trim().to_string();
            let pct: f64 = caps[2].parse().unwrap_or(0.0);
            entries.push((token, pct / 100.0));
        }
    }
    if !entries.is_empty() {
        let total: f64 = entries.iter().map(|(_, w)| w).sum();
        raw_weight_total = Some(total);
        if total > 0.0 {
            for (_, w) in &mut entries {
                *w /= total;
            }
        }
        if (total - 1.0).abs() > 1e-9 {
            warnings.push(format!(
                "importance weights sum to {:.4}, renormalized to 1",
                total
            ));
        }
    } else {
        let ranked: Vec<String> = lines
            .iter()
            .filter_map(|l| ranked_entry_re().captures(l))
            .map(|caps| caps[1].trim().to_string())
            .collect();
        let n = ranked.len();
        let total = (n * (n + 1)) as f64 / 2.0;
        entries = ranked
            .into_iter()
            .enumerate()
            .map(|(i, token)| (token, (n - i) as f64 / total))
            .collect();
    }

    let explanation =
        TokenImportanceExplanation::new(entries).map_err(|_| ParseError::NoTokens {
            context: last_nonempty_line(text),
        })?;
    Ok(ParsedTokenImportance {
        explanation,
        answer: final_line.answer,
        overall_confidence: final_line.confidence,
        raw_weight_total,
        warnings,
    })
}

/// Parses a chain-of-thought response: one step per "Step k:" line in
/// response order, each with an optional trailing "Confidence: X%".
pub fn parse_cot(text: &str, kind: DatasetKind) -> Result<ParsedCot, ParseError> {
    let mut warnings = Vec::new();
    let final_line = parse_final_answer_line(text, kind, &mut warnings)?;

    let mut steps = Vec::new();
    for line in text.lines() {
        if final_answer_re().is_match(line) {
            continue;
        }
        let Some(caps) = step_re().captures(line) else {
            continue;
        };
        let body = caps.get(2).expect("group 2").as_str();
        let (text_part, confidence) = match step_confidence_suffix_re().captures(body) {
            Some(conf_caps) => {
                let pct: f64 = conf_caps[1].parse().unwrap_or(0.0);
                let stripped = body[..conf_caps.get(0).expect("match").start()].trim_end();
                (stripped, Some(percent_to_confidence(pct, &mut warnings)))
            }
            None => (body.trim_end(), None),
        };
        let text_part = text_part.trim().trim_end_matches(',').trim_end();
        if text_part.is_empty() {
            warnings.push(format!("dropped empty step line {:?}", line.trim()));
            continue;
        }
        steps.push(CoTStep {
            text: text_part.to_string(),
            confidence,
        });
    }

    let explanation = CoTExplanation::new(steps).map_err(|_| ParseError::NoSteps {
        context: last_nonempty_line(text),
    })?;
    Ok(ParsedCot {
        explanation,
        answer: final_line.answer,
        overall_confidence: final_line.confidence,
        warnings,
    })
}

/// Extracts a paraphrase list: all double-quoted strings in order, or —
/// when none are present — non-empty lines with any leading numbering
/// stripped. Duplicates and copies of the original question are kept;
/// filtering is the caller's policy.
pub fn parse_paraphrase_list(text: &str) -> Result<Vec<String>, ParseError> {
    let quoted: Vec<String> = quoted_string_re()
        .captures_iter(text)
        .map(|c| c[1].replace("\\\"", "\"").trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if !quoted.is_empty() {
        return Ok(quoted);
    }

    static ENUM_PREFIX: OnceLock<Regex> = OnceLock::new();
    let enum_prefix = ENUM_PREFIX
        .get_or_init(|| Regex::new(r"^\s*(?:[0-9]{1,3}[.)]\s*|[-*]\s*)").expect("static regex"));
    let fallback: Vec<String> = text
        .lines()
        .map(|l| enum_prefix.replace(l, "").trim().to_string())
        .filter(|l| !l.is_empty() && *l != "[" && *l != "]")
        .collect();
    if fallback.is_empty() {
        return Err(ParseError::EmptyParaphraseSet {
            context: last_nonempty_line(text),
        });
    }
    Ok(fallback)
}

/// Parses the answer from an early-answering response. Accepts a
/// "Final Answer: …" line (any casing, with or without a trailing
/// confidence) or, failing that, the first non-empty line as a bare
/// answer literal.
pub fn parse_early_answer(text: &str, kind: DatasetKind) -> Result<Answer, ParseError> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re =
        RE.get_or_init(|| Regex::new(r"(?i)final\s+answer[^:]*:\s*(.+)$").expect("static regex"));

    let mut candidate: Option<(&str, &str)> = None;
    for line in text.lines() {
        if let Some(caps) = re.captures(line) {
            candidate = Some((line, caps.get(1).expect("group 1").as_str()));
        }
    }
    let (line, rest) = match candidate {
        Some(found) => found,
        None => {
            let first = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("")
                .trim();
            (first, first)
        }
    };

    match Answer::parse_text(kind, rest) {
        Ok(answer) => Ok(answer),
        Err(_) => {
            // Tolerate a trailing ", NN%" confidence the model added anyway.
            let (answer_text, _) = split_answer_and_confidence(rest);
            Answer::parse_text(kind, answer_text).map_err(|source| ParseError::MalformedAnswer {
                line: line.trim().to_string(),
                source,
            })
        }
    }
}

/// Parses the one-word NLI judgment. Accepts the label anywhere in the
/// response as long as exactly one distinct label word occurs.
pub fn parse_entailment_label(text: &str) -> Result<NliLabel, ParseError> {
    let lowered = text.to_lowercase();
    let first_token = lowered
        .split_whitespace()
        .next()
        .map(|t| t.trim_matches(|c: char| !c.is_alphanumeric()).to_string())
        .unwrap_or_default();
    match first_token.as_str() {
        "entailment" => return Ok(NliLabel::Entailment),
        "contradiction" => return Ok(NliLabel::Contradiction),
        "neutral" => return Ok(NliLabel::Neutral),
        _ => {}
    }

    let mut found = Vec::new();
    for (word, label) in [
        ("entailment", NliLabel::Entailment),
        ("contradiction", NliLabel::Contradiction),
        ("neutral", NliLabel::Neutral),
    ] {
        if lowered
            .split(|c: char| !c.is_alphanumeric())
            .any(|t| t == word)
        {
            found.push(label);
        }
    }
    match found.as_slice() {
        [single] => Ok(*single),
        _ => Err(ParseError::JudgeUnparseable {
            response: text.trim().to_string(),
        }),
    }
}
