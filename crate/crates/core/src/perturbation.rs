//! Probing-set construction.
//!
//! Sample probing perturbs the input: the question is paraphrased and an
//! explanation is elicited for each paraphrase. Model probing perturbs
//! the model: the same prompt is sampled repeatedly at a nonzero
//! temperature. Either way the result is a [`ProbingSet`] — the original
//! explanation plus N perturbed ones — which the agreement metrics turn
//! into an uncertainty score.
//!
//! The original explanation is elicited at the run's base temperature
//! (default 0) even during model probing, so the reference is the
//! model's deterministic mode response.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    Answer, ConfidenceScore, Diagnostic, Explanation, ExplanationMode, ExplanationRecord,
    GenerationParams, Provenance, Question,
};
use crate::gateway::{CompletionRequest, Gateway, GatewayError};
use crate::parser::{parse_cot, parse_paraphrase_list, parse_token_importance, ParseError};
use crate::prompting::{build_explanation_prompt, build_paraphrase_prompt};
use crate::{domain::normalize_token, domain::DomainError};

#[derive(Debug, Error)]
pub enum PerturbationError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error("no usable paraphrases: {source}")]
    EmptyParaphraseSet { source: ParseError },
    #[error("all {requested} perturbations failed to produce a parseable explanation")]
    AllPerturbationsFailed {
        requested: u32,
        diagnostics: Vec<Diagnostic>,
    },
    #[error("original explanation failed to parse: {source}")]
    OriginalFailed { source: ParseError },
    #[error("requested perturbation count must be >= 1")]
    InvalidN,
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Which perturbation produced a probing set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbingStrategy {
    SampleProbing,
    ModelProbing,
}

impl ProbingStrategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProbingStrategy::SampleProbing => "sample_probing",
            ProbingStrategy::ModelProbing => "model_probing",
        }
    }
}

/// The original explanation and its perturbed companions.
///
/// `perturbed[i].provenance` always carries index `i + 1`; perturbations
/// that failed to parse are dropped (reducing `n_effective` below
/// `requested_n`) and recorded in `diagnostics`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbingSet {
    pub original: ExplanationRecord,
    pub perturbed: Vec<ExplanationRecord>,
    pub strategy: ProbingStrategy,
    pub requested_n: u32,
    pub diagnostics: Vec<Diagnostic>,
}

impl ProbingSet {
    pub fn n_effective(&self) -> usize {
        self.perturbed.len()
    }

    /// Checks the structural invariants, for sets loaded from disk:
    /// perturbed provenance must match the strategy and carry index
    /// `i + 1`, and the effective count never exceeds the requested one.
    pub fn validate(&self) -> Result<(), String> {
        if self.original.provenance != Provenance::Original {
            return Err("original record must carry Original provenance".to_string());
        }
        if self.perturbed.len() > self.requested_n as usize {
            return Err(format!(
                "{} perturbed records exceed requested_n {}",
                self.perturbed.len(),
                self.requested_n
            ));
        }
        for (i, record) in self.perturbed.iter().enumerate() {
            let expected = i as u32 + 1;
            let ok = match (self.strategy, record.provenance) {
                (ProbingStrategy::SampleProbing, Provenance::Paraphrase(idx)) => idx == expected,
                (ProbingStrategy::ModelProbing, Provenance::TemperatureSample(idx)) => {
                    idx == expected
                }
                _ => false,
            };
            if !ok {
                return Err(format!(
                    "perturbed[{i}] provenance {:?} does not match strategy {:?} at index {expected}",
                    record.provenance, self.strategy
                ));
            }
        }
        Ok(())
    }
}

/// Why a single elicitation failed.
#[derive(Debug, Error)]
pub enum ElicitError {
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// One parsed elicitation.
#[derive(Debug, Clone)]
pub struct Elicitation {
    pub record: ExplanationRecord,
    /// Parser warnings (clamped confidences, dropped lines).
    pub warnings: Vec<String>,
}

/// Prompts the backend for an explanation of `q` and parses the response.
pub fn elicit_record(
    gateway: &Gateway,
    q: &Question,
    mode: ExplanationMode,
    params: &GenerationParams,
    provenance: Provenance,
    sample_index: u32,
) -> Result<Elicitation, ElicitError> {
    let prompt = build_explanation_prompt(q, mode);
    let request = CompletionRequest::new(prompt.clone(), params.clone());
    let raw = gateway.complete_indexed(&request, sample_index)?;
    let (explanation, answer, confidence, warnings) = parse_explanation(&raw, q, mode)?;
    Ok(Elicitation {
        record: ExplanationRecord {
            question_id: q.id.clone(),
            prompt_text: prompt,
            raw_response: raw,
            explanation,
            parsed_answer: answer,
            verbalized_confidence: confidence,
            generation: params.clone(),
            provenance,
        },
        warnings,
    })
}

fn parse_explanation(
    raw: &str,
    q: &Question,
    mode: ExplanationMode,
) -> Result<(Explanation, Answer, Option<ConfidenceScore>, Vec<String>), ParseError> {
    match mode {
        ExplanationMode::TokenImportance => {
            let parsed = parse_token_importance(raw, q.dataset_kind)?;
            Ok((
                Explanation::TokenImportance(parsed.explanation),
                parsed.answer,
                parsed.overall_confidence,
                parsed.warnings,
            ))
        }
        ExplanationMode::Cot => {
            let parsed = parse_cot(raw, q.dataset_kind)?;
            Ok((
                Explanation::Cot(parsed.explanation),
                parsed.answer,
                parsed.overall_confidence,
                parsed.warnings,
            ))
        }
    }
}

/// Sample probing: paraphrase the question and elicit one explanation
/// per paraphrase at the base temperature carried in `params`.
///
/// Paraphrases are deduplicated after normalization and never equal the
/// original question. If the paraphraser yields fewer than `n` usable
/// forms, one re-prompt is attempted and the run proceeds with whatever
/// exists.
pub fn sample_probe(
    gateway: &Gateway,
    q: &Question,
    mode: ExplanationMode,
    n: u32,
    params: &GenerationParams,
) -> Result<ProbingSet, PerturbationError> {
    if n == 0 {
        return Err(PerturbationError::InvalidN);
    }

    let paraphrase_prompt = build_paraphrase_prompt(q);
    let paraphrase_req = CompletionRequest::new(paraphrase_prompt, params.clone());
    let first_text = gateway.complete(&paraphrase_req)?;

    let mut chosen: Vec<String> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    seen.insert(normalize_token(&q.text));
    let mut last_parse_error: Option<ParseError> = None;
    let absorb = |text: &str,
                  chosen: &mut Vec<String>,
                  seen: &mut std::collections::HashSet<String>,
                  last_parse_error: &mut Option<ParseError>| {
        match parse_paraphrase_list(text) {
            Ok(items) => {
                for item in items {
                    if chosen.len() >= n as usize {
                        break;
                    }
                    let norm = normalize_token(&item);
                    if norm.is_empty() || !seen.insert(norm) {
                        continue;
                    }
                    chosen.push(item);
                }
            }
            Err(e) => *last_parse_error = Some(e),
        }
    };
    absorb(&first_text, &mut chosen, &mut seen, &mut last_parse_error);

    if chosen.len() < n as usize {
        // Single re-prompt under a fresh sample index; a failed retry is
        // not fatal, the run proceeds with what exists.
        if let Ok(retry_text) = gateway.complete_indexed(&paraphrase_req, 2) {
            absorb(&retry_text, &mut chosen, &mut seen, &mut last_parse_error);
        }
    }
    if chosen.is_empty() {
        return Err(PerturbationError::EmptyParaphraseSet {
            source: last_parse_error.unwrap_or(ParseError::EmptyParaphraseSet {
                context: String::new(),
            }),
        });
    }

    let original = elicit_original(gateway, q, mode, params)?;
    let mut diagnostics = warnings_to_diagnostics(&q.id, "sample_probe", &original);

    // Per-paraphrase elicitations run concurrently (the gateway bounds
    // in-flight calls); assembly below is in paraphrase order.
    let outcomes: Vec<(usize, String, Result<Elicitation, ElicitError>)> =
        std::thread::scope(|scope| {
            let handles: Vec<_> = chosen
                .iter()
                .enumerate()
                .map(|(idx, paraphrase)| {
                    scope.spawn(move || {
                        let perturbed_q = q.with_text(paraphrase.clone())?;
                        Ok::<_, DomainError>(elicit_record(
                            gateway,
                            &perturbed_q,
                            mode,
                            params,
                            Provenance::Paraphrase(idx as u32 + 1),
                            1,
                        ))
                    })
                })
                .collect();
            handles
                .into_iter()
                .enumerate()
                .map(|(idx, handle)| {
                    let result = match handle.join().expect("elicitation thread") {
                        Ok(inner) => inner,
                        Err(domain_err) => Err(ElicitError::Parse(ParseError::MalformedAnswer {
                            line: chosen[idx].clone(),
                            source: domain_err,
                        })),
                    };
                    (idx, chosen[idx].clone(), result)
                })
                .collect()
        });

    let perturbed = compact_records(
        outcomes,
        &q.id,
        "sample_probe",
        Provenance::Paraphrase,
        &mut diagnostics,
    );
    if perturbed.is_empty() {
        return Err(PerturbationError::AllPerturbationsFailed {
            requested: n,
            diagnostics,
        });
    }
    Ok(ProbingSet {
        original: original.record,
        perturbed,
        strategy: ProbingStrategy::SampleProbing,
        requested_n: n,
        diagnostics,
    })
}

/// Model probing: the same prompt sampled `n` times at temperature
/// `tau`; the original record is elicited at the base temperature in
/// `params`.
pub fn model_probe(
    gateway: &Gateway,
    q: &Question,
    mode: ExplanationMode,
    n: u32,
    tau: f64,
    params: &GenerationParams,
) -> Result<ProbingSet, PerturbationError> {
    if n == 0 {
        return Err(PerturbationError::InvalidN);
    }
    let original = elicit_original(gateway, q, mode, params)?;
    let mut diagnostics = warnings_to_diagnostics(&q.id, "model_probe", &original);

    let sampled_params = params.at_temperature(tau);
    let prompt = build_explanation_prompt(q, mode);
    let request = CompletionRequest::new(prompt.clone(), sampled_params.clone());
    let texts = gateway.complete_n(&request, n)?;

    let outcomes: Vec<(usize, String, Result<Elicitation, ElicitError>)> = texts
        .into_iter()
        .enumerate()
        .map(|(idx, raw)| {
            let result = parse_explanation(&raw, q, mode)
                .map(|(explanation, answer, confidence, warnings)| Elicitation {
                    record: ExplanationRecord {
                        question_id: q.id.clone(),
                        prompt_text: prompt.clone(),
                        raw_response: raw.clone(),
                        explanation,
                        parsed_answer: answer,
                        verbalized_confidence: confidence,
                        generation: sampled_params.clone(),
                        provenance: Provenance::TemperatureSample(idx as u32 + 1),
                    },
                    warnings,
                })
                .map_err(ElicitError::from);
            (idx, raw, result)
        })
        .collect();

    let perturbed = compact_records(
        outcomes,
        &q.id,
        "model_probe",
        Provenance::TemperatureSample,
        &mut diagnostics,
    );
    if perturbed.is_empty() {
        return Err(PerturbationError::AllPerturbationsFailed {
            requested: n,
            diagnostics,
        });
    }
    Ok(ProbingSet {
        original: original.record,
        perturbed,
        strategy: ProbingStrategy::ModelProbing,
        requested_n: n,
        diagnostics,
    })
}

fn elicit_original(
    gateway: &Gateway,
    q: &Question,
    mode: ExplanationMode,
    params: &GenerationParams,
) -> Result<Elicitation, PerturbationError> {
    elicit_record(gateway, q, mode, params, Provenance::Original, 1).map_err(|e| match e {
        ElicitError::Gateway(g) => PerturbationError::Gateway(g),
        ElicitError::Parse(p) => PerturbationError::OriginalFailed { source: p },
    })
}

fn warnings_to_diagnostics(
    question_id: &str,
    stage: &str,
    elicitation: &Elicitation,
) -> Vec<Diagnostic> {
    elicitation
        .warnings
        .iter()
        .map(|w| {
            Diagnostic::new(question_id, stage, w.clone())
                .with_provenance(elicitation.record.provenance)
        })
        .collect()
}

/// Keeps successful records in slot order, renumbering provenance so
/// `perturbed[i]` carries index `i + 1`; failures become diagnostics
/// tagged with their elicitation slot.
fn compact_records(
    outcomes: Vec<(usize, String, Result<Elicitation, ElicitError>)>,
    question_id: &str,
    stage: &str,
    make_provenance: fn(u32) -> Provenance,
    diagnostics: &mut Vec<Diagnostic>,
) -> Vec<ExplanationRecord> {
    let mut records = Vec::new();
    for (slot, context, outcome) in outcomes {
        match outcome {
            Ok(elicitation) => {
                for warning in &elicitation.warnings {
                    diagnostics.push(
                        Diagnostic::new(question_id, stage, warning.clone())
                            .with_provenance(make_provenance(slot as u32 + 1)),
                    );
                }
                let mut record = elicitation.record;
                record.provenance = make_provenance(records.len() as u32 + 1);
                records.push(record);
            }
            Err(e) => {
                let mut diag = Diagnostic::new(
                    question_id,
                    stage,
                    format!("perturbation {} dropped: {e}", slot + 1),
                )
                .with_provenance(make_provenance(slot as u32 + 1));
                if let ElicitError::Parse(p) = &e {
                    diag = diag.with_offending_line(p.offending_line());
                } else {
                    diag = diag.with_offending_line(one_line(&context));
                }
                diagnostics.push(diag);
            }
        }
    }
    records
}

fn one_line(text: &str) -> String {
    let mut line: String = text
        .lines()
        .next()
        .unwrap_or("")
        .chars()
        .take(120)
        .collect();
    if line.len() < text.len() {
        line.push('…');
    }
    line
}
