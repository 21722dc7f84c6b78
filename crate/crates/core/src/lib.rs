//! Uncertainty estimation for natural-language explanations of black-box LLMs.
//!
//! The library elicits token-importance and chain-of-thought explanations
//! from a completion backend, perturbs the input (paraphrases) or the model
//! (temperature sampling), and scores how stable the explanations are under
//! those perturbations. Low agreement means an uncertain explanation.
//!
//! The main pieces:
//!
//! - [`domain`]: questions, answers, explanations, and the records tying
//!   them together.
//! - [`prompting`]: the prompt templates used for elicitation, stored as
//!   byte-exact text assets.
//! - [`gateway`]: backend access (HTTP or scripted mock) with persistent
//!   response caching, retries, budgets, and a concurrency limit.
//! - [`parser`]: turns the rigid instructed response formats back into
//!   domain types, tolerating real-model formatting drift.
//! - [`perturbation`]: builds probing sets via paraphrasing (sample
//!   probing) or repeated sampling at a temperature (model probing).
//! - [`agreement`]: the metric core — token rank/set agreement, chain-of-
//!   thought agreement via binary entailment, and the mean-agreement
//!   uncertainty scores.
//! - [`faithfulness`]: counterfactual synonym substitution for token
//!   importance and early answering for chain of thought.
//! - [`analysis`]: Welch t-tests, correctness splits, correlations, and
//!   run summaries.
//! - [`runner`]: the batch pipeline behind the CLI.

pub mod agreement;
pub mod analysis;
pub mod dataset;
mod decimal;
pub mod domain;
pub mod faithfulness;
pub mod gateway;
pub mod parser;
pub mod perturbation;
pub mod prompting;
pub mod runner;
pub mod testkit;

pub use decimal::{Decimal, DecimalParseError};
pub use domain::{
    answers_equal, normalize_token, Answer, CoTExplanation, CoTStep, ConfidenceScore, DatasetKind,
    Diagnostic, Explanation, ExplanationMode, ExplanationRecord, GenerationParams, Plausibility,
    Provenance, Question, TokenImportanceExplanation,
};
