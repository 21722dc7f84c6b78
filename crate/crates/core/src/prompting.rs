//! Prompt construction for explanation elicitation, paraphrase
//! generation, and the auxiliary judge/synonym/early-answer prompts.
//!
//! Templates live as text assets under `assets/` and are embedded
//! byte-exact; the only change applied at render time is filling the
//! `{question}` slot (plus `{steps}`, `{premise}`, … for the auxiliary
//! prompts). Keeping them as files makes prompt drift diff-visible,
//! which matters because the response parser relies on the instructed
//! format.
//!
//! The token-importance and chain-of-thought templates all instruct the
//! model to finish with a "Final answer and overall confidence (0-100):"
//! line. Casing varies between template families; the parser matches the
//! anchor case-insensitively.

use crate::domain::{DatasetKind, ExplanationMode, Question};

/// Placeholder filled with the question text.
pub const QUESTION_SLOT: &str = "{question}";

/// Lowercased anchor phrase every TI/CoT prompt instructs the model to
/// emit before its final answer. The parser matches it case-insensitively.
pub const FINAL_ANSWER_ANCHOR: &str = "final answer and overall confidence";

/// What a template elicits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptMode {
    TokenImportance,
    Cot,
    Paraphrase,
}

/// Token-importance template family.
///
/// `Weighted` asks for an importance score per word (the verbalized
/// template); `Ranked` asks for a numbered list sorted by importance
/// (the per-dataset probing template).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TiStyle {
    Weighted,
    Ranked,
}

impl TiStyle {
    /// The default family for each dataset kind.
    pub fn default_for(kind: DatasetKind) -> Self {
        match kind {
            DatasetKind::MathWord => TiStyle::Weighted,
            DatasetKind::YesNo | DatasetKind::PlausibleImplausible => TiStyle::Ranked,
        }
    }
}

/// Chain-of-thought template family: with or without per-step confidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CotStyle {
    StepConfidence,
    Plain,
}

/// One template asset.
#[derive(Debug, Clone, Copy)]
pub struct PromptTemplate {
    pub mode: PromptMode,
    /// `None` for the dataset-independent paraphrase template.
    pub dataset_kind: Option<DatasetKind>,
    /// Asset file stem, e.g. `ti_math_word`.
    pub name: &'static str,
    pub text: &'static str,
}

impl PromptTemplate {
    /// Fills the question slot. Pure; the question is embedded verbatim.
    pub fn render(&self, question_text: &str) -> String {
        self.text.replacen(QUESTION_SLOT, question_text, 1)
    }

    /// Every elicitation template, for sweeps and invariant checks.
    pub fn all() -> &'static [PromptTemplate] {
        ALL_TEMPLATES
    }
}

macro_rules! tpl {
    ($mode:expr, $kind:expr, $name:literal) => {
        PromptTemplate {
            mode: $mode,
            dataset_kind: $kind,
            name: $name,
            text: include_str!(concat!("../assets/", $name, ".prompt")),
        }
    };
}

static TI_WEIGHTED_MATH: PromptTemplate = tpl!(
    PromptMode::TokenImportance,
    Some(DatasetKind::MathWord),
    "ti_math_word"
);
static TI_WEIGHTED_YESNO: PromptTemplate = tpl!(
    PromptMode::TokenImportance,
    Some(DatasetKind::YesNo),
    "ti_weighted_yes_no"
);
static TI_WEIGHTED_PLAUSIBLE: PromptTemplate = tpl!(
    PromptMode::TokenImportance,
    Some(DatasetKind::PlausibleImplausible),
    "ti_weighted_plausible_implausible"
);
static TI_RANKED_MATH: PromptTemplate = tpl!(
    PromptMode::TokenImportance,
    Some(DatasetKind::MathWord),
    "ti_ranked_math_word"
);
static TI_RANKED_YESNO: PromptTemplate = tpl!(
    PromptMode::TokenImportance,
    Some(DatasetKind::YesNo),
    "ti_yes_no"
);
static TI_RANKED_PLAUSIBLE: PromptTemplate = tpl!(
    PromptMode::TokenImportance,
    Some(DatasetKind::PlausibleImplausible),
    "ti_plausible_implausible"
);
static COT_CONF_MATH: PromptTemplate = tpl!(
    PromptMode::Cot,
    Some(DatasetKind::MathWord),
    "cot_math_word"
);
static COT_CONF_YESNO: PromptTemplate =
    tpl!(PromptMode::Cot, Some(DatasetKind::YesNo), "cot_yes_no");
static COT_CONF_PLAUSIBLE: PromptTemplate = tpl!(
    PromptMode::Cot,
    Some(DatasetKind::PlausibleImplausible),
    "cot_plausible_implausible"
);
static COT_PLAIN_MATH: PromptTemplate = tpl!(
    PromptMode::Cot,
    Some(DatasetKind::MathWord),
    "cot_plain_math_word"
);
static COT_PLAIN_YESNO: PromptTemplate = tpl!(
    PromptMode::Cot,
    Some(DatasetKind::YesNo),
    "cot_plain_yes_no"
);
static COT_PLAIN_PLAUSIBLE: PromptTemplate = tpl!(
    PromptMode::Cot,
    Some(DatasetKind::PlausibleImplausible),
    "cot_plain_plausible_implausible"
);
static PARAPHRASE: PromptTemplate = tpl!(PromptMode::Paraphrase, None, "paraphrase");

static ALL_TEMPLATES: &[PromptTemplate] = &[
    TI_WEIGHTED_MATH,
    TI_WEIGHTED_YESNO,
    TI_WEIGHTED_PLAUSIBLE,
    TI_RANKED_MATH,
    TI_RANKED_YESNO,
    TI_RANKED_PLAUSIBLE,
    COT_CONF_MATH,
    COT_CONF_YESNO,
    COT_CONF_PLAUSIBLE,
    COT_PLAIN_MATH,
    COT_PLAIN_YESNO,
    COT_PLAIN_PLAUSIBLE,
    PARAPHRASE,
];

/// The token-importance template for a dataset kind and style.
pub fn ti_template(kind: DatasetKind, style: TiStyle) -> &'static PromptTemplate {
    match (style, kind) {
        (TiStyle::Weighted, DatasetKind::MathWord) => &TI_WEIGHTED_MATH,
        (TiStyle::Weighted, DatasetKind::YesNo) => &TI_WEIGHTED_YESNO,
        (TiStyle::Weighted, DatasetKind::PlausibleImplausible) => &TI_WEIGHTED_PLAUSIBLE,
        (TiStyle::Ranked, DatasetKind::MathWord) => &TI_RANKED_MATH,
        (TiStyle::Ranked, DatasetKind::YesNo) => &TI_RANKED_YESNO,
        (TiStyle::Ranked, DatasetKind::PlausibleImplausible) => &TI_RANKED_PLAUSIBLE,
    }
}

/// The chain-of-thought template for a dataset kind and style.
pub fn cot_template(kind: DatasetKind, style: CotStyle) -> &'static PromptTemplate {
    match (style, kind) {
        (CotStyle::StepConfidence, DatasetKind::MathWord) => &COT_CONF_MATH,
        (CotStyle::StepConfidence, DatasetKind::YesNo) => &COT_CONF_YESNO,
        (CotStyle::StepConfidence, DatasetKind::PlausibleImplausible) => &COT_CONF_PLAUSIBLE,
        (CotStyle::Plain, DatasetKind::MathWord) => &COT_PLAIN_MATH,
        (CotStyle::Plain, DatasetKind::YesNo) => &COT_PLAIN_YESNO,
        (CotStyle::Plain, DatasetKind::PlausibleImplausible) => &COT_PLAIN_PLAUSIBLE,
    }
}

/// Token-importance elicitation prompt, default style for the kind.
pub fn build_ti_prompt(q: &Question) -> String {
    build_ti_prompt_styled(q, TiStyle::default_for(q.dataset_kind))
}

/// Token-importance elicitation prompt with an explicit style.
pub fn build_ti_prompt_styled(q: &Question, style: TiStyle) -> String {
    ti_template(q.dataset_kind, style).render(&q.text)
}

/// Chain-of-thought elicitation prompt (per-step confidence family).
pub fn build_cot_prompt(q: &Question) -> String {
    build_cot_prompt_styled(q, CotStyle::StepConfidence)
}

/// Chain-of-thought elicitation prompt with an explicit style.
pub fn build_cot_prompt_styled(q: &Question, style: CotStyle) -> String {
    cot_template(q.dataset_kind, style).render(&q.text)
}

/// The elicitation prompt for either explanation mode.
pub fn build_explanation_prompt(q: &Question, mode: ExplanationMode) -> String {
    match mode {
        ExplanationMode::TokenImportance => build_ti_prompt(q),
        ExplanationMode::Cot => build_cot_prompt(q),
    }
}

/// Paraphrase-generation prompt.
pub fn build_paraphrase_prompt(q: &Question) -> String {
    PARAPHRASE.render(&q.text)
}

static EARLY_ANSWER_MATH: &str = include_str!("../assets/early_answer_math_word.prompt");
static EARLY_ANSWER_YESNO: &str = include_str!("../assets/early_answer_yes_no.prompt");
static EARLY_ANSWER_PLAUSIBLE: &str =
    include_str!("../assets/early_answer_plausible_implausible.prompt");
static ENTAILMENT_JUDGE: &str = include_str!("../assets/entailment_judge.prompt");
static SYNONYM: &str = include_str!("../assets/synonym.prompt");

/// Prompt asking for the final answer given a truncated reasoning prefix.
///
/// Steps are rendered as `Step i: <text>` lines, in order.
pub fn early_answer_prompt(q: &Question, steps: &[&str]) -> String {
    let template = match q.dataset_kind {
        DatasetKind::MathWord => EARLY_ANSWER_MATH,
        DatasetKind::YesNo => EARLY_ANSWER_YESNO,
        DatasetKind::PlausibleImplausible => EARLY_ANSWER_PLAUSIBLE,
    };
    let rendered_steps = steps
        .iter()
        .enumerate()
        .map(|(i, s)| format!("Step {}: {}", i + 1, s))
        .collect::<Vec<_>>()
        .join("\n");
    template
        .replacen(QUESTION_SLOT, &q.text, 1)
        .replacen("{steps}", &rendered_steps, 1)
}

/// One-word NLI judgment prompt for a premise/hypothesis pair.
pub fn entailment_judge_prompt(premise: &str, hypothesis: &str) -> String {
    ENTAILMENT_JUDGE
        .replacen("{premise}", premise, 1)
        .replacen("{hypothesis}", hypothesis, 1)
}

/// Prompt asking for a single in-context synonym.
pub fn synonym_prompt(word: &str, sentence: &str) -> String {
    SYNONYM
        .replacen("{word}", word, 1)
        .replacen("{sentence}", sentence, 1)
}
