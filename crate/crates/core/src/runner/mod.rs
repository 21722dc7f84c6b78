//! The batch pipeline behind the CLI: dataset ingestion, seeded
//! subsetting, per-question elicitation and probing, incremental result
//! output, and report emission.
//!
//! Per-question pipelines run concurrently on a small worker pool (the
//! gateway's semaphore bounds actual backend concurrency), but results
//! are flushed strictly in question order, so a run directory is
//! byte-identical across repetitions with a scripted backend. All
//! backend traffic goes through the response cache, which is what makes
//! interrupted or repeated runs resumable at zero additional cost.

mod config;

pub use config::{
    load_config, validate, BackendConfig, ConfigError, DatasetConfig, EntailmentConfig,
    LoadedConfig, RunConfig, RunParams, SynonymConfig,
};

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{mpsc, Arc, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agreement::{
    probing_uncertainty, AgreementError, Entailer, EntailmentBackendSpec, EntailmentDirection,
};
use crate::analysis::{summarize_run, AnalysisError, QuestionResult, RunReport, Strategy};
use crate::dataset::{load_dataset, DatasetError};
use crate::domain::{
    answers_equal, Diagnostic, ExplanationMode, GenerationParams, Provenance, Question,
};
use crate::faithfulness::{
    cot_early_answering, ti_counterfactual_faithfulness, FaithfulnessError, LlmSynonyms,
    SynonymProvider, WordlistSynonyms,
};
use crate::gateway::{
    CompletionBackend, CompletionRequest, Gateway, GatewayError, GatewayStats, HttpBackend,
    MockBackend, ResponseCache,
};
use crate::perturbation::{
    elicit_record, model_probe, sample_probe, ElicitError, PerturbationError, ProbingSet,
};
use crate::{domain::normalize_token, parser::parse_paraphrase_list};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Agreement(#[from] AgreementError),
    #[error(transparent)]
    Faithfulness(#[from] FaithfulnessError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("run produced no results")]
    NoResults,
    #[error("worker failed: {0}")]
    Worker(String),
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// What a finished (or budget-aborted) run looks like.
#[derive(Debug)]
pub struct RunOutcome {
    pub run_dir: PathBuf,
    pub stats: GatewayStats,
    pub results_written: usize,
    pub aborted_on_budget: bool,
    pub report: Option<RunReport>,
}

/// Static facts about a run, written as `manifest.json`.
#[derive(Debug, Serialize, Deserialize)]
struct RunManifest {
    config_digest: String,
    seed: u64,
    subset_size: usize,
    question_ids: Vec<String>,
}

/// Builds the configured backend wrapped in a gateway (cache, budget,
/// concurrency limit).
pub fn build_gateway(loaded: &LoadedConfig) -> Result<Gateway, PipelineError> {
    let backend: Arc<dyn CompletionBackend> = match &loaded.config.backend {
        BackendConfig::Mock { fixture } => {
            Arc::new(MockBackend::from_fixture_file(loaded.resolve(fixture))?)
        }
        BackendConfig::Http(http) => Arc::new(HttpBackend::new(http.clone())?),
    };
    let cache = ResponseCache::open(loaded.cache_path())
        .map_err(|e| PipelineError::Gateway(GatewayError::Cache(e.to_string())))?;
    let mut gateway = Gateway::new(backend)
        .with_cache(cache)
        .with_concurrency_limit(loaded.config.run.concurrency);
    if let Some(budget) = loaded.config.run.budget {
        gateway = gateway.with_budget(budget);
    }
    Ok(gateway)
}

fn build_entailer<'g>(
    loaded: &LoadedConfig,
    gateway: &'g Gateway,
    params: &GenerationParams,
) -> Result<Entailer<'g>, PipelineError> {
    let cfg = loaded
        .config
        .entailment
        .clone()
        .unwrap_or(EntailmentConfig {
            spec: EntailmentBackendSpec::LlmJudge,
            direction: EntailmentDirection::Mutual,
        });
    Ok(Entailer::with_gateway(cfg.spec, gateway, params.clone())?.with_direction(cfg.direction))
}

enum SynonymSource<'g> {
    Wordlist(WordlistSynonyms),
    Llm(LlmSynonyms<'g>),
}

impl SynonymProvider for SynonymSource<'_> {
    fn synonym_for(&self, word: &str, sentence: &str) -> Result<Option<String>, FaithfulnessError> {
        match self {
            SynonymSource::Wordlist(w) => w.synonym_for(word, sentence),
            SynonymSource::Llm(l) => l.synonym_for(word, sentence),
        }
    }
}

fn build_synonyms<'g>(
    loaded: &LoadedConfig,
    gateway: &'g Gateway,
    params: &GenerationParams,
) -> Result<SynonymSource<'g>, PipelineError> {
    Ok(match &loaded.config.synonyms {
        Some(SynonymConfig::Wordlist { path }) => {
            SynonymSource::Wordlist(WordlistSynonyms::from_file(loaded.resolve(path))?)
        }
        Some(SynonymConfig::Llm) => SynonymSource::Llm(LlmSynonyms::new(gateway, params.clone())),
        None => match &loaded.config.backend {
            BackendConfig::Http(_) => SynonymSource::Llm(LlmSynonyms::new(gateway, params.clone())),
            BackendConfig::Mock { .. } => SynonymSource::Wordlist(WordlistSynonyms::new([])),
        },
    })
}

/// Seeded uniform subsample, stable across re-runs; dataset order is
/// preserved among the chosen questions.
fn sample_subset(questions: Vec<Question>, subset_size: usize, seed: u64) -> Vec<Question> {
    if subset_size >= questions.len() {
        return questions;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices = rand::seq::index::sample(&mut rng, questions.len(), subset_size).into_vec();
    indices.sort_unstable();
    indices.into_iter().map(|i| questions[i].clone()).collect()
}

fn sanitize_component(raw: &str) -> String {
    raw.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '-'
            }
        })
        .collect()
}

/// Everything one question produced, flushed in question order.
struct QuestionBundle {
    index: usize,
    results: Vec<QuestionResult>,
    diagnostics: Vec<Diagnostic>,
    probe_files: Vec<(String, ProbingSet)>,
    budget_hit: bool,
    fatal: Option<String>,
}

/// How a strategy-level failure affects the run.
enum Failure {
    /// Budget exhausted: abort the run cleanly, keep partial results.
    Budget,
    /// Infrastructure problem: abort the run with an error.
    Fatal(String),
    /// This (question, mode, strategy) yields no row; the run goes on.
    Skip(Diagnostic),
}

fn classify_gateway(question_id: &str, stage: &str, e: &GatewayError) -> Failure {
    match e {
        GatewayError::BudgetExceeded { .. } => Failure::Budget,
        other => Failure::Fatal(format!("{question_id}/{stage}: {other}")),
    }
}

fn classify_perturbation(question_id: &str, stage: &str, e: PerturbationError) -> Failure {
    match e {
        PerturbationError::Gateway(g) => classify_gateway(question_id, stage, &g),
        PerturbationError::AllPerturbationsFailed {
            requested,
            diagnostics,
        } => {
            let mut diag = Diagnostic::new(
                question_id,
                stage,
                format!("all {requested} perturbations failed; no score"),
            );
            if let Some(first) = diagnostics.first() {
                diag.offending_line = first.offending_line.clone();
            }
            Failure::Skip(diag)
        }
        other => Failure::Skip(Diagnostic::new(question_id, stage, other.to_string())),
    }
}

fn classify_agreement(question_id: &str, stage: &str, e: AgreementError) -> Failure {
    match e {
        AgreementError::Gateway(g) => classify_gateway(question_id, stage, &g),
        other => Failure::Skip(Diagnostic::new(question_id, stage, other.to_string())),
    }
}

fn classify_faithfulness(question_id: &str, stage: &str, e: FaithfulnessError) -> Failure {
    match e {
        FaithfulnessError::Gateway(g) => classify_gateway(question_id, stage, &g),
        other => Failure::Skip(Diagnostic::new(question_id, stage, other.to_string())),
    }
}

struct RunContext<'g> {
    run: RunParams,
    gateway: &'g Gateway,
    entailer: Entailer<'g>,
    synonyms: SynonymSource<'g>,
    params: GenerationParams,
}

impl RunContext<'_> {
    fn process_question(&self, index: usize, q: &Question) -> QuestionBundle {
        let mut bundle = QuestionBundle {
            index,
            results: Vec::new(),
            diagnostics: Vec::new(),
            probe_files: Vec::new(),
            budget_hit: false,
            fatal: None,
        };
        for &mode in &self.run.modes {
            if self.process_mode(q, mode, &mut bundle).is_none() {
                break;
            }
        }
        bundle
    }

    /// Returns `None` when the run must stop (budget or fatal).
    fn process_mode(
        &self,
        q: &Question,
        mode: ExplanationMode,
        bundle: &mut QuestionBundle,
    ) -> Option<()> {
        let stage_original = format!("{}_original", mode.as_str());
        let original =
            match elicit_record(self.gateway, q, mode, &self.params, Provenance::Original, 1) {
                Ok(elicitation) => elicitation,
                Err(ElicitError::Gateway(g)) => {
                    return self.fail(bundle, classify_gateway(&q.id, &stage_original, &g));
                }
                Err(ElicitError::Parse(p)) => {
                    bundle.diagnostics.push(
                        Diagnostic::new(&q.id, &stage_original, format!("original dropped: {p}"))
                            .with_offending_line(p.offending_line()),
                    );
                    return Some(());
                }
            };
        let correct = q
            .gold_answer
            .as_ref()
            .map(|gold| answers_equal(&original.record.parsed_answer, gold));
        let verbalized = original.record.verbalized_confidence;

        let faithfulness = if self.run.faithfulness {
            match self.faithfulness_score(q, mode, &original.record) {
                Ok(score) => Some(score),
                Err(failure) => {
                    self.fail(bundle, failure)?;
                    None
                }
            }
        } else {
            None
        };

        for &strategy in &self.run.strategies {
            match strategy {
                Strategy::Verbalized => match verbalized {
                    Some(confidence) => bundle.results.push(QuestionResult {
                        question_id: q.id.clone(),
                        dataset_kind: q.dataset_kind,
                        mode,
                        strategy,
                        probing_confidence: confidence,
                        verbalized_confidence: verbalized,
                        faithfulness,
                        correct,
                        n_effective: 0,
                        diagnostics: Vec::new(),
                    }),
                    None => bundle.diagnostics.push(Diagnostic::new(
                        &q.id,
                        format!("{}_verbalized", mode.as_str()),
                        "response carried no overall confidence",
                    )),
                },
                Strategy::SampleProbe | Strategy::ModelProbe => {
                    let stage = format!("{}_{}", mode.as_str(), strategy.as_str());
                    let probe = if strategy == Strategy::SampleProbe {
                        sample_probe(self.gateway, q, mode, self.run.n_paraphrases, &self.params)
                    } else {
                        model_probe(
                            self.gateway,
                            q,
                            mode,
                            self.run.n_samples,
                            self.run.tau,
                            &self.params,
                        )
                    };
                    let set = match probe {
                        Ok(set) => set,
                        Err(e) => {
                            self.fail(bundle, classify_perturbation(&q.id, &stage, e))?;
                            continue;
                        }
                    };
                    let confidence = match probing_uncertainty(&set, self.run.k, &self.entailer) {
                        Ok(c) => c,
                        Err(e) => {
                            self.fail(bundle, classify_agreement(&q.id, &stage, e))?;
                            continue;
                        }
                    };
                    let file_name = format!(
                        "{}_{}_{}.json",
                        sanitize_component(&q.id),
                        mode.as_str(),
                        set.strategy.as_str()
                    );
                    bundle.results.push(QuestionResult {
                        question_id: q.id.clone(),
                        dataset_kind: q.dataset_kind,
                        mode,
                        strategy,
                        probing_confidence: confidence,
                        verbalized_confidence: verbalized,
                        faithfulness,
                        correct,
                        n_effective: set.n_effective() as u32,
                        diagnostics: set.diagnostics.clone(),
                    });
                    bundle.probe_files.push((file_name, set));
                }
            }
        }
        Some(())
    }

    fn faithfulness_score(
        &self,
        q: &Question,
        mode: ExplanationMode,
        original: &crate::domain::ExplanationRecord,
    ) -> Result<f64, Failure> {
        let stage = format!("{}_faithfulness", mode.as_str());
        match mode {
            ExplanationMode::TokenImportance => {
                let ti = original
                    .explanation
                    .as_token_importance()
                    .expect("original matches mode");
                ti_counterfactual_faithfulness(
                    self.gateway,
                    q,
                    ti,
                    self.run.k,
                    &self.synonyms,
                    &self.params,
                )
                .map(|outcome| outcome.score)
                .map_err(|e| classify_faithfulness(&q.id, &stage, e))
            }
            ExplanationMode::Cot => {
                let cot = original
                    .explanation
                    .as_cot()
                    .expect("original matches mode");
                cot_early_answering(self.gateway, q, cot, &original.parsed_answer, &self.params)
                    .map(|outcome| outcome.fraction)
                    .map_err(|e| classify_faithfulness(&q.id, &stage, e))
            }
        }
    }

    /// Routes a failure into the bundle; `None` means stop processing.
    fn fail(&self, bundle: &mut QuestionBundle, failure: Failure) -> Option<()> {
        match failure {
            Failure::Budget => {
                bundle.budget_hit = true;
                None
            }
            Failure::Fatal(message) => {
                bundle.fatal = Some(message);
                None
            }
            Failure::Skip(diag) => {
                bundle.diagnostics.push(diag);
                Some(())
            }
        }
    }
}

/// Executes a full run. The run directory is content-addressed by the
/// config digest under the configured run root.
pub fn execute_run(loaded: &LoadedConfig) -> Result<RunOutcome, PipelineError> {
    let run = loaded.config.run.clone();
    let questions = sample_subset(
        load_dataset(loaded.dataset_path())?,
        run.subset_size,
        run.seed,
    );

    let run_dir = loaded.run_root().join(format!("run-{}", loaded.digest()));
    let probes_dir = run_dir.join("probes");
    std::fs::create_dir_all(&probes_dir).map_err(io_err(&probes_dir))?;

    let gateway = build_gateway(loaded)?;
    let params = GenerationParams::new(&run.model_name, run.base_temperature, run.max_tokens);
    let ctx = RunContext {
        entailer: build_entailer(loaded, &gateway, &params)?,
        synonyms: build_synonyms(loaded, &gateway, &params)?,
        run: run.clone(),
        gateway: &gateway,
        params,
    };

    let manifest = RunManifest {
        config_digest: loaded.digest(),
        seed: run.seed,
        subset_size: run.subset_size,
        question_ids: questions.iter().map(|q| q.id.clone()).collect(),
    };
    write_json(&run_dir.join("manifest.json"), &manifest)?;
    write_json(&run_dir.join("config.json"), &loaded.config)?;

    let results_path = run_dir.join("results.jsonl");
    let mut results_file =
        BufWriter::new(File::create(&results_path).map_err(io_err(&results_path))?);
    let diagnostics_path = run_dir.join("diagnostics.jsonl");
    let mut diagnostics_file =
        BufWriter::new(File::create(&diagnostics_path).map_err(io_err(&diagnostics_path))?);

    let stop = AtomicBool::new(false);
    let budget_hit = AtomicBool::new(false);
    let fatal: Mutex<Option<String>> = Mutex::new(None);
    let next_index = AtomicUsize::new(0);
    let workers = run.concurrency.min(questions.len()).max(1);

    let mut all_results: Vec<QuestionResult> = Vec::new();
    std::thread::scope(|scope| -> Result<(), PipelineError> {
        let (sender, receiver) = mpsc::channel::<QuestionBundle>();
        let ctx = &ctx;
        let questions = &questions;
        let stop = &stop;
        let budget_hit = &budget_hit;
        let fatal = &fatal;
        let next_index = &next_index;
        for _ in 0..workers {
            let sender = sender.clone();
            scope.spawn(move || loop {
                if stop.load(Ordering::SeqCst) {
                    break;
                }
                let index = next_index.fetch_add(1, Ordering::SeqCst);
                if index >= questions.len() {
                    break;
                }
                let bundle = ctx.process_question(index, &questions[index]);
                if bundle.budget_hit {
                    budget_hit.store(true, Ordering::SeqCst);
                    stop.store(true, Ordering::SeqCst);
                }
                if let Some(message) = &bundle.fatal {
                    let mut slot = fatal.lock().expect("fatal lock");
                    slot.get_or_insert_with(|| message.clone());
                    stop.store(true, Ordering::SeqCst);
                }
                if sender.send(bundle).is_err() {
                    break;
                }
            });
        }
        drop(sender);

        // Flush strictly in question order so output is deterministic
        // regardless of worker scheduling.
        let mut pending: BTreeMap<usize, QuestionBundle> = BTreeMap::new();
        let mut next_flush = 0usize;
        while let Ok(bundle) = receiver.recv() {
            pending.insert(bundle.index, bundle);
            while let Some(bundle) = pending.remove(&next_flush) {
                next_flush += 1;
                for result in bundle.results {
                    let line = serde_json::to_string(&result).expect("result serializes");
                    writeln!(results_file, "{line}").map_err(io_err(&results_path))?;
                    all_results.push(result);
                }
                for diag in bundle.diagnostics {
                    let line = serde_json::to_string(&diag).expect("diagnostic serializes");
                    writeln!(diagnostics_file, "{line}").map_err(io_err(&diagnostics_path))?;
                }
                for (name, set) in bundle.probe_files {
                    write_json(&probes_dir.join(name), &set)?;
                }
            }
        }
        results_file.flush().map_err(io_err(&results_path))?;
        diagnostics_file
            .flush()
            .map_err(io_err(&diagnostics_path))?;
        Ok(())
    })?;

    if let Some(message) = fatal.lock().expect("fatal lock").take() {
        return Err(PipelineError::Worker(message));
    }

    let aborted_on_budget = budget_hit.load(Ordering::SeqCst);
    let report = if all_results.is_empty() {
        if !aborted_on_budget {
            return Err(PipelineError::NoResults);
        }
        None
    } else {
        let report = summarize_run(&all_results)?;
        write_json(&run_dir.join("report.json"), &report)?;
        write_results_csv(&run_dir.join("results.csv"), &all_results)?;
        Some(report)
    };

    Ok(RunOutcome {
        run_dir,
        stats: gateway.stats(),
        results_written: all_results.len(),
        aborted_on_budget,
        report,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), PipelineError> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(io_err(path))
}

fn write_results_csv(path: &Path, results: &[QuestionResult]) -> Result<(), PipelineError> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    writer
        .write_record([
            "question_id",
            "dataset_kind",
            "mode",
            "strategy",
            "confidence",
            "verbalized_confidence",
            "faithfulness",
            "correct",
            "n_effective",
        ])
        .map_err(|e| csv_err(path, e))?;
    for r in results {
        writer
            .write_record([
                r.question_id.clone(),
                r.dataset_kind.as_str().to_string(),
                r.mode.as_str().to_string(),
                r.strategy.as_str().to_string(),
                r.probing_confidence.value().to_string(),
                r.verbalized_confidence
                    .map(|c| c.value().to_string())
                    .unwrap_or_default(),
                r.faithfulness.map(|f| f.to_string()).unwrap_or_default(),
                r.correct.map(|c| c.to_string()).unwrap_or_default(),
                r.n_effective.to_string(),
            ])
            .map_err(|e| csv_err(path, e))?;
    }
    writer.flush().map_err(io_err(path))
}

fn csv_err(path: &Path, e: csv::Error) -> PipelineError {
    PipelineError::Io {
        path: path.display().to_string(),
        source: std::io::Error::other(e),
    }
}

/// One-shot paraphrase elicitation: returns up to `n` distinct
/// paraphrases of the question text.
pub fn paraphrase_once(
    gateway: &Gateway,
    question_text: &str,
    n: u32,
    params: &GenerationParams,
) -> Result<Vec<String>, PerturbationError> {
    if n == 0 {
        return Err(PerturbationError::InvalidN);
    }
    let question = Question::new(
        "adhoc",
        question_text,
        crate::domain::DatasetKind::MathWord,
        None,
    )?;
    let prompt = crate::prompting::build_paraphrase_prompt(&question);
    let text = gateway.complete(&CompletionRequest::new(prompt, params.clone()))?;
    let items = parse_paraphrase_list(&text)
        .map_err(|source| PerturbationError::EmptyParaphraseSet { source })?;
    let mut seen = std::collections::HashSet::new();
    seen.insert(normalize_token(question_text));
    let mut out = Vec::new();
    for item in items {
        if out.len() >= n as usize {
            break;
        }
        let norm = normalize_token(&item);
        if norm.is_empty() || !seen.insert(norm) {
            continue;
        }
        out.push(item);
    }
    if out.is_empty() {
        return Err(PerturbationError::EmptyParaphraseSet {
            source: crate::parser::ParseError::EmptyParaphraseSet {
                context: "all paraphrases duplicated the question".to_string(),
            },
        });
    }
    Ok(out)
}

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("cannot read probing set {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("probing set {path} is malformed: {source}")]
    Format {
        path: String,
        source: serde_json::Error,
    },
    #[error("probing set {path} violates invariants: {message}")]
    Invalid { path: String, message: String },
    #[error(transparent)]
    Agreement(#[from] AgreementError),
}

/// Re-scores a stored probing set offline. Token-importance sets use
/// rank agreement at `k`; chain-of-thought sets use the given offline
/// entailment backend.
pub fn score_probing_file(
    path: impl AsRef<Path>,
    k: usize,
    spec: EntailmentBackendSpec,
    direction: EntailmentDirection,
) -> Result<(f64, ProbingSet), ScoreError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ScoreError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let set: ProbingSet = serde_json::from_str(&text).map_err(|source| ScoreError::Format {
        path: path.display().to_string(),
        source,
    })?;
    if let Err(message) = set.validate() {
        return Err(ScoreError::Invalid {
            path: path.display().to_string(),
            message,
        });
    }
    let entailer = Entailer::offline(spec)?.with_direction(direction);
    let confidence = probing_uncertainty(&set, k, &entailer)?;
    Ok((confidence.value(), set))
}

/// Re-summarizes an existing run directory from its results file and
/// rewrites `report.json`.
pub fn report_run_dir(run_dir: impl AsRef<Path>) -> Result<RunReport, PipelineError> {
    let run_dir = run_dir.as_ref();
    let results_path = run_dir.join("results.jsonl");
    let file = File::open(&results_path).map_err(io_err(&results_path))?;
    let mut results = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(&results_path))?;
        if line.trim().is_empty() {
            continue;
        }
        let result: QuestionResult =
            serde_json::from_str(&line).map_err(|e| PipelineError::Io {
                path: results_path.display().to_string(),
                source: std::io::Error::other(e),
            })?;
        results.push(result);
    }
    if results.is_empty() {
        return Err(PipelineError::NoResults);
    }
    let report = summarize_run(&results)?;
    write_json(&run_dir.join("report.json"), &report)?;
    write_results_csv(&run_dir.join("results.csv"), &results)?;
    Ok(report)
}
