//! Command-line driver for the explanation-uncertainty pipeline.
//!
//! Verbs: `run` (full pipeline over a dataset), `paraphrase` (one-shot
//! paraphrase elicitation), `score` (offline re-scoring of a stored
//! probing set), and `report` (re-summarize an existing run directory).
//!
//! Exit codes: 0 success, 1 failure, 2 usage error, 3 run aborted on the
//! request budget (partial results preserved).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use xprobe::agreement::{EntailmentBackendSpec, EntailmentDirection};
use xprobe::gateway::GatewayError;
use xprobe::perturbation::PerturbationError;
use xprobe::runner::{
    build_gateway, execute_run, load_config, paraphrase_once, report_run_dir, score_probing_file,
    validate, LoadedConfig,
};
use xprobe::GenerationParams;

#[derive(Parser)]
#[command(
    name = "xprobe",
    version,
    about = "Uncertainty estimation for LLM explanations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a full run described by a TOML config file.
    Run {
        /// Run configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Override run.subset_size.
        #[arg(long)]
        subset: Option<usize>,
        /// Override run.seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override run.budget.
        #[arg(long)]
        budget: Option<u64>,
        /// Override run.k.
        #[arg(long)]
        k: Option<usize>,
        /// Override run.model_name.
        #[arg(long)]
        model: Option<String>,
        /// Override run.faithfulness.
        #[arg(long)]
        faithfulness: Option<bool>,
    },
    /// Paraphrase a question and print the paraphrases, one per line.
    Paraphrase {
        /// Config file naming the backend to use.
        #[arg(long)]
        config: PathBuf,
        /// Number of paraphrases to print.
        #[arg(long, default_value_t = 10)]
        n: u32,
        /// The question text.
        question: String,
    },
    /// Recompute the uncertainty score of a stored probing set, offline.
    Score {
        /// Serialized probing-set file (JSON).
        file: PathBuf,
        /// Top-k cutoff for token rank agreement.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Offline entailment backend: "exact" or "overlap:<threshold>".
        #[arg(long, default_value = "overlap:0.6")]
        entailment: String,
        /// Require entailment in one direction only.
        #[arg(long)]
        forward: bool,
    },
    /// Re-summarize an existing run directory and print the report.
    Report {
        /// Run directory containing results.jsonl.
        run_dir: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Run {
            config,
            subset,
            seed,
            budget,
            k,
            model,
            faithfulness,
        } => cmd_run(config, subset, seed, budget, k, model, faithfulness),
        Command::Paraphrase {
            config,
            n,
            question,
        } => cmd_paraphrase(config, n, &question),
        Command::Score {
            file,
            k,
            entailment,
            forward,
        } => cmd_score(file, k, &entailment, forward),
        Command::Report { run_dir } => cmd_report(run_dir),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    config_path: PathBuf,
    subset: Option<usize>,
    seed: Option<u64>,
    budget: Option<u64>,
    k: Option<usize>,
    model: Option<String>,
    faithfulness: Option<bool>,
) -> Result<ExitCode> {
    let mut loaded = load_config(&config_path)?;
    apply_overrides(&mut loaded, subset, seed, budget, k, model, faithfulness)?;

    let outcome = execute_run(&loaded)?;
    println!("{}", outcome.run_dir.display());
    eprintln!(
        "results: {} | backend calls: {} | cache hits: {} | aborted on budget: {}",
        outcome.results_written,
        outcome.stats.backend_calls,
        outcome.stats.cache_hits,
        outcome.aborted_on_budget,
    );
    if outcome.aborted_on_budget {
        eprintln!("run aborted on budget; partial results preserved");
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn apply_overrides(
    loaded: &mut LoadedConfig,
    subset: Option<usize>,
    seed: Option<u64>,
    budget: Option<u64>,
    k: Option<usize>,
    model: Option<String>,
    faithfulness: Option<bool>,
) -> Result<()> {
    let run = &mut loaded.config.run;
    if let Some(subset) = subset {
        run.subset_size = subset;
    }
    if let Some(seed) = seed {
        run.seed = seed;
    }
    if let Some(budget) = budget {
        run.budget = Some(budget);
    }
    if let Some(k) = k {
        run.k = k;
    }
    if let Some(model) = model {
        run.model_name = model;
    }
    if let Some(faithfulness) = faithfulness {
        run.faithfulness = faithfulness;
    }
    validate(&loaded.config).map_err(|message| anyhow::anyhow!(message))?;
    Ok(())
}

fn cmd_paraphrase(config_path: PathBuf, n: u32, question: &str) -> Result<ExitCode> {
    if n == 0 {
        eprintln!("usage error: --n must be at least 1");
        return Ok(ExitCode::from(2));
    }
    if question.trim().is_empty() {
        eprintln!("usage error: question text must not be empty");
        return Ok(ExitCode::from(2));
    }
    let loaded = load_config(&config_path)?;
    let gateway = build_gateway(&loaded).context("building backend")?;
    let run = &loaded.config.run;
    let params = GenerationParams::new(&run.model_name, run.base_temperature, run.max_tokens);
    match paraphrase_once(&gateway, question, n, &params) {
        Ok(paraphrases) => {
            for p in paraphrases {
                println!("{p}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Err(PerturbationError::Gateway(e @ GatewayError::Network { .. })) => {
            bail!("network failure talking to the backend: {e}")
        }
        Err(e) => bail!(e),
    }
}

fn cmd_score(file: PathBuf, k: usize, entailment: &str, forward: bool) -> Result<ExitCode> {
    if k == 0 {
        eprintln!("usage error: --k must be at least 1");
        return Ok(ExitCode::from(2));
    }
    let spec = parse_entailment_flag(entailment)?;
    let direction = if forward {
        EntailmentDirection::Forward
    } else {
        EntailmentDirection::Mutual
    };
    let (confidence, set) = score_probing_file(&file, k, spec, direction)?;
    println!("{confidence:.4}");
    eprintln!(
        "strategy: {} | n_effective: {} | requested: {}",
        set.strategy.as_str(),
        set.n_effective(),
        set.requested_n
    );
    Ok(ExitCode::SUCCESS)
}

fn parse_entailment_flag(raw: &str) -> Result<EntailmentBackendSpec> {
    if raw == "exact" || raw == "exact_match" {
        return Ok(EntailmentBackendSpec::ExactMatch);
    }
    if let Some(threshold) = raw.strip_prefix("overlap:") {
        let threshold: f64 = threshold
            .parse()
            .with_context(|| format!("bad overlap threshold {threshold:?}"))?;
        return Ok(EntailmentBackendSpec::NormalizedOverlap { threshold });
    }
    bail!("unknown entailment backend {raw:?}; use \"exact\" or \"overlap:<threshold>\"")
}

fn cmd_report(run_dir: PathBuf) -> Result<ExitCode> {
    let report = report_run_dir(&run_dir)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ExitCode::SUCCESS)
}
