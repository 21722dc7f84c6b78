//! Acceptance gate: one pass/fail line per criterion.
//!
//! Metric criteria are checked against independent brute-force oracles
//! implemented here (explicit enumeration, no shared code with the
//! production paths); statistics are checked against the `statrs`
//! reference distribution; pipeline criteria run the full stack over
//! scripted mock backends, fully offline.

#![allow(clippy::type_complexity)]

mod common;

use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use statrs::distribution::{ContinuousCDF, StudentsT};

use common::{
    five_question_fixture, mock_config_toml, snapshot_dir, write_config, write_fixture_files,
    ScriptedQuestion,
};
use xprobe::agreement::{
    cot_agreement, cot_uncertainty, ti_uncertainty, token_rank_agreement, token_set_agreement,
    Entailer, EntailmentBackendSpec,
};
use xprobe::analysis::{welch_t_test, Strategy};
use xprobe::faithfulness::{cot_early_answering, ti_counterfactual_faithfulness, WordlistSynonyms};
use xprobe::gateway::{Gateway, MockBackend, MockFixture, ResponseCache};
use xprobe::parser::{parse_cot, parse_token_importance};
use xprobe::perturbation::{ProbingSet, ProbingStrategy};
use xprobe::runner::{execute_run, load_config};
use xprobe::testkit::{
    early_answer_response, rule_containing, ti_weighted_response, QuestionScript, ResponseScript,
};
use xprobe::{
    Answer, CoTExplanation, CoTStep, ConfidenceScore, DatasetKind, Explanation, ExplanationRecord,
    GenerationParams, Provenance, Question, TokenImportanceExplanation,
};

type CheckResult = Result<(), String>;

fn main() {
    let criteria: &[(&str, fn() -> CheckResult)] = &[
        (
            "metric oracle equivalence (1000 cases)",
            check_oracle_equivalence,
        ),
        ("hand-derived metric anchors", check_hand_anchors),
        ("canonical answer-block parsing", check_answer_block_parsing),
        (
            "bounds and symmetry properties (1000 cases)",
            check_bounds_and_symmetry,
        ),
        (
            "end-to-end determinism and full caching",
            check_run_determinism,
        ),
        ("faithfulness oracles", check_faithfulness_oracles),
        ("Welch t-test vs reference oracle", check_statistics),
        (
            "correct-vs-incorrect confidence direction",
            check_confidence_direction,
        ),
    ];

    let mut failures = 0;
    for (index, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match check() {
            Ok(()) => println!(
                "[PASS] criterion {}: {name} ({} ms)",
                index + 1,
                start.elapsed().as_millis()
            ),
            Err(message) => {
                failures += 1;
                println!(
                    "[FAIL] criterion {}: {name} ({} ms): {message}",
                    index + 1,
                    start.elapsed().as_millis()
                );
            }
        }
    }
    if failures > 0 {
        println!("{failures} acceptance criterion(s) failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}

fn ensure(cond: bool, message: impl Into<String>) -> CheckResult {
    if cond {
        Ok(())
    } else {
        Err(message.into())
    }
}

// ---------------------------------------------------------------------
// Independent brute-force oracles.
// ---------------------------------------------------------------------

fn top_k_tokens(e: &TokenImportanceExplanation, k: usize) -> Vec<String> {
    e.entries().iter().take(k).map(|(t, _)| t.clone()).collect()
}

fn oracle_rank_of(e: &TokenImportanceExplanation, token: &str) -> Option<usize> {
    let mut rank = 0;
    for (t, _) in e.entries() {
        rank += 1;
        if t == token {
            return Some(rank);
        }
    }
    None
}

/// Explicit-enumeration token rank agreement.
fn oracle_tr(a: &TokenImportanceExplanation, b: &TokenImportanceExplanation, k: usize) -> f64 {
    let top_a = top_k_tokens(a, k);
    let top_b = top_k_tokens(b, k);
    let mut union: Vec<&String> = Vec::new();
    for t in top_a.iter().chain(top_b.iter()) {
        if !union.contains(&t) {
            union.push(t);
        }
    }
    let mut count = 0usize;
    for token in union {
        let in_a = top_a.contains(token);
        let in_b = top_b.contains(token);
        if in_a && in_b && oracle_rank_of(a, token) == oracle_rank_of(b, token) {
            count += 1;
        }
    }
    count as f64 / k as f64
}

/// Explicit-enumeration token set agreement.
fn oracle_set(a: &TokenImportanceExplanation, b: &TokenImportanceExplanation, k: usize) -> f64 {
    let top_a = top_k_tokens(a, k);
    let top_b = top_k_tokens(b, k);
    let mut count = 0usize;
    for token in &top_a {
        if top_b.contains(token) {
            count += 1;
        }
    }
    count as f64 / k as f64
}

/// Full-matrix CoT agreement, re-evaluating E for row and column passes.
fn oracle_cota(a: &CoTExplanation, b: &CoTExplanation, entail: &dyn Fn(&str, &str) -> bool) -> f64 {
    let mut rows = 0usize;
    for sa in a.steps() {
        let mut best = 0usize;
        for sb in b.steps() {
            if entail(&sa.text, &sb.text) {
                best = 1;
            }
        }
        rows += best;
    }
    let mut cols = 0usize;
    for sb in b.steps() {
        let mut best = 0usize;
        for sa in a.steps() {
            if entail(&sa.text, &sb.text) {
                best = 1;
            }
        }
        cols += best;
    }
    (rows + cols) as f64 / (a.len() + b.len()) as f64
}

fn oracle_unc_ti(set: &ProbingSet, k: usize) -> f64 {
    let original = set.original.explanation.as_token_importance().unwrap();
    let mut total = 0.0;
    for record in &set.perturbed {
        total += oracle_tr(
            record.explanation.as_token_importance().unwrap(),
            original,
            k,
        );
    }
    total / set.perturbed.len() as f64
}

fn oracle_unc_cot(set: &ProbingSet, entail: &dyn Fn(&str, &str) -> bool) -> f64 {
    let original = set.original.explanation.as_cot().unwrap();
    let mut total = 0.0;
    for record in &set.perturbed {
        total += oracle_cota(record.explanation.as_cot().unwrap(), original, entail);
    }
    total / set.perturbed.len() as f64
}

// ---------------------------------------------------------------------
// Random fixtures.
// ---------------------------------------------------------------------

const VOCAB: [&str; 8] = [
    "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel",
];

const STEP_POOL: [&str; 8] = [
    "Jake has 17 peaches.",
    "Steven has eleven more peaches.",
    "The total is therefore 28.",
    "A train covers 60 miles each hour.",
    "Three hours triple the distance.",
    "Multiplication gives the answer.",
    "The baker sold most muffins.",
    "Subtraction yields the remainder.",
];

fn random_ti(rng: &mut StdRng) -> TokenImportanceExplanation {
    let len = rng.gen_range(1..=5);
    let mut tokens: Vec<&str> = VOCAB.to_vec();
    for i in (1..tokens.len()).rev() {
        tokens.swap(i, rng.gen_range(0..=i));
    }
    let entries = tokens[..len]
        .iter()
        .map(|t| (t.to_string(), rng.gen_range(0.0..100.0)))
        .collect();
    TokenImportanceExplanation::new(entries).unwrap()
}

fn random_cot(rng: &mut StdRng) -> CoTExplanation {
    let len = rng.gen_range(1..=5);
    let steps = (0..len)
        .map(|_| CoTStep {
            text: STEP_POOL[rng.gen_range(0..STEP_POOL.len())].to_string(),
            confidence: None,
        })
        .collect();
    CoTExplanation::new(steps).unwrap()
}

fn ti_record(e: TokenImportanceExplanation, provenance: Provenance) -> ExplanationRecord {
    ExplanationRecord {
        question_id: "fuzz".to_string(),
        prompt_text: "p".to_string(),
        raw_response: "r".to_string(),
        explanation: Explanation::TokenImportance(e),
        parsed_answer: Answer::parse_text(DatasetKind::MathWord, "1").unwrap(),
        verbalized_confidence: None,
        generation: GenerationParams::new("fuzz", 0.0, 16),
        provenance,
    }
}

fn cot_record(e: CoTExplanation, provenance: Provenance) -> ExplanationRecord {
    ExplanationRecord {
        explanation: Explanation::Cot(e),
        ..ti_record(
            TokenImportanceExplanation::new(vec![("x".to_string(), 1.0)]).unwrap(),
            provenance,
        )
    }
}

fn random_ti_set(rng: &mut StdRng) -> ProbingSet {
    let n = rng.gen_range(1..=4);
    ProbingSet {
        original: ti_record(random_ti(rng), Provenance::Original),
        perturbed: (1..=n)
            .map(|i| ti_record(random_ti(rng), Provenance::Paraphrase(i)))
            .collect(),
        strategy: ProbingStrategy::SampleProbing,
        requested_n: n,
        diagnostics: vec![],
    }
}

fn random_cot_set(rng: &mut StdRng) -> ProbingSet {
    let n = rng.gen_range(1..=4);
    ProbingSet {
        original: cot_record(random_cot(rng), Provenance::Original),
        perturbed: (1..=n)
            .map(|i| cot_record(random_cot(rng), Provenance::TemperatureSample(i)))
            .collect(),
        strategy: ProbingStrategy::ModelProbing,
        requested_n: n,
        diagnostics: vec![],
    }
}

// ---------------------------------------------------------------------
// Criterion 1: oracle equivalence.
// ---------------------------------------------------------------------

fn check_oracle_equivalence() -> CheckResult {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(101);
    let exact = Entailer::offline(EntailmentBackendSpec::ExactMatch).unwrap();
    let overlap =
        Entailer::offline(EntailmentBackendSpec::NormalizedOverlap { threshold: 0.5 }).unwrap();
    let exact_fn = |a: &str, b: &str| {
        let na = xprobe::normalize_token(a);
        !na.is_empty() && na == xprobe::normalize_token(b)
    };
    let overlap_fn = |a: &str, b: &str| xprobe::agreement::jaccard(a, b) >= 0.5;

    for case in 0..1000 {
        let k = rng.gen_range(1..=5);
        let a = random_ti(&mut rng);
        let b = random_ti(&mut rng);
        let tr = token_rank_agreement(&a, &b, k);
        if tr != oracle_tr(&a, &b, k) {
            return Err(format!("TR mismatch at case {case}: {tr}"));
        }
        let ts = token_set_agreement(&a, &b, k);
        if ts != oracle_set(&a, &b, k) {
            return Err(format!("set agreement mismatch at case {case}: {ts}"));
        }

        let ca = random_cot(&mut rng);
        let cb = random_cot(&mut rng);
        let prod_exact = cot_agreement(&ca, &cb, &exact).unwrap();
        if prod_exact != oracle_cota(&ca, &cb, &exact_fn) {
            return Err(format!("CoTA (exact) mismatch at case {case}"));
        }
        let prod_overlap = cot_agreement(&ca, &cb, &overlap).unwrap();
        if prod_overlap != oracle_cota(&ca, &cb, &overlap_fn) {
            return Err(format!("CoTA (overlap) mismatch at case {case}"));
        }

        if case % 5 == 0 {
            let set = random_ti_set(&mut rng);
            let unc = ti_uncertainty(&set, k).unwrap().value();
            if (unc - oracle_unc_ti(&set, k)).abs() > 1e-12 {
                return Err(format!("Unc_TI mismatch at case {case}"));
            }
            let cot_set = random_cot_set(&mut rng);
            let unc = cot_uncertainty(&cot_set, &exact).unwrap().value();
            if (unc - oracle_unc_cot(&cot_set, &exact_fn)).abs() > 1e-12 {
                return Err(format!("Unc_CoT mismatch at case {case}"));
            }
        }
    }
    ensure(
        start.elapsed().as_secs() < 10,
        format!("runtime {} ms exceeds 10 s", start.elapsed().as_millis()),
    )
}

// ---------------------------------------------------------------------
// Criterion 2: hand anchors.
// ---------------------------------------------------------------------

fn ti_from_ranks(tokens: &[&str]) -> TokenImportanceExplanation {
    let n = tokens.len();
    TokenImportanceExplanation::new(
        tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.to_string(), (n - i) as f64))
            .collect(),
    )
    .unwrap()
}

fn cot_from(steps: &[&str]) -> CoTExplanation {
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

fn check_hand_anchors() -> CheckResult {
    let a = ti_from_ranks(&["peaches", "steven", "jake"]);
    let b = ti_from_ranks(&["peaches", "jake", "steven"]);
    ensure(
        token_rank_agreement(&a, &b, 3) == 1.0 / 3.0,
        "TR anchor must be exactly 1/3",
    )?;

    // 2x3 chains with exactly one mutually entailed pair: (1 + 1) / 5.
    let ca = cot_from(&["jake has 17 peaches", "so the answer is clear"]);
    let cb = cot_from(&["jake has 17 peaches", "add eleven", "totals differ"]);
    let exact = Entailer::offline(EntailmentBackendSpec::ExactMatch).unwrap();
    ensure(
        cot_agreement(&ca, &cb, &exact).unwrap() == 0.4,
        "CoTA anchor must be exactly 0.4",
    )?;

    let set = ProbingSet {
        original: ti_record(
            ti_from_ranks(&["peaches", "steven", "jake"]),
            Provenance::Original,
        ),
        perturbed: vec![
            ti_record(
                ti_from_ranks(&["peaches", "steven", "jake"]),
                Provenance::Paraphrase(1),
            ),
            ti_record(
                ti_from_ranks(&["peaches", "jake", "steven"]),
                Provenance::Paraphrase(2),
            ),
        ],
        strategy: ProbingStrategy::SampleProbing,
        requested_n: 2,
        diagnostics: vec![],
    };
    let unc = ti_uncertainty(&set, 3).unwrap().value();
    ensure(
        unc == 2.0 / 3.0,
        format!("Unc anchor must be exactly 2/3, got {unc}"),
    )
}

// ---------------------------------------------------------------------
// Criterion 3: canonical answer blocks parse exactly.
// ---------------------------------------------------------------------

fn check_answer_block_parsing() -> CheckResult {
    let ti_block = "Word: Jake, Importance: 20%\n\
                    Word: Steven, Importance: 20%\n\
                    Word: peaches, Importance: 60%\n\
                    Final answer and overall confidence (0-100): 28, 100%";
    let parsed = parse_token_importance(ti_block, DatasetKind::MathWord)
        .map_err(|e| format!("TI block failed to parse: {e}"))?;
    ensure(parsed.explanation.len() == 3, "expected 3 TI entries")?;
    ensure(
        parsed.answer == Answer::parse_text(DatasetKind::MathWord, "28").unwrap(),
        "TI answer must be 28",
    )?;
    ensure(
        parsed.overall_confidence == Some(ConfidenceScore::new(1.0).unwrap()),
        "TI overall confidence must be exactly 1.0",
    )?;
    ensure(
        parsed.explanation.entries()
            == [
                ("peaches".to_string(), 0.60),
                ("jake".to_string(), 0.20),
                ("steven".to_string(), 0.20),
            ],
        "TI entries must sort by weight with response-order ties",
    )?;

    let cot_block = "Step 1: Jake has 11 fewer peaches than Steven.  Confidence: 100%\n\
                     Step 2: Jake has 17 peaches.  Confidence: 100%\n\
                     Step 3: If Jake has 17 peaches, then Steven has 17 + 11 = 28 peaches.  Confidence: 100%\n\
                     Final answer and overall confidence (0-100): 28, 100%";
    let parsed = parse_cot(cot_block, DatasetKind::MathWord)
        .map_err(|e| format!("CoT block failed to parse: {e}"))?;
    ensure(parsed.explanation.len() == 3, "expected 3 CoT steps")?;
    ensure(
        parsed
            .explanation
            .steps()
            .iter()
            .all(|s| s.confidence == Some(ConfidenceScore::new(1.0).unwrap())),
        "every step confidence must be exactly 1.0",
    )?;
    ensure(
        parsed.answer == Answer::parse_text(DatasetKind::MathWord, "28").unwrap(),
        "CoT answer must be 28",
    )?;
    ensure(
        parsed.overall_confidence == Some(ConfidenceScore::new(1.0).unwrap()),
        "CoT overall confidence must be exactly 1.0",
    )
}

// ---------------------------------------------------------------------
// Criterion 4: bounds, symmetry, dominance, permutation invariance.
// ---------------------------------------------------------------------

fn check_bounds_and_symmetry() -> CheckResult {
    let mut rng = StdRng::seed_from_u64(202);
    let exact = Entailer::offline(EntailmentBackendSpec::ExactMatch).unwrap();
    for case in 0..1000 {
        let k = rng.gen_range(1..=5);
        let a = random_ti(&mut rng);
        let b = random_ti(&mut rng);
        let tr = token_rank_agreement(&a, &b, k);
        let ts = token_set_agreement(&a, &b, k);
        if !(0.0..=1.0).contains(&tr) || !(0.0..=1.0).contains(&ts) {
            return Err(format!("score out of [0,1] at case {case}"));
        }
        if tr != token_rank_agreement(&b, &a, k) {
            return Err(format!("TR asymmetric at case {case}"));
        }
        if ts < tr {
            return Err(format!("set agreement below rank agreement at case {case}"));
        }
        if a.len() >= k && token_rank_agreement(&a, &a, k) != 1.0 {
            return Err(format!("TR(x,x,k) != 1 at case {case}"));
        }

        let ca = random_cot(&mut rng);
        let cb = random_cot(&mut rng);
        let cota = cot_agreement(&ca, &cb, &exact).unwrap();
        if !(0.0..=1.0).contains(&cota) {
            return Err(format!("CoTA out of [0,1] at case {case}"));
        }
        if cota != cot_agreement(&cb, &ca, &exact).unwrap() {
            return Err(format!("CoTA asymmetric at case {case}"));
        }

        if case % 5 == 0 {
            let mut set = random_ti_set(&mut rng);
            let before = ti_uncertainty(&set, k).unwrap().value();
            set.perturbed.reverse();
            let after = ti_uncertainty(&set, k).unwrap().value();
            if (before - after).abs() > 1e-12 {
                return Err(format!("Unc_TI not permutation invariant at case {case}"));
            }
            let mut cot_set = random_cot_set(&mut rng);
            let before = cot_uncertainty(&cot_set, &exact).unwrap().value();
            cot_set.perturbed.reverse();
            let after = cot_uncertainty(&cot_set, &exact).unwrap().value();
            if (before - after).abs() > 1e-12 {
                return Err(format!("Unc_CoT not permutation invariant at case {case}"));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------
// Criterion 5: end-to-end determinism with full cache reuse.
// ---------------------------------------------------------------------

fn check_run_determinism() -> CheckResult {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let questions = five_question_fixture();
    write_fixture_files(dir.path(), &questions);
    let config_path = write_config(dir.path(), &mock_config_toml(""));
    let loaded = load_config(config_path).map_err(|e| e.to_string())?;

    let first = execute_run(&loaded).map_err(|e| e.to_string())?;
    ensure(first.results_written == 30, "expected 30 result rows")?;
    ensure(
        first.stats.backend_calls > 0,
        "first run must call the backend",
    )?;
    let first_snapshot = snapshot_dir(&first.run_dir);

    let second = execute_run(&loaded).map_err(|e| e.to_string())?;
    ensure(
        second.stats.backend_calls == 0 && second.stats.cache_misses == 0,
        format!(
            "second run must be 100% cached (calls {}, misses {})",
            second.stats.backend_calls, second.stats.cache_misses
        ),
    )?;
    ensure(
        second.stats.cache_hits > 0,
        "second run must observe cache hits",
    )?;
    let second_snapshot = snapshot_dir(&second.run_dir);
    ensure(
        first_snapshot == second_snapshot,
        "run directories are not byte-identical",
    )
}

// ---------------------------------------------------------------------
// Criterion 6: faithfulness oracles.
// ---------------------------------------------------------------------

fn offline_gateway(rules: Vec<xprobe::gateway::MockRule>, dir: &std::path::Path) -> Gateway {
    let backend = MockBackend::from_fixture(MockFixture { rules }).unwrap();
    let cache = ResponseCache::open(dir.join("cache.jsonl")).unwrap();
    Gateway::new(std::sync::Arc::new(backend)).with_cache(cache)
}

fn check_faithfulness_oracles() -> CheckResult {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let question = Question::new(
        "q1",
        "Jake has 11 fewer peaches than Steven. If Jake has 17 peaches. How many peaches does Steven have?",
        DatasetKind::MathWord,
        Some(Answer::parse_text(DatasetKind::MathWord, "28").unwrap()),
    )
    .unwrap();
    let params = GenerationParams::new("scripted", 0.0, 256);
    let synonyms = WordlistSynonyms::new([
        ("peaches".to_string(), "nectarines".to_string()),
        ("jake".to_string(), "james".to_string()),
        ("steven".to_string(), "stephen".to_string()),
    ]);

    // Perfect reflector: the fresh explanation mirrors every swap at the
    // original rank.
    let original = TokenImportanceExplanation::new(vec![
        ("peaches".to_string(), 0.6),
        ("jake".to_string(), 0.3),
        ("steven".to_string(), 0.1),
    ])
    .unwrap();
    let gateway = offline_gateway(
        vec![rule_containing(
            "nectarines",
            vec![ti_weighted_response(
                &[("nectarines", 60), ("james", 30), ("stephen", 10)],
                "28",
                100,
            )],
        )],
        dir.path(),
    );
    let outcome =
        ti_counterfactual_faithfulness(&gateway, &question, &original, 3, &synonyms, &params)
            .map_err(|e| e.to_string())?;
    ensure(
        outcome.score == 1.0,
        format!("perfect reflector must score 1.0, got {}", outcome.score),
    )?;

    // Full-context-only mock: the right answer appears only once every
    // step is present, so exactly one of three prefixes matches.
    let dir2 = tempfile::tempdir().map_err(|e| e.to_string())?;
    let gateway = offline_gateway(
        vec![
            rule_containing("Step 3:", vec![early_answer_response("28")]),
            rule_containing("Step 2:", vec![early_answer_response("17")]),
            rule_containing("Step 1:", vec![early_answer_response("17")]),
        ],
        dir2.path(),
    );
    let chain = cot_from(&["first fact", "second fact", "conclusion"]);
    let outcome = cot_early_answering(
        &gateway,
        &question,
        &chain,
        &Answer::parse_text(DatasetKind::MathWord, "28").unwrap(),
        &params,
    )
    .map_err(|e| e.to_string())?;
    ensure(
        outcome.fraction == 1.0 / 3.0,
        format!(
            "full-context-only mock must score exactly 1/3, got {}",
            outcome.fraction
        ),
    )
}

// ---------------------------------------------------------------------
// Criterion 7: Welch statistics.
// ---------------------------------------------------------------------

fn oracle_welch(a: &[f64], b: &[f64]) -> (f64, f64) {
    // Sorted summation; independent of the production mean/variance path.
    let mean_sorted = |xs: &[f64]| {
        let mut v = xs.to_vec();
        v.sort_by(|x, y| x.partial_cmp(y).unwrap());
        v.iter().sum::<f64>() / v.len() as f64
    };
    let var_sorted = |xs: &[f64], m: f64| {
        let mut sq: Vec<f64> = xs.iter().map(|x| (x - m) * (x - m)).collect();
        sq.sort_by(|x, y| x.partial_cmp(y).unwrap());
        sq.iter().sum::<f64>() / (xs.len() - 1) as f64
    };
    let (ma, mb) = (mean_sorted(a), mean_sorted(b));
    let (va, vb) = (var_sorted(a, ma), var_sorted(b, mb));
    let sa = va / a.len() as f64;
    let sb = vb / b.len() as f64;
    let t = (ma - mb) / (sa + sb).sqrt();
    let df = (sa + sb) * (sa + sb)
        / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    let dist = StudentsT::new(0.0, 1.0, df).unwrap();
    let p = 2.0 * (1.0 - dist.cdf(t.abs()));
    (t, p)
}

fn check_statistics() -> CheckResult {
    let mut rng = StdRng::seed_from_u64(707);
    for case in 0..100 {
        let na = rng.gen_range(3..40);
        let nb = rng.gen_range(3..40);
        let a: Vec<f64> = (0..na).map(|_| rng.gen_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..nb).map(|_| rng.gen_range(0.0..1.0) + 0.1).collect();
        let result = welch_t_test(&a, &b).map_err(|e| format!("case {case}: {e}"))?;
        let (t_oracle, p_oracle) = oracle_welch(&a, &b);
        if (result.t_statistic - t_oracle).abs() > 1e-6 {
            return Err(format!(
                "case {case}: t {} vs oracle {t_oracle}",
                result.t_statistic
            ));
        }
        if (result.p_value - p_oracle).abs() > 1e-6 {
            return Err(format!(
                "case {case}: p {} vs oracle {p_oracle}",
                result.p_value
            ));
        }
    }

    // Engineered two-group fixture: 50 confidences per group, means
    // 0.800000 vs 0.649768, common spread 0.19799 -> t = 3.7558.
    let spread = 0.19799;
    let group = |mean: f64| -> Vec<f64> {
        (0..50)
            .map(|i| {
                if i % 2 == 0 {
                    mean + spread
                } else {
                    mean - spread
                }
            })
            .collect()
    };
    let correct = group(0.800000);
    let incorrect = group(0.649768);
    let result = welch_t_test(&correct, &incorrect).map_err(|e| e.to_string())?;
    ensure(
        (result.t_statistic - 3.7558).abs() <= 1e-3,
        format!("fixture t {} not within 1e-3 of 3.7558", result.t_statistic),
    )?;
    let rounded_p = (result.p_value * 10_000.0).round() / 10_000.0;
    ensure(
        rounded_p == 0.0003,
        format!("fixture p {} does not round to 0.0003", result.p_value),
    )
}

// ---------------------------------------------------------------------
// Criterion 8: confidence direction under a divergent mock.
// ---------------------------------------------------------------------

fn divergent_script(
    rng: &mut StdRng,
    paraphrases: &[&str],
    gold: &str,
    consistent: bool,
) -> QuestionScript {
    let variant = |rng: &mut StdRng, answer: &str| {
        let mut tokens: Vec<&str> = VOCAB.to_vec();
        for i in (1..tokens.len()).rev() {
            tokens.swap(i, rng.gen_range(0..=i));
        }
        ResponseScript {
            ti_entries: vec![
                (tokens[0].to_string(), 50),
                (tokens[1].to_string(), 30),
                (tokens[2].to_string(), 20),
            ],
            cot_steps: vec![
                format!("Consider {} and {} first.", tokens[0], tokens[1]),
                format!("Then weigh {} against {}.", tokens[2], tokens[3]),
            ],
            answer: answer.to_string(),
            confidence_pct: 100,
        }
    };
    let variants = if consistent {
        vec![variant(rng, gold)]
    } else {
        // Divergent scripts answer wrong and reason differently each draw.
        ["111", "222", "333"]
            .iter()
            .map(|w| variant(rng, w))
            .collect()
    };
    QuestionScript {
        paraphrases: paraphrases.iter().map(|s| s.to_string()).collect(),
        variants,
    }
}

fn check_confidence_direction() -> CheckResult {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(808);
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;

    let mut questions = Vec::new();
    for i in 0..6 {
        let consistent = i < 3;
        let text = format!(
            "Worker {i} packs {} crates per hour. How many crates in 4 hours?",
            6 + i
        );
        let paraphrases = [
            format!("How many crates does worker {i} pack over four hours?"),
            format!("What is worker {i}'s four hour crate total?"),
        ];
        let paraphrase_refs: Vec<&str> = paraphrases.iter().map(String::as_str).collect();
        let gold = format!("{}", (6 + i) * 4);
        questions.push(ScriptedQuestion {
            question: Question::new(
                format!("w{i}"),
                &text,
                DatasetKind::MathWord,
                Some(Answer::parse_text(DatasetKind::MathWord, &gold).unwrap()),
            )
            .unwrap(),
            script: divergent_script(&mut rng, &paraphrase_refs, &gold, consistent),
        });
    }
    write_fixture_files(dir.path(), &questions);
    let config_path = write_config(dir.path(), &mock_config_toml(""));
    let loaded = load_config(config_path).map_err(|e| e.to_string())?;
    let outcome = execute_run(&loaded).map_err(|e| e.to_string())?;
    let report = outcome.report.ok_or("run produced no report")?;

    ensure(
        report.mean_verbalized_confidence == Some(1.0),
        format!(
            "verbalized confidence scripted at 100% must average exactly 1.0, got {:?}",
            report.mean_verbalized_confidence
        ),
    )?;

    let mut probing_groups = 0;
    for group in &report.groups {
        if group.strategy == Strategy::Verbalized {
            continue;
        }
        probing_groups += 1;
        let correct = group
            .correct_confidence_mean
            .ok_or_else(|| format!("group {:?} missing correct mean", group.strategy))?;
        let incorrect = group
            .incorrect_confidence_mean
            .ok_or_else(|| format!("group {:?} missing incorrect mean", group.strategy))?;
        if correct <= incorrect {
            return Err(format!(
                "mode {:?} strategy {:?}: correct mean {correct} not above incorrect mean {incorrect}",
                group.mode, group.strategy
            ));
        }
    }
    ensure(probing_groups == 4, "expected 4 probing groups")?;
    ensure(
        start.elapsed().as_secs() < 60,
        format!("runtime {} ms exceeds 60 s", start.elapsed().as_millis()),
    )
}
