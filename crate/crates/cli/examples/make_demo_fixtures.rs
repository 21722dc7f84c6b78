//! Regenerates the offline demo under `fixtures/demo/`: a three-question
//! dataset, a scripted mock fixture covering every prompt the pipeline
//! sends, a synonym wordlist, and a ready-to-run config.
//!
//! Run from the workspace root:
//!
//! ```text
//! cargo run -p xprobe-cli --example make_demo_fixtures
//! xprobe run --config fixtures/demo/run.toml
//! ```

use std::path::Path;

use xprobe::gateway::{MockFixture, MockRule};
use xprobe::testkit::{
    early_answer_pattern, early_answer_response, rule_regex, scripted_question_rules,
    ti_prompt_pattern, ti_weighted_response, QuestionScript, ResponseScript,
};

struct Demo {
    id: &'static str,
    text: &'static str,
    gold: &'static str,
    tokens: [&'static str; 3],
    steps: [&'static str; 3],
    paraphrases: [&'static str; 3],
}

const DEMO_QUESTIONS: [Demo; 3] = [
    Demo {
        id: "demo-peaches",
        text: "Jake has 11 fewer peaches than Steven. If Jake has 17 peaches. How many peaches does Steven have?",
        gold: "28",
        tokens: ["peaches", "Jake", "Steven"],
        steps: [
            "Jake has 17 peaches.",
            "Steven has 11 more peaches than Jake.",
            "17 plus 11 is 28.",
        ],
        paraphrases: [
            "How many peaches does Steven possess?",
            "What is the number of peaches Steven has?",
            "How many peaches is Steven in possession of?",
        ],
    },
    Demo {
        id: "demo-train",
        text: "A train travels 60 miles in one hour. How far does it travel in 3 hours?",
        gold: "180",
        tokens: ["miles", "hours", "train"],
        steps: [
            "The train covers 60 miles each hour.",
            "It travels for 3 hours.",
            "60 times 3 is 180.",
        ],
        paraphrases: [
            "What distance does the train cover in 3 hours?",
            "How many miles does the train go over three hours?",
            "In three hours, how far does the train get?",
        ],
    },
    Demo {
        id: "demo-eggs",
        text: "Maria bought 4 boxes of 6 eggs. How many eggs did she buy?",
        gold: "24",
        tokens: ["eggs", "boxes", "Maria"],
        steps: [
            "Maria bought 4 boxes.",
            "Each box holds 6 eggs.",
            "4 times 6 is 24.",
        ],
        paraphrases: [
            "How many eggs did Maria purchase in total?",
            "What is the total number of eggs Maria bought?",
            "How many eggs does Maria end up with?",
        ],
    },
];

// Synonyms used by the counterfactual faithfulness test, plus the
// substituted question texts the mock must recognize.
const SYNONYMS: [(&str, &str); 9] = [
    ("peaches", "nectarines"),
    ("jake", "james"),
    ("steven", "stephen"),
    ("miles", "kilometers"),
    ("hours", "stretches"),
    ("train", "locomotive"),
    ("eggs", "ova"),
    ("boxes", "cartons"),
    ("maria", "marie"),
];

const SUBSTITUTED: [(&str, [&str; 3], &str); 3] = [
    (
        "James has 11 fewer nectarines than Stephen. If James has 17 nectarines. How many nectarines does Stephen have?",
        ["nectarines", "james", "stephen"],
        "28",
    ),
    (
        "A locomotive travels 60 kilometers in one hour. How far does it travel in 3 stretches?",
        ["kilometers", "stretches", "locomotive"],
        "180",
    ),
    (
        "Marie bought 4 cartons of 6 ova. How many ova did she buy?",
        ["ova", "cartons", "marie"],
        "24",
    ),
];

fn main() {
    let root = Path::new("fixtures/demo");
    std::fs::create_dir_all(root).expect("create fixtures/demo");

    let mut dataset = String::new();
    let mut rules: Vec<MockRule> = Vec::new();
    for demo in &DEMO_QUESTIONS {
        let record = serde_json::json!({
            "id": demo.id,
            "question": demo.text,
            "answer": demo.gold,
            "dataset_kind": "math_word",
        });
        dataset.push_str(&record.to_string());
        dataset.push('\n');

        let script = QuestionScript {
            paraphrases: demo.paraphrases.iter().map(|s| s.to_string()).collect(),
            variants: vec![ResponseScript {
                ti_entries: vec![
                    (demo.tokens[0].to_string(), 60),
                    (demo.tokens[1].to_string(), 30),
                    (demo.tokens[2].to_string(), 10),
                ],
                cot_steps: demo.steps.iter().map(|s| s.to_string()).collect(),
                answer: demo.gold.to_string(),
                confidence_pct: 100,
            }],
        };
        rules.extend(scripted_question_rules(demo.text, &script));
        rules.push(rule_regex(
            &early_answer_pattern(demo.text),
            vec![early_answer_response(demo.gold)],
        ));
    }

    // The mock reflects every synonym substitution at the original ranks,
    // so the demo reports full counterfactual faithfulness.
    for (text, tokens, answer) in &SUBSTITUTED {
        rules.push(rule_regex(
            &ti_prompt_pattern(text),
            vec![ti_weighted_response(
                &[(tokens[0], 60), (tokens[1], 30), (tokens[2], 10)],
                answer,
                100,
            )],
        ));
    }

    std::fs::write(root.join("dataset.jsonl"), dataset).expect("write dataset");
    let fixture = MockFixture { rules };
    std::fs::write(
        root.join("mock_fixture.json"),
        serde_json::to_string_pretty(&fixture).expect("serialize fixture"),
    )
    .expect("write mock fixture");

    let synonyms: serde_json::Map<String, serde_json::Value> = SYNONYMS
        .iter()
        .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.to_string())))
        .collect();
    std::fs::write(
        root.join("synonyms.json"),
        serde_json::to_string_pretty(&serde_json::Value::Object(synonyms)).expect("serialize"),
    )
    .expect("write synonyms");

    std::fs::write(root.join("run.toml"), DEMO_CONFIG).expect("write config");
    println!("wrote fixtures/demo (dataset, mock fixture, synonyms, run.toml)");
}

const DEMO_CONFIG: &str = r#"# Offline demo: a scripted mock backend stands in for a real model.

[backend]
kind = "mock"
fixture = "mock_fixture.json"

[dataset]
path = "dataset.jsonl"

[run]
model_name = "scripted-demo"
modes = ["token_importance", "cot"]
strategies = ["verbalized", "sample_probe", "model_probe"]
n_paraphrases = 3
n_samples = 3
tau = 1.0
k = 3
subset_size = 100
seed = 0
faithfulness = true
run_root = "runs"
cache_path = "cache.jsonl"

[entailment]
kind = "exact_match"

[synonyms]
kind = "wordlist"
path = "synonyms.json"
"#;
