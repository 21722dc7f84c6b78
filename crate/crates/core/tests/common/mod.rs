//! Shared fixture plumbing for the integration and acceptance suites.

#![allow(dead_code)]
#![allow(clippy::type_complexity)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use xprobe::gateway::{MockFixture, MockRule};
use xprobe::testkit::{scripted_question_rules, QuestionScript, ResponseScript};
use xprobe::{Answer, DatasetKind, Question};

/// One fixture question: the dataset record plus its scripted behavior.
pub struct ScriptedQuestion {
    pub question: Question,
    pub script: QuestionScript,
}

pub fn consistent_script(
    paraphrases: &[&str],
    ti_entries: &[(&str, u32)],
    cot_steps: &[&str],
    answer: &str,
) -> QuestionScript {
    QuestionScript {
        paraphrases: paraphrases.iter().map(|s| s.to_string()).collect(),
        variants: vec![ResponseScript {
            ti_entries: ti_entries
                .iter()
                .map(|(t, w)| (t.to_string(), *w))
                .collect(),
            cot_steps: cot_steps.iter().map(|s| s.to_string()).collect(),
            answer: answer.to_string(),
            confidence_pct: 100,
        }],
    }
}

/// A five-question math fixture where the mock is fully consistent.
pub fn five_question_fixture() -> Vec<ScriptedQuestion> {
    let specs: [(&str, &str, &str, [&str; 3], [&str; 3], [&str; 2]); 5] = [
        (
            "q1",
            "Jake has 11 fewer peaches than Steven. If Jake has 17 peaches. How many peaches does Steven have?",
            "28",
            ["peaches", "jake", "steven"],
            ["Jake has 17 peaches.", "Steven has 11 more.", "So Steven has 28."],
            ["How many peaches does Steven possess?", "What is the number of peaches Steven has?"],
        ),
        (
            "q2",
            "A train travels 60 miles in one hour. How far does it travel in 3 hours?",
            "180",
            ["miles", "hours", "train"],
            ["Speed is 60 miles per hour.", "Three hours at that speed.", "60 times 3 is 180."],
            ["What distance does the train cover in 3 hours?", "How many miles does the train go in three hours?"],
        ),
        (
            "q3",
            "Maria bought 4 boxes of 6 eggs. How many eggs did she buy?",
            "24",
            ["eggs", "boxes", "maria"],
            ["There are 4 boxes.", "Each box has 6 eggs.", "4 times 6 is 24."],
            ["How many eggs did Maria purchase in total?", "What is the total egg count Maria bought?"],
        ),
        (
            "q4",
            "Sam read 12 pages on Monday and 15 on Tuesday. How many pages did Sam read?",
            "27",
            ["pages", "monday", "tuesday"],
            ["Monday was 12 pages.", "Tuesday was 15 pages.", "12 plus 15 is 27."],
            ["What is the total number of pages Sam read?", "How many pages did Sam get through overall?"],
        ),
        (
            "q5",
            "A baker sold 45 of 60 muffins. How many muffins are left?",
            "15",
            ["muffins", "sold", "baker"],
            ["The baker started with 60.", "45 were sold.", "60 minus 45 is 15."],
            ["How many muffins remain unsold?", "What number of muffins does the baker still have?"],
        ),
    ];
    specs
        .into_iter()
        .map(|(id, text, answer, tokens, steps, paraphrases)| {
            let ti: Vec<(&str, u32)> = vec![(tokens[0], 60), (tokens[1], 30), (tokens[2], 10)];
            ScriptedQuestion {
                question: Question::new(
                    id,
                    text,
                    DatasetKind::MathWord,
                    Some(Answer::parse_text(DatasetKind::MathWord, answer).unwrap()),
                )
                .unwrap(),
                script: consistent_script(&paraphrases, &ti, &steps, answer),
            }
        })
        .collect()
}

/// Writes the dataset (JSONL) and mock fixture (JSON) files.
pub fn write_fixture_files(dir: &Path, questions: &[ScriptedQuestion]) -> (PathBuf, PathBuf) {
    let dataset_path = dir.join("dataset.jsonl");
    let mut dataset = String::new();
    for sq in questions {
        let answer = sq.question.gold_answer.as_ref().map(|a| a.display_text());
        let record = serde_json::json!({
            "id": sq.question.id,
            "question": sq.question.text,
            "answer": answer,
            "dataset_kind": sq.question.dataset_kind,
        });
        dataset.push_str(&record.to_string());
        dataset.push('\n');
    }
    std::fs::write(&dataset_path, dataset).unwrap();

    let mut rules: Vec<MockRule> = Vec::new();
    for sq in questions {
        rules.extend(scripted_question_rules(&sq.question.text, &sq.script));
    }
    let fixture_path = dir.join("mock_fixture.json");
    std::fs::write(
        &fixture_path,
        serde_json::to_string_pretty(&MockFixture { rules }).unwrap(),
    )
    .unwrap();
    (dataset_path, fixture_path)
}

/// Writes a TOML config into the directory and returns its path.
pub fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, body).unwrap();
    path
}

/// A config for mock-backed runs over the standard fixture files.
pub fn mock_config_toml(extra_run_lines: &str) -> String {
    format!(
        r#"
[backend]
kind = "mock"
fixture = "mock_fixture.json"

[dataset]
path = "dataset.jsonl"

[run]
model_name = "scripted"
n_paraphrases = 2
n_samples = 2
tau = 1.0
k = 3
{extra_run_lines}

[entailment]
kind = "exact_match"
"#
    )
}

/// Recursive byte snapshot of a directory tree.
pub fn snapshot_dir(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut snapshot = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let relative = path.strip_prefix(root).unwrap().to_path_buf();
                snapshot.insert(relative, std::fs::read(&path).unwrap());
            }
        }
    }
    snapshot
}
