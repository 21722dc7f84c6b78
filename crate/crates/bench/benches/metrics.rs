use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use xprobe::agreement::{
    cot_agreement, ti_uncertainty, token_rank_agreement, Entailer, EntailmentBackendSpec,
};
use xprobe::analysis::welch_t_test;
use xprobe::parser::{parse_cot, parse_token_importance};
use xprobe::perturbation::{ProbingSet, ProbingStrategy};
use xprobe::testkit::{cot_response, ti_weighted_response};
use xprobe::{
    Answer, CoTExplanation, CoTStep, DatasetKind, Explanation, ExplanationRecord, GenerationParams,
    Provenance, TokenImportanceExplanation,
};

const VOCAB: [&str; 12] = [
    "alpha", "bravo", "charlie", "delta", "echo", "foxtrot", "golf", "hotel", "india", "juliett",
    "kilo", "lima",
];

fn random_ti(rng: &mut StdRng, max_len: usize) -> TokenImportanceExplanation {
    let len = rng.gen_range(1..=max_len);
    let mut tokens: Vec<&str> = VOCAB.to_vec();
    for i in (1..tokens.len()).rev() {
        tokens.swap(i, rng.gen_range(0..=i));
    }
    TokenImportanceExplanation::new(
        tokens[..len]
            .iter()
            .map(|t| (t.to_string(), rng.gen_range(0.0..100.0)))
            .collect(),
    )
    .unwrap()
}

fn random_cot(rng: &mut StdRng, max_len: usize) -> CoTExplanation {
    let len = rng.gen_range(1..=max_len);
    CoTExplanation::new(
        (0..len)
            .map(|i| CoTStep {
                text: format!(
                    "step about {} number {i}",
                    VOCAB[rng.gen_range(0..VOCAB.len())]
                ),
                confidence: None,
            })
            .collect(),
    )
    .unwrap()
}

fn ti_record(e: TokenImportanceExplanation, provenance: Provenance) -> ExplanationRecord {
    ExplanationRecord {
        question_id: "bench".to_string(),
        prompt_text: String::new(),
        raw_response: String::new(),
        explanation: Explanation::TokenImportance(e),
        parsed_answer: Answer::parse_text(DatasetKind::MathWord, "1").unwrap(),
        verbalized_confidence: None,
        generation: GenerationParams::new("bench", 0.0, 16),
        provenance,
    }
}

fn bench_token_rank_agreement(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(1);
    let pairs: Vec<(TokenImportanceExplanation, TokenImportanceExplanation)> = (0..256)
        .map(|_| (random_ti(&mut rng, 10), random_ti(&mut rng, 10)))
        .collect();
    c.bench_function("token_rank_agreement_k3", |b| {
        let mut i = 0;
        b.iter(|| {
            let (a, x) = &pairs[i % pairs.len()];
            i += 1;
            black_box(token_rank_agreement(a, x, 3))
        })
    });
}

fn bench_cot_agreement(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(2);
    let pairs: Vec<(CoTExplanation, CoTExplanation)> = (0..128)
        .map(|_| (random_cot(&mut rng, 8), random_cot(&mut rng, 8)))
        .collect();
    let entailer =
        Entailer::offline(EntailmentBackendSpec::NormalizedOverlap { threshold: 0.5 }).unwrap();
    c.bench_function("cot_agreement_overlap", |b| {
        let mut i = 0;
        b.iter(|| {
            let (a, x) = &pairs[i % pairs.len()];
            i += 1;
            black_box(cot_agreement(a, x, &entailer).unwrap())
        })
    });
}

fn bench_ti_uncertainty(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(3);
    let set = ProbingSet {
        original: ti_record(random_ti(&mut rng, 10), Provenance::Original),
        perturbed: (1..=10)
            .map(|i| ti_record(random_ti(&mut rng, 10), Provenance::Paraphrase(i)))
            .collect(),
        strategy: ProbingStrategy::SampleProbing,
        requested_n: 10,
        diagnostics: vec![],
    };
    c.bench_function("ti_uncertainty_n10_k3", |b| {
        b.iter(|| black_box(ti_uncertainty(&set, 3).unwrap()))
    });
}

fn bench_parsers(c: &mut Criterion) {
    let ti_text = ti_weighted_response(
        &[
            ("signatures", 40),
            ("sisters", 25),
            ("goal", 15),
            ("collect", 12),
            ("reach", 8),
        ],
        "100",
        95,
    );
    c.bench_function("parse_token_importance", |b| {
        b.iter(|| black_box(parse_token_importance(&ti_text, DatasetKind::MathWord).unwrap()))
    });

    let cot_text = cot_response(
        &[
            ("The sisters need 100 signatures total.", Some(100)),
            ("They already collected 36.", Some(95)),
            ("100 minus 36 leaves 64.", Some(90)),
        ],
        "64",
        90,
    );
    c.bench_function("parse_cot", |b| {
        b.iter(|| black_box(parse_cot(&cot_text, DatasetKind::MathWord).unwrap()))
    });
}

fn bench_welch(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(4);
    let a: Vec<f64> = (0..100).map(|_| rng.gen_range(0.0..1.0)).collect();
    let b_: Vec<f64> = (0..100).map(|_| rng.gen_range(0.1..1.1)).collect();
    c.bench_function("welch_t_test_n100", |b| {
        b.iter(|| black_box(welch_t_test(&a, &b_).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_token_rank_agreement,
    bench_cot_agreement,
    bench_ti_uncertainty,
    bench_parsers,
    bench_welch
);
criterion_main!(benches);
