//! Aggregation and statistics over per-question results: Welch t-tests
//! for correct-vs-incorrect confidence comparisons, correctness splits,
//! Pearson correlation between confidence and faithfulness, and the run
//! summary report.
//!
//! The t-distribution p-value is computed from the regularized
//! incomplete beta function via the standard continued-fraction
//! evaluation, so no numeric dependency is needed.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{ConfidenceScore, DatasetKind, Diagnostic, ExplanationMode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
    #[error("no results to summarize")]
    NoResults,
}

/// How a per-question confidence was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Verbalized,
    SampleProbe,
    ModelProbe,
}

impl Strategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::Verbalized => "verbalized",
            Strategy::SampleProbe => "sample_probe",
            Strategy::ModelProbe => "model_probe",
        }
    }
}

/// One (question, mode, strategy) outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionResult {
    pub question_id: String,
    pub dataset_kind: DatasetKind,
    pub mode: ExplanationMode,
    pub strategy: Strategy,
    /// The strategy's confidence estimate. For probing strategies this
    /// is the mean-agreement score; for the verbalized strategy it is
    /// the confidence the model stated itself.
    pub probing_confidence: ConfidenceScore,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verbalized_confidence: Option<ConfidenceScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faithfulness: Option<f64>,
    /// Present only when the dataset provides a gold answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
    pub n_effective: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
}

/// Welch's unequal-variance t-test result.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchTTest {
    pub t_statistic: f64,
    pub p_value: f64,
    pub degrees_of_freedom: f64,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (ddof = 1).
fn variance(xs: &[f64], m: f64) -> f64 {
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Standard deviation for reporting: 0 for fewer than two values.
fn report_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        0.0
    } else {
        variance(xs, mean(xs)).sqrt()
    }
}

/// Welch's t-test with Welch–Satterthwaite degrees of freedom and a
/// two-sided p-value. Requires at least two observations with nonzero
/// variance on each side.
pub fn welch_t_test(a: &[f64], b: &[f64]) -> Result<WelchTTest, AnalysisError> {
    if a.len() < 2 || b.len() < 2 {
        return Err(AnalysisError::DegenerateSample(format!(
            "need at least 2 observations per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (variance(a, ma), variance(b, mb));
    if va <= 0.0 || vb <= 0.0 {
        return Err(AnalysisError::DegenerateSample(
            "sample variance is zero".to_string(),
        ));
    }
    let sa = va / a.len() as f64;
    let sb = vb / b.len() as f64;
    let se2 = sa + sb;
    let t = (ma - mb) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    Ok(WelchTTest {
        t_statistic: t,
        p_value: student_t_two_sided_p(t, df),
        degrees_of_freedom: df,
    })
}

/// Two-sided p-value of a t statistic under `df` degrees of freedom.
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    regularized_incomplete_beta(df / (df + t * t), 0.5 * df, 0.5)
}

/// Regularized incomplete beta function `I_x(a, b)` via the continued
/// fraction expansion with the symmetry transform.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_continued_fraction(x, a, b) / a
    } else {
        1.0 - front * beta_continued_fraction(1.0 - x, b, a) / b
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_continued_fraction(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 300;
    const EPS: f64 = 3e-16;
    const FPMIN: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let mf = m as f64;
        let m2 = 2.0 * mf;
        let numerator = mf * (b - mf) * x / ((qam + m2) * (a + m2));
        d = 1.0 + numerator * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + numerator / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let numerator = -(a + mf) * (qab + mf) * x / ((a + m2) * (qap + m2));
        d = 1.0 + numerator * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + numerator / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Lanczos approximation of ln Γ(x).
fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    #[allow(clippy::excessive_precision)]
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        (PI / (PI * x).sin()).ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut acc = COEFFS[0];
        for (i, &coeff) in COEFFS.iter().enumerate().skip(1) {
            acc += coeff / (x + i as f64);
        }
        let t = x + G + 0.5;
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
    }
}

/// Confidences partitioned by answer correctness.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CorrectnessSplit {
    pub correct: Vec<f64>,
    pub incorrect: Vec<f64>,
    /// Results without a gold answer, excluded from both lists.
    pub ungraded: usize,
}

/// Splits confidence scores by the correctness flag.
pub fn correctness_split(results: &[QuestionResult]) -> CorrectnessSplit {
    split_refs(results.iter())
}

fn split_refs<'a>(results: impl Iterator<Item = &'a QuestionResult>) -> CorrectnessSplit {
    let mut split = CorrectnessSplit::default();
    for r in results {
        match r.correct {
            Some(true) => split.correct.push(r.probing_confidence.value()),
            Some(false) => split.incorrect.push(r.probing_confidence.value()),
            None => split.ungraded += 1,
        }
    }
    split
}

/// Pearson correlation; `None` when either side has zero variance or
/// fewer than two points.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let mx = mean(x);
    let my = mean(y);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Aggregates for one (mode, strategy) group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub dataset_kind: DatasetKind,
    pub mode: ExplanationMode,
    pub strategy: Strategy,
    pub question_count: usize,
    pub confidence_mean: f64,
    pub confidence_std: f64,
    pub verbalized_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verbalized_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verbalized_std: Option<f64>,
    pub faithfulness_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faithfulness_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub faithfulness_std: Option<f64>,
    pub correct_count: usize,
    pub incorrect_count: usize,
    pub ungraded_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct_confidence_mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub incorrect_confidence_mean: Option<f64>,
    /// Welch t-test of correct vs incorrect confidences; absent when a
    /// side is too small or has zero variance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct_vs_incorrect: Option<WelchTTest>,
    /// Pearson correlation between confidence and faithfulness.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence_faithfulness_correlation: Option<f64>,
}

/// The machine-readable run summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub total_results: usize,
    pub distinct_questions: usize,
    /// Mean stated confidence across every result that carries one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_verbalized_confidence: Option<f64>,
    pub diagnostics_count: usize,
    pub groups: Vec<GroupSummary>,
}

/// Aggregates results into per-(mode, strategy) summaries. Group order
/// is deterministic (mode, then strategy), and the aggregation is
/// invariant to result order.
pub fn summarize_run(results: &[QuestionResult]) -> Result<RunReport, AnalysisError> {
    if results.is_empty() {
        return Err(AnalysisError::NoResults);
    }

    let mut grouped: BTreeMap<(&'static str, &'static str, Strategy), Vec<&QuestionResult>> =
        BTreeMap::new();
    for r in results {
        grouped
            .entry((r.dataset_kind.as_str(), r.mode.as_str(), r.strategy))
            .or_default()
            .push(r);
    }

    let mut groups = Vec::with_capacity(grouped.len());
    for ((_, _, strategy), rows) in grouped.iter_mut() {
        // Aggregate in id order so the report is exactly permutation-
        // invariant (floating-point sums are order-sensitive).
        rows.sort_by(|a, b| a.question_id.cmp(&b.question_id));
        let confidences: Vec<f64> = rows.iter().map(|r| r.probing_confidence.value()).collect();
        let verbalized: Vec<f64> = rows
            .iter()
            .filter_map(|r| r.verbalized_confidence.map(|c| c.value()))
            .collect();
        let faithfulness: Vec<f64> = rows.iter().filter_map(|r| r.faithfulness).collect();
        let split = split_refs(rows.iter().copied());
        let paired: (Vec<f64>, Vec<f64>) = rows
            .iter()
            .filter_map(|r| r.faithfulness.map(|f| (r.probing_confidence.value(), f)))
            .unzip();

        groups.push(GroupSummary {
            dataset_kind: rows[0].dataset_kind,
            mode: rows[0].mode,
            strategy: *strategy,
            question_count: rows.len(),
            confidence_mean: mean(&confidences),
            confidence_std: report_std(&confidences),
            verbalized_count: verbalized.len(),
            verbalized_mean: (!verbalized.is_empty()).then(|| mean(&verbalized)),
            verbalized_std: (!verbalized.is_empty()).then(|| report_std(&verbalized)),
            faithfulness_count: faithfulness.len(),
            faithfulness_mean: (!faithfulness.is_empty()).then(|| mean(&faithfulness)),
            faithfulness_std: (!faithfulness.is_empty()).then(|| report_std(&faithfulness)),
            correct_count: split.correct.len(),
            incorrect_count: split.incorrect.len(),
            ungraded_count: split.ungraded,
            correct_confidence_mean: (!split.correct.is_empty()).then(|| mean(&split.correct)),
            incorrect_confidence_mean: (!split.incorrect.is_empty())
                .then(|| mean(&split.incorrect)),
            correct_vs_incorrect: welch_t_test(&split.correct, &split.incorrect).ok(),
            confidence_faithfulness_correlation: pearson_correlation(&paired.0, &paired.1),
        });
    }

    let all_verbalized: Vec<f64> = results
        .iter()
        .filter_map(|r| r.verbalized_confidence.map(|c| c.value()))
        .collect();
    let mut ids: Vec<&str> = results.iter().map(|r| r.question_id.as_str()).collect();
    ids.sort_unstable();
    ids.dedup();

    Ok(RunReport {
        total_results: results.len(),
        distinct_questions: ids.len(),
        mean_verbalized_confidence: (!all_verbalized.is_empty()).then(|| mean(&all_verbalized)),
        diagnostics_count: results.iter().map(|r| r.diagnostics.len()).sum(),
        groups,
    })
}
