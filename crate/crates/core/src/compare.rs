//! Comparison harness between a baseline strategy and its competitors, over
//! externally supplied accuracy measurements or per-iteration diversity
//! counts.
//!
//! Accuracy comparisons use the Mann-Whitney U test on the pooled replicate
//! values; paired per-iteration series use the Wilcoxon signed-rank test.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{
    mann_whitney_u_with, wilcoxon_signed_rank_with, StatTestResult, ZeroHandling,
};

/// One row of an accuracy CSV: `strategy,iteration,replicate,accuracy`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub strategy: String,
    pub iteration: u32,
    pub replicate: u32,
    pub accuracy: f64,
}

pub fn load_accuracy_csv(path: &Path) -> Result<Vec<AccuracyRow>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for (i, row) in reader.deserialize::<AccuracyRow>().enumerate() {
        let row = row.map_err(|e| Error::MalformedRecord {
            row: i + 2,
            reason: e.to_string(),
        })?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::EmptyDataset(path.to_path_buf()));
    }
    Ok(rows)
}

/// Outcome counts against the baseline, Table-1 style: how many paired
/// observations came out better, similar or worse.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub better: usize,
    pub similar: usize,
    pub worse: usize,
}

/// Differences within this absolute margin count as "similar".
pub const SIMILARITY_MARGIN: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub strategy: String,
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub delta_vs_baseline: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test: Option<StatTestResult>,
    /// Set when the test degenerated (for example, all paired differences
    /// were zero).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    pub outcomes: OutcomeCounts,
}

impl ComparisonRow {
    pub fn significant(&self) -> bool {
        self.test.as_ref().is_some_and(|t| t.significant)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub metric: String,
    pub baseline: String,
    pub alpha: f64,
    /// Rows in strategy-name order, baseline included.
    pub rows: Vec<ComparisonRow>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn sample_std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let squared: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    (squared / (values.len() - 1) as f64).sqrt()
}

fn outcome_counts(strategy: &[f64], baseline: &[f64]) -> OutcomeCounts {
    let mut counts = OutcomeCounts::default();
    for (s, b) in strategy.iter().zip(baseline.iter()) {
        let diff = s - b;
        if diff > SIMILARITY_MARGIN {
            counts.better += 1;
        } else if diff < -SIMILARITY_MARGIN {
            counts.worse += 1;
        } else {
            counts.similar += 1;
        }
    }
    counts
}

fn build_report<F>(
    metric: &str,
    groups: &BTreeMap<String, Vec<f64>>,
    baseline: &str,
    alpha: f64,
    run_test: F,
) -> Result<ComparisonReport>
where
    F: Fn(&[f64], &[f64]) -> Result<StatTestResult>,
{
    let baseline_values = groups.get(baseline).ok_or_else(|| {
        Error::Config(format!(
            "baseline strategy {baseline:?} not present (have: {})",
            groups.keys().cloned().collect::<Vec<_>>().join(", ")
        ))
    })?;
    let baseline_mean = mean(baseline_values);

    let mut rows = Vec::new();
    for (strategy, values) in groups {
        let is_baseline = strategy == baseline;
        let (test, note) = if is_baseline {
            (None, None)
        } else {
            match run_test(values, baseline_values) {
                Ok(result) => (Some(result), None),
                Err(Error::AllZeroDifferences) => {
                    (None, Some("all paired differences are zero".to_string()))
                }
                Err(e) => return Err(e),
            }
        };
        let delta = if baseline_mean == 0.0 {
            0.0
        } else {
            (mean(values) - baseline_mean) / baseline_mean
        };
        rows.push(ComparisonRow {
            strategy: strategy.clone(),
            n: values.len(),
            mean: mean(values),
            std_dev: sample_std_dev(values),
            delta_vs_baseline: if is_baseline { 0.0 } else { delta },
            test,
            note,
            outcomes: if is_baseline {
                OutcomeCounts::default()
            } else {
                outcome_counts(values, baseline_values)
            },
        });
    }

    Ok(ComparisonReport {
        metric: metric.to_string(),
        baseline: baseline.to_string(),
        alpha,
        rows,
    })
}

/// Mann-Whitney comparison of independent value groups against a baseline
/// group (accuracy replicates, typically).
pub fn compare_groups(
    metric: &str,
    groups: &BTreeMap<String, Vec<f64>>,
    baseline: &str,
    alpha: f64,
) -> Result<ComparisonReport> {
    build_report(metric, groups, baseline, alpha, |a, b| {
        mann_whitney_u_with(a, b, alpha)
    })
}

/// Wilcoxon signed-rank comparison of per-iteration series paired against the
/// baseline series.
pub fn compare_paired(
    metric: &str,
    groups: &BTreeMap<String, Vec<f64>>,
    baseline: &str,
    alpha: f64,
) -> Result<ComparisonReport> {
    let baseline_len = groups.get(baseline).map(Vec::len);
    for (strategy, values) in groups {
        if Some(values.len()) != baseline_len {
            return Err(Error::MismatchedIterations(format!(
                "{strategy} has {} values",
                values.len()
            )));
        }
    }
    build_report(metric, groups, baseline, alpha, |a, b| {
        let pairs: Vec<(f64, f64)> = a.iter().copied().zip(b.iter().copied()).collect();
        wilcoxon_signed_rank_with(&pairs, alpha, ZeroHandling::Discard)
    })
}

/// Pools accuracy rows by strategy and compares each against the baseline via
/// Mann-Whitney U. Outcome counts pair up per-iteration replicate means.
pub fn compare_accuracies(
    rows: &[AccuracyRow],
    baseline: &str,
    alpha: f64,
) -> Result<ComparisonReport> {
    let mut pooled: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    let mut per_iteration: BTreeMap<String, BTreeMap<u32, Vec<f64>>> = BTreeMap::new();
    for row in rows {
        pooled
            .entry(row.strategy.clone())
            .or_default()
            .push(row.accuracy);
        per_iteration
            .entry(row.strategy.clone())
            .or_default()
            .entry(row.iteration)
            .or_default()
            .push(row.accuracy);
    }

    let mut report = compare_groups("accuracy", &pooled, baseline, alpha)?;

    // Replace pooled outcome counts with per-iteration mean comparisons.
    let baseline_means: BTreeMap<u32, f64> = per_iteration
        .get(baseline)
        .map(|iterations| {
            iterations
                .iter()
                .map(|(&it, values)| (it, mean(values)))
                .collect()
        })
        .unwrap_or_default();
    for row in &mut report.rows {
        if row.strategy == baseline {
            continue;
        }
        let mut strategy_means = Vec::new();
        let mut matched_baseline = Vec::new();
        if let Some(iterations) = per_iteration.get(&row.strategy) {
            for (it, values) in iterations {
                if let Some(&b) = baseline_means.get(it) {
                    strategy_means.push(mean(values));
                    matched_baseline.push(b);
                }
            }
        }
        row.outcomes = outcome_counts(&strategy_means, &matched_baseline);
    }
    Ok(report)
}

impl ComparisonReport {
    /// Aligned-column text table with a `*` marker on significant rows.
    pub fn to_text_table(&self) -> String {
        let mut lines = Vec::new();
        lines.push(format!(
            "metric: {} | baseline: {} | alpha: {}",
            self.metric, self.baseline, self.alpha
        ));
        lines.push(format!(
            "{:<18} {:>4} {:>10} {:>9} {:>8} {:>14} {:>10} {:>4}  {}",
            "strategy", "n", "mean", "std", "delta", "test", "p", "sig", "better/similar/worse"
        ));
        for row in &self.rows {
            let (test_name, p_text) = match (&row.test, &row.note) {
                (Some(test), _) => {
                    let name = match test.test {
                        crate::stats::TestKind::Wilcoxon => "wilcoxon",
                        crate::stats::TestKind::MannWhitney => "mann-whitney",
                    };
                    let method = match test.method {
                        crate::stats::PvalueMethod::Exact => "exact",
                        crate::stats::PvalueMethod::NormalApprox => "approx",
                    };
                    (format!("{name}/{method}"), format!("{:.4}", test.p_value))
                }
                (None, Some(_)) => ("degenerate".to_string(), "-".to_string()),
                (None, None) => ("baseline".to_string(), "-".to_string()),
            };
            lines.push(format!(
                "{:<18} {:>4} {:>10.4} {:>9.4} {:>7.2}% {:>14} {:>10} {:>4}  {}/{}/{}",
                row.strategy,
                row.n,
                row.mean,
                row.std_dev,
                row.delta_vs_baseline * 100.0,
                test_name,
                p_text,
                if row.significant() { "*" } else { "" },
                row.outcomes.better,
                row.outcomes.similar,
                row.outcomes.worse,
            ));
        }
        lines.join("\n")
    }
}
