//! Lexical diversity of collected datasets: unique word and unique 3-gram
//! counts, aggregated over repeated collection iterations.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::AugmentedDataset;
use crate::error::{Error, Result};
use crate::strategy::StrategyKind;
use crate::tokenize::{ngrams, tokenize};

/// The two counts taken per (strategy, iteration) dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiversityCounts {
    pub unique_words: usize,
    pub unique_3grams: usize,
}

/// Unique-word count over every text in the dataset (seeds included unless
/// switched off).
pub fn unique_words(dataset: &AugmentedDataset, include_seeds: bool) -> usize {
    unique_words_of_texts(texts_of(dataset, include_seeds))
}

/// Unique n-gram count over every text in the dataset.
pub fn unique_ngrams(dataset: &AugmentedDataset, n: usize, include_seeds: bool) -> Result<usize> {
    unique_ngrams_of_texts(texts_of(dataset, include_seeds), n)
}

fn texts_of(dataset: &AugmentedDataset, include_seeds: bool) -> Vec<&str> {
    if include_seeds {
        dataset.texts().collect()
    } else {
        dataset.paraphrase_texts().collect()
    }
}

pub fn unique_words_of_texts<'a>(texts: impl IntoIterator<Item = &'a str>) -> usize {
    let mut vocabulary = BTreeSet::new();
    for text in texts {
        vocabulary.extend(tokenize(text).into_tokens());
    }
    vocabulary.len()
}

pub fn unique_ngrams_of_texts<'a>(
    texts: impl IntoIterator<Item = &'a str>,
    n: usize,
) -> Result<usize> {
    let mut grams = BTreeSet::new();
    for text in texts {
        grams.extend(ngrams(&tokenize(text), n)?);
    }
    Ok(grams.len())
}

pub fn counts_of(dataset: &AugmentedDataset, include_seeds: bool) -> Result<DiversityCounts> {
    Ok(DiversityCounts {
        unique_words: unique_words(dataset, include_seeds),
        unique_3grams: unique_ngrams(dataset, 3, include_seeds)?,
    })
}

/// Mean and sample standard deviation of one metric across iterations, with
/// the relative delta against the baseline strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub per_iteration: Vec<usize>,
    pub mean: f64,
    pub std_dev: f64,
    /// `(mean - baseline_mean) / baseline_mean`; zero for the baseline row.
    pub delta_vs_baseline: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategySummary {
    pub words: MetricSummary,
    pub ngrams: MetricSummary,
}

/// Per-strategy diversity aggregated over iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityReport {
    pub baseline: StrategyKind,
    pub iterations: usize,
    pub by_strategy: BTreeMap<String, StrategySummary>,
}

fn mean(values: &[usize]) -> f64 {
    values.iter().sum::<usize>() as f64 / values.len() as f64
}

fn sample_std_dev(values: &[usize], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let squared: f64 = values.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
    (squared / (values.len() - 1) as f64).sqrt()
}

fn summarize(values: &[usize], baseline_mean: f64) -> MetricSummary {
    let m = mean(values);
    let delta = if baseline_mean == 0.0 {
        0.0
    } else {
        (m - baseline_mean) / baseline_mean
    };
    MetricSummary {
        per_iteration: values.to_vec(),
        mean: m,
        std_dev: sample_std_dev(values, m),
        delta_vs_baseline: delta,
    }
}

/// Aggregates per-iteration counts into means, sample standard deviations and
/// relative deltas against the baseline strategy.
///
/// Every strategy must carry the same number of iterations, and the baseline
/// must be present.
pub fn aggregate(
    counts: &BTreeMap<StrategyKind, Vec<DiversityCounts>>,
    baseline: StrategyKind,
) -> Result<DiversityReport> {
    let baseline_counts = counts
        .get(&baseline)
        .ok_or_else(|| Error::UnknownLabel(baseline.name().to_string()))?;
    let iterations = baseline_counts.len();
    if iterations == 0 {
        return Err(Error::MismatchedIterations("no iterations recorded".into()));
    }
    for (strategy, list) in counts {
        if list.len() != iterations {
            return Err(Error::MismatchedIterations(format!(
                "{} has {} iterations, baseline has {}",
                strategy,
                list.len(),
                iterations
            )));
        }
    }

    let baseline_words = mean(
        &baseline_counts
            .iter()
            .map(|c| c.unique_words)
            .collect::<Vec<_>>(),
    );
    let baseline_ngrams = mean(
        &baseline_counts
            .iter()
            .map(|c| c.unique_3grams)
            .collect::<Vec<_>>(),
    );

    let mut by_strategy = BTreeMap::new();
    for (strategy, list) in counts {
        let words: Vec<usize> = list.iter().map(|c| c.unique_words).collect();
        let ngrams: Vec<usize> = list.iter().map(|c| c.unique_3grams).collect();
        by_strategy.insert(
            strategy.name().to_string(),
            StrategySummary {
                words: summarize(&words, baseline_words),
                ngrams: summarize(&ngrams, baseline_ngrams),
            },
        );
    }

    Ok(DiversityReport {
        baseline,
        iterations,
        by_strategy,
    })
}

impl DiversityReport {
    /// Aligned-column text table, strategies in name order.
    pub fn to_text_table(&self) -> String {
        let mut lines = Vec::new();
        lines.push(format!(
            "{:<18} {:>12} {:>10} {:>8}  {:>12} {:>10} {:>8}",
            "strategy", "words mean", "std", "delta", "3grams mean", "std", "delta"
        ));
        for (name, summary) in &self.by_strategy {
            lines.push(format!(
                "{:<18} {:>12.1} {:>10.2} {:>7.1}%  {:>12.1} {:>10.2} {:>7.1}%",
                name,
                summary.words.mean,
                summary.words.std_dev,
                summary.words.delta_vs_baseline * 100.0,
                summary.ngrams.mean,
                summary.ngrams.std_dev,
                summary.ngrams.delta_vs_baseline * 100.0,
            ));
        }
        lines.join("\n")
    }
}
