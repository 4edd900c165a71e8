//! Per-label taboo words from round-1 paraphrases: a one-vs-rest linear SVM
//! over bag-of-words picks the most label-indicative words, after a
//! named-entity filter.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenize::TokenStream;

/// Bijection between vocabulary words and dense column indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureIndex {
    columns: BTreeMap<String, usize>,
    words: Vec<String>,
}

impl FeatureIndex {
    /// Builds the index from token streams; columns are assigned in
    /// lexicographic word order.
    pub fn build<'a>(streams: impl IntoIterator<Item = &'a TokenStream>) -> Self {
        let vocab: BTreeSet<&str> = streams
            .into_iter()
            .flat_map(|s| s.tokens().iter().map(String::as_str))
            .collect();
        let words: Vec<String> = vocab.into_iter().map(str::to_string).collect();
        let columns = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Self { columns, words }
    }

    pub fn column(&self, word: &str) -> Option<usize> {
        self.columns.get(word).copied()
    }

    pub fn word(&self, column: usize) -> &str {
        &self.words[column]
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Dense document-term count matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DocTermMatrix {
    rows: Vec<Vec<f64>>,
    vocab_size: usize,
}

impl DocTermMatrix {
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }
}

/// Counts word occurrences per document. Tokens absent from the index are
/// skipped. With `binary` set, counts collapse to presence indicators.
pub fn featurize(
    streams: &[TokenStream],
    index: &FeatureIndex,
    binary: bool,
) -> DocTermMatrix {
    let rows = streams
        .iter()
        .map(|stream| {
            let mut row = vec![0.0; index.len()];
            for token in stream.tokens() {
                if let Some(col) = index.column(token) {
                    if binary {
                        row[col] = 1.0;
                    } else {
                        row[col] += 1.0;
                    }
                }
            }
            row
        })
        .collect();
    DocTermMatrix {
        rows,
        vocab_size: index.len(),
    }
}

/// Hyperparameters of the hinge-loss subgradient trainer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Inverse regularization strength.
    pub c: f64,
    pub epochs: usize,
    pub rng_seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            epochs: 200,
            rng_seed: 0,
        }
    }
}

/// Trains one L2-regularized hinge-loss classifier per label in a one-vs-rest
/// setting, by deterministic epoch-based subgradient descent (Pegasos
/// schedule, shuffling fixed by `rng_seed`).
///
/// Returns label -> weight vector of length `vocab_size`. Identical inputs and
/// seed reproduce identical weights bit-for-bit.
pub fn train_one_vs_rest(
    matrix: &DocTermMatrix,
    labels: &[String],
    config: &SvmConfig,
) -> Result<BTreeMap<String, Vec<f64>>> {
    assert_eq!(matrix.n_docs(), labels.len(), "one label per document");
    let distinct: BTreeSet<&str> = labels.iter().map(String::as_str).collect();
    if distinct.len() < 2 {
        return Err(Error::SingleLabel(distinct.len()));
    }

    let n = matrix.n_docs() as f64;
    let lambda = 1.0 / (config.c * n);
    let mut weights = BTreeMap::new();
    for label in distinct {
        let targets: Vec<f64> = labels
            .iter()
            .map(|l| if l == label { 1.0 } else { -1.0 })
            .collect();
        let w = train_binary(matrix, &targets, lambda, config);
        weights.insert(label.to_string(), w);
    }
    Ok(weights)
}

fn train_binary(matrix: &DocTermMatrix, targets: &[f64], lambda: f64, config: &SvmConfig) -> Vec<f64> {
    let vocab = matrix.vocab_size();
    // w is kept as scale * v so the per-step shrink stays O(1).
    let mut v = vec![0.0_f64; vocab];
    let mut scale = 1.0_f64;
    let mut order: Vec<usize> = (0..matrix.n_docs()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut t = 0u64;

    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        for &doc in &order {
            t += 1;
            let eta = 1.0 / (lambda * t as f64);
            let row = &matrix.rows()[doc];
            let y = targets[doc];
            let margin = y * scale * dot(&v, row);
            let shrink = 1.0 - eta * lambda; // = 1 - 1/t
            if t == 1 {
                scale = 1.0; // w_1 is zero regardless of scale
            } else {
                scale *= shrink;
            }
            if margin < 1.0 {
                let step = eta * y / scale;
                for (vj, xj) in v.iter_mut().zip(row.iter()) {
                    if *xj != 0.0 {
                        *vj += step * xj;
                    }
                }
            }
            if scale < 1e-9 {
                for vj in v.iter_mut() {
                    *vj *= scale;
                }
                scale = 1.0;
            }
        }
    }
    v.iter().map(|vj| vj * scale).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// The selected taboo words for one label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TabooWords {
    pub words: Vec<String>,
    /// Set when fewer than the requested k words survived filtering.
    pub shortfall: bool,
}

/// Per-label taboo word lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TabooCueSet {
    pub by_label: BTreeMap<String, TabooWords>,
}

/// Picks the `k` words with the largest positive weight toward `label`,
/// skipping words flagged by `ne_filter`. Ties break lexicographically; a
/// shortfall is flagged when fewer than `k` candidates survive.
pub fn top_taboo_words(
    weights: &BTreeMap<String, Vec<f64>>,
    index: &FeatureIndex,
    label: &str,
    k: usize,
    ne_filter: &dyn Fn(&str) -> bool,
) -> Result<TabooWords> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let vector = weights
        .get(label)
        .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
    let mut candidates: Vec<(f64, &str)> = vector
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(col, w)| (*w, index.word(col)))
        .filter(|(_, word)| !ne_filter(word))
        .collect();
    candidates.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("finite weights")
            .then_with(|| a.1.cmp(b.1))
    });
    let words: Vec<String> = candidates
        .iter()
        .take(k)
        .map(|(_, w)| w.to_string())
        .collect();
    let shortfall = words.len() < k;
    Ok(TabooWords { words, shortfall })
}

/// Per-word capitalization counts in non-sentence-initial position, gathered
/// before lowercasing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    /// lowercased word -> (capitalized mid-sentence, total mid-sentence)
    mid_sentence: BTreeMap<String, (u32, u32)>,
}

impl CorpusStats {
    pub fn from_texts<'a>(texts: impl IntoIterator<Item = &'a str>) -> Self {
        let mut stats = Self::default();
        for text in texts {
            stats.observe(text);
        }
        stats
    }

    fn observe(&mut self, text: &str) {
        for sentence in text.split(['.', '!', '?']) {
            for (position, word) in case_preserving_words(sentence).enumerate() {
                if position == 0 {
                    continue;
                }
                let capitalized = word.chars().next().is_some_and(char::is_uppercase);
                let entry = self
                    .mid_sentence
                    .entry(word.to_lowercase())
                    .or_insert((0, 0));
                entry.1 += 1;
                if capitalized {
                    entry.0 += 1;
                }
            }
        }
    }

    /// Fraction of mid-sentence occurrences that were capitalized, if any.
    pub fn capitalization_ratio(&self, word: &str) -> Option<f64> {
        let (caps, total) = self.mid_sentence.get(word)?;
        if *total == 0 {
            return None;
        }
        Some(f64::from(*caps) / f64::from(*total))
    }
}

fn case_preserving_words(sentence: &str) -> impl Iterator<Item = &str> {
    sentence
        .split(|c: char| !(c.is_alphanumeric() || c == '\''))
        .map(|w| w.trim_matches('\''))
        .filter(|w| !w.is_empty())
}

/// Default named-entity heuristic: a word is flagged when it was capitalized
/// in at least 80% of its non-sentence-initial occurrences.
pub fn default_ne_filter(word: &str, stats: &CorpusStats) -> bool {
    stats
        .capitalization_ratio(word)
        .is_some_and(|ratio| ratio >= 0.8)
}

/// Capitalization heuristic plus an optional explicit word list.
#[derive(Debug, Clone, Default)]
pub struct NeFilter {
    stats: CorpusStats,
    extra: BTreeSet<String>,
}

impl NeFilter {
    pub fn new(stats: CorpusStats) -> Self {
        Self {
            stats,
            extra: BTreeSet::new(),
        }
    }

    /// Merges a word list file (one word per line, `#` comments allowed) into
    /// the filter.
    pub fn with_wordlist(mut self, path: &Path) -> Result<Self> {
        let content = fs::read_to_string(path)?;
        for line in content.lines() {
            let word = line.trim();
            if word.is_empty() || word.starts_with('#') {
                continue;
            }
            self.extra.insert(word.to_lowercase());
        }
        Ok(self)
    }

    pub fn is_named_entity(&self, word: &str) -> bool {
        self.extra.contains(word) || default_ne_filter(word, &self.stats)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tokenize::tokenize;
    use proptest::prelude::*;
    use rand::Rng;

    fn streams(texts: &[&str]) -> Vec<TokenStream> {
        texts.iter().map(|t| tokenize(t)).collect()
    }

    #[test]
    fn counts_match_by_hand() {
        let docs = streams(&["a b a"]);
        let index = FeatureIndex::build(&docs);
        let matrix = featurize(&docs, &index, false);
        assert_eq!(matrix.rows(), &[vec![2.0, 1.0]]);
    }

    #[test]
    fn empty_doc_gives_zero_row() {
        let docs = vec![tokenize("a b"), tokenize("")];
        let index = FeatureIndex::build(&docs);
        let matrix = featurize(&docs, &index, false);
        assert_eq!(matrix.rows()[1], vec![0.0, 0.0]);
    }

    #[test]
    fn featurize_matches_nested_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let vocab: Vec<String> = (0..12).map(|i| format!("w{i}")).collect();
        let texts: Vec<String> = (0..20)
            .map(|_| {
                (0..rng.gen_range(0..15))
                    .map(|_| vocab[rng.gen_range(0..vocab.len())].clone())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        let docs: Vec<TokenStream> = texts.iter().map(|t| tokenize(t)).collect();
        let index = FeatureIndex::build(&docs);
        let matrix = featurize(&docs, &index, false);
        for (d, doc) in docs.iter().enumerate() {
            for col in 0..index.len() {
                let expected = doc
                    .tokens()
                    .iter()
                    .filter(|t| t.as_str() == index.word(col))
                    .count() as f64;
                assert_eq!(matrix.rows()[d][col], expected, "doc {d} col {col}");
            }
        }
    }

    #[test]
    fn unseen_tokens_are_skipped() {
        let known = streams(&["a b"]);
        let index = FeatureIndex::build(&known);
        let matrix = featurize(&streams(&["a z z"]), &index, false);
        assert_eq!(matrix.rows(), &[vec![1.0, 0.0]]);
    }

    fn two_class_fixture() -> (Vec<TokenStream>, Vec<String>) {
        // "flight" occurs in every travel doc and never elsewhere; "food" vice
        // versa. All other words are document-unique so nothing ties with the
        // separating word.
        let mut docs = Vec::new();
        let mut labels = Vec::new();
        for i in 0..10 {
            docs.push(tokenize(&format!("flight depart{i} city{i}")));
            labels.push("travel".to_string());
            docs.push(tokenize(&format!("food dish{i} place{i}")));
            labels.push("dining".to_string());
        }
        (docs, labels)
    }

    #[test]
    fn separating_word_gets_the_largest_weight() {
        let (docs, labels) = two_class_fixture();
        let index = FeatureIndex::build(&docs);
        let matrix = featurize(&docs, &index, false);
        let weights = train_one_vs_rest(&matrix, &labels, &SvmConfig::default()).unwrap();

        let travel = &weights["travel"];
        let flight_col = index.column("flight").unwrap();
        for col in 0..index.len() {
            if col != flight_col {
                assert!(
                    travel[flight_col] > travel[col],
                    "flight should outrank {}",
                    index.word(col)
                );
            }
        }

        // Independent reference classifier on the same matrix: logistic
        // regression by plain gradient descent must agree on the top word.
        let reference = reference_logistic_top_word(&matrix, &labels, "travel", &index);
        assert_eq!(reference, "flight");
    }

    fn reference_logistic_top_word(
        matrix: &DocTermMatrix,
        labels: &[String],
        positive: &str,
        index: &FeatureIndex,
    ) -> String {
        let mut w = vec![0.0_f64; matrix.vocab_size()];
        let lr = 0.1;
        for _ in 0..300 {
            let mut grad = vec![0.0_f64; w.len()];
            for (row, label) in matrix.rows().iter().zip(labels.iter()) {
                let y = if label == positive { 1.0 } else { 0.0 };
                let z: f64 = row.iter().zip(w.iter()).map(|(x, wi)| x * wi).sum();
                let p = 1.0 / (1.0 + (-z).exp());
                for (g, x) in grad.iter_mut().zip(row.iter()) {
                    *g += (p - y) * x;
                }
            }
            for (wi, g) in w.iter_mut().zip(grad.iter()) {
                *wi -= lr * g / matrix.n_docs() as f64;
            }
        }
        let best = (0..w.len())
            .max_by(|&a, &b| w[a].partial_cmp(&w[b]).unwrap())
            .unwrap();
        index.word(best).to_string()
    }

    #[test]
    fn duplicating_documents_keeps_the_ranking() {
        // Every travel doc carries the three indicators at graded counts
        // (3:2:1); the filler word is shared with the opposite class so its
        // weight washes out. That makes the top-3 ranking decisive.
        let mut docs = Vec::new();
        let mut labels = Vec::new();
        for i in 0..10 {
            docs.push(tokenize(&format!(
                "flight flight flight airport airport gate filler{i}"
            )));
            labels.push("travel".to_string());
            docs.push(tokenize(&format!("food food food menu menu dish filler{i}")));
            labels.push("dining".to_string());
        }
        let index = FeatureIndex::build(&docs);
        let matrix = featurize(&docs, &index, false);
        let config = SvmConfig::default();
        let weights = train_one_vs_rest(&matrix, &labels, &config).unwrap();
        let top = top_taboo_words(&weights, &index, "travel", 3, &|_| false).unwrap();
        assert_eq!(top.words, ["flight", "airport", "gate"]);

        let mut doubled_docs = docs.clone();
        doubled_docs.extend(docs.iter().cloned());
        let mut doubled_labels = labels.clone();
        doubled_labels.extend(labels.iter().cloned());
        let doubled_matrix = featurize(&doubled_docs, &index, false);
        let doubled_weights =
            train_one_vs_rest(&doubled_matrix, &doubled_labels, &config).unwrap();
        let doubled_top =
            top_taboo_words(&doubled_weights, &index, "travel", 3, &|_| false).unwrap();

        assert_eq!(top.words, doubled_top.words);
    }

    #[test]
    fn identical_documents_complete_deterministically() {
        let docs = streams(&["same text here"; 6]);
        let labels: Vec<String> = ["a", "a", "a", "b", "b", "b"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let index = FeatureIndex::build(&docs);
        let matrix = featurize(&docs, &index, false);
        let config = SvmConfig::default();
        let first = train_one_vs_rest(&matrix, &labels, &config).unwrap();
        let second = train_one_vs_rest(&matrix, &labels, &config).unwrap();
        assert_eq!(first, second);
        // Whatever survives, selection must not panic and stays deterministic.
        let a = top_taboo_words(&first, &index, "a", 3, &|_| false).unwrap();
        let b = top_taboo_words(&second, &index, "a", 3, &|_| false).unwrap();
        assert_eq!(a, b);
        // Equal weights tie-break lexicographically.
        assert!(a.words.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn single_label_is_rejected() {
        let docs = streams(&["a b", "b c"]);
        let labels = vec!["only".to_string(), "only".to_string()];
        let index = FeatureIndex::build(&docs);
        let matrix = featurize(&docs, &index, false);
        let err = train_one_vs_rest(&matrix, &labels, &SvmConfig::default()).unwrap_err();
        assert!(matches!(err, Error::SingleLabel(1)));
    }

    #[test]
    fn retraining_is_bit_identical() {
        let (docs, labels) = two_class_fixture();
        let index = FeatureIndex::build(&docs);
        let matrix = featurize(&docs, &index, false);
        let config = SvmConfig {
            rng_seed: 1234,
            ..SvmConfig::default()
        };
        let first = train_one_vs_rest(&matrix, &labels, &config).unwrap();
        let second = train_one_vs_rest(&matrix, &labels, &config).unwrap();
        for (label, w) in &first {
            assert_eq!(w, &second[label], "weights differ for {label}");
        }
    }

    fn index_of(words: &[&str]) -> FeatureIndex {
        let streams: Vec<TokenStream> = words.iter().map(|w| tokenize(w)).collect();
        FeatureIndex::build(&streams)
    }

    #[test]
    fn argmax_selection() {
        let index = index_of(&["a", "b", "c"]);
        let mut weights = BTreeMap::new();
        weights.insert("x".to_string(), vec![0.9, 0.5, 0.1]);
        let top = top_taboo_words(&weights, &index, "x", 2, &|_| false).unwrap();
        assert_eq!(top.words, ["a", "b"]);
        assert!(!top.shortfall);
    }

    #[test]
    fn filtered_words_are_replaced_by_the_next_best() {
        let index = index_of(&["a", "b", "c"]);
        let mut weights = BTreeMap::new();
        weights.insert("x".to_string(), vec![0.9, 0.5, 0.1]);
        let top = top_taboo_words(&weights, &index, "x", 2, &|w| w == "b").unwrap();
        assert_eq!(top.words, ["a", "c"]);
    }

    #[test]
    fn selection_matches_full_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let words: Vec<String> = (0..200).map(|i| format!("word{i:03}")).collect();
        let index = index_of(&words.iter().map(String::as_str).collect::<Vec<_>>());
        for _ in 0..20 {
            let vector: Vec<f64> = (0..index.len())
                .map(|_| (rng.gen_range(-50..50) as f64) / 10.0)
                .collect();
            let mut weights = BTreeMap::new();
            weights.insert("x".to_string(), vector.clone());
            let top = top_taboo_words(&weights, &index, "x", 3, &|_| false).unwrap();

            let mut oracle: Vec<(f64, String)> = vector
                .iter()
                .enumerate()
                .filter(|(_, w)| **w > 0.0)
                .map(|(i, w)| (*w, index.word(i).to_string()))
                .collect();
            oracle.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap().then_with(|| a.1.cmp(&b.1)));
            let expected: Vec<String> = oracle.into_iter().take(3).map(|(_, w)| w).collect();
            assert_eq!(top.words, expected);
        }
    }

    #[test]
    fn unknown_label_errors() {
        let index = index_of(&["a"]);
        let weights = BTreeMap::new();
        assert!(matches!(
            top_taboo_words(&weights, &index, "ghost", 1, &|_| false),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn capitalization_heuristic_thresholds() {
        let texts = [
            "I flew to Boston yesterday. The flight to Boston was long.",
            "We landed in Boston early. My flight was smooth.",
        ];
        let stats = CorpusStats::from_texts(texts.iter().copied());
        assert!(default_ne_filter("boston", &stats));
        assert!(!default_ne_filter("flight", &stats));
        // Sentence-initial occurrences never count.
        assert!(!default_ne_filter("we", &stats));
    }

    #[test]
    fn seventy_percent_capitalization_is_below_threshold() {
        // 7 capitalized + 3 lowercase mid-sentence occurrences.
        let mut texts: Vec<String> = Vec::new();
        for _ in 0..7 {
            texts.push("the word Widget appears".to_string());
        }
        for _ in 0..3 {
            texts.push("the word widget appears".to_string());
        }
        let stats = CorpusStats::from_texts(texts.iter().map(String::as_str));
        assert_eq!(stats.capitalization_ratio("widget"), Some(0.7));
        assert!(!default_ne_filter("widget", &stats));
    }

    #[test]
    fn wordlist_merges_into_the_filter() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        use std::io::Write;
        writeln!(file, "# entities\nAcme\n").unwrap();
        let filter = NeFilter::new(CorpusStats::default())
            .with_wordlist(file.path())
            .unwrap();
        assert!(filter.is_named_entity("acme"));
        assert!(!filter.is_named_entity("flight"));
    }

    proptest! {
        #[test]
        fn selection_is_scale_invariant(
            raw in proptest::collection::vec(-100i32..100, 8),
            scale in 1u32..1000,
        ) {
            let words: Vec<String> = (0..raw.len()).map(|i| format!("w{i}")).collect();
            let index = index_of(&words.iter().map(String::as_str).collect::<Vec<_>>());
            let vector: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
            let scaled: Vec<f64> = vector.iter().map(|v| v * scale as f64).collect();
            let mut weights = BTreeMap::new();
            weights.insert("x".to_string(), vector);
            let mut scaled_weights = BTreeMap::new();
            scaled_weights.insert("x".to_string(), scaled);
            let a = top_taboo_words(&weights, &index, "x", 3, &|_| false).unwrap();
            let b = top_taboo_words(&scaled_weights, &index, "x", 3, &|_| false).unwrap();
            prop_assert_eq!(a.words, b.words);
        }

        #[test]
        fn output_never_exceeds_k(
            raw in proptest::collection::vec(-10i32..10, 1..20),
            k in 1usize..6,
        ) {
            let words: Vec<String> = (0..raw.len()).map(|i| format!("w{i}")).collect();
            let index = index_of(&words.iter().map(String::as_str).collect::<Vec<_>>());
            let vector: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
            let positive = vector.iter().filter(|v| **v > 0.0).count();
            let mut weights = BTreeMap::new();
            weights.insert("x".to_string(), vector);
            let top = top_taboo_words(&weights, &index, "x", k, &|_| false).unwrap();
            prop_assert!(top.words.len() <= k);
            prop_assert_eq!(top.words.len(), k.min(positive));
            prop_assert_eq!(top.shortfall, positive < k);
        }
    }
}
