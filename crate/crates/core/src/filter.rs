//! Validity filtering of candidate paraphrases: empty, duplicated and
//! malformed phrases are classified and removed before dataset assembly.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::LabeledText;
use crate::strategy::StrategyKind;
use crate::tokenize::tokenize;
use crate::util::strip_list_marker;

/// Version tag of the malformedness rule list, recorded in run manifests.
pub const RULES_VERSION: &str = "default-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Valid,
    Empty,
    Malformed,
    Duplicate,
}

impl fmt::Display for RecordStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Self::Valid => "valid",
            Self::Empty => "empty",
            Self::Malformed => "malformed",
            Self::Duplicate => "duplicate",
        };
        write!(f, "{name}")
    }
}

/// One generated paraphrase with its lineage and validity status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParaphraseRecord {
    pub id: String,
    /// The seed sentence this paraphrase answers; for chaining round 2 this is
    /// a round-1 record id.
    pub seed_id: String,
    pub round: u8,
    pub strategy: StrategyKind,
    pub provider: String,
    pub text: String,
    pub status: RecordStatus,
    /// For duplicates, the id of the earlier record (or seed) collided with.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duplicate_of: Option<String>,
}

/// Normalization used by the duplicate rule: lowercase, collapse whitespace,
/// strip terminal punctuation.
pub fn normalize(text: &str) -> String {
    let collapsed = text.split_whitespace().collect::<Vec<_>>().join(" ");
    let lowered = collapsed.to_lowercase();
    lowered
        .trim_end_matches(['.', '!', '?', ',', ';', ':'])
        .trim()
        .to_string()
}

/// An ordered, versioned malformedness rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum MalformedRule {
    /// Fewer than `min` word tokens.
    MinTokens { min: usize },
    /// More than `factor` times the seed's token count.
    MaxLengthRatio { factor: usize },
    /// A residual list marker survived parsing.
    ListMarkerEcho,
    /// The candidate echoes the instruction template.
    TemplateEcho,
    /// Odd number of double quotes.
    UnbalancedQuotes,
}

impl MalformedRule {
    fn fires(&self, candidate: &str, seed: &LabeledText) -> bool {
        match self {
            Self::MinTokens { min } => tokenize(candidate).len() < *min,
            Self::MaxLengthRatio { factor } => {
                let seed_len = tokenize(&seed.text).len().max(1);
                tokenize(candidate).len() > factor * seed_len
            }
            Self::ListMarkerEcho => strip_list_marker(candidate).is_some(),
            Self::TemplateEcho => normalize(candidate).starts_with("rephrase an original"),
            Self::UnbalancedQuotes => candidate.chars().filter(|&c| c == '"').count() % 2 == 1,
        }
    }
}

/// The pluggable rule list; defaults match [`RULES_VERSION`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MalformedRules(pub Vec<MalformedRule>);

impl Default for MalformedRules {
    fn default() -> Self {
        Self(vec![
            MalformedRule::MinTokens { min: 3 },
            MalformedRule::MaxLengthRatio { factor: 8 },
            MalformedRule::ListMarkerEcho,
            MalformedRule::TemplateEcho,
            MalformedRule::UnbalancedQuotes,
        ])
    }
}

/// Classifies one candidate against the prior set of normalized texts
/// (mapping normalized text -> earlier record id).
///
/// Order: empty, then duplicate (against priors and the seed itself), then the
/// malformedness rules.
pub fn classify(
    candidate: &str,
    prior: &BTreeMap<String, String>,
    seed: &LabeledText,
    rules: &MalformedRules,
) -> (RecordStatus, Option<String>) {
    if candidate.trim().is_empty() {
        return (RecordStatus::Empty, None);
    }
    let normalized = normalize(candidate);
    if let Some(earlier) = prior.get(&normalized) {
        return (RecordStatus::Duplicate, Some(earlier.clone()));
    }
    if normalized == normalize(&seed.text) {
        return (RecordStatus::Duplicate, Some(seed.id.clone()));
    }
    if rules.0.iter().any(|rule| rule.fires(candidate, seed)) {
        return (RecordStatus::Malformed, None);
    }
    (RecordStatus::Valid, None)
}

/// Sequential classification state for one run: the prior set grows as valid
/// records are accepted.
#[derive(Debug, Clone, Default)]
pub struct FilterContext {
    prior: BTreeMap<String, String>,
    rules: MalformedRules,
}

impl FilterContext {
    pub fn new(rules: MalformedRules) -> Self {
        Self {
            prior: BTreeMap::new(),
            rules,
        }
    }

    /// Seeds the prior set with the seed sentences themselves.
    pub fn admit_seeds<'a>(&mut self, seeds: impl IntoIterator<Item = &'a LabeledText>) {
        for seed in seeds {
            self.prior.insert(normalize(&seed.text), seed.id.clone());
        }
    }

    /// Admits an already-accepted text into the prior set (round-1 records
    /// ahead of a round-2 pass).
    pub fn admit(&mut self, id: &str, text: &str) {
        self.prior.insert(normalize(text), id.to_string());
    }

    /// Classifies and, when valid, admits the candidate into the prior set.
    pub fn classify(
        &mut self,
        id: &str,
        candidate: &str,
        seed: &LabeledText,
    ) -> (RecordStatus, Option<String>) {
        let (status, duplicate_of) = classify(candidate, &self.prior, seed, &self.rules);
        if status == RecordStatus::Valid {
            self.prior.insert(normalize(candidate), id.to_string());
        }
        (status, duplicate_of)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub empty: usize,
    pub malformed: usize,
    pub duplicate: usize,
}

impl StatusCounts {
    pub fn total(&self) -> usize {
        self.empty + self.malformed + self.duplicate
    }
}

/// Rejection counts per strategy and provider, serialized into the run
/// manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RejectionReport {
    pub by_strategy: BTreeMap<String, BTreeMap<String, StatusCounts>>,
}

impl RejectionReport {
    pub fn record(&mut self, strategy: StrategyKind, provider: &str, status: RecordStatus) {
        let counts = self
            .by_strategy
            .entry(strategy.name().to_string())
            .or_default()
            .entry(provider.to_string())
            .or_default();
        match status {
            RecordStatus::Empty => counts.empty += 1,
            RecordStatus::Malformed => counts.malformed += 1,
            RecordStatus::Duplicate => counts.duplicate += 1,
            RecordStatus::Valid => {}
        }
    }

    pub fn merge(&mut self, other: &RejectionReport) {
        for (strategy, providers) in &other.by_strategy {
            for (provider, counts) in providers {
                let entry = self
                    .by_strategy
                    .entry(strategy.clone())
                    .or_default()
                    .entry(provider.clone())
                    .or_default();
                entry.empty += counts.empty;
                entry.malformed += counts.malformed;
                entry.duplicate += counts.duplicate;
            }
        }
    }

    pub fn total_removed(&self) -> usize {
        self.by_strategy
            .values()
            .flat_map(|providers| providers.values())
            .map(StatusCounts::total)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_removed() == 0
    }
}

/// Splits classified records into valid and rejected, order-preserving, and
/// tallies the rejections.
pub fn filter_batch(
    records: Vec<ParaphraseRecord>,
) -> (Vec<ParaphraseRecord>, Vec<ParaphraseRecord>, RejectionReport) {
    let mut valid = Vec::new();
    let mut rejected = Vec::new();
    let mut report = RejectionReport::default();
    for record in records {
        if record.status == RecordStatus::Valid {
            valid.push(record);
        } else {
            report.record(record.strategy, &record.provider, record.status);
            rejected.push(record);
        }
    }
    (valid, rejected, report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seed() -> LabeledText {
        LabeledText::new("s0", "tell me the fastest way to get home", "nav").unwrap()
    }

    fn ctx() -> FilterContext {
        FilterContext::new(MalformedRules::default())
    }

    #[test]
    fn empty_candidate_is_empty() {
        let mut ctx = ctx();
        let (status, _) = ctx.classify("c0", "   ", &seed());
        assert_eq!(status, RecordStatus::Empty);
    }

    #[test]
    fn repeat_of_prior_is_duplicate_with_reference() {
        let mut ctx = ctx();
        let (first, _) = ctx.classify("c0", "show me the quickest route home", &seed());
        assert_eq!(first, RecordStatus::Valid);
        let (second, dup) = ctx.classify("c1", "Show me the  quickest route home.", &seed());
        assert_eq!(second, RecordStatus::Duplicate);
        assert_eq!(dup.as_deref(), Some("c0"));
    }

    #[test]
    fn seed_echo_is_duplicate() {
        let mut ctx = ctx();
        ctx.admit_seeds([&seed()]);
        let (status, dup) = ctx.classify("c0", "Tell me the fastest way to get home!", &seed());
        assert_eq!(status, RecordStatus::Duplicate);
        assert_eq!(dup.as_deref(), Some("s0"));
    }

    #[test]
    fn template_echoes_are_malformed() {
        let echoes = [
            "Rephrase an original question or statement 5 times.",
            "rephrase an original question or statement 3 times. Original phrase: \"x\".",
            "  Rephrase an original sentence",
        ];
        for echo in echoes {
            let (status, _) = ctx().classify("c0", echo, &seed());
            assert_eq!(status, RecordStatus::Malformed, "echo not caught: {echo}");
        }
    }

    #[test]
    fn too_short_and_marker_residue_are_malformed() {
        let mut ctx = ctx();
        let (short, _) = ctx.classify("c0", "too short", &seed());
        assert_eq!(short, RecordStatus::Malformed);
        let (marker, _) = ctx.classify("c1", "2. show me the way home", &seed());
        assert_eq!(marker, RecordStatus::Malformed);
        let (quotes, _) = ctx.classify("c2", "show me the \"way home", &seed());
        assert_eq!(quotes, RecordStatus::Malformed);
    }

    #[test]
    fn overlong_candidates_are_malformed() {
        let long = "word ".repeat(8 * 8 + 1);
        let (status, _) = ctx().classify("c0", &long, &seed());
        assert_eq!(status, RecordStatus::Malformed);
    }

    #[test]
    fn clean_batch_passes_untouched() {
        let records: Vec<ParaphraseRecord> = (0..20)
            .map(|i| ParaphraseRecord {
                id: format!("r{i}"),
                seed_id: "s0".into(),
                round: 1,
                strategy: StrategyKind::Prompt,
                provider: "mock".into(),
                text: format!("variant number {i} of the utterance"),
                status: RecordStatus::Valid,
                duplicate_of: None,
            })
            .collect();
        let (valid, rejected, report) = filter_batch(records);
        assert_eq!(valid.len(), 20);
        assert!(rejected.is_empty());
        assert!(report.is_empty());
    }

    #[test]
    fn rejections_are_counted_by_status() {
        let mut records: Vec<ParaphraseRecord> = Vec::new();
        for (i, status) in [
            (0, RecordStatus::Valid),
            (1, RecordStatus::Empty),
            (2, RecordStatus::Duplicate),
        ] {
            records.push(ParaphraseRecord {
                id: format!("r{i}"),
                seed_id: "s0".into(),
                round: 1,
                strategy: StrategyKind::Taboo,
                provider: "mock".into(),
                text: "whatever".into(),
                status,
                duplicate_of: None,
            });
        }
        let (valid, rejected, report) = filter_batch(records);
        assert_eq!(valid.len(), 1);
        assert_eq!(rejected.len(), 2);
        let counts = &report.by_strategy["taboo"]["mock"];
        assert_eq!(counts.empty, 1);
        assert_eq!(counts.duplicate, 1);
        assert_eq!(counts.malformed, 0);
        assert_eq!(report.total_removed(), 2);
    }

    #[test]
    fn filtering_is_idempotent() {
        let mut ctx = ctx();
        ctx.admit_seeds([&seed()]);
        let candidates = [
            "show me the quickest route home",
            "show me the quickest route home",
            "",
            "1. residue",
            "how do i get back home fastest",
        ];
        let mut records = Vec::new();
        for (i, text) in candidates.iter().enumerate() {
            let id = format!("r{i}");
            let (status, duplicate_of) = ctx.classify(&id, text, &seed());
            records.push(ParaphraseRecord {
                id,
                seed_id: "s0".into(),
                round: 1,
                strategy: StrategyKind::Prompt,
                provider: "mock".into(),
                text: text.to_string(),
                status,
                duplicate_of,
            });
        }
        let (valid, _, _) = filter_batch(records);
        assert_eq!(valid.len(), 2);

        // Re-classify the surviving records from scratch: nothing changes.
        let mut ctx2 = ctx2_with_seed();
        let reclassified: Vec<ParaphraseRecord> = valid
            .iter()
            .cloned()
            .map(|mut r| {
                let (status, dup) = ctx2.classify(&r.id, &r.text, &seed());
                r.status = status;
                r.duplicate_of = dup;
                r
            })
            .collect();
        let (again, _, report) = filter_batch(reclassified);
        assert_eq!(again, valid);
        assert!(report.is_empty());
    }

    fn ctx2_with_seed() -> FilterContext {
        let mut ctx = FilterContext::new(MalformedRules::default());
        ctx.admit_seeds([&seed()]);
        ctx
    }

    #[test]
    fn valid_texts_are_pairwise_distinct() {
        let mut ctx = ctx();
        let texts = [
            "show me the quickest route home",
            "SHOW me the quickest route home",
            "what is the fastest path back",
        ];
        let mut normals = Vec::new();
        for (i, t) in texts.iter().enumerate() {
            let (status, _) = ctx.classify(&format!("r{i}"), t, &seed());
            if status == RecordStatus::Valid {
                normals.push(normalize(t));
            }
        }
        let unique: std::collections::BTreeSet<_> = normals.iter().collect();
        assert_eq!(unique.len(), normals.len());
    }
}
