//! Labeled datasets: loading, per-label seed sampling, and final assembly of
//! augmented datasets.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{ParaphraseRecord, RecordStatus};
use crate::strategy::StrategyKind;

/// One (text, label) sample, the unit of every dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledText {
    pub id: String,
    pub text: String,
    pub label: String,
}

impl LabeledText {
    pub fn new(
        id: impl Into<String>,
        text: impl Into<String>,
        label: impl Into<String>,
    ) -> Result<Self> {
        let sample = Self {
            id: id.into(),
            text: text.into(),
            label: label.into(),
        };
        if sample.text.trim().is_empty() {
            return Err(Error::InvalidArgument(format!(
                "sample {:?} has empty text",
                sample.id
            )));
        }
        if sample.label.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "sample {:?} has empty label",
                sample.id
            )));
        }
        Ok(sample)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    Jsonl,
    Csv,
}

impl FromStr for DatasetFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jsonl" => Ok(Self::Jsonl),
            "csv" => Ok(Self::Csv),
            other => Err(Error::Config(format!(
                "unknown dataset format {other:?} (expected jsonl or csv)"
            ))),
        }
    }
}

impl fmt::Display for DatasetFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Jsonl => write!(f, "jsonl"),
            Self::Csv => write!(f, "csv"),
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    text: String,
    label: String,
    #[serde(default)]
    id: Option<String>,
}

/// Loads a labeled dataset from JSONL (`{"text", "label", "id"?}` per line) or
/// two-column CSV with header `text,label`.
///
/// Records come back in file order. Missing ids are assigned as the 0-based
/// record index; errors name the offending 1-based row.
pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Vec<LabeledText>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let records = match format {
        DatasetFormat::Jsonl => load_jsonl(path)?,
        DatasetFormat::Csv => load_csv(path)?,
    };
    if records.is_empty() {
        return Err(Error::EmptyDataset(path.to_path_buf()));
    }
    Ok(records)
}

fn validate_row(raw: RawRecord, index: usize, row: usize) -> Result<LabeledText> {
    if raw.text.trim().is_empty() {
        return Err(Error::MalformedRecord {
            row,
            reason: "empty text field".into(),
        });
    }
    if raw.label.is_empty() {
        return Err(Error::MalformedRecord {
            row,
            reason: "empty label field".into(),
        });
    }
    let id = raw.id.unwrap_or_else(|| index.to_string());
    LabeledText::new(id, raw.text, raw.label)
}

fn load_jsonl(path: &Path) -> Result<Vec<LabeledText>> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (line_idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line_idx + 1;
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| Error::MalformedRecord {
            row,
            reason: e.to_string(),
        })?;
        records.push(validate_row(raw, records.len(), row)?);
    }
    Ok(records)
}

fn load_csv(path: &Path) -> Result<Vec<LabeledText>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut records = Vec::new();
    for (record_idx, row) in reader.deserialize::<RawRecord>().enumerate() {
        let row_number = record_idx + 2; // header occupies row 1
        let raw = row.map_err(|e| Error::MalformedRecord {
            row: row_number,
            reason: e.to_string(),
        })?;
        records.push(validate_row(raw, records.len(), row_number)?);
    }
    Ok(records)
}

/// A deterministic per-label sample of seed sentences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedSet {
    pub dataset_id: String,
    pub seeds_per_label: usize,
    pub rng_seed: u64,
    /// Label -> selected seeds, each group sorted by id.
    pub groups: BTreeMap<String, Vec<LabeledText>>,
}

impl SeedSet {
    /// All seeds in (label lexicographic, id) order.
    pub fn all(&self) -> impl Iterator<Item = &LabeledText> {
        self.groups.values().flatten()
    }

    pub fn len(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.groups.keys().map(String::as_str)
    }

    pub fn get(&self, seed_id: &str) -> Option<&LabeledText> {
        self.all().find(|s| s.id == seed_id)
    }

    /// seed id -> label, for lineage resolution.
    pub fn label_index(&self) -> BTreeMap<&str, &str> {
        self.all()
            .map(|s| (s.id.as_str(), s.label.as_str()))
            .collect()
    }
}

/// Uniformly samples `seeds_per_label` seeds per label, without replacement,
/// driven only by `rng_seed`.
///
/// A single RNG stream is consumed with labels in lexicographic order and each
/// label group pre-sorted by id, so the result is independent of dataset
/// record order.
pub fn sample_seeds(
    dataset: &[LabeledText],
    dataset_id: impl Into<String>,
    seeds_per_label: usize,
    rng_seed: u64,
) -> Result<SeedSet> {
    if seeds_per_label == 0 {
        return Err(Error::InvalidArgument(
            "seeds_per_label must be at least 1".into(),
        ));
    }
    let mut seen_ids = HashSet::new();
    for sample in dataset {
        if !seen_ids.insert(sample.id.as_str()) {
            return Err(Error::DuplicateId(sample.id.clone()));
        }
    }

    let mut by_label: BTreeMap<&str, Vec<&LabeledText>> = BTreeMap::new();
    for sample in dataset {
        by_label.entry(sample.label.as_str()).or_default().push(sample);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut groups = BTreeMap::new();
    for (label, mut group) in by_label {
        if group.len() < seeds_per_label {
            return Err(Error::InsufficientLabel {
                label: label.to_string(),
                have: group.len(),
                need: seeds_per_label,
            });
        }
        group.sort_by(|a, b| a.id.cmp(&b.id));
        let chosen = rand::seq::index::sample(&mut rng, group.len(), seeds_per_label);
        let mut selected: Vec<LabeledText> =
            chosen.iter().map(|i| group[i].clone()).collect();
        selected.sort_by(|a, b| a.id.cmp(&b.id));
        groups.insert(label.to_string(), selected);
    }

    Ok(SeedSet {
        dataset_id: dataset_id.into(),
        seeds_per_label,
        rng_seed,
        groups,
    })
}

/// Origin of a row in an assembled dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowOrigin {
    Seed,
    Round1,
    Round2,
}

/// One line of a serialized `dataset.jsonl`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetRow {
    pub id: String,
    pub text: String,
    pub label: String,
    pub origin: RowOrigin,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_id: Option<String>,
}

/// Seed sentences plus the paraphrases collected in both rounds for one
/// strategy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AugmentedDataset {
    pub strategy: StrategyKind,
    pub seeds: Vec<LabeledText>,
    pub round1: Vec<ParaphraseRecord>,
    pub round2: Vec<ParaphraseRecord>,
}

impl AugmentedDataset {
    pub fn size(&self) -> usize {
        self.seeds.len() + self.round1.len() + self.round2.len()
    }

    /// Every text in the dataset: seeds first, then round 1, then round 2.
    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.seeds
            .iter()
            .map(|s| s.text.as_str())
            .chain(self.round1.iter().map(|r| r.text.as_str()))
            .chain(self.round2.iter().map(|r| r.text.as_str()))
    }

    pub fn paraphrase_texts(&self) -> impl Iterator<Item = &str> {
        self.round1
            .iter()
            .chain(self.round2.iter())
            .map(|r| r.text.as_str())
    }

    /// Label of a record, resolved through its lineage.
    pub fn label_of(&self, record: &ParaphraseRecord) -> Option<&str> {
        if let Some(seed) = self.seeds.iter().find(|s| s.id == record.seed_id) {
            return Some(&seed.label);
        }
        let parent = self.round1.iter().find(|r| r.id == record.seed_id)?;
        self.seeds
            .iter()
            .find(|s| s.id == parent.seed_id)
            .map(|s| s.label.as_str())
    }

    /// Flat rows for serialization, in seed/round1/round2 order.
    pub fn rows(&self) -> Vec<DatasetRow> {
        let mut rows: Vec<DatasetRow> = self
            .seeds
            .iter()
            .map(|s| DatasetRow {
                id: s.id.clone(),
                text: s.text.clone(),
                label: s.label.clone(),
                origin: RowOrigin::Seed,
                seed_id: None,
            })
            .collect();
        for (records, origin) in [(&self.round1, RowOrigin::Round1), (&self.round2, RowOrigin::Round2)]
        {
            for record in records.iter() {
                rows.push(DatasetRow {
                    id: record.id.clone(),
                    text: record.text.clone(),
                    label: self.label_of(record).unwrap_or_default().to_string(),
                    origin,
                    seed_id: Some(record.seed_id.clone()),
                });
            }
        }
        rows
    }
}

/// Assembles the final dataset for one strategy: seeds plus the valid records
/// of both rounds.
///
/// Every record must carry `valid` status, and every round-2 record must
/// resolve to a seed either directly or (for chaining) through a round-1
/// record.
pub fn assemble_final_dataset(
    seeds: &SeedSet,
    round1: Vec<ParaphraseRecord>,
    round2: Vec<ParaphraseRecord>,
    strategy: StrategyKind,
) -> Result<AugmentedDataset> {
    for record in round1.iter().chain(round2.iter()) {
        if record.status != RecordStatus::Valid {
            return Err(Error::InvalidStatus {
                id: record.id.clone(),
                status: record.status.to_string(),
            });
        }
    }
    let seed_ids: BTreeSet<&str> = seeds.all().map(|s| s.id.as_str()).collect();
    let mut round1_to_seed: BTreeMap<&str, &str> = BTreeMap::new();
    for record in &round1 {
        if !seed_ids.contains(record.seed_id.as_str()) {
            return Err(Error::UnresolvedLineage(record.id.clone()));
        }
        round1_to_seed.insert(record.id.as_str(), record.seed_id.as_str());
    }
    for record in &round2 {
        let resolved = seed_ids.contains(record.seed_id.as_str())
            || round1_to_seed.contains_key(record.seed_id.as_str());
        if !resolved {
            return Err(Error::UnresolvedLineage(record.id.clone()));
        }
    }
    Ok(AugmentedDataset {
        strategy,
        seeds: seeds.all().cloned().collect(),
        round1,
        round2,
    })
}
