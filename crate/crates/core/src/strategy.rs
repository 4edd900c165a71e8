//! Incentive strategies: cue derivation from round-1 data and byte-exact
//! prompt rendering.
//!
//! All strategies share one base instruction. Taboo appends a banned-word
//! clause, hints appends a delimited example block, chaining swaps the seed
//! sentence for an outlier paraphrase, and the combined strategy stacks the
//! taboo clause with the hints block. Ablated variants render through the
//! exact same templates; only the cue derivation changes (uniform-random
//! picks instead of SVM weights or embedding outliers).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{LabeledText, SeedSet};
use crate::error::{Error, Result};
use crate::filter::ParaphraseRecord;
use crate::outlier::{self, EmbeddingProvider};
use crate::taboo::{
    self, FeatureIndex, NeFilter, SvmConfig, TabooCueSet, TabooWords,
};
use crate::tokenize::tokenize;
use crate::util::hash64;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Version tag of the template set, recorded in run manifests.
pub const TEMPLATE_VERSION: &str = "appendix-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Prompt,
    Taboo,
    Chaining,
    Hints,
    Combined,
    AblatedTaboo,
    AblatedChaining,
    AblatedHints,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 8] = [
        StrategyKind::Prompt,
        StrategyKind::Taboo,
        StrategyKind::Chaining,
        StrategyKind::Hints,
        StrategyKind::Combined,
        StrategyKind::AblatedTaboo,
        StrategyKind::AblatedChaining,
        StrategyKind::AblatedHints,
    ];

    /// Stable serialized name.
    pub fn name(&self) -> &'static str {
        match self {
            Self::Prompt => "prompt",
            Self::Taboo => "taboo",
            Self::Chaining => "chaining",
            Self::Hints => "hints",
            Self::Combined => "combined",
            Self::AblatedTaboo => "ablated_taboo",
            Self::AblatedChaining => "ablated_chaining",
            Self::AblatedHints => "ablated_hints",
        }
    }

    pub fn is_ablated(&self) -> bool {
        matches!(
            self,
            Self::AblatedTaboo | Self::AblatedChaining | Self::AblatedHints
        )
    }

    /// The non-ablated method an ablated variant mirrors.
    pub fn counterpart(&self) -> StrategyKind {
        match self {
            Self::AblatedTaboo => Self::Taboo,
            Self::AblatedChaining => Self::Chaining,
            Self::AblatedHints => Self::Hints,
            other => *other,
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .iter()
            .find(|k| k.name() == s)
            .copied()
            .ok_or_else(|| Error::Config(format!("unknown strategy {s:?}")))
    }
}

/// A replacement seed for one chaining slot.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainSeed {
    /// Round-1 record used as the new seed sentence.
    pub record_id: String,
    pub text: String,
}

/// Chaining cue: original seed slot -> replacement, consumed farthest-first
/// without reuse within a label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainingCue {
    pub replacements: BTreeMap<String, ChainSeed>,
    pub shortfall: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintItem {
    pub record_id: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintList {
    pub items: Vec<HintItem>,
    pub shortfall: bool,
}

/// Hints cue: seed id -> example paraphrases originating from that seed,
/// ordered by descending outlier distance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HintsCue {
    pub by_seed: BTreeMap<String, HintList>,
}

/// Strategy inputs computed from round-1 data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum IncentiveCue {
    None,
    Taboo { taboo: TabooCueSet },
    Chaining { chaining: ChainingCue },
    Hints { hints: HintsCue },
    Combined { taboo: TabooCueSet, hints: HintsCue },
}

/// A fully rendered prompt plus the expected paraphrase count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub strategy: StrategyKind,
    /// The lineage anchor for records parsed from the response; for chaining
    /// this is the round-1 record serving as the new seed.
    pub seed_id: String,
    pub rendered_text: String,
    pub n_requested: usize,
}

/// Everything cue derivation needs from the surrounding modules.
pub struct CueDeps<'a> {
    pub svm: SvmConfig,
    pub taboo_k: usize,
    pub hints_k: usize,
    pub ne_filter: &'a NeFilter,
    pub embedder: &'a dyn EmbeddingProvider,
}

fn group_by_label<'a>(
    round1: &'a [ParaphraseRecord],
    seeds: &SeedSet,
) -> Result<BTreeMap<String, Vec<&'a ParaphraseRecord>>> {
    let labels = seeds.label_index();
    let mut groups: BTreeMap<String, Vec<&ParaphraseRecord>> = BTreeMap::new();
    for record in round1 {
        let label = labels
            .get(record.seed_id.as_str())
            .ok_or_else(|| Error::UnresolvedLineage(record.id.clone()))?;
        groups.entry(label.to_string()).or_default().push(record);
    }
    for label in seeds.labels() {
        if !groups.contains_key(label) {
            return Err(Error::EmptyGroup(label.to_string()));
        }
    }
    Ok(groups)
}

fn group_by_seed<'a>(
    round1: &'a [ParaphraseRecord],
    seeds: &SeedSet,
) -> Result<BTreeMap<String, Vec<&'a ParaphraseRecord>>> {
    let mut groups: BTreeMap<String, Vec<&ParaphraseRecord>> = BTreeMap::new();
    for record in round1 {
        groups
            .entry(record.seed_id.clone())
            .or_default()
            .push(record);
    }
    for seed in seeds.all() {
        if !groups.contains_key(&seed.id) {
            return Err(Error::EmptyGroup(seed.id.clone()));
        }
    }
    Ok(groups)
}

/// Computes the incentive cue for a strategy from valid round-1 records.
///
/// Deterministic in `(round1, seeds, rng_seed)`: the ablated variants draw
/// from sub-seeds derived per group, so map iteration order never matters.
pub fn derive_cues(
    strategy: StrategyKind,
    round1: &[ParaphraseRecord],
    seeds: &SeedSet,
    rng_seed: u64,
    deps: &CueDeps<'_>,
) -> Result<IncentiveCue> {
    match strategy {
        StrategyKind::Prompt => Ok(IncentiveCue::None),
        StrategyKind::Taboo => Ok(IncentiveCue::Taboo {
            taboo: taboo_cue(round1, seeds, deps)?,
        }),
        StrategyKind::Chaining => Ok(IncentiveCue::Chaining {
            chaining: chaining_cue(round1, seeds, deps)?,
        }),
        StrategyKind::Hints => Ok(IncentiveCue::Hints {
            hints: hints_cue(round1, seeds, deps)?,
        }),
        StrategyKind::Combined => Ok(IncentiveCue::Combined {
            taboo: taboo_cue(round1, seeds, deps)?,
            hints: hints_cue(round1, seeds, deps)?,
        }),
        StrategyKind::AblatedTaboo => Ok(IncentiveCue::Taboo {
            taboo: ablated_taboo_cue(round1, seeds, rng_seed, deps.taboo_k)?,
        }),
        StrategyKind::AblatedChaining => Ok(IncentiveCue::Chaining {
            chaining: ablated_chaining_cue(round1, seeds, rng_seed)?,
        }),
        StrategyKind::AblatedHints => Ok(IncentiveCue::Hints {
            hints: ablated_hints_cue(round1, seeds, rng_seed, deps.hints_k)?,
        }),
    }
}

fn taboo_cue(
    round1: &[ParaphraseRecord],
    seeds: &SeedSet,
    deps: &CueDeps<'_>,
) -> Result<TabooCueSet> {
    let groups = group_by_label(round1, seeds)?;
    let streams: Vec<_> = round1.iter().map(|r| tokenize(&r.text)).collect();
    let labels_of_docs: Vec<String> = {
        let index = seeds.label_index();
        round1
            .iter()
            .map(|r| index[r.seed_id.as_str()].to_string())
            .collect()
    };
    let feature_index = FeatureIndex::build(&streams);
    let matrix = taboo::featurize(&streams, &feature_index, false);
    let weights = taboo::train_one_vs_rest(&matrix, &labels_of_docs, &deps.svm)?;

    let mut by_label = BTreeMap::new();
    for label in groups.keys() {
        let words = taboo::top_taboo_words(&weights, &feature_index, label, deps.taboo_k, &|w| {
            deps.ne_filter.is_named_entity(w)
        })?;
        by_label.insert(label.clone(), words);
    }
    Ok(TabooCueSet { by_label })
}

fn chaining_cue(
    round1: &[ParaphraseRecord],
    seeds: &SeedSet,
    deps: &CueDeps<'_>,
) -> Result<ChainingCue> {
    let groups = group_by_label(round1, seeds)?;
    let mut replacements = BTreeMap::new();
    let mut shortfall = false;
    for (label, records) in &groups {
        let items: Vec<(String, String)> = records
            .iter()
            .map(|r| (r.id.clone(), r.text.clone()))
            .collect();
        let vectors = outlier::embed_records(&items, deps.embedder)?;
        let center = outlier::centroid(&vectors)?;
        let slots: Vec<&LabeledText> = seeds.groups[label].iter().collect();
        let selection = outlier::select_outliers(&vectors, &center, slots.len())?;
        shortfall |= selection.shortfall;
        let texts: BTreeMap<&str, &str> = records
            .iter()
            .map(|r| (r.id.as_str(), r.text.as_str()))
            .collect();
        // Farthest-first assignment to this label's slots, no reuse.
        for (slot, record_id) in slots.iter().zip(selection.ids.iter()) {
            replacements.insert(
                slot.id.clone(),
                ChainSeed {
                    record_id: record_id.clone(),
                    text: texts[record_id.as_str()].to_string(),
                },
            );
        }
    }
    Ok(ChainingCue {
        replacements,
        shortfall,
    })
}

fn hints_cue(
    round1: &[ParaphraseRecord],
    seeds: &SeedSet,
    deps: &CueDeps<'_>,
) -> Result<HintsCue> {
    let groups = group_by_seed(round1, seeds)?;
    let mut by_seed = BTreeMap::new();
    for (seed_id, records) in &groups {
        let items: Vec<(String, String)> = records
            .iter()
            .map(|r| (r.id.clone(), r.text.clone()))
            .collect();
        let vectors = outlier::embed_records(&items, deps.embedder)?;
        let center = outlier::centroid(&vectors)?;
        let selection = outlier::select_outliers(&vectors, &center, deps.hints_k)?;
        let texts: BTreeMap<&str, &str> = records
            .iter()
            .map(|r| (r.id.as_str(), r.text.as_str()))
            .collect();
        let items = selection
            .ids
            .iter()
            .map(|id| HintItem {
                record_id: id.clone(),
                text: texts[id.as_str()].to_string(),
            })
            .collect();
        by_seed.insert(
            seed_id.clone(),
            HintList {
                items,
                shortfall: selection.shortfall,
            },
        );
    }
    Ok(HintsCue { by_seed })
}

fn group_rng(rng_seed: u64, tag: &str, key: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(hash64(&[&rng_seed.to_le_bytes(), tag.as_bytes(), key.as_bytes()]))
}

fn ablated_taboo_cue(
    round1: &[ParaphraseRecord],
    seeds: &SeedSet,
    rng_seed: u64,
    k: usize,
) -> Result<TabooCueSet> {
    let groups = group_by_label(round1, seeds)?;
    let mut by_label = BTreeMap::new();
    for (label, records) in &groups {
        let mut vocab: Vec<String> = records
            .iter()
            .flat_map(|r| tokenize(&r.text).into_tokens())
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut rng = group_rng(rng_seed, "ablated_taboo", label);
        vocab.shuffle(&mut rng);
        let words: Vec<String> = vocab.into_iter().take(k).collect();
        let shortfall = words.len() < k;
        by_label.insert(label.clone(), TabooWords { words, shortfall });
    }
    Ok(TabooCueSet { by_label })
}

fn ablated_chaining_cue(
    round1: &[ParaphraseRecord],
    seeds: &SeedSet,
    rng_seed: u64,
) -> Result<ChainingCue> {
    let groups = group_by_label(round1, seeds)?;
    let mut replacements = BTreeMap::new();
    let mut shortfall = false;
    for (label, records) in &groups {
        let mut pool: Vec<&ParaphraseRecord> = records.clone();
        pool.sort_by(|a, b| a.id.cmp(&b.id));
        let mut rng = group_rng(rng_seed, "ablated_chaining", label);
        pool.shuffle(&mut rng);
        let slots = &seeds.groups[label];
        shortfall |= pool.len() < slots.len();
        for (slot, record) in slots.iter().zip(pool.iter()) {
            replacements.insert(
                slot.id.clone(),
                ChainSeed {
                    record_id: record.id.clone(),
                    text: record.text.clone(),
                },
            );
        }
    }
    Ok(ChainingCue {
        replacements,
        shortfall,
    })
}

fn ablated_hints_cue(
    round1: &[ParaphraseRecord],
    seeds: &SeedSet,
    rng_seed: u64,
    k: usize,
) -> Result<HintsCue> {
    let groups = group_by_seed(round1, seeds)?;
    let mut by_seed = BTreeMap::new();
    for (seed_id, records) in &groups {
        let mut pool: Vec<&ParaphraseRecord> = records.clone();
        pool.sort_by(|a, b| a.id.cmp(&b.id));
        let mut rng = group_rng(rng_seed, "ablated_hints", seed_id);
        pool.shuffle(&mut rng);
        let items: Vec<HintItem> = pool
            .iter()
            .take(k)
            .map(|r| HintItem {
                record_id: r.id.clone(),
                text: r.text.clone(),
            })
            .collect();
        let shortfall = items.len() < k;
        by_seed.insert(seed_id.clone(), HintList { items, shortfall });
    }
    Ok(HintsCue { by_seed })
}

fn base_clause(n: usize, phrase: &str) -> String {
    format!("Rephrase an original question or statement {n} times. Original phrase: \"{phrase}\".")
}

fn taboo_clause(words: &[String]) -> String {
    let quoted: Vec<String> = words.iter().map(|w| format!("\"{w}\"")).collect();
    let joined = match quoted.len() {
        0 => String::new(),
        1 => quoted[0].clone(),
        _ => format!(
            "{} or {}",
            quoted[..quoted.len() - 1].join(", "),
            quoted[quoted.len() - 1]
        ),
    };
    format!("Don't use the words {joined} in your responses.")
}

fn hints_block(hints: &[HintItem]) -> String {
    let mut block = String::from("###\nExample paraphrases:\n");
    for hint in hints {
        block.push_str(&format!("\"{}\".\n", hint.text));
    }
    block.push_str("###");
    block
}

/// Renders the prompt for one seed under a strategy.
///
/// The cue variant must match the strategy; ablated variants render through
/// their counterparts' templates.
pub fn render_prompt(
    strategy: StrategyKind,
    seed: &LabeledText,
    cue: &IncentiveCue,
    n: usize,
) -> Result<PromptSpec> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "paraphrase count must be at least 1".into(),
        ));
    }
    let mismatch = |detail: &str| Error::CueMismatch {
        strategy: strategy.name().to_string(),
        detail: detail.to_string(),
    };

    let (rendered_text, seed_id) = match (strategy, cue) {
        (StrategyKind::Prompt, IncentiveCue::None) => {
            (base_clause(n, &seed.text), seed.id.clone())
        }
        (StrategyKind::Taboo | StrategyKind::AblatedTaboo, IncentiveCue::Taboo { taboo }) => {
            let words = taboo
                .by_label
                .get(&seed.label)
                .ok_or_else(|| mismatch(&format!("no taboo words for label {:?}", seed.label)))?;
            (
                format!(
                    "{}\n\n{}",
                    base_clause(n, &seed.text),
                    taboo_clause(&words.words)
                ),
                seed.id.clone(),
            )
        }
        (
            StrategyKind::Chaining | StrategyKind::AblatedChaining,
            IncentiveCue::Chaining { chaining },
        ) => {
            let replacement = chaining
                .replacements
                .get(&seed.id)
                .ok_or_else(|| mismatch(&format!("no chaining seed for slot {:?}", seed.id)))?;
            (
                base_clause(n, &replacement.text),
                replacement.record_id.clone(),
            )
        }
        (StrategyKind::Hints | StrategyKind::AblatedHints, IncentiveCue::Hints { hints }) => {
            let list = hints
                .by_seed
                .get(&seed.id)
                .ok_or_else(|| mismatch(&format!("no hints for seed {:?}", seed.id)))?;
            (
                format!(
                    "{}\n\n{}",
                    base_clause(n, &seed.text),
                    hints_block(&list.items)
                ),
                seed.id.clone(),
            )
        }
        (StrategyKind::Combined, IncentiveCue::Combined { taboo, hints }) => {
            let words = taboo
                .by_label
                .get(&seed.label)
                .ok_or_else(|| mismatch(&format!("no taboo words for label {:?}", seed.label)))?;
            let list = hints
                .by_seed
                .get(&seed.id)
                .ok_or_else(|| mismatch(&format!("no hints for seed {:?}", seed.id)))?;
            (
                format!(
                    "{}\n\n{}\n\n{}",
                    base_clause(n, &seed.text),
                    taboo_clause(&words.words),
                    hints_block(&list.items)
                ),
                seed.id.clone(),
            )
        }
        _ => return Err(mismatch("cue variant does not fit this strategy")),
    };

    Ok(PromptSpec {
        strategy,
        seed_id,
        rendered_text,
        n_requested: n,
    })
}
