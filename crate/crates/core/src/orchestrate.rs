//! Experiment orchestration: iterations of seed sampling, two collection
//! rounds, filtering, assembly and analysis, persisted as a reproducible run
//! directory.
//!
//! Layout of a run directory:
//!
//! ```text
//! run/
//!   config.json                       resolved configuration
//!   run.json                          manifest (deterministic, hashed)
//!   events.log                        wall-clock log, never hashed
//!   iteration_<i>/round1.jsonl        shared round-1 records, all statuses
//!   iteration_<i>/<strategy>/cues.json
//!   iteration_<i>/<strategy>/round2.jsonl
//!   iteration_<i>/<strategy>/dataset.jsonl
//!   reports/diversity.json|txt        lexical diversity per strategy
//!   reports/stats.json                signed-rank tests against the baseline
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::compare::{compare_paired, ComparisonReport};
use crate::corpus::{
    assemble_final_dataset, load_dataset, sample_seeds, AugmentedDataset, DatasetFormat,
    DatasetRow, LabeledText, SeedSet,
};
use crate::diversity::{self, DiversityCounts, DiversityReport};
use crate::error::{Error, Result};
use crate::filter::{
    filter_batch, FilterContext, MalformedRules, ParaphraseRecord, RejectionReport,
    RULES_VERSION,
};
use crate::llm::{LlmClient, ProviderConfig};
use crate::outlier::{EmbeddingConfig, EmbeddingProvider, HttpEmbeddingProvider, TfIdfEmbedder};
use crate::strategy::{
    derive_cues, render_prompt, CueDeps, IncentiveCue, StrategyKind, TEMPLATE_VERSION,
};
use crate::taboo::{CorpusStats, NeFilter, SvmConfig};
use crate::util::{hash64, sha256_hex};

/// Which embedding provider backs outlier detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EmbeddingChoice {
    #[default]
    TfIdf,
    Http(EmbeddingConfig),
}

fn default_seeds_per_label() -> usize {
    6
}

fn default_n_per_prompt() -> usize {
    5
}

fn default_iterations() -> usize {
    5
}

fn default_cue_k() -> usize {
    3
}

fn default_svm_c() -> f64 {
    1.0
}

fn default_svm_epochs() -> usize {
    200
}

fn default_true() -> bool {
    true
}

fn default_alpha() -> f64 {
    0.05
}

/// Full configuration of one experiment run. JSON field names match the
/// struct fields; the CLI exposes a flag per overridable field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: PathBuf,
    #[serde(default = "default_format")]
    pub format: DatasetFormat,
    /// Optional label allowlist applied after loading.
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    #[serde(default = "default_seeds_per_label")]
    pub seeds_per_label: usize,
    #[serde(default = "default_n_per_prompt")]
    pub n_per_prompt: usize,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    /// Strategies to run in round two; the baseline is always included.
    pub strategies: Vec<StrategyKind>,
    #[serde(default)]
    pub provider: ProviderConfig,
    #[serde(default)]
    pub embedding: EmbeddingChoice,
    #[serde(default)]
    pub rng_seed: u64,
    pub out_dir: PathBuf,
    #[serde(default = "default_cue_k")]
    pub taboo_k: usize,
    #[serde(default = "default_cue_k")]
    pub hints_k: usize,
    #[serde(default = "default_svm_c")]
    pub svm_c: f64,
    #[serde(default = "default_svm_epochs")]
    pub svm_epochs: usize,
    /// Use presence indicators instead of raw counts for the taboo SVM.
    #[serde(default)]
    pub binary_features: bool,
    #[serde(default = "default_true")]
    pub include_seeds_in_diversity: bool,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Extra named-entity words, one per line, merged into the filter.
    #[serde(default)]
    pub ne_wordlist: Option<PathBuf>,
}

fn default_format() -> DatasetFormat {
    DatasetFormat::Jsonl
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::Config("iterations must be at least 1".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::Config("at least one strategy is required".into()));
        }
        if self.seeds_per_label == 0 {
            return Err(Error::Config("seeds_per_label must be at least 1".into()));
        }
        if self.n_per_prompt == 0 {
            return Err(Error::Config("n_per_prompt must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config("alpha must lie in [0, 1]".into()));
        }
        Ok(())
    }

    /// Strategies actually executed: the baseline first, then the configured
    /// ones in order, deduplicated.
    pub fn effective_strategies(&self) -> Vec<StrategyKind> {
        let mut out = vec![StrategyKind::Prompt];
        for strategy in &self.strategies {
            if !out.contains(strategy) {
                out.push(*strategy);
            }
        }
        out
    }

    /// Hash of the configuration with the output directory masked out, so two
    /// runs of the same experiment into different directories compare equal.
    pub fn content_hash(&self) -> String {
        let mut masked = self.clone();
        masked.out_dir = PathBuf::new();
        sha256_hex(
            serde_json::to_string(&masked)
                .expect("config serializes")
                .as_bytes(),
        )
    }

    fn svm_config(&self, sub_seed: u64) -> SvmConfig {
        SvmConfig {
            c: self.svm_c,
            epochs: self.svm_epochs,
            rng_seed: sub_seed,
        }
    }
}

/// Per-iteration slice of the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationManifest {
    pub index: usize,
    pub sub_seed: u64,
    pub seed_ids: BTreeMap<String, Vec<String>>,
    pub round1_record_ids: Vec<String>,
    pub round2_record_ids: BTreeMap<String, Vec<String>>,
    pub rejections: RejectionReport,
    pub complete: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub failures: BTreeMap<String, String>,
}

/// The persisted, deterministic record of a run. Wall-clock timestamps live
/// in `events.log`, outside the manifest, so that replaying a run with the
/// mock provider reproduces this file byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub provider_id: String,
    pub rules_version: String,
    pub template_version: String,
    pub iterations: Vec<IterationManifest>,
    /// SHA-256 over this manifest serialized with the field blanked.
    pub content_hash: String,
}

impl RunManifest {
    fn seal(mut self) -> Self {
        self.content_hash = String::new();
        let serialized = serde_json::to_string(&self).expect("manifest serializes");
        self.content_hash = sha256_hex(serialized.as_bytes());
        self
    }
}

/// Everything one iteration produced.
pub struct IterationResult {
    pub seeds: SeedSet,
    pub datasets: BTreeMap<StrategyKind, AugmentedDataset>,
    pub cues: BTreeMap<StrategyKind, IncentiveCue>,
    /// Shared round-1 records, every status.
    pub round1_records: Vec<ParaphraseRecord>,
    /// Per-strategy round-2 records, every status.
    pub round2_records: BTreeMap<StrategyKind, Vec<ParaphraseRecord>>,
    pub manifest: IterationManifest,
}

impl IterationResult {
    pub fn complete(&self) -> bool {
        self.manifest.complete
    }
}

fn derive_sub_seed(rng_seed: u64, iteration: usize) -> u64 {
    hash64(&[
        &rng_seed.to_le_bytes(),
        b"iteration",
        &(iteration as u64).to_le_bytes(),
    ])
}

fn derive_call_seed(rng_seed: u64, iteration: usize, round: u8, strategy: StrategyKind, seed_id: &str) -> u64 {
    hash64(&[
        &rng_seed.to_le_bytes(),
        b"call",
        &(iteration as u64).to_le_bytes(),
        &[round],
        strategy.name().as_bytes(),
        seed_id.as_bytes(),
    ])
}

fn build_embedder(choice: &EmbeddingChoice) -> Result<Box<dyn EmbeddingProvider>> {
    match choice {
        EmbeddingChoice::TfIdf => Ok(Box::new(TfIdfEmbedder)),
        EmbeddingChoice::Http(config) => {
            Ok(Box::new(HttpEmbeddingProvider::new(config.clone())?))
        }
    }
}

fn build_ne_filter(config: &RunConfig, round1: &[ParaphraseRecord]) -> Result<NeFilter> {
    let stats = CorpusStats::from_texts(round1.iter().map(|r| r.text.as_str()));
    let mut filter = NeFilter::new(stats);
    if let Some(path) = &config.ne_wordlist {
        filter = filter.with_wordlist(path)?;
    }
    Ok(filter)
}

/// Runs one iteration: round 1 with the baseline prompt for every seed, cue
/// derivation from the shared round-1 valid records, then round 2
/// independently per strategy.
///
/// A provider hard failure in round 1 aborts the iteration; in round 2 it
/// fails only that strategy, siblings continue, and the iteration is marked
/// incomplete either way.
pub fn run_iteration(
    config: &RunConfig,
    dataset: &[LabeledText],
    iteration: usize,
    client: &LlmClient,
) -> Result<IterationResult> {
    let sub_seed = derive_sub_seed(config.rng_seed, iteration);
    let dataset_id = config
        .dataset
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".to_string());
    let seeds = sample_seeds(dataset, dataset_id, config.seeds_per_label, sub_seed)?;
    let n = config.n_per_prompt;
    let provider_id = client.provider_id().to_string();

    let mut manifest = IterationManifest {
        index: iteration,
        sub_seed,
        seed_ids: seeds
            .groups
            .iter()
            .map(|(label, group)| (label.clone(), group.iter().map(|s| s.id.clone()).collect()))
            .collect(),
        round1_record_ids: Vec::new(),
        round2_record_ids: BTreeMap::new(),
        rejections: RejectionReport::default(),
        complete: true,
        failures: BTreeMap::new(),
    };

    let seed_list: Vec<LabeledText> = seeds.all().cloned().collect();

    // Round 1: baseline prompt for every seed, shared by all strategies.
    let mut round1_records = Vec::new();
    let mut round1_ctx = FilterContext::new(MalformedRules::default());
    round1_ctx.admit_seeds(&seed_list);
    for seed in &seed_list {
        let spec = render_prompt(StrategyKind::Prompt, seed, &IncentiveCue::None, n)?;
        let call_seed = derive_call_seed(config.rng_seed, iteration, 1, StrategyKind::Prompt, &seed.id);
        let exchange = match client.complete_seeded(&spec, Some(call_seed)) {
            Ok(exchange) => exchange,
            Err(e) => {
                manifest.complete = false;
                manifest.failures.insert("round1".into(), e.to_string());
                manifest.round1_record_ids =
                    round1_records.iter().map(|r: &ParaphraseRecord| r.id.clone()).collect();
                return Ok(IterationResult {
                    seeds,
                    datasets: BTreeMap::new(),
                    cues: BTreeMap::new(),
                    round1_records,
                    round2_records: BTreeMap::new(),
                    manifest,
                });
            }
        };
        let parsed = crate::llm::parse_paraphrases(&exchange.raw_response, n);
        for (k, text) in parsed.texts.iter().enumerate() {
            let id = format!("it{iteration}-r1-{}-p{k}", seed.id);
            let (status, duplicate_of) = round1_ctx.classify(&id, text, seed);
            round1_records.push(ParaphraseRecord {
                id,
                seed_id: seed.id.clone(),
                round: 1,
                strategy: StrategyKind::Prompt,
                provider: provider_id.clone(),
                text: text.clone(),
                status,
                duplicate_of,
            });
        }
    }
    manifest.round1_record_ids = round1_records.iter().map(|r| r.id.clone()).collect();
    let (round1_valid, _, round1_rejections) = filter_batch(round1_records.clone());
    manifest.rejections.merge(&round1_rejections);

    // Cues are derived once, from the shared round-1 valid records.
    let embedder = build_embedder(&config.embedding)?;
    let ne_filter = build_ne_filter(config, &round1_valid)?;
    let deps = CueDeps {
        svm: config.svm_config(sub_seed),
        taboo_k: config.taboo_k,
        hints_k: config.hints_k,
        ne_filter: &ne_filter,
        embedder: embedder.as_ref(),
    };

    let mut datasets = BTreeMap::new();
    let mut cues = BTreeMap::new();
    let mut round2_records = BTreeMap::new();

    for strategy in config.effective_strategies() {
        let cue = match derive_cues(strategy, &round1_valid, &seeds, sub_seed, &deps) {
            Ok(cue) => cue,
            Err(e) => {
                manifest.complete = false;
                manifest
                    .failures
                    .insert(strategy.name().to_string(), e.to_string());
                continue;
            }
        };

        let mut ctx = FilterContext::new(MalformedRules::default());
        ctx.admit_seeds(&seed_list);
        for record in &round1_valid {
            ctx.admit(&record.id, &record.text);
        }

        let mut records = Vec::new();
        let mut failed = false;
        for seed in &seed_list {
            let spec = render_prompt(strategy, seed, &cue, n)?;
            let call_seed = derive_call_seed(config.rng_seed, iteration, 2, strategy, &seed.id);
            let exchange = match client.complete_seeded(&spec, Some(call_seed)) {
                Ok(exchange) => exchange,
                Err(e) => {
                    manifest.complete = false;
                    manifest
                        .failures
                        .insert(strategy.name().to_string(), e.to_string());
                    failed = true;
                    break;
                }
            };
            let parsed = crate::llm::parse_paraphrases(&exchange.raw_response, n);
            // For chaining the lineage parent is the replacement record.
            let lineage_seed = LabeledText {
                id: spec.seed_id.clone(),
                text: seed.text.clone(),
                label: seed.label.clone(),
            };
            for (k, text) in parsed.texts.iter().enumerate() {
                let id = format!("it{iteration}-r2-{}-{}-p{k}", strategy.name(), seed.id);
                let (status, duplicate_of) = ctx.classify(&id, text, &lineage_seed);
                records.push(ParaphraseRecord {
                    id,
                    seed_id: spec.seed_id.clone(),
                    round: 2,
                    strategy,
                    provider: provider_id.clone(),
                    text: text.clone(),
                    status,
                    duplicate_of,
                });
            }
        }
        if failed {
            round2_records.insert(strategy, records);
            continue;
        }

        manifest
            .round2_record_ids
            .insert(strategy.name().to_string(), records.iter().map(|r| r.id.clone()).collect());
        let (valid, _, rejections) = filter_batch(records.clone());
        manifest.rejections.merge(&rejections);
        let dataset =
            assemble_final_dataset(&seeds, round1_valid.clone(), valid, strategy)?;
        datasets.insert(strategy, dataset);
        cues.insert(strategy, cue);
        round2_records.insert(strategy, records);
    }

    Ok(IterationResult {
        seeds,
        datasets,
        cues,
        round1_records,
        round2_records,
        manifest,
    })
}

/// Reports produced at the end of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReports {
    pub diversity: DiversityReport,
    /// Signed-rank comparisons against the baseline, one per metric.
    pub stats: Vec<ComparisonReport>,
}

/// The outcome handed back to the CLI.
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
    pub reports: Option<RunReports>,
    pub complete: bool,
}

fn write_json_pretty<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut body = serde_json::to_string_pretty(value)?;
    body.push('\n');
    fs::write(path, body)?;
    Ok(())
}

fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> Result<()> {
    let mut out = String::new();
    for item in items {
        out.push_str(&serde_json::to_string(&item)?);
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

struct EventLog {
    file: fs::File,
}

impl EventLog {
    fn create(path: &Path) -> Result<Self> {
        Ok(Self {
            file: fs::File::create(path)?,
        })
    }

    fn log(&mut self, message: &str) {
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or_default();
        let _ = writeln!(self.file, "{stamp:.3} {message}");
    }
}

/// Executes the full experiment: sequential iterations, per-strategy
/// datasets, diversity and significance reports, and a sealed manifest.
pub fn run_experiment(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let mut dataset = load_dataset(&config.dataset, config.format)?;
    if let Some(allowed) = &config.labels {
        dataset.retain(|sample| allowed.contains(&sample.label));
        if dataset.is_empty() {
            return Err(Error::Config(
                "label filter removed every sample".into(),
            ));
        }
    }

    fs::create_dir_all(&config.out_dir)?;
    write_json_pretty(&config.out_dir.join("config.json"), config)?;
    let mut events = EventLog::create(&config.out_dir.join("events.log"))?;
    events.log("run started");

    let client = LlmClient::new(config.provider.clone())?;
    let mut iteration_manifests = Vec::new();
    let mut counts: BTreeMap<StrategyKind, Vec<DiversityCounts>> = BTreeMap::new();
    let mut all_complete = true;

    for iteration in 0..config.iterations {
        events.log(&format!("iteration {iteration} started"));
        let result = run_iteration(config, &dataset, iteration, &client)?;
        persist_iteration(&config.out_dir, &result)?;
        if result.complete() {
            for (strategy, dataset) in &result.datasets {
                counts.entry(*strategy).or_default().push(diversity::counts_of(
                    dataset,
                    config.include_seeds_in_diversity,
                )?);
            }
        } else {
            all_complete = false;
            events.log(&format!(
                "iteration {iteration} incomplete: {:?}",
                result.manifest.failures
            ));
        }
        events.log(&format!("iteration {iteration} finished"));
        iteration_manifests.push(result.manifest);
    }

    let reports = build_reports(config, &counts)?;
    if let Some(reports) = &reports {
        let reports_dir = config.out_dir.join("reports");
        fs::create_dir_all(&reports_dir)?;
        write_json_pretty(&reports_dir.join("diversity.json"), &reports.diversity)?;
        let mut table = reports.diversity.to_text_table();
        table.push('\n');
        fs::write(reports_dir.join("diversity.txt"), table)?;
        write_json_pretty(&reports_dir.join("stats.json"), &reports.stats)?;
    }

    let manifest = RunManifest {
        config_hash: config.content_hash(),
        provider_id: config.provider.id.clone(),
        rules_version: RULES_VERSION.to_string(),
        template_version: TEMPLATE_VERSION.to_string(),
        iterations: iteration_manifests,
        content_hash: String::new(),
    }
    .seal();
    write_json_pretty(&config.out_dir.join("run.json"), &manifest)?;
    events.log("run finished");

    Ok(RunOutcome {
        out_dir: config.out_dir.clone(),
        manifest,
        reports,
        complete: all_complete,
    })
}

fn persist_iteration(out_dir: &Path, result: &IterationResult) -> Result<()> {
    let dir = out_dir.join(format!("iteration_{}", result.manifest.index));
    fs::create_dir_all(&dir)?;
    write_jsonl(&dir.join("round1.jsonl"), result.round1_records.iter())?;
    for (strategy, records) in &result.round2_records {
        let strategy_dir = dir.join(strategy.name());
        fs::create_dir_all(&strategy_dir)?;
        write_jsonl(&strategy_dir.join("round2.jsonl"), records.iter())?;
        if let Some(cue) = result.cues.get(strategy) {
            write_json_pretty(&strategy_dir.join("cues.json"), cue)?;
        }
        if let Some(dataset) = result.datasets.get(strategy) {
            write_jsonl(&strategy_dir.join("dataset.jsonl"), dataset.rows())?;
        }
    }
    Ok(())
}

fn build_reports(
    config: &RunConfig,
    counts: &BTreeMap<StrategyKind, Vec<DiversityCounts>>,
) -> Result<Option<RunReports>> {
    if counts.get(&StrategyKind::Prompt).map_or(0, Vec::len) == 0 {
        return Ok(None);
    }
    let diversity = diversity::aggregate(counts, StrategyKind::Prompt)?;
    let mut stats = Vec::new();
    for (metric, pick) in [
        ("unique_words", true),
        ("unique_3grams", false),
    ] {
        let groups: BTreeMap<String, Vec<f64>> = counts
            .iter()
            .map(|(strategy, list)| {
                let values = list
                    .iter()
                    .map(|c| {
                        if pick {
                            c.unique_words as f64
                        } else {
                            c.unique_3grams as f64
                        }
                    })
                    .collect();
                (strategy.name().to_string(), values)
            })
            .collect();
        stats.push(compare_paired(
            metric,
            &groups,
            StrategyKind::Prompt.name(),
            config.alpha,
        )?);
    }
    Ok(Some(RunReports { diversity, stats }))
}

/// Reads the manifest back from a run directory.
pub fn read_manifest(run_dir: &Path) -> Result<RunManifest> {
    let path = run_dir.join("run.json");
    if !path.exists() {
        return Err(Error::MissingArtifact(path));
    }
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Reads the resolved configuration back from a run directory.
pub fn read_config(run_dir: &Path) -> Result<RunConfig> {
    let path = run_dir.join("config.json");
    if !path.exists() {
        return Err(Error::MissingArtifact(path));
    }
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Reads one strategy's cues for an iteration.
pub fn read_cues(run_dir: &Path, iteration: usize, strategy: StrategyKind) -> Result<IncentiveCue> {
    let path = run_dir
        .join(format!("iteration_{iteration}"))
        .join(strategy.name())
        .join("cues.json");
    if !path.exists() {
        return Err(Error::MissingArtifact(path));
    }
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Reads one strategy's assembled dataset rows for an iteration.
pub fn read_dataset_rows(
    run_dir: &Path,
    iteration: usize,
    strategy: StrategyKind,
) -> Result<Vec<DatasetRow>> {
    let path = run_dir
        .join(format!("iteration_{iteration}"))
        .join(strategy.name())
        .join("dataset.jsonl");
    if !path.exists() {
        return Err(Error::MissingArtifact(path));
    }
    let mut rows = Vec::new();
    for line in fs::read_to_string(path)?.lines() {
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(line)?);
    }
    Ok(rows)
}

/// Strategies present in a run directory's first iteration.
pub fn run_strategies(run_dir: &Path) -> Result<Vec<StrategyKind>> {
    let manifest = read_manifest(run_dir)?;
    let first = manifest
        .iterations
        .first()
        .ok_or_else(|| Error::MissingArtifact(run_dir.join("iteration_0")))?;
    let mut strategies: Vec<StrategyKind> = first
        .round2_record_ids
        .keys()
        .filter_map(|name| name.parse().ok())
        .collect();
    strategies.sort();
    Ok(strategies)
}

/// SHA-256 over the deterministic artifacts of a run: the manifest and every
/// per-iteration JSONL file, in sorted path order.
pub fn hash_run_artifacts(run_dir: &Path) -> Result<String> {
    let mut paths = vec![run_dir.join("run.json")];
    let mut stack = vec![run_dir.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir)? {
            let path = entry?.path();
            if path.is_dir() {
                stack.push(path);
            } else if path
                .file_name()
                .and_then(|n| n.to_str())
                .is_some_and(|n| n.ends_with(".jsonl") || n == "cues.json")
            {
                paths.push(path);
            }
        }
    }
    paths.sort();
    let mut combined = Vec::new();
    for path in paths {
        let relative = path.strip_prefix(run_dir).unwrap_or(&path);
        combined.extend_from_slice(relative.to_string_lossy().as_bytes());
        combined.push(0);
        combined.extend_from_slice(&fs::read(&path)?);
        combined.push(0);
    }
    Ok(sha256_hex(&combined))
}
