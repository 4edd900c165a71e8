//! `paradiv`: collect LLM paraphrases under diversity-incentive prompting
//! strategies, inspect the derived cues, and compare strategies with
//! nonparametric tests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use paradiv::compare::{compare_accuracies, compare_paired, load_accuracy_csv, ComparisonReport};
use paradiv::corpus::RowOrigin;
use paradiv::diversity::{self, DiversityCounts};
use paradiv::orchestrate::{
    hash_run_artifacts, read_config, read_cues, read_dataset_rows, read_manifest, run_experiment,
    run_strategies, RunConfig,
};
use paradiv::strategy::{IncentiveCue, StrategyKind};

#[derive(Parser)]
#[command(name = "paradiv", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full collection experiment from a config file.
    ///
    /// Exit code 0 on success, 2 when some iterations were incomplete,
    /// 1 on hard errors.
    Collect {
        /// JSON config file mirroring the run configuration fields.
        #[arg(long)]
        config: PathBuf,
        /// Provider id override ("mock" selects the offline mock).
        #[arg(long)]
        provider: Option<String>,
        #[arg(long)]
        rng_seed: Option<u64>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Comma-separated strategy list override.
        #[arg(long, value_delimiter = ',')]
        strategies: Option<Vec<String>>,
        #[arg(long)]
        n_per_prompt: Option<usize>,
        /// Output directory override.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Print the incentive cues a strategy consumed in one iteration.
    Cues {
        run_dir: PathBuf,
        #[arg(long, default_value_t = 0)]
        iteration: usize,
        #[arg(long)]
        strategy: String,
    },
    /// Recompute diversity metrics and baseline tests from run artifacts.
    Analyze {
        run_dir: PathBuf,
        /// Emit machine-readable JSON instead of tables.
        #[arg(long)]
        json: bool,
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Compare strategies against a baseline: a run directory (paired
    /// signed-rank over diversity counts) or an accuracy CSV with header
    /// strategy,iteration,replicate,accuracy (Mann-Whitney U).
    Compare {
        input: PathBuf,
        #[arg(long, default_value = "prompt")]
        baseline: String,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Re-run a mock experiment from its persisted config and verify the
    /// artifacts reproduce byte for byte.
    Replay {
        run_dir: PathBuf,
        /// Where to place the replayed run (defaults to a temp directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Collect {
            config,
            provider,
            rng_seed,
            iterations,
            strategies,
            n_per_prompt,
            out,
            alpha,
        } => {
            let mut cfg: RunConfig = serde_json::from_str(
                &std::fs::read_to_string(&config)
                    .with_context(|| format!("reading config {}", config.display()))?,
            )
            .with_context(|| format!("parsing config {}", config.display()))?;
            if let Some(provider) = provider {
                cfg.provider.id = provider;
            }
            if let Some(seed) = rng_seed {
                cfg.rng_seed = seed;
            }
            if let Some(iterations) = iterations {
                cfg.iterations = iterations;
            }
            if let Some(names) = strategies {
                let mut parsed = Vec::new();
                for name in names {
                    parsed.push(name.parse::<StrategyKind>()?);
                }
                cfg.strategies = parsed;
            }
            if let Some(n) = n_per_prompt {
                cfg.n_per_prompt = n;
            }
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            if let Some(alpha) = alpha {
                cfg.alpha = alpha;
            }
            collect(&cfg)
        }
        Command::Cues {
            run_dir,
            iteration,
            strategy,
        } => {
            let strategy: StrategyKind = strategy.parse()?;
            cues(&run_dir, iteration, strategy)?;
            Ok(0)
        }
        Command::Analyze {
            run_dir,
            json,
            alpha,
        } => {
            analyze(&run_dir, json, alpha)?;
            Ok(0)
        }
        Command::Compare {
            input,
            baseline,
            alpha,
            json,
        } => {
            compare(&input, &baseline, alpha, json)?;
            Ok(0)
        }
        Command::Replay { run_dir, out } => replay(&run_dir, out),
    }
}

fn collect(cfg: &RunConfig) -> anyhow::Result<u8> {
    let outcome = run_experiment(cfg).with_context(|| "collection failed")?;
    let completed = outcome
        .manifest
        .iterations
        .iter()
        .filter(|it| it.complete)
        .count();
    println!(
        "run written to {} ({} of {} iterations complete)",
        outcome.out_dir.display(),
        completed,
        cfg.iterations,
    );
    println!("manifest hash: {}", outcome.manifest.content_hash);
    if let Some(reports) = &outcome.reports {
        println!("\n{}", reports.diversity.to_text_table());
    }
    Ok(if outcome.complete { 0 } else { 2 })
}

fn cues(run_dir: &Path, iteration: usize, strategy: StrategyKind) -> anyhow::Result<()> {
    let cue = read_cues(run_dir, iteration, strategy)?;
    println!("cues for {strategy}, iteration {iteration}:");
    match cue {
        IncentiveCue::None => println!("  no cues: the baseline prompt strategy takes none"),
        IncentiveCue::Taboo { taboo } => print_taboo(&taboo),
        IncentiveCue::Chaining { chaining } => print_chaining(&chaining),
        IncentiveCue::Hints { hints } => print_hints(&hints),
        IncentiveCue::Combined { taboo, hints } => {
            print_taboo(&taboo);
            print_hints(&hints);
        }
    }
    Ok(())
}

fn print_taboo(cue: &paradiv::taboo::TabooCueSet) {
    println!("  taboo words per label:");
    for (label, words) in &cue.by_label {
        let marker = if words.shortfall { " (shortfall)" } else { "" };
        println!("    {label}: {}{marker}", words.words.join(", "));
    }
}

fn print_chaining(cue: &paradiv::strategy::ChainingCue) {
    println!("  replacement seeds (slot <- round-1 record):");
    for (slot, chain) in &cue.replacements {
        println!("    {slot} <- {}: {}", chain.record_id, chain.text);
    }
}

fn print_hints(cue: &paradiv::strategy::HintsCue) {
    println!("  hints per seed:");
    for (seed, list) in &cue.by_seed {
        let marker = if list.shortfall { " (shortfall)" } else { "" };
        println!("    {seed}{marker}:");
        for item in &list.items {
            println!("      [{}] {}", item.record_id, item.text);
        }
    }
}

/// Recomputes per-iteration diversity counts from the persisted datasets.
fn recompute_counts(
    run_dir: &Path,
) -> anyhow::Result<(RunConfig, BTreeMap<StrategyKind, Vec<DiversityCounts>>)> {
    let cfg = read_config(run_dir)?;
    let manifest = read_manifest(run_dir)?;
    let strategies = run_strategies(run_dir)?;
    let mut counts: BTreeMap<StrategyKind, Vec<DiversityCounts>> = BTreeMap::new();
    for iteration in &manifest.iterations {
        if !iteration.complete {
            continue;
        }
        for &strategy in &strategies {
            let rows = read_dataset_rows(run_dir, iteration.index, strategy)?;
            let texts: Vec<&str> = rows
                .iter()
                .filter(|row| {
                    cfg.include_seeds_in_diversity || row.origin != RowOrigin::Seed
                })
                .map(|row| row.text.as_str())
                .collect();
            counts.entry(strategy).or_default().push(DiversityCounts {
                unique_words: diversity::unique_words_of_texts(texts.iter().copied()),
                unique_3grams: diversity::unique_ngrams_of_texts(texts.iter().copied(), 3)?,
            });
        }
    }
    if counts.is_empty() {
        bail!("no complete iterations in {}", run_dir.display());
    }
    Ok((cfg, counts))
}

fn diversity_comparisons(
    counts: &BTreeMap<StrategyKind, Vec<DiversityCounts>>,
    baseline: &str,
    alpha: f64,
) -> anyhow::Result<Vec<ComparisonReport>> {
    let mut reports = Vec::new();
    for (metric, words) in [("unique_words", true), ("unique_3grams", false)] {
        let groups: BTreeMap<String, Vec<f64>> = counts
            .iter()
            .map(|(strategy, list)| {
                let values = list
                    .iter()
                    .map(|c| {
                        if words {
                            c.unique_words as f64
                        } else {
                            c.unique_3grams as f64
                        }
                    })
                    .collect();
                (strategy.name().to_string(), values)
            })
            .collect();
        reports.push(compare_paired(metric, &groups, baseline, alpha)?);
    }
    Ok(reports)
}

fn analyze(run_dir: &Path, json: bool, alpha: Option<f64>) -> anyhow::Result<()> {
    let (cfg, counts) = recompute_counts(run_dir)?;
    let alpha = alpha.unwrap_or(cfg.alpha);
    let report = diversity::aggregate(&counts, StrategyKind::Prompt)?;
    let stats = diversity_comparisons(&counts, StrategyKind::Prompt.name(), alpha)?;
    if json {
        let payload = serde_json::json!({ "diversity": report, "stats": stats });
        println!("{}", serde_json::to_string_pretty(&payload)?);
    } else {
        println!("{}", report.to_text_table());
        for stat in &stats {
            println!("\n{}", stat.to_text_table());
        }
    }
    Ok(())
}

fn compare(input: &Path, baseline: &str, alpha: Option<f64>, json: bool) -> anyhow::Result<()> {
    let reports = if input.is_dir() {
        let (cfg, counts) = recompute_counts(input)?;
        diversity_comparisons(&counts, baseline, alpha.unwrap_or(cfg.alpha))?
    } else {
        let rows = load_accuracy_csv(input)?;
        vec![compare_accuracies(&rows, baseline, alpha.unwrap_or(0.05))?]
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&reports)?);
    } else {
        for (i, report) in reports.iter().enumerate() {
            if i > 0 {
                println!();
            }
            println!("{}", report.to_text_table());
        }
    }
    Ok(())
}

fn replay(run_dir: &Path, out: Option<PathBuf>) -> anyhow::Result<u8> {
    let mut cfg = read_config(run_dir)?;
    if !cfg.provider.is_mock() {
        bail!("replay verification requires the mock provider");
    }
    let keep_dir;
    let temp_dir;
    let replay_dir: &Path = match out {
        Some(dir) => {
            keep_dir = dir;
            &keep_dir
        }
        None => {
            temp_dir = tempfile::TempDir::new()?;
            temp_dir.path()
        }
    };
    cfg.out_dir = replay_dir.join("replay");
    run_experiment(&cfg)?;
    let original = hash_run_artifacts(run_dir)?;
    let replayed = hash_run_artifacts(&cfg.out_dir)?;
    if original == replayed {
        println!("replay identical: {original}");
        Ok(0)
    } else {
        eprintln!("replay diverged:\n  original {original}\n  replayed {replayed}");
        Ok(1)
    }
}
