//! Paraphrase collection with diversity-incentive prompting.
//!
//! The library drives a two-round collection protocol against a chat-completion
//! LLM: round one gathers baseline paraphrases of seed sentences, round two
//! re-prompts with incentive cues computed from the first round (taboo words,
//! outlier chaining seeds, or in-context hint examples). Collected datasets are
//! filtered, assembled and scored with lexical-diversity metrics and
//! nonparametric significance tests.
//!
//! Entry points:
//! - [`orchestrate::run_experiment`] executes the full protocol from a
//!   [`orchestrate::RunConfig`] and persists reproducible run artifacts.
//! - [`strategy::render_prompt`] / [`strategy::derive_cues`] expose the prompt
//!   engine on its own.
//! - [`stats`] and [`diversity`] hold the evaluation side.

pub mod compare;
pub mod corpus;
pub mod diversity;
pub mod error;
pub mod filter;
pub mod llm;
pub mod orchestrate;
pub mod outlier;
pub mod stats;
pub mod strategy;
pub mod taboo;
pub mod tokenize;

mod util;

pub use compare::{compare_groups, ComparisonReport};
pub use corpus::{AugmentedDataset, DatasetFormat, LabeledText, SeedSet};
pub use error::{Error, Result};
pub use filter::{ParaphraseRecord, RecordStatus, RejectionReport};
pub use llm::{CompletionExchange, LlmClient, ProviderConfig};
pub use orchestrate::{RunConfig, RunManifest, RunOutcome};
pub use outlier::{EmbeddingProvider, EmbeddingVector, TfIdfEmbedder};
pub use stats::{mann_whitney_u, wilcoxon_signed_rank, StatTestResult};
pub use strategy::{IncentiveCue, PromptSpec, StrategyKind};
pub use tokenize::TokenStream;
