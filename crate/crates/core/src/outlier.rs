//! Outlier selection by Euclidean distance from the mean embedding vector,
//! with a TF-IDF fallback embedder and an HTTP embedding provider.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tokenize::tokenize;
use crate::util::backoff_delay;

/// One embedded text with the id of the record it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingVector {
    pub source_id: String,
    pub values: Vec<f64>,
}

/// Maps a batch of texts to fixed-dimension vectors, order-preserving.
pub trait EmbeddingProvider {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>>;
    fn id(&self) -> &str;
}

/// Built-in fallback: L2-normalized TF-IDF over the batch vocabulary.
///
/// Dimensions are the batch's distinct tokens in lexicographic order, so the
/// embedding of a text depends on the batch only through its (order-free)
/// vocabulary. `tf` is the raw count, `idf = ln(N / df) + 1`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TfIdfEmbedder;

impl EmbeddingProvider for TfIdfEmbedder {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let streams: Vec<Vec<String>> = texts
            .iter()
            .map(|t| tokenize(t).into_tokens())
            .collect();
        let vocab: BTreeSet<&str> = streams
            .iter()
            .flat_map(|s| s.iter().map(String::as_str))
            .collect();
        let columns: BTreeMap<&str, usize> = vocab
            .iter()
            .enumerate()
            .map(|(i, w)| (*w, i))
            .collect();

        let n_docs = texts.len() as f64;
        let mut doc_freq = vec![0.0_f64; columns.len()];
        for stream in &streams {
            let distinct: BTreeSet<&str> = stream.iter().map(String::as_str).collect();
            for word in distinct {
                doc_freq[columns[word]] += 1.0;
            }
        }

        let vectors = streams
            .iter()
            .map(|stream| {
                let mut vector = vec![0.0_f64; columns.len()];
                for token in stream {
                    vector[columns[token.as_str()]] += 1.0;
                }
                for (value, df) in vector.iter_mut().zip(doc_freq.iter()) {
                    if *value > 0.0 {
                        *value *= (n_docs / df).ln() + 1.0;
                    }
                }
                let norm = vector.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 0.0 {
                    for value in vector.iter_mut() {
                        *value /= norm;
                    }
                }
                vector
            })
            .collect();
        Ok(vectors)
    }

    fn id(&self) -> &str {
        "tfidf"
    }
}

/// Remote embedding endpoint configuration. The auth token is read from the
/// environment variable named in `auth_env`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingConfig {
    pub endpoint: String,
    pub model: String,
    #[serde(default)]
    pub auth_env: Option<String>,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
}

fn default_timeout_secs() -> u64 {
    30
}

fn default_retries() -> u32 {
    3
}

/// JSON embeddings client: posts `{model, input}` and reads
/// `{data: [{embedding: [...]}]}`.
pub struct HttpEmbeddingProvider {
    config: EmbeddingConfig,
    client: reqwest::blocking::Client,
}

#[derive(Serialize)]
struct EmbeddingRequest<'a> {
    model: &'a str,
    input: &'a [String],
}

#[derive(Deserialize)]
struct EmbeddingResponse {
    data: Vec<EmbeddingDatum>,
}

#[derive(Deserialize)]
struct EmbeddingDatum {
    embedding: Vec<f64>,
}

impl HttpEmbeddingProvider {
    pub fn new(config: EmbeddingConfig) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| Error::Config(format!("embedding client: {e}")))?;
        Ok(Self { config, client })
    }
}

impl EmbeddingProvider for HttpEmbeddingProvider {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let body = EmbeddingRequest {
            model: &self.config.model,
            input: texts,
        };
        let mut attempt = 0;
        loop {
            attempt += 1;
            let mut request = self.client.post(&self.config.endpoint).json(&body);
            if let Some(var) = &self.config.auth_env {
                if let Ok(token) = std::env::var(var) {
                    request = request.bearer_auth(token);
                }
            }
            match request.send() {
                Ok(response) if response.status().is_success() => {
                    let parsed: EmbeddingResponse =
                        response.json().map_err(|e| Error::BadResponse {
                            provider: self.config.endpoint.clone(),
                            detail: e.to_string(),
                        })?;
                    if parsed.data.len() != texts.len() {
                        return Err(Error::BadResponse {
                            provider: self.config.endpoint.clone(),
                            detail: format!(
                                "expected {} embeddings, got {}",
                                texts.len(),
                                parsed.data.len()
                            ),
                        });
                    }
                    return Ok(parsed.data.into_iter().map(|d| d.embedding).collect());
                }
                Ok(response) => {
                    let status = response.status();
                    if status.as_u16() == 401 || status.as_u16() == 403 {
                        return Err(Error::AuthFailure {
                            provider: self.config.endpoint.clone(),
                            status: status.as_u16(),
                        });
                    }
                    if attempt > self.config.max_retries {
                        return Err(Error::ExhaustedRetries {
                            prompt_id: "embedding-batch".into(),
                            attempts: attempt,
                            last: format!("status {status}"),
                        });
                    }
                }
                Err(e) => {
                    if attempt > self.config.max_retries {
                        return Err(Error::ExhaustedRetries {
                            prompt_id: "embedding-batch".into(),
                            attempts: attempt,
                            last: e.to_string(),
                        });
                    }
                }
            }
            std::thread::sleep(backoff_delay(attempt));
        }
    }

    fn id(&self) -> &str {
        "http"
    }
}

/// Embeds `(id, text)` pairs, validating finiteness and uniform dimension.
pub fn embed_records(
    items: &[(String, String)],
    provider: &dyn EmbeddingProvider,
) -> Result<Vec<EmbeddingVector>> {
    let texts: Vec<String> = items.iter().map(|(_, t)| t.clone()).collect();
    let raw = provider.embed(&texts)?;
    if raw.len() != items.len() {
        return Err(Error::DimensionMismatch {
            expected: items.len(),
            got: raw.len(),
        });
    }
    let dim = raw.first().map_or(0, Vec::len);
    let mut vectors = Vec::with_capacity(items.len());
    for ((id, _), values) in items.iter().zip(raw) {
        if values.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteEmbedding(id.clone()));
        }
        vectors.push(EmbeddingVector {
            source_id: id.clone(),
            values,
        });
    }
    Ok(vectors)
}

/// Coordinate-wise arithmetic mean of a non-empty batch.
pub fn centroid(vectors: &[EmbeddingVector]) -> Result<Vec<f64>> {
    let first = vectors.first().ok_or(Error::EmptyCentroid)?;
    let dim = first.values.len();
    let mut mean = vec![0.0_f64; dim];
    for vector in vectors {
        if vector.values.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: vector.values.len(),
            });
        }
        for (m, v) in mean.iter_mut().zip(vector.values.iter()) {
            *m += v;
        }
    }
    let n = vectors.len() as f64;
    for m in mean.iter_mut() {
        *m /= n;
    }
    Ok(mean)
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// The ids selected for one group, farthest from the centroid first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierSelection {
    pub ids: Vec<String>,
    pub distances: Vec<f64>,
    /// Set when fewer than the requested k vectors were available.
    pub shortfall: bool,
}

/// Picks the `k` vectors with the largest Euclidean distance to the centroid,
/// descending, ties broken by record id ascending. When `k` exceeds the group
/// size all records come back and the shortfall is flagged.
pub fn select_outliers(
    vectors: &[EmbeddingVector],
    centroid: &[f64],
    k: usize,
) -> Result<OutlierSelection> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mut scored: Vec<(f64, &str)> = vectors
        .iter()
        .map(|v| (euclidean(&v.values, centroid), v.source_id.as_str()))
        .collect();
    scored.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .expect("finite distances")
            .then_with(|| a.1.cmp(b.1))
    });
    let take = k.min(scored.len());
    Ok(OutlierSelection {
        ids: scored[..take].iter().map(|(_, id)| id.to_string()).collect(),
        distances: scored[..take].iter().map(|(d, _)| *d).collect(),
        shortfall: k > vectors.len(),
    })
}
