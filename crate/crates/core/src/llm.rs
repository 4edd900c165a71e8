//! Chat-completion provider abstraction: an HTTP JSON client with retries,
//! backoff and rate limiting, response parsing into candidate paraphrases,
//! and a deterministic mock provider for offline pipelines.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strategy::PromptSpec;
use crate::util::{backoff_delay, hash64, strip_list_marker, strip_matching_quotes};

/// Provider id that selects the built-in mock.
pub const MOCK_PROVIDER_ID: &str = "mock";

/// Provider configuration. The auth token is read from the environment
/// variable named in `auth_env`; `id = "mock"` routes to the offline mock.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProviderConfig {
    pub id: String,
    #[serde(default)]
    pub endpoint: String,
    #[serde(default)]
    pub model: String,
    #[serde(default)]
    pub auth_env: Option<String>,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    /// Requests per minute; absent means unlimited.
    #[serde(default)]
    pub rate_limit_rpm: Option<u32>,
    /// Seed for the mock provider's deterministic output.
    #[serde(default)]
    pub mock_seed: u64,
    /// Fault injection: the mock hard-fails from the Nth call onward.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock_fail_after: Option<u64>,
    /// Fault injection: the mock corrupts every Nth candidate line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock_corrupt_every: Option<u64>,
}

fn default_temperature() -> f64 {
    1.0
}

fn default_retries() -> u32 {
    3
}

fn default_timeout_secs() -> u64 {
    60
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            id: MOCK_PROVIDER_ID.to_string(),
            endpoint: String::new(),
            model: String::new(),
            auth_env: None,
            temperature: default_temperature(),
            max_retries: default_retries(),
            timeout_secs: default_timeout_secs(),
            rate_limit_rpm: None,
            mock_seed: 0,
            mock_fail_after: None,
            mock_corrupt_every: None,
        }
    }
}

impl ProviderConfig {
    pub fn mock(mock_seed: u64) -> Self {
        Self {
            mock_seed,
            ..Self::default()
        }
    }

    pub fn is_mock(&self) -> bool {
        self.id == MOCK_PROVIDER_ID
    }
}

/// One round trip to a provider, with the raw response kept verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionExchange {
    pub prompt: PromptSpec,
    pub raw_response: String,
    pub latency: Duration,
    pub attempts: u32,
    pub provider_id: String,
}

/// Token-bucket rate limiter: capacity of one minute's worth of requests,
/// refilled continuously.
#[derive(Debug)]
struct TokenBucket {
    capacity: f64,
    tokens: f64,
    refill_per_sec: f64,
    last: Instant,
}

impl TokenBucket {
    fn new(rpm: u32, now: Instant) -> Self {
        let capacity = f64::from(rpm.max(1));
        Self {
            capacity,
            tokens: capacity,
            refill_per_sec: capacity / 60.0,
            last: now,
        }
    }

    /// Takes one token, returning how long the caller must wait first.
    fn acquire_at(&mut self, now: Instant) -> Duration {
        let elapsed = now.duration_since(self.last).as_secs_f64();
        self.tokens = (self.tokens + elapsed * self.refill_per_sec).min(self.capacity);
        self.last = now;
        if self.tokens >= 1.0 {
            self.tokens -= 1.0;
            Duration::ZERO
        } else {
            let deficit = 1.0 - self.tokens;
            self.tokens = 0.0;
            Duration::from_secs_f64(deficit / self.refill_per_sec)
        }
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    messages: [ChatMessage<'a>; 1],
    temperature: f64,
}

#[derive(Serialize)]
struct ChatMessage<'a> {
    role: &'static str,
    content: &'a str,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<ChatChoice>,
}

#[derive(Deserialize)]
struct ChatChoice {
    message: ChatChoiceMessage,
}

#[derive(Deserialize)]
struct ChatChoiceMessage {
    content: String,
}

/// A configured provider handle, safe to share across calls.
pub struct LlmClient {
    config: ProviderConfig,
    http: Option<reqwest::blocking::Client>,
    limiter: Option<Mutex<TokenBucket>>,
    calls: AtomicU64,
    candidates_emitted: AtomicU64,
}

impl LlmClient {
    pub fn new(config: ProviderConfig) -> Result<Self> {
        let http = if config.is_mock() {
            None
        } else {
            Some(
                reqwest::blocking::Client::builder()
                    .timeout(Duration::from_secs(config.timeout_secs))
                    .build()
                    .map_err(|e| Error::Config(format!("http client: {e}")))?,
            )
        };
        let limiter = config
            .rate_limit_rpm
            .map(|rpm| Mutex::new(TokenBucket::new(rpm, Instant::now())));
        Ok(Self {
            config,
            http,
            limiter,
            calls: AtomicU64::new(0),
            candidates_emitted: AtomicU64::new(0),
        })
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }

    pub fn provider_id(&self) -> &str {
        &self.config.id
    }

    /// Completes one prompt, retrying transient failures with exponential
    /// backoff and honoring the configured rate limit.
    pub fn complete(&self, prompt: &PromptSpec) -> Result<CompletionExchange> {
        self.complete_seeded(prompt, None)
    }

    /// Like [`Self::complete`], with a mock-seed override. The orchestrator
    /// derives one per (iteration, round, strategy, seed) so that re-firing an
    /// identical prompt in round two still yields fresh mock paraphrases, the
    /// way a sampling LLM would.
    pub fn complete_seeded(
        &self,
        prompt: &PromptSpec,
        mock_seed: Option<u64>,
    ) -> Result<CompletionExchange> {
        let call_index = self.calls.fetch_add(1, Ordering::SeqCst);
        if let Some(after) = self.config.mock_fail_after {
            if call_index >= after {
                return Err(Error::ExhaustedRetries {
                    prompt_id: prompt_id(prompt),
                    attempts: 1,
                    last: "simulated provider outage".into(),
                });
            }
        }
        if self.config.is_mock() {
            let seed = mock_seed.unwrap_or(self.config.mock_seed);
            let mut exchange = mock_complete(prompt, seed);
            if let Some(every) = self.config.mock_corrupt_every {
                exchange.raw_response = self.corrupt_response(&exchange.raw_response, every);
            }
            return Ok(exchange);
        }
        self.complete_http(prompt)
    }

    /// Replaces every Nth candidate line with a token too short to survive
    /// the malformedness filter.
    fn corrupt_response(&self, raw: &str, every: u64) -> String {
        let every = every.max(1);
        raw.lines()
            .map(|line| {
                let index = self.candidates_emitted.fetch_add(1, Ordering::SeqCst);
                if index % every == every - 1 {
                    "zz".to_string()
                } else {
                    line.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn complete_http(&self, prompt: &PromptSpec) -> Result<CompletionExchange> {
        let client = self.http.as_ref().expect("http client for non-mock provider");
        let body = ChatRequest {
            model: &self.config.model,
            messages: [ChatMessage {
                role: "user",
                content: &prompt.rendered_text,
            }],
            temperature: self.config.temperature,
        };
        let started = Instant::now();
        let mut attempts = 0u32;
        let mut timed_out = false;
        let mut last_error = String::new();
        while attempts <= self.config.max_retries {
            attempts += 1;
            if let Some(limiter) = &self.limiter {
                let wait = limiter.lock().expect("limiter lock").acquire_at(Instant::now());
                if !wait.is_zero() {
                    std::thread::sleep(wait);
                }
            }
            let mut request = client.post(&self.config.endpoint).json(&body);
            if let Some(var) = &self.config.auth_env {
                if let Ok(token) = std::env::var(var) {
                    request = request.bearer_auth(token);
                }
            }
            match request.send() {
                Ok(response) if response.status().is_success() => {
                    let parsed: ChatResponse = response.json().map_err(|e| Error::BadResponse {
                        provider: self.config.id.clone(),
                        detail: e.to_string(),
                    })?;
                    let content = parsed
                        .choices
                        .into_iter()
                        .next()
                        .map(|c| c.message.content)
                        .ok_or_else(|| Error::BadResponse {
                            provider: self.config.id.clone(),
                            detail: "response carries no choices".into(),
                        })?;
                    return Ok(CompletionExchange {
                        prompt: prompt.clone(),
                        raw_response: content,
                        latency: started.elapsed(),
                        attempts,
                        provider_id: self.config.id.clone(),
                    });
                }
                Ok(response) => {
                    let status = response.status().as_u16();
                    if status == 401 || status == 403 {
                        return Err(Error::AuthFailure {
                            provider: self.config.id.clone(),
                            status,
                        });
                    }
                    timed_out = false;
                    last_error = format!("status {status}");
                    let retryable = status == 408 || status == 429 || status >= 500;
                    if !retryable {
                        return Err(Error::BadResponse {
                            provider: self.config.id.clone(),
                            detail: last_error,
                        });
                    }
                }
                Err(e) => {
                    timed_out = e.is_timeout();
                    last_error = e.to_string();
                }
            }
            if attempts <= self.config.max_retries {
                std::thread::sleep(backoff_delay(attempts));
            }
        }
        if timed_out {
            Err(Error::Timeout {
                prompt_id: prompt_id(prompt),
                attempts,
            })
        } else {
            Err(Error::ExhaustedRetries {
                prompt_id: prompt_id(prompt),
                attempts,
                last: last_error,
            })
        }
    }
}

/// One-shot completion without keeping a client around.
pub fn complete(prompt: &PromptSpec, config: &ProviderConfig) -> Result<CompletionExchange> {
    LlmClient::new(config.clone())?.complete(prompt)
}

fn prompt_id(prompt: &PromptSpec) -> String {
    format!("{}:{}", prompt.strategy, prompt.seed_id)
}

/// Candidates recovered from a raw response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedCandidates {
    pub texts: Vec<String>,
    /// More than `expected_n` non-blank candidates were present.
    pub overflow: bool,
    /// Fewer than `expected_n` candidates were recovered.
    pub underflow: bool,
}

/// Splits a raw response into candidate paraphrases: one per line, list
/// markers and surrounding quote pairs stripped, blanks dropped, truncated to
/// `expected_n`.
pub fn parse_paraphrases(raw: &str, expected_n: usize) -> ParsedCandidates {
    let mut candidates = Vec::new();
    let mut seen = 0usize;
    for line in raw.lines() {
        let unmarked = strip_list_marker(line).unwrap_or(line);
        let unquoted = strip_matching_quotes(unmarked).trim();
        if unquoted.is_empty() {
            continue;
        }
        seen += 1;
        if candidates.len() < expected_n {
            candidates.push(unquoted.to_string());
        }
    }
    ParsedCandidates {
        overflow: seen > expected_n,
        underflow: seen < expected_n,
        texts: candidates,
    }
}

// Word-level perturbation tables for the mock provider. The substitution
// table leans on the navigation/intent vocabulary of the bundled fixtures so
// mock output reads like paraphrases rather than noise.
const SYNONYMS: &[(&str, &[&str])] = &[
    ("fastest", &["quickest", "swiftest", "speediest"]),
    ("way", &["route", "path", "course"]),
    ("tell", &["show", "inform", "advise"]),
    ("home", &["house", "residence", "dwelling"]),
    ("get", &["reach", "arrive", "travel"]),
    ("me", &["us", "myself", "everyone"]),
    ("the", &["a", "this", "that"]),
    ("is", &["seems", "appears", "remains"]),
    ("what", &["which", "whatever", "whichever"]),
    ("when", &["whenever", "how soon", "at what time"]),
    ("where", &["at which place", "whereabouts", "in what place"]),
    ("play", &["start", "begin", "queue"]),
    ("music", &["songs", "tunes", "tracks"]),
    ("flight", &["plane", "airfare", "trip"]),
    ("book", &["reserve", "arrange", "schedule"]),
    ("find", &["locate", "discover", "spot"]),
    ("nearest", &["closest", "most nearby", "handiest"]),
    ("please", &["kindly", "do", "would you"]),
];

const TAILS: &[&str] = &[
    "promptly", "directly", "today", "tonight", "soon", "quickly", "briefly", "exactly",
    "precisely", "roughly", "eventually", "immediately", "shortly", "casually", "formally",
    "politely", "urgently", "calmly", "clearly", "simply", "honestly", "frankly", "easily",
    "readily", "smoothly", "swiftly", "steadily", "surely", "certainly", "definitely",
    "possibly", "probably", "ideally", "hopefully", "generally", "typically", "basically",
    "actually", "currently", "presently", "recently", "lately", "regularly", "daily",
    "weekly", "once", "twice", "again", "anew", "afresh", "alike", "alone", "together",
    "nearby", "somewhere", "anywhere", "everywhere", "somehow", "anyhow", "meanwhile",
    "afterwards", "beforehand", "overall", "indeed",
];

/// Extracts the phrase embedded in a rendered prompt, falling back to the
/// whole prompt when the template marker is absent.
fn embedded_phrase(prompt_text: &str) -> &str {
    const MARKER: &str = "Original phrase: \"";
    if let Some(start) = prompt_text.find(MARKER) {
        let tail = &prompt_text[start + MARKER.len()..];
        if let Some(end) = tail.find("\".") {
            return &tail[..end];
        }
    }
    prompt_text
}

/// Deterministic mock completion: `n_requested` synthetic paraphrases built
/// as word-level perturbations of the seed text embedded in the prompt.
///
/// Each variant rotates the seed's words, applies synonym-table
/// substitutions, and appends a tail adverb plus a short hash tag, all keyed
/// by `hash(prompt, mock_seed, i)`. The tag makes candidates globally unique
/// so that mock pipelines incur no duplicate-filter losses; outputs are
/// stable across runs and platforms.
pub fn mock_complete(prompt: &PromptSpec, mock_seed: u64) -> CompletionExchange {
    let phrase = embedded_phrase(&prompt.rendered_text);
    let words: Vec<&str> = phrase.split_whitespace().collect();
    let prompt_bytes = prompt.rendered_text.as_bytes();
    let base = hash64(&[prompt_bytes, &mock_seed.to_le_bytes()]);

    let mut lines = Vec::with_capacity(prompt.n_requested);
    for i in 0..prompt.n_requested {
        let h = hash64(&[prompt_bytes, &mock_seed.to_le_bytes(), &(i as u64).to_le_bytes()]);
        let variant = perturb(&words, h);
        let tail = TAILS[((base.wrapping_add(i as u64)) % TAILS.len() as u64) as usize];
        let tag = format!("x{:010x}", h & 0xff_ffff_ffff);
        lines.push(format!("{}. {variant} {tail} {tag}", i + 1));
    }

    CompletionExchange {
        prompt: prompt.clone(),
        raw_response: lines.join("\n"),
        latency: Duration::ZERO,
        attempts: 1,
        provider_id: MOCK_PROVIDER_ID.to_string(),
    }
}

fn perturb(words: &[&str], h: u64) -> String {
    if words.is_empty() {
        return "nothing to rephrase".to_string();
    }
    let rotation = (h % words.len() as u64) as usize;
    let mut out = Vec::with_capacity(words.len());
    for (position, index) in (0..words.len()).enumerate() {
        let word = words[(index + rotation) % words.len()];
        let clean: String = word.chars().filter(|c| *c != '"').collect();
        let lower = clean.to_lowercase();
        let substituted = SYNONYMS
            .iter()
            .find(|(from, _)| *from == lower)
            .and_then(|(_, to)| {
                let choice = (h >> (2 * (position % 24))) & 3;
                if choice == 0 {
                    None
                } else {
                    Some(to[(choice as usize - 1) % to.len()])
                }
            });
        out.push(substituted.map_or(clean, str::to_string));
    }
    out.join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::StrategyKind;
    use std::io::{Read, Write};
    use std::net::TcpListener;

    fn prompt(text: &str, n: usize) -> PromptSpec {
        PromptSpec {
            strategy: StrategyKind::Prompt,
            seed_id: "s0".into(),
            rendered_text: text.to_string(),
            n_requested: n,
        }
    }

    #[test]
    fn numbered_lists_parse_in_order() {
        let parsed = parse_paraphrases("1. Foo\n2. Bar\n3. Baz", 3);
        assert_eq!(parsed.texts, ["Foo", "Bar", "Baz"]);
        assert!(!parsed.overflow && !parsed.underflow);
    }

    #[test]
    fn mixed_markers_and_quotes_are_stripped() {
        let parsed = parse_paraphrases("\"Alpha.\"\n- Beta", 2);
        assert_eq!(parsed.texts, ["Alpha.", "Beta"]);
    }

    #[test]
    fn overflow_is_flagged_and_truncated() {
        let raw = (1..=6).map(|i| format!("{i}. line {i}")).collect::<Vec<_>>().join("\n");
        let parsed = parse_paraphrases(&raw, 5);
        assert_eq!(parsed.texts.len(), 5);
        assert!(parsed.overflow);
        assert!(!parsed.underflow);
    }

    #[test]
    fn underflow_is_flagged() {
        let parsed = parse_paraphrases("only one line", 3);
        assert_eq!(parsed.texts.len(), 1);
        assert!(parsed.underflow);
    }

    #[test]
    fn blank_lines_are_dropped() {
        let parsed = parse_paraphrases("1. one\n\n  \n2. two", 2);
        assert_eq!(parsed.texts, ["one", "two"]);
    }

    #[test]
    fn parsed_text_is_substring_of_raw() {
        let raw = "1. \"The first variant.\"\n2) a second variant\n* third one here";
        let parsed = parse_paraphrases(raw, 5);
        for text in &parsed.texts {
            assert!(raw.contains(text.as_str()), "{text:?} not in raw");
        }
    }

    #[test]
    fn mock_is_deterministic() {
        let p = prompt(
            "Rephrase an original question or statement 5 times. Original phrase: \"tell me the fastest way to get home\".",
            5,
        );
        let first = mock_complete(&p, 42);
        let second = mock_complete(&p, 42);
        assert_eq!(first.raw_response, second.raw_response);
        let other_seed = mock_complete(&p, 43);
        assert_ne!(first.raw_response, other_seed.raw_response);
    }

    #[test]
    fn different_embedded_seeds_give_different_responses() {
        let a = prompt(
            "Rephrase an original question or statement 5 times. Original phrase: \"where is the station\".",
            5,
        );
        let b = prompt(
            "Rephrase an original question or statement 5 times. Original phrase: \"play some jazz\".",
            5,
        );
        assert_ne!(mock_complete(&a, 1).raw_response, mock_complete(&b, 1).raw_response);
    }

    #[test]
    fn mock_candidates_parse_cleanly_and_are_distinct() {
        let p = prompt(
            "Rephrase an original question or statement 5 times. Original phrase: \"book a flight to boston for tomorrow morning\".",
            5,
        );
        let exchange = mock_complete(&p, 7);
        let parsed = parse_paraphrases(&exchange.raw_response, 5);
        assert_eq!(parsed.texts.len(), 5);
        assert!(!parsed.overflow && !parsed.underflow);
        let unique: std::collections::BTreeSet<&String> = parsed.texts.iter().collect();
        assert_eq!(unique.len(), 5);
        for text in &parsed.texts {
            assert!(text.split_whitespace().count() >= 3);
        }
    }

    #[test]
    fn mock_call_counter_triggers_injected_outage() {
        let config = ProviderConfig {
            mock_fail_after: Some(2),
            ..ProviderConfig::mock(1)
        };
        let client = LlmClient::new(config).unwrap();
        let p = prompt("Original phrase: \"one two three four\".", 3);
        assert!(client.complete(&p).is_ok());
        assert!(client.complete(&p).is_ok());
        let err = client.complete(&p).unwrap_err();
        assert!(matches!(err, Error::ExhaustedRetries { .. }));
    }

    #[test]
    fn corruption_knob_replaces_every_nth_candidate() {
        let config = ProviderConfig {
            mock_corrupt_every: Some(5),
            ..ProviderConfig::mock(1)
        };
        let client = LlmClient::new(config).unwrap();
        let p = prompt("Original phrase: \"five words in this seed\".", 5);
        let exchange = client.complete(&p).unwrap();
        let corrupted = exchange
            .raw_response
            .lines()
            .filter(|l| *l == "zz")
            .count();
        assert_eq!(corrupted, 1);
    }

    #[test]
    fn token_bucket_delays_once_capacity_is_spent() {
        let start = Instant::now();
        let mut bucket = TokenBucket::new(60, start);
        for _ in 0..60 {
            assert_eq!(bucket.acquire_at(start), Duration::ZERO);
        }
        let wait = bucket.acquire_at(start);
        assert!(wait > Duration::from_millis(900) && wait < Duration::from_millis(1100));
        // A second's refill restores one token.
        let later = start + Duration::from_secs(2);
        assert_eq!(bucket.acquire_at(later), Duration::ZERO);
    }

    /// Minimal HTTP fixture: serves the scripted responses in order, one
    /// connection each.
    fn spawn_server(responses: Vec<(u16, String)>) -> String {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        std::thread::spawn(move || {
            for (status, body) in responses {
                let (mut stream, _) = listener.accept().unwrap();
                let mut buf = [0u8; 8192];
                let mut request = Vec::new();
                loop {
                    let read = stream.read(&mut buf).unwrap();
                    request.extend_from_slice(&buf[..read]);
                    if request.windows(4).any(|w| w == b"\r\n\r\n") || read == 0 {
                        break;
                    }
                }
                let reason = if status == 200 { "OK" } else { "Error" };
                let response = format!(
                    "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                stream.write_all(response.as_bytes()).unwrap();
            }
        });
        format!("http://{addr}/v1/chat/completions")
    }

    fn chat_body(content: &str) -> String {
        serde_json::json!({
            "choices": [{"message": {"role": "assistant", "content": content}}]
        })
        .to_string()
    }

    fn http_config(endpoint: String, max_retries: u32) -> ProviderConfig {
        ProviderConfig {
            id: "http-test".into(),
            endpoint,
            model: "test-model".into(),
            max_retries,
            timeout_secs: 5,
            ..ProviderConfig::default()
        }
    }

    #[test]
    fn transient_failures_are_retried_until_success() {
        let endpoint = spawn_server(vec![
            (500, "oops".into()),
            (503, "still down".into()),
            (200, chat_body("1. all good now")),
        ]);
        let client = LlmClient::new(http_config(endpoint, 3)).unwrap();
        let exchange = client
            .complete(&prompt("Original phrase: \"anything\".", 1))
            .unwrap();
        assert_eq!(exchange.attempts, 3);
        assert_eq!(exchange.raw_response, "1. all good now");
    }

    #[test]
    fn zero_retries_fail_after_one_attempt() {
        let endpoint = spawn_server(vec![(500, "oops".into())]);
        let client = LlmClient::new(http_config(endpoint, 0)).unwrap();
        let err = client
            .complete(&prompt("Original phrase: \"anything\".", 1))
            .unwrap_err();
        match err {
            Error::ExhaustedRetries { attempts, .. } => assert_eq!(attempts, 1),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn auth_failures_are_not_retried() {
        let endpoint = spawn_server(vec![(401, "no".into())]);
        let client = LlmClient::new(http_config(endpoint, 3)).unwrap();
        let err = client
            .complete(&prompt("Original phrase: \"anything\".", 1))
            .unwrap_err();
        assert!(matches!(err, Error::AuthFailure { status: 401, .. }));
    }

    #[test]
    fn raw_response_round_trips_through_serialization() {
        let p = prompt("Original phrase: \"some seed words here\".", 3);
        let exchange = mock_complete(&p, 9);
        let json = serde_json::to_string(&exchange).unwrap();
        let back: CompletionExchange = serde_json::from_str(&json).unwrap();
        assert_eq!(back.raw_response, exchange.raw_response);
        assert_eq!(back.prompt, exchange.prompt);
    }
}
