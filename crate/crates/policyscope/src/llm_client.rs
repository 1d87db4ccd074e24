//! Transport to any OpenAI-compatible chat-completions endpoint, plus the
//! deterministic mock client that backs tests, CI, and transcript replay.
//!
//! The API key is taken from the environment only and is kept out of every
//! log line, transcript, and error message.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Environment variable holding the API key (never read from config files).
pub const ENV_API_KEY: &str = "POLICYSCOPE_API_KEY";
/// Environment variable holding the endpoint base URL (config files override).
pub const ENV_BASE_URL: &str = "POLICYSCOPE_BASE_URL";

/// Connection and sampling parameters for a chat endpoint.
#[derive(Clone)]
pub struct ClientConfig {
    pub base_url: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_seconds: u64,
    pub max_retries: u32,
    /// First backoff delay; each retry doubles it. Tests shrink this.
    pub retry_base_ms: u64,
    api_key: Option<String>,
}

impl ClientConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into(),
            model: model.into(),
            temperature: 0.7,
            max_tokens: 1024,
            timeout_seconds: 60,
            max_retries: 3,
            retry_base_ms: 1000,
            api_key: std::env::var(ENV_API_KEY).ok(),
        }
    }

    pub fn with_api_key(mut self, key: impl Into<String>) -> Self {
        self.api_key = Some(key.into());
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_url.trim().is_empty() {
            return Err(Error::Config("client base_url is empty".into()));
        }
        if !(self.temperature >= 0.0) {
            return Err(Error::Config(format!(
                "temperature must be nonnegative, got {}",
                self.temperature
            )));
        }
        Ok(())
    }
}

// The key must never leak through Debug-formatted logs or error chains.
impl fmt::Debug for ClientConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClientConfig")
            .field("base_url", &self.base_url)
            .field("model", &self.model)
            .field("temperature", &self.temperature)
            .field("max_tokens", &self.max_tokens)
            .field("timeout_seconds", &self.timeout_seconds)
            .field("max_retries", &self.max_retries)
            .field("retry_base_ms", &self.retry_base_ms)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .finish()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    System,
    User,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

/// Ordered messages for one completion call. The first message is always the
/// system message.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub messages: Vec<ChatMessage>,
}

impl ChatRequest {
    pub fn new(system: impl Into<String>, user: impl Into<String>) -> Self {
        Self {
            messages: vec![
                ChatMessage { role: Role::System, content: system.into() },
                ChatMessage { role: Role::User, content: user.into() },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.messages.is_empty() {
            return Err(Error::Validation("chat request has no messages".into()));
        }
        if self.messages[0].role != Role::System {
            return Err(Error::Validation("first chat message must be the system message".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatResponse {
    pub content: String,
    pub finish_reason: Option<String>,
    pub usage: Option<TokenUsage>,
    /// Round-trip latency as observed (or replayed) by the client.
    pub latency_ms: u64,
}

/// Anything that can answer chat requests: the HTTP transport, the scripted
/// mock, or a replay of a recorded run.
pub trait ChatClient: Send + Sync {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse>;
}

// Wire types: the request body carries exactly {model, messages, temperature,
// max_tokens}.
#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    messages: Vec<WireMessage<'a>>,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Serialize)]
struct WireMessage<'a> {
    role: &'a str,
    content: &'a str,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessageOwned,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct WireMessageOwned {
    content: String,
}

#[derive(Deserialize)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

/// Exponential backoff with +-20% jitter: attempt `k` (0-based) waits
/// `base * 2^k * U[0.8, 1.2]` milliseconds. Monotone nondecreasing across a
/// retry sequence for any jitter draw.
pub fn backoff_delay_ms<R: Rng>(base_ms: u64, attempt: u32, rng: &mut R) -> u64 {
    let nominal = base_ms.saturating_mul(1u64 << attempt.min(20));
    (nominal as f64 * rng.gen_range(0.8..=1.2)).round() as u64
}

/// Blocking HTTP client for the `/chat/completions` wire protocol with
/// bounded retries on transient failures.
pub struct HttpClient {
    cfg: ClientConfig,
    http: reqwest::blocking::Client,
}

impl HttpClient {
    pub fn new(cfg: ClientConfig) -> Result<Self> {
        cfg.validate()?;
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_seconds))
            .build()
            .map_err(|e| Error::Transport(format!("failed to build HTTP client: {e}")))?;
        Ok(Self { cfg, http })
    }

    fn url(&self) -> String {
        format!("{}/chat/completions", self.cfg.base_url.trim_end_matches('/'))
    }
}

impl ChatClient for HttpClient {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse> {
        req.validate()?;
        let body = WireRequest {
            model: &self.cfg.model,
            messages: req
                .messages
                .iter()
                .map(|m| WireMessage { role: m.role.as_str(), content: &m.content })
                .collect(),
            temperature: self.cfg.temperature,
            max_tokens: self.cfg.max_tokens,
        };
        let url = self.url();
        let started = Instant::now();
        let mut rng = rand::thread_rng();
        let mut attempt: u32 = 0;

        loop {
            let outcome = {
                let mut builder = self.http.post(&url).json(&body);
                if let Some(key) = &self.cfg.api_key {
                    builder = builder.bearer_auth(key);
                }
                builder.send()
            };

            match outcome {
                Err(e) => {
                    if attempt < self.cfg.max_retries {
                        std::thread::sleep(Duration::from_millis(backoff_delay_ms(
                            self.cfg.retry_base_ms,
                            attempt,
                            &mut rng,
                        )));
                        attempt += 1;
                        continue;
                    }
                    // reqwest error text never includes headers, so the key
                    // cannot leak here.
                    return Err(Error::Transport(format!(
                        "request failed after {} attempts: {e}",
                        attempt + 1
                    )));
                }
                Ok(resp) => {
                    let status = resp.status().as_u16();
                    if (200..300).contains(&status) {
                        let text = resp.text().map_err(|e| {
                            Error::Transport(format!("failed to read response body: {e}"))
                        })?;
                        let parsed: WireResponse = serde_json::from_str(&text).map_err(|e| {
                            Error::Protocol(format!(
                                "malformed chat completion ({e}); body starts: {}",
                                excerpt(&text)
                            ))
                        })?;
                        let choice = parsed.choices.into_iter().next().ok_or_else(|| {
                            Error::Protocol(format!(
                                "chat completion has no choices; body starts: {}",
                                excerpt(&text)
                            ))
                        })?;
                        return Ok(ChatResponse {
                            content: choice.message.content,
                            finish_reason: choice.finish_reason,
                            usage: parsed.usage.map(|u| TokenUsage {
                                prompt_tokens: u.prompt_tokens,
                                completion_tokens: u.completion_tokens,
                            }),
                            latency_ms: started.elapsed().as_millis() as u64,
                        });
                    }
                    if status == 401 || status == 403 {
                        return Err(Error::Auth { status });
                    }
                    let retryable = status == 429 || (500..600).contains(&status);
                    if retryable && attempt < self.cfg.max_retries {
                        std::thread::sleep(Duration::from_millis(backoff_delay_ms(
                            self.cfg.retry_base_ms,
                            attempt,
                            &mut rng,
                        )));
                        attempt += 1;
                        continue;
                    }
                    let message = excerpt(&resp.text().unwrap_or_default());
                    if retryable {
                        return Err(Error::Transport(format!(
                            "retries exhausted after {} attempts; last status {status}: {message}",
                            attempt + 1
                        )));
                    }
                    return Err(Error::Http { status, message });
                }
            }
        }
    }
}

fn excerpt(body: &str) -> String {
    let trimmed: String = body.chars().take(200).collect();
    if trimmed.len() < body.len() {
        format!("{trimmed}…")
    } else {
        trimmed
    }
}

/// One canned response for the mock client.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptEntry {
    pub content: String,
    pub latency_ms: u64,
}

/// Deterministic client serving canned responses in order. Also the replay
/// engine: loaded from a recorded transcript it serves that run's responses
/// (and latencies) back in sequence.
pub struct MockClient {
    script: Mutex<VecDeque<ScriptEntry>>,
    requests: Mutex<Vec<ChatRequest>>,
    total: usize,
}

impl MockClient {
    pub fn from_script<S: Into<String>>(responses: Vec<S>) -> Self {
        Self::from_entries(
            responses
                .into_iter()
                .map(|content| ScriptEntry { content: content.into(), latency_ms: 0 })
                .collect(),
        )
    }

    pub fn from_entries(entries: Vec<ScriptEntry>) -> Self {
        let total = entries.len();
        Self {
            script: Mutex::new(entries.into()),
            requests: Mutex::new(Vec::new()),
            total,
        }
    }

    /// Every request seen so far, in call order.
    pub fn requests(&self) -> Vec<ChatRequest> {
        self.requests.lock().expect("mock lock").clone()
    }

    pub fn remaining(&self) -> usize {
        self.script.lock().expect("mock lock").len()
    }
}

impl ChatClient for MockClient {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse> {
        req.validate()?;
        self.requests.lock().expect("mock lock").push(req.clone());
        let next = self.script.lock().expect("mock lock").pop_front();
        match next {
            Some(entry) => Ok(ChatResponse {
                content: entry.content,
                finish_reason: Some("stop".into()),
                usage: None,
                latency_ms: entry.latency_ms,
            }),
            None => Err(Error::ScriptExhausted { served: self.total }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn request_body_has_exactly_the_declared_fields() {
        let body = WireRequest {
            model: "m",
            messages: vec![WireMessage { role: "system", content: "s" }],
            temperature: 0.7,
            max_tokens: 16,
        };
        let v: serde_json::Value = serde_json::from_str(&serde_json::to_string(&body).unwrap()).unwrap();
        let obj = v.as_object().unwrap();
        let mut keys: Vec<_> = obj.keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, vec!["max_tokens", "messages", "model", "temperature"]);
    }

    #[test]
    fn chat_request_first_message_must_be_system() {
        let bad = ChatRequest {
            messages: vec![ChatMessage { role: Role::User, content: "hi".into() }],
        };
        assert!(bad.validate().is_err());
        assert!(ChatRequest::new("sys", "user").validate().is_ok());
    }

    #[test]
    fn backoff_is_monotone_nondecreasing() {
        for seed in 0..50 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let delays: Vec<u64> = (0..4).map(|a| backoff_delay_ms(1000, a, &mut rng)).collect();
            for w in delays.windows(2) {
                assert!(w[1] >= w[0], "delays not monotone: {delays:?}");
            }
            // Nominal schedule 1s, 2s, 4s with +-20% jitter.
            assert!((800..=1200).contains(&delays[0]));
            assert!((1600..=2400).contains(&delays[1]));
            assert!((3200..=4800).contains(&delays[2]));
        }
    }

    #[test]
    fn mock_serves_in_order_then_exhausts() {
        let mock = MockClient::from_script(vec!["one", "two"]);
        let req = ChatRequest::new("s", "u");
        assert_eq!(mock.complete(&req).unwrap().content, "one");
        assert_eq!(mock.complete(&req).unwrap().content, "two");
        assert!(matches!(
            mock.complete(&req),
            Err(Error::ScriptExhausted { served: 2 })
        ));
        assert_eq!(mock.requests().len(), 3);
    }

    #[test]
    fn config_debug_redacts_api_key() {
        let cfg = ClientConfig::new("http://localhost:9", "m").with_api_key("TOPSECRET123");
        let shown = format!("{cfg:?}");
        assert!(!shown.contains("TOPSECRET123"));
        assert!(shown.contains("<redacted>"));
    }

    #[test]
    fn config_validation() {
        assert!(ClientConfig::new("", "m").validate().is_err());
        let mut cfg = ClientConfig::new("http://x", "m");
        cfg.temperature = -0.1;
        assert!(cfg.validate().is_err());
        cfg.temperature = 0.0;
        assert!(cfg.validate().is_ok());
    }
}
