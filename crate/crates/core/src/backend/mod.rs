//! Completion backends.
//!
//! All backends implement [`Backend`] and are callable from several threads
//! at once. [`Retry`] wraps any backend with the retry policy; the runner uses
//! it for the HTTP client.

mod http;
mod mock;
mod replay;

use std::fmt;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use http::{HttpBackend, HttpSettings};
pub use mock::{MockBackend, MockScript};
pub use replay::{CacheEntry, ReplayBackend};

/// Decoding parameters. The defaults are greedy decoding with a one-token
/// budget; temperature and top-p only matter once sampling is enabled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationParams {
    pub temperature: f64,
    pub top_p: f64,
    pub sampling_enabled: bool,
    pub max_new_tokens: u32,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self {
            temperature: 0.7,
            top_p: 1.0,
            sampling_enabled: false,
            max_new_tokens: 1,
        }
    }
}

impl GenerationParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.max_new_tokens < 1 {
            return Err("max_new_tokens must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.top_p) {
            return Err(format!("top_p must lie in [0, 1], got {}", self.top_p));
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(format!("temperature must be non-negative, got {}", self.temperature));
        }
        Ok(())
    }

    /// Stable textual form used for cache keys.
    pub fn canonical(&self) -> String {
        // -0.0 and 0.0 hash alike.
        let norm = |x: f64| if x == 0.0 { 0.0 } else { x };
        format!(
            "temperature={:?};top_p={:?};sampling_enabled={};max_new_tokens={}",
            norm(self.temperature),
            norm(self.top_p),
            self.sampling_enabled,
            self.max_new_tokens
        )
    }
}

/// Content hash of a prompt and its decoding parameters, hex encoded.
pub fn record_replay_key(prompt: &str, params: &GenerationParams) -> String {
    let mut hasher = Sha256::new();
    hasher.update(b"rbam-cache-v1\0");
    hasher.update((prompt.len() as u64).to_le_bytes());
    hasher.update(prompt.as_bytes());
    hasher.update(params.canonical().as_bytes());
    hex::encode(hasher.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendResponse {
    /// The generation, untrimmed.
    pub raw_text: String,
    pub latency_seconds: f64,
    pub backend_id: String,
    /// Served from the replay cache; `latency_seconds` is then the latency
    /// recorded when the entry was written.
    pub cached: bool,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BackendError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("request timed out")]
    Timeout,
    #[error("server answered HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("prompt not found in replay cache")]
    CacheMiss,
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("cache write failed: {0}")]
    Cache(String),
}

impl BackendError {
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            BackendError::Transport(_)
                | BackendError::Timeout
                | BackendError::Status { .. }
                | BackendError::Malformed(_)
        )
    }
}

pub trait Backend: Send + Sync {
    fn id(&self) -> &str;

    fn complete(&self, prompt: &str, params: &GenerationParams) -> Result<BackendResponse, BackendError>;

    /// Cheap reachability check run before a batch starts.
    fn probe(&self) -> Result<(), BackendError> {
        Ok(())
    }
}

impl<B: Backend + ?Sized> Backend for Arc<B> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn complete(&self, prompt: &str, params: &GenerationParams) -> Result<BackendResponse, BackendError> {
        (**self).complete(prompt, params)
    }

    fn probe(&self) -> Result<(), BackendError> {
        (**self).probe()
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn id(&self) -> &str {
        (**self).id()
    }

    fn complete(&self, prompt: &str, params: &GenerationParams) -> Result<BackendResponse, BackendError> {
        (**self).complete(prompt, params)
    }

    fn probe(&self) -> Result<(), BackendError> {
        (**self).probe()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    /// Total attempts, the first call included.
    pub attempts: u32,
    pub initial_backoff_seconds: f64,
    pub multiplier: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            attempts: 3,
            initial_backoff_seconds: 1.0,
            multiplier: 2.0,
        }
    }
}

impl RetryPolicy {
    /// Sleep before attempt `n + 1`, for `n` starting at 1.
    pub fn backoff(&self, n: u32) -> Duration {
        let secs = self.initial_backoff_seconds * self.multiplier.powi(n.saturating_sub(1) as i32);
        Duration::from_secs_f64(secs.max(0.0))
    }
}

/// Retries retryable failures of the inner backend with exponential backoff.
pub struct Retry<B> {
    inner: B,
    policy: RetryPolicy,
}

impl<B: Backend> Retry<B> {
    pub fn new(inner: B, policy: RetryPolicy) -> Self {
        Self { inner, policy }
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<B: Backend> Backend for Retry<B> {
    fn id(&self) -> &str {
        self.inner.id()
    }

    fn complete(&self, prompt: &str, params: &GenerationParams) -> Result<BackendResponse, BackendError> {
        let attempts = self.policy.attempts.max(1);
        let mut attempt = 1;
        loop {
            match self.inner.complete(prompt, params) {
                Err(e) if e.is_retryable() && attempt < attempts => {
                    log::debug!("attempt {attempt}/{attempts} failed: {e}");
                    thread::sleep(self.policy.backoff(attempt));
                    attempt += 1;
                }
                other => return other,
            }
        }
    }

    fn probe(&self) -> Result<(), BackendError> {
        self.inner.probe()
    }
}

impl fmt::Debug for dyn Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Backend({})", self.id())
    }
}
