//! OpenAI-compatible completions client.
//!
//! `POST {base_url}/completions` with `{model, prompt, max_tokens,
//! temperature, top_p}`; the answer is `choices[0].text`.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;
use ureq::Agent;

use super::{Backend, BackendError, BackendResponse, GenerationParams};

/// Environment variable that overrides the configured API key.
pub const API_KEY_ENV: &str = "RBAM_API_KEY";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HttpSettings {
    pub base_url: String,
    pub model: String,
    #[serde(default, skip_serializing)]
    pub api_key: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_seconds: f64,
}

fn default_timeout() -> f64 {
    60.0
}

pub struct HttpBackend {
    settings: HttpSettings,
    agent: Agent,
    id: String,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    text: String,
}

impl HttpBackend {
    pub fn new(mut settings: HttpSettings) -> Self {
        if let Ok(key) = std::env::var(API_KEY_ENV) {
            if !key.is_empty() {
                settings.api_key = Some(key);
            }
        }
        let agent: Agent = Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs_f64(settings.timeout_seconds.max(0.001))))
            .build()
            .into();
        let id = format!("http:{}", settings.model);
        Self { settings, agent, id }
    }

    fn url(&self, path: &str) -> String {
        format!("{}/{}", self.settings.base_url.trim_end_matches('/'), path)
    }

    /// Request body. Without sampling the temperature is sent as zero, since
    /// the completions protocol has no separate greedy switch.
    pub fn request_body(&self, prompt: &str, params: &GenerationParams) -> serde_json::Value {
        let temperature = if params.sampling_enabled { params.temperature } else { 0.0 };
        json!({
            "model": self.settings.model,
            "prompt": prompt,
            "max_tokens": params.max_new_tokens,
            "temperature": temperature,
            "top_p": params.top_p,
        })
    }
}

fn transport(err: ureq::Error) -> BackendError {
    match err {
        ureq::Error::Timeout(_) => BackendError::Timeout,
        other => BackendError::Transport(other.to_string()),
    }
}

impl Backend for HttpBackend {
    fn id(&self) -> &str {
        &self.id
    }

    fn complete(&self, prompt: &str, params: &GenerationParams) -> Result<BackendResponse, BackendError> {
        if prompt.is_empty() {
            return Err(BackendError::InvalidRequest("empty prompt".into()));
        }
        let body = serde_json::to_vec(&self.request_body(prompt, params))
            .map_err(|e| BackendError::InvalidRequest(e.to_string()))?;
        let mut request = self
            .agent
            .post(&self.url("completions"))
            .header("Content-Type", "application/json");
        if let Some(key) = &self.settings.api_key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }

        let start = Instant::now();
        let mut response = request.send(&body[..]).map_err(transport)?;
        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string().map_err(transport)?;
        let latency_seconds = start.elapsed().as_secs_f64();

        if !(200..300).contains(&status) {
            let mut body = text;
            body.truncate(512);
            return Err(BackendError::Status { status, body });
        }
        let parsed: CompletionResponse =
            serde_json::from_str(&text).map_err(|e| BackendError::Malformed(e.to_string()))?;
        let first = parsed
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| BackendError::Malformed("no choices".into()))?;
        Ok(BackendResponse {
            raw_text: first.text,
            latency_seconds,
            backend_id: self.id.clone(),
            cached: false,
        })
    }

    /// Any HTTP answer from `{base_url}/models` counts as reachable.
    fn probe(&self) -> Result<(), BackendError> {
        let mut request = self.agent.get(&self.url("models"));
        if let Some(key) = &self.settings.api_key {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        request.call().map(|_| ()).map_err(transport)
    }
}
