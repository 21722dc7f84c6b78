//! HTTP completion backend.
//!
//! Talks to an OpenAI-style completions endpoint: a JSON POST carrying
//! `{model, prompt-or-messages, temperature, max_tokens}` with a bearer
//! token read from an environment variable. The response text is pulled
//! out via a configurable dot path (e.g. `choices.0.message.content`),
//! so differently shaped APIs work without code changes.
//!
//! Transport failures and 429/5xx responses are retried with exponential
//! backoff (`backoff_base_ms * 2^attempt`, default 1s/2s/4s); other
//! non-2xx statuses fail immediately with the body preserved.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{CompletionBackend, GatewayError};
use crate::domain::GenerationParams;

/// How the prompt is placed in the request body.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptShape {
    /// `{"prompt": "..."}` (legacy completions APIs).
    Prompt,
    /// `{"messages": [{"role": "user", "content": "..."}]}`.
    #[default]
    Messages,
}

/// Configuration of an HTTP backend.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HttpBackendConfig {
    /// Full URL of the completions endpoint.
    pub url: String,
    /// Environment variable holding the bearer token; unset means no
    /// auth header. The token itself never appears in config files.
    #[serde(default)]
    pub auth_env: Option<String>,
    #[serde(default)]
    pub prompt_shape: PromptShape,
    /// Dot path to the response text inside the response JSON.
    #[serde(default = "default_response_path")]
    pub response_path: String,
    /// Retries after the initial attempt, on transport errors and 429/5xx.
    #[serde(default = "default_retries")]
    pub retries: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_base_ms: u64,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    /// Identifier mixed into cache keys; defaults to the URL.
    #[serde(default)]
    pub id: Option<String>,
}

fn default_response_path() -> String {
    "choices.0.message.content".to_string()
}

fn default_retries() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    1000
}

fn default_timeout_secs() -> u64 {
    120
}

impl HttpBackendConfig {
    pub fn new(url: impl Into<String>) -> Self {
        HttpBackendConfig {
            url: url.into(),
            auth_env: None,
            prompt_shape: PromptShape::default(),
            response_path: default_response_path(),
            retries: default_retries(),
            backoff_base_ms: default_backoff_ms(),
            timeout_secs: default_timeout_secs(),
            id: None,
        }
    }
}

pub struct HttpBackend {
    config: HttpBackendConfig,
    auth_token: Option<String>,
    agent: ureq::Agent,
    backend_id: String,
}

impl HttpBackend {
    pub fn new(config: HttpBackendConfig) -> Result<Self, GatewayError> {
        let auth_token = match &config.auth_env {
            Some(var) => Some(std::env::var(var).map_err(|_| GatewayError::Backend {
                status: None,
                body: format!("auth environment variable {var} is not set"),
            })?),
            None => None,
        };
        let agent_config = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build();
        let backend_id = config.id.clone().unwrap_or_else(|| config.url.clone());
        Ok(HttpBackend {
            config,
            auth_token,
            agent: ureq::Agent::new_with_config(agent_config),
            backend_id,
        })
    }

    fn request_body(&self, prompt: &str, params: &GenerationParams) -> Value {
        let mut body = json!({
            "model": params.model_name,
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
        });
        match self.config.prompt_shape {
            PromptShape::Prompt => body["prompt"] = json!(prompt),
            PromptShape::Messages => {
                body["messages"] = json!([{ "role": "user", "content": prompt }])
            }
        }
        if let Some(seed) = params.seed {
            body["seed"] = json!(seed);
        }
        body
    }

    fn extract_text(&self, body_text: &str) -> Result<String, GatewayError> {
        let root: Value = serde_json::from_str(body_text).map_err(|e| GatewayError::Backend {
            status: None,
            body: format!("response is not JSON ({e}): {body_text}"),
        })?;
        let mut node = &root;
        for segment in self.config.response_path.split('.') {
            node = match segment.parse::<usize>() {
                Ok(idx) => node.get(idx),
                Err(_) => node.get(segment),
            }
            .ok_or_else(|| GatewayError::Backend {
                status: None,
                body: format!(
                    "response path {:?} missing at {segment:?}: {body_text}",
                    self.config.response_path
                ),
            })?;
        }
        node.as_str()
            .map(str::to_string)
            .ok_or_else(|| GatewayError::Backend {
                status: None,
                body: format!(
                    "response path {:?} is not a string: {body_text}",
                    self.config.response_path
                ),
            })
    }

    fn send_once(&self, body: &Value) -> Result<(u16, String), ureq::Error> {
        let mut request = self.agent.post(&self.config.url);
        if let Some(token) = &self.auth_token {
            request = request.header("Authorization", &format!("Bearer {token}"));
        }
        let mut response = request.send_json(body)?;
        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string()?;
        Ok((status, text))
    }
}

impl CompletionBackend for HttpBackend {
    fn id(&self) -> &str {
        &self.backend_id
    }

    fn complete(
        &self,
        prompt: &str,
        params: &GenerationParams,
        _sample_index: u32,
    ) -> Result<String, GatewayError> {
        let body = self.request_body(prompt, params);
        let mut attempt: u32 = 0;
        loop {
            let outcome = self.send_once(&body);
            attempt += 1;
            let retryable = match &outcome {
                Ok((status, _)) => *status == 429 || (500..600).contains(&(*status as i32)),
                Err(_) => true,
            };
            if retryable && attempt <= self.config.retries {
                let backoff = self.config.backoff_base_ms << (attempt - 1);
                std::thread::sleep(Duration::from_millis(backoff));
                continue;
            }
            return match outcome {
                Ok((status, text)) if (200..300).contains(&status) => self.extract_text(&text),
                Ok((status, text)) => Err(GatewayError::Backend {
                    status: Some(status),
                    body: text,
                }),
                Err(e) => Err(GatewayError::Network {
                    attempts: attempt,
                    message: e.to_string(),
                }),
            };
        }
    }
}
