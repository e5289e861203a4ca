//! Minimal chat-completions client: plain JSON over HTTP, no vendor SDK.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

fn default_token_env() -> String {
    "DERIVKIT_API_TOKEN".to_string()
}
fn default_timeout() -> f64 {
    60.0
}
fn default_retries() -> u32 {
    2
}
fn default_concurrency() -> usize {
    4
}
fn default_backoff() -> u64 {
    500
}

/// Where and how to query a model. Read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndpointConfig {
    /// API root; requests go to `{base_url}/chat/completions`.
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    #[serde(default = "default_token_env")]
    pub token_env: String,
    #[serde(default)]
    pub temperature: f64,
    /// Per-request timeout in seconds.
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    /// Extra attempts after a 5xx response.
    #[serde(default = "default_retries")]
    pub max_retries: u32,
    /// Requests in flight at once.
    #[serde(default = "default_concurrency")]
    pub concurrency: usize,
    /// Pause before retry `k` is `k * retry_backoff_ms`.
    #[serde(default = "default_backoff")]
    pub retry_backoff_ms: u64,
}

impl EndpointConfig {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> EndpointConfig {
        EndpointConfig {
            base_url: base_url.into(),
            model: model.into(),
            token_env: default_token_env(),
            temperature: 0.0,
            timeout_secs: default_timeout(),
            max_retries: default_retries(),
            concurrency: default_concurrency(),
            retry_backoff_ms: default_backoff(),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 || self.timeout_secs.is_infinite() {
            return Err("timeout_secs must be positive".into());
        }
        if self.concurrency == 0 {
            return Err("concurrency must be at least 1".into());
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err("temperature must be a non-negative number".into());
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("environment variable {0} is not set")]
    MissingToken(String),
    #[error("authentication failed (HTTP {0})")]
    Auth(u16),
    #[error("request timed out")]
    Timeout,
    #[error("malformed response: {0}")]
    Malformed(String),
    #[error("HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
}

impl ClientError {
    /// Stable short name used in error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            ClientError::MissingToken(_) => "missing_token",
            ClientError::Auth(_) => "auth",
            ClientError::Timeout => "timeout",
            ClientError::Malformed(_) => "malformed",
            ClientError::Http { .. } => "http",
            ClientError::Transport(_) => "transport",
        }
    }
}

fn from_ureq(e: ureq::Error) -> ClientError {
    match e {
        ureq::Error::Timeout(_) => ClientError::Timeout,
        ureq::Error::Io(io)
            if matches!(io.kind(), std::io::ErrorKind::TimedOut | std::io::ErrorKind::WouldBlock) =>
        {
            ClientError::Timeout
        }
        other => ClientError::Transport(other.to_string()),
    }
}

/// The request body sent for `prompt`.
pub fn request_body(cfg: &EndpointConfig, prompt: &str) -> Value {
    json!({
        "model": cfg.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": cfg.temperature,
    })
}

/// Text of the first choice of a chat-completions response.
pub fn first_choice(body: &str) -> Result<String, ClientError> {
    let v: Value = serde_json::from_str(body).map_err(|e| ClientError::Malformed(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| ClientError::Malformed("no choices[0].message.content".into()))
}

pub struct Client {
    agent: ureq::Agent,
    cfg: EndpointConfig,
    token: String,
    url: String,
}

impl Client {
    /// Client with the token read from `cfg.token_env`.
    pub fn new(cfg: EndpointConfig) -> Result<Client, ClientError> {
        let token = std::env::var(&cfg.token_env).map_err(|_| ClientError::MissingToken(cfg.token_env.clone()))?;
        Ok(Client::with_token(cfg, token))
    }

    pub fn with_token(cfg: EndpointConfig, token: impl Into<String>) -> Client {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(cfg.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        let url = format!("{}/chat/completions", cfg.base_url.trim_end_matches('/'));
        Client {
            agent,
            cfg,
            token: token.into(),
            url,
        }
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.cfg
    }

    /// Send one prompt. 5xx responses are retried up to `max_retries`
    /// times; everything else is returned at once.
    pub fn complete(&self, prompt: &str) -> Result<String, ClientError> {
        let body = request_body(&self.cfg, prompt);
        let mut attempt = 0;
        loop {
            let resp = self
                .agent
                .post(&self.url)
                .header("Authorization", format!("Bearer {}", self.token))
                .send_json(&body)
                .map_err(from_ureq)?;
            let status = resp.status().as_u16();
            let text = resp.into_body().read_to_string().map_err(from_ureq)?;
            match status {
                200..=299 => return first_choice(&text),
                401 | 403 => return Err(ClientError::Auth(status)),
                500..=599 if attempt < self.cfg.max_retries => {
                    attempt += 1;
                    log::info!("HTTP {status}, retry {attempt} of {}", self.cfg.max_retries);
                    std::thread::sleep(Duration::from_millis(self.cfg.retry_backoff_ms * attempt as u64));
                }
                _ => return Err(ClientError::Http { status, body: text }),
            }
        }
    }
}

/// One completion for `prompt` with the token from the environment.
pub fn query_model(cfg: &EndpointConfig, prompt: &str) -> Result<String, ClientError> {
    Client::new(cfg.clone())?.complete(prompt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn body_has_zero_temperature() {
        let cfg = EndpointConfig::new("http://x", "m");
        let b = request_body(&cfg, "hi");
        assert_eq!(b["temperature"], json!(0.0));
        assert_eq!(b["messages"][0]["role"], "user");
        assert_eq!(b["messages"][0]["content"], "hi");
    }

    #[test]
    fn first_choice_parsing() {
        let ok = r#"{"choices":[{"message":{"role":"assistant","content":"a = b"}}]}"#;
        assert_eq!(first_choice(ok).unwrap(), "a = b");
        assert!(matches!(first_choice("{}"), Err(ClientError::Malformed(_))));
        assert!(matches!(first_choice("nope"), Err(ClientError::Malformed(_))));
    }

    #[test]
    fn endpoint_defaults_from_toml() {
        let cfg: EndpointConfig = toml::from_str("base_url = \"http://h/v1\"\nmodel = \"m\"").unwrap();
        assert_eq!(cfg.temperature, 0.0);
        assert_eq!(cfg, EndpointConfig::new("http://h/v1", "m"));
        assert!(toml::from_str::<EndpointConfig>("base_url = \"x\"\nmodel = \"m\"\ntemp = 1").is_err());
    }
}
