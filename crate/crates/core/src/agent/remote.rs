//! Client for a chat-completions style HTTP endpoint.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{check_transcript, Agent, AgentError, AgentReply, ConversationTurn, Role};

pub const API_KEY_ENV: &str = "STULIFE_API_KEY";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemoteConfig {
    pub base_url: String,
    pub model: String,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_retries")]
    pub retries: u32,
}

fn default_timeout() -> u64 {
    60
}

fn default_retries() -> u32 {
    2
}

pub struct RemoteAgent {
    config: RemoteConfig,
    system_prompt: String,
    api_key: Option<String>,
    http: ureq::Agent,
}

impl RemoteAgent {
    /// Reads the API key from `STULIFE_API_KEY` if set.
    pub fn new(config: RemoteConfig, system_prompt: impl Into<String>) -> Self {
        let api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        Self::with_key(config, system_prompt, api_key)
    }

    pub fn with_key(config: RemoteConfig, system_prompt: impl Into<String>, api_key: Option<String>) -> Self {
        let http_config = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs.max(1))))
            .http_status_as_error(false)
            .build();
        Self {
            config,
            system_prompt: system_prompt.into(),
            api_key,
            http: ureq::Agent::new_with_config(http_config),
        }
    }

    fn request_body(&self, transcript: &[ConversationTurn]) -> Value {
        let mut messages = vec![json!({"role": "system", "content": self.system_prompt})];
        messages.extend(transcript.iter().map(|t| {
            let role = match t.role {
                Role::Environment => "user",
                Role::Agent => "assistant",
            };
            json!({"role": role, "content": t.text})
        }));
        json!({"model": self.config.model, "messages": messages, "temperature": 0})
    }

    fn attempt(&self, body: &Value) -> Result<Value, (bool, String)> {
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let mut req = self.http.post(&url).header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(body).map_err(|e| (true, e.to_string()))?;
        let status = resp.status().as_u16();
        if status == 429 || status >= 500 {
            return Err((true, format!("endpoint returned HTTP {status}")));
        }
        if status >= 400 {
            let detail = resp.body_mut().read_to_string().unwrap_or_default();
            return Err((false, format!("endpoint returned HTTP {status}: {}", detail.chars().take(200).collect::<String>())));
        }
        resp.body_mut().read_json::<Value>().map_err(|e| (false, format!("malformed response: {e}")))
    }
}

impl Agent for RemoteAgent {
    fn step(&mut self, _task_id: &str, transcript: &[ConversationTurn]) -> Result<AgentReply, AgentError> {
        check_transcript(transcript)?;
        let body = self.request_body(transcript);
        let started = Instant::now();
        let mut last = String::new();
        for attempt in 0..=self.config.retries {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(100 * attempt as u64));
            }
            match self.attempt(&body) {
                Ok(v) => {
                    let text = v
                        .pointer("/choices/0/message/content")
                        .and_then(Value::as_str)
                        .ok_or_else(|| AgentError::Transport("response has no choices[0].message.content".into()))?;
                    return Ok(AgentReply {
                        text: text.to_string(),
                        tokens_in: v.pointer("/usage/prompt_tokens").and_then(Value::as_u64),
                        tokens_out: v.pointer("/usage/completion_tokens").and_then(Value::as_u64),
                        latency_ms: Some(started.elapsed().as_millis() as u64),
                    });
                }
                Err((retryable, msg)) => {
                    tracing::warn!(attempt, %msg, "remote agent call failed");
                    last = msg;
                    if !retryable {
                        break;
                    }
                }
            }
        }
        Err(AgentError::Transport(last))
    }

    fn describe(&self) -> String {
        format!("remote:{}", self.config.model)
    }
}
