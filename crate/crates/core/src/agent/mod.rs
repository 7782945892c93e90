//! The policy boundary: what an agent sees and how it answers.

pub mod action;
pub mod presets;
pub mod remote;
pub mod replay;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::time::TimePoint;

pub use action::{parse_action, render_action, AgentAction, ArgValue, ParseError};
pub use remote::{RemoteAgent, RemoteConfig};
pub use replay::{ReplayAgent, ReplayScript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Environment,
    Agent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversationTurn {
    pub role: Role,
    pub text: String,
    pub clock_at: TimePoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_count: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_ms: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AgentReply {
    pub text: String,
    pub tokens_in: Option<u64>,
    pub tokens_out: Option<u64>,
    pub latency_ms: Option<u64>,
}

impl AgentReply {
    pub fn text(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("replay script has no response for task {task_id} turn {turn}")]
    Exhausted { task_id: String, turn: usize },
    #[error("agent transport failure: {0}")]
    Transport(String),
    #[error("agent precondition violated: {0}")]
    Precondition(String),
}

pub trait Agent {
    /// Produces the next raw response for `task_id` given the task's
    /// transcript so far, which must end with an environment turn.
    fn step(&mut self, task_id: &str, transcript: &[ConversationTurn]) -> Result<AgentReply, AgentError>;

    fn describe(&self) -> String;
}

/// Checks the alternation contract shared by every agent.
pub fn check_transcript(transcript: &[ConversationTurn]) -> Result<(), AgentError> {
    match transcript.last() {
        None => Err(AgentError::Precondition("transcript is empty".into())),
        Some(t) if t.role != Role::Environment => Err(AgentError::Precondition(
            "transcript must end with an environment turn".into(),
        )),
        _ => Ok(()),
    }
}
