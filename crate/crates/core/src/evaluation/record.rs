use serde::{Deserialize, Serialize};

use crate::task::{Scenario, TaskFlags};
use crate::time::TimePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureReason {
    WrongAnswer,
    NoAnswer,
    PathMismatch,
    BookingMismatch,
    EmailMismatch,
    RegistrationMismatch,
    CalendarMismatch,
    StoodUp,
    Absent,
    TurnLimit,
    AgentExhausted,
    AgentError,
    DependencyFailed,
}

impl FailureReason {
    pub fn label(self) -> &'static str {
        use FailureReason::*;
        match self {
            WrongAnswer => "wrong_answer",
            NoAnswer => "no_answer",
            PathMismatch => "path_mismatch",
            BookingMismatch => "booking_mismatch",
            EmailMismatch => "email_mismatch",
            RegistrationMismatch => "registration_mismatch",
            CalendarMismatch => "calendar_mismatch",
            StoodUp => "stood_up",
            Absent => "absent",
            TurnLimit => "turn_limit",
            AgentExhausted => "agent_exhausted",
            AgentError => "agent_error",
            DependencyFailed => "dependency_failed",
        }
    }
}

/// The graded result of one task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub task_id: String,
    pub index: usize,
    pub scenario: Scenario,
    pub flags: TaskFlags,
    pub clock_at_start: TimePoint,
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<FailureReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    pub turns: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens_in: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens_out: Option<u64>,
    /// Sum of reported per-call latencies; wall-clock dependent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub latency_samples: Option<u64>,
    pub dependency_failed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_ancestor: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub soft_dependency_failures: Vec<String>,
    /// Whether the agent was where the task required, when it required it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub presence_ok: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub proactive_success: Option<bool>,
    pub broken_commitment: bool,
    /// Distance in tasks to the task that introduced the recalled knowledge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_distance: Option<u32>,
}

impl OutcomeRecord {
    pub fn attended(&self) -> bool {
        self.presence_ok.unwrap_or(self.success)
    }
}

/// A booking that ended without the agent showing up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquanderedBooking {
    pub booking_id: String,
    pub task_id: String,
    pub judged_at: TimePoint,
}
