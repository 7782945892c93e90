use thiserror::Error;

use crate::time::TimeError;

/// A failed tool invocation. These never abort a run: the controller renders
/// them back to the agent as the observation for that turn.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ToolError {
    #[error("Not found: {0}")]
    NotFound(String),
    #[error("Ambiguous: {0}")]
    Ambiguous(String),
    #[error("Usage error: {0}")]
    Usage(String),
    #[error("Permission denied: {0}")]
    Permission(String),
    #[error("Invalid time: {0}")]
    Time(#[from] TimeError),
    #[error("Precondition failed: {0}")]
    Precondition(String),
    #[error("Invalid path: {0}")]
    InvalidPath(String),
    #[error("No path: {0}")]
    NoPath(String),
    #[error("Booking conflict: {0}")]
    Conflict(String),
    #[error("Unavailable: {0}")]
    Unavailable(String),
    #[error("Insufficient passes: {0}")]
    Inventory(String),
    #[error("{0}")]
    Redirect(String),
    #[error("Tool not available: {0}")]
    NotAvailable(String),
}

pub type ToolResult<T> = Result<T, ToolError>;
