//! Task verification and run-level metrics.

pub mod lifelong;
pub mod metrics;
pub mod record;
pub mod report;
pub mod verify;

pub use lifelong::{compute_lifelong_metrics, compute_transfer_validation, LifelongMetrics, PerformanceMatrix, TransferValidation};
pub use metrics::{compute_core_metrics, compute_efficiency, stugpa, CoreMetrics, StuGpa, StuGpaInputs};
pub use record::{FailureReason, OutcomeRecord, SquanderedBooking};
pub use report::{ReportBundle, RunMeta};
pub use verify::{evaluate_trigger_window, verify_task, Verdict, VerifyError};
