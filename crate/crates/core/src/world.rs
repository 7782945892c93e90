//! The single persistent world container, its clock, and checkpoints.

use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::calendar::CalendarStore;
use crate::comms::{Bibliography, Directory, EmailLog, LibraryCatalog};
use crate::courses::CourseStore;
use crate::error::ToolResult;
use crate::map::{BuildingId, CampusMap};
use crate::reservation::ReservationStore;
use crate::time::TimePoint;

pub const SCHEMA_VERSION: &str = "1.0";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WorldError {
    #[error("clock regression: cannot move from {from} back to {to}")]
    ClockRegression { from: TimePoint, to: TimePoint },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub clock: TimePoint,
    pub location: BuildingId,
    pub map: Arc<CampusMap>,
    pub calendars: CalendarStore,
    pub courses: CourseStore,
    pub reservations: ReservationStore,
    pub emails: EmailLog,
    pub bibliography: Arc<Bibliography>,
    pub directory: Arc<Directory>,
    pub library: Arc<LibraryCatalog>,
    pub rng_seed: u64,
    pub event_counter: u64,
}

impl WorldState {
    /// Moves the clock forward. Crossing into a new day sends the agent back
    /// to the default start building. Returns whether the day changed.
    pub fn advance_clock(&mut self, to: TimePoint) -> Result<bool, WorldError> {
        if to < self.clock {
            return Err(WorldError::ClockRegression { from: self.clock, to });
        }
        let new_day = !to.same_day(self.clock);
        self.clock = to;
        if new_day {
            self.location = self.map.default_start_building().clone();
        }
        Ok(new_day)
    }

    /// Re-validates the route and moves along it. Walking takes no time.
    pub fn walk_to(&mut self, path: &[BuildingId]) -> ToolResult<()> {
        self.map.validate_walk(&self.location, path)?;
        self.location = path.last().expect("validated non-empty").clone();
        let (loc, now) = (self.location.clone(), self.clock);
        self.reservations.mark_used(&loc, now);
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint schema version {found} is not supported (expected {expected})")]
    Version { found: String, expected: &'static str },
    #[error("checkpoint integrity check failed: {0}")]
    Integrity(String),
    #[error("checkpoint is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// A resumable snapshot of a run. `outcome_log` carries whatever the
/// controller needs to rebuild its progress.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint<L> {
    pub schema_version: String,
    pub run_id: String,
    pub dataset_hash: String,
    pub run_cursor: usize,
    pub world: WorldState,
    pub outcome_log: L,
}

fn digest_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Serializes any value as compact JSON with keys in sorted order.
pub fn canonical_json<T: Serialize>(value: &T) -> serde_json::Result<String> {
    Ok(serde_json::to_value(value)?.to_string())
}

impl<L: Serialize + DeserializeOwned> Checkpoint<L> {
    pub fn snapshot(run_id: &str, dataset_hash: &str, world: &WorldState, run_cursor: usize, log: L) -> Self {
        Self {
            schema_version: SCHEMA_VERSION.to_string(),
            run_id: run_id.to_string(),
            dataset_hash: dataset_hash.to_string(),
            run_cursor,
            world: world.clone(),
            outcome_log: log,
        }
    }

    /// Canonical, checksummed, newline-terminated text form.
    pub fn to_text(&self) -> serde_json::Result<String> {
        let mut value = serde_json::to_value(self)?;
        let sum = digest_hex(value.to_string().as_bytes());
        value
            .as_object_mut()
            .expect("checkpoint serializes as an object")
            .insert("checksum".into(), sum.into());
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_text(text: &str) -> Result<Self, CheckpointError> {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| CheckpointError::Integrity("top level is not an object".into()))?;
        let found = obj.get("schema_version").and_then(|v| v.as_str()).unwrap_or("<missing>");
        if found != SCHEMA_VERSION {
            return Err(CheckpointError::Version {
                found: found.to_string(),
                expected: SCHEMA_VERSION,
            });
        }
        let stored = obj
            .remove("checksum")
            .and_then(|v| v.as_str().map(str::to_string))
            .ok_or_else(|| CheckpointError::Integrity("missing checksum".into()))?;
        let actual = digest_hex(value.to_string().as_bytes());
        if stored != actual {
            return Err(CheckpointError::Integrity(format!("checksum {stored} does not match content {actual}")));
        }
        Ok(serde_json::from_value(value)?)
    }

    pub fn file_name(&self) -> String {
        format!("checkpoint_{}_{}.json", self.run_id, self.run_cursor)
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use crate::map::fixtures::small_map;

    pub fn world() -> WorldState {
        let map = Arc::new(small_map());
        WorldState {
            clock: "Week 0, Monday, 10:00".parse().unwrap(),
            location: map.default_start_building().clone(),
            map,
            calendars: CalendarStore::new(),
            courses: CourseStore::default(),
            reservations: ReservationStore::default(),
            emails: EmailLog::default(),
            bibliography: Arc::new(Bibliography::default()),
            directory: Arc::new(Directory::default()),
            library: Arc::new(LibraryCatalog::default()),
            rng_seed: 42,
            event_counter: 0,
        }
    }
}
