//! Multi-identity calendars with per-identity access rights.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ToolError, ToolResult};
use crate::time::{TimePoint, TimeRange};

pub const SELF_CALENDAR: &str = "self";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermissionClass {
    Owner,
    AppendOnly,
    FreeBusy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalendarOp {
    Add,
    Remove,
    Update,
    View,
    FreeBusy,
}

impl CalendarOp {
    pub const ALL: [CalendarOp; 5] = [
        CalendarOp::Add,
        CalendarOp::Remove,
        CalendarOp::Update,
        CalendarOp::View,
        CalendarOp::FreeBusy,
    ];
}

impl PermissionClass {
    pub const ALL: [PermissionClass; 3] = [
        PermissionClass::Owner,
        PermissionClass::AppendOnly,
        PermissionClass::FreeBusy,
    ];

    pub fn allows(self, op: CalendarOp) -> bool {
        use CalendarOp::*;
        match self {
            PermissionClass::Owner => true,
            PermissionClass::AppendOnly => matches!(op, Add | View | FreeBusy),
            PermissionClass::FreeBusy => matches!(op, FreeBusy),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Event {
    pub event_id: String,
    pub title: String,
    pub location: String,
    pub time: TimeRange,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

/// Seed data for one event, as it appears in the dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventSeed {
    pub title: String,
    #[serde(default)]
    pub location: String,
    pub time: TimeRange,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

/// Fields accepted by `update_event`; absent fields are left untouched.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EventPatch {
    pub title: Option<String>,
    pub location: Option<String>,
    pub time: Option<TimeRange>,
    pub description: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Calendar {
    pub id: String,
    pub class: PermissionClass,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub email: Option<String>,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CalendarStore {
    calendars: BTreeMap<String, Calendar>,
}

impl Default for CalendarStore {
    fn default() -> Self {
        Self::new()
    }
}

pub fn format_event_id(n: u64) -> String {
    format!("event_{n:03}")
}

impl CalendarStore {
    pub fn new() -> Self {
        let mut calendars = BTreeMap::new();
        calendars.insert(
            SELF_CALENDAR.to_string(),
            Calendar {
                id: SELF_CALENDAR.to_string(),
                class: PermissionClass::Owner,
                email: None,
                events: Vec::new(),
            },
        );
        Self { calendars }
    }

    /// Registers a club or advisor calendar reachable by id or email.
    pub fn register(&mut self, id: &str, email: Option<&str>, class: PermissionClass) {
        self.calendars.entry(id.to_string()).or_insert_with(|| Calendar {
            id: id.to_string(),
            class,
            email: email.map(str::to_string),
            events: Vec::new(),
        });
    }

    fn key_for(&self, raw: &str) -> Option<&str> {
        let raw = raw.trim();
        if let Some((k, _)) = self.calendars.get_key_value(raw) {
            return Some(k);
        }
        self.calendars
            .values()
            .find(|c| {
                c.id.eq_ignore_ascii_case(raw)
                    || c.email.as_deref().is_some_and(|e| e.eq_ignore_ascii_case(raw))
            })
            .map(|c| c.id.as_str())
    }

    pub fn resolve(&self, raw: &str) -> ToolResult<&Calendar> {
        self.key_for(raw)
            .and_then(|k| self.calendars.get(k))
            .ok_or_else(|| ToolError::NotFound(format!("no calendar `{}`", raw.trim())))
    }

    pub fn class_of(&self, raw: &str) -> ToolResult<PermissionClass> {
        Ok(self.resolve(raw)?.class)
    }

    fn checked_mut(&mut self, raw: &str, op: CalendarOp) -> ToolResult<&mut Calendar> {
        let key = self
            .key_for(raw)
            .ok_or_else(|| ToolError::NotFound(format!("no calendar `{}`", raw.trim())))?
            .to_string();
        let cal = self.calendars.get_mut(&key).expect("key resolved above");
        deny_unless(cal, op)?;
        Ok(cal)
    }

    pub fn add_event(
        &mut self,
        raw: &str,
        seed: EventSeed,
        counter: &mut u64,
    ) -> ToolResult<String> {
        let cal = self.checked_mut(raw, CalendarOp::Add)?;
        *counter += 1;
        let event_id = format_event_id(*counter);
        cal.events.push(Event {
            event_id: event_id.clone(),
            title: seed.title,
            location: seed.location,
            time: seed.time,
            description: seed.description,
        });
        Ok(event_id)
    }

    /// Inserts dataset-provided events, bypassing the access check.
    pub fn seed_event(&mut self, raw: &str, seed: EventSeed, counter: &mut u64) -> ToolResult<String> {
        let key = self
            .key_for(raw)
            .ok_or_else(|| ToolError::NotFound(format!("no calendar `{raw}`")))?
            .to_string();
        *counter += 1;
        let event_id = format_event_id(*counter);
        self.calendars.get_mut(&key).unwrap().events.push(Event {
            event_id: event_id.clone(),
            title: seed.title,
            location: seed.location,
            time: seed.time,
            description: seed.description,
        });
        Ok(event_id)
    }

    pub fn remove_event(&mut self, raw: &str, event_id: &str) -> ToolResult<Event> {
        let cal = self.checked_mut(raw, CalendarOp::Remove)?;
        let pos = cal
            .events
            .iter()
            .position(|e| e.event_id == event_id.trim())
            .ok_or_else(|| ToolError::NotFound(format!("no event `{event_id}` in calendar {}", cal.id)))?;
        Ok(cal.events.remove(pos))
    }

    pub fn update_event(&mut self, raw: &str, event_id: &str, patch: EventPatch) -> ToolResult<Event> {
        let cal = self.checked_mut(raw, CalendarOp::Update)?;
        let cal_id = cal.id.clone();
        let ev = cal
            .events
            .iter_mut()
            .find(|e| e.event_id == event_id.trim())
            .ok_or_else(|| ToolError::NotFound(format!("no event `{event_id}` in calendar {cal_id}")))?;
        if let Some(t) = patch.title {
            ev.title = t;
        }
        if let Some(l) = patch.location {
            ev.location = l;
        }
        if let Some(t) = patch.time {
            ev.time = t;
        }
        if let Some(d) = patch.description {
            ev.description = Some(d);
        }
        Ok(ev.clone())
    }

    /// Events on `date`, ordered by start time then id.
    pub fn view_schedule(&self, raw: &str, date: TimePoint) -> ToolResult<Vec<Event>> {
        let cal = self.resolve(raw)?;
        if cal.class == PermissionClass::FreeBusy {
            return Err(ToolError::Redirect(format!(
                "Calendar {} only exposes free/busy information. Use calendar.query_advisor_availability instead.",
                cal.id
            )));
        }
        deny_unless(cal, CalendarOp::View)?;
        Ok(sorted_on(cal, date).into_iter().cloned().collect())
    }

    /// Busy intervals of any calendar the caller may query for free/busy.
    pub fn free_busy(&self, raw: &str, date: TimePoint) -> ToolResult<Vec<TimeRange>> {
        let cal = self.resolve(raw)?;
        deny_unless(cal, CalendarOp::FreeBusy)?;
        Ok(sorted_on(cal, date).into_iter().map(|e| e.time).collect())
    }

    /// Free/busy lookup restricted to advisor identities.
    pub fn query_advisor_availability(&self, advisor_id: &str, date: TimePoint) -> ToolResult<Vec<TimeRange>> {
        match self.calendars.get(advisor_id.trim()) {
            Some(cal) if cal.class == PermissionClass::FreeBusy => self.free_busy(advisor_id, date),
            _ => Err(ToolError::NotFound(format!("no advisor with id `{}`", advisor_id.trim()))),
        }
    }

    /// Unchecked read used by graders.
    pub fn events(&self, raw: &str) -> &[Event] {
        self.key_for(raw)
            .and_then(|k| self.calendars.get(k))
            .map_or(&[], |c| c.events.as_slice())
    }

    pub fn calendars(&self) -> impl Iterator<Item = &Calendar> {
        self.calendars.values()
    }
}

fn deny_unless(cal: &Calendar, op: CalendarOp) -> ToolResult<()> {
    if cal.class.allows(op) {
        return Ok(());
    }
    let what = match cal.class {
        PermissionClass::FreeBusy => "read-only (free/busy)",
        PermissionClass::AppendOnly => "append-only",
        PermissionClass::Owner => "owned",
    };
    Err(ToolError::Permission(format!(
        "calendar {} is {what}; {op:?} is not allowed",
        cal.id
    )))
}

fn sorted_on(cal: &Calendar, date: TimePoint) -> Vec<&Event> {
    let mut out: Vec<&Event> = cal
        .events
        .iter()
        .filter(|e| e.time.start().same_day(date))
        .collect();
    out.sort_by(|a, b| (a.time.start(), &a.event_id).cmp(&(b.time.start(), &b.event_id)));
    out
}
