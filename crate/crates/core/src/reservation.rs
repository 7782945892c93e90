//! Bookable spaces, availability generation and bookings.
//!
//! Availability is recomputed on every query rather than stored. When the
//! current task carries a [`TaskConstraintSpec`] for the queried location and
//! date, the listing is a puzzle with exactly one satisfying slot. Otherwise
//! it is filler drawn from a seeded RNG.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{ToolError, ToolResult};
use crate::map::BuildingId;
use crate::time::{TimePoint, TimeRange};

pub const FILLER_OPEN_HOUR: u16 = 8;
pub const FILLER_CLOSE_HOUR: u16 = 22;
pub const AGENT_IDENTITY: &str = "student";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BookableSpace {
    pub location_id: BuildingId,
    pub item_name: String,
    #[serde(default)]
    pub seats: Vec<String>,
    #[serde(default)]
    pub attributes: BTreeMap<String, String>,
}

impl BookableSpace {
    fn units(&self) -> Vec<Option<&str>> {
        if self.seats.is_empty() {
            vec![None]
        } else {
            self.seats.iter().map(|s| Some(s.as_str())).collect()
        }
    }

    /// The first required attribute this space fails, if any.
    pub fn violated_attribute<'a>(&self, required: &'a BTreeMap<String, String>) -> Option<&'a str> {
        required
            .iter()
            .find(|(k, v)| {
                self.attributes
                    .get(*k)
                    .is_none_or(|have| !have.trim().eq_ignore_ascii_case(v.trim()))
            })
            .map(|(k, _)| k.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AvailabilitySlot {
    pub location_id: BuildingId,
    pub item_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seat_id: Option<String>,
    pub time_slot: TimeRange,
    pub attributes: BTreeMap<String, String>,
}

/// Per-task booking requirement: one space, one window, a set of attributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskConstraintSpec {
    pub location_id: BuildingId,
    pub window: TimeRange,
    #[serde(default)]
    pub required_attributes: BTreeMap<String, String>,
    pub item_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seat_id: Option<String>,
}

/// Whether an emitted slot meets every stated requirement.
pub fn satisfies(slot: &AvailabilitySlot, spec: &TaskConstraintSpec) -> bool {
    slot.location_id == spec.location_id
        && spec.required_attributes.iter().all(|(k, v)| {
            slot.attributes
                .get(k)
                .is_some_and(|have| have.trim().eq_ignore_ascii_case(v.trim()))
        })
        && slot.time_slot.covers(&spec.window)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistractorKind {
    Attribute,
    Coverage,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Puzzle {
    pub slots: Vec<AvailabilitySlot>,
    /// Tag per emitted slot; `None` marks the ground-truth slot.
    pub tags: Vec<Option<DistractorKind>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BookingRecord {
    pub booking_id: String,
    pub who: String,
    pub location_id: BuildingId,
    pub item_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seat_id: Option<String>,
    pub time_slot: TimeRange,
    pub created_at: TimePoint,
    pub task_id: String,
    pub requires_use: bool,
    pub used: bool,
    pub judged: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BookingRequest<'a> {
    pub location_id: &'a str,
    pub item_name: &'a str,
    pub seat_id: Option<&'a str>,
    pub time_slot: TimeRange,
}

/// What the current task contributes to availability generation.
#[derive(Debug, Clone, Copy)]
pub struct QueryContext<'a> {
    pub seed: u64,
    pub task_id: &'a str,
    pub constraint: Option<&'a TaskConstraintSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReservationStore {
    spaces: Vec<BookableSpace>,
    bookings: Vec<BookingRecord>,
    booking_counter: u64,
}

fn rng_for(parts: &[&str]) -> ChaCha8Rng {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p.as_bytes());
    }
    ChaCha8Rng::from_seed(h.finalize().into())
}

fn shift(range: &TimeRange, start_delta: i32, end_delta: i32) -> Option<TimeRange> {
    let s = range.start().minute_of_day as i32 + start_delta;
    let e = range.end().minute_of_day as i32 + end_delta;
    if s < 0 || e > 24 * 60 - 1 || e <= s {
        return None;
    }
    TimeRange::on_day(range.date(), s as u16, e as u16).ok()
}

/// `range` minus every interval in `taken`, as ordered fragments.
fn subtract(range: TimeRange, taken: &[TimeRange]) -> Vec<TimeRange> {
    let mut pieces = vec![range];
    for t in taken {
        pieces = pieces
            .into_iter()
            .flat_map(|p| {
                if !p.overlaps(t) {
                    return vec![p];
                }
                let mut out = Vec::new();
                if p.start() < t.start() {
                    out.extend(TimeRange::new(p.start(), t.start()).ok());
                }
                if t.end() < p.end() {
                    out.extend(TimeRange::new(t.end(), p.end()).ok());
                }
                out
            })
            .collect();
    }
    pieces
}

impl ReservationStore {
    pub fn new(spaces: Vec<BookableSpace>) -> Self {
        Self {
            spaces,
            ..Default::default()
        }
    }

    pub fn spaces(&self) -> &[BookableSpace] {
        &self.spaces
    }

    pub fn bookings(&self) -> &[BookingRecord] {
        &self.bookings
    }

    pub fn find_space(&self, location_id: &str, item_name: &str) -> Option<&BookableSpace> {
        self.spaces.iter().find(|s| {
            s.location_id.as_str() == location_id.trim()
                && s.item_name.trim().eq_ignore_ascii_case(item_name.trim())
        })
    }

    fn taken(&self, location: &str, item: &str, seat: Option<&str>, date: TimePoint) -> Vec<TimeRange> {
        self.bookings
            .iter()
            .filter(|b| {
                b.location_id.as_str() == location
                    && b.item_name == item
                    && b.seat_id.as_deref() == seat
                    && b.time_slot.date() == date
            })
            .map(|b| b.time_slot)
            .collect()
    }

    fn slot(space: &BookableSpace, seat: Option<&str>, time_slot: TimeRange) -> AvailabilitySlot {
        AvailabilitySlot {
            location_id: space.location_id.clone(),
            item_name: space.item_name.clone(),
            seat_id: seat.map(str::to_string),
            time_slot,
            attributes: space.attributes.clone(),
        }
    }

    pub fn query_availability(
        &self,
        location_id: &str,
        date: TimePoint,
        ctx: QueryContext<'_>,
    ) -> Vec<AvailabilitySlot> {
        let date = date.date();
        match ctx.constraint {
            Some(spec) if spec.location_id.as_str() == location_id && spec.window.date() == date => {
                self.generate_puzzle(spec, ctx.seed, ctx.task_id).slots
            }
            _ => self.filler(location_id, date, ctx.seed),
        }
    }

    /// Seeded hour-aligned availability, minus existing bookings.
    pub fn filler(&self, location_id: &str, date: TimePoint, seed: u64) -> Vec<AvailabilitySlot> {
        let date = date.date();
        let seed_s = seed.to_string();
        let day = date.day_ordinal().to_string();
        let mut out = Vec::new();
        for space in self.spaces.iter().filter(|s| s.location_id.as_str() == location_id) {
            for seat in space.units() {
                let mut rng = rng_for(&[&seed_s, location_id, &day, &space.item_name, seat.unwrap_or("")]);
                let open: Vec<bool> = (FILLER_OPEN_HOUR..FILLER_CLOSE_HOUR).map(|_| rng.random_bool(0.6)).collect();
                let taken = self.taken(location_id, &space.item_name, seat, date);
                let mut h = 0;
                while h < open.len() {
                    if !open[h] {
                        h += 1;
                        continue;
                    }
                    let start = h;
                    while h < open.len() && open[h] {
                        h += 1;
                    }
                    let range = TimeRange::on_day(
                        date,
                        (FILLER_OPEN_HOUR + start as u16) * 60,
                        (FILLER_OPEN_HOUR + h as u16) * 60,
                    )
                    .expect("hour blocks are non-empty");
                    for piece in subtract(range, &taken) {
                        out.push(Self::slot(space, seat, piece));
                    }
                }
            }
        }
        sort_slots(&mut out);
        out
    }

    /// Builds the task-scoped listing: the ground-truth slot plus 3 to 6
    /// distractors, none of which satisfies the full spec.
    pub fn generate_puzzle(&self, spec: &TaskConstraintSpec, seed: u64, task_id: &str) -> Puzzle {
        let w = spec.window;
        let location = spec.location_id.as_str();
        let gt_unit = (spec.item_name.as_str(), spec.seat_id.as_deref());
        let mut rng = rng_for(&[&seed.to_string(), task_id, location, &w.to_string()]);

        let d = w.duration_minutes() as i32;
        let disjoint = |r: &TimeRange| [shift(r, -d, -d), shift(r, d, d)];
        let partial = |r: &TimeRange| [shift(r, 0, -30), shift(r, 30, 0)];

        let mut candidates: Vec<(&BookableSpace, Option<&str>, TimeRange, DistractorKind)> = Vec::new();
        for space in self.spaces.iter().filter(|s| s.location_id.as_str() == location) {
            let fits = space.violated_attribute(&spec.required_attributes).is_none();
            for seat in space.units() {
                let is_gt = space.item_name.eq_ignore_ascii_case(gt_unit.0) && seat == gt_unit.1;
                let times: Vec<(TimeRange, DistractorKind)> = if !fits {
                    std::iter::once(Some(w))
                        .chain(disjoint(&w))
                        .flatten()
                        .map(|t| (t, DistractorKind::Attribute))
                        .collect()
                } else if is_gt {
                    disjoint(&w).into_iter().flatten().map(|t| (t, DistractorKind::Coverage)).collect()
                } else {
                    partial(&w)
                        .into_iter()
                        .chain(disjoint(&w))
                        .flatten()
                        .map(|t| (t, DistractorKind::Coverage))
                        .collect()
                };
                for (t, kind) in times {
                    candidates.push((space, seat, t, kind));
                }
            }
        }
        candidates.shuffle(&mut rng);
        let want = rng.random_range(3..=6usize);

        let mut slots = Vec::new();
        let mut tags = Vec::new();
        let mut claimed: Vec<(String, Option<String>, TimeRange)> = Vec::new();
        let free = |store: &Self, claimed: &[(String, Option<String>, TimeRange)], space: &BookableSpace, seat: Option<&str>, t: &TimeRange| {
            store
                .taken(location, &space.item_name, seat, w.date())
                .iter()
                .all(|b| !b.overlaps(t))
                && claimed
                    .iter()
                    .filter(|(i, s, _)| *i == space.item_name && s.as_deref() == seat)
                    .all(|(_, _, c)| !c.overlaps(t))
        };

        if let Some(space) = self.find_space(location, gt_unit.0) {
            if free(self, &claimed, space, gt_unit.1, &w) {
                claimed.push((space.item_name.clone(), gt_unit.1.map(str::to_string), w));
                slots.push(Self::slot(space, gt_unit.1, w));
                tags.push(None);
            }
        }
        for (space, seat, t, kind) in candidates {
            if slots.len() - tags.iter().filter(|t| t.is_none()).count() >= want {
                break;
            }
            if free(self, &claimed, space, seat, &t) {
                claimed.push((space.item_name.clone(), seat.map(str::to_string), t));
                slots.push(Self::slot(space, seat, t));
                tags.push(Some(kind));
            }
        }

        let mut order: Vec<usize> = (0..slots.len()).collect();
        order.sort_by(|&a, &b| slot_key(&slots[a]).cmp(&slot_key(&slots[b])));
        Puzzle {
            slots: order.iter().map(|&i| slots[i].clone()).collect(),
            tags: order.iter().map(|&i| tags[i]).collect(),
        }
    }

    /// Validates and records a booking. Checks run in the order: unknown
    /// space or seat, conflict with an existing booking, not offered.
    pub fn make_booking(
        &mut self,
        req: BookingRequest<'_>,
        ctx: QueryContext<'_>,
        now: TimePoint,
        requires_use: bool,
    ) -> ToolResult<BookingRecord> {
        let space = self.find_space(req.location_id, req.item_name).ok_or_else(|| {
            ToolError::NotFound(format!("no bookable space `{}` at {}", req.item_name.trim(), req.location_id.trim()))
        })?;
        let seat = match (space.seats.is_empty(), req.seat_id.map(str::trim)) {
            (true, None) => None,
            (true, Some(s)) => {
                return Err(ToolError::NotFound(format!("{} has no seat `{s}`", space.item_name)));
            }
            (false, None) => {
                return Err(ToolError::Usage(format!("{} is booked per seat; provide seat_id", space.item_name)));
            }
            (false, Some(s)) => Some(
                space
                    .seats
                    .iter()
                    .find(|x| x.eq_ignore_ascii_case(s))
                    .ok_or_else(|| ToolError::NotFound(format!("{} has no seat `{s}`", space.item_name)))?
                    .clone(),
            ),
        };
        let space = space.clone();

        let date = req.time_slot.date();
        if let Some(b) = self
            .taken(space.location_id.as_str(), &space.item_name, seat.as_deref(), date)
            .iter()
            .find(|b| b.overlaps(&req.time_slot))
        {
            return Err(ToolError::Conflict(format!(
                "{} is already booked {} on {}",
                space.item_name,
                b.clock_label(),
                date.date_label()
            )));
        }

        let offered = self
            .query_availability(space.location_id.as_str(), date, ctx)
            .iter()
            .any(|s| s.item_name == space.item_name && s.seat_id == seat && s.time_slot.covers(&req.time_slot));
        if !offered {
            return Err(ToolError::Unavailable(format!(
                "{} is not available {} on {}",
                space.item_name,
                req.time_slot.clock_label(),
                date.date_label()
            )));
        }

        self.booking_counter += 1;
        let record = BookingRecord {
            booking_id: format!("booking_{:03}", self.booking_counter),
            who: AGENT_IDENTITY.to_string(),
            location_id: space.location_id.clone(),
            item_name: space.item_name.clone(),
            seat_id: seat,
            time_slot: req.time_slot,
            created_at: now,
            task_id: ctx.task_id.to_string(),
            requires_use,
            used: false,
            judged: false,
        };
        self.bookings.push(record.clone());
        Ok(record)
    }

    /// Marks bookings at `location` whose slot contains `at` as used.
    pub fn mark_used(&mut self, location: &BuildingId, at: TimePoint) {
        for b in self.bookings.iter_mut().filter(|b| &b.location_id == location && b.time_slot.contains(at)) {
            b.used = true;
        }
    }

    /// Returns bookings that ended unused by `clock`, each reported once.
    pub fn judge_squandered(&mut self, clock: TimePoint) -> Vec<BookingRecord> {
        let mut out = Vec::new();
        for b in self.bookings.iter_mut() {
            if b.requires_use && !b.used && !b.judged && b.time_slot.end() <= clock {
                b.judged = true;
                out.push(b.clone());
            }
        }
        out
    }
}

fn slot_key(s: &AvailabilitySlot) -> (&str, Option<&str>, TimeRange) {
    (s.item_name.as_str(), s.seat_id.as_deref(), s.time_slot)
}

fn sort_slots(slots: &mut [AvailabilitySlot]) {
    slots.sort_by(|a, b| slot_key(a).cmp(&slot_key(b)));
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use crate::time::parse_date;

    fn ctx<'a>(spec: Option<&'a TaskConstraintSpec>) -> QueryContext<'a> {
        QueryContext {
            seed: 7,
            task_id: "t1",
            constraint: spec,
        }
    }

    fn req(item: &str, seat: Option<&'static str>, range: &str) -> BookingRequest<'static> {
        BookingRequest {
            location_id: "B001",
            item_name: Box::leak(item.to_string().into_boxed_str()),
            seat_id: seat,
            time_slot: range.parse().unwrap(),
        }
    }

    #[test]
    fn puzzle_has_unique_solution() {
        let store = library();
        let s = spec();
        let listed = store.query_availability("B001", s.window.date(), ctx(Some(&s)));
        let good: Vec<_> = listed.iter().filter(|x| satisfies(x, &s)).collect();
        assert_eq!(good.len(), 1);
        assert_eq!(good[0].item_name, "Group Study Room 201");
        assert!((4..=7).contains(&listed.len()), "{}", listed.len());
    }

    #[test]
    fn filler_is_deterministic_and_respects_bookings() {
        let mut store = library();
        let day = parse_date("Week 4, Sunday").unwrap();
        let a = store.filler("B001", day, 7);
        assert_eq!(a, store.filler("B001", day, 7));
        assert!(a.iter().all(|s| s.time_slot.start().minute_of_day % 60 == 0));
        let first = a.iter().find(|s| s.seat_id.is_none()).unwrap().clone();
        let booked = TimeRange::on_day(day, first.time_slot.start().minute_of_day, first.time_slot.start().minute_of_day + 60).unwrap();
        store
            .make_booking(
                BookingRequest {
                    location_id: "B001",
                    item_name: &first.item_name,
                    seat_id: None,
                    time_slot: booked,
                },
                ctx(None),
                day,
                true,
            )
            .unwrap();
        let b = store.filler("B001", day, 7);
        assert!(b
            .iter()
            .filter(|s| s.item_name == first.item_name && s.seat_id.is_none())
            .all(|s| !s.time_slot.overlaps(&booked)));
    }

    #[test]
    fn booking_ground_truth_then_conflict() {
        let mut store = library();
        let s = spec();
        let now = parse_date("Week 4, Friday").unwrap();
        let r = store
            .make_booking(req("Group Study Room 201", None, "Week 4, Saturday, 14:00-16:00"), ctx(Some(&s)), now, true)
            .unwrap();
        assert_eq!(r.booking_id, "booking_001");
        let again = store.make_booking(req("Group Study Room 201", None, "Week 4, Saturday, 14:00-16:00"), ctx(Some(&s)), now, true);
        assert!(matches!(again, Err(ToolError::Conflict(_))));
        let listed = store.query_availability("B001", s.window.date(), ctx(Some(&s)));
        assert!(listed.iter().all(|x| !satisfies(x, &s)));
    }

    #[test]
    fn booking_errors() {
        let mut store = library();
        let s = spec();
        let now = parse_date("Week 4, Friday").unwrap();
        assert!(matches!(
            store.make_booking(req("Atrium", None, "Week 4, Saturday, 14:00-16:00"), ctx(Some(&s)), now, true),
            Err(ToolError::NotFound(_))
        ));
        assert!(matches!(
            store.make_booking(req("Reading Area", Some("R9"), "Week 4, Saturday, 14:00-16:00"), ctx(Some(&s)), now, true),
            Err(ToolError::NotFound(_))
        ));
        assert!(matches!(
            store.make_booking(req("Reading Area", None, "Week 4, Saturday, 14:00-16:00"), ctx(Some(&s)), now, true),
            Err(ToolError::Usage(_))
        ));
        // 06:00 is outside every generated slot
        assert!(matches!(
            store.make_booking(req("Group Study Room 201", None, "Week 4, Saturday, 06:00-07:00"), ctx(Some(&s)), now, true),
            Err(ToolError::Unavailable(_))
        ));
    }

    #[test]
    fn squander_judging() {
        let mut store = library();
        let s = spec();
        let now = parse_date("Week 4, Friday").unwrap();
        store
            .make_booking(req("Group Study Room 201", None, "Week 4, Saturday, 14:00-16:00"), ctx(Some(&s)), now, true)
            .unwrap();
        assert!(store.judge_squandered("Week 4, Saturday, 15:00".parse().unwrap()).is_empty());
        assert_eq!(store.judge_squandered("Week 4, Saturday, 16:00".parse().unwrap()).len(), 1);
        assert!(store.judge_squandered("Week 5, Monday, 09:00".parse().unwrap()).is_empty());
    }

    #[test]
    fn used_bookings_are_not_squandered() {
        let mut store = library();
        let s = spec();
        let now = parse_date("Week 4, Friday").unwrap();
        store
            .make_booking(req("Group Study Room 201", None, "Week 4, Saturday, 14:00-16:00"), ctx(Some(&s)), now, true)
            .unwrap();
        store.mark_used(&"B001".into(), "Week 4, Saturday, 14:00".parse().unwrap());
        assert!(store.judge_squandered("Week 5, Monday, 09:00".parse().unwrap()).is_empty());
    }

    #[test]
    fn subtract_splits() {
        let day = parse_date("Week 0, Monday").unwrap();
        let r = TimeRange::on_day(day, 600, 900).unwrap();
        let hole = TimeRange::on_day(day, 660, 720).unwrap();
        let parts = subtract(r, &[hole]);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0].clock_label(), "10:00-11:00");
        assert_eq!(parts[1].clock_label(), "12:00-15:00");
    }
}
