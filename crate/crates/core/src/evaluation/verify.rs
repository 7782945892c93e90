use thiserror::Error;

use super::record::FailureReason;
use crate::map::{BuildingId, CampusMap};
use crate::task::{GroundTruth, TaskSpec};
use crate::time::TimeRange;
use crate::tools::TaskFacts;
use crate::world::WorldState;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub success: bool,
    pub failure_reason: Option<FailureReason>,
    pub detail: Option<String>,
    pub presence_ok: Option<bool>,
    pub broken_commitment: bool,
}

/// Ground truth that cannot be evaluated; always an environment defect.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot verify task {task_id}: {reason}")]
pub struct VerifyError {
    pub task_id: String,
    pub reason: String,
}

type Check = Result<(), (FailureReason, String)>;

fn fail(reason: FailureReason, detail: impl Into<String>) -> Check {
    Err((reason, detail.into()))
}

/// Concatenates consecutive walks, merging the shared junction building.
pub fn joined_route(walks: &[Vec<BuildingId>]) -> Vec<BuildingId> {
    let mut out: Vec<BuildingId> = Vec::new();
    for w in walks {
        let skip = usize::from(!out.is_empty() && out.last() == w.first());
        out.extend(w.iter().skip(skip).cloned());
    }
    out
}

/// The full expected route for a path truth.
pub fn expected_route(map: &CampusMap, truth: &GroundTruth) -> Result<Vec<BuildingId>, String> {
    let GroundTruth::Path {
        path,
        waypoints,
        constraints,
    } = truth
    else {
        return Err("not a path truth".into());
    };
    if let Some(p) = path {
        return Ok(p.clone());
    }
    let stops = waypoints.as_ref().ok_or("path truth has neither path nor waypoints")?;
    let legs: Result<Vec<Vec<BuildingId>>, String> = stops
        .windows(2)
        .map(|w| {
            map.find_optimal_path(w[0].as_str(), w[1].as_str(), constraints)
                .map(|p| p.path)
                .map_err(|e| e.to_string())
        })
        .collect();
    Ok(joined_route(&legs?))
}

fn same_text(a: &str, b: &str) -> bool {
    a.trim().eq_ignore_ascii_case(b.trim())
}

fn check_presence(facts: &TaskFacts, building: &BuildingId, window: &TimeRange) -> bool {
    facts
        .visits
        .iter()
        .any(|(b, t)| b == building && window.contains(*t))
}

fn check(task: &TaskSpec, truth: &GroundTruth, facts: &TaskFacts, world: &WorldState) -> Result<Check, String> {
    Ok(match truth {
        GroundTruth::Answer { answer } => match facts.answer {
            Some(c) if c == answer.0 => Ok(()),
            Some(c) => fail(FailureReason::WrongAnswer, format!("answered {c}")),
            None => fail(FailureReason::NoAnswer, "no answer given"),
        },
        GroundTruth::Path { .. } => {
            let want = expected_route(&world.map, truth)?;
            let got = joined_route(&facts.walks);
            if got == want {
                Ok(())
            } else {
                let show = |p: &[BuildingId]| p.iter().map(BuildingId::as_str).collect::<Vec<_>>().join(" -> ");
                fail(
                    FailureReason::PathMismatch,
                    format!("walked [{}], expected [{}]", show(&got), show(&want)),
                )
            }
        }
        GroundTruth::Booking {
            location_id,
            item_name,
            seat_id,
            time_slot,
            ..
        } => {
            let hit = world.reservations.bookings().iter().any(|b| {
                facts.bookings.contains(&b.booking_id)
                    && &b.location_id == location_id
                    && same_text(&b.item_name, item_name)
                    && b.seat_id.as_deref().map(str::to_ascii_lowercase) == seat_id.as_deref().map(str::to_ascii_lowercase)
                    && &b.time_slot == time_slot
                    && task.reservation_constraints.as_ref().is_none_or(|spec| {
                        world
                            .reservations
                            .find_space(b.location_id.as_str(), &b.item_name)
                            .is_some_and(|s| s.violated_attribute(&spec.required_attributes).is_none())
                            && b.time_slot.covers(&spec.window)
                    })
            });
            if hit {
                Ok(())
            } else {
                fail(FailureReason::BookingMismatch, format!("no matching booking for {item_name} at {location_id}"))
            }
        }
        GroundTruth::Email { email } => {
            let hit = world
                .emails
                .records()
                .iter()
                .any(|r| facts.emails.contains(&r.seq) && email.matches(r));
            if hit {
                Ok(())
            } else {
                fail(FailureReason::EmailMismatch, format!("no sent email matches the expected message to {}", email.to))
            }
        }
        GroundTruth::Registration { enrolled, passes } => {
            let got = facts.enrolled_sections();
            let want: std::collections::BTreeSet<&str> = enrolled.iter().map(String::as_str).collect();
            if got != want {
                fail(
                    FailureReason::RegistrationMismatch,
                    format!("enrolled {:?}, expected {:?}", got, want),
                )
            } else {
                let used_pass = |sec: &str| {
                    facts.registrations.iter().find_map(|r| match r.outcomes.get(sec) {
                        Some(crate::courses::SectionOutcome::Enrolled { pass }) => Some(*pass),
                        _ => None,
                    })
                };
                match passes
                    .iter()
                    .flatten()
                    .find(|(sec, p)| used_pass(sec) != Some(**p))
                {
                    Some((sec, p)) => fail(
                        FailureReason::RegistrationMismatch,
                        format!("{sec} expected pass {}", p.map_or("none", |p| p.label())),
                    ),
                    None => Ok(()),
                }
            }
        }
        GroundTruth::Calendar { entries } => {
            let missing = entries.iter().find(|e| {
                !world.calendars.events(&e.calendar_id).iter().any(|ev| {
                    same_text(&ev.title, &e.title)
                        && ev.time == e.time
                        && e.location.as_deref().is_none_or(|l| same_text(&ev.location, l))
                })
            });
            match missing {
                Some(e) => fail(
                    FailureReason::CalendarMismatch,
                    format!("missing `{}` at {} in calendar {}", e.title, e.time, e.calendar_id),
                ),
                None => Ok(()),
            }
        }
        GroundTruth::Presence { building, window } => {
            if check_presence(facts, building, window) {
                Ok(())
            } else if world
                .reservations
                .bookings()
                .iter()
                .any(|b| &b.location_id == building && b.time_slot.overlaps(window))
            {
                fail(FailureReason::StoodUp, format!("booked {building} but was not there during {window}"))
            } else {
                fail(FailureReason::Absent, format!("not at {building} during {window}"))
            }
        }
        GroundTruth::Composite { parts } => {
            for p in parts {
                if let Err(e) = check(task, p, facts, world)? {
                    return Ok(Err(e));
                }
            }
            Ok(())
        }
    })
}

/// Grades one completed task against its ground truth.
pub fn verify_task(task: &TaskSpec, facts: &TaskFacts, world: &WorldState) -> Result<Verdict, VerifyError> {
    let result = check(task, &task.ground_truth, facts, world).map_err(|reason| VerifyError {
        task_id: task.task_id.clone(),
        reason,
    })?;
    let presence = task.presence_requirement();
    let presence_ok = presence.as_ref().map(|(b, w)| check_presence(facts, b, w));
    let (success, failure_reason, detail) = match result {
        Ok(()) => (true, None, None),
        Err((r, d)) => (false, Some(r), Some(d)),
    };
    let broken_commitment = match failure_reason {
        Some(FailureReason::StoodUp) => true,
        Some(FailureReason::Absent) => presence.as_ref().is_some_and(|(_, w)| {
            world.calendars.events("self").iter().any(|ev| ev.time.overlaps(w))
        }),
        _ => false,
    };
    Ok(Verdict {
        success,
        failure_reason,
        detail,
        presence_ok,
        broken_commitment,
    })
}

/// Whether a self-motivated task was carried out inside its execution
/// window on the agent's own initiative.
pub fn evaluate_trigger_window(task: &TaskSpec, facts: &TaskFacts, success: bool) -> bool {
    let Some(trigger) = &task.trigger else {
        return false;
    };
    if !success {
        return false;
    }
    let window = trigger.execute_window;
    match task.presence_requirement() {
        Some((building, w)) => facts
            .visits
            .iter()
            .any(|(b, t)| b == &building && w.contains(*t) && window.contains(*t)),
        None => {
            let mut times = facts.tool_calls.iter().map(|(_, t)| *t).peekable();
            if times.peek().is_none() {
                facts.visits.first().is_some_and(|(_, t)| window.contains(*t))
            } else {
                times.all(|t| window.contains(t))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::{Letter, Scenario, TaskFlags, TriggerSpec};
    use crate::world::fixtures::world;

    fn task(g: GroundTruth) -> TaskSpec {
        TaskSpec {
            task_id: "t".into(),
            scenario: Scenario::AcademicActivity,
            instruction: String::new(),
            start_time: "Week 0, Monday, 10:00".parse().unwrap(),
            tool_whitelist: vec![],
            ground_truth: g,
            flags: TaskFlags::default(),
            trigger: None,
            depends_on: vec![],
            world_updates: vec![],
            semester: None,
            reservation_constraints: None,
            memory_source: None,
        }
    }

    fn ids(p: &[&str]) -> Vec<BuildingId> {
        p.iter().map(|s| BuildingId::from(*s)).collect()
    }

    #[test]
    fn answers() {
        let w = world();
        let t = task(GroundTruth::Answer { answer: Letter('A') });
        let mut f = TaskFacts::default();
        assert_eq!(verify_task(&t, &f, &w).unwrap().failure_reason, Some(FailureReason::NoAnswer));
        f.answer = Some('B');
        assert_eq!(verify_task(&t, &f, &w).unwrap().failure_reason, Some(FailureReason::WrongAnswer));
        f.answer = Some('A');
        assert!(verify_task(&t, &f, &w).unwrap().success);
    }

    #[test]
    fn route_joins_legs() {
        let r = joined_route(&[ids(&["B083", "B014"]), ids(&["B014", "B001"])]);
        assert_eq!(r, ids(&["B083", "B014", "B001"]));
    }

    #[test]
    fn waypoint_truth_uses_optimal_legs() {
        let w = world();
        let t = task(GroundTruth::Path {
            path: None,
            waypoints: Some(ids(&["B083", "B001"])),
            constraints: Default::default(),
        });
        let mut f = TaskFacts::default();
        f.walks.push(ids(&["B083", "B001"]));
        // B083-B001 costs 4, B083-B014-B001 costs 4.5: direct is optimal.
        assert!(verify_task(&t, &f, &w).unwrap().success);
        f.walks = vec![ids(&["B083", "B014", "B001"])];
        assert_eq!(verify_task(&t, &f, &w).unwrap().failure_reason, Some(FailureReason::PathMismatch));
    }

    #[test]
    fn absence_after_booking_is_standing_up() {
        use crate::reservation::{BookableSpace, BookingRequest, QueryContext, ReservationStore};
        let mut w = world();
        w.reservations = ReservationStore::new(vec![BookableSpace {
            location_id: "B014".into(),
            item_name: "Seminar Room 101".into(),
            seats: vec![],
            attributes: Default::default(),
        }]);
        let window: TimeRange = "Week 0, Tuesday, 10:00-11:00".parse().unwrap();
        let t = task(GroundTruth::Presence {
            building: "B014".into(),
            window,
        });
        let f = TaskFacts::default();
        assert_eq!(verify_task(&t, &f, &w).unwrap().failure_reason, Some(FailureReason::Absent));

        // Find a slot the filler offers and book it over the window.
        let ctx = QueryContext {
            seed: w.rng_seed,
            task_id: "x",
            constraint: None,
        };
        let spec = crate::reservation::TaskConstraintSpec {
            location_id: "B014".into(),
            window,
            required_attributes: Default::default(),
            item_name: "Seminar Room 101".into(),
            seat_id: None,
        };
        let ctx = QueryContext {
            constraint: Some(&spec),
            ..ctx
        };
        w.reservations
            .make_booking(
                BookingRequest {
                    location_id: "B014",
                    item_name: "Seminar Room 101",
                    seat_id: None,
                    time_slot: window,
                },
                ctx,
                w.clock,
                true,
            )
            .unwrap();
        let v = verify_task(&t, &f, &w).unwrap();
        assert_eq!(v.failure_reason, Some(FailureReason::StoodUp));
        assert!(v.broken_commitment);
    }

    #[test]
    fn proactive_window() {
        let window: TimeRange = "Week 1, Monday, 09:00-10:00".parse().unwrap();
        let mut t = task(GroundTruth::Presence {
            building: "B001".into(),
            window,
        });
        t.trigger = Some(TriggerSpec {
            announce_at: "Week 0, Monday, 09:00".parse().unwrap(),
            execute_window: window,
            required_presence: None,
        });
        let mut f = TaskFacts::default();
        f.visits.push(("B001".into(), "Week 1, Monday, 08:59".parse().unwrap()));
        assert!(!evaluate_trigger_window(&t, &f, true));
        f.visits.push(("B001".into(), "Week 1, Monday, 09:05".parse().unwrap()));
        assert!(evaluate_trigger_window(&t, &f, true));
        assert!(!evaluate_trigger_window(&t, &f, false));
    }
}
