//! Routes parsed tool calls to the world's subsystems and renders observations.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::agent::ArgValue;
use crate::calendar::{EventPatch, EventSeed};
use crate::comms::{EmailSpec, EntityType};
use crate::courses::{CourseFilter, PassType, RegistrationResult};
use crate::error::{ToolError, ToolResult};
use crate::map::BuildingId;
use crate::reservation::{BookingRequest, QueryContext};
use crate::task::{GroundTruth, TaskSpec};
use crate::time::{parse_clock_range, parse_date, parse_time, TimePoint, TimeRange, TimeSpec};
use crate::world::WorldState;

/// Everything the agent did during one task that grading may need.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskFacts {
    pub answer: Option<char>,
    pub finished: bool,
    /// Each successful walk, as the validated building sequence.
    pub walks: Vec<Vec<BuildingId>>,
    /// Buildings occupied during the task and when the agent got there.
    pub visits: Vec<(BuildingId, TimePoint)>,
    pub bookings: Vec<String>,
    pub emails: Vec<u64>,
    pub registrations: Vec<RegistrationResult>,
    /// Calendar id and event id of each event the agent added.
    pub events_added: Vec<(String, String)>,
    /// Successful tool calls with the clock at the time of the call.
    pub tool_calls: Vec<(String, TimePoint)>,
}

impl TaskFacts {
    pub fn was_at(&self, building: &BuildingId) -> bool {
        self.visits.iter().any(|(b, _)| b == building)
    }

    /// Sections enrolled by any registration submitted in this task.
    pub fn enrolled_sections(&self) -> BTreeSet<&str> {
        self.registrations
            .iter()
            .flat_map(|r| r.outcomes.iter())
            .filter(|(_, o)| o.enrolled())
            .map(|(s, _)| s.as_str())
            .collect()
    }
}

/// Named arguments with usage tracking so leftovers can be rejected.
struct Args<'a> {
    tool: &'a str,
    items: &'a [(String, ArgValue)],
    used: BTreeSet<&'a str>,
}

impl<'a> Args<'a> {
    fn new(tool: &'a str, items: &'a [(String, ArgValue)]) -> ToolResult<Self> {
        let mut seen = BTreeSet::new();
        for (k, _) in items {
            if !seen.insert(k.as_str()) {
                return Err(ToolError::Usage(format!("{tool}: parameter `{k}` given twice")));
            }
        }
        Ok(Self {
            tool,
            items,
            used: BTreeSet::new(),
        })
    }

    fn raw(&mut self, name: &'a str) -> Option<&'a ArgValue> {
        let hit = self.items.iter().find(|(k, _)| k == name).map(|(_, v)| v);
        if hit.is_some() {
            self.used.insert(name);
        }
        hit.filter(|v| !matches!(v, ArgValue::Null))
    }

    fn opt_str(&mut self, name: &'a str) -> ToolResult<Option<&'a str>> {
        match self.raw(name) {
            None => Ok(None),
            Some(ArgValue::Str(s)) => Ok(Some(s.as_str())),
            Some(other) => Err(ToolError::Usage(format!(
                "{}: parameter `{name}` must be a string, got {other}",
                self.tool
            ))),
        }
    }

    fn str(&mut self, name: &'a str) -> ToolResult<&'a str> {
        self.opt_str(name)?
            .ok_or_else(|| ToolError::Usage(format!("{}: missing required parameter `{name}`", self.tool)))
    }

    fn done(self) -> ToolResult<()> {
        let extra: Vec<&str> = self
            .items
            .iter()
            .map(|(k, _)| k.as_str())
            .filter(|k| !self.used.contains(k))
            .collect();
        if extra.is_empty() {
            Ok(())
        } else {
            Err(ToolError::Usage(format!("{}: unknown parameter(s) {}", self.tool, extra.join(", "))))
        }
    }
}

fn pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("observation values serialize")
}

fn string_map(tool: &str, param: &str, v: &ArgValue) -> ToolResult<Vec<(String, String)>> {
    match v {
        ArgValue::Map(m) => m
            .iter()
            .map(|(k, v)| match v {
                ArgValue::Str(s) => Ok((k.clone(), s.clone())),
                other => Err(ToolError::Usage(format!("{tool}: `{param}.{k}` must be a string, got {other}"))),
            })
            .collect(),
        other => Err(ToolError::Usage(format!("{tool}: `{param}` must be a mapping, got {other}"))),
    }
}

fn path_from(v: &ArgValue) -> ToolResult<Vec<BuildingId>> {
    let list = match v {
        ArgValue::List(l) => l,
        ArgValue::Map(_) => match v.get("path") {
            Some(ArgValue::List(l)) => l,
            _ => return Err(ToolError::Usage("path_info must contain a `path` list".into())),
        },
        _ => return Err(ToolError::Usage("path_info must be a mapping with a `path` list".into())),
    };
    list.iter()
        .map(|x| {
            x.as_str()
                .map(|s| BuildingId::new(s.trim()))
                .ok_or_else(|| ToolError::Usage(format!("path entries must be building id strings, got {x}")))
        })
        .collect()
}

/// Whether a booking made in `task` is expected to be attended later.
fn booking_requires_use(task: &TaskSpec) -> bool {
    !matches!(task.booking_truth(), Some(GroundTruth::Booking { attend: false, .. }))
}

/// Executes one tool call against `world`. Errors are observations for the
/// agent, never reasons to abort.
pub fn dispatch(
    world: &mut WorldState,
    task: &TaskSpec,
    facts: &mut TaskFacts,
    tool: &str,
    args: &[(String, ArgValue)],
) -> ToolResult<String> {
    let system = tool.split('.').next().unwrap_or(tool);
    if !task.tool_whitelist.iter().any(|s| s == system) {
        return Err(ToolError::NotAvailable(format!(
            "`{tool}` is not available for this task (available systems: {})",
            task.tool_whitelist.join(", ")
        )));
    }
    let out = run(world, task, facts, tool, args)?;
    facts.tool_calls.push((tool.to_string(), world.clock));
    Ok(out)
}

fn run(
    world: &mut WorldState,
    task: &TaskSpec,
    facts: &mut TaskFacts,
    tool: &str,
    args: &[(String, ArgValue)],
) -> ToolResult<String> {
    let mut a = Args::new(tool, args)?;
    let out = match tool {
        "email.send_email" => {
            let spec = EmailSpec {
                to: a.str("to")?.to_string(),
                subject: a.str("subject")?.to_string(),
                body: a.str("body")?.to_string(),
                cc: a.opt_str("cc")?.map(str::to_string),
            };
            a.done()?;
            let rec = world.emails.send(spec, world.clock)?;
            facts.emails.push(rec.seq);
            format!("Email sent to {}.", rec.to)
        }

        "calendar.add_event" => {
            let cal = a.str("calendar_id")?;
            let title = a.str("event_title")?.to_string();
            let location = a.str("location")?.to_string();
            let time = match parse_time(a.str("time")?)? {
                TimeSpec::Range(r) => r,
                _ => {
                    return Err(ToolError::Usage(
                        "time must be a range like 'Week 3, Monday, 15:00-16:00'".into(),
                    ))
                }
            };
            let description = a.opt_str("description")?.map(str::to_string);
            a.done()?;
            let seed = EventSeed {
                title,
                location,
                time,
                description,
            };
            let id = world.calendars.add_event(cal, seed, &mut world.event_counter)?;
            let cal_id = world.calendars.resolve(cal)?.id.clone();
            facts.events_added.push((cal_id.clone(), id.clone()));
            format!("Event {id} added to calendar {cal_id}.")
        }
        "calendar.remove_event" => {
            let cal = a.str("calendar_id")?;
            let id = a.str("event_id")?;
            a.done()?;
            let ev = world.calendars.remove_event(cal, id)?;
            format!("Event {} removed.", ev.event_id)
        }
        "calendar.update_event" => {
            let cal = a.str("calendar_id")?;
            let id = a.str("event_id")?;
            let details = a
                .raw("new_details")
                .ok_or_else(|| ToolError::Usage(format!("{tool}: missing required parameter `new_details`")))?;
            a.done()?;
            let mut patch = EventPatch::default();
            for (k, v) in string_map(tool, "new_details", details)? {
                match k.as_str() {
                    "event_title" | "title" => patch.title = Some(v),
                    "location" => patch.location = Some(v),
                    "description" => patch.description = Some(v),
                    "time" => match parse_time(&v)? {
                        TimeSpec::Range(r) => patch.time = Some(r),
                        _ => return Err(ToolError::Usage("new time must be a range".into())),
                    },
                    other => {
                        return Err(ToolError::Usage(format!(
                            "{tool}: cannot update `{other}` (allowed: event_title, location, time, description)"
                        )))
                    }
                }
            }
            let ev = world.calendars.update_event(cal, id, patch)?;
            format!("Event {} updated.\n{}", ev.event_id, pretty(&ev))
        }
        "calendar.view_schedule" => {
            let cal = a.str("calendar_id")?;
            let date = parse_date(a.str("date")?)?;
            a.done()?;
            let events = world.calendars.view_schedule(cal, date)?;
            if events.is_empty() {
                format!("No events on {}.", date.date_label())
            } else {
                pretty(&events)
            }
        }
        "calendar.query_advisor_availability" => {
            let advisor = a.str("advisor_id")?;
            let date = parse_date(a.str("date")?)?;
            a.done()?;
            let busy = world.calendars.query_advisor_availability(advisor, date)?;
            let labels: Vec<String> = busy.iter().map(TimeRange::clock_label).collect();
            pretty(&json!({"advisor_id": advisor.trim(), "date": date.date_label(), "busy": labels}))
        }

        "geography.get_current_location" => {
            a.done()?;
            let b = world.map.get_building_details(world.location.as_str())?;
            format!("You are at {} ({}).", b.id, b.name)
        }
        "geography.walk_to" => {
            let info = a
                .raw("path_info")
                .ok_or_else(|| ToolError::Usage(format!("{tool}: missing required parameter `path_info`")))?;
            a.done()?;
            let path = path_from(info)?;
            world.walk_to(&path)?;
            facts.visits.push((world.location.clone(), world.clock));
            facts.walks.push(path);
            let b = world.map.get_building_details(world.location.as_str())?;
            format!("You walked to {} ({}).", b.id, b.name)
        }

        "map.find_optimal_path" => {
            let src = a.str("source_building_id")?;
            let dst = a.str("target_building_id")?;
            let raw = a.raw("constraints");
            a.done()?;
            let pairs = match raw {
                Some(v) => string_map(tool, "constraints", v)?,
                None => vec![],
            };
            let constraints = world
                .map
                .resolve_constraints(pairs.iter().map(|(k, v)| (k.as_str(), v.as_str())))?;
            pretty(&world.map.find_optimal_path(src, dst, &constraints)?)
        }
        "map.find_building_id" => {
            let name = a.str("building_name")?;
            a.done()?;
            let id = world.map.find_building_id(name)?;
            format!("The building id of `{}` is {id}.", name.trim())
        }
        "map.get_building_details" => {
            let id = a.str("building_id")?;
            a.done()?;
            pretty(world.map.get_building_details(id)?)
        }
        "map.find_room_location" => {
            let q = a.str("room_query")?;
            let b = a.opt_str("building_id")?;
            a.done()?;
            let hits: Vec<_> = world
                .map
                .find_room_location(q, b)?
                .into_iter()
                .map(|(b, r)| json!({"building_id": b.id, "building_name": b.name, "room": r}))
                .collect();
            pretty(&hits)
        }
        "map.query_buildings_by_property" => {
            let zone = a.opt_str("zone")?;
            let ty = a.opt_str("building_type")?;
            let amenity = a.opt_str("amenity")?;
            a.done()?;
            let hits: Vec<_> = world
                .map
                .query_buildings_by_property(zone, ty, amenity)?
                .into_iter()
                .map(|b| json!({"id": b.id, "name": b.name, "zone": b.zone, "building_type": b.building_type}))
                .collect();
            pretty(&hits)
        }

        "reservation.query_availability" => {
            let loc = a.str("location_id")?;
            let date = parse_date(a.str("date")?)?;
            a.done()?;
            world.map.get_building_details(loc)?;
            let ctx = QueryContext {
                seed: world.rng_seed,
                task_id: &task.task_id,
                constraint: task.reservation_constraints.as_ref(),
            };
            let slots = world.reservations.query_availability(loc.trim(), date, ctx);
            if slots.is_empty() {
                format!("No bookable spaces available at {} on {}.", loc.trim(), date.date_label())
            } else {
                let rows: Vec<_> = slots
                    .iter()
                    .map(|s| {
                        let mut v = json!({
                            "item_name": s.item_name,
                            "time_slot": s.time_slot.clock_label(),
                            "attributes": s.attributes,
                        });
                        if let Some(seat) = &s.seat_id {
                            v["seat_id"] = json!(seat);
                        }
                        v
                    })
                    .collect();
                pretty(&json!({"location_id": loc.trim(), "date": date.date_label(), "available": rows}))
            }
        }
        "reservation.make_booking" => {
            let loc = a.str("location_id")?;
            let item = a.str("item_name")?;
            let date = parse_date(a.str("date")?)?;
            let (s, e) = parse_clock_range(a.str("time_slot")?)?;
            let seat = a.opt_str("seat_id")?;
            a.done()?;
            let time_slot = TimeRange::on_day(date, s, e)?;
            let ctx = QueryContext {
                seed: world.rng_seed,
                task_id: &task.task_id,
                constraint: task.reservation_constraints.as_ref(),
            };
            let req = BookingRequest {
                location_id: loc,
                item_name: item,
                seat_id: seat,
                time_slot,
            };
            let rec = world
                .reservations
                .make_booking(req, ctx, world.clock, booking_requires_use(task))?;
            facts.bookings.push(rec.booking_id.clone());
            let seat = rec.seat_id.as_ref().map(|s| format!(", seat {s}")).unwrap_or_default();
            format!(
                "Booking confirmed: {} for {}{seat} at {} on {}, {}.",
                rec.booking_id,
                rec.item_name,
                rec.location_id,
                date.date_label(),
                time_slot.clock_label()
            )
        }

        "bibliography.list_chapters" => {
            let book = a.str("book_title")?;
            a.done()?;
            pretty(&world.bibliography.list_chapters(book)?)
        }
        "bibliography.list_sections" => {
            let book = a.str("book_title")?;
            let ch = a.str("chapter_title")?;
            a.done()?;
            pretty(&world.bibliography.list_sections(book, ch)?)
        }
        "bibliography.list_articles" => {
            let book = a.str("book_title")?;
            let ch = a.str("chapter_title")?;
            let sec = a.str("section_title")?;
            a.done()?;
            let rows: Vec<_> = world
                .bibliography
                .list_articles(book, ch, sec)?
                .into_iter()
                .map(|n| json!({"title": n.title, "id": n.id}))
                .collect();
            pretty(&rows)
        }
        "bibliography.view_article" => {
            let id = a.str("identifier")?;
            let by = a.str("search_type")?;
            a.done()?;
            let n = world.bibliography.view_article(id, by)?;
            format!("{}\n\n{}", n.title, n.content.as_deref().unwrap_or(""))
        }

        "data_system.list_by_category" => {
            let cat = a.str("category")?;
            let ty: EntityType = a.str("entity_type")?.parse()?;
            a.done()?;
            let rows: Vec<_> = world
                .directory
                .list_by_category(cat, ty)
                .into_iter()
                .map(|e| json!({"id": e.id, "name": e.name, "category": e.category}))
                .collect();
            pretty(&rows)
        }
        "data_system.query_by_identifier" => {
            let id = a.str("identifier")?;
            let by = a.str("by")?;
            let ty: EntityType = a.str("entity_type")?.parse()?;
            a.done()?;
            pretty(world.directory.query_by_identifier(id, by, ty)?)
        }
        "data_system.list_books_by_category" => {
            let cat = a.str("category")?;
            a.done()?;
            pretty(&world.library.list_by_category(cat))
        }
        "data_system.search_books" => {
            let q = a.str("query")?;
            let by = a.opt_str("search_type")?.unwrap_or("title");
            a.done()?;
            pretty(&world.library.search(q, by)?)
        }

        "course_selection.browse_courses" => {
            let filters = a.raw("filters");
            a.done()?;
            let filter = match filters {
                None => CourseFilter::default(),
                Some(v @ ArgValue::Map(m)) => {
                    if let Some((k, _)) = m
                        .iter()
                        .find(|(k, _)| !matches!(k.as_str(), "course_code" | "course_name" | "credits"))
                    {
                        return Err(ToolError::Usage(format!(
                            "{tool}: unknown filter `{k}` (allowed: course_code, course_name, credits)"
                        )));
                    }
                    serde_json::from_value(v.to_json())
                        .map_err(|e| ToolError::Usage(format!("{tool}: invalid filters: {e}")))?
                }
                Some(other) => return Err(ToolError::Usage(format!("{tool}: `filters` must be a mapping, got {other}"))),
            };
            pretty(&world.courses.browse(&filter))
        }
        "draft.add_course" => {
            let id = a.str("section_id")?;
            a.done()?;
            world.courses.add_to_draft(id)?;
            format!("Added {} to the draft.", id.trim())
        }
        "draft.remove_course" => {
            let id = a.str("section_id")?;
            a.done()?;
            world.courses.remove_from_draft(id)?;
            format!("Removed {} from the draft.", id.trim())
        }
        "draft.assign_pass" => {
            let id = a.str("section_id")?;
            let pass: PassType = a
                .str("pass_type")?
                .parse()
                .map_err(|e: String| ToolError::Usage(e))?;
            a.done()?;
            world.courses.assign_pass(id, pass)?;
            format!("Assigned {pass} to {}.", id.trim())
        }
        "draft.view" => {
            a.done()?;
            let rows: Vec<_> = world
                .courses
                .draft()
                .iter()
                .map(|(id, p)| {
                    let s = world.courses.section(id).ok();
                    json!({
                        "section_id": id,
                        "course_name": s.map(|s| s.course_name.as_str()),
                        "pass": p.map(|p| p.label()),
                    })
                })
                .collect();
            if rows.is_empty() {
                "Your draft is empty.".to_string()
            } else {
                pretty(&rows)
            }
        }
        "registration.submit_draft" => {
            a.done()?;
            let result = world.courses.submit()?;
            facts.registrations.push(result.clone());
            format!("Registration submitted.\n{}", pretty(&result))
        }

        other => return Err(ToolError::NotFound(format!("unknown tool `{other}`"))),
    };
    Ok(out)
}
