//! Dataset loading, validation and the initial world.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::calendar::{CalendarStore, EventSeed, PermissionClass};
use crate::comms::{Bibliography, Directory, EmailLog, EntityType, LibraryBook, LibraryCatalog};
use crate::courses::{CourseSection, CourseStore, PassInventory, PopularityUpdate};
use crate::map::{CampusMap, MapDocument};
use crate::reservation::{BookableSpace, ReservationStore};
use crate::task::{GroundTruth, Scenario, ScenarioGroup, TaskSpec};
use crate::time::TimePoint;
use crate::world::WorldState;

/// Tool systems an agent can address.
pub const TOOL_SYSTEMS: [&str; 10] = [
    "email",
    "calendar",
    "geography",
    "map",
    "reservation",
    "bibliography",
    "data_system",
    "course_selection",
    "draft",
    "registration",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexedUpdates {
    pub task_index: usize,
    pub updates: Vec<PopularityUpdate>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioCount {
    pub num: u32,
    pub ltm: u32,
    pub self_motivated: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetCounts {
    pub total: u32,
    pub ltm: u32,
    pub self_motivated: u32,
    pub groups: BTreeMap<ScenarioGroup, u32>,
    pub scenarios: BTreeMap<Scenario, ScenarioCount>,
}

impl DatasetCounts {
    pub fn of(tasks: &[TaskSpec]) -> Self {
        let mut c = DatasetCounts::default();
        for t in tasks {
            c.total += 1;
            c.ltm += t.flags.needs_ltm as u32;
            c.self_motivated += t.flags.self_motivated as u32;
            *c.groups.entry(t.scenario.group()).or_default() += 1;
            let s = c.scenarios.entry(t.scenario).or_default();
            s.num += 1;
            s.ltm += t.flags.needs_ltm as u32;
            s.self_motivated += t.flags.self_motivated as u32;
        }
        c
    }

    pub fn group(&self, g: ScenarioGroup) -> u32 {
        self.groups.get(&g).copied().unwrap_or(0)
    }

    pub fn scenario(&self, s: Scenario) -> ScenarioCount {
        self.scenarios.get(&s).copied().unwrap_or_default()
    }

    /// Field-by-field differences against `declared`, as readable lines.
    pub fn differences(&self, declared: &DatasetCounts) -> Vec<String> {
        let mut out = Vec::new();
        let mut cmp = |what: String, have: u32, want: u32| {
            if have != want {
                out.push(format!("{what}: declared {want}, computed {have}"));
            }
        };
        cmp("total".into(), self.total, declared.total);
        cmp("ltm".into(), self.ltm, declared.ltm);
        cmp("self_motivated".into(), self.self_motivated, declared.self_motivated);
        for g in ScenarioGroup::ALL {
            cmp(format!("group {}", g.label()), self.group(g), declared.group(g));
        }
        if !declared.scenarios.is_empty() {
            for s in Scenario::ALL {
                let (h, w) = (self.scenario(s), declared.scenario(s));
                cmp(format!("{} #Num", s.label()), h.num, w.num);
                cmp(format!("{} #LTM", s.label()), h.ltm, w.ltm);
                cmp(format!("{} #SelfMotivated", s.label()), h.self_motivated, w.self_motivated);
            }
        }
        out
    }
}

/// Task counts of the released benchmark.
pub fn released_dataset_counts() -> DatasetCounts {
    use Scenario::*;
    let rows: [(Scenario, u32, u32, u32); 10] = [
        (RegulationsLearning, 70, 23, 70),
        (CoreCourseInstruction, 416, 129, 416),
        (CampusExploration, 75, 25, 25),
        (InitialCourseSelection, 150, 50, 0),
        (PreliminaryPlanning, 50, 50, 0),
        (AcademicActivity, 72, 22, 22),
        (LibraryStudy, 151, 50, 50),
        (ClubActivity, 140, 45, 45),
        (MidtermExam, 80, 80, 0),
        (FinalExam, 80, 80, 0),
    ];
    let mut c = DatasetCounts {
        total: 1284,
        ltm: 554,
        self_motivated: 628,
        ..Default::default()
    };
    c.groups.insert(ScenarioGroup::InClass, 486);
    c.groups.insert(ScenarioGroup::DailyCampus, 637);
    c.groups.insert(ScenarioGroup::Examination, 160);
    for (s, num, ltm, sm) in rows {
        c.scenarios.insert(s, ScenarioCount { num, ltm, self_motivated: sm });
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    #[serde(default)]
    pub name: String,
    pub start_time: TimePoint,
    pub map: MapDocument,
    #[serde(default)]
    pub catalog: Vec<CourseSection>,
    #[serde(default)]
    pub completed_courses: Vec<String>,
    #[serde(default)]
    pub pass_allocations: BTreeMap<u32, PassInventory>,
    #[serde(default)]
    pub popularity_updates: Vec<IndexedUpdates>,
    #[serde(default)]
    pub spaces: Vec<BookableSpace>,
    #[serde(default)]
    pub calendars: BTreeMap<String, Vec<EventSeed>>,
    #[serde(default)]
    pub bibliography: Bibliography,
    #[serde(default)]
    pub directory: Directory,
    #[serde(default)]
    pub library_books: Vec<LibraryBook>,
    pub tasks: Vec<TaskSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_counts: Option<DatasetCounts>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: malformed dataset: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("dataset is invalid:\n{}", .0.iter().map(|i| format!("  {i}")).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<ValidationIssue>),
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    pub map: Arc<CampusMap>,
    /// Hex sha256 of the raw dataset bytes.
    pub hash: String,
    pub counts: DatasetCounts,
    pub warnings: Vec<String>,
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Reads a dataset file, or `dataset.json` inside a directory.
pub fn load_dataset(path: &Path) -> Result<LoadedDataset, LoadError> {
    let file = if path.is_dir() { path.join("dataset.json") } else { path.to_path_buf() };
    let bytes = std::fs::read(&file).map_err(|source| LoadError::Io {
        path: file.display().to_string(),
        source,
    })?;
    let dataset: Dataset = serde_json::from_slice(&bytes).map_err(|source| LoadError::Json {
        path: file.display().to_string(),
        source,
    })?;
    prepare(dataset, hash_bytes(&bytes))
}

pub fn load_dataset_str(text: &str) -> Result<LoadedDataset, LoadError> {
    let dataset: Dataset = serde_json::from_str(text).map_err(|source| LoadError::Json {
        path: "<inline>".into(),
        source,
    })?;
    prepare(dataset, hash_bytes(text.as_bytes()))
}

/// Validates, folds indexed popularity updates into their tasks, and counts.
pub fn prepare(mut dataset: Dataset, hash: String) -> Result<LoadedDataset, LoadError> {
    let map = match CampusMap::from_document(dataset.map.clone()) {
        Ok(m) => Arc::new(m),
        Err(e) => {
            return Err(LoadError::Invalid(vec![ValidationIssue {
                path: "map".into(),
                message: e.to_string(),
            }]))
        }
    };
    let issues = validate(&dataset, &map);
    if !issues.is_empty() {
        return Err(LoadError::Invalid(issues));
    }
    for iu in std::mem::take(&mut dataset.popularity_updates) {
        dataset.tasks[iu.task_index].world_updates.extend(iu.updates);
    }
    let counts = DatasetCounts::of(&dataset.tasks);
    let warnings = dataset
        .declared_counts
        .as_ref()
        .map(|d| counts.differences(d))
        .unwrap_or_default();
    for w in &warnings {
        tracing::warn!("declared count mismatch: {w}");
    }
    Ok(LoadedDataset {
        dataset,
        map,
        hash,
        counts,
        warnings,
    })
}

fn validate(ds: &Dataset, map: &CampusMap) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();
    let mut err = |path: String, message: String| issues.push(ValidationIssue { path, message });

    for (name, result) in [
        ("bibliography", ds.bibliography.validate()),
        ("directory", ds.directory.validate()),
        (
            "library_books",
            LibraryCatalog {
                books: ds.library_books.clone(),
            }
            .validate(),
        ),
    ] {
        if let Err(m) = result {
            err(name.into(), m);
        }
    }
    for (i, b) in ds.library_books.iter().enumerate() {
        if !map.contains(b.location.as_str()) {
            err(format!("library_books[{i}].location"), format!("unknown building {}", b.location));
        }
    }

    let mut section_ids = BTreeSet::new();
    for (i, s) in ds.catalog.iter().enumerate() {
        if !section_ids.insert(s.section_id.as_str()) {
            err(format!("catalog[{i}].section_id"), format!("duplicate section {}", s.section_id));
        }
        if s.popularity_index > 100 {
            err(format!("catalog[{i}].popularity_index"), format!("{} is outside [0,100]", s.popularity_index));
        }
    }
    let check_update = |path: String, u: &PopularityUpdate, err: &mut dyn FnMut(String, String)| {
        if !section_ids.contains(u.section_id.as_str()) {
            err(format!("{path}.section_id"), format!("unknown section {}", u.section_id));
        }
        if u.popularity.is_some_and(|p| p > 100) {
            err(format!("{path}.popularity"), format!("{} is outside [0,100]", u.popularity.unwrap()));
        }
    };
    for (i, iu) in ds.popularity_updates.iter().enumerate() {
        if iu.task_index >= ds.tasks.len() {
            err(format!("popularity_updates[{i}].task_index"), format!("no task at index {}", iu.task_index));
        }
        for (j, u) in iu.updates.iter().enumerate() {
            check_update(format!("popularity_updates[{i}].updates[{j}]"), u, &mut err);
        }
    }

    let mut space_keys = BTreeSet::new();
    for (i, s) in ds.spaces.iter().enumerate() {
        if !map.contains(s.location_id.as_str()) {
            err(format!("spaces[{i}].location_id"), format!("unknown building {}", s.location_id));
        }
        if !space_keys.insert((s.location_id.as_str(), s.item_name.to_lowercase())) {
            err(format!("spaces[{i}]"), format!("duplicate space {} at {}", s.item_name, s.location_id));
        }
        let seats: BTreeSet<&str> = s.seats.iter().map(String::as_str).collect();
        if seats.len() != s.seats.len() {
            err(format!("spaces[{i}].seats"), "duplicate seat id".into());
        }
    }
    let space = |loc: &str, item: &str| {
        ds.spaces
            .iter()
            .find(|s| s.location_id.as_str() == loc && s.item_name.eq_ignore_ascii_case(item))
    };

    let calendar_ids: BTreeSet<String> = std::iter::once("self".to_string())
        .chain(ds.directory.entities.iter().flat_map(|e| [e.id.to_lowercase(), e.email.to_lowercase()]))
        .collect();
    for key in ds.calendars.keys() {
        if !calendar_ids.contains(&key.to_lowercase()) {
            err(format!("calendars.{key}"), "calendar does not resolve to self, a club or an advisor".into());
        }
    }

    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let index_of: BTreeMap<&str, usize> = ds.tasks.iter().enumerate().map(|(i, t)| (t.task_id.as_str(), i)).collect();
    let mut prev_start: Option<TimePoint> = None;
    for (i, t) in ds.tasks.iter().enumerate() {
        let p = format!("tasks[{i}:{}]", t.task_id);
        if seen.insert(&t.task_id, i).is_some() {
            err(format!("{p}.task_id"), format!("duplicate task id {}", t.task_id));
        }
        if let Some(prev) = prev_start {
            if t.start_time < prev {
                err(format!("{p}.start_time"), format!("{} is earlier than the previous task's {}", t.start_time, prev));
            }
        }
        prev_start = Some(t.start_time);
        for (j, d) in t.depends_on.iter().enumerate() {
            match index_of.get(d.task_id.as_str()) {
                None => err(format!("{p}.depends_on[{j}]"), format!("unknown task {}", d.task_id)),
                Some(&k) if k >= i => err(
                    format!("{p}.depends_on[{j}]"),
                    format!("{} depends on {} which does not come earlier", t.task_id, d.task_id),
                ),
                _ => {}
            }
        }
        if let Some(src) = &t.memory_source {
            match index_of.get(src.as_str()) {
                Some(&k) if k < i => {}
                _ => err(format!("{p}.memory_source"), format!("{src} is not an earlier task")),
            }
        }
        for (j, sys) in t.tool_whitelist.iter().enumerate() {
            if !TOOL_SYSTEMS.contains(&sys.as_str()) {
                err(format!("{p}.tool_whitelist[{j}]"), format!("unknown tool system `{sys}`"));
            }
        }
        if t.flags.self_motivated && t.trigger.is_none() {
            err(format!("{p}.trigger"), "self-motivated tasks need a trigger".into());
        }
        if let Some(tr) = &t.trigger {
            if tr.announce_at > tr.execute_window.start() {
                err(format!("{p}.trigger.announce_at"), "announcement comes after the execution window opens".into());
            }
            if let Some(b) = &tr.required_presence {
                if !map.contains(b.as_str()) {
                    err(format!("{p}.trigger.required_presence"), format!("unknown building {b}"));
                }
            }
        }
        if let Some(sem) = t.semester {
            if !ds.pass_allocations.contains_key(&sem) {
                err(format!("{p}.semester"), format!("no pass allocation for semester {sem}"));
            }
        }
        for (j, u) in t.world_updates.iter().enumerate() {
            check_update(format!("{p}.world_updates[{j}]"), u, &mut err);
        }
        if let Some(rc) = &t.reservation_constraints {
            match space(rc.location_id.as_str(), &rc.item_name) {
                None => err(
                    format!("{p}.reservation_constraints"),
                    format!("unknown space {} at {}", rc.item_name, rc.location_id),
                ),
                Some(s) => {
                    if let Some(v) = s.violated_attribute(&rc.required_attributes) {
                        err(
                            format!("{p}.reservation_constraints.required_attributes"),
                            format!("ground-truth space lacks `{v}`"),
                        );
                    }
                    if s.seats.is_empty() != rc.seat_id.is_none()
                        || rc.seat_id.as_ref().is_some_and(|x| !s.seats.contains(x))
                    {
                        err(format!("{p}.reservation_constraints.seat_id"), "seat does not match the space".into());
                    }
                }
            }
        }
        validate_truth(&t.ground_truth, &format!("{p}.ground_truth"), ds, map, &section_ids, &calendar_ids, &mut err);
    }

    if let Some(cycle) = find_cycle(&ds.tasks) {
        err("tasks".into(), format!("dependency cycle: {}", cycle.join(" -> ")));
    }
    issues
}

fn validate_truth(
    g: &GroundTruth,
    path: &str,
    ds: &Dataset,
    map: &CampusMap,
    sections: &BTreeSet<&str>,
    calendars: &BTreeSet<String>,
    err: &mut dyn FnMut(String, String),
) {
    let building = |p: String, b: &str, err: &mut dyn FnMut(String, String)| {
        if !map.contains(b) {
            err(p, format!("unknown building {b}"));
        }
    };
    match g {
        GroundTruth::Answer { .. } | GroundTruth::Email { .. } => {}
        GroundTruth::Path { path: route, waypoints, .. } => {
            let list = match (route, waypoints) {
                (Some(r), None) => r,
                (None, Some(w)) if w.len() >= 2 => w,
                _ => {
                    err(path.into(), "path truth needs exactly one of `path` or `waypoints` (at least two)".into());
                    return;
                }
            };
            for (i, b) in list.iter().enumerate() {
                building(format!("{path}.path[{i}]"), b.as_str(), err);
            }
        }
        GroundTruth::Booking { location_id, item_name, .. } => {
            if !ds
                .spaces
                .iter()
                .any(|s| &s.location_id == location_id && s.item_name.eq_ignore_ascii_case(item_name))
            {
                err(format!("{path}.item_name"), format!("unknown space {item_name} at {location_id}"));
            }
        }
        GroundTruth::Registration { enrolled, passes } => {
            for (i, s) in enrolled.iter().enumerate() {
                if !sections.contains(s.as_str()) {
                    err(format!("{path}.enrolled[{i}]"), format!("unknown section {s}"));
                }
            }
            for s in passes.iter().flat_map(|p| p.keys()) {
                if !enrolled.contains(s) {
                    err(format!("{path}.passes.{s}"), "pass pinned for a section not in `enrolled`".into());
                }
            }
        }
        GroundTruth::Calendar { entries } => {
            for (i, e) in entries.iter().enumerate() {
                if !calendars.contains(&e.calendar_id.to_lowercase()) {
                    err(format!("{path}.entries[{i}].calendar_id"), format!("unknown calendar {}", e.calendar_id));
                }
            }
        }
        GroundTruth::Presence { building: b, .. } => building(format!("{path}.building"), b.as_str(), err),
        GroundTruth::Composite { parts } => {
            if parts.is_empty() {
                err(path.into(), "composite truth has no parts".into());
            }
            for (i, part) in parts.iter().enumerate() {
                validate_truth(part, &format!("{path}.parts[{i}]"), ds, map, sections, calendars, err);
            }
        }
    }
}

/// Returns one dependency cycle as a closed id path, if any exists.
pub fn find_cycle(tasks: &[TaskSpec]) -> Option<Vec<String>> {
    let edges: BTreeMap<&str, Vec<&str>> = tasks
        .iter()
        .map(|t| (t.task_id.as_str(), t.depends_on.iter().map(|d| d.task_id.as_str()).collect()))
        .collect();
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    let mut marks: BTreeMap<&str, Mark> = BTreeMap::new();
    for root in edges.keys() {
        if marks.contains_key(root) {
            continue;
        }
        let mut stack: Vec<(&str, usize)> = vec![(root, 0)];
        marks.insert(root, Mark::Open);
        while let Some(&mut (node, ref mut next)) = stack.last_mut() {
            let succ = edges.get(node).map(Vec::as_slice).unwrap_or(&[]);
            if *next < succ.len() {
                let s = succ[*next];
                *next += 1;
                match marks.get(s) {
                    Some(Mark::Open) => {
                        let start = stack.iter().position(|(n, _)| *n == s).unwrap();
                        let mut cycle: Vec<String> = stack[start..].iter().map(|(n, _)| n.to_string()).collect();
                        cycle.push(s.to_string());
                        return Some(cycle);
                    }
                    Some(Mark::Done) => {}
                    None if edges.contains_key(s) => {
                        marks.insert(s, Mark::Open);
                        stack.push((s, 0));
                    }
                    None => {}
                }
            } else {
                marks.insert(node, Mark::Done);
                stack.pop();
            }
        }
    }
    None
}

impl LoadedDataset {
    /// The world before the first task, with calendars seeded.
    pub fn initial_world(&self, seed: u64) -> WorldState {
        let ds = &self.dataset;
        let mut calendars = CalendarStore::new();
        for e in &ds.directory.entities {
            let class = match e.entity_type {
                EntityType::Club => PermissionClass::AppendOnly,
                EntityType::Advisor => PermissionClass::FreeBusy,
            };
            calendars.register(&e.id, Some(&e.email), class);
        }
        let mut counter = 0;
        for (cal, events) in &ds.calendars {
            for ev in events {
                calendars
                    .seed_event(cal, ev.clone(), &mut counter)
                    .expect("calendar ids are validated at load");
            }
        }
        WorldState {
            clock: ds.start_time,
            location: self.map.default_start_building().clone(),
            map: self.map.clone(),
            calendars,
            courses: CourseStore::new(ds.catalog.clone(), ds.completed_courses.iter().cloned().collect()),
            reservations: ReservationStore::new(ds.spaces.clone()),
            emails: EmailLog::default(),
            bibliography: Arc::new(ds.bibliography.clone()),
            directory: Arc::new(ds.directory.clone()),
            library: Arc::new(LibraryCatalog {
                books: ds.library_books.clone(),
            }),
            rng_seed: seed,
            event_counter: counter,
        }
    }

    pub fn task_index(&self, task_id: &str) -> Option<usize> {
        self.dataset.tasks.iter().position(|t| t.task_id == task_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::task::{Dependency, DependencyKind, Letter, TaskFlags};

    fn task(id: &str, deps: &[&str]) -> TaskSpec {
        TaskSpec {
            task_id: id.into(),
            scenario: Scenario::MidtermExam,
            instruction: "q".into(),
            start_time: "Week 0, Monday, 09:00".parse().unwrap(),
            tool_whitelist: vec![],
            ground_truth: GroundTruth::Answer { answer: Letter('A') },
            flags: TaskFlags::default(),
            trigger: None,
            depends_on: deps
                .iter()
                .map(|d| Dependency {
                    task_id: d.to_string(),
                    kind: DependencyKind::Soft,
                })
                .collect(),
            world_updates: vec![],
            semester: None,
            reservation_constraints: None,
            memory_source: None,
        }
    }

    fn dataset(tasks: Vec<TaskSpec>) -> Dataset {
        let map: MapDocument = serde_json::from_value(serde_json::json!({
            "buildings": [{"id": "B001", "name": "Library", "zone": "Central", "building_type": "Library"}],
            "edges": [],
            "default_start_building": "B001"
        }))
        .unwrap();
        Dataset {
            name: "t".into(),
            start_time: "Week 0, Monday, 08:00".parse().unwrap(),
            map,
            catalog: vec![],
            completed_courses: vec![],
            pass_allocations: BTreeMap::new(),
            popularity_updates: vec![],
            spaces: vec![],
            calendars: BTreeMap::new(),
            bibliography: Bibliography::default(),
            directory: Directory::default(),
            library_books: vec![],
            tasks,
            declared_counts: None,
        }
    }

    fn issues(ds: Dataset) -> Vec<ValidationIssue> {
        match prepare(ds, "h".into()) {
            Err(LoadError::Invalid(i)) => i,
            Ok(_) => vec![],
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn forward_dependency_is_rejected() {
        let found = issues(dataset(vec![task("a", &["b"]), task("b", &[])]));
        assert!(found.iter().any(|i| i.path == "tasks[0:a].depends_on[0]"), "{found:?}");
    }

    #[test]
    fn cycle_is_reported_with_its_path() {
        let found = issues(dataset(vec![task("a", &["b"]), task("b", &["a"])]));
        let cyc = found.iter().find(|i| i.message.contains("cycle")).unwrap();
        assert!(cyc.message.contains("a -> b -> a"), "{}", cyc.message);
    }

    #[test]
    fn dangling_presence_building_names_the_task() {
        let mut t = task("a", &[]);
        t.ground_truth = GroundTruth::Presence {
            building: "B404".into(),
            window: "Week 0, Monday, 09:00-10:00".parse().unwrap(),
        };
        let found = issues(dataset(vec![t]));
        assert_eq!(found[0].path, "tasks[0:a].ground_truth.building");
    }

    #[test]
    fn self_motivated_needs_trigger() {
        let mut t = task("a", &[]);
        t.flags.self_motivated = true;
        assert!(issues(dataset(vec![t])).iter().any(|i| i.path == "tasks[0:a].trigger"));
    }

    #[test]
    fn declared_mismatch_is_a_warning() {
        let mut ds = dataset(vec![task("a", &[])]);
        let mut declared = DatasetCounts::of(&ds.tasks);
        declared.ltm = 5;
        ds.declared_counts = Some(declared);
        let loaded = prepare(ds, "h".into()).unwrap();
        assert_eq!(loaded.warnings.len(), 1);
        assert!(loaded.warnings[0].contains("ltm"));
    }

    #[test]
    fn released_counts_are_consistent() {
        let c = released_dataset_counts();
        let sum = |f: fn(&ScenarioCount) -> u32| c.scenarios.values().map(f).sum::<u32>();
        assert_eq!(sum(|s| s.num), c.total);
        assert_eq!(sum(|s| s.ltm), c.ltm);
        assert_eq!(sum(|s| s.self_motivated), c.self_motivated);
        assert_eq!(ScenarioGroup::ALL.iter().map(|g| c.group(*g)).sum::<u32>() + 1, c.total);
    }
}
