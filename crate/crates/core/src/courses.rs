//! Course catalog, draft schedule and priority-pass registration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{ToolError, ToolResult};
use crate::time::{format_clock, parse_clock_range, TimeError, Weekday};

/// Sections below this popularity enroll without a pass when seats remain.
pub const UNASSISTED_THRESHOLD: u8 = 85;
pub const A_PASS_THRESHOLD: u8 = 95;
pub const B_PASS_THRESHOLD: u8 = 85;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PassType {
    S,
    A,
    B,
}

impl PassType {
    pub const ALL: [PassType; 3] = [PassType::S, PassType::A, PassType::B];

    pub fn label(self) -> &'static str {
        match self {
            PassType::S => "S-Pass",
            PassType::A => "A-Pass",
            PassType::B => "B-Pass",
        }
    }

    /// Whether this pass secures a seat at the given popularity.
    pub fn admits(self, popularity: u8) -> bool {
        match self {
            PassType::S => true,
            PassType::A => popularity < A_PASS_THRESHOLD,
            PassType::B => popularity < B_PASS_THRESHOLD,
        }
    }
}

impl fmt::Display for PassType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PassType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_uppercase();
        let t = t.strip_suffix("-PASS").or_else(|| t.strip_suffix(" PASS")).unwrap_or(&t);
        match t {
            "S" => Ok(PassType::S),
            "A" => Ok(PassType::A),
            "B" => Ok(PassType::B),
            _ => Err(format!("unknown pass type `{}` (expected S-Pass, A-Pass or B-Pass)", s.trim())),
        }
    }
}

impl Serialize for PassType {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.label())
    }
}

impl<'de> Deserialize<'de> for PassType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassCount {
    Limited(u32),
    Unlimited,
}

impl PassCount {
    pub fn available(self, used: u32) -> bool {
        match self {
            PassCount::Limited(n) => used < n,
            PassCount::Unlimited => true,
        }
    }
}

impl Serialize for PassCount {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PassCount::Limited(n) => s.serialize_u32(*n),
            PassCount::Unlimited => s.serialize_str("unlimited"),
        }
    }
}

impl<'de> Deserialize<'de> for PassCount {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u32),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(n) => Ok(PassCount::Limited(n)),
            Raw::S(s) if s.eq_ignore_ascii_case("unlimited") => Ok(PassCount::Unlimited),
            Raw::S(s) => Err(serde::de::Error::custom(format!("invalid pass count `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PassInventory(pub BTreeMap<PassType, PassCount>);

impl PassInventory {
    pub fn count(&self, pass: PassType) -> PassCount {
        self.0.get(&pass).copied().unwrap_or(PassCount::Limited(0))
    }

    fn consume(&mut self, pass: PassType) {
        if let Some(PassCount::Limited(n)) = self.0.get_mut(&pass) {
            *n = n.saturating_sub(1);
        }
    }
}

/// A recurring weekly meeting, written `Monday, 10:00-11:40`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct WeeklySlot {
    pub day: Weekday,
    pub start_minute: u16,
    pub end_minute: u16,
}

impl fmt::Display for WeeklySlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}, {}-{}",
            self.day,
            format_clock(self.start_minute),
            format_clock(self.end_minute)
        )
    }
}

impl FromStr for WeeklySlot {
    type Err = TimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (day, clock) = s.split_once(',').ok_or_else(|| TimeError::WrongShape {
            expected: "`Day, HH:MM-HH:MM`",
            input: s.to_string(),
        })?;
        let (start_minute, end_minute) = parse_clock_range(clock)?;
        Ok(WeeklySlot {
            day: day.trim().parse()?,
            start_minute,
            end_minute,
        })
    }
}

impl Serialize for WeeklySlot {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WeeklySlot {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CourseSection {
    pub section_id: String,
    pub course_code: String,
    pub course_name: String,
    pub credits: u32,
    pub popularity_index: u8,
    pub seats_available: u32,
    #[serde(default)]
    pub meeting_times: Vec<WeeklySlot>,
    #[serde(default)]
    pub required_flag: bool,
    #[serde(default)]
    pub prerequisites: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CourseFilter {
    #[serde(default)]
    pub course_code: Option<String>,
    #[serde(default)]
    pub course_name: Option<String>,
    #[serde(default)]
    pub credits: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum SectionOutcome {
    Enrolled {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pass: Option<PassType>,
    },
    RejectedPopularity {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pass: Option<PassType>,
    },
    RejectedNoSeats,
    RejectedPrerequisite {
        missing: Vec<String>,
    },
}

impl SectionOutcome {
    pub fn enrolled(&self) -> bool {
        matches!(self, SectionOutcome::Enrolled { .. })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegistrationResult {
    pub outcomes: BTreeMap<String, SectionOutcome>,
    pub passes_consumed: BTreeMap<PassType, u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PopularityUpdate {
    pub section_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub popularity: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seats: Option<u32>,
}

/// The pure enrollment rule for one drafted section.
pub fn decide(popularity: u8, seats: u32, pass: Option<PassType>) -> SectionOutcome {
    match pass {
        Some(p) if p.admits(popularity) => SectionOutcome::Enrolled { pass: Some(p) },
        Some(p) => SectionOutcome::RejectedPopularity { pass: Some(p) },
        None if popularity >= UNASSISTED_THRESHOLD => SectionOutcome::RejectedPopularity { pass: None },
        None if seats == 0 => SectionOutcome::RejectedNoSeats,
        None => SectionOutcome::Enrolled { pass: None },
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CourseStore {
    catalog: BTreeMap<String, CourseSection>,
    draft: BTreeMap<String, Option<PassType>>,
    inventory: PassInventory,
    enrolled: BTreeSet<String>,
    completed_courses: BTreeSet<String>,
    semester: Option<u32>,
}

impl CourseStore {
    pub fn new(catalog: Vec<CourseSection>, completed_courses: BTreeSet<String>) -> Self {
        Self {
            catalog: catalog.into_iter().map(|s| (s.section_id.clone(), s)).collect(),
            completed_courses,
            ..Default::default()
        }
    }

    pub fn section(&self, id: &str) -> ToolResult<&CourseSection> {
        self.catalog
            .get(id.trim())
            .ok_or_else(|| ToolError::NotFound(format!("no course section `{}`", id.trim())))
    }

    pub fn semester(&self) -> Option<u32> {
        self.semester
    }

    pub fn inventory(&self) -> &PassInventory {
        &self.inventory
    }

    pub fn enrolled(&self) -> &BTreeSet<String> {
        &self.enrolled
    }

    pub fn draft(&self) -> &BTreeMap<String, Option<PassType>> {
        &self.draft
    }

    /// Starts a new registration period with a fresh pass allocation.
    pub fn begin_semester(&mut self, semester: u32, allocation: PassInventory) {
        self.semester = Some(semester);
        self.inventory = allocation;
        self.draft.clear();
    }

    pub fn set_inventory(&mut self, inventory: PassInventory) {
        self.inventory = inventory;
    }

    pub fn browse(&self, filter: &CourseFilter) -> Vec<&CourseSection> {
        let name = filter.course_name.as_deref().map(|n| n.trim().to_lowercase());
        self.catalog
            .values()
            .filter(|s| {
                filter
                    .course_code
                    .as_deref()
                    .is_none_or(|c| s.course_code.eq_ignore_ascii_case(c.trim()))
            })
            .filter(|s| name.as_deref().is_none_or(|n| s.course_name.to_lowercase().contains(n)))
            .filter(|s| filter.credits.is_none_or(|c| s.credits == c))
            .collect()
    }

    pub fn add_to_draft(&mut self, section_id: &str) -> ToolResult<()> {
        let id = self.section(section_id)?.section_id.clone();
        if self.enrolled.contains(&id) {
            return Err(ToolError::Precondition(format!("already enrolled in {id}")));
        }
        self.draft.entry(id).or_insert(None);
        Ok(())
    }

    pub fn remove_from_draft(&mut self, section_id: &str) -> ToolResult<()> {
        let id = self.section(section_id)?.section_id.clone();
        self.draft
            .remove(&id)
            .map(|_| ())
            .ok_or_else(|| ToolError::Precondition(format!("{id} is not in the draft")))
    }

    pub fn assign_pass(&mut self, section_id: &str, pass: PassType) -> ToolResult<()> {
        let id = self.section(section_id)?.section_id.clone();
        let Some(current) = self.draft.get(&id).copied() else {
            return Err(ToolError::Precondition(format!("{id} is not in the draft")));
        };
        let in_use = self
            .draft
            .iter()
            .filter(|(k, p)| **k != id && **p == Some(pass))
            .count() as u32;
        if current != Some(pass) && !self.inventory.count(pass).available(in_use) {
            return Err(ToolError::Inventory(format!("no {pass} left to assign")));
        }
        self.draft.insert(id, Some(pass));
        Ok(())
    }

    /// Registers every drafted section in id order. Enrolled sections leave
    /// the draft; rejected ones stay so the agent can adjust and retry.
    pub fn submit(&mut self) -> ToolResult<RegistrationResult> {
        if self.draft.is_empty() {
            return Err(ToolError::Precondition("the draft schedule is empty".into()));
        }
        let mut result = RegistrationResult::default();
        let drafted: Vec<(String, Option<PassType>)> =
            self.draft.iter().map(|(k, v)| (k.clone(), *v)).collect();
        for (id, pass) in drafted {
            let section = &self.catalog[&id];
            let have: BTreeSet<&str> = self
                .completed_courses
                .iter()
                .map(String::as_str)
                .chain(self.enrolled.iter().map(|s| self.catalog[s].course_code.as_str()))
                .collect();
            let missing: Vec<String> = section
                .prerequisites
                .iter()
                .filter(|p| !have.contains(p.as_str()))
                .cloned()
                .collect();
            let outcome = if missing.is_empty() {
                decide(section.popularity_index, section.seats_available, pass)
            } else {
                SectionOutcome::RejectedPrerequisite { missing }
            };
            if outcome.enrolled() {
                let section = self.catalog.get_mut(&id).unwrap();
                section.seats_available = section.seats_available.saturating_sub(1);
                if let Some(p) = pass {
                    self.inventory.consume(p);
                    *result.passes_consumed.entry(p).or_default() += 1;
                }
                self.enrolled.insert(id.clone());
                self.draft.remove(&id);
            }
            result.outcomes.insert(id, outcome);
        }
        Ok(result)
    }

    pub fn apply_update(&mut self, update: &PopularityUpdate) -> Result<(), String> {
        let section = self
            .catalog
            .get_mut(&update.section_id)
            .ok_or_else(|| format!("unknown section {}", update.section_id))?;
        if let Some(p) = update.popularity {
            if p > 100 {
                return Err(format!("popularity {p} out of range for {}", update.section_id));
            }
            section.popularity_index = p;
        }
        if let Some(s) = update.seats {
            section.seats_available = s;
        }
        Ok(())
    }

    pub fn contains(&self, section_id: &str) -> bool {
        self.catalog.contains_key(section_id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn section(id: &str, code: &str, popularity: u8, seats: u32) -> CourseSection {
        CourseSection {
            section_id: id.into(),
            course_code: code.into(),
            course_name: format!("Introduction to {code}"),
            credits: 3,
            popularity_index: popularity,
            seats_available: seats,
            meeting_times: vec!["Monday, 10:00-11:40".parse().unwrap()],
            required_flag: false,
            prerequisites: vec![],
        }
    }

    fn inventory(s: u32, a: u32) -> PassInventory {
        PassInventory(
            [
                (PassType::S, PassCount::Limited(s)),
                (PassType::A, PassCount::Limited(a)),
                (PassType::B, PassCount::Unlimited),
            ]
            .into_iter()
            .collect(),
        )
    }

    fn store(sections: Vec<CourseSection>) -> CourseStore {
        let mut s = CourseStore::new(sections, BTreeSet::new());
        s.begin_semester(1, inventory(1, 2));
        s
    }

    #[test]
    fn pass_boundaries() {
        assert!(decide(96, 10, Some(PassType::S)).enrolled());
        assert!(!decide(96, 10, Some(PassType::A)).enrolled());
        assert!(decide(94, 0, Some(PassType::A)).enrolled());
        assert!(decide(84, 10, Some(PassType::B)).enrolled());
        assert!(!decide(85, 10, Some(PassType::B)).enrolled());
        assert!(decide(84, 1, None).enrolled());
        assert_eq!(decide(84, 0, None), SectionOutcome::RejectedNoSeats);
        assert!(!decide(85, 10, None).enrolled());
    }

    #[test]
    fn pass_parsing() {
        assert_eq!("A-Pass".parse::<PassType>().unwrap(), PassType::A);
        assert_eq!(" s ".parse::<PassType>().unwrap(), PassType::S);
        assert!("C-Pass".parse::<PassType>().is_err());
    }

    #[test]
    fn browse_filters() {
        let mut other = section("SHK003111017", "MATH101", 50, 5);
        other.course_name = "Calculus".into();
        let s = store(vec![section("WXK003111107", "CS101", 50, 5), other]);
        assert_eq!(s.browse(&CourseFilter::default()).len(), 2);
        let f = CourseFilter {
            course_name: Some("introduction".into()),
            ..Default::default()
        };
        assert_eq!(s.browse(&f).len(), 1);
        let f = CourseFilter {
            credits: Some(99),
            ..Default::default()
        };
        assert!(s.browse(&f).is_empty());
    }

    #[test]
    fn inventory_limits_assignment() {
        let mut s = store(vec![section("X1", "A", 96, 5), section("X2", "B", 97, 5)]);
        s.add_to_draft("X1").unwrap();
        s.add_to_draft("X2").unwrap();
        s.assign_pass("X1", PassType::S).unwrap();
        assert!(matches!(s.assign_pass("X2", PassType::S), Err(ToolError::Inventory(_))));
        // reassigning the same pass to the same section is fine
        s.assign_pass("X1", PassType::S).unwrap();
        assert!(matches!(s.assign_pass("X9", PassType::A), Err(ToolError::NotFound(_))));
    }

    #[test]
    fn assign_requires_drafted_section() {
        let mut s = store(vec![section("X1", "A", 50, 5)]);
        assert!(matches!(s.assign_pass("X1", PassType::A), Err(ToolError::Precondition(_))));
    }

    #[test]
    fn submit_consumes_only_successful_passes() {
        let mut s = store(vec![section("X1", "A", 96, 5), section("X2", "B", 90, 5)]);
        s.add_to_draft("X1").unwrap();
        s.add_to_draft("X2").unwrap();
        s.assign_pass("X1", PassType::A).unwrap();
        s.assign_pass("X2", PassType::A).unwrap();
        let r = s.submit().unwrap();
        assert_eq!(r.outcomes["X1"], SectionOutcome::RejectedPopularity { pass: Some(PassType::A) });
        assert!(r.outcomes["X2"].enrolled());
        assert_eq!(r.passes_consumed[&PassType::A], 1);
        assert_eq!(s.inventory().count(PassType::A), PassCount::Limited(1));
        assert_eq!(s.section("X2").unwrap().seats_available, 4);
        assert_eq!(s.draft().keys().collect::<Vec<_>>(), ["X1"]);
    }

    #[test]
    fn empty_submit_changes_nothing() {
        let mut s = store(vec![section("X1", "A", 50, 5)]);
        let before = s.clone();
        assert!(matches!(s.submit(), Err(ToolError::Precondition(_))));
        assert_eq!(s, before);
    }

    #[test]
    fn prerequisites_are_enforced() {
        let mut adv = section("X2", "CS201", 10, 5);
        adv.prerequisites = vec!["CS101".into()];
        let mut s = store(vec![section("X1", "CS101", 10, 5), adv]);
        s.add_to_draft("X2").unwrap();
        let r = s.submit().unwrap();
        assert_eq!(r.outcomes["X2"], SectionOutcome::RejectedPrerequisite { missing: vec!["CS101".into()] });
        s.add_to_draft("X1").unwrap();
        let r = s.submit().unwrap();
        // X1 is processed first, so X2 sees its prerequisite in the same submit
        assert!(r.outcomes["X1"].enrolled() && r.outcomes["X2"].enrolled());
    }

    #[test]
    fn popularity_update_crosses_threshold() {
        let mut s = store(vec![section("X1", "A", 90, 5)]);
        s.apply_update(&PopularityUpdate {
            section_id: "X1".into(),
            popularity: Some(97),
            seats: None,
        })
        .unwrap();
        s.add_to_draft("X1").unwrap();
        s.assign_pass("X1", PassType::A).unwrap();
        assert!(!s.submit().unwrap().outcomes["X1"].enrolled());
        assert!(s
            .apply_update(&PopularityUpdate {
                section_id: "X1".into(),
                popularity: Some(101),
                seats: None
            })
            .is_err());
    }

    #[test]
    fn weekly_slot_round_trip() {
        let w: WeeklySlot = "Tuesday, 08:00-09:40".parse().unwrap();
        assert_eq!(w.to_string(), "Tuesday, 08:00-09:40");
        assert!("Tuesday 08:00".parse::<WeeklySlot>().is_err());
    }
}
