//! Benchmark task definitions and their ground truth.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::comms::EmailSpec;
use crate::courses::{PassType, PopularityUpdate};
use crate::map::{BuildingId, PathConstraints};
use crate::reservation::TaskConstraintSpec;
use crate::time::{TimePoint, TimeRange};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    RegulationsLearning,
    CoreCourseInstruction,
    CampusExploration,
    InitialCourseSelection,
    PreliminaryPlanning,
    AcademicActivity,
    LibraryStudy,
    ClubActivity,
    MidtermExam,
    FinalExam,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioGroup {
    InClass,
    DailyCampus,
    Examination,
}

impl ScenarioGroup {
    pub const ALL: [ScenarioGroup; 3] = [ScenarioGroup::InClass, ScenarioGroup::DailyCampus, ScenarioGroup::Examination];

    pub fn label(self) -> &'static str {
        match self {
            ScenarioGroup::InClass => "In-Class",
            ScenarioGroup::DailyCampus => "Daily Campus",
            ScenarioGroup::Examination => "Examination",
        }
    }
}

impl Scenario {
    pub const ALL: [Scenario; 10] = [
        Scenario::RegulationsLearning,
        Scenario::CoreCourseInstruction,
        Scenario::CampusExploration,
        Scenario::InitialCourseSelection,
        Scenario::PreliminaryPlanning,
        Scenario::AcademicActivity,
        Scenario::LibraryStudy,
        Scenario::ClubActivity,
        Scenario::MidtermExam,
        Scenario::FinalExam,
    ];

    pub fn group(self) -> ScenarioGroup {
        use Scenario::*;
        match self {
            RegulationsLearning | CoreCourseInstruction => ScenarioGroup::InClass,
            MidtermExam | FinalExam => ScenarioGroup::Examination,
            _ => ScenarioGroup::DailyCampus,
        }
    }

    pub fn label(self) -> &'static str {
        use Scenario::*;
        match self {
            RegulationsLearning => "Regulations Learning",
            CoreCourseInstruction => "Core Course Instruction",
            CampusExploration => "Campus Exploration",
            InitialCourseSelection => "Initial Course Selection",
            PreliminaryPlanning => "Preliminary Planning",
            AcademicActivity => "Academic Activity",
            LibraryStudy => "Library Study",
            ClubActivity => "Club Activity",
            MidtermExam => "Midterm Exam",
            FinalExam => "Final Exam",
        }
    }

    pub fn is_exam(self) -> bool {
        self.group() == ScenarioGroup::Examination
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskFlags {
    #[serde(default)]
    pub needs_ltm: bool,
    #[serde(default)]
    pub self_motivated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriggerSpec {
    pub announce_at: TimePoint,
    pub execute_window: TimeRange,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub required_presence: Option<BuildingId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DependencyKind {
    /// Failure of the target auto-fails this task.
    Hard,
    /// Recorded only.
    Soft,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dependency {
    pub task_id: String,
    pub kind: DependencyKind,
}

/// Single uppercase letter, written as a one-character string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Letter(pub char);

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0.to_string())
    }
}

impl<'de> Deserialize<'de> for Letter {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        let mut chars = s.trim().chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) if c.is_ascii_alphabetic() => Ok(Letter(c.to_ascii_uppercase())),
            _ => Err(serde::de::Error::custom(format!("expected a single letter, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpectedEvent {
    pub calendar_id: String,
    pub title: String,
    pub time: TimeRange,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GroundTruth {
    Answer {
        answer: Letter,
    },
    /// Either an explicit route, or waypoints whose legs are planned under
    /// `constraints` and joined.
    Path {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<Vec<BuildingId>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        waypoints: Option<Vec<BuildingId>>,
        #[serde(default)]
        constraints: PathConstraints,
    },
    Booking {
        location_id: BuildingId,
        item_name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seat_id: Option<String>,
        time_slot: TimeRange,
        /// Whether a later visit is expected; unattended bookings with this
        /// set count as squandered.
        #[serde(default = "yes")]
        attend: bool,
    },
    Email {
        email: EmailSpec,
    },
    Registration {
        enrolled: Vec<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        passes: Option<BTreeMap<String, Option<PassType>>>,
    },
    Calendar {
        entries: Vec<ExpectedEvent>,
    },
    Presence {
        building: BuildingId,
        window: TimeRange,
    },
    Composite {
        parts: Vec<GroundTruth>,
    },
}

fn yes() -> bool {
    true
}

impl GroundTruth {
    /// Depth-first walk over this truth and any composite parts.
    pub fn leaves(&self) -> Vec<&GroundTruth> {
        match self {
            GroundTruth::Composite { parts } => parts.iter().flat_map(GroundTruth::leaves).collect(),
            other => vec![other],
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            GroundTruth::Answer { .. } => "answer",
            GroundTruth::Path { .. } => "path",
            GroundTruth::Booking { .. } => "booking",
            GroundTruth::Email { .. } => "email",
            GroundTruth::Registration { .. } => "registration",
            GroundTruth::Calendar { .. } => "calendar",
            GroundTruth::Presence { .. } => "presence",
            GroundTruth::Composite { .. } => "composite",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub task_id: String,
    pub scenario: Scenario,
    pub instruction: String,
    /// Time the world clock advances to before the task is presented.
    pub start_time: TimePoint,
    pub tool_whitelist: Vec<String>,
    pub ground_truth: GroundTruth,
    #[serde(default)]
    pub flags: TaskFlags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trigger: Option<TriggerSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub depends_on: Vec<Dependency>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub world_updates: Vec<PopularityUpdate>,
    /// Starts a registration period with that semester's pass allocation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semester: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reservation_constraints: Option<TaskConstraintSpec>,
    /// Earlier task that introduced the knowledge this task recalls.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_source: Option<String>,
}

impl TaskSpec {
    /// Building and window where the agent must physically be, if any.
    pub fn presence_requirement(&self) -> Option<(BuildingId, TimeRange)> {
        self.ground_truth
            .leaves()
            .into_iter()
            .find_map(|g| match g {
                GroundTruth::Presence { building, window } => Some((building.clone(), *window)),
                _ => None,
            })
            .or_else(|| {
                self.trigger
                    .as_ref()
                    .and_then(|t| t.required_presence.clone().map(|b| (b, t.execute_window)))
            })
    }

    pub fn booking_truth(&self) -> Option<&GroundTruth> {
        self.ground_truth
            .leaves()
            .into_iter()
            .find(|g| matches!(g, GroundTruth::Booking { .. }))
    }

    pub fn hard_dependencies(&self) -> impl Iterator<Item = &str> {
        self.depends_on
            .iter()
            .filter(|d| d.kind == DependencyKind::Hard)
            .map(|d| d.task_id.as_str())
    }
}
