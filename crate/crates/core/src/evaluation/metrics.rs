use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::record::{OutcomeRecord, SquanderedBooking};
use crate::task::{Scenario, ScenarioGroup};

pub const EXAM_POINTS: f64 = 50.0;
pub const CLASS_POINTS: f64 = 30.0;
pub const ADVISOR_POINTS: f64 = 8.0;
pub const CLUB_POINTS: f64 = 6.0;
pub const RESPONSIBILITY_POINTS: f64 = 6.0;
pub const INFRACTION_DEDUCTION: f64 = 1.0;

fn ratio(num: u32, den: u32) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn percent(num: u32, den: u32) -> Option<f64> {
    ratio(num, den).map(|r| r * 100.0)
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0u32), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Success share and mean turns of successful tasks over one subset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RateStat {
    pub count: u32,
    pub successes: u32,
    pub success_rate: Option<f64>,
    pub avg_turns: Option<f64>,
}

impl RateStat {
    pub fn over<'a>(records: impl IntoIterator<Item = &'a OutcomeRecord>) -> Self {
        let mut s = RateStat::default();
        let mut turns = 0u64;
        for r in records {
            s.count += 1;
            if r.success {
                s.successes += 1;
                turns += r.turns as u64;
            }
        }
        s.success_rate = percent(s.successes, s.count);
        s.avg_turns = (s.successes > 0).then(|| turns as f64 / s.successes as f64);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fraction {
    pub numerator: u32,
    pub denominator: u32,
    pub percent: Option<f64>,
}

impl Fraction {
    pub fn new(numerator: u32, denominator: u32) -> Self {
        Self {
            numerator,
            denominator,
            percent: percent(numerator, denominator),
        }
    }
}

/// Raw rates feeding the composite grade; rates are in [0,1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StuGpaInputs {
    pub exam_accuracy: Option<f64>,
    pub attendance_rate: Option<f64>,
    pub advisor_rate: Option<f64>,
    pub club_rate: Option<f64>,
    pub infractions: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StuGpa {
    pub total: Option<f64>,
    pub exam_points: Option<f64>,
    pub class_points: Option<f64>,
    pub campus_points: Option<f64>,
    pub advisor_points: Option<f64>,
    pub club_points: Option<f64>,
    pub responsibility_points: f64,
    pub infractions: u32,
}

pub fn stugpa(inputs: StuGpaInputs) -> StuGpa {
    let exam = inputs.exam_accuracy.map(|r| EXAM_POINTS * r);
    let class = inputs.attendance_rate.map(|r| CLASS_POINTS * r);
    let advisor = inputs.advisor_rate.map(|r| ADVISOR_POINTS * r);
    let club = inputs.club_rate.map(|r| CLUB_POINTS * r);
    let responsibility = (RESPONSIBILITY_POINTS - INFRACTION_DEDUCTION * inputs.infractions as f64).max(0.0);
    let campus = match (advisor, club) {
        (Some(a), Some(c)) => Some(a + c + responsibility),
        _ => None,
    };
    let total = match (exam, class, campus) {
        (Some(e), Some(c), Some(d)) => Some(e + c + d),
        _ => None,
    };
    StuGpa {
        total,
        exam_points: exam,
        class_points: class,
        campus_points: campus,
        advisor_points: advisor,
        club_points: club,
        responsibility_points: responsibility,
        infractions: inputs.infractions,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Totals {
    pub per_task: RateStat,
    /// Unweighted mean of the group success rates.
    pub success_rate_group_mean: Option<f64>,
    /// Unweighted mean of the group AvgTurns.
    pub avg_turns_group_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoreMetrics {
    pub stugpa: StuGpa,
    pub stugpa_inputs: StuGpaInputs,
    pub exam: Fraction,
    pub attendance: Fraction,
    pub advisor: Fraction,
    pub club: Fraction,
    pub ltrr: Fraction,
    pub pis: Fraction,
    pub scenarios: BTreeMap<Scenario, RateStat>,
    pub groups: BTreeMap<ScenarioGroup, RateStat>,
    pub totals: Totals,
}

fn fraction_where<'a>(
    records: &'a [OutcomeRecord],
    include: impl Fn(&OutcomeRecord) -> bool,
    pass: impl Fn(&OutcomeRecord) -> bool,
) -> Fraction {
    let subset: Vec<&'a OutcomeRecord> = records.iter().filter(|r| include(r)).collect();
    Fraction::new(subset.iter().filter(|r| pass(r)).count() as u32, subset.len() as u32)
}

/// Number of responsibility infractions over a run.
pub fn count_infractions(records: &[OutcomeRecord], squandered: &[SquanderedBooking]) -> u32 {
    squandered.len() as u32 + records.iter().filter(|r| r.broken_commitment).count() as u32
}

pub fn compute_core_metrics(records: &[OutcomeRecord], squandered: &[SquanderedBooking]) -> CoreMetrics {
    let exam = fraction_where(records, |r| r.scenario.is_exam(), |r| r.success);
    let attendance = fraction_where(records, |r| r.scenario.group() == ScenarioGroup::InClass, OutcomeRecord::attended);
    let advisor = fraction_where(records, |r| r.scenario == Scenario::AcademicActivity, |r| r.success);
    let club = fraction_where(records, |r| r.scenario == Scenario::ClubActivity, |r| r.success);
    let ltrr = fraction_where(records, |r| r.flags.needs_ltm, |r| r.success);
    let pis = fraction_where(records, |r| r.flags.self_motivated, |r| r.proactive_success == Some(true));

    let inputs = StuGpaInputs {
        exam_accuracy: ratio(exam.numerator, exam.denominator),
        attendance_rate: ratio(attendance.numerator, attendance.denominator),
        advisor_rate: ratio(advisor.numerator, advisor.denominator),
        club_rate: ratio(club.numerator, club.denominator),
        infractions: count_infractions(records, squandered),
    };

    let scenarios: BTreeMap<Scenario, RateStat> = Scenario::ALL
        .iter()
        .map(|s| (*s, RateStat::over(records.iter().filter(|r| r.scenario == *s))))
        .collect();
    let groups: BTreeMap<ScenarioGroup, RateStat> = ScenarioGroup::ALL
        .iter()
        .map(|g| (*g, RateStat::over(records.iter().filter(|r| r.scenario.group() == *g))))
        .collect();
    let totals = Totals {
        per_task: RateStat::over(records),
        success_rate_group_mean: mean(groups.values().filter_map(|g| g.success_rate)),
        avg_turns_group_mean: mean(groups.values().filter_map(|g| g.avg_turns)),
    };

    CoreMetrics {
        stugpa: stugpa(inputs),
        stugpa_inputs: inputs,
        exam,
        attendance,
        advisor,
        club,
        ltrr,
        pis,
        scenarios,
        groups,
        totals,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Efficiency {
    pub total_turns: u64,
    pub tokens_in_total: Option<u64>,
    pub tokens_out_total: Option<u64>,
    pub tokens_per_task: Option<f64>,
    pub mean_latency_ms: Option<f64>,
    pub memory_utilization: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_utilization_note: Option<String>,
}

/// Distance-weighted success over annotated long-term-memory tasks, with
/// weight equal to the distance.
pub fn memory_utilization(records: &[OutcomeRecord]) -> Option<f64> {
    let (num, den) = records
        .iter()
        .filter(|r| r.flags.needs_ltm)
        .filter_map(|r| r.memory_distance.map(|d| (r.success, d as f64)))
        .fold((0.0, 0.0), |(n, d), (ok, w)| (n + if ok { w } else { 0.0 }, d + w));
    (den > 0.0).then(|| num / den)
}

pub fn compute_efficiency(records: &[OutcomeRecord]) -> Efficiency {
    let sum_opt = |f: fn(&OutcomeRecord) -> Option<u64>| {
        records
            .iter()
            .filter_map(f)
            .fold(None, |acc: Option<u64>, x| Some(acc.unwrap_or(0) + x))
    };
    let tokens_in = sum_opt(|r| r.tokens_in);
    let tokens_out = sum_opt(|r| r.tokens_out);
    let latency = sum_opt(|r| r.latency_ms);
    let samples = sum_opt(|r| r.latency_samples);
    let with_tokens = records.iter().filter(|r| r.tokens_in.is_some() || r.tokens_out.is_some()).count();
    let memory = memory_utilization(records);
    Efficiency {
        total_turns: records.iter().map(|r| r.turns as u64).sum(),
        tokens_in_total: tokens_in,
        tokens_out_total: tokens_out,
        tokens_per_task: (with_tokens > 0)
            .then(|| (tokens_in.unwrap_or(0) + tokens_out.unwrap_or(0)) as f64 / with_tokens as f64),
        mean_latency_ms: match (latency, samples) {
            (Some(l), Some(n)) if n > 0 => Some(l as f64 / n as f64),
            _ => None,
        },
        memory_utilization: memory,
        memory_utilization_note: memory
            .is_none()
            .then(|| "no long-term-memory task names the task that introduced its knowledge".to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_sum_fixture() {
        let g = stugpa(StuGpaInputs {
            exam_accuracy: Some(0.5),
            attendance_rate: Some(1.0),
            advisor_rate: Some(1.0),
            club_rate: Some(1.0),
            infractions: 0,
        });
        assert!((g.total.unwrap() - 75.0).abs() < 1e-9);
    }

    #[test]
    fn responsibility_floors_at_zero() {
        let g = stugpa(StuGpaInputs {
            exam_accuracy: Some(1.0),
            attendance_rate: Some(1.0),
            advisor_rate: Some(1.0),
            club_rate: Some(1.0),
            infractions: 9,
        });
        assert_eq!(g.responsibility_points, 0.0);
        assert_eq!(g.total, Some(94.0));
    }

    #[test]
    fn missing_component_nulls_total() {
        let g = stugpa(StuGpaInputs {
            exam_accuracy: None,
            attendance_rate: Some(1.0),
            advisor_rate: Some(1.0),
            club_rate: Some(1.0),
            infractions: 0,
        });
        assert_eq!(g.total, None);
        assert_eq!(g.class_points, Some(30.0));
    }

    #[test]
    fn empty_run_has_null_rates() {
        let m = compute_core_metrics(&[], &[]);
        assert_eq!(m.ltrr.percent, None);
        assert_eq!(m.totals.per_task.success_rate, None);
        assert_eq!(m.stugpa.total, None);
        let e = compute_efficiency(&[]);
        assert_eq!(e.tokens_in_total, None);
        assert_eq!(e.mean_latency_ms, None);
        assert!(e.memory_utilization_note.is_some());
    }
}
