//! Simulated calendar time.
//!
//! Time is kept as `(week, weekday, minute_of_day)` triples. The textual
//! forms `Week X, Day`, `Week X, Day, HH:MM` and `Week X, Day, HH:MM-HH:MM`
//! are surface syntax only; everything internal compares integers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const MINUTES_PER_DAY: u16 = 24 * 60;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimeError {
    #[error("malformed time `{input}`: unexpected token `{token}`")]
    Malformed { input: String, token: String },
    #[error("unknown weekday `{0}`")]
    InvalidDay(String),
    #[error("invalid clock time `{0}` (expected HH:MM within 00:00-23:59)")]
    InvalidClock(String),
    #[error("time range `{0}` must end after it starts")]
    EmptyRange(String),
    #[error("expected {expected}, found `{input}`")]
    WrongShape { expected: &'static str, input: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Weekday {
    Monday,
    Tuesday,
    Wednesday,
    Thursday,
    Friday,
    Saturday,
    Sunday,
}

impl Weekday {
    pub const ALL: [Weekday; 7] = [
        Weekday::Monday,
        Weekday::Tuesday,
        Weekday::Wednesday,
        Weekday::Thursday,
        Weekday::Friday,
        Weekday::Saturday,
        Weekday::Sunday,
    ];

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(index: u8) -> Option<Self> {
        Self::ALL.get(index as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Weekday::Monday => "Monday",
            Weekday::Tuesday => "Tuesday",
            Weekday::Wednesday => "Wednesday",
            Weekday::Thursday => "Thursday",
            Weekday::Friday => "Friday",
            Weekday::Saturday => "Saturday",
            Weekday::Sunday => "Sunday",
        }
    }
}

impl FromStr for Weekday {
    type Err = TimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s.trim();
        Self::ALL
            .iter()
            .copied()
            .find(|d| d.name().eq_ignore_ascii_case(trimmed))
            .ok_or_else(|| TimeError::InvalidDay(trimmed.to_string()))
    }
}

impl fmt::Display for Weekday {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A point on the simulated timeline. Field order gives the total ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimePoint {
    pub week: u32,
    pub day: Weekday,
    pub minute_of_day: u16,
}

impl TimePoint {
    pub fn new(week: u32, day: Weekday, minute_of_day: u16) -> Self {
        debug_assert!(minute_of_day < MINUTES_PER_DAY);
        Self {
            week,
            day,
            minute_of_day,
        }
    }

    pub fn at(week: u32, day: Weekday, hour: u16, minute: u16) -> Self {
        Self::new(week, day, hour * 60 + minute)
    }

    /// Midnight of the same calendar day.
    pub fn date(self) -> Self {
        Self {
            minute_of_day: 0,
            ..self
        }
    }

    pub fn same_day(self, other: TimePoint) -> bool {
        self.week == other.week && self.day == other.day
    }

    /// Monotone day counter, used for seeding and distance computations.
    pub fn day_ordinal(self) -> u64 {
        self.week as u64 * 7 + self.day.index() as u64
    }

    pub fn with_minute(self, minute_of_day: u16) -> Self {
        Self {
            minute_of_day,
            ..self
        }
    }

    pub fn date_label(self) -> String {
        format!("Week {}, {}", self.week, self.day)
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Week {}, {}, {}",
            self.week,
            self.day,
            format_clock(self.minute_of_day)
        )
    }
}

impl FromStr for TimePoint {
    type Err = TimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match parse_time(s)? {
            TimeSpec::Point(p) | TimeSpec::Date(p) => Ok(p),
            TimeSpec::Range(_) => Err(TimeError::WrongShape {
                expected: "a single time point",
                input: s.to_string(),
            }),
        }
    }
}

/// A half-open interval `[start, end)` within one calendar day.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TimeRange {
    start: TimePoint,
    end: TimePoint,
}

impl TimeRange {
    pub fn new(start: TimePoint, end: TimePoint) -> Result<Self, TimeError> {
        if !start.same_day(end) {
            return Err(TimeError::WrongShape {
                expected: "a range within one day",
                input: format!("{start} - {end}"),
            });
        }
        if end <= start {
            return Err(TimeError::EmptyRange(format!("{start}-{}", format_clock(end.minute_of_day))));
        }
        Ok(Self { start, end })
    }

    /// Builds `[start_minute, end_minute)` on the day of `date`.
    pub fn on_day(date: TimePoint, start_minute: u16, end_minute: u16) -> Result<Self, TimeError> {
        Self::new(date.with_minute(start_minute), date.with_minute(end_minute))
    }

    pub fn start(&self) -> TimePoint {
        self.start
    }

    pub fn end(&self) -> TimePoint {
        self.end
    }

    pub fn date(&self) -> TimePoint {
        self.start.date()
    }

    pub fn duration_minutes(&self) -> u16 {
        self.end.minute_of_day - self.start.minute_of_day
    }

    pub fn overlaps(&self, other: &TimeRange) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn contains(&self, point: TimePoint) -> bool {
        self.start <= point && point < self.end
    }

    pub fn covers(&self, other: &TimeRange) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// `HH:MM-HH:MM`, without the date part.
    pub fn clock_label(&self) -> String {
        format!(
            "{}-{}",
            format_clock(self.start.minute_of_day),
            format_clock(self.end.minute_of_day)
        )
    }
}

impl fmt::Display for TimeRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}, {}", self.start.date_label(), self.clock_label())
    }
}

impl FromStr for TimeRange {
    type Err = TimeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match parse_time(s)? {
            TimeSpec::Range(r) => Ok(r),
            _ => Err(TimeError::WrongShape {
                expected: "a time range `Week X, Day, HH:MM-HH:MM`",
                input: s.to_string(),
            }),
        }
    }
}

/// Result of parsing any of the accepted time syntaxes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeSpec {
    /// `Week X, Day`; the point sits at minute 0.
    Date(TimePoint),
    Point(TimePoint),
    Range(TimeRange),
}

impl TimeSpec {
    pub fn is_date_only(&self) -> bool {
        matches!(self, TimeSpec::Date(_))
    }
}

pub fn format_clock(minute_of_day: u16) -> String {
    format!("{:02}:{:02}", minute_of_day / 60, minute_of_day % 60)
}

/// Parses `HH:MM` into a minute of day.
pub fn parse_clock(text: &str) -> Result<u16, TimeError> {
    let t = text.trim();
    let (h, m) = t
        .split_once(':')
        .ok_or_else(|| TimeError::InvalidClock(t.to_string()))?;
    let valid_digits = |s: &str| !s.is_empty() && s.len() <= 2 && s.bytes().all(|b| b.is_ascii_digit());
    if !valid_digits(h) || m.len() != 2 || !valid_digits(m) {
        return Err(TimeError::InvalidClock(t.to_string()));
    }
    let hour: u16 = h.parse().map_err(|_| TimeError::InvalidClock(t.to_string()))?;
    let minute: u16 = m.parse().map_err(|_| TimeError::InvalidClock(t.to_string()))?;
    if hour > 23 || minute > 59 {
        return Err(TimeError::InvalidClock(t.to_string()));
    }
    Ok(hour * 60 + minute)
}

/// Parses `HH:MM-HH:MM` into `(start, end)` minutes, requiring `end > start`.
pub fn parse_clock_range(text: &str) -> Result<(u16, u16), TimeError> {
    let t = text.trim();
    let (a, b) = t.split_once('-').ok_or_else(|| TimeError::Malformed {
        input: t.to_string(),
        token: t.to_string(),
    })?;
    let start = parse_clock(a)?;
    let end = parse_clock(b)?;
    if end <= start {
        return Err(TimeError::EmptyRange(t.to_string()));
    }
    Ok((start, end))
}

/// Parses `Week X, Day`, `Week X, Day, HH:MM` or `Week X, Day, HH:MM-HH:MM`.
pub fn parse_time(text: &str) -> Result<TimeSpec, TimeError> {
    let malformed = |token: &str| TimeError::Malformed {
        input: text.to_string(),
        token: token.to_string(),
    };
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if !(2..=3).contains(&parts.len()) {
        return Err(malformed(text.trim()));
    }

    let week_token = parts[0];
    let week = match week_token.split_once(char::is_whitespace) {
        Some((kw, n)) if kw.eq_ignore_ascii_case("week") => n
            .trim()
            .parse::<u32>()
            .map_err(|_| malformed(n.trim()))?,
        _ => return Err(malformed(week_token)),
    };
    let day: Weekday = parts[1].parse()?;
    let date = TimePoint::new(week, day, 0);

    let Some(clock) = parts.get(2) else {
        return Ok(TimeSpec::Date(date));
    };
    if clock.contains('-') {
        let (start, end) = parse_clock_range(clock)?;
        Ok(TimeSpec::Range(TimeRange::on_day(date, start, end)?))
    } else {
        Ok(TimeSpec::Point(date.with_minute(parse_clock(clock)?)))
    }
}

/// Parses a date, tolerating a trailing time component (which is dropped).
pub fn parse_date(text: &str) -> Result<TimePoint, TimeError> {
    Ok(match parse_time(text)? {
        TimeSpec::Date(d) | TimeSpec::Point(d) => d.date(),
        TimeSpec::Range(r) => r.date(),
    })
}

macro_rules! string_serde {
    ($ty:ty) => {
        impl Serialize for $ty {
            fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $ty {
            fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
                let s = String::deserialize(deserializer)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(TimePoint);
string_serde!(TimeRange);
string_serde!(Weekday);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_range_from_tool_docs() {
        let spec = parse_time("Week 3, Monday, 15:00-16:00").unwrap();
        let expected = TimeRange::new(
            TimePoint::new(3, Weekday::Monday, 900),
            TimePoint::new(3, Weekday::Monday, 960),
        )
        .unwrap();
        assert_eq!(spec, TimeSpec::Range(expected));
    }

    #[test]
    fn parses_zero_point() {
        assert_eq!(
            parse_time("Week 0, Monday, 00:00").unwrap(),
            TimeSpec::Point(TimePoint::new(0, Weekday::Monday, 0))
        );
    }

    #[test]
    fn date_only_is_flagged() {
        let spec = parse_time("Week 4, Saturday").unwrap();
        assert!(spec.is_date_only());
        assert_eq!(spec, TimeSpec::Date(TimePoint::new(4, Weekday::Saturday, 0)));
    }

    #[test]
    fn rejects_unknown_day_naming_token() {
        let err = parse_time("Week 2, Funday, 10:00").unwrap_err();
        assert_eq!(err, TimeError::InvalidDay("Funday".into()));
        assert!(err.to_string().contains("Funday"));
    }

    #[test]
    fn rejects_inverted_range() {
        assert!(matches!(
            parse_time("Week 1, Friday, 16:00-15:00"),
            Err(TimeError::EmptyRange(_))
        ));
        assert!(matches!(
            parse_time("Week 1, Friday, 16:00-16:00"),
            Err(TimeError::EmptyRange(_))
        ));
    }

    #[test]
    fn rejects_bad_tokens() {
        for bad in ["Wk 1, Monday", "Week x, Monday", "Week 1", "Week 1, Monday, 25:00", "Week 1, Monday, 9:5", "Week 1, Monday, 10:00, extra"] {
            assert!(parse_time(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn ordering_is_week_day_minute() {
        let a = TimePoint::new(0, Weekday::Sunday, 1439);
        let b = TimePoint::new(1, Weekday::Monday, 0);
        let c = TimePoint::new(1, Weekday::Tuesday, 0);
        assert!(a < b && b < c);
    }

    #[test]
    fn display_round_trips() {
        let r: TimeRange = "Week 10, Wednesday, 08:30-09:45".parse().unwrap();
        assert_eq!(r.to_string(), "Week 10, Wednesday, 08:30-09:45");
        assert_eq!(r.to_string().parse::<TimeRange>().unwrap(), r);
        let p: TimePoint = "Week 0, Sunday, 16:00".parse().unwrap();
        assert_eq!(p.to_string(), "Week 0, Sunday, 16:00");
    }

    #[test]
    fn range_relations() {
        let r: TimeRange = "Week 1, Monday, 10:00-12:00".parse().unwrap();
        let inner: TimeRange = "Week 1, Monday, 10:30-11:00".parse().unwrap();
        let adjacent: TimeRange = "Week 1, Monday, 12:00-13:00".parse().unwrap();
        assert!(r.covers(&inner));
        assert!(r.overlaps(&inner));
        assert!(!r.overlaps(&adjacent));
        assert!(r.contains(r.start()));
        assert!(!r.contains(r.end()));
        assert_eq!(r.duration_minutes(), 120);
    }
}
