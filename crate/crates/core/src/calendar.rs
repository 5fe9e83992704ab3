//! Monthly 15-minute time grid and time-of-use period labelling.
//!
//! Grids use naive local civil time. Daylight-saving transitions are ignored so
//! every month has exactly `days × 96` uniformly spaced steps.

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Timelike, Weekday};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const STEP_MINUTES: u32 = 15;
pub const STEPS_PER_HOUR: usize = 4;
pub const STEPS_PER_DAY: usize = 96;

/// The ordered 15-minute steps of one calendar month.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TimeGrid {
    year: i32,
    month: u32,
    steps: Vec<NaiveDateTime>,
}

impl TimeGrid {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::InvalidMonth(month));
        }
        let first = NaiveDate::from_ymd_opt(year, month, 1)
            .ok_or_else(|| Error::Calendar(format!("year {year} out of range")))?;
        let days = days_in_month(year, month);
        let start = first.and_hms_opt(0, 0, 0).expect("midnight exists");
        let step = Duration::minutes(STEP_MINUTES as i64);
        let steps = (0..days as usize * STEPS_PER_DAY)
            .map(|i| start + step * i as i32)
            .collect();
        Ok(Self { year, month, steps })
    }

    /// The first `steps` steps of this grid; for small test problems.
    pub fn truncated(&self, steps: usize) -> Self {
        Self {
            year: self.year,
            month: self.month,
            steps: self.steps[..steps.min(self.steps.len())].to_vec(),
        }
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> u32 {
        self.month
    }

    pub fn step_minutes(&self) -> u32 {
        STEP_MINUTES
    }

    /// Number of steps, |𝒯|.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn days(&self) -> usize {
        self.steps.len() / STEPS_PER_DAY
    }

    pub fn steps(&self) -> &[NaiveDateTime] {
        &self.steps
    }

    pub fn timestamp(&self, t: usize) -> Result<NaiveDateTime> {
        self.steps.get(t).copied().ok_or(Error::StepOutOfRange {
            index: t,
            len: self.steps.len(),
        })
    }

    /// Minutes after local midnight at the start of step `t`.
    pub fn minute_of_day(&self, t: usize) -> u32 {
        let ts = self.steps[t];
        ts.hour() * 60 + ts.minute()
    }

    pub fn day_class(&self, t: usize) -> DayClass {
        match self.steps[t].weekday() {
            Weekday::Sat | Weekday::Sun => DayClass::Weekend,
            _ => DayClass::Weekday,
        }
    }
}

/// Builds the 15-minute grid for one month.
pub fn build_time_grid(year: i32, month: u32) -> Result<TimeGrid> {
    TimeGrid::new(year, month)
}

pub fn days_in_month(year: i32, month: u32) -> u32 {
    let (ny, nm) = if month == 12 { (year + 1, 1) } else { (year, month + 1) };
    let next = NaiveDate::from_ymd_opt(ny, nm, 1).expect("valid date");
    let this = NaiveDate::from_ymd_opt(year, month, 1).expect("valid date");
    (next - this).num_days() as u32
}

/// Which days a TOU rule applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DayClass {
    Weekday,
    Weekend,
    All,
}

impl DayClass {
    fn admits(self, day: DayClass) -> bool {
        self == DayClass::All || self == day
    }
}

/// Half-open range of local clock hours, `[start, end)`, with `0 <= start <= end <= 24`.
///
/// Serialized as a two-element array `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "[u32; 2]", into = "[u32; 2]")]
pub struct HourRange {
    start: u32,
    end: u32,
}

impl HourRange {
    pub fn new(start: u32, end: u32) -> Result<Self> {
        if start > end || end > 24 {
            return Err(Error::Calendar(format!(
                "hour range [{start}, {end}) must satisfy 0 <= start <= end <= 24"
            )));
        }
        Ok(Self { start, end })
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn end(&self) -> u32 {
        self.end
    }

    pub fn contains_minute(&self, minute_of_day: u32) -> bool {
        minute_of_day >= self.start * 60 && minute_of_day < self.end * 60
    }

    pub fn hours(&self) -> u32 {
        self.end - self.start
    }
}

impl TryFrom<[u32; 2]> for HourRange {
    type Error = String;

    fn try_from(v: [u32; 2]) -> std::result::Result<Self, Self::Error> {
        HourRange::new(v[0], v[1]).map_err(|e| e.to_string())
    }
}

impl From<HourRange> for [u32; 2] {
    fn from(r: HourRange) -> Self {
        [r.start, r.end]
    }
}

/// The default peak-analysis window, 16:00 to 21:00.
pub fn default_peak_window() -> HourRange {
    HourRange { start: 16, end: 21 }
}

/// Index of a TOU period within its calendar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PeriodId(pub usize);

/// One labelling rule: months × day class × hour ranges → period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TouRule {
    pub period: String,
    pub months: Vec<u32>,
    pub day_class: DayClass,
    pub hour_ranges: Vec<HourRange>,
}

impl TouRule {
    fn matches(&self, month: u32, day: DayClass, minute_of_day: u32) -> bool {
        self.months.contains(&month)
            && self.day_class.admits(day)
            && self.hour_ranges.iter().any(|r| r.contains_minute(minute_of_day))
    }
}

/// TOU period set with the rules that partition every step among the periods.
#[derive(Debug, Clone, PartialEq)]
pub struct TouCalendar {
    periods: Vec<String>,
    rules: Vec<TouRule>,
    peak_window: HourRange,
}

impl TouCalendar {
    /// Validates that the rules label every (month, day class, quarter hour)
    /// with exactly one period. Periods are ordered by first appearance.
    pub fn new(rules: Vec<TouRule>, peak_window: HourRange) -> Result<Self> {
        let mut periods: Vec<String> = Vec::new();
        for rule in &rules {
            if rule.period.is_empty() {
                return Err(Error::Calendar("rule with empty period name".into()));
            }
            if let Some(m) = rule.months.iter().find(|m| !(1..=12).contains(*m)) {
                return Err(Error::Calendar(format!(
                    "rule for `{}` lists month {m}",
                    rule.period
                )));
            }
            if !periods.contains(&rule.period) {
                periods.push(rule.period.clone());
            }
        }
        let calendar = Self {
            periods,
            rules,
            peak_window,
        };
        calendar.check_partition()?;
        Ok(calendar)
    }

    fn check_partition(&self) -> Result<()> {
        for month in 1..=12 {
            for day in [DayClass::Weekday, DayClass::Weekend] {
                for q in 0..STEPS_PER_DAY as u32 {
                    let minute = q * STEP_MINUTES;
                    let hits: Vec<&str> = self
                        .rules
                        .iter()
                        .filter(|r| r.matches(month, day, minute))
                        .map(|r| r.period.as_str())
                        .collect();
                    if hits.len() != 1 {
                        return Err(Error::Calendar(format!(
                            "month {month}, {day:?} {:02}:{:02} matches {} periods {:?}; expected exactly one",
                            minute / 60,
                            minute % 60,
                            hits.len(),
                            hits
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn periods(&self) -> &[String] {
        &self.periods
    }

    pub fn rules(&self) -> &[TouRule] {
        &self.rules
    }

    pub fn peak_window(&self) -> HourRange {
        self.peak_window
    }

    pub fn period_id(&self, name: &str) -> Result<PeriodId> {
        self.periods
            .iter()
            .position(|p| p == name)
            .map(PeriodId)
            .ok_or_else(|| Error::UnknownPeriod(name.to_string()))
    }

    pub fn period_name(&self, p: PeriodId) -> &str {
        &self.periods[p.0]
    }

    /// Period containing step `t`.
    pub fn period_of(&self, grid: &TimeGrid, t: usize) -> Result<PeriodId> {
        grid.timestamp(t)?;
        let minute = grid.minute_of_day(t);
        let day = grid.day_class(t);
        let rule = self
            .rules
            .iter()
            .find(|r| r.matches(grid.month(), day, minute))
            .expect("partition checked at construction");
        self.period_id(&rule.period)
    }

    /// Period label of every step of the grid.
    pub fn label_grid(&self, grid: &TimeGrid) -> Vec<PeriodId> {
        (0..grid.len())
            .map(|t| self.period_of(grid, t).expect("step in range"))
            .collect()
    }

    pub fn with_peak_window(mut self, window: HourRange) -> Self {
        self.peak_window = window;
        self
    }
}

/// δ(t, p): 1 when step `t` falls in period `p`, else 0.
pub fn tou_indicator(calendar: &TouCalendar, grid: &TimeGrid, t: usize, period: &str) -> Result<u8> {
    let p = calendar.period_id(period)?;
    Ok(u8::from(calendar.period_of(grid, t)? == p))
}

/// True for steps whose local start time lies inside the calendar's peak window.
pub fn peak_mask(calendar: &TouCalendar, grid: &TimeGrid) -> Vec<bool> {
    let window = calendar.peak_window();
    (0..grid.len())
        .map(|t| window.contains_minute(grid.minute_of_day(t)))
        .collect()
}
