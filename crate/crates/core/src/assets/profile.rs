use std::path::Path;

use chrono::{Duration, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::calendar::{TimeGrid, STEPS_PER_HOUR, STEP_MINUTES};
use crate::error::{Error, Result};
use crate::scalar::{max_of, Scalar};

/// Sampling interval of a profile file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolution {
    Hourly,
    QuarterHourly,
}

impl Resolution {
    fn minutes(self) -> i64 {
        match self {
            Resolution::Hourly => 60,
            Resolution::QuarterHourly => STEP_MINUTES as i64,
        }
    }

    fn steps(self) -> usize {
        match self {
            Resolution::Hourly => STEPS_PER_HOUR,
            Resolution::QuarterHourly => 1,
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct ProfileRecord {
    timestamp: String,
    kw: f64,
}

/// A contiguous kW series held at 15-minute resolution.
///
/// Hourly inputs are expanded by step-hold: each hourly value is repeated for
/// its four quarter hours, which keeps hourly energy and every maximum intact.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSeries<T> {
    start: NaiveDateTime,
    source_resolution: Resolution,
    values: Vec<T>,
}

const TIMESTAMP_FORMATS: &[&str] = &[
    "%Y-%m-%dT%H:%M:%S",
    "%Y-%m-%dT%H:%M",
    "%Y-%m-%d %H:%M:%S",
    "%Y-%m-%d %H:%M",
];

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    TIMESTAMP_FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
}

impl<T: Scalar> ProfileSeries<T> {
    /// Builds a series from timestamped readings, rejecting gaps, duplicates,
    /// irregular spacing and negative values.
    pub fn from_readings(readings: &[(NaiveDateTime, f64)], origin: &Path) -> Result<Self> {
        let fail = |message: String| Error::Profile {
            path: origin.to_path_buf(),
            message,
        };
        if readings.len() < 2 {
            return Err(fail("need at least two readings".into()));
        }
        let first_gap = (readings[1].0 - readings[0].0).num_minutes();
        let resolution = match first_gap {
            60 => Resolution::Hourly,
            15 => Resolution::QuarterHourly,
            0 => return Err(fail(format!("duplicate timestamp {}", readings[0].0))),
            m => return Err(fail(format!("unsupported spacing of {m} minutes; expected 15 or 60"))),
        };
        let step = resolution.minutes();
        for pair in readings.windows(2) {
            let gap = (pair[1].0 - pair[0].0).num_minutes();
            if gap == step {
                continue;
            }
            let msg = match gap {
                0 => format!("duplicate timestamp {}", pair[1].0),
                g if g < 0 => format!("timestamp {} out of order", pair[1].0),
                g if g % step == 0 => format!("gap between {} and {}", pair[0].0, pair[1].0),
                g => format!("irregular spacing of {g} minutes at {}", pair[1].0),
            };
            return Err(fail(msg));
        }
        let start = readings[0].0;
        if start.second() != 0 || (start.minute() as i64) % step != 0 {
            return Err(fail(format!("first timestamp {start} not aligned to {step}-minute steps")));
        }
        if let Some((ts, v)) = readings.iter().find(|(_, v)| !v.is_finite() || *v < 0.0) {
            return Err(fail(format!("reading {v} kW at {ts} must be finite and nonnegative")));
        }
        let hold = resolution.steps();
        let values = readings
            .iter()
            .flat_map(|(_, v)| std::iter::repeat(T::lit(*v)).take(hold))
            .collect();
        Ok(Self {
            start,
            source_resolution: resolution,
            values,
        })
    }

    pub fn source_resolution(&self) -> Resolution {
        self.source_resolution
    }

    pub fn start(&self) -> NaiveDateTime {
        self.start
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn max(&self) -> T {
        max_of(&self.values).unwrap_or_else(T::zero)
    }

    /// Values for the steps of `grid`; the series must cover the whole month.
    pub fn slice(&self, grid: &TimeGrid) -> Result<&[T]> {
        let first = grid.steps()[0];
        let offset = (first - self.start).num_minutes();
        let end = offset / STEP_MINUTES as i64 + grid.len() as i64;
        if offset < 0 || end as usize > self.values.len() {
            let last = self.start + Duration::minutes(STEP_MINUTES as i64 * self.values.len() as i64);
            return Err(Error::Profile {
                path: Default::default(),
                message: format!(
                    "profile spans [{}, {}) and does not cover {}-{:02}",
                    self.start,
                    last,
                    grid.year(),
                    grid.month()
                ),
            });
        }
        let offset = offset as usize / STEP_MINUTES as usize;
        Ok(&self.values[offset..offset + grid.len()])
    }
}

/// Reads a `timestamp,kw` CSV into a 15-minute series.
pub fn read_profile_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<ProfileSeries<T>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Profile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    let mut readings = Vec::new();
    for (i, rec) in reader.deserialize::<ProfileRecord>().enumerate() {
        let rec = rec.map_err(|e| Error::Profile {
            path: path.to_path_buf(),
            message: format!("row {}: {e}", i + 2),
        })?;
        let ts = parse_timestamp(&rec.timestamp).ok_or_else(|| Error::Profile {
            path: path.to_path_buf(),
            message: format!("row {}: unparseable timestamp `{}`", i + 2, rec.timestamp),
        })?;
        readings.push((ts, rec.kw));
    }
    ProfileSeries::from_readings(&readings, path)
}

/// Writes readings as a `timestamp,kw` CSV.
pub fn write_profile_csv(path: impl AsRef<Path>, readings: &[(NaiveDateTime, f64)]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Profile {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    for (ts, kw) in readings {
        w.serialize(ProfileRecord {
            timestamp: ts.format("%Y-%m-%dT%H:%M:%S").to_string(),
            kw: *kw,
        })?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Base demand D_base(t) for one month.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile<T> {
    pub d_base: Vec<T>,
    /// Highest demand over the source year, kW.
    pub annual_max: T,
}

impl<T: Scalar> LoadProfile<T> {
    pub fn new(d_base: Vec<T>, annual_max: T) -> Result<Self> {
        if d_base.iter().any(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::Asset("base demand must be finite and nonnegative".into()));
        }
        let month_max = max_of(&d_base).unwrap_or_else(T::zero);
        if annual_max < month_max {
            return Err(Error::Asset(format!(
                "annual maximum {annual_max} below the month's maximum {month_max}"
            )));
        }
        Ok(Self { d_base, annual_max })
    }

    pub fn from_series(series: &ProfileSeries<T>, grid: &TimeGrid) -> Result<Self> {
        Self::new(series.slice(grid)?.to_vec(), series.max())
    }
}

/// PV output P_pv(t) for one month.
#[derive(Debug, Clone, PartialEq)]
pub struct PvProfile<T> {
    pub p_pv: Vec<T>,
    pub nameplate: T,
}

impl<T: Scalar> PvProfile<T> {
    pub fn new(p_pv: Vec<T>, nameplate: T) -> Result<Self> {
        if nameplate < T::zero() {
            return Err(Error::Asset(format!("PV nameplate {nameplate} is negative")));
        }
        if p_pv.iter().any(|v| !v.is_finite() || *v < T::zero() || *v > nameplate) {
            return Err(Error::Asset(format!(
                "PV output must lie within [0, {nameplate}] kW"
            )));
        }
        Ok(Self { p_pv, nameplate })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            p_pv: vec![T::zero(); n],
            nameplate: T::zero(),
        }
    }
}

/// Reads the grid's month from a load CSV.
pub fn ingest_load_csv<T: Scalar>(path: impl AsRef<Path>, grid: &TimeGrid) -> Result<LoadProfile<T>> {
    let path = path.as_ref();
    let series = read_profile_csv(path)?;
    LoadProfile::from_series(&series, grid).map_err(|e| with_path(e, path))
}

/// Reads the grid's month from a PV CSV. Without an explicit nameplate the
/// file maximum is used.
pub fn ingest_pv_csv<T: Scalar>(
    path: impl AsRef<Path>,
    grid: &TimeGrid,
    nameplate: Option<T>,
) -> Result<PvProfile<T>> {
    let path = path.as_ref();
    let series = read_profile_csv::<T>(path)?;
    let values = series.slice(grid).map_err(|e| with_path(e, path))?.to_vec();
    PvProfile::new(values, nameplate.unwrap_or_else(|| series.max()))
}

pub(crate) fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Profile { message, .. } => Error::Profile {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    }
}
