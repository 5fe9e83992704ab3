//! Deterministic synthetic profiles used when no measured data is supplied.

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::calendar::TimeGrid;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::profile::PvProfile;

/// Fraction of nameplate reached at solar noon.
pub const PV_DERATE: f64 = 0.85;

/// Local clock time of solar noon, minutes after midnight.
const SOLAR_NOON_MINUTE: f64 = 12.0 * 60.0 + 15.0;

/// Mid-month day length in hours at roughly 37° N, January first.
const DAY_LENGTH_HOURS: [f64; 12] = [9.9, 10.9, 12.0, 13.2, 14.2, 14.7, 14.5, 13.6, 12.5, 11.3, 10.2, 9.6];

/// Clear-sky PV output at a minute of the day: a half sine between sunrise
/// and sunset peaking at `nameplate × PV_DERATE` at solar noon.
pub fn synth_pv_value(nameplate: f64, month: u32, minute_of_day: f64) -> f64 {
    let half_day = DAY_LENGTH_HOURS[(month - 1) as usize] * 30.0;
    let offset = minute_of_day - SOLAR_NOON_MINUTE;
    if offset.abs() >= half_day {
        return 0.0;
    }
    let v = nameplate * PV_DERATE * (std::f64::consts::FRAC_PI_2 * offset / half_day).cos();
    v.max(0.0)
}

/// Synthetic PV profile for one month, sampled at each step's start time.
pub fn synth_pv<T: Scalar>(nameplate: T, grid: &TimeGrid) -> Result<PvProfile<T>> {
    if !(nameplate >= T::zero()) {
        return Err(Error::Asset(format!("PV nameplate {nameplate} must be nonnegative")));
    }
    let np = nameplate.to_f64_lossy();
    let p_pv = (0..grid.len())
        .map(|t| T::lit(synth_pv_value(np, grid.month(), grid.minute_of_day(t) as f64)))
        .map(|v| v.min(nameplate))
        .collect();
    PvProfile::new(p_pv, nameplate)
}

fn bump(h: f64, centre: f64, width: f64) -> f64 {
    (-((h - centre) / width).powi(2)).exp()
}

/// Hourly commercial load for a full year with morning and evening peaks,
/// scaled so the annual maximum equals `peak_kw` and rounded to 0.1 kW.
pub fn synth_load(year: i32, peak_kw: f64, seed: u64) -> Result<Vec<(NaiveDateTime, f64)>> {
    if !(peak_kw > 0.0) {
        return Err(Error::Asset(format!("peak load {peak_kw} must be positive")));
    }
    let start = NaiveDate::from_ymd_opt(year, 1, 1)
        .ok_or_else(|| Error::Asset(format!("year {year} out of range")))?
        .and_hms_opt(0, 0, 0)
        .expect("midnight");
    let end = NaiveDate::from_ymd_opt(year + 1, 1, 1)
        .expect("valid")
        .and_hms_opt(0, 0, 0)
        .expect("midnight");
    let hours = (end - start).num_hours();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut raw = Vec::with_capacity(hours as usize);
    let mut day_factor = 1.0;
    for i in 0..hours {
        let ts = start + Duration::hours(i);
        let hour = i % 24;
        if hour == 0 {
            day_factor = 1.0 + 0.05 * rng.gen_range(-1.0..1.0);
        }
        let h = hour as f64 + 0.5;
        let month = ts.month();
        let weekend = matches!(ts.weekday(), Weekday::Sat | Weekday::Sun);
        let summer = (6..=9).contains(&month);
        let winter = month <= 2 || month >= 11;

        let activity = if weekend { 0.55 } else { 1.0 };
        let morning = 60.0 * bump(h, 8.5, 1.8) * if winter { 1.15 } else { 1.0 };
        let midday = 35.0 * bump(h, 13.0, 3.0) * if summer { 1.2 } else { 1.0 };
        let evening = 95.0 * bump(h, 18.5, 1.9) * if summer { 1.2 } else { 1.0 };
        let base = if weekend { 50.0 } else { 55.0 };
        let noise = 1.0 + 0.06 * rng.gen_range(-1.0..1.0);
        raw.push((ts, (base + activity * (morning + midday + evening)) * day_factor * noise));
    }
    let max = raw.iter().map(|(_, v)| *v).fold(f64::MIN, f64::max);
    let scale = peak_kw / max;
    Ok(raw
        .into_iter()
        .map(|(ts, v)| (ts, (v * scale * 10.0).round() / 10.0))
        .collect())
}
