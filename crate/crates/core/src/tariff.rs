//! Tariff schedules: demand rates, TOU energy rates and the NEM sell rate.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calendar::{default_peak_window, HourRange, PeriodId, TimeGrid, TouCalendar, TouRule};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Non-bypassable charge used when a tariff file omits one, $/kWh.
pub const DEFAULT_NON_BYPASSABLE_CHARGE: f64 = 0.025;

/// On-disk tariff layout. Field names are part of the file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TariffFile {
    pub id: String,
    pub demand_rate_max: f64,
    #[serde(default)]
    pub demand_rates: BTreeMap<String, f64>,
    pub energy_rates: BTreeMap<String, f64>,
    #[serde(default = "default_nbc")]
    pub non_bypassable_charge: f64,
    pub tou_rules: Vec<TouRule>,
    #[serde(default = "default_peak_window")]
    pub peak_window: HourRange,
    /// Reserved for per-day demand charges. Only an empty or all-zero map is accepted.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub daily_demand_rates: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

fn default_nbc() -> f64 {
    DEFAULT_NON_BYPASSABLE_CHARGE
}

/// A validated tariff. Per-period rates are indexed by [`PeriodId`].
#[derive(Debug, Clone, PartialEq)]
pub struct TariffSchedule<T> {
    id: String,
    dr_max: T,
    dr_tou: Vec<T>,
    er: Vec<T>,
    nbc: T,
    calendar: TouCalendar,
}

impl<T: Scalar> TariffSchedule<T> {
    pub fn from_file(file: &TariffFile) -> Result<Self> {
        let calendar = TouCalendar::new(file.tou_rules.clone(), file.peak_window)
            .map_err(|e| Error::tariff("tou_rules", e.to_string()))?;
        let check_rate = |field: String, v: f64| -> Result<()> {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::tariff(field, format!("rate {v} must be finite and nonnegative")));
            }
            Ok(())
        };
        if file.id.trim().is_empty() {
            return Err(Error::tariff("id", "must not be empty"));
        }
        check_rate("demand_rate_max".into(), file.demand_rate_max)?;
        check_rate("non_bypassable_charge".into(), file.non_bypassable_charge)?;

        for (map_name, map) in [
            ("demand_rates", &file.demand_rates),
            ("energy_rates", &file.energy_rates),
            ("daily_demand_rates", &file.daily_demand_rates),
        ] {
            for (period, &v) in map {
                let field = format!("{map_name}.{period}");
                if calendar.period_id(period).is_err() {
                    return Err(Error::tariff(field, "period not defined by any tou_rules entry"));
                }
                check_rate(field, v)?;
            }
        }
        if file.daily_demand_rates.values().any(|&v| v != 0.0) {
            return Err(Error::tariff(
                "daily_demand_rates",
                "daily demand charges are not supported by the billing model",
            ));
        }

        let mut dr_tou = Vec::with_capacity(calendar.periods().len());
        let mut er = Vec::with_capacity(calendar.periods().len());
        for period in calendar.periods() {
            let energy = *file.energy_rates.get(period).ok_or_else(|| {
                Error::tariff(format!("energy_rates.{period}"), "missing energy rate for period")
            })?;
            if energy < file.non_bypassable_charge {
                return Err(Error::tariff(
                    format!("energy_rates.{period}"),
                    format!(
                        "energy rate {energy} is below the non-bypassable charge {}",
                        file.non_bypassable_charge
                    ),
                ));
            }
            er.push(T::lit(energy));
            dr_tou.push(T::lit(file.demand_rates.get(period).copied().unwrap_or(0.0)));
        }

        Ok(Self {
            id: file.id.clone(),
            dr_max: T::lit(file.demand_rate_max),
            dr_tou,
            er,
            nbc: T::lit(file.non_bypassable_charge),
            calendar,
        })
    }

    /// Builds a schedule from per-period rates given in calendar period order.
    pub fn new(
        id: impl Into<String>,
        dr_max: T,
        dr_tou: Vec<T>,
        er: Vec<T>,
        nbc: T,
        calendar: TouCalendar,
    ) -> Result<Self> {
        let n = calendar.periods().len();
        if dr_tou.len() != n {
            return Err(Error::length("dr_tou", dr_tou.len(), n));
        }
        if er.len() != n {
            return Err(Error::length("er", er.len(), n));
        }
        let file = TariffFile {
            id: id.into(),
            demand_rate_max: dr_max.to_f64_lossy(),
            demand_rates: calendar
                .periods()
                .iter()
                .cloned()
                .zip(dr_tou.iter().map(|v| v.to_f64_lossy()))
                .collect(),
            energy_rates: calendar
                .periods()
                .iter()
                .cloned()
                .zip(er.iter().map(|v| v.to_f64_lossy()))
                .collect(),
            non_bypassable_charge: nbc.to_f64_lossy(),
            tou_rules: calendar.rules().to_vec(),
            peak_window: calendar.peak_window(),
            daily_demand_rates: BTreeMap::new(),
            description: None,
        };
        // Validate through the file path, then keep the exact values given.
        Self::from_file(&file)?;
        Ok(Self {
            id: file.id,
            dr_max,
            dr_tou,
            er,
            nbc,
            calendar,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// DR_max, $/kW.
    pub fn dr_max(&self) -> T {
        self.dr_max
    }

    /// DR_tou(p), $/kW.
    pub fn dr_tou(&self, p: PeriodId) -> T {
        self.dr_tou[p.0]
    }

    /// Energy rate of period `p`, $/kWh.
    pub fn er(&self, p: PeriodId) -> T {
        self.er[p.0]
    }

    pub fn nbc(&self) -> T {
        self.nbc
    }

    pub fn calendar(&self) -> &TouCalendar {
        &self.calendar
    }

    pub fn num_periods(&self) -> usize {
        self.dr_tou.len()
    }

    /// True when every demand rate and the non-bypassable charge are strictly positive.
    pub fn all_rates_positive(&self) -> bool {
        let z = T::zero();
        self.dr_max > z && self.dr_tou.iter().all(|r| *r > z) && self.nbc > z
    }

    pub fn to_file(&self) -> TariffFile {
        let names = self.calendar.periods();
        TariffFile {
            id: self.id.clone(),
            demand_rate_max: self.dr_max.to_f64_lossy(),
            demand_rates: names
                .iter()
                .cloned()
                .zip(self.dr_tou.iter().map(|v| v.to_f64_lossy()))
                .collect(),
            energy_rates: names
                .iter()
                .cloned()
                .zip(self.er.iter().map(|v| v.to_f64_lossy()))
                .collect(),
            non_bypassable_charge: self.nbc.to_f64_lossy(),
            tou_rules: self.calendar.rules().to_vec(),
            peak_window: self.calendar.peak_window(),
            daily_demand_rates: BTreeMap::new(),
            description: None,
        }
    }
}

/// Reads and validates a tariff JSON file.
pub fn load_tariff<T: Scalar>(path: impl AsRef<Path>) -> Result<TariffSchedule<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let file: TariffFile = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    TariffSchedule::from_file(&file)
}

/// Per-step energy rate ER(t) and NEM sell rate NSR(t) = ER(t) − nbc.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries<T> {
    pub er: Vec<T>,
    pub nsr: Vec<T>,
}

pub fn rate_series<T: Scalar>(tariff: &TariffSchedule<T>, grid: &TimeGrid) -> RateSeries<T> {
    let labels = tariff.calendar().label_grid(grid);
    rate_series_for_labels(tariff, &labels)
}

pub(crate) fn rate_series_for_labels<T: Scalar>(
    tariff: &TariffSchedule<T>,
    labels: &[PeriodId],
) -> RateSeries<T> {
    let er: Vec<T> = labels.iter().map(|&p| tariff.er(p)).collect();
    let nsr = er.iter().map(|&e| e - tariff.nbc()).collect();
    RateSeries { er, nsr }
}
