use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::assets::BatteryDefaults;
use crate::calendar::STEPS_PER_HOUR;
use crate::error::{Error, Result};
use crate::lp::DEFAULT_TOLERANCE;

fn default_year() -> i32 {
    2021
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn default_true() -> bool {
    true
}

fn default_flex() -> Option<FlexAxes> {
    Some(FlexAxes::default())
}

fn default_battery() -> Option<BatteryAxes> {
    Some(BatteryAxes::default())
}

fn tenths(count: usize) -> Vec<f64> {
    (0..count).map(|i| i as f64 / 10.0).collect()
}

/// Recovery-period × flexibility grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlexAxes {
    pub recovery_hours: Vec<f64>,
    pub flex_pct: Vec<f64>,
}

impl Default for FlexAxes {
    fn default() -> Self {
        Self {
            recovery_hours: vec![1.0, 2.0, 4.0, 8.0, 12.0, 24.0],
            flex_pct: tenths(11),
        }
    }
}

/// Power-ratio × duration grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryAxes {
    pub power_ratio: Vec<f64>,
    pub duration_hours: Vec<f64>,
}

impl Default for BatteryAxes {
    fn default() -> Self {
        Self {
            power_ratio: tenths(15),
            duration_hours: vec![1.0, 2.0, 3.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TariffChoice {
    #[default]
    Base,
    Storage,
}

impl fmt::Display for TariffChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TariffChoice::Base => "base",
            TariffChoice::Storage => "storage",
        })
    }
}

/// Assets for a single-month or annual run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssetConfig {
    pub flex_pct: f64,
    pub recovery_hours: f64,
    pub power_ratio: f64,
    pub duration_hours: f64,
}

impl Default for AssetConfig {
    fn default() -> Self {
        Self {
            flex_pct: 0.0,
            recovery_hours: 12.0,
            power_ratio: 0.0,
            duration_hours: 4.0,
        }
    }
}

impl AssetConfig {
    pub fn flex(flex_pct: f64, recovery_hours: f64) -> Self {
        Self {
            flex_pct,
            recovery_hours,
            ..Self::none()
        }
    }

    pub fn battery(power_ratio: f64, duration_hours: f64) -> Self {
        Self {
            power_ratio,
            duration_hours,
            ..Self::none()
        }
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        check_flex_pct(self.flex_pct)?;
        check_recovery(self.recovery_hours)?;
        check_ratio(self.power_ratio)?;
        check_duration(self.duration_hours)
    }
}

impl fmt::Display for AssetConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "flex {} @ {} h, battery {} x {} h",
            self.flex_pct, self.recovery_hours, self.power_ratio, self.duration_hours
        )
    }
}

/// Single-run settings used by the `annual`, `solve` and `dump-lp` commands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSettings {
    pub tariff: TariffChoice,
    pub flex_pct: f64,
    pub recovery_hours: f64,
    pub power_ratio: f64,
    pub duration_hours: f64,
}

impl Default for RunSettings {
    fn default() -> Self {
        let a = AssetConfig::default();
        Self {
            tariff: TariffChoice::Base,
            flex_pct: a.flex_pct,
            recovery_hours: a.recovery_hours,
            power_ratio: a.power_ratio,
            duration_hours: a.duration_hours,
        }
    }
}

impl RunSettings {
    pub fn assets(&self) -> AssetConfig {
        AssetConfig {
            flex_pct: self.flex_pct,
            recovery_hours: self.recovery_hours,
            power_ratio: self.power_ratio,
            duration_hours: self.duration_hours,
        }
    }
}

/// Experiment configuration. Relative paths resolve against the config
/// file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_year")]
    pub year: i32,
    pub load_csv: PathBuf,
    /// Measured PV output; takes precedence over the synthetic profile.
    #[serde(default)]
    pub pv_csv: Option<PathBuf>,
    /// PV nameplate in kW. Drives the synthetic profile when no CSV is given.
    #[serde(default)]
    pub pv_nameplate_kw: Option<f64>,
    pub base_tariff: PathBuf,
    pub storage_tariff: PathBuf,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// `null` disables the family.
    #[serde(default = "default_flex")]
    pub flex: Option<FlexAxes>,
    #[serde(default = "default_battery")]
    pub battery: Option<BatteryAxes>,
    #[serde(default)]
    pub battery_defaults: BatteryDefaults,
    /// Skip storage-tariff solves for batteries below the eligibility threshold.
    #[serde(default)]
    pub enforce_eligibility: bool,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub jobs: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Re-solve each month for the bill-optimal dispatch with the least
    /// net-demand variation inside the peak window.
    #[serde(default = "default_true")]
    pub smooth_peak_ramps: bool,
    /// Also write full-precision `results.json`.
    #[serde(default)]
    pub write_json: bool,
    #[serde(default)]
    pub run: RunSettings,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl SweepConfig {
    pub fn solve_settings(&self) -> SolveSettings {
        SolveSettings {
            tolerance: self.tolerance,
            smooth_peak_ramps: self.smooth_peak_ramps,
        }
    }
}

/// Per-solve numerical settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveSettings {
    pub tolerance: f64,
    pub smooth_peak_ramps: bool,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
            smooth_peak_ramps: true,
        }
    }
}

fn check_flex_pct(v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::Config(format!("flex_pct {v} outside [0, 1]")));
    }
    Ok(())
}

fn check_recovery(v: f64) -> Result<()> {
    let steps = v * STEPS_PER_HOUR as f64;
    if !(steps >= 1.0) || (steps - steps.round()).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "recovery_hours {v} must be a positive multiple of 0.25"
        )));
    }
    Ok(())
}

fn check_ratio(v: f64) -> Result<()> {
    if !(v >= 0.0) || !v.is_finite() {
        return Err(Error::Config(format!("power_ratio {v} must be >= 0")));
    }
    Ok(())
}

fn check_duration(v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::Config(format!("duration_hours {v} must be > 0")));
    }
    Ok(())
}

impl SweepConfig {
    /// Reads and validates a config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: SweepConfig = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn flex_enabled(&self) -> bool {
        self.flex
            .as_ref()
            .is_some_and(|a| !a.recovery_hours.is_empty() && !a.flex_pct.is_empty())
    }

    pub fn battery_enabled(&self) -> bool {
        self.battery
            .as_ref()
            .is_some_and(|a| !a.power_ratio.is_empty() && !a.duration_hours.is_empty())
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=9998).contains(&self.year) {
            return Err(Error::Config(format!("year {} out of range", self.year)));
        }
        if !self.flex_enabled() && !self.battery_enabled() {
            return Err(Error::Config("both sweep families are empty".into()));
        }
        if let Some(a) = &self.flex {
            a.flex_pct.iter().try_for_each(|v| check_flex_pct(*v))?;
            a.recovery_hours.iter().try_for_each(|v| check_recovery(*v))?;
        }
        if let Some(a) = &self.battery {
            a.power_ratio.iter().try_for_each(|v| check_ratio(*v))?;
            a.duration_hours.iter().try_for_each(|v| check_duration(*v))?;
        }
        if let Some(np) = self.pv_nameplate_kw {
            if !(np >= 0.0) || !np.is_finite() {
                return Err(Error::Config(format!("pv_nameplate_kw {np} must be >= 0")));
            }
        }
        let d = &self.battery_defaults;
        if !(d.eta > 0.0 && d.eta <= 1.0) {
            return Err(Error::Config(format!("battery_defaults.eta {} outside (0, 1]", d.eta)));
        }
        if !(0.0..=1.0).contains(&d.j_init_fraction) {
            return Err(Error::Config(format!(
                "battery_defaults.j_init_fraction {} outside [0, 1]",
                d.j_init_fraction
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1e-2) {
            return Err(Error::Config(format!("tolerance {} outside (0, 0.01)", self.tolerance)));
        }
        self.run.assets().validate()
    }
}
