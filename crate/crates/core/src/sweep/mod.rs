//! Configuration-driven annual runs and parameter sweeps over tariff pairs.

mod config;
mod data;
mod output;
mod run;

pub use config::{AssetConfig, BatteryAxes, FlexAxes, RunSettings, SolveSettings, SweepConfig, TariffChoice};
pub use data::{AnnualData, TariffPair};
pub use output::{
    cents, config_digest, family_rows, point_rows, sig6, write_csv, write_outputs, SweepRow, WrittenFiles,
    CSV_HEADER, RATIO_ROW_ID, UNDEFINED,
};
pub use run::{
    battery_for, point_ratios, run_annual, run_month, run_sweep, sweep_points, Family, PointResult, PointStatus,
    SweepOutcome, SweepPoint,
};
