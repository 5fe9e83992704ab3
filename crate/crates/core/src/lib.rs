//! Bill-minimising dispatch of batteries and flexible demand under
//! time-of-use tariffs.
//!
//! The core is generic over the floating-point type; aliases for `f64` are
//! provided at the crate root.

pub mod assets;
pub mod billing;
pub mod calendar;
pub mod cli;
pub mod error;
pub mod lp;
pub mod metrics;
pub mod scalar;
pub mod sweep;
pub mod tariff;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type TariffSchedule = tariff::TariffSchedule<f64>;
pub type BillBreakdown = billing::BillBreakdown<f64>;
pub type LoadProfile = assets::LoadProfile<f64>;
pub type PvProfile = assets::PvProfile<f64>;
pub type BatterySpec = assets::BatterySpec<f64>;
pub type FlexSpec = assets::FlexSpec<f64>;
pub type FlexBounds = assets::FlexBounds<f64>;
pub type LpInstance = lp::LpInstance<f64>;
pub type DispatchSolution = lp::DispatchSolution<f64>;
pub type MetricSet = metrics::MetricSet<f64>;
pub type AnnualResult = metrics::AnnualResult<f64>;
