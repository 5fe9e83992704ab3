use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Battery parameters. Efficiency is applied to charging power only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatterySpec<T> {
    /// Power rating, kW.
    pub bpr: T,
    /// Energy rating, kWh.
    pub ber: T,
    pub eta: T,
    /// Initial (and required final) state of charge, kWh.
    pub j_init: T,
}

impl<T: Scalar> BatterySpec<T> {
    pub fn new(bpr: T, ber: T, eta: T, j_init: T) -> Result<Self> {
        let z = T::zero();
        if !(bpr >= z) || !bpr.is_finite() {
            return Err(Error::Asset(format!("battery power rating {bpr} must be >= 0")));
        }
        if !(ber >= z) || !ber.is_finite() {
            return Err(Error::Asset(format!("battery energy rating {ber} must be >= 0")));
        }
        if !(eta > z && eta <= T::one()) {
            return Err(Error::Asset(format!("battery efficiency {eta} must lie in (0, 1]")));
        }
        if !(j_init >= z && j_init <= ber) {
            return Err(Error::Asset(format!(
                "initial state of charge {j_init} must lie in [0, {ber}]"
            )));
        }
        Ok(Self { bpr, ber, eta, j_init })
    }

    /// A battery that can neither charge nor discharge.
    pub fn is_absent(&self) -> bool {
        self.bpr <= T::zero()
    }
}

/// Efficiency and starting charge applied to swept batteries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatteryDefaults {
    pub eta: f64,
    /// Initial state of charge as a fraction of the energy rating.
    pub j_init_fraction: f64,
}

impl Default for BatteryDefaults {
    fn default() -> Self {
        Self {
            eta: 0.85,
            j_init_fraction: 0.5,
        }
    }
}

/// Sizes a battery from a power ratio (relative to annual maximum demand)
/// and a duration in hours.
pub fn battery_from_sweep<T: Scalar>(
    power_ratio: T,
    duration_hours: T,
    annual_max: T,
    defaults: &BatteryDefaults,
) -> Result<BatterySpec<T>> {
    if !(power_ratio >= T::zero()) {
        return Err(Error::Asset(format!("power ratio {power_ratio} must be >= 0")));
    }
    if !(duration_hours > T::zero()) {
        return Err(Error::Asset(format!("duration {duration_hours} h must be > 0")));
    }
    if !(defaults.j_init_fraction >= 0.0 && defaults.j_init_fraction <= 1.0) {
        return Err(Error::Asset(format!(
            "initial charge fraction {} must lie in [0, 1]",
            defaults.j_init_fraction
        )));
    }
    let bpr = power_ratio * annual_max;
    let ber = duration_hours * bpr;
    let j_init = (T::lit(defaults.j_init_fraction) * ber).min(ber);
    BatterySpec::new(bpr, ber, T::lit(defaults.eta), j_init)
}

/// Storage-rider eligibility: power rating of at least 10 % of annual maximum
/// demand. The boundary is inclusive with a 1e-12 relative allowance for
/// decimal rounding of the inputs.
pub fn option_s_eligible<T: Scalar>(battery: &BatterySpec<T>, annual_max: T) -> bool {
    let threshold = T::lit(0.10) * annual_max;
    battery.bpr > T::zero() && battery.bpr >= threshold * (T::one() - T::lit(1e-12))
}
