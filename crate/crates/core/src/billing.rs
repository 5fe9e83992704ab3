//! Direct evaluation of a monthly bill from a net-demand series.
//!
//! This is the post-solve oracle: it shares no code with the LP builder and
//! evaluates every max-demand and import term at its tight value.

use serde::Serialize;

use crate::calendar::{PeriodId, TimeGrid};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tariff::TariffSchedule;

/// Demand charge levied for one TOU period.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodCharge<T> {
    pub period: String,
    /// Highest net demand inside the period, clamped at zero, kW.
    pub peak_kw: T,
    pub charge: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BillBreakdown<T> {
    /// Monthly maximum net demand, clamped at zero, kW.
    pub max_demand_kw: T,
    pub demand_max_charge: T,
    pub demand_tou_charges: Vec<PeriodCharge<T>>,
    pub energy_charge: T,
    /// NEM export credit; never positive.
    pub nem_credit: T,
    pub total: T,
}

impl<T: Scalar> BillBreakdown<T> {
    pub fn demand_tou_total(&self) -> T {
        self.demand_tou_charges.iter().map(|c| c.charge).sum()
    }

    pub fn zero() -> Self {
        Self {
            max_demand_kw: T::zero(),
            demand_max_charge: T::zero(),
            demand_tou_charges: Vec::new(),
            energy_charge: T::zero(),
            nem_credit: T::zero(),
            total: T::zero(),
        }
    }
}

/// Evaluates the monthly bill of `net_demand` (kW per 15-minute step).
pub fn compute_bill<T: Scalar>(
    net_demand: &[T],
    tariff: &TariffSchedule<T>,
    grid: &TimeGrid,
) -> Result<BillBreakdown<T>> {
    if net_demand.len() != grid.len() {
        return Err(Error::length("net_demand", net_demand.len(), grid.len()));
    }
    let labels = tariff.calendar().label_grid(grid);
    Ok(bill_for_labels(net_demand, tariff, &labels))
}

pub(crate) fn bill_for_labels<T: Scalar>(
    net_demand: &[T],
    tariff: &TariffSchedule<T>,
    labels: &[PeriodId],
) -> BillBreakdown<T> {
    let zero = T::zero();
    let quarter = T::quarter();
    let nperiods = tariff.num_periods();

    let mut max_all = zero;
    let mut max_period = vec![zero; nperiods];
    let mut energy = zero;
    let mut credit = zero;
    for (&d, &p) in net_demand.iter().zip(labels) {
        max_all = max_all.max(d);
        max_period[p.0] = max_period[p.0].max(d);
        let er = tariff.er(p);
        if d > zero {
            energy = energy + d * er;
        } else {
            credit = credit + d * (er - tariff.nbc());
        }
    }
    let energy_charge = quarter * energy;
    let nem_credit = quarter * credit;

    let demand_max_charge = max_all * tariff.dr_max();
    let demand_tou_charges: Vec<PeriodCharge<T>> = max_period
        .iter()
        .enumerate()
        .map(|(i, &kw)| PeriodCharge {
            period: tariff.calendar().period_name(PeriodId(i)).to_string(),
            peak_kw: kw,
            charge: kw * tariff.dr_tou(PeriodId(i)),
        })
        .collect();
    let tou_total: T = demand_tou_charges.iter().map(|c| c.charge).sum();
    BillBreakdown {
        max_demand_kw: max_all,
        demand_max_charge,
        total: demand_max_charge + tou_total + energy_charge + nem_credit,
        demand_tou_charges,
        energy_charge,
        nem_credit,
    }
}
