use crate::assets::{BatterySpec, FlexBounds, FlexSpec, LoadProfile, PvProfile};
use crate::calendar::{PeriodId, TimeGrid};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tariff::{rate_series_for_labels, TariffSchedule};

use super::instance::{ColumnBound, ConstraintTag, Formulation, LpInstance, Row, Var, VarIndex};

/// Flexible-demand input to one monthly problem.
#[derive(Debug, Clone, PartialEq)]
pub struct FlexInput<T> {
    /// Recovery window Δ in steps.
    pub delta_steps: usize,
    pub bounds: FlexBounds<T>,
}

impl<T: Scalar> FlexInput<T> {
    pub fn from_spec(spec: &FlexSpec<T>, load: &LoadProfile<T>) -> Self {
        Self {
            delta_steps: spec.delta_steps(),
            bounds: crate::assets::flex_bounds(spec, load),
        }
    }

    /// False when every deviation bound is zero.
    pub fn is_active(&self) -> bool {
        self.bounds
            .lower
            .iter()
            .chain(&self.bounds.upper)
            .any(|v| *v != T::zero())
    }
}

/// Everything needed to build and check one monthly problem.
#[derive(Debug, Clone)]
pub struct MonthProblem<'a, T> {
    pub grid: &'a TimeGrid,
    pub tariff: &'a TariffSchedule<T>,
    pub load: &'a LoadProfile<T>,
    pub pv: &'a PvProfile<T>,
    pub battery: Option<BatterySpec<T>>,
    pub flex: Option<FlexInput<T>>,
}

impl<'a, T: Scalar> MonthProblem<'a, T> {
    pub fn new(
        grid: &'a TimeGrid,
        tariff: &'a TariffSchedule<T>,
        load: &'a LoadProfile<T>,
        pv: &'a PvProfile<T>,
    ) -> Self {
        Self {
            grid,
            tariff,
            load,
            pv,
            battery: None,
            flex: None,
        }
    }

    pub fn with_battery(mut self, battery: BatterySpec<T>) -> Self {
        self.battery = Some(battery);
        self
    }

    pub fn with_flex(mut self, spec: &FlexSpec<T>) -> Self {
        self.flex = Some(FlexInput::from_spec(spec, self.load));
        self
    }

    pub fn with_flex_input(mut self, flex: FlexInput<T>) -> Self {
        self.flex = Some(flex);
        self
    }

    /// The battery, when it can actually move energy.
    pub fn active_battery(&self) -> Option<&BatterySpec<T>> {
        self.battery.as_ref().filter(|b| !b.is_absent())
    }

    pub fn active_flex(&self) -> Option<&FlexInput<T>> {
        self.flex.as_ref().filter(|f| f.is_active())
    }

    pub fn labels(&self) -> Vec<PeriodId> {
        self.tariff.calendar().label_grid(self.grid)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let n = self.grid.len();
        if self.load.d_base.len() != n {
            return Err(Error::length("d_base", self.load.d_base.len(), n));
        }
        if self.pv.p_pv.len() != n {
            return Err(Error::length("p_pv", self.pv.p_pv.len(), n));
        }
        if let Some(flex) = self.active_flex() {
            if flex.bounds.len() != n {
                return Err(Error::length("flex bounds", flex.bounds.len(), n));
            }
            if flex.delta_steps == 0 || flex.delta_steps > n {
                return Err(Error::WindowTooLong {
                    window: flex.delta_steps,
                    horizon: n,
                });
            }
        }
        Ok(())
    }
}

/// Builds the monthly LP in the default (compact) formulation.
pub fn build_lp<T: Scalar>(problem: &MonthProblem<'_, T>) -> Result<LpInstance<T>> {
    build_lp_with(problem, Formulation::default())
}

pub fn build_lp_with<T: Scalar>(
    problem: &MonthProblem<'_, T>,
    formulation: Formulation,
) -> Result<LpInstance<T>> {
    problem.validate()?;
    let n = problem.grid.len();
    let tariff = problem.tariff;
    let labels = problem.labels();
    let rates = rate_series_for_labels(tariff, &labels);
    let battery = problem.active_battery();
    let flex = problem.active_flex();
    let vars = VarIndex::new(
        n,
        tariff.num_periods(),
        flex.is_some(),
        battery.is_some(),
        formulation == Formulation::Compact,
    );
    let col = |v: Var| vars.col(v).expect("variable present in layout");

    let zero = T::zero();
    let one = T::one();
    let inf = T::infinity();
    let quarter = T::quarter();

    let mut cost = vec![zero; vars.len()];
    let mut bounds = vec![
        ColumnBound {
            lower: -inf,
            upper: inf,
            tag: None,
        };
        vars.len()
    ];

    // Objective: D_net carries the sell rate and imports carry the spread
    // ER − NSR, which together equal ¼·[D⁺·ER + (D_net − D⁺)·NSR].
    for t in 0..n {
        cost[col(Var::NetDemand(t))] = quarter * rates.nsr[t];
        cost[col(Var::Import(t))] = quarter * rates.er[t] - quarter * rates.nsr[t];
        bounds[col(Var::Import(t))] = ColumnBound {
            lower: zero,
            upper: inf,
            tag: Some(ConstraintTag::ImportNonNegative),
        };
    }
    cost[col(Var::MaxDemand)] = tariff.dr_max();
    bounds[col(Var::MaxDemand)].lower = zero;
    for p in 0..tariff.num_periods() {
        let c = col(Var::TouDemand(PeriodId(p)));
        cost[c] = tariff.dr_tou(PeriodId(p));
        bounds[c].lower = zero;
    }

    let mut rows: Vec<Row<T>> = Vec::new();

    for t in 0..n {
        let mut terms = vec![(col(Var::NetDemand(t)), one)];
        if flex.is_some() {
            terms.push((col(Var::Deviation(t)), -one));
        }
        if battery.is_some() {
            terms.push((col(Var::Charge(t)), -one));
            terms.push((col(Var::Discharge(t)), one));
        }
        let rhs = problem.load.d_base[t] - problem.pv.p_pv[t];
        rows.push(Row {
            tag: ConstraintTag::NetDemand,
            terms,
            lower: rhs,
            upper: rhs,
        });
    }

    match formulation {
        Formulation::Literal => {
            for t in 0..n {
                rows.push(Row {
                    tag: ConstraintTag::MaxDemand,
                    terms: vec![(col(Var::NetDemand(t)), one), (col(Var::MaxDemand), -one)],
                    lower: -inf,
                    upper: zero,
                });
            }
        }
        Formulation::Compact => {
            for p in 0..tariff.num_periods() {
                rows.push(Row {
                    tag: ConstraintTag::MaxDemand,
                    terms: vec![(col(Var::TouDemand(PeriodId(p))), one), (col(Var::MaxDemand), -one)],
                    lower: -inf,
                    upper: zero,
                });
            }
        }
    }

    for (t, p) in labels.iter().enumerate() {
        rows.push(Row {
            tag: ConstraintTag::TouDemand,
            terms: vec![(col(Var::NetDemand(t)), one), (col(Var::TouDemand(*p)), -one)],
            lower: -inf,
            upper: zero,
        });
        rows.push(Row {
            tag: ConstraintTag::ImportCoversNet,
            terms: vec![(col(Var::Import(t)), one), (col(Var::NetDemand(t)), -one)],
            lower: zero,
            upper: inf,
        });
    }

    if let Some(flex) = flex {
        for t in 0..n {
            bounds[col(Var::Deviation(t))] = ColumnBound {
                lower: flex.bounds.lower[t],
                upper: flex.bounds.upper[t],
                tag: Some(ConstraintTag::DeviationBounds),
            };
        }
        let delta = flex.delta_steps;
        match formulation {
            Formulation::Literal => {
                for k in 0..=n - delta {
                    rows.push(Row {
                        tag: ConstraintTag::RecoveryWindow,
                        terms: (k..k + delta).map(|t| (col(Var::Deviation(t)), one)).collect(),
                        lower: zero,
                        upper: inf,
                    });
                }
                rows.push(Row {
                    tag: ConstraintTag::HorizonBalance,
                    terms: (0..n).map(|t| (col(Var::Deviation(t)), one)).collect(),
                    lower: zero,
                    upper: zero,
                });
            }
            Formulation::Compact => {
                let sum = |t: usize| col(Var::DeviationSum(t));
                for t in 0..n {
                    let mut terms = vec![(sum(t), one), (col(Var::Deviation(t)), -one)];
                    if t > 0 {
                        terms.push((sum(t - 1), -one));
                    }
                    rows.push(Row {
                        tag: ConstraintTag::RunningSum,
                        terms,
                        lower: zero,
                        upper: zero,
                    });
                }
                for k in 0..=n - delta {
                    let mut terms = vec![(sum(k + delta - 1), one)];
                    if k > 0 {
                        terms.push((sum(k - 1), -one));
                    }
                    rows.push(Row {
                        tag: ConstraintTag::RecoveryWindow,
                        terms,
                        lower: zero,
                        upper: inf,
                    });
                }
                rows.push(Row {
                    tag: ConstraintTag::HorizonBalance,
                    terms: vec![(sum(n - 1), one)],
                    lower: zero,
                    upper: zero,
                });
            }
        }
    }

    if let Some(b) = battery {
        let charge_gain = quarter * b.eta;
        for t in 0..n {
            bounds[col(Var::Charge(t))] = ColumnBound {
                lower: zero,
                upper: b.bpr,
                tag: Some(ConstraintTag::ChargeLimit),
            };
            bounds[col(Var::Discharge(t))] = ColumnBound {
                lower: zero,
                upper: b.bpr,
                tag: Some(ConstraintTag::DischargeLimit),
            };
            bounds[col(Var::Soc(t))] = ColumnBound {
                lower: zero,
                upper: b.ber,
                tag: Some(ConstraintTag::SocBounds),
            };

            let mut terms = vec![
                (col(Var::Soc(t)), one),
                (col(Var::Charge(t)), -charge_gain),
                (col(Var::Discharge(t)), quarter),
            ];
            let (tag, rhs) = if t == 0 {
                (ConstraintTag::SocInitial, b.j_init)
            } else {
                terms.push((col(Var::Soc(t - 1)), -one));
                (ConstraintTag::SocUpdate, zero)
            };
            rows.push(Row {
                tag,
                terms,
                lower: rhs,
                upper: rhs,
            });

            let mut terms = vec![(col(Var::Discharge(t)), one), (col(Var::Charge(t)), -one)];
            if flex.is_some() {
                terms.push((col(Var::Deviation(t)), -one));
            }
            rows.push(Row {
                tag: ConstraintTag::NoExport,
                terms,
                lower: -inf,
                upper: problem.load.d_base[t],
            });
        }
        rows.push(Row {
            tag: ConstraintTag::SocTerminal,
            terms: vec![(col(Var::Soc(n - 1)), one)],
            lower: b.j_init,
            upper: b.j_init,
        });
    }

    Ok(LpInstance {
        vars,
        cost,
        bounds,
        rows,
        formulation,
    })
}
