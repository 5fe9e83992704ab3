//! Solver-independent sparse representation of the monthly bill LP.

use std::fmt;

use crate::calendar::PeriodId;

/// A decision variable of the monthly problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Var {
    /// D_net(t)
    NetDemand(usize),
    /// D_net⁺(t), grid imports
    Import(usize),
    /// D_max
    MaxDemand,
    /// D_tou(p)
    TouDemand(PeriodId),
    /// D_dev(t)
    Deviation(usize),
    /// P_cha(t)
    Charge(usize),
    /// P_dis(t)
    Discharge(usize),
    /// J(t)
    Soc(usize),
    /// Running total Σ_{τ≤t} D_dev(τ); only in the compact formulation.
    DeviationSum(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::NetDemand(t) => write!(f, "dnet_{t}"),
            Var::Import(t) => write!(f, "dimp_{t}"),
            Var::MaxDemand => write!(f, "dmax"),
            Var::TouDemand(p) => write!(f, "dtou_{}", p.0),
            Var::Deviation(t) => write!(f, "ddev_{t}"),
            Var::Charge(t) => write!(f, "pcha_{t}"),
            Var::Discharge(t) => write!(f, "pdis_{t}"),
            Var::Soc(t) => write!(f, "soc_{t}"),
            Var::DeviationSum(t) => write!(f, "devsum_{t}"),
        }
    }
}

/// Which model constraint a row or column bound encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConstraintTag {
    /// D_net(t) ≤ D_max
    MaxDemand,
    /// δ(t,p)·D_net(t) ≤ D_tou(p)
    TouDemand,
    /// D_net⁺(t) ≥ 0
    ImportNonNegative,
    /// D_net⁺(t) ≥ D_net(t)
    ImportCoversNet,
    /// D̲_dev(t) ≤ D_dev(t) ≤ D̄_dev(t)
    DeviationBounds,
    /// Δ-step window sums of D_dev are nonnegative
    RecoveryWindow,
    /// Σ_t D_dev(t) = 0
    HorizonBalance,
    /// Definition of the running deviation total (compact formulation only)
    RunningSum,
    /// J(t) = J(t−1) + ¼(η·P_cha − P_dis)
    SocUpdate,
    /// J(0) = J_init + ¼(η·P_cha − P_dis)
    SocInitial,
    /// 0 ≤ J(t) ≤ BER
    SocBounds,
    /// J(T) = J_init
    SocTerminal,
    /// 0 ≤ P_cha(t) ≤ BPR
    ChargeLimit,
    /// 0 ≤ P_dis(t) ≤ BPR
    DischargeLimit,
    /// P_dis(t) ≤ D_base(t) + D_dev(t) + P_cha(t)
    NoExport,
    /// D_net = D_base + D_dev − P_pv + P_cha − P_dis
    NetDemand,
}

impl ConstraintTag {
    pub const ALL: [ConstraintTag; 16] = [
        ConstraintTag::MaxDemand,
        ConstraintTag::TouDemand,
        ConstraintTag::ImportNonNegative,
        ConstraintTag::ImportCoversNet,
        ConstraintTag::DeviationBounds,
        ConstraintTag::RecoveryWindow,
        ConstraintTag::HorizonBalance,
        ConstraintTag::RunningSum,
        ConstraintTag::SocUpdate,
        ConstraintTag::SocInitial,
        ConstraintTag::SocBounds,
        ConstraintTag::SocTerminal,
        ConstraintTag::ChargeLimit,
        ConstraintTag::DischargeLimit,
        ConstraintTag::NoExport,
        ConstraintTag::NetDemand,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConstraintTag::MaxDemand => "max_demand",
            ConstraintTag::TouDemand => "tou_demand",
            ConstraintTag::ImportNonNegative => "import_nonneg",
            ConstraintTag::ImportCoversNet => "import_covers_net",
            ConstraintTag::DeviationBounds => "deviation_bounds",
            ConstraintTag::RecoveryWindow => "recovery_window",
            ConstraintTag::HorizonBalance => "horizon_balance",
            ConstraintTag::RunningSum => "running_sum",
            ConstraintTag::SocUpdate => "soc_update",
            ConstraintTag::SocInitial => "soc_initial",
            ConstraintTag::SocBounds => "soc_bounds",
            ConstraintTag::SocTerminal => "soc_terminal",
            ConstraintTag::ChargeLimit => "charge_limit",
            ConstraintTag::DischargeLimit => "discharge_limit",
            ConstraintTag::NoExport => "no_export",
            ConstraintTag::NetDemand => "net_demand",
        }
    }

    pub fn is_battery(self) -> bool {
        matches!(
            self,
            ConstraintTag::SocUpdate
                | ConstraintTag::SocInitial
                | ConstraintTag::SocBounds
                | ConstraintTag::SocTerminal
                | ConstraintTag::ChargeLimit
                | ConstraintTag::DischargeLimit
                | ConstraintTag::NoExport
        )
    }

    pub fn is_flex(self) -> bool {
        matches!(
            self,
            ConstraintTag::DeviationBounds
                | ConstraintTag::RecoveryWindow
                | ConstraintTag::HorizonBalance
                | ConstraintTag::RunningSum
        )
    }
}

impl fmt::Display for ConstraintTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How the max-demand and recovery-window constraints are written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formulation {
    /// One max-demand row per step and one dense row per recovery window.
    Literal,
    /// Same feasible set projected onto the model variables, with fewer
    /// nonzeros: per-period maxima are bounded by D_max (|𝒫| rows instead of
    /// |𝒯|), and windows are differences of running deviation totals.
    #[default]
    Compact,
}

/// Column layout. Blocks for absent assets have zero width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarIndex {
    steps: usize,
    periods: usize,
    flex: bool,
    battery: bool,
    running_sum: bool,
}

impl VarIndex {
    pub(crate) fn new(steps: usize, periods: usize, flex: bool, battery: bool, running_sum: bool) -> Self {
        Self {
            steps,
            periods,
            flex,
            battery,
            running_sum: running_sum && flex,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    pub fn has_flex(&self) -> bool {
        self.flex
    }

    pub fn has_battery(&self) -> bool {
        self.battery
    }

    pub fn has_running_sum(&self) -> bool {
        self.running_sum
    }

    fn flex_base(&self) -> usize {
        2 * self.steps + 1 + self.periods
    }

    fn battery_base(&self) -> usize {
        self.flex_base() + if self.flex { self.steps } else { 0 }
    }

    fn sum_base(&self) -> usize {
        self.battery_base() + if self.battery { 3 * self.steps } else { 0 }
    }

    pub fn len(&self) -> usize {
        self.sum_base() + if self.running_sum { self.steps } else { 0 }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Count of model variables, excluding running-sum helpers.
    pub fn model_len(&self) -> usize {
        self.sum_base()
    }

    /// Column of `var`, or `None` when its block is absent.
    pub fn col(&self, var: Var) -> Option<usize> {
        let n = self.steps;
        let step = |t: usize| (t < n).then_some(t);
        match var {
            Var::NetDemand(t) => step(t),
            Var::Import(t) => step(t).map(|t| n + t),
            Var::MaxDemand => Some(2 * n),
            Var::TouDemand(p) => (p.0 < self.periods).then_some(2 * n + 1 + p.0),
            Var::Deviation(t) => self.flex.then(|| step(t)).flatten().map(|t| self.flex_base() + t),
            Var::Charge(t) => self.battery.then(|| step(t)).flatten().map(|t| self.battery_base() + t),
            Var::Discharge(t) => self.battery.then(|| step(t)).flatten().map(|t| self.battery_base() + n + t),
            Var::Soc(t) => self.battery.then(|| step(t)).flatten().map(|t| self.battery_base() + 2 * n + t),
            Var::DeviationSum(t) => self.running_sum.then(|| step(t)).flatten().map(|t| self.sum_base() + t),
        }
    }

    /// Inverse of [`VarIndex::col`].
    pub fn var(&self, col: usize) -> Option<Var> {
        let n = self.steps;
        if col >= self.len() {
            return None;
        }
        Some(if col < n {
            Var::NetDemand(col)
        } else if col < 2 * n {
            Var::Import(col - n)
        } else if col == 2 * n {
            Var::MaxDemand
        } else if col < self.flex_base() {
            Var::TouDemand(PeriodId(col - 2 * n - 1))
        } else if col < self.battery_base() {
            Var::Deviation(col - self.flex_base())
        } else if col < self.sum_base() {
            let k = col - self.battery_base();
            match k / n {
                0 => Var::Charge(k % n),
                1 => Var::Discharge(k % n),
                _ => Var::Soc(k % n),
            }
        } else {
            Var::DeviationSum(col - self.sum_base())
        })
    }
}

/// Bounds and provenance of one column.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnBound<T> {
    pub lower: T,
    pub upper: T,
    /// Constraint family the bound encodes, if any.
    pub tag: Option<ConstraintTag>,
}

/// `lower ≤ Σ coef·x ≤ upper`; infinite bounds mean the side is open.
#[derive(Debug, Clone, PartialEq)]
pub struct Row<T> {
    pub tag: ConstraintTag,
    pub terms: Vec<(usize, T)>,
    pub lower: T,
    pub upper: T,
}

/// A fully assembled monthly LP.
#[derive(Debug, Clone, PartialEq)]
pub struct LpInstance<T> {
    pub vars: VarIndex,
    pub cost: Vec<T>,
    pub bounds: Vec<ColumnBound<T>>,
    pub rows: Vec<Row<T>>,
    pub formulation: Formulation,
}

impl<T> LpInstance<T> {
    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows_tagged(&self, tag: ConstraintTag) -> usize {
        self.rows.iter().filter(|r| r.tag == tag).count()
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(|r| r.terms.len()).sum()
    }
}
