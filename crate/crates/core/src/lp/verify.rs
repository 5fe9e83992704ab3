//! Independent re-check of an optimal dispatch against the model
//! constraints and the direct bill evaluation.
//!
//! Every residual is recomputed from the problem inputs and the named
//! solution series; nothing here reads the assembled LP rows.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::billing::bill_for_labels;
use crate::scalar::Scalar;

use super::build::MonthProblem;
use super::instance::ConstraintTag;
use super::solve::DispatchSolution;

/// Tolerance applied to the horizon-balance residual, kW.
pub const BALANCE_TOLERANCE: f64 = 1e-4;
/// Relative tolerance for oracle/objective agreement.
pub const OBJECTIVE_RTOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    /// Largest violation per constraint family, in model units.
    pub residuals: BTreeMap<String, f64>,
    pub objective: f64,
    pub oracle_bill: f64,
    /// |oracle − objective| / max(1, |objective|).
    pub oracle_gap: f64,
    /// Largest slack in the max-demand and import variables; only computed
    /// when every demand rate and the non-bypassable charge are positive.
    pub tightness_gap: Option<f64>,
    /// Steps with P_cha(t)·P_dis(t) above tolerance. Informational.
    pub simultaneous_steps: Vec<usize>,
    pub failures: Vec<String>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn residual(&self, tag: ConstraintTag) -> f64 {
        self.residuals.get(tag.name()).copied().unwrap_or(0.0)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.values().copied().fold(0.0, f64::max)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} max_residual={:.3e} oracle_gap={:.3e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.max_residual(),
            self.oracle_gap
        )?;
        if !self.simultaneous_steps.is_empty() {
            write!(f, " simultaneous_steps={}", self.simultaneous_steps.len())?;
        }
        for msg in &self.failures {
            write!(f, "; {msg}")?;
        }
        Ok(())
    }
}

struct Residuals(BTreeMap<ConstraintTag, f64>);

impl Residuals {
    fn record(&mut self, tag: ConstraintTag, violation: f64) {
        let v = if violation.is_nan() { f64::INFINITY } else { violation.max(0.0) };
        let e = self.0.entry(tag).or_insert(0.0);
        *e = e.max(v);
    }
}

/// Checks `solution` against `problem` with absolute tolerance `tol`.
pub fn verify_solution<T: Scalar>(
    solution: &DispatchSolution<T>,
    problem: &MonthProblem<'_, T>,
    tol: f64,
) -> VerificationReport {
    let mut failures = Vec::new();
    if !solution.status.is_optimal() {
        failures.push(format!("status {}", solution.status));
    }
    let n = problem.grid.len();
    if solution.len() != n {
        failures.push(format!("solution has {} steps, grid has {n}", solution.len()));
        return VerificationReport {
            residuals: BTreeMap::new(),
            objective: solution.objective_value.to_f64_lossy(),
            oracle_bill: f64::NAN,
            oracle_gap: f64::INFINITY,
            tightness_gap: None,
            simultaneous_steps: Vec::new(),
            failures,
            passed: false,
        };
    }

    let f = |v: T| v.to_f64_lossy();
    let labels = problem.labels();
    let tariff = problem.tariff;
    let base: Vec<f64> = problem.load.d_base.iter().map(|v| f(*v)).collect();
    let pv: Vec<f64> = problem.pv.p_pv.iter().map(|v| f(*v)).collect();
    let net: Vec<f64> = solution.net_demand.iter().map(|v| f(*v)).collect();
    let imp: Vec<f64> = solution.import.iter().map(|v| f(*v)).collect();
    let dev: Vec<f64> = solution.deviation.iter().map(|v| f(*v)).collect();
    let cha: Vec<f64> = solution.charge.iter().map(|v| f(*v)).collect();
    let dis: Vec<f64> = solution.discharge.iter().map(|v| f(*v)).collect();
    let soc: Vec<f64> = solution.soc.iter().map(|v| f(*v)).collect();
    let dmax = f(solution.max_demand);
    let dtou: Vec<f64> = solution.tou_demand.iter().map(|v| f(*v)).collect();

    let mut r = Residuals(BTreeMap::new());
    for t in 0..n {
        let p = labels[t].0;
        r.record(ConstraintTag::NetDemand, (net[t] - (base[t] + dev[t] - pv[t] + cha[t] - dis[t])).abs());
        r.record(ConstraintTag::MaxDemand, net[t] - dmax);
        r.record(ConstraintTag::TouDemand, net[t] - dtou[p]);
        r.record(ConstraintTag::ImportNonNegative, -imp[t]);
        r.record(ConstraintTag::ImportCoversNet, net[t] - imp[t]);
    }

    match problem.active_flex() {
        Some(flex) => {
            for t in 0..n {
                let lo = f(flex.bounds.lower[t]);
                let hi = f(flex.bounds.upper[t]);
                r.record(ConstraintTag::DeviationBounds, (lo - dev[t]).max(dev[t] - hi));
            }
            let delta = flex.delta_steps;
            let mut window: f64 = dev[..delta.min(n)].iter().sum();
            for k in 0..=n.saturating_sub(delta) {
                if k > 0 {
                    window += dev[k + delta - 1] - dev[k - 1];
                }
                r.record(ConstraintTag::RecoveryWindow, -window);
            }
            let total: f64 = dev.iter().sum();
            r.record(ConstraintTag::HorizonBalance, total.abs());
        }
        None => {
            let stray = dev.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            r.record(ConstraintTag::DeviationBounds, stray);
        }
    }

    match problem.active_battery() {
        Some(b) => {
            let (bpr, ber, eta, j0) = (f(b.bpr), f(b.ber), f(b.eta), f(b.j_init));
            for t in 0..n {
                let prev = if t == 0 { j0 } else { soc[t - 1] };
                let tag = if t == 0 { ConstraintTag::SocInitial } else { ConstraintTag::SocUpdate };
                r.record(tag, (soc[t] - prev - 0.25 * (eta * cha[t] - dis[t])).abs());
                r.record(ConstraintTag::SocBounds, (-soc[t]).max(soc[t] - ber));
                r.record(ConstraintTag::ChargeLimit, (-cha[t]).max(cha[t] - bpr));
                r.record(ConstraintTag::DischargeLimit, (-dis[t]).max(dis[t] - bpr));
                r.record(ConstraintTag::NoExport, dis[t] - (base[t] + dev[t] + cha[t]));
            }
            if n > 0 {
                r.record(ConstraintTag::SocTerminal, (soc[n - 1] - j0).abs());
            }
        }
        None => {
            let stray = cha.iter().chain(&dis).fold(0.0, |m: f64, v| m.max(v.abs()));
            r.record(ConstraintTag::ChargeLimit, stray);
        }
    }

    for (tag, v) in &r.0 {
        let limit = if *tag == ConstraintTag::HorizonBalance { BALANCE_TOLERANCE } else { tol };
        if !(*v <= limit) {
            failures.push(format!("{tag} residual {v:.3e} exceeds {limit:.0e}"));
        }
    }

    let bill = bill_for_labels(&solution.net_demand, tariff, &labels);
    let objective = f(solution.objective_value);
    let oracle_bill = f(bill.total);
    let oracle_gap = (oracle_bill - objective).abs() / objective.abs().max(1.0);
    if solution.status.is_optimal() && !(oracle_gap <= OBJECTIVE_RTOL) {
        failures.push(format!("oracle bill {oracle_bill} differs from objective {objective}"));
    }

    let tightness_gap = (tariff.all_rates_positive() && f(tariff.nbc()) > 0.0).then(|| {
        let mut gap = (dmax - f(bill.max_demand_kw)).abs();
        for (p, c) in bill.demand_tou_charges.iter().enumerate() {
            gap = gap.max((dtou[p] - f(c.peak_kw)).abs());
        }
        for t in 0..n {
            gap = gap.max((imp[t] - net[t].max(0.0)).abs());
        }
        gap
    });
    if let Some(g) = tightness_gap {
        if solution.status.is_optimal() && !(g <= tol) {
            failures.push(format!("max-demand or import variables slack by {g:.3e}"));
        }
    }

    let simultaneous_steps = (0..n).filter(|t| cha[*t] * dis[*t] > tol).collect();

    VerificationReport {
        residuals: r.0.into_iter().map(|(k, v)| (k.name().to_string(), v)).collect(),
        objective,
        oracle_bill,
        oracle_gap,
        tightness_gap,
        simultaneous_steps,
        passed: failures.is_empty(),
        failures,
    }
}
