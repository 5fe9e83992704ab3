//! HiGHS backend: passes an [`LpInstance`] to the dual simplex solver and
//! unpacks the optimal vertex into named series.

use std::fmt;

use highs::{HighsModelStatus, Model, RowProblem, Sense, SolvedModel};
use log::debug;
use serde::Serialize;

use crate::calendar::PeriodId;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::instance::{LpInstance, Var, VarIndex};

/// Default primal feasibility tolerance, kW or kWh.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    InfeasibleOrUnbounded,
    /// Anything else the backend reports, with its own description.
    NumericalFailure(String),
}

impl SolveStatus {
    pub fn is_optimal(&self) -> bool {
        matches!(self, SolveStatus::Optimal)
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveStatus::Optimal => f.write_str("optimal"),
            SolveStatus::Infeasible => f.write_str("infeasible"),
            SolveStatus::Unbounded => f.write_str("unbounded"),
            SolveStatus::InfeasibleOrUnbounded => f.write_str("infeasible_or_unbounded"),
            SolveStatus::NumericalFailure(s) => write!(f, "numerical_failure({s})"),
        }
    }
}

/// Steps at which the max-demand variables are attained.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Tightness {
    /// Steps with D_net(t) = D_max within tolerance.
    pub max_demand_steps: Vec<usize>,
    /// Per period, steps with D_net(t) = D_tou(p) within tolerance.
    pub tou_demand_steps: Vec<Vec<usize>>,
}

/// Optimal dispatch for one month. Series of absent assets are all zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DispatchSolution<T> {
    pub status: SolveStatus,
    pub objective_value: T,
    pub net_demand: Vec<T>,
    pub import: Vec<T>,
    pub deviation: Vec<T>,
    pub charge: Vec<T>,
    pub discharge: Vec<T>,
    pub soc: Vec<T>,
    pub max_demand: T,
    pub tou_demand: Vec<T>,
    pub tightness: Tightness,
    pub simplex_iterations: i64,
}

impl<T: Scalar> DispatchSolution<T> {
    fn empty(status: SolveStatus, steps: usize, periods: usize) -> Self {
        let z = vec![T::zero(); steps];
        Self {
            status,
            objective_value: T::nan(),
            net_demand: z.clone(),
            import: z.clone(),
            deviation: z.clone(),
            charge: z.clone(),
            discharge: z.clone(),
            soc: z,
            max_demand: T::zero(),
            tou_demand: vec![T::zero(); periods],
            tightness: Tightness::default(),
            simplex_iterations: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.net_demand.len()
    }

    pub fn is_empty(&self) -> bool {
        self.net_demand.is_empty()
    }

    pub fn value(&self, var: Var) -> Option<T> {
        let at = |v: &[T], t: usize| v.get(t).copied();
        match var {
            Var::NetDemand(t) => at(&self.net_demand, t),
            Var::Import(t) => at(&self.import, t),
            Var::MaxDemand => Some(self.max_demand),
            Var::TouDemand(p) => at(&self.tou_demand, p.0),
            Var::Deviation(t) => at(&self.deviation, t),
            Var::Charge(t) => at(&self.charge, t),
            Var::Discharge(t) => at(&self.discharge, t),
            Var::Soc(t) => at(&self.soc, t),
            Var::DeviationSum(t) => (t < self.len()).then(|| self.deviation[..=t].iter().copied().sum()),
        }
    }
}

fn map_status(status: HighsModelStatus) -> SolveStatus {
    match status {
        HighsModelStatus::Optimal => SolveStatus::Optimal,
        HighsModelStatus::Infeasible => SolveStatus::Infeasible,
        HighsModelStatus::Unbounded => SolveStatus::Unbounded,
        HighsModelStatus::UnboundedOrInfeasible => SolveStatus::InfeasibleOrUnbounded,
        other => SolveStatus::NumericalFailure(format!("{other:?}")),
    }
}

/// Solves `instance` with HiGHS dual simplex on a single thread.
///
/// `tol` bounds the backend's primal and dual feasibility tolerances.
/// Non-optimal outcomes are returned as a solution with a non-optimal
/// status; `Err` is reserved for the backend refusing the model.
pub fn solve_lp<T: Scalar>(instance: &LpInstance<T>, tol: f64) -> Result<DispatchSolution<T>> {
    let (pb, _) = row_problem(instance);
    let solved = configured(pb, tol)?.try_solve().map_err(solver_err)?;
    let (status, iterations, x) = outcome(&solved);
    finish(instance, status, iterations, x.as_deref(), tol)
}

/// Relative slack on the bill when re-solving for the smoothest optimum.
pub const TIE_BREAK_RTOL: f64 = 1e-9;

/// Solves `instance`, then, among dispatches whose cost is within
/// [`TIE_BREAK_RTOL`] of the optimum, finds one minimising
/// Σ |D_net(b) − D_net(a)| over the step pairs `(a, b)`.
///
/// The bill LP is often degenerate (equal rates across a TOU period leave
/// the timing of shifted energy free), so a plain solve returns an
/// arbitrary vertex. The second stage hot-starts from the first basis.
pub fn solve_smoothed<T: Scalar>(
    instance: &LpInstance<T>,
    pairs: &[(usize, usize)],
    tol: f64,
) -> Result<DispatchSolution<T>> {
    let ix = &instance.vars;
    let net_cols = pairs
        .iter()
        .map(|&(a, b)| match (ix.col(Var::NetDemand(a)), ix.col(Var::NetDemand(b))) {
            (Some(ca), Some(cb)) => Ok((ca, cb)),
            _ => Err(Error::Solver(format!("step pair ({a}, {b}) outside the horizon"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let started = std::time::Instant::now();
    let (pb, cols) = row_problem(instance);
    let solved = configured(pb, tol)?.try_solve().map_err(solver_err)?;
    let first = outcome(&solved);
    let first_time = started.elapsed();
    if !first.0.is_optimal() || pairs.is_empty() {
        return finish(instance, first.0, first.1, first.2.as_deref(), tol);
    }
    let x1 = first.2.expect("optimal solve has a solution");
    let bill = cost_of(instance, &x1);
    let cap = bill + TIE_BREAK_RTOL * bill.abs().max(1.0);

    // Restrict to the optimal face: complementary slackness with the first
    // dual solution pins every column with a nonzero reduced cost and makes
    // every row with a nonzero dual active.
    let sol = solved.get_solution();
    let (reduced, duals, activity) = (sol.dual_columns().to_vec(), sol.dual_rows().to_vec(), sol.rows().to_vec());
    let mut model = Model::from(solved);
    for (i, &col) in cols.iter().enumerate() {
        model.change_column_cost(col, 0.0);
        if reduced[i].abs() > FACE_EPS {
            model.change_column_bounds(col, x1[i]..=x1[i]);
        }
    }
    for (i, (&y, &a)) in duals.iter().zip(&activity).enumerate() {
        if y.abs() > FACE_EPS {
            // SAFETY: the pointer is owned by `model` and `i` is an existing row.
            let status = unsafe { highs_sys::Highs_changeRowBounds(model.as_mut_ptr(), i as _, a, a) };
            if status == highs_sys::STATUS_ERROR {
                return Err(Error::Solver(format!("cannot pin row {i}")));
            }
        }
    }
    for (ca, cb) in net_cols {
        let r = model.add_col(1.0, 0.0..=f64::INFINITY, []);
        model.add_row(0.0..=f64::INFINITY, [(r, 1.0), (cols[cb], -1.0), (cols[ca], 1.0)]);
        model.add_row(0.0..=f64::INFINITY, [(r, 1.0), (cols[cb], 1.0), (cols[ca], -1.0)]);
    }
    model.set_option("simplex_strategy", PRIMAL_SIMPLEX);
    let solved = model.try_solve().map_err(solver_err)?;
    let (status, iterations, x2) = outcome(&solved);
    debug!(
        "bill stage {first_time:.2?} ({} iterations), smoothing stage {:.2?} ({iterations} iterations)",
        first.1,
        started.elapsed() - first_time
    );
    let iterations = first.1 + iterations;
    match x2 {
        Some(mut x2) if cost_of(instance, &x2[..ix.len()]) <= cap => {
            x2.truncate(ix.len());
            finish(instance, status, iterations, Some(&x2), tol)
        }
        _ => {
            debug!("tie-break stage rejected ({status}); keeping the first vertex");
            finish(instance, first.0, iterations, Some(&x1), tol)
        }
    }
}

/// Reduced costs and duals at or below this magnitude count as zero.
const FACE_EPS: f64 = 1e-9;
const PRIMAL_SIMPLEX: i32 = 4;

fn cost_of<T: Scalar>(instance: &LpInstance<T>, x: &[f64]) -> f64 {
    instance.cost.iter().zip(x).map(|(c, v)| c.to_f64_lossy() * v).sum()
}

type Col = highs::Col;

fn solver_err(e: highs::HighsStatus) -> Error {
    Error::Solver(format!("{e:?}"))
}

fn row_problem<T: Scalar>(instance: &LpInstance<T>) -> (RowProblem, Vec<Col>) {
    let mut pb = RowProblem::default();
    let cols: Vec<_> = instance
        .cost
        .iter()
        .zip(&instance.bounds)
        .map(|(c, b)| pb.add_column(c.to_f64_lossy(), b.lower.to_f64_lossy()..=b.upper.to_f64_lossy()))
        .collect();
    for row in &instance.rows {
        pb.add_row(
            row.lower.to_f64_lossy()..=row.upper.to_f64_lossy(),
            row.terms.iter().map(|(c, v)| (cols[*c], v.to_f64_lossy())),
        );
    }
    (pb, cols)
}

fn configured(pb: RowProblem, tol: f64) -> Result<Model> {
    let mut model = pb.try_optimise(Sense::Minimise).map_err(solver_err)?;
    model.make_quiet();
    let feas = tol.clamp(1e-10, 1e-7);
    model.set_option("solver", "simplex");
    model.set_option("primal_feasibility_tolerance", feas);
    model.set_option("dual_feasibility_tolerance", feas);
    Ok(model)
}

fn outcome(solved: &SolvedModel) -> (SolveStatus, i64, Option<Vec<f64>>) {
    let status = map_status(solved.status());
    let iterations = solved.simplex_iteration_count();
    let x = status.is_optimal().then(|| solved.get_solution().columns().to_vec());
    (status, iterations, x)
}

fn finish<T: Scalar>(
    instance: &LpInstance<T>,
    status: SolveStatus,
    iterations: i64,
    x: Option<&[f64]>,
    tol: f64,
) -> Result<DispatchSolution<T>> {
    let ix = &instance.vars;
    let mut out = DispatchSolution::empty(status, ix.steps(), ix.periods());
    out.simplex_iterations = iterations;
    let Some(x) = x else {
        return Ok(out);
    };
    unpack(ix, x, &mut out);
    // Objective recomputed from the cost vector so the f32 path is
    // consistent with its own arithmetic.
    out.objective_value = instance
        .cost
        .iter()
        .zip(x)
        .map(|(c, v)| *c * T::lit(*v))
        .sum();
    out.tightness = tightness(&out, instance, tol);
    Ok(out)
}

fn unpack<T: Scalar>(ix: &VarIndex, x: &[f64], out: &mut DispatchSolution<T>) {
    let get = |v: Var| ix.col(v).map(|c| T::lit(x[c]));
    for t in 0..ix.steps() {
        out.net_demand[t] = get(Var::NetDemand(t)).unwrap_or_else(T::zero);
        out.import[t] = get(Var::Import(t)).unwrap_or_else(T::zero);
        out.deviation[t] = get(Var::Deviation(t)).unwrap_or_else(T::zero);
        out.charge[t] = get(Var::Charge(t)).unwrap_or_else(T::zero);
        out.discharge[t] = get(Var::Discharge(t)).unwrap_or_else(T::zero);
        out.soc[t] = get(Var::Soc(t)).unwrap_or_else(T::zero);
    }
    out.max_demand = get(Var::MaxDemand).unwrap_or_else(T::zero);
    for p in 0..ix.periods() {
        out.tou_demand[p] = get(Var::TouDemand(PeriodId(p))).unwrap_or_else(T::zero);
    }
}

fn tightness<T: Scalar>(sol: &DispatchSolution<T>, instance: &LpInstance<T>, tol: f64) -> Tightness {
    let tol = T::lit(tol);
    let ix = &instance.vars;
    let mut period_of = vec![None; ix.steps()];
    for row in &instance.rows {
        if row.tag != super::ConstraintTag::TouDemand {
            continue;
        }
        let (mut t, mut p) = (None, None);
        for (c, _) in &row.terms {
            match ix.var(*c) {
                Some(Var::NetDemand(s)) => t = Some(s),
                Some(Var::TouDemand(q)) => p = Some(q.0),
                _ => {}
            }
        }
        if let (Some(t), Some(p)) = (t, p) {
            period_of[t] = Some(p);
        }
    }
    let mut out = Tightness {
        max_demand_steps: Vec::new(),
        tou_demand_steps: vec![Vec::new(); ix.periods()],
    };
    for (t, d) in sol.net_demand.iter().enumerate() {
        if (sol.max_demand - *d).abs() <= tol {
            out.max_demand_steps.push(t);
        }
        if let Some(p) = period_of[t] {
            if (sol.tou_demand[p] - *d).abs() <= tol {
                out.tou_demand_steps[p].push(t);
            }
        }
    }
    out
}
