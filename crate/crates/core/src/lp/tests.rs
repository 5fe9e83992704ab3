use super::*;
use crate::assets::{BatterySpec, FlexSpec, LoadProfile, PvProfile};
use crate::calendar::{build_time_grid, TimeGrid};
use crate::tariff::tests::single_period_file;
use crate::tariff::TariffSchedule;

fn flat_tariff(er: f64, nbc: f64, dr_max: f64, dr_tou: f64) -> TariffSchedule<f64> {
    TariffSchedule::from_file(&single_period_file(er, nbc, dr_max, dr_tou)).unwrap()
}

fn one_day() -> TimeGrid {
    build_time_grid(2021, 3).unwrap().truncated(96)
}

/// Deterministic evening-peaked load with some noise, 96 steps per day.
fn wavy_load(n: usize) -> LoadProfile<f64> {
    let d: Vec<f64> = (0..n)
        .map(|t| {
            let h = (t % 96) as f64 / 4.0;
            40.0 + 30.0 * (-((h - 18.0) / 2.0).powi(2)).exp() + ((t * 37) % 11) as f64
        })
        .collect();
    LoadProfile::new(d, 90.0).unwrap()
}

fn solve_checked(problem: &MonthProblem<'_, f64>) -> DispatchSolution<f64> {
    let lp = build_lp(problem).unwrap();
    let sol = solve_lp(&lp, DEFAULT_TOLERANCE).unwrap();
    assert_eq!(sol.status, SolveStatus::Optimal);
    let report = verify_solution(&sol, problem, DEFAULT_TOLERANCE);
    assert!(report.passed, "{report}");
    sol
}

#[test]
fn flat_day_closed_form() {
    let grid = one_day();
    let tariff = flat_tariff(0.20, 0.025, 10.0, 5.0);
    let load = LoadProfile::new(vec![10.0; 96], 10.0).unwrap();
    let pv = PvProfile::zeros(96);
    let sol = solve_checked(&MonthProblem::new(&grid, &tariff, &load, &pv));
    assert!((sol.objective_value - 198.0).abs() < 1e-9);
    assert_eq!(sol.tightness.max_demand_steps.len(), 96);
}

#[test]
fn variable_and_row_counts() {
    let grid = build_time_grid(2021, 1).unwrap();
    let tariff = flat_tariff(0.20, 0.025, 10.0, 5.0);
    let load = wavy_load(grid.len());
    let pv = PvProfile::zeros(grid.len());
    let bare = MonthProblem::new(&grid, &tariff, &load, &pv);
    assert_eq!(build_lp(&bare).unwrap().num_vars(), 2 * 2976 + 1 + 1);

    let flex = FlexSpec::new(0.3, 24.0).unwrap();
    let with_flex = bare.clone().with_flex(&flex);
    for form in [Formulation::Literal, Formulation::Compact] {
        let lp = build_lp_with(&with_flex, form).unwrap();
        assert_eq!(lp.rows_tagged(ConstraintTag::RecoveryWindow), 2881);
        assert_eq!(lp.rows_tagged(ConstraintTag::HorizonBalance), 1);
        assert!(lp.rows.iter().all(|r| !r.tag.is_battery()));
    }
    let battery = BatterySpec::new(20.0, 80.0, 0.85, 40.0).unwrap();
    let both = with_flex.with_battery(battery);
    let lp = build_lp_with(&both, Formulation::Literal).unwrap();
    assert_eq!(lp.num_vars(), 6 * 2976 + 1 + 1);
    assert_eq!(lp.vars.model_len(), 6 * 2976 + 1 + 1);
}

#[test]
fn absent_assets_add_no_rows() {
    let grid = one_day();
    let tariff = flat_tariff(0.20, 0.025, 10.0, 5.0);
    let load = wavy_load(96);
    let pv = PvProfile::zeros(96);
    let p = MonthProblem::new(&grid, &tariff, &load, &pv)
        .with_battery(BatterySpec::new(0.0, 0.0, 0.85, 0.0).unwrap())
        .with_flex(&FlexSpec::new(0.0, 4.0).unwrap());
    let lp = build_lp(&p).unwrap();
    assert!(lp.rows.iter().all(|r| !r.tag.is_battery() && !r.tag.is_flex()));
    assert_eq!(lp.num_vars(), 2 * 96 + 2);
}

#[test]
fn no_assets_passes_base_minus_pv_through() {
    let grid = build_time_grid(2021, 6).unwrap();
    let tariff = flat_tariff(0.20, 0.025, 10.0, 5.0);
    let load = wavy_load(grid.len());
    let pv = crate::assets::synth_pv(60.0, &grid).unwrap();
    let sol = solve_checked(&MonthProblem::new(&grid, &tariff, &load, &pv));
    for t in 0..grid.len() {
        assert_eq!(sol.net_demand[t], load.d_base[t] - pv.p_pv[t]);
    }
}

#[test]
fn window_longer_than_month_rejected() {
    let grid = one_day();
    let tariff = flat_tariff(0.20, 0.025, 10.0, 5.0);
    let load = wavy_load(96);
    let pv = PvProfile::zeros(96);
    let p = MonthProblem::new(&grid, &tariff, &load, &pv).with_flex(&FlexSpec::new(0.5, 48.0).unwrap());
    assert!(matches!(build_lp(&p), Err(crate::Error::WindowTooLong { .. })));

    let short = LoadProfile::new(vec![1.0; 10], 1.0).unwrap();
    let p = MonthProblem::new(&grid, &tariff, &short, &pv);
    assert!(matches!(build_lp(&p), Err(crate::Error::LengthMismatch { .. })));
}

#[test]
fn formulations_agree() {
    let grid = build_time_grid(2021, 2).unwrap().truncated(4 * 96);
    let tariff = flat_tariff(0.20, 0.025, 12.0, 4.0);
    let load = wavy_load(grid.len());
    let pv = crate::assets::synth_pv(50.0, &grid).unwrap();
    let p = MonthProblem::new(&grid, &tariff, &load, &pv)
        .with_flex(&FlexSpec::new(0.4, 6.0).unwrap())
        .with_battery(BatterySpec::new(15.0, 30.0, 0.85, 15.0).unwrap());
    let a = solve_lp(&build_lp_with(&p, Formulation::Literal).unwrap(), 1e-6).unwrap();
    let b = solve_lp(&build_lp_with(&p, Formulation::Compact).unwrap(), 1e-6).unwrap();
    assert!((a.objective_value - b.objective_value).abs() <= 1e-6 * a.objective_value.abs());
    assert!(verify_solution(&a, &p, 1e-6).passed);
    assert!(verify_solution(&b, &p, 1e-6).passed);
}

#[test]
fn injected_balance_violation_fails() {
    let grid = one_day();
    let tariff = flat_tariff(0.20, 0.025, 10.0, 5.0);
    let load = wavy_load(96);
    let pv = PvProfile::zeros(96);
    let p = MonthProblem::new(&grid, &tariff, &load, &pv).with_flex(&FlexSpec::new(0.5, 2.0).unwrap());
    let mut sol = solve_checked(&p);
    sol.deviation[95] += 0.5;
    sol.net_demand[95] += 0.5;
    let report = verify_solution(&sol, &p, 1e-6);
    assert!(!report.passed);
    assert!((report.residual(ConstraintTag::HorizonBalance) - 0.5).abs() < 1e-9);
}

#[test]
fn objective_is_monotone_in_assets() {
    let grid = build_time_grid(2021, 7).unwrap().truncated(3 * 96);
    let tariff = flat_tariff(0.25, 0.025, 15.0, 6.0);
    let load = wavy_load(grid.len());
    let pv = crate::assets::synth_pv(40.0, &grid).unwrap();
    let base = MonthProblem::new(&grid, &tariff, &load, &pv);

    let mut last = f64::INFINITY;
    for f in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
        let obj = solve_checked(&base.clone().with_flex(&FlexSpec::new(f, 4.0).unwrap())).objective_value;
        assert!(obj <= last * (1.0 + 1e-9), "f={f}: {obj} > {last}");
        last = obj;
    }
    let mut last = f64::INFINITY;
    for hours in [1.0, 2.0, 4.0, 8.0, 24.0] {
        let obj = solve_checked(&base.clone().with_flex(&FlexSpec::new(0.5, hours).unwrap())).objective_value;
        assert!(obj <= last * (1.0 + 1e-9), "delta={hours}: {obj} > {last}");
        last = obj;
    }
    let mut last = f64::INFINITY;
    for bpr in [0.0, 5.0, 10.0, 20.0] {
        let b = BatterySpec::new(bpr, 40.0, 0.85, 20.0).unwrap();
        let obj = solve_checked(&base.clone().with_battery(b)).objective_value;
        assert!(obj <= last * (1.0 + 1e-9), "bpr={bpr}: {obj} > {last}");
        last = obj;
    }
    let mut last = f64::INFINITY;
    for ber in [10.0, 20.0, 40.0, 80.0] {
        let b = BatterySpec::new(10.0, ber, 0.85, 5.0).unwrap();
        let obj = solve_checked(&base.clone().with_battery(b)).objective_value;
        assert!(obj <= last * (1.0 + 1e-9), "ber={ber}: {obj} > {last}");
        last = obj;
    }
}

#[test]
fn dropping_windows_never_raises_optimum() {
    let grid = one_day();
    let tariff = flat_tariff(0.20, 0.025, 10.0, 5.0);
    let load = wavy_load(96);
    let pv = PvProfile::zeros(96);
    let p = MonthProblem::new(&grid, &tariff, &load, &pv).with_flex(&FlexSpec::new(0.5, 3.0).unwrap());
    let full = build_lp_with(&p, Formulation::Literal).unwrap();
    let mut relaxed = full.clone();
    relaxed.rows.retain(|r| r.tag != ConstraintTag::RecoveryWindow);
    let a = solve_lp(&full, 1e-6).unwrap().objective_value;
    let b = solve_lp(&relaxed, 1e-6).unwrap().objective_value;
    assert!(b <= a + 1e-9);
}

#[test]
fn repeated_solves_are_identical() {
    let grid = build_time_grid(2021, 8).unwrap().truncated(2 * 96);
    let tariff = flat_tariff(0.20, 0.025, 10.0, 5.0);
    let load = wavy_load(grid.len());
    let pv = crate::assets::synth_pv(40.0, &grid).unwrap();
    let p = MonthProblem::new(&grid, &tariff, &load, &pv)
        .with_flex(&FlexSpec::new(0.5, 3.0).unwrap())
        .with_battery(BatterySpec::new(10.0, 20.0, 0.85, 10.0).unwrap());
    let lp = build_lp(&p).unwrap();
    let a = solve_lp(&lp, 1e-6).unwrap();
    let b = solve_lp(&lp, 1e-6).unwrap();
    assert_eq!(a, b);
}

#[test]
fn single_precision_path() {
    let grid = one_day();
    let tariff = TariffSchedule::<f32>::from_file(&single_period_file(0.20, 0.025, 10.0, 5.0)).unwrap();
    let load = LoadProfile::new(vec![10.0f32; 96], 10.0).unwrap();
    let pv = PvProfile::zeros(96);
    let p = MonthProblem::new(&grid, &tariff, &load, &pv)
        .with_battery(BatterySpec::new(2.0f32, 4.0, 0.85, 2.0).unwrap());
    let sol = solve_lp(&build_lp(&p).unwrap(), 1e-6).unwrap();
    assert!(sol.status.is_optimal());
    assert!((sol.objective_value - 198.0).abs() < 1e-3);
    assert!(verify_solution(&sol, &p, 1e-4).passed);
}

#[test]
fn lp_text_lists_every_row() {
    let grid = build_time_grid(2021, 3).unwrap().truncated(8);
    let tariff = flat_tariff(0.20, 0.025, 10.0, 5.0);
    let load = wavy_load(8);
    let pv = PvProfile::zeros(8);
    let p = MonthProblem::new(&grid, &tariff, &load, &pv)
        .with_flex(&FlexSpec::new(0.5, 1.0).unwrap())
        .with_battery(BatterySpec::new(5.0, 10.0, 0.85, 5.0).unwrap());
    let lp = build_lp(&p).unwrap();
    let text = lp_string(&lp);
    assert!(text.starts_with("\\"));
    assert!(text.contains("Subject To") && text.trim_end().ends_with("End"));
    assert_eq!(text.matches("recovery_window_").count(), 5);
    assert!(text.contains("soc_terminal_0: soc_7 = 5.0"));
    assert!(text.contains("dnet_0 free"));
}

fn variation(v: &[f64], pairs: &[(usize, usize)]) -> f64 {
    pairs.iter().map(|&(a, b)| (v[b] - v[a]).abs()).sum()
}

#[test]
fn smoothing_keeps_bill_and_reduces_variation() {
    let grid = build_time_grid(2021, 7).unwrap().truncated(2 * 96);
    let tariff = flat_tariff(0.20, 0.025, 10.0, 5.0);
    let load = wavy_load(grid.len());
    let pv = crate::assets::synth_pv(40.0, &grid).unwrap();
    let p = MonthProblem::new(&grid, &tariff, &load, &pv).with_flex(&FlexSpec::new(0.5, 6.0).unwrap());
    let lp = build_lp(&p).unwrap();
    let pairs: Vec<_> = (1..grid.len()).filter(|t| (64..84).contains(&(t % 96))).map(|t| (t - 1, t)).collect();

    let plain = solve_lp(&lp, 1e-6).unwrap();
    let smooth = solve_smoothed(&lp, &pairs, 1e-6).unwrap();
    assert!(smooth.status.is_optimal());
    let bill = plain.objective_value;
    assert!((smooth.objective_value - bill).abs() <= 2.0 * TIE_BREAK_RTOL * bill.abs().max(1.0) + 1e-9);
    assert!(variation(&smooth.net_demand, &pairs) <= variation(&plain.net_demand, &pairs) + 1e-6);
    let report = verify_solution(&smooth, &p, 1e-6);
    assert!(report.passed, "{report}");
}

#[test]
fn smoothing_without_pairs_is_a_plain_solve() {
    let grid = one_day();
    let tariff = flat_tariff(0.20, 0.025, 10.0, 5.0);
    let load = wavy_load(96);
    let pv = PvProfile::zeros(96);
    let p = MonthProblem::new(&grid, &tariff, &load, &pv).with_flex(&FlexSpec::new(0.5, 2.0).unwrap());
    let lp = build_lp(&p).unwrap();
    assert_eq!(solve_smoothed(&lp, &[], 1e-6).unwrap(), solve_lp(&lp, 1e-6).unwrap());
}
