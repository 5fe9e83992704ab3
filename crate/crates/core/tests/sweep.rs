mod common;

use flextariff::sweep::{
    run_sweep, sweep_points, write_outputs, AnnualData, BatteryAxes, Family, FlexAxes, PointStatus, SweepConfig,
    TariffPair,
};

fn small_config(jobs: usize) -> SweepConfig {
    let mut cfg = common::bundled_config();
    cfg.flex = Some(FlexAxes {
        recovery_hours: vec![1.0],
        flex_pct: vec![0.0, 0.2],
    });
    cfg.battery = None;
    cfg.jobs = jobs;
    cfg
}

#[test]
fn default_grid_has_66_flex_and_60_battery_points() {
    let mut cfg = common::bundled_config();
    cfg.flex = Some(FlexAxes::default());
    cfg.battery = Some(BatteryAxes::default());
    let points = sweep_points(&cfg);
    assert_eq!(points.iter().filter(|p| p.family == Family::Flex).count(), 66);
    assert_eq!(points.iter().filter(|p| p.family == Family::Battery).count(), 60);
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for jobs in [1, 2] {
        let cfg = small_config(jobs);
        let data = AnnualData::load(&cfg).unwrap();
        let tariffs = TariffPair::load(&cfg).unwrap();
        let outcome = run_sweep(&cfg, &data, &tariffs).unwrap();
        assert_eq!(outcome.failures(), 0);
        assert_eq!(outcome.monthly_solves, 2 * 2 * 12);
        let dir = tmp.path().join(format!("jobs{jobs}"));
        let files = write_outputs(&cfg, &outcome, &dir).unwrap();
        assert!(files.battery_csv.is_none());
        assert!(!dir.join("bes_sweep.csv").exists());
        bodies.push(std::fs::read_to_string(files.flex_csv.unwrap()).unwrap());
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn small_batteries_are_ineligible_for_the_storage_rider() {
    let mut cfg = common::bundled_config();
    cfg.flex = None;
    cfg.battery = Some(BatteryAxes {
        power_ratio: vec![0.05],
        duration_hours: vec![1.0],
    });
    cfg.enforce_eligibility = true;
    let data = AnnualData::load(&cfg).unwrap();
    let tariffs = TariffPair::load(&cfg).unwrap();
    let outcome = run_sweep(&cfg, &data, &tariffs).unwrap();
    let p = &outcome.battery[0];
    assert_eq!(p.eligible, Some(false));
    assert!(matches!(p.storage, PointStatus::Ineligible));
    assert!(matches!(p.base, PointStatus::Ok { .. }));
}

#[test]
fn config_loading_rejects_unknown_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let p = tmp.path().join("c.json");
    std::fs::write(&p, r#"{"load_csv":"x.csv","base_tariff":"a","storage_tariff":"b","bogus":1}"#).unwrap();
    assert!(SweepConfig::load(&p).is_err());
}
