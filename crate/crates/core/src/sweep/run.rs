use std::time::{Duration, Instant};

use log::{debug, info, warn};
use rayon::prelude::*;
use serde::Serialize;

use crate::assets::{battery_from_sweep, option_s_eligible, BatteryDefaults, BatterySpec, FlexSpec};
use crate::error::{Error, Result};
use crate::lp::{build_lp, solve_lp, solve_smoothed, verify_solution, MonthProblem};
use crate::metrics::{relative_metrics, AnnualResult, MetricSet, MonthOutcome};
use crate::tariff::TariffSchedule;

use super::config::{AssetConfig, SolveSettings, SweepConfig, TariffChoice};
use super::data::{AnnualData, TariffPair};

/// Battery sized from the asset config, or `None` when the power ratio is zero.
pub fn battery_for(assets: &AssetConfig, annual_max: f64, defaults: &BatteryDefaults) -> Result<Option<BatterySpec<f64>>> {
    if assets.power_ratio <= 0.0 {
        return Ok(None);
    }
    battery_from_sweep(assets.power_ratio, assets.duration_hours, annual_max, defaults).map(Some)
}

/// Builds, solves and verifies one month.
pub fn run_month(
    assets: &AssetConfig,
    tariff: &TariffSchedule<f64>,
    data: &AnnualData<f64>,
    month: u32,
    defaults: &BatteryDefaults,
    settings: &SolveSettings,
) -> Result<MonthOutcome<f64>> {
    let tol = settings.tolerance;
    let i = data.month_index(month)?;
    let grid = &data.grids[i];
    let mut problem = MonthProblem::new(grid, tariff, &data.loads[i], &data.pvs[i]);
    if assets.flex_pct > 0.0 {
        problem = problem.with_flex(&FlexSpec::new(assets.flex_pct, assets.recovery_hours)?);
    }
    if let Some(b) = battery_for(assets, data.annual_max, defaults)? {
        problem = problem.with_battery(b);
    }
    let lp = build_lp(&problem)?;
    let peak_mask = crate::calendar::peak_mask(tariff.calendar(), grid);
    let has_assets = problem.active_flex().is_some() || problem.active_battery().is_some();
    let solution = if settings.smooth_peak_ramps && has_assets {
        let pairs: Vec<(usize, usize)> = (1..grid.len())
            .filter(|&t| peak_mask[t])
            .map(|t| (t - 1, t))
            .collect();
        solve_smoothed(&lp, &pairs, tol)?
    } else {
        solve_lp(&lp, tol)?
    };
    if !solution.status.is_optimal() {
        return Err(Error::NotOptimal {
            month,
            status: solution.status.to_string(),
        });
    }
    let report = verify_solution(&solution, &problem, tol);
    if !report.passed {
        return Err(Error::Verification {
            month,
            message: report.to_string(),
        });
    }
    Ok(MonthOutcome {
        month,
        solution,
        report,
        peak_mask,
    })
}

/// Twelve independent monthly solves. Fails on the first month whose solve
/// or verification fails.
pub fn run_annual(
    assets: &AssetConfig,
    tariff: &TariffSchedule<f64>,
    data: &AnnualData<f64>,
    defaults: &BatteryDefaults,
    settings: &SolveSettings,
) -> Result<AnnualResult<f64>> {
    assets.validate()?;
    let months = (1..=12)
        .map(|m| run_month(assets, tariff, data, m, defaults, settings))
        .collect::<Result<Vec<_>>>()?;
    Ok(AnnualResult {
        tariff_id: tariff.id().to_string(),
        assets: assets.to_string(),
        months,
    })
}

/// Sweep family of a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Flex,
    Battery,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Flex => "flex",
            Family::Battery => "battery",
        }
    }
}

/// One point of a sweep grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub family: Family,
    pub assets: AssetConfig,
}

impl SweepPoint {
    fn axes(&self) -> (f64, f64) {
        match self.family {
            Family::Flex => (self.assets.recovery_hours, self.assets.flex_pct),
            Family::Battery => (self.assets.power_ratio, self.assets.duration_hours),
        }
    }
}

/// Outcome of one point under one tariff.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PointStatus {
    Ok { metrics: MetricSet<f64> },
    Ineligible,
    Failed { message: String },
}

impl PointStatus {
    pub fn label(&self) -> String {
        match self {
            PointStatus::Ok { .. } => "ok".into(),
            PointStatus::Ineligible => "ineligible".into(),
            PointStatus::Failed { message } => format!("failed: {message}"),
        }
    }

    pub fn metrics(&self) -> Option<&MetricSet<f64>> {
        match self {
            PointStatus::Ok { metrics } => Some(metrics),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub point: SweepPoint,
    /// Battery eligibility for the storage rider; `None` for flex points.
    pub eligible: Option<bool>,
    pub base: PointStatus,
    pub storage: PointStatus,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub base_tariff_id: String,
    pub storage_tariff_id: String,
    pub flex: Vec<PointResult>,
    pub battery: Vec<PointResult>,
    pub jobs: usize,
    pub wall_time: Duration,
    /// Sum of the wall time of every annual run; what one core would need.
    pub serial_time: Duration,
    /// Longest single annual run.
    pub longest_task: Duration,
    pub monthly_solves: usize,
}

impl SweepOutcome {
    pub fn failures(&self) -> usize {
        self.flex
            .iter()
            .chain(&self.battery)
            .flat_map(|p| [&p.base, &p.storage])
            .filter(|s| matches!(s, PointStatus::Failed { .. }))
            .count()
    }
}

fn sorted_unique(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Points of both families in output order (lexicographic by axes).
pub fn sweep_points(cfg: &SweepConfig) -> Vec<SweepPoint> {
    let mut points = Vec::new();
    if cfg.flex_enabled() {
        let a = cfg.flex.as_ref().expect("enabled");
        for r in sorted_unique(a.recovery_hours.clone()) {
            for f in sorted_unique(a.flex_pct.clone()) {
                points.push(SweepPoint {
                    family: Family::Flex,
                    assets: AssetConfig::flex(f, r),
                });
            }
        }
    }
    if cfg.battery_enabled() {
        let a = cfg.battery.as_ref().expect("enabled");
        for r in sorted_unique(a.power_ratio.clone()) {
            for d in sorted_unique(a.duration_hours.clone()) {
                points.push(SweepPoint {
                    family: Family::Battery,
                    assets: AssetConfig::battery(r, d),
                });
            }
        }
    }
    points
}

fn thread_count(jobs: usize) -> usize {
    if jobs > 0 {
        jobs
    } else {
        std::thread::available_parallelism().map_or(1, |n| n.get())
    }
}

/// Runs every point of the configured sweep under both tariffs.
///
/// Failed points are recorded, never fatal. Results do not depend on the
/// number of worker threads.
pub fn run_sweep(cfg: &SweepConfig, data: &AnnualData<f64>, tariffs: &TariffPair<f64>) -> Result<SweepOutcome> {
    let points = sweep_points(cfg);
    let settings = cfg.solve_settings();
    let jobs = thread_count(cfg.jobs);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} workers: {e}")))?;

    let eligibility: Vec<Option<bool>> = points
        .iter()
        .map(|p| match p.family {
            Family::Flex => None,
            Family::Battery => Some(
                battery_for(&p.assets, data.annual_max, &cfg.battery_defaults)
                    .ok()
                    .flatten()
                    .is_some_and(|b| option_s_eligible(&b, data.annual_max)),
            ),
        })
        .collect();

    let tasks: Vec<(usize, TariffChoice)> = (0..points.len())
        .flat_map(|i| [(i, TariffChoice::Base), (i, TariffChoice::Storage)])
        .collect();
    let total = tasks.len();
    let done = std::sync::atomic::AtomicUsize::new(0);
    let start = Instant::now();

    let results: Vec<(PointStatus, Duration, usize)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, which)| {
                let point = &points[i];
                if which == TariffChoice::Storage && cfg.enforce_eligibility && eligibility[i] == Some(false) {
                    return (PointStatus::Ineligible, Duration::ZERO, 0);
                }
                let t0 = Instant::now();
                let status = match run_annual(&point.assets, tariffs.get(which), data, &cfg.battery_defaults, &settings)
                    .and_then(|r| r.metrics())
                {
                    Ok(metrics) => PointStatus::Ok { metrics },
                    Err(e) => {
                        warn!("{} {} under {which} tariff failed: {e}", point.family.name(), point.assets);
                        PointStatus::Failed { message: e.to_string() }
                    }
                };
                let elapsed = t0.elapsed();
                let n = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                debug!("[{n}/{total}] {} {} {which}: {:.2?}", point.family.name(), point.assets, elapsed);
                (status, elapsed, 12)
            })
            .collect()
    });

    let serial_time = results.iter().map(|r| r.1).sum();
    let longest_task = results.iter().map(|r| r.1).max().unwrap_or_default();
    let monthly_solves = results.iter().map(|r| r.2).sum();
    let mut statuses = results.into_iter().map(|r| r.0);
    let mut flex = Vec::new();
    let mut battery = Vec::new();
    for (i, point) in points.iter().enumerate() {
        let base = statuses.next().expect("one result per task");
        let storage = statuses.next().expect("one result per task");
        let result = PointResult {
            point: *point,
            eligible: eligibility[i],
            base,
            storage,
        };
        match point.family {
            Family::Flex => flex.push(result),
            Family::Battery => battery.push(result),
        }
    }
    debug_assert!(flex.windows(2).all(|w| w[0].point.axes() <= w[1].point.axes()));
    let wall_time = start.elapsed();
    info!(
        "{} annual runs ({monthly_solves} monthly LPs) in {wall_time:.1?} on {jobs} workers",
        total
    );
    Ok(SweepOutcome {
        base_tariff_id: tariffs.base.id().to_string(),
        storage_tariff_id: tariffs.storage.id().to_string(),
        flex,
        battery,
        jobs,
        wall_time,
        serial_time,
        longest_task,
        monthly_solves,
    })
}

/// Storage-over-base comparison of one point, if both sides solved.
pub fn point_ratios(p: &PointResult) -> Option<crate::metrics::RelativeMetrics> {
    Some(relative_metrics(p.storage.metrics()?, p.base.metrics()?))
}
