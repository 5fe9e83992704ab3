use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

use super::config::SweepConfig;
use super::run::{point_ratios, Family, PointResult, PointStatus, SweepOutcome};

pub const CSV_HEADER: [&str; 14] = [
    "family",
    "recovery_hours",
    "flex_pct",
    "power_ratio",
    "duration_hours",
    "tariff_id",
    "annual_bill",
    "mean_peak_ramp_kw",
    "mean_peak_net_kw",
    "ratio_bill",
    "ratio_ramp",
    "ratio_net",
    "eligible",
    "status",
];

/// Tariff id written on ratio rows.
pub const RATIO_ROW_ID: &str = "storage/base";
/// Cell text for an undefined ratio.
pub const UNDEFINED: &str = "NA";

/// Six significant digits, plain decimal notation.
pub fn sig6(v: f64) -> String {
    if !v.is_finite() {
        return UNDEFINED.into();
    }
    let rounded: f64 = format!("{v:.5e}").parse().expect("valid float text");
    let s = format!("{rounded}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

pub fn cents(v: f64) -> String {
    if !v.is_finite() {
        return UNDEFINED.into();
    }
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

/// One CSV line, full precision. Ratio rows carry storage − base
/// differences in the three value columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub family: &'static str,
    pub recovery_hours: Option<f64>,
    pub flex_pct: Option<f64>,
    pub power_ratio: Option<f64>,
    pub duration_hours: Option<f64>,
    pub tariff_id: String,
    pub annual_bill: Option<f64>,
    pub mean_peak_ramp_kw: Option<f64>,
    pub mean_peak_net_kw: Option<f64>,
    pub ratio_bill: Option<f64>,
    pub ratio_ramp: Option<f64>,
    pub ratio_net: Option<f64>,
    pub eligible: Option<bool>,
    pub status: String,
}

impl SweepRow {
    fn cells(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(sig6).unwrap_or_default();
        let is_ratio = self.tariff_id == RATIO_ROW_ID;
        let ratio = |v: Option<f64>| match (is_ratio, v) {
            (false, _) => String::new(),
            (true, Some(r)) => sig6(r),
            (true, None) if self.status == "ok" => UNDEFINED.into(),
            (true, None) => String::new(),
        };
        vec![
            self.family.to_string(),
            opt(self.recovery_hours),
            opt(self.flex_pct),
            opt(self.power_ratio),
            opt(self.duration_hours),
            self.tariff_id.clone(),
            self.annual_bill.map(cents).unwrap_or_default(),
            opt(self.mean_peak_ramp_kw),
            opt(self.mean_peak_net_kw),
            ratio(self.ratio_bill),
            ratio(self.ratio_ramp),
            ratio(self.ratio_net),
            self.eligible.map(|e| e.to_string()).unwrap_or_default(),
            self.status.clone(),
        ]
    }
}

fn axis_cells(p: &PointResult) -> (Option<f64>, Option<f64>, Option<f64>, Option<f64>) {
    let a = &p.point.assets;
    match p.point.family {
        Family::Flex => (Some(a.recovery_hours), Some(a.flex_pct), None, None),
        Family::Battery => (None, None, Some(a.power_ratio), Some(a.duration_hours)),
    }
}

/// Base row, storage row and ratio row of one point.
pub fn point_rows(p: &PointResult, base_id: &str, storage_id: &str) -> [SweepRow; 3] {
    let (recovery_hours, flex_pct, power_ratio, duration_hours) = axis_cells(p);
    let family = p.point.family.name();
    let solve_row = |id: &str, s: &PointStatus| {
        let m = s.metrics();
        SweepRow {
            family,
            recovery_hours,
            flex_pct,
            power_ratio,
            duration_hours,
            tariff_id: id.to_string(),
            annual_bill: m.map(|m| m.total_bill),
            mean_peak_ramp_kw: m.map(|m| m.mean_peak_ramp),
            mean_peak_net_kw: m.map(|m| m.mean_peak_net_demand),
            ratio_bill: None,
            ratio_ramp: None,
            ratio_net: None,
            eligible: p.eligible,
            status: s.label(),
        }
    };
    let rel = point_ratios(p);
    let ratio_status = match (&p.base, &p.storage) {
        (_, PointStatus::Ineligible) => "ineligible".to_string(),
        (PointStatus::Ok { .. }, PointStatus::Ok { .. }) => "ok".to_string(),
        _ => "failed: constituent run failed".to_string(),
    };
    [
        solve_row(base_id, &p.base),
        solve_row(storage_id, &p.storage),
        SweepRow {
            family,
            recovery_hours,
            flex_pct,
            power_ratio,
            duration_hours,
            tariff_id: RATIO_ROW_ID.to_string(),
            annual_bill: rel.map(|r| r.bill_diff),
            mean_peak_ramp_kw: rel.map(|r| r.ramp_diff),
            mean_peak_net_kw: rel.map(|r| r.net_diff),
            ratio_bill: rel.and_then(|r| r.bill),
            ratio_ramp: rel.and_then(|r| r.ramp),
            ratio_net: rel.and_then(|r| r.net),
            eligible: p.eligible,
            status: ratio_status,
        },
    ]
}

pub fn family_rows(points: &[PointResult], base_id: &str, storage_id: &str) -> Vec<SweepRow> {
    points.iter().flat_map(|p| point_rows(p, base_id, storage_id)).collect()
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.cells())?;
    }
    w.flush().map_err(io_err(path))
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

#[derive(Debug, Serialize)]
struct InputDigest {
    path: String,
    sha256: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    solver: &'static str,
    config_sha256: String,
    config: &'a SweepConfig,
    inputs: Vec<InputDigest>,
    files: Vec<String>,
    flex_points: usize,
    battery_points: usize,
    monthly_solves: usize,
    failed_runs: usize,
    jobs: usize,
    wall_seconds: f64,
    serial_seconds: f64,
    longest_run_seconds: f64,
    created_unix: u64,
}

/// Hash of the parsed configuration, independent of file formatting.
pub fn config_digest(cfg: &SweepConfig) -> String {
    let canonical = serde_json::to_vec(cfg).expect("config serialises");
    hex::encode(Sha256::digest(canonical))
}

/// Files written by [`write_outputs`].
#[derive(Debug, Clone, Default)]
pub struct WrittenFiles {
    pub flex_csv: Option<PathBuf>,
    pub battery_csv: Option<PathBuf>,
    pub results_json: Option<PathBuf>,
    pub manifest: PathBuf,
}

/// Writes `flex_sweep.csv`, `bes_sweep.csv`, optional `results.json` and
/// `run_manifest.json` into `out_dir`. A family with no points gets no CSV.
pub fn write_outputs(cfg: &SweepConfig, outcome: &SweepOutcome, out_dir: &Path) -> Result<WrittenFiles> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let (base_id, storage_id) = (&outcome.base_tariff_id, &outcome.storage_tariff_id);
    let mut written = WrittenFiles::default();
    let mut names = Vec::new();
    let mut all_rows = Vec::new();

    for (points, name, slot) in [
        (&outcome.flex, "flex_sweep.csv", &mut written.flex_csv),
        (&outcome.battery, "bes_sweep.csv", &mut written.battery_csv),
    ] {
        if points.is_empty() {
            continue;
        }
        let rows = family_rows(points, base_id, storage_id);
        let path = out_dir.join(name);
        write_csv(&path, &rows)?;
        names.push(name.to_string());
        *slot = Some(path);
        all_rows.extend(rows);
    }

    if cfg.write_json {
        let path = out_dir.join("results.json");
        let text = serde_json::to_string_pretty(&all_rows).expect("rows serialise");
        fs::write(&path, text).map_err(io_err(&path))?;
        names.push("results.json".into());
        written.results_json = Some(path);
    }

    let mut inputs = Vec::new();
    let mut files = vec![&cfg.load_csv, &cfg.base_tariff, &cfg.storage_tariff];
    if let Some(pv) = &cfg.pv_csv {
        files.push(pv);
    }
    for p in files {
        inputs.push(InputDigest {
            path: p.display().to_string(),
            sha256: sha256_file(&cfg.resolve(p))?,
        });
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        solver: "HiGHS dual simplex",
        config_sha256: config_digest(cfg),
        config: cfg,
        inputs,
        files: names,
        flex_points: outcome.flex.len(),
        battery_points: outcome.battery.len(),
        monthly_solves: outcome.monthly_solves,
        failed_runs: outcome.failures(),
        jobs: outcome.jobs,
        wall_seconds: outcome.wall_time.as_secs_f64(),
        serial_seconds: outcome.serial_time.as_secs_f64(),
        longest_run_seconds: outcome.longest_task.as_secs_f64(),
        created_unix: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
    };
    let path = out_dir.join("run_manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serialises");
    fs::write(&path, text).map_err(io_err(&path))?;
    written.manifest = path;
    Ok(written)
}
