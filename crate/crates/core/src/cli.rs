//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::info;

use crate::assets::{synth_load, write_profile_csv};
use crate::error::{Error, Result};
use crate::lp::{build_lp, write_lp, MonthProblem};
use crate::sweep::{
    battery_for, run_month, run_sweep, write_outputs, AnnualData, AssetConfig, SweepConfig, TariffChoice,
    TariffPair,
};
use crate::tariff::{load_tariff, TariffSchedule};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for bad input: usage, configuration, tariff or data errors.
pub const EXIT_INVALID: i32 = 1;
/// Exit status when a solve or a verification fails.
pub const EXIT_SOLVE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "flextariff", version, about = "Bill-minimising dispatch under time-of-use tariffs")]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides the config's `output_dir`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps; 0 means all cores.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Seed for synthetic data generation.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one month and print the bill breakdown.
    Solve {
        /// Month number, 1-12.
        #[arg(long)]
        month: u32,
        /// Also write the per-step dispatch to this CSV file.
        #[arg(long, value_name = "PATH")]
        dispatch_csv: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Solve all twelve months and print one verification line per month.
    Annual {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run the flexibility and battery sweeps under both tariffs.
    Sweep,
    /// Check a tariff file and print its periods and rates.
    ValidateTariff {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Write one month's LP in LP-format text.
    DumpLp {
        #[arg(long)]
        month: u32,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Generate a synthetic hourly load profile CSV.
    SynthData {
        #[arg(long, default_value_t = 2021)]
        year: i32,
        /// Annual maximum demand of the generated profile, kW.
        #[arg(long, default_value_t = 220.9)]
        peak_kw: f64,
    },
}

/// Overrides for the config's `run` section.
#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    tariff: Option<TariffArg>,
    #[arg(long)]
    flex_pct: Option<f64>,
    #[arg(long)]
    recovery_hours: Option<f64>,
    #[arg(long)]
    power_ratio: Option<f64>,
    #[arg(long)]
    duration_hours: Option<f64>,
    /// Print JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum TariffArg {
    Base,
    Storage,
}

impl RunArgs {
    fn resolve(&self, cfg: &SweepConfig) -> Result<(TariffChoice, AssetConfig)> {
        let mut a = cfg.run.assets();
        a.flex_pct = self.flex_pct.unwrap_or(a.flex_pct);
        a.recovery_hours = self.recovery_hours.unwrap_or(a.recovery_hours);
        a.power_ratio = self.power_ratio.unwrap_or(a.power_ratio);
        a.duration_hours = self.duration_hours.unwrap_or(a.duration_hours);
        a.validate()?;
        let tariff = match self.tariff {
            Some(TariffArg::Base) => TariffChoice::Base,
            Some(TariffArg::Storage) => TariffChoice::Storage,
            None => cfg.run.tariff,
        };
        Ok((tariff, a))
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_validation() {
        EXIT_INVALID
    } else {
        EXIT_SOLVE
    }
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn cli_main<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match dispatch(&cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn load_config(cli: &Cli) -> Result<SweepConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config PATH is required for this command".into()))?;
    let mut cfg = SweepConfig::load(path)?;
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
    }
    Ok(cfg)
}

fn write_err(e: std::io::Error) -> Error {
    Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn dispatch(cli: &Cli, out: &mut impl Write) -> Result<i32> {
    match &cli.command {
        Command::ValidateTariff { paths } => {
            for p in paths {
                let t: TariffSchedule<f64> = load_tariff(p)?;
                print_tariff(p, &t, out).map_err(write_err)?;
            }
            Ok(EXIT_OK)
        }
        Command::SynthData { year, peak_kw } => {
            let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
            let rows = synth_load(*year, *peak_kw, cli.seed.unwrap_or(0))?;
            let path = dir.join(format!("load_{year}.csv"));
            write_profile_csv(&path, &rows)?;
            writeln!(out, "wrote {} ({} hourly rows)", path.display(), rows.len()).map_err(write_err)?;
            Ok(EXIT_OK)
        }
        Command::Solve { month, dispatch_csv, run } => {
            let cfg = load_config(cli)?;
            let (which, assets) = run.resolve(&cfg)?;
            let (data, tariffs) = load_inputs(&cfg)?;
            let outcome = match run_month(&assets, tariffs.get(which), &data, *month, &cfg.battery_defaults, &cfg.solve_settings()) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("error: {e}");
                    return Ok(exit_code(&e));
                }
            };
            let i = data.month_index(*month)?;
            let bill = crate::billing::compute_bill(&outcome.solution.net_demand, tariffs.get(which), &data.grids[i])?;
            if let Some(path) = dispatch_csv {
                write_dispatch_csv(path, &outcome, &data, i)?;
            }
            if run.json {
                let v = serde_json::json!({
                    "month": month,
                    "tariff_id": tariffs.get(which).id(),
                    "objective": outcome.solution.objective_value,
                    "bill": bill,
                    "verification": outcome.report,
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json")).map_err(write_err)?;
            } else {
                writeln!(out, "tariff {}  month {:02}  assets: {assets}", tariffs.get(which).id(), month)
                    .map_err(write_err)?;
                print_bill(&bill, out).map_err(write_err)?;
                writeln!(out, "objective        {:>14.4}", outcome.solution.objective_value).map_err(write_err)?;
                writeln!(out, "verification     {}", outcome.report).map_err(write_err)?;
            }
            Ok(EXIT_OK)
        }
        Command::Annual { run } => {
            let cfg = load_config(cli)?;
            let (which, assets) = run.resolve(&cfg)?;
            let (data, tariffs) = load_inputs(&cfg)?;
            let tariff = tariffs.get(which);
            let mut total = 0.0;
            let mut months = Vec::new();
            for m in 1..=12 {
                match run_month(&assets, tariff, &data, m, &cfg.battery_defaults, &cfg.solve_settings()) {
                    Ok(o) => {
                        total += o.solution.objective_value;
                        if !run.json {
                            writeln!(
                                out,
                                "month {m:02}: {}  bill {:.2}",
                                o.report, o.solution.objective_value
                            )
                            .map_err(write_err)?;
                        }
                        months.push(o);
                    }
                    Err(e) => {
                        writeln!(out, "month {m:02}: FAIL {e}").map_err(write_err)?;
                        return Ok(exit_code(&e));
                    }
                }
            }
            let result = crate::metrics::AnnualResult {
                tariff_id: tariff.id().to_string(),
                assets: assets.to_string(),
                months,
            };
            let metrics = result.metrics()?;
            if run.json {
                let v = serde_json::json!({
                    "tariff_id": result.tariff_id,
                    "assets": result.assets,
                    "annual_bill": total,
                    "metrics": metrics,
                    "monthly_bills": result.months.iter().map(|m| m.solution.objective_value).collect::<Vec<_>>(),
                });
                writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json")).map_err(write_err)?;
            } else {
                writeln!(
                    out,
                    "annual bill {total:.2}  mean peak ramp {:.4} kW/step  mean peak net {:.4} kW",
                    metrics.mean_peak_ramp, metrics.mean_peak_net_demand
                )
                .map_err(write_err)?;
            }
            Ok(EXIT_OK)
        }
        Command::Sweep => {
            let cfg = load_config(cli)?;
            let out_dir = cli.out.clone().unwrap_or_else(|| cfg.output_path());
            let (data, tariffs) = load_inputs(&cfg)?;
            let outcome = run_sweep(&cfg, &data, &tariffs)?;
            let files = write_outputs(&cfg, &outcome, &out_dir)?;
            for p in [&files.flex_csv, &files.battery_csv, &files.results_json].into_iter().flatten() {
                writeln!(out, "wrote {}", p.display()).map_err(write_err)?;
            }
            writeln!(out, "wrote {}", files.manifest.display()).map_err(write_err)?;
            let failures = outcome.failures();
            writeln!(
                out,
                "{} flex points, {} battery points, {} monthly solves, {failures} failed runs, {:.1?}",
                outcome.flex.len(),
                outcome.battery.len(),
                outcome.monthly_solves,
                outcome.wall_time
            )
            .map_err(write_err)?;
            Ok(if failures == 0 { EXIT_OK } else { EXIT_SOLVE })
        }
        Command::DumpLp { month, run } => {
            let cfg = load_config(cli)?;
            let (which, assets) = run.resolve(&cfg)?;
            let (data, tariffs) = load_inputs(&cfg)?;
            let i = data.month_index(*month)?;
            let mut problem = MonthProblem::new(&data.grids[i], tariffs.get(which), &data.loads[i], &data.pvs[i]);
            if assets.flex_pct > 0.0 {
                problem = problem.with_flex(&crate::assets::FlexSpec::new(assets.flex_pct, assets.recovery_hours)?);
            }
            if let Some(b) = battery_for(&assets, data.annual_max, &cfg.battery_defaults)? {
                problem = problem.with_battery(b);
            }
            let lp = build_lp(&problem)?;
            match &cli.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.clone(), source })?;
                    let path = dir.join(format!("month_{month:02}.lp"));
                    let file = std::fs::File::create(&path).map_err(|source| Error::Io { path: path.clone(), source })?;
                    write_lp(&lp, std::io::BufWriter::new(file)).map_err(|source| Error::Io { path: path.clone(), source })?;
                    writeln!(out, "wrote {} ({} columns, {} rows)", path.display(), lp.num_vars(), lp.num_rows())
                        .map_err(write_err)?;
                }
                None => write_lp(&lp, &mut *out).map_err(write_err)?,
            }
            Ok(EXIT_OK)
        }
    }
}

fn load_inputs(cfg: &SweepConfig) -> Result<(AnnualData<f64>, TariffPair<f64>)> {
    let tariffs = TariffPair::load(cfg)?;
    let data = AnnualData::load(cfg)?;
    info!(
        "loaded {} months, annual max {:.1} kW, tariffs {} / {}",
        data.grids.len(),
        data.annual_max,
        tariffs.base.id(),
        tariffs.storage.id()
    );
    Ok((data, tariffs))
}

fn write_dispatch_csv(
    path: &Path,
    outcome: &crate::metrics::MonthOutcome<f64>,
    data: &AnnualData<f64>,
    i: usize,
) -> Result<()> {
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let sol = &outcome.solution;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["timestamp", "base_kw", "pv_kw", "deviation_kw", "charge_kw", "discharge_kw", "soc_kwh", "net_kw", "peak_window"])?;
    let series = |v: &[f64], t: usize| v.get(t).copied().unwrap_or(0.0).to_string();
    for (t, ts) in data.grids[i].steps().iter().enumerate() {
        w.write_record([
            ts.format("%Y-%m-%dT%H:%M:%S").to_string(),
            data.loads[i].d_base[t].to_string(),
            data.pvs[i].p_pv[t].to_string(),
            series(&sol.deviation, t),
            series(&sol.charge, t),
            series(&sol.discharge, t),
            series(&sol.soc, t),
            sol.net_demand[t].to_string(),
            outcome.peak_mask[t].to_string(),
        ])?;
    }
    w.flush().map_err(io)
}

fn print_tariff(path: &Path, t: &TariffSchedule<f64>, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{}: tariff `{}` OK", path.display(), t.id())?;
    writeln!(out, "  demand_rate_max        {:>8.3} $/kW", t.dr_max())?;
    writeln!(out, "  non_bypassable_charge  {:>8.4} $/kWh", t.nbc())?;
    for (i, name) in t.calendar().periods().iter().enumerate() {
        let p = crate::calendar::PeriodId(i);
        writeln!(out, "  {name:<24} demand {:>7.3} $/kW  energy {:>7.4} $/kWh", t.dr_tou(p), t.er(p))?;
    }
    let w = t.calendar().peak_window();
    writeln!(out, "  peak window            [{:02}:00, {:02}:00)", w.start(), w.end())
}

fn print_bill(b: &crate::billing::BillBreakdown<f64>, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "max demand       {:>14.4} kW", b.max_demand_kw)?;
    writeln!(out, "demand (max)     {:>14.2}", b.demand_max_charge)?;
    for c in &b.demand_tou_charges {
        writeln!(out, "  {:<24}{:>14.2}  (peak {:.3} kW)", c.period, c.charge, c.peak_kw)?;
    }
    writeln!(out, "energy           {:>14.2}", b.energy_charge)?;
    writeln!(out, "nem credit       {:>14.2}", b.nem_credit)?;
    writeln!(out, "total            {:>14.2}", b.total)
}
