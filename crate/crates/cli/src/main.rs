//! `junctionq` — queueing-based railway junction capacity analysis.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use junctionq_core::approx::{ModelSetting, Scaling};
use junctionq_core::config::load_config;
use junctionq_core::runner::{self, RunContext};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SettingArg {
    #[value(name = "MM")]
    Mm,
    #[value(name = "PhM")]
    PhM,
    #[value(name = "MPh")]
    MPh,
    #[value(name = "PhPh")]
    PhPh,
}

impl From<SettingArg> for ModelSetting {
    fn from(v: SettingArg) -> Self {
        match v {
            SettingArg::Mm => ModelSetting::MM,
            SettingArg::PhM => ModelSetting::PhM,
            SettingArg::MPh => ModelSetting::MPh,
            SettingArg::PhPh => ModelSetting::PhPh,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScalingArg {
    None,
    Hertel,
    Kingman,
}

impl From<ScalingArg> for Scaling {
    fn from(v: ScalingArg) -> Self {
        match v {
            ScalingArg::None => Scaling::None,
            ScalingArg::Hertel => Scaling::Hertel,
            ScalingArg::Kingman => Scaling::Kingman,
        }
    }
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Scenario configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Distribution setting; defaults to the config's.
    #[arg(long)]
    setting: Option<SettingArg>,
    /// Scaling formula; defaults to the config's.
    #[arg(long)]
    scaling: Option<ScalingArg>,
    /// Worker-pool size for sweeps and replications.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Simulation seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Record wall times in iteration traces (outputs stop being byte-reproducible).
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Parser)]
#[command(name = "junctionq", version, about = "Timetable capacity of a double-track railway junction via phase-type CTMC models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Report a hypoexponential fit, either for --mean/--cv or per route of a scenario.
    FitReport {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        mean: Option<f64>,
        #[arg(long)]
        cv: Option<f64>,
        /// Total train count for per-route arrival fits.
        #[arg(long, default_value_t = 12.0)]
        n_total: f64,
    },
    /// Expected queue lengths per route over the configured train-count grid.
    QueueLengths {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Timetable capacity at the configured traffic share.
    Capacity {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Capacity across the configured main-share grid.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Discrete-event simulation over the train-count grid.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Re-derive published reference values and report pass/fail.
    ValidateTables {
        #[command(flatten)]
        common: CommonArgs,
        /// Include the multi-million-state phase-type rows (minutes each).
        #[arg(long)]
        full: bool,
    },
    /// Write one chain as an edge list, state table and optional PRISM module.
    ExportModel {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 12.0)]
        n_total: f64,
        /// Also render PRISM-style module syntax.
        #[arg(long)]
        prism: bool,
    },
}

fn context(common: &CommonArgs) -> Result<RunContext> {
    let path = common
        .config
        .as_ref()
        .context("--config is required for this command")?;
    let config = load_config(path)?;
    let mut ctx = RunContext::new(config, &common.out);
    if let Some(s) = common.setting {
        ctx.setting = s.into();
    }
    if let Some(s) = common.scaling {
        ctx.scaling = s.into();
    }
    ctx.jobs = common.jobs.max(1);
    ctx.seed = common.seed;
    ctx.timings = common.timings;
    Ok(ctx)
}

fn run() -> Result<bool> {
    let cli = Cli::parse();

    #[cfg(feature = "parallel")]
    {
        let jobs = match &cli.command {
            Command::FitReport { common, .. }
            | Command::QueueLengths { common }
            | Command::Capacity { common }
            | Command::Sweep { common }
            | Command::Simulate { common }
            | Command::ValidateTables { common, .. }
            | Command::ExportModel { common, .. } => common.jobs.max(1),
        };
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .ok();
    }

    match cli.command {
        Command::FitReport { common, mean, cv, n_total } => match (mean, cv) {
            (Some(mean), Some(cv)) => {
                print!("{}", runner::fit_report_line(mean, cv)?);
                Ok(true)
            }
            (None, None) => {
                let ctx = context(&common)?;
                print!("{}", runner::fit_report_scenario(&ctx, n_total)?);
                Ok(true)
            }
            _ => bail!("--mean and --cv must be given together"),
        },
        Command::QueueLengths { common } => {
            let ctx = context(&common)?;
            let report = runner::queue_lengths(&ctx)?;
            println!("wrote {}", report.csv_path.display());
            Ok(true)
        }
        Command::Capacity { common } => {
            let ctx = context(&common)?;
            let report = runner::capacity(&ctx)?;
            println!("{}", report.summary);
            println!("wrote {}", report.json_path.display());
            println!("wrote {}", report.trace_path.display());
            Ok(true)
        }
        Command::Sweep { common } => {
            let ctx = context(&common)?;
            let report = runner::sweep(&ctx)?;
            for row in &report.rows {
                match &row.outcome {
                    Ok(r) => println!(
                        "p_main={:.2} n_max={:.4} evaluations={}",
                        row.p_main, r.n_max, r.evaluations
                    ),
                    Err(e) => println!("p_main={:.2} error: {e}", row.p_main),
                }
            }
            println!("wrote {}", report.csv_path.display());
            Ok(report.failures == 0)
        }
        Command::Simulate { common } => {
            let ctx = context(&common)?;
            let report = runner::simulate_grid(&ctx)?;
            println!("wrote {}", report.csv_path.display());
            println!("wrote {}", report.summary_path.display());
            Ok(true)
        }
        Command::ValidateTables { common, full } => {
            let outcome = runner::validate_tables(&common.out, full)?;
            for line in &outcome.checks {
                println!(
                    "{} {} ({})",
                    if line.passed { "PASS" } else { "FAIL" },
                    line.name,
                    line.detail
                );
            }
            println!("wrote {}", outcome.csv_path.display());
            Ok(outcome.all_passed())
        }
        Command::ExportModel { common, n_total, prism } => {
            let ctx = context(&common)?;
            let report = runner::export_model(&ctx, n_total, prism)?;
            println!("states={} transitions={}", report.states, report.transitions);
            println!("wrote {}", report.edges_path.display());
            println!("wrote {}", report.states_path.display());
            if let Some(p) = report.prism_path {
                println!("wrote {}", p.display());
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
