use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gc_dhmc::config::{ConfigError, RawConfig};
use gc_dhmc::experiment::{
    analyze_trace, run_experiment, ExperimentFailure, ExperimentOutput, SweepSummary,
};
use gc_dhmc::output::{emit_summary, emit_trace, read_trace, to_json, OutputError};

/// Environment variable that replaces the `seed` of any configuration.
const SEED_ENV: &str = "DHMC_SEED";

#[derive(Parser)]
#[command(
    name = "gc-dhmc",
    version,
    about = "Grand canonical DHMC and Metropolis-Hastings sampling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run { config: PathBuf },
    /// Repeat an experiment for several values of one config key.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        key: String,
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        values: Vec<String>,
    },
    /// Recompute diagnostics from a stored trace CSV.
    Analyze {
        trace: PathBuf,
        /// Also report the TV distance of the N-histogram to Poisson(lambda).
        #[arg(long)]
        lambda: Option<f64>,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<OutputError> for Failure {
    fn from(e: OutputError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn load(path: &Path) -> Result<RawConfig, Failure> {
    let mut raw = RawConfig::load(path)?;
    if let Ok(seed) = std::env::var(SEED_ENV) {
        raw.set("seed", seed.trim())?;
    }
    Ok(raw)
}

fn write_traces(
    dir: &Path,
    dhmc: Option<&gc_dhmc::ChainTrace>,
    mh: Option<&gc_dhmc::ChainTrace>,
) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    if let Some(t) = dhmc {
        emit_trace(t, &dir.join("dhmc_trace.csv"))?;
    }
    if let Some(t) = mh {
        emit_trace(t, &dir.join("mh_trace.csv"))?;
    }
    Ok(())
}

fn execute(raw: &RawConfig) -> Result<ExperimentOutput, Failure> {
    let cfg = raw.resolve()?;
    match run_experiment(&cfg) {
        Ok(out) => {
            write_traces(&cfg.output_dir, out.dhmc.as_ref(), out.mh.as_ref())?;
            emit_summary(&out.summary, &cfg.output_dir.join("summary.json"))?;
            Ok(out)
        }
        Err(ExperimentFailure { error, dhmc, mh }) => {
            write_traces(&cfg.output_dir, dhmc.as_ref(), mh.as_ref())?;
            Err(Failure::Runtime(format!(
                "{error} (partial traces in {})",
                cfg.output_dir.display()
            )))
        }
    }
}

fn report(out: &ExperimentOutput) {
    let s = &out.summary;
    let dir = s.config.output_dir.display();
    println!("wrote {dir}/summary.json");
    let show = |name: &str, v: Option<f64>| {
        if let Some(v) = v {
            println!("  {name}: {v:.6}");
        }
    };
    show("TV(DHMC, Poisson)", s.tv_dhmc_poisson);
    show("TV(MH, Poisson)", s.tv_mh_poisson);
    show("TV(DHMC, MH)", s.tv_dhmc_mh);
    for (name, c) in [("DHMC", &s.dhmc), ("MH", &s.mh)] {
        if let Some(c) = c {
            show(&format!("{name} mean N"), c.mean_n);
            show(&format!("{name} mean pressure"), c.mean_pressure);
            show(&format!("{name} pressure SE"), c.pressure_se);
        }
    }
    show("pressure IACT ratio (DHMC / MH)", s.pressure_iact_ratio);
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config } => {
            let out = execute(&load(&config)?)?;
            report(&out);
        }
        Command::Sweep {
            config,
            key,
            values,
        } => {
            let base = load(&config)?;
            let root = base.resolve()?.output_dir;
            let mut summaries = Vec::new();
            for v in &values {
                let mut raw = base.clone();
                raw.set(&key, v)?;
                let dir = root.join(format!("{key}_{v}"));
                raw.set("output_dir", &dir.to_string_lossy())?;
                let out = execute(&raw)?;
                report(&out);
                summaries.push(out.summary);
            }
            let sweep = SweepSummary::new(&key, values, summaries);
            std::fs::create_dir_all(&root)
                .map_err(|e| Failure::Runtime(format!("{}: {e}", root.display())))?;
            emit_summary(&sweep, &root.join("sweep.json"))?;
            println!("wrote {}/sweep.json", root.display());
            if let Some(s) = sweep.wall_time_slope {
                println!("  wall time slope: {s:.4}");
            }
        }
        Command::Analyze { trace, lambda } => {
            let t = read_trace(&trace)?;
            let report = analyze_trace(&t, lambda);
            print!(
                "{}",
                to_json(&report).map_err(|e| Failure::Runtime(e.to_string()))?
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
