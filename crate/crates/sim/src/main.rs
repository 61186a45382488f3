use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use v2vcc_core::metrics::{summarize, Stats};
use v2vcc_sim::sweep::load_grid;
use v2vcc_sim::{load_scenario, run_experiment, write_outputs, ConfigError, MetricsTable, ScenarioConfig};

/// Discrete-event simulator for peer-to-peer EV charging coordination.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scenario file and write sessions.csv, summary.csv and events.log.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `runs` from the file.
        #[arg(long)]
        runs: Option<usize>,
        /// Overrides `seed` from the file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run every scenario of a grid file into <out>/<scenario id>/.
    Sweep {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

const EXIT_IO: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_EXPERIMENT: u8 = 3;

fn report(table: &MetricsTable) {
    let failed = table.rows.iter().filter(|r| r.outcome != "done").count();
    println!("{}: {} sessions, {} failed", table.scenario_id, table.rows.len(), failed);
    for (phase, stats) in summarize(&table.rows) {
        if let Some(Stats { count, mean, median, max, .. }) = stats {
            println!("  {phase:<13} n={count:<5} mean={mean:>10.4} median={median:>10.4} max={max:>10.4} ms");
        }
    }
}

fn run_one(cfg: &ScenarioConfig, out: &Path) -> Result<(), u8> {
    let table = run_experiment(cfg).map_err(|e| {
        eprintln!("error: {}: {e}", cfg.id);
        EXIT_EXPERIMENT
    })?;
    write_outputs(&table, out).map_err(|e| {
        eprintln!("error: {e}");
        EXIT_IO
    })?;
    report(&table);
    Ok(())
}

fn config_failure(e: ConfigError) -> u8 {
    eprintln!("error: {e}");
    EXIT_CONFIG
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.cmd {
        Cmd::Simulate { config, out, runs, seed } => load_scenario(&config).map_err(config_failure).and_then(|mut cfg| {
            if let Some(r) = runs {
                if r == 0 {
                    eprintln!("error: --runs must be at least 1");
                    return Err(EXIT_CONFIG);
                }
                cfg.runs = r;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            run_one(&cfg, &out)
        }),
        Cmd::Sweep { grid, out } => load_grid(&grid)
            .map_err(config_failure)
            .and_then(|cfgs| cfgs.iter().try_for_each(|cfg| run_one(cfg, &out.join(&cfg.id)))),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => ExitCode::from(code),
    }
}
