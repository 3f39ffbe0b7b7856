//! Command-line front end: config parsing, sweep execution and reports.

pub mod config;
pub mod report;
pub mod svg;
pub mod sweep;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};
pub use config::{load_config, parse_config, Axis, Engines, RunConfig};
pub use sweep::{run_sweep, Engine, Row};

#[derive(Debug, Parser)]
#[command(
    name = "hetnet-coverage",
    version,
    about = "Coverage probability of clustered HetNets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a sweep and write CSV, JSON and SVG reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `engines` in the config.
        #[arg(long, value_enum)]
        engines: Option<Engines>,
        /// Overrides `mc.trials`.
        #[arg(long)]
        trials: Option<u64>,
        /// Overrides `mc.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for relative output paths.
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CELL_FAILED: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_CELL_FAILED,
    }
}

/// What a run produced.
#[derive(Debug)]
pub struct RunSummary {
    pub rows: Vec<Row>,
    pub csv: PathBuf,
    pub json: PathBuf,
    pub svg: PathBuf,
}

impl RunSummary {
    pub fn exit_code(&self) -> i32 {
        if self.rows.iter().any(Row::failed) {
            EXIT_CELL_FAILED
        } else {
            EXIT_OK
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Applies command-line overrides, runs the sweep and writes all reports.
pub fn run(
    config: &Path,
    engines: Option<Engines>,
    trials: Option<u64>,
    seed: Option<u64>,
    out_dir: &Path,
) -> Result<RunSummary> {
    let mut cfg = load_config(config)?;
    if let Some(e) = engines {
        cfg.engines = e;
        cfg.raw.engines = e;
    }
    if let Some(t) = trials {
        if t == 0 {
            return Err(Error::config("--trials", "must be >= 1"));
        }
        cfg.trials = t;
        cfg.raw.mc.trials = t;
    }
    if let Some(s) = seed {
        cfg.seed = s;
        cfg.raw.mc.seed = s;
    }
    let start = Instant::now();
    let rows = run_sweep(&cfg)?;
    let total_ms = start.elapsed().as_secs_f64() * 1e3;

    let csv = out_dir.join(&cfg.output.csv);
    let json = out_dir.join(&cfg.output.json);
    let svg = out_dir.join(&cfg.output.svg);
    report::write_csv(create(&csv)?, cfg.base.len(), &rows)?;
    report::write_json(create(&json)?, &cfg, &rows, Some(total_ms))?;
    std::fs::write(&svg, svg::render(cfg.axis, &rows))
        .map_err(|e| Error::Io(format!("{}: {e}", svg.display())))?;
    Ok(RunSummary {
        rows,
        csv,
        json,
        svg,
    })
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    match cli.command {
        Command::Run {
            config,
            engines,
            trials,
            seed,
            out_dir,
        } => match run(&config, engines, trials, seed, &out_dir) {
            Ok(summary) => {
                for r in summary.rows.iter().filter(|r| r.failed()) {
                    for e in &r.errors {
                        eprintln!("{} @ {}: {e}", r.engine.label(), r.sweep_value);
                    }
                }
                println!("wrote {}", summary.csv.display());
                println!("wrote {}", summary.json.display());
                println!("wrote {}", summary.svg.display());
                summary.exit_code()
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit_code(&e)
            }
        },
    }
}
