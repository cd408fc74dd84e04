use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use dicke_cli::config::OUT_DIR_ENV;
use dicke_cli::{run, RunConfig, Task};

/// Dressed-state emission spectra and photon statistics of emitters in a cavity.
#[derive(Parser, Debug)]
#[command(name = "simulate", version)]
struct Args {
    task: Task,
    /// JSON run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config and the SIMULATE_OUT_DIR variable
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for grid sweeps
    #[arg(long)]
    workers: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = Args::parse();

    let cfg = match RunConfig::load(&args.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    if args.workers == Some(0) {
        eprintln!("--workers must be at least 1");
        return ExitCode::from(2);
    }
    let out_dir = args
        .out
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("simulate-out"));
    let workers = args
        .workers
        .or(cfg.workers)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));

    match run(args.task, &cfg, &out_dir, workers) {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            if report.failures > 0 {
                eprintln!("{} of {} grid points failed; see summary.json", report.failures, report.points);
            }
            ExitCode::from(report.exit_code())
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
