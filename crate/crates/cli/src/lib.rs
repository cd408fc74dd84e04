//! Batch runner for the dressed-state light-emission model: parameter
//! sweeps, convergence checks, CSV/JSON output and plotting scripts.

pub mod config;
pub mod output;
pub mod sweep;
pub mod tasks;

use std::path::{Path, PathBuf};
use std::time::Instant;

use dicke_core::dynamics::{COHERENCE_FLOOR, STATIONARY_RESIDUAL_TOLERANCE};
use dicke_core::observables::{DARK_STATE_FLOOR, PEAK_WEIGHT_FLOOR};
use dicke_core::qoptical::NON_UNIQUE_PIVOT_RATIO;
use serde_json::json;
use thiserror::Error;

pub use config::{ConfigError, RunConfig, Task};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Compute(#[from] dicke_core::Error),
}

impl RunError {
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub points: usize,
    pub failures: usize,
}

impl RunReport {
    /// 0 on success, 3 when some grid points failed.
    pub fn exit_code(&self) -> u8 {
        if self.failures > 0 {
            3
        } else {
            0
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Validates `cfg`, runs `task` and writes `<task>.csv`, `summary.json` and
/// the plotting script into `out_dir`.
pub fn run(task: Task, cfg: &RunConfig, out_dir: &Path, workers: usize) -> Result<RunReport, RunError> {
    cfg.validate(task)?;
    let start = Instant::now();
    let out = tasks::run_task(task, cfg, workers.max(1))?;
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let mut files = Vec::new();
    if let Some(table) = &out.table {
        let path = out_dir.join(format!("{}.csv", task.name()));
        table.write_csv(&path).map_err(io_err(&path))?;
        files.push(path);
    }
    let plot = out_dir.join(output::plot_file_name(task));
    std::fs::write(&plot, output::plot_script(task)).map_err(io_err(&plot))?;
    files.push(plot);

    let summary_path = out_dir.join("summary.json");
    files.push(summary_path.clone());
    let summary = json!({
        "task": task.name(),
        "config": cfg,
        "workers": workers,
        "tolerances": {
            "degeneracy": cfg.tolerance,
            "stationary_residual": STATIONARY_RESIDUAL_TOLERANCE,
            "coherence_floor": COHERENCE_FLOOR,
            "peak_weight_floor": PEAK_WEIGHT_FLOOR,
            "dark_state_floor": DARK_STATE_FLOOR,
            "non_unique_pivot_ratio": NON_UNIQUE_PIVOT_RATIO,
        },
        "flags": {
            "points": out.points,
            "degenerate_points": out.degenerate_points,
            "collision_points": out.collision_points,
            "failed_points": out.failures.len(),
            "bits": {"degenerate_levels": tasks::FLAG_DEGENERATE, "transition_collisions": tasks::FLAG_COLLISION, "failed": tasks::FLAG_FAILED},
        },
        "failures": out.failures,
        "convergence": out.convergence,
        "results": out.results,
        "wall_seconds": start.elapsed().as_secs_f64(),
        "files": files.iter().map(|f| f.file_name().map(|n| n.to_string_lossy().into_owned())).collect::<Vec<_>>(),
    });
    let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(&summary_path, text + "\n").map_err(io_err(&summary_path))?;

    Ok(RunReport {
        files,
        points: out.points,
        failures: out.failures.len(),
    })
}
