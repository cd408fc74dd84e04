//! One function per task. Grid tasks record per-point failures and continue;
//! single-point tasks propagate errors.

use dicke_core::analytic::appc_g2_approx;
use dicke_core::model::{build_hamiltonian, build_operators_with_limit, DEFAULT_MAX_DIMENSION};
use dicke_core::observables::SpectrumResult;
use dicke_core::qoptical::{QoEmission, QoModel, QO_MAX_DIMENSION};
use dicke_core::spectral::{diagonalize, EigenSystem};
use dicke_core::{DressedModel, ModelParams};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{RunConfig, Task};
use crate::output::{Cell, Table};
use crate::sweep::parallel_map;

pub const FLAG_DEGENERATE: i64 = 1;
pub const FLAG_COLLISION: i64 = 2;
pub const FLAG_FAILED: i64 = 4;

/// Peaks below this fraction of the total weight are ignored when comparing
/// spectra between cutoffs.
const COMPARED_WEIGHT_FRACTION: f64 = 1e-3;
/// Peak centres closer than this are the same line.
const CENTRE_MATCH: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub at: String,
    pub error: String,
}

#[derive(Debug, Default)]
pub struct TaskOutput {
    pub table: Option<Table>,
    pub results: Value,
    pub points: usize,
    pub degenerate_points: usize,
    pub collision_points: usize,
    pub failures: Vec<Failure>,
    pub convergence: Value,
}

impl TaskOutput {
    fn tally(&mut self, flags: i64) {
        self.points += 1;
        if flags & FLAG_DEGENERATE != 0 {
            self.degenerate_points += 1;
        }
        if flags & FLAG_COLLISION != 0 {
            self.collision_points += 1;
        }
    }

    fn fail(&mut self, at: String, error: impl ToString) {
        self.failures.push(Failure {
            at,
            error: error.to_string(),
        });
    }
}

fn model_flags(m: &DressedModel) -> i64 {
    let mut f = 0;
    if m.diagnostics.degenerate_levels > 0 {
        f |= FLAG_DEGENERATE;
    }
    if m.diagnostics.transition_collisions > 0 {
        f |= FLAG_COLLISION;
    }
    f
}

fn eigen_flags(eig: &EigenSystem) -> i64 {
    if eig.degenerate_levels() > 0 {
        FLAG_DEGENERATE
    } else {
        0
    }
}

fn at_label(g: f64, t: f64) -> String {
    format!("g={g} T={t}")
}

fn dressed(cfg: &RunConfig, params: &ModelParams) -> dicke_core::Result<DressedModel> {
    DressedModel::with_options(params, cfg.options())
}

fn g2_at(cfg: &RunConfig, params: &ModelParams) -> dicke_core::Result<f64> {
    let m = dressed(cfg, params)?;
    Ok(m.g2_zero(&m.thermal(params.temperature)?)?.value)
}

/// |g²(0)| change between the configured and the finer Fock cutoff.
fn g2_convergence(cfg: &RunConfig, params: &ModelParams, label: &str) -> Value {
    let fine = ModelParams {
        n_max: cfg.n_max_fine(),
        ..params.clone()
    };
    match (g2_at(cfg, params), g2_at(cfg, &fine)) {
        (Ok(a), Ok(b)) => json!({
            "metric": "abs_delta_g2_zero",
            "at": label,
            "n_max": params.n_max,
            "n_max_fine": fine.n_max,
            "value": (a - b).abs(),
        }),
        (a, b) => json!({
            "metric": "abs_delta_g2_zero",
            "at": label,
            "error": a.err().or(b.err()).map(|e| e.to_string()),
        }),
    }
}

/// Peak weights summed over lines sharing a centre, ordered by centre.
pub fn centre_clusters(spec: &SpectrumResult) -> Vec<(f64, f64)> {
    let mut peaks: Vec<(f64, f64)> = spec.peaks.iter().map(|p| (p.center, p.weight)).collect();
    peaks.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (c, w) in peaks {
        match out.last_mut() {
            Some(last) if (c - last.0).abs() < CENTRE_MATCH => last.1 += w,
            _ => out.push((c, w)),
        }
    }
    out
}

/// Largest relative change of the significant line weights between spectra.
pub fn weight_change(coarse: &SpectrumResult, fine: &SpectrumResult) -> f64 {
    let (a, b) = (centre_clusters(coarse), centre_clusters(fine));
    let total = coarse.total_weight();
    a.iter()
        .filter(|c| c.1 > COMPARED_WEIGHT_FRACTION * total)
        .map(|&(centre, w)| {
            let other = b.iter().find(|c| (c.0 - centre).abs() < CENTRE_MATCH).map_or(0.0, |c| c.1);
            (other / w - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

pub fn run_task(task: Task, cfg: &RunConfig, workers: usize) -> dicke_core::Result<TaskOutput> {
    match task {
        Task::Eigen => Ok(eigen(cfg, workers)),
        Task::Spectrum => spectrum(cfg),
        Task::G2chart => Ok(g2chart(cfg, workers)),
        Task::G2time => g2time(cfg),
        Task::QoChart => Ok(qo_chart(cfg, workers)),
        Task::AnalyticCompare => Ok(analytic_compare(cfg, workers)),
        Task::Converge => Ok(converge(cfg, workers)),
    }
}

fn eigensystem(cfg: &RunConfig, params: &ModelParams) -> dicke_core::Result<EigenSystem> {
    let ops = build_operators_with_limit(params, DEFAULT_MAX_DIMENSION)?;
    let h = build_hamiltonian(params, &ops)?;
    diagonalize(h.as_ref(), cfg.tolerance)
}

fn eigen(cfg: &RunConfig, workers: usize) -> TaskOutput {
    let gs = cfg.grid.g_values();
    let levels = cfg.eigen_levels;
    let systems = parallel_map(&gs, workers, |&g| eigensystem(cfg, &cfg.at(g, cfg.model.temperature)));
    let mut out = TaskOutput::default();
    let mut table = Table::new(vec!["g", "level", "energy", "degeneracy", "flags"]);
    for (&g, sys) in gs.iter().zip(&systems) {
        match sys {
            Ok(eig) => {
                let flags = eigen_flags(eig);
                out.tally(flags);
                for k in 0..levels.min(eig.dim()) {
                    let degeneracy = eig.level_groups[eig.level_of(k)].len();
                    table.push(vec![Cell::Float(g), Cell::Int(k as i64), Cell::Float(eig.energies[k]), Cell::Int(degeneracy as i64), Cell::Int(flags)]);
                }
            }
            Err(e) => {
                out.tally(FLAG_FAILED);
                out.fail(format!("g={g}"), e);
                for k in 0..levels {
                    table.push(vec![Cell::Float(g), Cell::Int(k as i64), Cell::Float(f64::NAN), Cell::Int(0), Cell::Int(FLAG_FAILED)]);
                }
            }
        }
    }
    let g_top = *gs.last().expect("nonempty axis");
    let coarse = cfg.at(g_top, cfg.model.temperature);
    let fine = ModelParams {
        n_max: cfg.n_max_fine(),
        ..coarse.clone()
    };
    out.convergence = match (eigensystem(cfg, &coarse), eigensystem(cfg, &fine)) {
        (Ok(a), Ok(b)) => json!({
            "metric": "max_abs_delta_energy_lowest_levels",
            "at": format!("g={g_top}"),
            "n_max": coarse.n_max,
            "n_max_fine": fine.n_max,
            "value": (0..levels.min(a.dim())).map(|k| (a.energies[k] - b.energies[k]).abs()).fold(0.0, f64::max),
        }),
        (a, b) => json!({"error": a.err().or(b.err()).map(|e| e.to_string())}),
    };
    out.results = json!({"g_values": gs.len(), "levels": levels});
    out.table = Some(table);
    out
}

fn spectrum(cfg: &RunConfig) -> dicke_core::Result<TaskOutput> {
    let m = dressed(cfg, &cfg.model)?;
    let point = m.at_model_temperature()?;
    let grid = cfg.omega_grid.values();
    let spec = m.spectrum(&point, &grid)?;
    let mut table = Table::new(vec!["omega", "spectrum", "reduced"]);
    for (&w, &s) in spec.omega.iter().zip(&spec.values) {
        table.push(vec![Cell::Float(w), Cell::Float(s), Cell::Float(spec.reduced(w))]);
    }
    let total = spec.total_weight();
    let clusters = {
        let mut c = centre_clusters(&spec);
        c.sort_by(|a, b| b.1.total_cmp(&a.1));
        c
    };
    let peaks: Vec<Value> = clusters
        .iter()
        .take(20)
        .map(|&(centre, w)| json!({"center": centre, "weight": w, "fraction": w / total}))
        .collect();
    let g2 = m.g2_zero(&point).ok().map(|z| z.value);

    let mut out = TaskOutput::default();
    out.tally(model_flags(&m));
    out.results = json!({
        "integrated_emission": m.integrated_emission(&point)?,
        "g2_zero": g2,
        "total_weight": total,
        "line_count": clusters.len(),
        "dominant_fraction": clusters.first().map(|c| c.1 / total),
        "lines": peaks,
    });
    let fine_params = ModelParams {
        n_max: cfg.n_max_fine(),
        ..cfg.model.clone()
    };
    out.convergence = match dressed(cfg, &fine_params).and_then(|f| {
        let p = f.at_model_temperature()?;
        f.spectrum(&p, &[])
    }) {
        Ok(fine) => json!({
            "metric": "max_relative_line_weight_change",
            "n_max": cfg.model.n_max,
            "n_max_fine": fine_params.n_max,
            "value": weight_change(&spec, &fine),
        }),
        Err(e) => json!({"error": e.to_string()}),
    };
    out.table = Some(table);
    Ok(out)
}

fn g2time(cfg: &RunConfig) -> dicke_core::Result<TaskOutput> {
    let m = dressed(cfg, &cfg.model)?;
    let point = m.at_model_temperature()?;
    let times = cfg.t_grid.values();
    let curve = m.g2_time(&point, &times)?;
    let mut table = Table::new(vec!["t", "g2"]);
    for (&t, &v) in curve.times.iter().zip(&curve.values) {
        table.push(vec![Cell::Float(t), Cell::Float(v)]);
    }
    let mut out = TaskOutput::default();
    out.tally(model_flags(&m));
    out.results = json!({
        "g2_zero": curve.g2_zero,
        "denominator": curve.denominator,
        "final": curve.values.last(),
        "imaginary_residue": curve.imaginary_residue,
    });
    out.convergence = g2_convergence(cfg, &cfg.model, "model point");
    out.table = Some(table);
    Ok(out)
}

/// Rows of one g value across all temperatures, with their flags.
type ChartRow = (Vec<Vec<Cell>>, Vec<(i64, Option<String>)>);

fn chart<F>(cfg: &RunConfig, workers: usize, header: Vec<&'static str>, row: F) -> (TaskOutput, Table)
where
    F: Fn(f64, &[f64]) -> ChartRow + Sync,
{
    let gs = cfg.grid.g_values();
    let ts = cfg.grid.t_values();
    let rows = parallel_map(&gs, workers, |&g| row(g, &ts));
    let mut out = TaskOutput::default();
    let mut table = Table::new(header);
    for (&g, (cells, flags)) in gs.iter().zip(rows) {
        for ((&t, cells), (flag, err)) in ts.iter().zip(cells).zip(flags) {
            out.tally(flag);
            if let Some(e) = err {
                out.fail(at_label(g, t), e);
            }
            table.push(cells);
        }
    }
    (out, table)
}

fn failed_cells(g: f64, t: f64, width: usize) -> Vec<Cell> {
    let mut cells = vec![Cell::Float(g), Cell::Float(t)];
    cells.extend(std::iter::repeat(Cell::Float(f64::NAN)).take(width - 3));
    cells.push(Cell::Int(FLAG_FAILED));
    cells
}

fn g2chart(cfg: &RunConfig, workers: usize) -> TaskOutput {
    let header = vec!["g", "T", "g2_zero", "emission", "flags"];
    let width = header.len();
    let (mut out, table) = chart(cfg, workers, header, |g, ts| {
        let model = dressed(cfg, &cfg.at(g, 0.0));
        ts.iter()
            .map(|&t| {
                let res = model.as_ref().map_err(|e| e.to_string()).and_then(|m| {
                    let p = m.thermal(t).map_err(|e| e.to_string())?;
                    let emission = m.integrated_emission(&p).map_err(|e| e.to_string())?;
                    let g2 = m.g2_zero(&p).map_err(|e| e.to_string())?.value;
                    Ok((g2, emission, model_flags(m)))
                });
                match res {
                    Ok((g2, emission, flags)) => (vec![Cell::Float(g), Cell::Float(t), Cell::Float(g2), Cell::Float(emission), Cell::Int(flags)], (flags, None)),
                    Err(e) => (failed_cells(g, t, width), (FLAG_FAILED, Some(e))),
                }
            })
            .unzip()
    });
    let (g, t) = (cfg.grid.g_max, cfg.grid.t_max);
    out.convergence = g2_convergence(cfg, &cfg.at(g, t), &at_label(g, t));
    out.results = json!({"g_prime_ratio": cfg.g_prime_ratio()});
    out.table = Some(table);
    out
}

fn qo_point(params: &ModelParams) -> dicke_core::Result<(f64, f64, f64, f64)> {
    let qo = QoModel::new(params)?;
    let state = qo.stationary()?;
    let bare = qo.g2_zero(&state, QoEmission::Bare)?;
    let dressed = qo.g2_zero(&state, QoEmission::Dressed)?;
    Ok((bare, dressed, state.min_eigenvalue, state.residual))
}

fn qo_chart(cfg: &RunConfig, workers: usize) -> TaskOutput {
    let header = vec!["g", "T", "g2_bare", "g2_dressed", "min_eigenvalue", "residual", "flags"];
    let width = header.len();
    let qo_params = |g: f64, t: f64, n_max: usize| ModelParams {
        n_max,
        ..cfg.at(g, t)
    };
    let (mut out, table) = chart(cfg, workers, header, |g, ts| {
        ts.iter()
            .map(|&t| match qo_point(&qo_params(g, t, cfg.qo_n_max)) {
                Ok((b, d, min, res)) => (
                    vec![Cell::Float(g), Cell::Float(t), Cell::Float(b), Cell::Float(d), Cell::Float(min), Cell::Float(res), Cell::Int(0)],
                    (0, None),
                ),
                Err(e) => (failed_cells(g, t, width), (FLAG_FAILED, Some(e.to_string()))),
            })
            .unzip()
    });
    // Convergence by doubling the Fock space as far as the dimension guard allows.
    let per_fock = 1usize << cfg.model.n_emitters;
    let fine = (2 * cfg.qo_n_max + 1).min(QO_MAX_DIMENSION / per_fock - 1);
    let (g, t) = (cfg.grid.g_max, cfg.grid.t_max);
    out.convergence = if fine <= cfg.qo_n_max {
        json!({"metric": "abs_delta_g2_bare", "error": "no larger cutoff fits the dimension limit"})
    } else {
        match (qo_point(&qo_params(g, t, cfg.qo_n_max)), qo_point(&qo_params(g, t, fine))) {
            (Ok(a), Ok(b)) => json!({
                "metric": "abs_delta_g2_bare",
                "at": at_label(g, t),
                "n_max": cfg.qo_n_max,
                "n_max_fine": fine,
                "value": (a.0 - b.0).abs(),
                "dressed_value": (a.1 - b.1).abs(),
            }),
            (a, b) => json!({"error": a.err().or(b.err()).map(|e| e.to_string())}),
        }
    };
    out.results = json!({"g_prime_ratio": cfg.g_prime_ratio(), "qo_n_max": cfg.qo_n_max});
    out.table = Some(table);
    out
}

fn analytic_compare(cfg: &RunConfig, workers: usize) -> TaskOutput {
    let header = vec!["g", "T", "numeric", "basic", "refined", "rel_err_basic", "rel_err_refined", "valid", "flags"];
    let width = header.len();
    let params = |g: f64| ModelParams {
        n_emitters: 1,
        g,
        g_prime: 0.0,
        ..cfg.model.clone()
    };
    let (mut out, table) = chart(cfg, workers, header, |g, ts| {
        let model = dressed(cfg, &params(g));
        ts.iter()
            .map(|&t| {
                let res = model.as_ref().map_err(|e| e.to_string()).and_then(|m| {
                    let p = m.thermal(t).map_err(|e| e.to_string())?;
                    let numeric = m.g2_zero(&p).map_err(|e| e.to_string())?.value;
                    let basic = appc_g2_approx(g, t, false).map_err(|e| e.to_string())?;
                    let refined = appc_g2_approx(g, t, true).map_err(|e| e.to_string())?;
                    Ok((numeric, basic.value, refined.value, refined.valid, model_flags(m)))
                });
                match res {
                    Ok((n, b, r, valid, flags)) => (
                        vec![
                            Cell::Float(g),
                            Cell::Float(t),
                            Cell::Float(n),
                            Cell::Float(b),
                            Cell::Float(r),
                            Cell::Float((b / n - 1.0).abs()),
                            Cell::Float((r / n - 1.0).abs()),
                            Cell::Int(valid as i64),
                            Cell::Int(flags),
                        ],
                        (flags, None),
                    ),
                    Err(e) => (failed_cells(g, t, width), (FLAG_FAILED, Some(e))),
                }
            })
            .unzip()
    });
    let column = |name: &str| table.header.iter().position(|h| *h == name).expect("known column");
    let (eb, er, valid) = (column("rel_err_basic"), column("rel_err_refined"), column("valid"));
    let value = |row: &[Cell], i: usize| match row[i] {
        Cell::Float(x) => x,
        Cell::Int(i) => i as f64,
    };
    let in_range: Vec<&Vec<Cell>> = table.rows.iter().filter(|r| value(r, valid) == 1.0 && value(r, er).is_finite()).collect();
    out.results = json!({
        "limit": "N=1, g'=0",
        "max_rel_err_refined_valid": in_range.iter().map(|r| value(r, er)).fold(0.0, f64::max),
        "max_rel_err_basic_valid": in_range.iter().map(|r| value(r, eb)).fold(0.0, f64::max),
        "refined_not_worse_fraction": in_range.iter().filter(|r| value(r, er) <= value(r, eb)).count() as f64 / in_range.len().max(1) as f64,
    });
    let (g, t) = (cfg.grid.g_max, cfg.grid.t_max);
    out.convergence = g2_convergence(cfg, &ModelParams { temperature: t, ..params(g) }, &at_label(g, t));
    out.table = Some(table);
    out
}

fn converge(cfg: &RunConfig, workers: usize) -> TaskOutput {
    let points: Vec<ModelParams> = if cfg.points.is_empty() {
        vec![cfg.model.clone()]
    } else {
        cfg.points
            .iter()
            .map(|p| ModelParams {
                g: p.g,
                g_prime: p.g_prime,
                temperature: p.temperature,
                ..cfg.model.clone()
            })
            .collect()
    };
    let fine_n = cfg.n_max_fine();
    let evaluate = |p: &ModelParams| -> dicke_core::Result<(f64, f64, f64, f64, f64, i64)> {
        let coarse = dressed(cfg, p)?;
        let fine = dressed(cfg, &ModelParams { n_max: fine_n, ..p.clone() })?;
        let (pc, pf) = (coarse.thermal(p.temperature)?, fine.thermal(p.temperature)?);
        let (ec, ef) = (coarse.integrated_emission(&pc)?, fine.integrated_emission(&pf)?);
        let (gc, gf) = (coarse.g2_zero(&pc)?.value, fine.g2_zero(&pf)?.value);
        let w = weight_change(&coarse.spectrum(&pc, &[])?, &fine.spectrum(&pf, &[])?);
        Ok((gc, gf, ec, ef, w, model_flags(&coarse)))
    };
    let results = parallel_map(&points, workers, evaluate);
    let header = vec!["g", "g_prime", "T", "g2_coarse", "g2_fine", "delta_g2", "emission_rel_change", "weight_rel_change", "flags"];
    let mut table = Table::new(header);
    let mut out = TaskOutput::default();
    let (mut worst_g2, mut worst_weight) = (0.0f64, 0.0f64);
    for (p, r) in points.iter().zip(results) {
        let lead = [Cell::Float(p.g), Cell::Float(p.g_prime), Cell::Float(p.temperature)];
        match r {
            Ok((gc, gf, ec, ef, w, flags)) => {
                out.tally(flags);
                worst_g2 = worst_g2.max((gc - gf).abs());
                worst_weight = worst_weight.max(w);
                let mut row = lead.to_vec();
                row.extend([gc, gf, gc - gf, (ef / ec - 1.0).abs(), w].map(Cell::Float));
                row.push(Cell::Int(flags));
                table.push(row);
            }
            Err(e) => {
                out.tally(FLAG_FAILED);
                out.fail(format!("g={} g'={} T={}", p.g, p.g_prime, p.temperature), e);
                let mut row = lead.to_vec();
                row.extend([f64::NAN; 5].map(Cell::Float));
                row.push(Cell::Int(FLAG_FAILED));
                table.push(row);
            }
        }
    }
    out.convergence = json!({
        "metric": "max_abs_delta_g2_zero",
        "n_max": cfg.model.n_max,
        "n_max_fine": fine_n,
        "value": worst_g2,
        "max_relative_line_weight_change": worst_weight,
    });
    out.results = json!({"points": points.len()});
    out.table = Some(table);
    out
}
