//! CSV tables and plotting scripts.

use std::io;
use std::path::Path;

use crate::config::Task;

/// `%.12e` as in C: twelve mantissa digits and an explicitly signed exponent
/// of at least two digits.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exponent) = s.split_once('e').expect("exponent present");
    let e: i32 = exponent.parse().expect("integer exponent");
    format!("{mantissa}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
}

impl Cell {
    fn render(self) -> String {
        match self {
            Cell::Float(x) => sci(x),
            Cell::Int(i) => i.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> io::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render()))?;
        }
        w.flush()
    }
}

const PRELUDE: &str = r#"import csv
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = Path(__file__).resolve().parent


def load(name, required):
    path = HERE / name
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        missing = [c for c in required if c not in (reader.fieldnames or [])]
        if missing:
            sys.exit(f"{path}: missing columns {', '.join(missing)}")
        rows = list(reader)
    return {c: [float(r[c]) for r in rows] for c in required}


def grid(data, x, y, z):
    xs = sorted(set(data[x]))
    ys = sorted(set(data[y]))
    zz = [[float("nan")] * len(xs) for _ in ys]
    for a, b, c in zip(data[x], data[y], data[z]):
        zz[ys.index(b)][xs.index(a)] = c
    return xs, ys, zz


def heatmap(ax, data, z, title):
    xs, ys, zz = grid(data, "T", "g", z)
    # values at or above 4 share the top colour
    mesh = ax.pcolormesh(xs, ys, zz, shading="nearest", cmap="RdBu_r", vmin=0.0, vmax=4.0)
    ax.set_xlabel("T / omega0")
    ax.set_ylabel("g / omega0")
    ax.set_title(title)
    return mesh
"#;

fn body(task: Task) -> String {
    let csv = format!("{}.csv", task.name());
    match task {
        Task::Eigen => format!(
            r#"
data = load("{csv}", ["g", "level", "energy"])
fig, ax = plt.subplots(figsize=(5, 4))
for level in sorted(set(data["level"])):
    pts = [(g, e) for g, l, e in zip(data["g"], data["level"], data["energy"]) if l == level]
    ax.plot([p[0] for p in pts], [p[1] for p in pts], lw=0.8, color="k")
ax.set_xlabel("g / omega0")
ax.set_ylabel("E / omega0")
"#
        ),
        Task::Spectrum => format!(
            r#"
data = load("{csv}", ["omega", "spectrum"])
fig, ax = plt.subplots(figsize=(5, 3.5))
ax.plot(data["omega"], data["spectrum"], lw=1.0)
ax.set_xlim(0.0, 3.0)
ax.set_xlabel("omega / omega0")
ax.set_ylabel("S(omega)")
"#
        ),
        Task::G2chart => format!(
            r#"
data = load("{csv}", ["g", "T", "g2_zero"])
fig, ax = plt.subplots(figsize=(5, 4))
fig.colorbar(heatmap(ax, data, "g2_zero", "g2(0)"), ax=ax)
"#
        ),
        Task::QoChart => format!(
            r#"
data = load("{csv}", ["g", "T", "g2_bare", "g2_dressed"])
fig, axes = plt.subplots(1, 2, figsize=(9, 4))
heatmap(axes[0], data, "g2_bare", "g2(0), bare operators")
fig.colorbar(heatmap(axes[1], data, "g2_dressed", "g2(0), dressed operators"), ax=axes)
"#
        ),
        Task::AnalyticCompare => format!(
            r#"
data = load("{csv}", ["g", "T", "numeric", "basic", "refined"])
fig, axes = plt.subplots(1, 3, figsize=(13, 4))
heatmap(axes[0], data, "numeric", "numeric")
heatmap(axes[1], data, "basic", "basic approximation")
fig.colorbar(heatmap(axes[2], data, "refined", "refined approximation"), ax=axes)
"#
        ),
        Task::G2time => format!(
            r#"
data = load("{csv}", ["t", "g2"])
fig, ax = plt.subplots(figsize=(5, 3.5))
ax.plot(data["t"], data["g2"], lw=1.0)
ax.axhline(1.0, color="k", ls="--", lw=0.8)
ax.set_xlabel("t")
ax.set_ylabel("g2(t)")
"#
        ),
        Task::Converge => format!(
            r#"
data = load("{csv}", ["g", "T", "delta_g2"])
fig, ax = plt.subplots(figsize=(5, 3.5))
ax.semilogy(range(len(data["delta_g2"])), [max(abs(d), 1e-18) for d in data["delta_g2"]], "o")
ax.set_xlabel("point")
ax.set_ylabel("|delta g2(0)|")
"#
        ),
    }
}

pub fn plot_script(task: Task) -> String {
    format!(
        "{PRELUDE}{}\nfig.tight_layout()\nfig.savefig(HERE / \"{}.png\", dpi=150)\n",
        body(task),
        task.name()
    )
}

pub fn plot_file_name(task: Task) -> String {
    format!("plot_{}.py", task.name())
}
