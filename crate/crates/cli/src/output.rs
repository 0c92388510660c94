//! Sweep output files: a CSV table (deterministic, no timing columns), a
//! JSON record mirroring the full result, and optional plot-ready
//! two-column files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use semirad::sweep::{RowKind, SweepResult};

fn kind_tag(kind: RowKind) -> &'static str {
    match kind {
        RowKind::Main => "main",
        RowKind::EpsUp => "eps_up",
        RowKind::EpsDown => "eps_down",
    }
}

/// Deterministic CSV: one row per measurement, floats in shortest
/// round-trip form, wall time deliberately excluded.
pub fn render_csv(result: &SweepResult, regime_label: Option<&str>) -> String {
    let mut out = String::new();
    out.push_str(
        "kind,h,epsilon,s,energy,regime,g,sigma_max,nu_max,worst_l,worst_nu,\
         modes_total,modes_solved,converged,bound_shape,predicted_g\n",
    );
    let c = result
        .c_fit
        .or_else(|| result.bound.map(|b| b.c_fit))
        .unwrap_or(f64::NAN);
    for row in &result.rows {
        let bound = row
            .bound_shape
            .map(|s| s.to_string())
            .unwrap_or_default();
        let predicted = row
            .bound_shape
            .map(|s| (c * s).to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            kind_tag(row.kind),
            row.h,
            row.epsilon,
            row.weight_s,
            row.energy,
            regime_label.unwrap_or(""),
            row.g,
            row.sigma_max,
            row.nu_max,
            row.worst_degree,
            row.worst_nu,
            row.modes_total,
            row.modes_solved,
            row.converged,
            bound,
            predicted,
        );
    }
    out
}

/// Plot-ready two-column text: `log(1/h)  log g` for the converged main
/// rows with positive g.
pub fn render_plot_data(result: &SweepResult) -> String {
    let mut out = String::new();
    for row in &result.rows {
        if row.kind == RowKind::Main && row.converged && row.g > 0.0 {
            let _ = writeln!(out, "{} {}", (1.0 / row.h).ln(), row.g.ln());
        }
    }
    out
}

pub fn write_outputs(
    dir: &Path,
    result: &SweepResult,
    regime_label: Option<&str>,
    emit_plot_data: bool,
) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("results.csv"), render_csv(result, regime_label))
        .context("writing results.csv")?;
    let json = serde_json::to_string_pretty(result).context("serialising sweep result")?;
    fs::write(dir.join("results.json"), json).context("writing results.json")?;
    if emit_plot_data {
        fs::write(dir.join("plot_g.dat"), render_plot_data(result))
            .context("writing plot_g.dat")?;
    }
    Ok(())
}

/// Parse the `h`, `g` and `converged` columns back out of a results CSV,
/// returning `(h, g, converged)` for the main rows.
pub fn parse_results_csv(text: &str) -> Result<Vec<(f64, f64, bool)>> {
    let mut lines = text.lines();
    let header = lines.next().context("empty results file")?;
    let cols: Vec<&str> = header.split(',').collect();
    let find = |name: &str| {
        cols.iter()
            .position(|&c| c == name)
            .with_context(|| format!("results file lacks column {name:?}"))
    };
    let kind_ix = find("kind")?;
    let h_ix = find("h")?;
    let g_ix = find("g")?;
    let conv_ix = find("converged")?;
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields[kind_ix] != "main" {
            continue;
        }
        let h: f64 = fields[h_ix]
            .parse()
            .with_context(|| format!("line {}: bad h", lineno + 2))?;
        let g: f64 = fields[g_ix]
            .parse()
            .with_context(|| format!("line {}: bad g", lineno + 2))?;
        let converged: bool = fields[conv_ix]
            .parse()
            .with_context(|| format!("line {}: bad converged flag", lineno + 2))?;
        rows.push((h, g, converged));
    }
    Ok(rows)
}
