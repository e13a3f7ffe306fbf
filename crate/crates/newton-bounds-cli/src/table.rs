//! Bound-table assembly: one row per decrement value, combining the
//! full-step shooting bound with the optimal-damping pipeline.

use newton_bounds::bvp::Shooter;
use newton_bounds::damping::optimal_step;
use newton_bounds::{Error, Result};
use serde::Serialize;

/// One row of the bound table. `bound_full` is absent when the full-step
/// bound exceeds the certified range.
#[derive(Debug, Clone, Serialize)]
pub struct TableRow {
    pub lambda_bar: f64,
    pub bound_full: Option<f64>,
    pub bound_opt: f64,
    pub gamma_star: f64,
}

/// The published grid: multiples of 0.02 in [0.02, 0.98] plus the midpoints
/// 0.05, 0.15, ..., 0.95.
pub fn default_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (1..=49).map(|i| f64::from(2 * i) / 100.0).collect();
    grid.extend((0..10).map(|i| f64::from(5 + 10 * i) / 100.0));
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid
}

/// Build rows for an ascending grid of decrement values. A row is dropped
/// (and the failure reported) only when the optimal-step pipeline fails;
/// a full-step bound beyond the certified range just leaves that cell empty.
pub fn build(grid: &[f64]) -> (Vec<TableRow>, Vec<(f64, Error)>) {
    let shooter = Shooter::default();
    let full = shooter.sweep_full_step(grid);
    let mut rows = Vec::with_capacity(grid.len());
    let mut failures = Vec::new();
    for (&a, full_res) in grid.iter().zip(full) {
        let bound_full = match full_res {
            Ok(r) => Some(r.lambda_out),
            Err(Error::BeyondCertifiedRange { .. }) => None,
            Err(e) => {
                failures.push((a, e));
                None
            }
        };
        match optimal_step(a) {
            Ok(opt) => rows.push(TableRow {
                lambda_bar: a,
                bound_full,
                bound_opt: opt.lambda_out,
                gamma_star: opt.gamma_star,
            }),
            Err(e) => failures.push((a, e)),
        }
    }
    (rows, failures)
}

pub fn to_csv(rows: &[TableRow]) -> String {
    let mut out = String::from("lambda_bar,bound_full,bound_opt,gamma_star\n");
    for r in rows {
        let full = r.bound_full.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            r.lambda_bar, full, r.bound_opt, r.gamma_star
        ));
    }
    out
}

/// Parse a comma-separated list of grid values, requiring each in (0, 1).
pub fn parse_grid(s: &str) -> Result<Vec<f64>> {
    let mut grid = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        let v: f64 = part
            .parse()
            .map_err(|_| Error::Domain(format!("bad grid value: {part}")))?;
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::Domain(format!(
                "grid values must lie in (0, 1), got {v}"
            )));
        }
        grid.push(v);
    }
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(grid)
}
