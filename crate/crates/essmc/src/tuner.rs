//! Energy-cost tuning of the (beta1, beta2) pair.
//!
//! Minimizes J - J_hat over the feasibility triangle under the hard
//! constraints J - J_hat < 0 (the energy-saving law must actually save)
//! and J_hat < J_hat_max (the conventional baseline must itself be
//! reasonable, since J_hat diverges at both ends of the admissible beta1
//! interval and would otherwise dominate the objective). Exhaustive grid
//! search with U = 1; both costs come from the convergence module.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::convergence::{cost_es, cost_sosmc};
use crate::util::fmt_sig;
use crate::{EssmcError, Result};

/// Open feasibility triangle of the energy-saving law. The beta2 = beta1
/// edge is excluded here: it degenerates to the conventional law and is
/// handled as recovery by the validator instead.
pub fn feasible_region(delta_ratio: f64, beta1: f64, beta2: f64) -> bool {
    beta1 + beta2 > 2.0 * delta_ratio
        && (0.0..1.0).contains(&beta1)
        && beta2 > -1.0
        && beta2 < beta1
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TuningEntry {
    pub beta1: f64,
    pub beta2: f64,
    /// Energy cost of the energy-saving law; NaN outside the triangle.
    pub j: f64,
    /// Conventional-law cost for the same beta1.
    pub j_hat: f64,
    /// j - j_hat.
    pub objective: f64,
    pub in_triangle: bool,
    /// j_hat < j_hat_max.
    pub under_cap: bool,
    /// objective < 0.
    pub negative: bool,
    /// All constraints: triangle, finite costs, cap, negative objective.
    pub feasible: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TuningGrid {
    pub delta_ratio: f64,
    pub resolution: usize,
    /// Cap actually applied (resolved default or explicit).
    pub j_hat_max: f64,
    /// Row-major: beta1 index outer, beta2 index inner.
    pub entries: Vec<TuningEntry>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TuningOptimum {
    pub beta1: f64,
    pub beta2: f64,
    pub j: f64,
    pub j_hat: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ColumnOptimum {
    pub beta1: f64,
    pub beta2: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TuningResult {
    pub delta_ratio: f64,
    pub j_hat_max: f64,
    /// Global minimizer; None when no cell satisfies every constraint.
    pub best: Option<TuningOptimum>,
    /// Per-beta1 optimal beta2 over columns that have a feasible cell.
    pub column_optima: Vec<ColumnOptimum>,
}

fn beta1_node(i: usize, n: usize) -> f64 {
    (i as f64 + 0.5) / n as f64
}

fn beta2_node(j: usize, n: usize) -> f64 {
    -1.0 + 2.0 * (j as f64 + 0.5) / n as f64
}

/// Evaluate the tuning map on an n x n grid of cell centers,
/// beta1 in (0, 1) and beta2 in (-1, 1). `j_hat_max = None` resolves the
/// default cap 3 * min(J_hat) over the beta1 nodes.
pub fn tune(
    delta_ratio: f64,
    resolution: usize,
    j_hat_max: Option<f64>,
) -> Result<(TuningGrid, TuningResult)> {
    if !(0.0..1.0).contains(&delta_ratio) {
        return Err(EssmcError::Config(
            "tuner needs 0 <= delta_ratio < 1".into(),
        ));
    }
    if resolution < 50 {
        return Err(EssmcError::Config(
            "tuner grid resolution must be >= 50".into(),
        ));
    }
    if let Some(cap) = j_hat_max {
        if !(cap > 0.0) {
            return Err(EssmcError::Config("j_hat_max must be > 0".into()));
        }
    }
    let n = resolution;

    // The conventional cost depends on beta1 only; one pass per column.
    let j_hat_column: Vec<f64> = (0..n)
        .map(|i| {
            let beta1 = beta1_node(i, n);
            if beta1 > delta_ratio {
                cost_sosmc(1.0, delta_ratio, beta1).map(|c| c.value)
            } else {
                Ok(f64::INFINITY)
            }
        })
        .collect::<Result<_>>()?;
    let cap = match j_hat_max {
        Some(cap) => cap,
        None => {
            let min = j_hat_column
                .iter()
                .cloned()
                .filter(|j| j.is_finite())
                .fold(f64::INFINITY, f64::min);
            if !min.is_finite() {
                return Err(EssmcError::Infeasible(
                    "no admissible beta1 column: conventional cost diverges everywhere".into(),
                ));
            }
            3.0 * min
        }
    };

    let columns: Vec<Vec<TuningEntry>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let beta1 = beta1_node(i, n);
            let j_hat = j_hat_column[i];
            (0..n)
                .map(|jj| {
                    let beta2 = beta2_node(jj, n);
                    let in_triangle = feasible_region(delta_ratio, beta1, beta2);
                    let j = if in_triangle {
                        match cost_es(1.0, delta_ratio, beta1, beta2) {
                            Ok(c) => c.value,
                            Err(_) => f64::NAN,
                        }
                    } else {
                        f64::NAN
                    };
                    let objective = j - j_hat;
                    let under_cap = j_hat < cap;
                    let negative = objective < 0.0;
                    TuningEntry {
                        beta1,
                        beta2,
                        j,
                        j_hat,
                        objective,
                        in_triangle,
                        under_cap,
                        negative,
                        feasible: in_triangle
                            && j.is_finite()
                            && j_hat.is_finite()
                            && under_cap
                            && negative,
                    }
                })
                .collect()
        })
        .collect();

    let mut best: Option<TuningOptimum> = None;
    let mut column_optima = Vec::new();
    for column in &columns {
        let mut col_best: Option<&TuningEntry> = None;
        for e in column.iter().filter(|e| e.feasible) {
            if col_best.is_none_or(|b| e.objective < b.objective) {
                col_best = Some(e);
            }
        }
        if let Some(e) = col_best {
            column_optima.push(ColumnOptimum {
                beta1: e.beta1,
                beta2: e.beta2,
                objective: e.objective,
            });
            if best.is_none_or(|b| e.objective < b.objective) {
                best = Some(TuningOptimum {
                    beta1: e.beta1,
                    beta2: e.beta2,
                    j: e.j,
                    j_hat: e.j_hat,
                    objective: e.objective,
                });
            }
        }
    }

    let grid = TuningGrid {
        delta_ratio,
        resolution: n,
        j_hat_max: cap,
        entries: columns.into_iter().flatten().collect(),
    };
    let result = TuningResult {
        delta_ratio,
        j_hat_max: cap,
        best,
        column_optima,
    };
    Ok((grid, result))
}

/// CSV export `beta1,beta2,J,Jhat,objective,feasible` for plotting.
pub fn write_grid_csv<W: Write>(grid: &TuningGrid, mut w: W) -> Result<()> {
    writeln!(w, "beta1,beta2,J,Jhat,objective,feasible")?;
    for e in &grid.entries {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_sig(e.beta1),
            fmt_sig(e.beta2),
            fmt_sig(e.j),
            fmt_sig(e.j_hat),
            fmt_sig(e.objective),
            u8::from(e.feasible)
        )?;
    }
    Ok(())
}
