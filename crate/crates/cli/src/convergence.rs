//! The convergence table: for each `k` the Perron data, the entropy and the
//! empirical LDP profile, compared against their `k → ∞` limits.

use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use weakkam_core::sim::ldp_profile_gap;
use weakkam_core::{
    deviation_function, entropy, perron_solve, stationary_measure, DeviationFunction, Potential, DEFAULT_MAX_ITERS,
};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{real, write_csv, write_json, Csv};

/// Values at or below this are treated as exact zeros by the monotonicity checks.
pub const MONOTONE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub k: usize,
    pub lambda_over_k: f64,
    /// `max V − λ_k / k`
    #[serde(rename = "max_V_gap")]
    pub max_v_gap: f64,
    pub entropy_over_k: f64,
    /// Sup-norm gap between the re-centred `−(1/k) log π` and `I^V`.
    pub ldp_sup_gap: f64,
    /// Not part of the deterministic outputs unless timings are requested.
    #[serde(skip)]
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneCheck {
    pub column: &'static str,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub potential: String,
    pub rows: Vec<ConvergenceRow>,
    pub checks: Vec<MonotoneCheck>,
    pub failure: Option<String>,
    #[serde(skip)]
    pub csv_path: PathBuf,
    #[serde(skip)]
    pub json_path: PathBuf,
}

impl ConvergenceReport {
    pub fn all_passed(&self) -> bool {
        self.failure.is_none() && self.checks.iter().all(|c| c.passed)
    }
}

/// `next < prev`, or both already at the floor.
pub fn strictly_decreasing(values: &[f64]) -> bool {
    values
        .windows(2)
        .all(|w| w[1] < w[0] || (w[0].abs() <= MONOTONE_FLOOR && w[1].abs() <= MONOTONE_FLOOR))
}

pub fn convergence_row(
    k: usize,
    potential: &Potential<f64>,
    dev: &DeviationFunction<f64>,
    tol: f64,
) -> weakkam_core::Result<ConvergenceRow> {
    let start = Instant::now();
    let pd = perron_solve(k, potential, tol, DEFAULT_MAX_ITERS)?;
    let sm = stationary_measure(&pd)?;
    let h = entropy(&pd, &sm, k, potential)?;
    let kk = k as f64;
    let lambda_over_k = pd.lambda() / kk;
    Ok(ConvergenceRow {
        k,
        lambda_over_k,
        max_v_gap: potential.max_value() - lambda_over_k,
        entropy_over_k: h / kk,
        ldp_sup_gap: ldp_profile_gap(&pd, dev)?,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn header(timings: bool) -> Vec<&'static str> {
    let mut h = vec!["k", "lambda_over_k", "max_V_gap", "entropy_over_k", "ldp_sup_gap"];
    if timings {
        h.push("wall_time_ms");
    }
    h
}

fn csv_cells(row: &ConvergenceRow, timings: bool) -> Vec<String> {
    let mut cells = vec![
        row.k.to_string(),
        real(row.lambda_over_k),
        real(row.max_v_gap),
        real(row.entropy_over_k),
        real(row.ldp_sup_gap),
    ];
    if timings {
        cells.push(format!("{:.3}", row.wall_time_ms));
    }
    cells
}

/// Runs every `k` of the config (in parallel), writes `convergence.csv` and
/// its JSON mirror, and reports the monotonicity checks. A module error
/// leaves the rows computed so far plus a failure marker on disk and is
/// returned as the error.
pub fn run_convergence(cfg: &RunConfig, timings: bool) -> CliResult<ConvergenceReport> {
    let potential = cfg.potential();
    let tol = cfg.tolerance("perron");
    let mut csv = Csv::new(&header(timings));
    let mut report = ConvergenceReport {
        potential: cfg.potential.clone(),
        rows: Vec::new(),
        checks: Vec::new(),
        failure: None,
        csv_path: cfg.out_dir.join("convergence.csv"),
        json_path: cfg.out_dir.join("convergence.json"),
    };

    let dev = deviation_function(&potential, cfg.n_grid);
    let results: Vec<weakkam_core::Result<ConvergenceRow>> = match &dev {
        Ok(dev) => cfg
            .k_list
            .par_iter()
            .map(|k| convergence_row(*k, &potential, dev, tol))
            .collect(),
        Err(e) => vec![Err(e.clone())],
    };

    let mut error = None;
    for result in results {
        match result {
            Ok(row) => {
                csv.row(&csv_cells(&row, timings));
                report.rows.push(row);
            }
            Err(e) => {
                csv.failure_marker(&e.to_string());
                report.failure = Some(e.to_string());
                error = Some(e);
                break;
            }
        }
    }

    if error.is_none() {
        let column = |f: fn(&ConvergenceRow) -> f64| report.rows.iter().map(f).collect::<Vec<_>>();
        report.checks = vec![
            MonotoneCheck {
                column: "max_V_gap",
                passed: strictly_decreasing(&column(|r| r.max_v_gap)),
            },
            MonotoneCheck {
                column: "ldp_sup_gap",
                passed: strictly_decreasing(&column(|r| r.ldp_sup_gap)),
            },
            MonotoneCheck {
                column: "entropy_over_k",
                passed: strictly_decreasing(&column(|r| r.entropy_over_k.abs())),
            },
        ];
    }

    write_csv(&cfg.out_dir, "convergence.csv", &csv)?;
    if timings {
        #[derive(Serialize)]
        struct Timed<'a> {
            #[serde(flatten)]
            report: &'a ConvergenceReport,
            wall_time_ms: Vec<f64>,
        }
        let wall_time_ms = report.rows.iter().map(|r| r.wall_time_ms).collect();
        write_json(&cfg.out_dir, "convergence.json", &Timed { report: &report, wall_time_ms })?;
    } else {
        write_json(&cfg.out_dir, "convergence.json", &report)?;
    }
    match error {
        Some(e) => Err(CliError::Core(e)),
        None => Ok(report),
    }
}
