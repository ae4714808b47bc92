//! Experiment reports and their on-disk form: error tables, rule traces,
//! solution vectors, criterion landscapes and run metadata. All numeric
//! output goes through `{:e}` formatting, so reruns with the same
//! configuration are byte-identical.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::CoreError;
use crate::linalg::Matrix;
use crate::matio;
use crate::rules::RuleTrace;
use crate::scalar::Scalar;
use crate::value_function::{CertifiedSample, RegParam};

use super::{ExampleId, SolverCertification};

/// Best single-penalty parameter and its error, from a 1-D oracle scan.
#[derive(Debug, Clone)]
pub struct SingleOracleResult<T> {
    pub label: String,
    pub eta: T,
    pub error: T,
}

/// Everything measured on one `(ε, seed)` cell.
#[derive(Debug, Clone)]
pub struct CellResult<T> {
    pub epsilon: T,
    pub seed: u64,
    pub noise_seed: u64,
    pub delta2: T,
    pub eta_selected: RegParam<T>,
    pub error_selected: T,
    pub eta_oracle: RegParam<T>,
    pub error_oracle: T,
    pub singles: Vec<SingleOracleResult<T>>,
    /// Final balancing weight (after the two-step adjustment), if a
    /// balancing rule ran.
    pub gamma: Option<T>,
    pub delta2_estimate: Option<T>,
    pub balance_residual: Option<T>,
    pub rule_updates: usize,
    pub converged: bool,
    pub trace: Option<RuleTrace<T>>,
    pub x_selected: Vec<T>,
    pub x_oracle: Vec<T>,
    pub phi_selected: T,
}

/// All cells at one noise level plus their medians.
#[derive(Debug, Clone)]
pub struct ExperimentRow<T> {
    pub epsilon: T,
    pub cells: Vec<CellResult<T>>,
    pub median_selected: T,
    pub median_oracle: T,
    pub median_singles: Vec<(String, T)>,
    pub median_eta_selected: Vec<T>,
}

/// A full experiment run: one row per noise level.
#[derive(Debug)]
pub struct ExperimentReport<T> {
    pub example: ExampleId,
    pub rows: Vec<ExperimentRow<T>>,
    pub certification: SolverCertification<T>,
    pub metadata: Vec<(String, String)>,
    /// Cells whose rule or solver failed: `(ε, seed, message)`.
    pub failures: Vec<(T, u64, String)>,
    pub x_true: Vec<T>,
}

fn write_file<T: Scalar>(path: &Path, content: &str) -> Result<(), CoreError<T>> {
    fs::write(path, content).map_err(|e| CoreError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn single_labels<T: Scalar>(report: &ExperimentReport<T>) -> Vec<String> {
    report
        .rows
        .first()
        .and_then(|r| r.cells.first())
        .map(|c| c.singles.iter().map(|s| s.label.clone()).collect())
        .unwrap_or_else(|| vec!["p1".into(), "p2".into()])
}

/// Median error table in the layout of the experiment tables: one row per
/// noise level, balancing/selected and oracle parameters and errors side by
/// side with the single-penalty optima.
pub fn table_csv<T: Scalar>(report: &ExperimentReport<T>) -> String {
    let labels = single_labels(report);
    let mut out = String::new();
    let _ = write!(out, "eps,eta_b_1,eta_b_2,eta_o_1,eta_o_2");
    for l in &labels {
        let _ = write!(out, ",eta_{l}");
    }
    let _ = write!(out, ",e_b,e_o");
    for l in &labels {
        let _ = write!(out, ",e_{l}");
    }
    out.push('\n');
    for row in &report.rows {
        let _ = write!(
            out,
            "{:e},{:e},{:e}",
            row.epsilon, row.median_eta_selected[0], row.median_eta_selected[1]
        );
        // oracle η of the first cell is representative; errors are medians
        let first = &row.cells[0];
        let _ = write!(out, ",{:e},{:e}", first.eta_oracle.get(0), first.eta_oracle.get(1));
        for (i, _) in labels.iter().enumerate() {
            let _ = write!(out, ",{:e}", first.singles[i].eta);
        }
        let _ = write!(out, ",{:e},{:e}", row.median_selected, row.median_oracle);
        for (_, e) in &row.median_singles {
            let _ = write!(out, ",{e:e}");
        }
        out.push('\n');
    }
    out
}

/// Per-cell long-form table.
pub fn cells_csv<T: Scalar>(report: &ExperimentReport<T>) -> String {
    let labels = single_labels(report);
    let mut out = String::new();
    let _ = write!(
        out,
        "eps,seed,delta2,eta_b_1,eta_b_2,e_b,eta_o_1,eta_o_2,e_o"
    );
    for l in &labels {
        let _ = write!(out, ",eta_{l},e_{l}");
    }
    out.push_str(",gamma,delta2_est,balance_residual,updates,converged,phi_selected\n");
    for row in &report.rows {
        for c in &row.cells {
            let _ = write!(
                out,
                "{:e},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                c.epsilon,
                c.seed,
                c.delta2,
                c.eta_selected.get(0),
                c.eta_selected.get(1),
                c.error_selected,
                c.eta_oracle.get(0),
                c.eta_oracle.get(1),
                c.error_oracle
            );
            for s in &c.singles {
                let _ = write!(out, ",{:e},{:e}", s.eta, s.error);
            }
            let opt = |v: &Option<T>| v.map(|x| format!("{x:e}")).unwrap_or_default();
            let _ = writeln!(
                out,
                ",{},{},{},{},{},{:e}",
                opt(&c.gamma),
                opt(&c.delta2_estimate),
                opt(&c.balance_residual),
                c.rule_updates,
                c.converged,
                c.phi_selected
            );
        }
    }
    out
}

/// Iterate history of one rule run.
pub fn trace_csv<T: Scalar>(trace: &RuleTrace<T>) -> String {
    let mut out = String::from("iteration,eta_1,eta_2,phi,psi_1,psi_2,F,criterion\n");
    for (k, it) in trace.iterates.iter().enumerate() {
        let e2 = if it.eta.len() > 1 { it.eta.get(1) } else { it.eta.get(0) };
        let p2 = if it.psi.len() > 1 { it.psi[1] } else { it.psi[0] };
        let _ = writeln!(
            out,
            "{k},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            it.eta.get(0),
            e2,
            it.phi,
            it.psi[0],
            p2,
            it.f_value,
            it.criterion
        );
    }
    out
}

pub fn metadata_text<T: Scalar>(report: &ExperimentReport<T>) -> String {
    let mut out = String::new();
    for (k, v) in &report.metadata {
        let _ = writeln!(out, "{k} = {v}");
    }
    let cert = &report.certification;
    let _ = writeln!(out, "solves_checked = {}", cert.checked);
    let _ = writeln!(out, "objective_violations = {}", cert.objective_violations);
    if let Some(m) = cert.max_objective_margin {
        let _ = writeln!(out, "max_objective_margin = {m:e}");
    }
    if let Some(m) = cert.max_kkt_ratio {
        let _ = writeln!(out, "max_kkt_ratio = {m:e}");
    }
    let _ = writeln!(out, "oracle_non_converged = {}", cert.non_converged);
    let _ = writeln!(out, "failed_cells = {}", report.failures.len());
    for (eps, seed, msg) in &report.failures {
        let _ = writeln!(out, "failure = eps {eps:e} seed {seed}: {msg}");
    }
    out
}

/// Writes the full report into `dir`: `table.csv`, `cells.csv`, per-run
/// trace CSVs, selected/oracle solution vectors, the exact solution and
/// `metadata.txt`.
pub fn emit_outputs<T: Scalar>(
    report: &ExperimentReport<T>,
    dir: &Path,
) -> Result<(), CoreError<T>> {
    fs::create_dir_all(dir).map_err(|e| CoreError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    write_file(&dir.join("table.csv"), &table_csv(report))?;
    write_file(&dir.join("cells.csv"), &cells_csv(report))?;
    write_file(&dir.join("metadata.txt"), &metadata_text(report))?;
    matio::write_vector(&dir.join("x_true.txt"), &report.x_true)?;
    for (ei, row) in report.rows.iter().enumerate() {
        for cell in &row.cells {
            let tag = format!("eps{ei}_seed{}", cell.seed);
            if let Some(trace) = &cell.trace {
                write_file(&dir.join(format!("trace_{tag}.csv")), &trace_csv(trace))?;
            }
            matio::write_vector(&dir.join(format!("x_selected_{tag}.txt")), &cell.x_selected)?;
            matio::write_vector(&dir.join(format!("x_oracle_{tag}.txt")), &cell.x_oracle)?;
        }
    }
    Ok(())
}

/// `(η₁, η₂, Φ_γ)` triples of a criterion landscape, one grid point per row.
pub fn landscape_triples_csv<T: Scalar>(samples: &[CertifiedSample<T>]) -> String {
    let mut out = String::from("eta_1,eta_2,Phi\n");
    for s in samples {
        let phi_c = s.phi_criterion.unwrap_or_else(T::nan);
        let _ = writeln!(
            out,
            "{:e},{:e},{:e}",
            s.sample.eta.get(0),
            s.sample.eta.get(1),
            phi_c
        );
    }
    out
}

/// Full certification rows `(η₁, η₂, F, φ, ψ₁, ψ₂, Φ_γ, Ψ_γ)`.
pub fn certification_csv<T: Scalar>(samples: &[CertifiedSample<T>]) -> String {
    let mut out = String::from("eta_1,eta_2,F,phi,psi_1,psi_2,Phi,Psi\n");
    for s in samples {
        let sm = &s.sample;
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            sm.eta.get(0),
            sm.eta.get(1),
            sm.f_value,
            sm.phi,
            sm.psi[0],
            sm.psi.get(1).copied().unwrap_or_else(T::nan),
            s.phi_criterion.unwrap_or_else(T::nan),
            s.psi_criterion.unwrap_or_else(T::nan),
        );
    }
    out
}

pub fn write_landscape<T: Scalar>(
    samples: &[CertifiedSample<T>],
    dir: &Path,
) -> Result<(), CoreError<T>> {
    fs::create_dir_all(dir).map_err(|e| CoreError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    })?;
    write_file(&dir.join("landscape.csv"), &landscape_triples_csv(samples))?;
    write_file(&dir.join("certification.csv"), &certification_csv(samples))?;
    Ok(())
}

/// Writes a matrix snapshot of the operator (text format with a `rows cols`
/// header) for reproducibility.
pub fn write_operator_snapshot<T: Scalar>(
    matrix: &Matrix<T>,
    path: &Path,
) -> Result<(), CoreError<T>> {
    matio::write_matrix(path, matrix)
}
