//! Seeded sweeps: independent runs per seed (data-parallel when available),
//! per-seed reports in seed-scoped subdirectories, and a deterministic
//! aggregate joined in seed order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use imf_core::exec::{run_batch, ExecMode};

use crate::config::ExperimentConfig;
use crate::pipeline::execute_run;
use crate::report::{format_float, write_report, RunReport};
use crate::CliError;

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub seed: u64,
    pub label: String,
    pub m: f64,
    pub contraction: f64,
    pub per_step_kl_ratio: f64,
    pub worst_slack: f64,
    pub pass: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Worst slack per certificate name across all seeds.
    pub certificate_minima: Vec<(String, f64, bool)>,
    pub first_failure: Option<u64>,
    pub had_runtime_error: bool,
}

impl SweepOutcome {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

pub const SWEEP_HEADER: &str = "seed,instance,m,contraction,per_step_kl_ratio,worst_slack,pass";

pub fn render_sweep_csv(outcome: &SweepOutcome) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in &outcome.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            row.seed,
            row.label,
            format_float(row.m),
            format_float(row.contraction),
            format_float(row.per_step_kl_ratio),
            format_float(row.worst_slack),
            row.pass,
        );
    }
    out
}

pub fn render_sweep_summary(outcome: &SweepOutcome) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seeds = {}", outcome.rows.len());
    let _ = writeln!(out, "pass = {}", outcome.pass());
    match outcome.first_failure {
        Some(seed) => {
            let _ = writeln!(out, "first_failure = {seed}");
        }
        None => {
            let _ = writeln!(out, "first_failure = none");
        }
    }
    for (name, slack, pass) in &outcome.certificate_minima {
        let _ = writeln!(
            out,
            "certificate = {name} pass = {pass} min_slack = {}",
            format_float(*slack)
        );
    }
    for row in &outcome.rows {
        if let Some(error) = &row.error {
            let _ = writeln!(out, "error_seed_{} = {error}", row.seed);
        }
    }
    out
}

/// Runs every sweep seed, writing per-seed reports under
/// `out_root/seed_<s>/`, and the aggregate `sweep_summary.{csv,txt}`.
pub fn execute_sweep(
    config: &ExperimentConfig,
    tolerance_override: Option<f64>,
    out_root: &Path,
    mode: ExecMode,
) -> Result<SweepOutcome, CliError> {
    let seeds = config.sweep_seeds();
    if seeds.is_empty() {
        return Err(CliError::Config("sweep has an empty seed list".into()));
    }

    let mut results: Vec<(u64, Result<RunReport, CliError>)> = run_batch(mode, seeds.len(), |i| {
        let seed = seeds[i];
        let result = execute_run(config, Some(seed), tolerance_override, ExecMode::Sequential)
            .and_then(|report| {
                write_report(&out_root.join(format!("seed_{seed}")), &report)?;
                Ok(report)
            });
        (seed, result)
    });
    // Deterministic join ordered by seed, whatever the execution order was.
    results.sort_by_key(|(seed, _)| *seed);

    let mut rows = Vec::with_capacity(results.len());
    let mut minima: BTreeMap<String, (f64, bool)> = BTreeMap::new();
    let mut first_failure = None;
    let mut had_runtime_error = false;
    for (seed, result) in results {
        match result {
            Ok(report) => {
                for certificate in &report.certificates {
                    let entry = minima
                        .entry(certificate.name.clone())
                        .or_insert((f64::INFINITY, true));
                    entry.0 = entry.0.min(certificate.min_slack());
                    entry.1 &= certificate.pass();
                }
                let pass = report.pass();
                if !pass && first_failure.is_none() {
                    first_failure = Some(seed);
                }
                rows.push(SweepRow {
                    seed,
                    label: report.label.clone(),
                    m: report.constants.m,
                    contraction: report.constants.contraction,
                    per_step_kl_ratio: report.per_step_kl_ratio(),
                    worst_slack: report.worst_slack(),
                    pass,
                    error: None,
                });
            }
            Err(CliError::Config(message)) => {
                // A config problem is not seed-dependent; surface it directly.
                return Err(CliError::Config(message));
            }
            Err(CliError::Runtime(message)) => {
                had_runtime_error = true;
                if first_failure.is_none() {
                    first_failure = Some(seed);
                }
                rows.push(SweepRow {
                    seed,
                    label: String::from("error"),
                    m: f64::NAN,
                    contraction: f64::NAN,
                    per_step_kl_ratio: f64::NAN,
                    worst_slack: f64::NAN,
                    pass: false,
                    error: Some(message),
                });
            }
        }
    }

    let outcome = SweepOutcome {
        rows,
        certificate_minima: minima
            .into_iter()
            .map(|(name, (slack, pass))| (name, slack, pass))
            .collect(),
        first_failure,
        had_runtime_error,
    };

    fs::create_dir_all(out_root)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out_root.display())))?;
    fs::write(
        out_root.join("sweep_summary.csv"),
        render_sweep_csv(&outcome),
    )
    .map_err(|e| CliError::Runtime(format!("cannot write sweep_summary.csv: {e}")))?;
    fs::write(
        out_root.join("sweep_summary.txt"),
        render_sweep_summary(&outcome),
    )
    .map_err(|e| CliError::Runtime(format!("cannot write sweep_summary.txt: {e}")))?;
    Ok(outcome)
}
