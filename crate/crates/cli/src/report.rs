//! Deterministic report serialization. Floats are rendered with 17
//! significant digits so every value round-trips exactly, and all writers
//! emit in a fixed order: rerunning a config with the same seed produces
//! byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Duration;

use imf_core::imf::IterationTrace;
use imf_core::verify::{CertificateReport, Check, RateConstants};

use crate::CliError;

/// 17 significant digits: exact round-trip for every finite f64.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_float(text: &str) -> Result<f64, CliError> {
    match text {
        "nan" => Ok(f64::NAN),
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        other => other
            .parse::<f64>()
            .map_err(|e| CliError::Config(format!("bad float {other:?}: {e}"))),
    }
}

fn format_optional(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), format_float)
}

fn format_half_steps(half_steps: u32) -> String {
    if half_steps.is_multiple_of(2) {
        (half_steps / 2).to_string()
    } else {
        format!("{}.5", half_steps / 2)
    }
}

/// Wall-clock timings of one run; reported on the console only, never
/// serialized, so that report files stay reproducible byte for byte.
#[derive(Debug, Clone, Copy, Default)]
pub struct Timings {
    pub oracle: Duration,
    pub iteration: Duration,
    pub checks: Duration,
    pub total: Duration,
}

/// Everything one run produces.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub label: String,
    pub constants: RateConstants,
    pub trace: IterationTrace,
    pub certificates: Vec<CertificateReport>,
    pub oracle_residual: f64,
    pub oracle_iterations: usize,
    pub iterations_completed: usize,
    pub stopped_early: bool,
    pub timings: Timings,
}

impl RunReport {
    pub fn pass(&self) -> bool {
        self.certificates.iter().all(|c| c.pass())
    }

    pub fn worst_slack(&self) -> f64 {
        self.certificates
            .iter()
            .map(|c| c.min_slack())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest total-mass drift removed by renormalization after any
    /// projection.
    pub fn max_normalization_drift(&self) -> f64 {
        self.trace
            .records()
            .iter()
            .map(|r| r.normalization_drift)
            .fold(0.0, f64::max)
    }

    /// Geometric mean of the per-step divergence ratio over the integer steps
    /// that stay above the floating-point floor.
    pub fn per_step_kl_ratio(&self) -> f64 {
        let floor = 1e-15;
        let initial = self.trace.initial_kl();
        if initial <= floor {
            return f64::NAN;
        }
        let mut last = initial;
        let mut steps = 0usize;
        for (_, record) in self.trace.integer_records() {
            if record.kl_to_opt <= floor {
                break;
            }
            last = record.kl_to_opt;
            steps += 1;
        }
        if steps == 0 {
            f64::NAN
        } else {
            (last / initial).powf(1.0 / steps as f64)
        }
    }
}

pub fn render_constants(constants: &RateConstants) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "eps_q = {}", format_float(constants.eps_q));
    let _ = writeln!(out, "eps_mu = {}", format_float(constants.eps_mu));
    let _ = writeln!(out, "eps_nu = {}", format_float(constants.eps_nu));
    let _ = writeln!(out, "delta = {}", format_float(constants.delta));
    let _ = writeln!(out, "m = {}", format_float(constants.m));
    let _ = writeln!(out, "contraction = {}", format_float(constants.contraction));
    let _ = writeln!(out, "interior_count = {}", constants.interior_count);
    out
}

pub fn parse_constants(text: &str) -> Result<RateConstants, CliError> {
    let mut pairs = std::collections::BTreeMap::new();
    for line in text.lines() {
        if let Some((key, value)) = line.split_once(" = ") {
            pairs.insert(key.to_string(), value.to_string());
        }
    }
    let get = |key: &str| -> Result<f64, CliError> {
        parse_float(
            pairs
                .get(key)
                .ok_or_else(|| CliError::Config(format!("constants file misses {key}")))?,
        )
    };
    Ok(RateConstants {
        eps_q: get("eps_q")?,
        eps_mu: get("eps_mu")?,
        eps_nu: get("eps_nu")?,
        delta: get("delta")?,
        m: get("m")?,
        contraction: get("contraction")?,
        interior_count: pairs
            .get("interior_count")
            .ok_or_else(|| CliError::Config("constants file misses interior_count".into()))?
            .parse()
            .map_err(|e| CliError::Config(format!("bad interior_count: {e}")))?,
    })
}

pub const TRACE_HEADER: &str =
    "k,kl_to_opt,bound_value,min_mass,grad_LA,grad_LB,grad_LC,lemma4_slack,pl_slack";

/// One row of the plot-ready convergence table.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub half_steps: u32,
    pub kl_to_opt: f64,
    pub bound_value: Option<f64>,
    pub min_mass: f64,
    pub grad_pair: Option<f64>,
    pub grad_endpoint_pair: Option<f64>,
    pub grad_endpoint_singles: Option<f64>,
    pub lemma4_slack: Option<f64>,
    pub pl_slack: Option<f64>,
}

pub fn trace_rows(trace: &IterationTrace) -> Vec<TraceRow> {
    trace
        .records()
        .iter()
        .map(|r| TraceRow {
            half_steps: r.half_steps,
            kl_to_opt: r.kl_to_opt,
            bound_value: r.bound_value,
            min_mass: r.min_mass,
            grad_pair: r.grad.as_ref().map(|g| g.pair),
            grad_endpoint_pair: r.grad.as_ref().map(|g| g.endpoint_pair),
            grad_endpoint_singles: r.grad.as_ref().map(|g| g.endpoint_singles),
            lemma4_slack: r.decrease_slacks.as_ref().map(|s| s.full_step),
            pl_slack: r.pl_slack,
        })
        .collect()
}

pub fn render_trace(trace: &IterationTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for row in trace_rows(trace) {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            format_half_steps(row.half_steps),
            format_float(row.kl_to_opt),
            format_optional(row.bound_value),
            format_float(row.min_mass),
            format_optional(row.grad_pair),
            format_optional(row.grad_endpoint_pair),
            format_optional(row.grad_endpoint_singles),
            format_optional(row.lemma4_slack),
            format_optional(row.pl_slack),
        );
    }
    out
}

pub fn parse_trace(text: &str) -> Result<Vec<TraceRow>, CliError> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Config("empty trace file".into()))?;
    if header != TRACE_HEADER {
        return Err(CliError::Config(format!(
            "unexpected trace header {header:?}"
        )));
    }
    let parse_optional = |field: &str| -> Result<Option<f64>, CliError> {
        if field == "nan" {
            Ok(None)
        } else {
            parse_float(field).map(Some)
        }
    };
    let mut rows = Vec::new();
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(CliError::Config(format!("bad trace row {line:?}")));
        }
        let half_steps = if let Some(whole) = fields[0].strip_suffix(".5") {
            whole
                .parse::<u32>()
                .map_err(|e| CliError::Config(format!("bad step {}: {e}", fields[0])))?
                * 2
                + 1
        } else {
            fields[0]
                .parse::<u32>()
                .map_err(|e| CliError::Config(format!("bad step {}: {e}", fields[0])))?
                * 2
        };
        rows.push(TraceRow {
            half_steps,
            kl_to_opt: parse_float(fields[1])?,
            bound_value: parse_optional(fields[2])?,
            min_mass: parse_float(fields[3])?,
            grad_pair: parse_optional(fields[4])?,
            grad_endpoint_pair: parse_optional(fields[5])?,
            grad_endpoint_singles: parse_optional(fields[6])?,
            lemma4_slack: parse_optional(fields[7])?,
            pl_slack: parse_optional(fields[8])?,
        });
    }
    Ok(rows)
}

pub fn render_certificate(report: &CertificateReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "certificate = {}", report.name);
    let _ = writeln!(out, "pass = {}", report.pass());
    let _ = writeln!(out, "checks = {}", report.checks.len());
    for check in &report.checks {
        let _ = writeln!(out, "check = {}", check.name);
        let _ = writeln!(out, "lhs = {}", format_float(check.lhs));
        let _ = writeln!(out, "rhs = {}", format_float(check.rhs));
        let _ = writeln!(out, "slack = {}", format_float(check.slack));
        let _ = writeln!(out, "tolerance = {}", format_float(check.tolerance));
        let _ = writeln!(out, "check_pass = {}", check.pass);
    }
    for note in &report.notes {
        let _ = writeln!(out, "note = {note}");
    }
    out
}

pub fn parse_certificate(text: &str) -> Result<CertificateReport, CliError> {
    let mut name = String::new();
    let mut checks: Vec<Check> = Vec::new();
    let mut notes = Vec::new();
    for line in text.lines() {
        let Some((key, value)) = line.split_once(" = ") else {
            return Err(CliError::Config(format!("bad certificate line {line:?}")));
        };
        match key {
            "certificate" => name = value.to_string(),
            "pass" | "checks" => {}
            "check" => checks.push(Check {
                name: value.to_string(),
                lhs: f64::NAN,
                rhs: f64::NAN,
                slack: f64::NAN,
                tolerance: f64::NAN,
                pass: false,
            }),
            "lhs" | "rhs" | "slack" | "tolerance" | "check_pass" => {
                let check = checks
                    .last_mut()
                    .ok_or_else(|| CliError::Config("certificate field before any check".into()))?;
                match key {
                    "lhs" => check.lhs = parse_float(value)?,
                    "rhs" => check.rhs = parse_float(value)?,
                    "slack" => check.slack = parse_float(value)?,
                    "tolerance" => check.tolerance = parse_float(value)?,
                    _ => check.pass = value == "true",
                }
            }
            "note" => notes.push(value.to_string()),
            other => {
                return Err(CliError::Config(format!(
                    "unknown certificate key {other:?}"
                )))
            }
        }
    }
    Ok(CertificateReport {
        name,
        checks,
        notes,
    })
}

pub fn render_summary(report: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "instance = {}", report.label);
    let _ = writeln!(out, "pass = {}", report.pass());
    let _ = writeln!(
        out,
        "kl_initial = {}",
        format_float(report.trace.initial_kl())
    );
    let _ = writeln!(out, "kl_final = {}", format_float(report.trace.final_kl()));
    let _ = writeln!(
        out,
        "iterations_completed = {}",
        report.iterations_completed
    );
    let _ = writeln!(out, "stopped_early = {}", report.stopped_early);
    let _ = writeln!(
        out,
        "oracle_residual = {}",
        format_float(report.oracle_residual)
    );
    let _ = writeln!(out, "oracle_iterations = {}", report.oracle_iterations);
    let _ = writeln!(
        out,
        "monotonicity_slack = {}",
        format_float(report.trace.monotonicity_slack())
    );
    let _ = writeln!(
        out,
        "min_mass_after_start = {}",
        format_float(report.trace.min_mass_after_start())
    );
    let _ = writeln!(
        out,
        "max_normalization_drift = {}",
        format_float(report.max_normalization_drift())
    );
    let _ = writeln!(
        out,
        "per_step_kl_ratio = {}",
        format_float(report.per_step_kl_ratio())
    );
    let _ = writeln!(out, "m = {}", format_float(report.constants.m));
    let _ = writeln!(
        out,
        "contraction = {}",
        format_float(report.constants.contraction)
    );
    for certificate in &report.certificates {
        let _ = writeln!(
            out,
            "certificate = {} pass = {} min_slack = {}",
            certificate.name,
            certificate.pass(),
            format_float(certificate.min_slack())
        );
    }
    out
}

/// Writes the full deterministic report set into `dir`.
pub fn write_report(dir: &Path, report: &RunReport) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let write = |name: &str, contents: String| -> Result<(), CliError> {
        fs::write(dir.join(name), contents)
            .map_err(|e| CliError::Runtime(format!("cannot write {name}: {e}")))
    };
    write("constants.txt", render_constants(&report.constants))?;
    write("trace.csv", render_trace(&report.trace))?;
    for certificate in &report.certificates {
        write(
            &format!("cert_{}.txt", certificate.name),
            render_certificate(certificate),
        )?;
    }
    write("summary.txt", render_summary(report))?;
    Ok(())
}
