//! Command layer: configured runs, seeded sweeps and standalone geometry
//! checks, with the exit-code contract
//! `0` pass / `1` certificate failure / `2` config error / `3` numerical
//! failure.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod sweep;

use std::path::{Path, PathBuf};

use imf_core::exec::ExecMode;
use imf_core::space::StateSpaceSpec;
use imf_core::verify::check_lemma3;
use thiserror::Error;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CERTIFICATE_FAILURE: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;
pub const EXIT_NUMERICAL_FAILURE: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    /// Configuration problems: exit code 2.
    #[error("{0}")]
    Config(String),
    /// Numerical or I/O failures at run time: exit code 3.
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG_ERROR,
            CliError::Runtime(_) => EXIT_NUMERICAL_FAILURE,
        }
    }
}

fn fail(error: &CliError) -> i32 {
    eprintln!("error: {error}");
    error.exit_code()
}

fn resolve_output_dir(flag: Option<&Path>, config: Option<&config::ExperimentConfig>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    config
        .map(|c| c.output.directory.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// `run <config>`: one pipeline execution plus report files.
pub fn command_run(
    config_path: &Path,
    output_dir: Option<&Path>,
    quiet: bool,
    tolerance_override: Option<f64>,
) -> i32 {
    let config = match config::ExperimentConfig::from_path(config_path) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let out = resolve_output_dir(output_dir, Some(&config));
    let report = match pipeline::execute_run(&config, None, tolerance_override, ExecMode::default())
    {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    if let Err(e) = report::write_report(&out, &report) {
        return fail(&e);
    }
    let drift = report.max_normalization_drift();
    if drift > 1e-12 {
        eprintln!("warning: projection renormalization drift reached {drift:e}");
    }
    if !quiet {
        println!(
            "instance {}: kl {} -> {} in {} iterations; oracle residual {:.3e}; {} certificates, pass = {}",
            report.label,
            report::format_float(report.trace.initial_kl()),
            report::format_float(report.trace.final_kl()),
            report.iterations_completed,
            report.oracle_residual,
            report.certificates.len(),
            report.pass(),
        );
        println!(
            "timings: oracle {:?}, iteration {:?}, checks {:?}, total {:?}",
            report.timings.oracle,
            report.timings.iteration,
            report.timings.checks,
            report.timings.total
        );
        for certificate in &report.certificates {
            println!(
                "  certificate {}: pass = {}, min slack = {}",
                certificate.name,
                certificate.pass(),
                report::format_float(certificate.min_slack())
            );
        }
        println!("report written to {}", out.display());
    }
    if report.pass() {
        EXIT_PASS
    } else {
        EXIT_CERTIFICATE_FAILURE
    }
}

/// `sweep <config>`: independent seeded runs plus an aggregate table.
pub fn command_sweep(
    config_path: &Path,
    output_dir: Option<&Path>,
    quiet: bool,
    tolerance_override: Option<f64>,
) -> i32 {
    let config = match config::ExperimentConfig::from_path(config_path) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    if config.sweep.is_none() {
        return fail(&CliError::Config(
            "sweep command needs a [sweep] section".into(),
        ));
    }
    let out = resolve_output_dir(output_dir, Some(&config));
    let outcome = match sweep::execute_sweep(&config, tolerance_override, &out, ExecMode::default())
    {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    if !quiet {
        println!(
            "sweep over {} seeds: pass = {}",
            outcome.rows.len(),
            outcome.pass()
        );
        for (name, slack, pass) in &outcome.certificate_minima {
            println!(
                "  certificate {name}: pass = {pass}, min slack = {}",
                report::format_float(*slack)
            );
        }
        println!("aggregate written to {}", out.display());
    }
    if outcome.had_runtime_error {
        EXIT_NUMERICAL_FAILURE
    } else if outcome.pass() {
        EXIT_PASS
    } else {
        EXIT_CERTIFICATE_FAILURE
    }
}

/// `verify-geometry`: the subspace-projection certificate on a bare state
/// space, without building an instance.
pub fn command_verify_geometry(
    cardinality: usize,
    interior: usize,
    trials: usize,
    seed: u64,
    output_dir: Option<&Path>,
    quiet: bool,
    tolerance_override: Option<f64>,
) -> i32 {
    let space = match StateSpaceSpec::new(cardinality, interior) {
        Ok(s) => s,
        Err(e) => return fail(&CliError::Config(e.to_string())),
    };
    let tolerance = tolerance_override.unwrap_or(1e-10);
    let report = match check_lemma3(space, trials, seed, tolerance, ExecMode::default()) {
        Ok(r) => r,
        Err(e) => return fail(&CliError::Runtime(e.to_string())),
    };
    let out = resolve_output_dir(output_dir, None);
    if let Err(e) = std::fs::create_dir_all(&out)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out.display())))
        .and_then(|_| {
            std::fs::write(
                out.join("cert_lemma3.txt"),
                report::render_certificate(&report),
            )
            .map_err(|e| CliError::Runtime(format!("cannot write cert_lemma3.txt: {e}")))
        })
    {
        return fail(&e);
    }
    if trials == 0 && !quiet {
        eprintln!("warning: 0 trials requested, certificate passes vacuously");
    }
    if !quiet {
        println!(
            "geometry {cardinality}^{}: {} trials, pass = {}, min slack = {}",
            interior + 2,
            trials,
            report.pass(),
            report::format_float(report.min_slack())
        );
        println!("report written to {}", out.display());
    }
    if report.pass() {
        EXIT_PASS
    } else {
        EXIT_CERTIFICATE_FAILURE
    }
}
