//! One configured run: instance → oracle → fitting loop → enabled
//! certificates.

use std::time::Instant;

use imf_core::exec::{stream_seed, ExecMode};
use imf_core::imf::{markov_projection, reciprocal_projection, run_imf, ImfConfig};
use imf_core::oracle::{solve_bridge, SinkhornConfig};
use imf_core::process::{
    bridge_conditional, build_markov_joint, endpoint_matrix, independent_coupling, init_p0,
    sample_instance, Coupling, GeneratorSpec, Instance, MarginalPair, MarkovSpec,
};
use imf_core::space::StateSpaceSpec;
use imf_core::subspace::SubspaceOps;
use imf_core::verify::{
    certify_decrease, certify_gradients, certify_mass_bound, certify_rate_bound, certify_spectrum,
    check_lemma3, compute_constants,
};

use crate::config::{CouplingChoice, ExperimentConfig};
use crate::report::{RunReport, Timings};
use crate::CliError;

/// Absolute slack tolerances pinned per certificate.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub mass: f64,
    pub lemma3: f64,
    pub decrease: f64,
    pub rate_bound: f64,
    pub pl: f64,
    pub spectrum: f64,
    pub fd_relative: f64,
    pub operators: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mass: 1e-13,
            lemma3: 1e-10,
            decrease: 1e-10,
            rate_bound: 1e-12,
            pl: 1e-10,
            spectrum: 1e-13,
            fd_relative: 1e-6,
            operators: 1e-10,
        }
    }
}

impl Tolerances {
    /// A single override replaces every certificate tolerance.
    pub fn overridden(value: Option<f64>) -> Self {
        match value {
            None => Self::default(),
            Some(t) => Self {
                mass: t,
                lemma3: t,
                decrease: t,
                rate_bound: t,
                pl: t,
                spectrum: t,
                fd_relative: t,
                operators: t,
            },
        }
    }
}

fn config_err(e: imf_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: imf_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Builds the problem instance named by the config, applying a sweep seed
/// override to the generator.
pub fn prepare_instance(
    config: &ExperimentConfig,
    seed_override: Option<u64>,
) -> Result<(Instance, String), CliError> {
    if let Some(generator) = &config.instance.generator {
        let seed = seed_override.or(generator.seed).ok_or_else(|| {
            CliError::Config("generator instance needs a seed (none given, no sweep)".into())
        })?;
        let spec = GeneratorSpec {
            cardinality: generator.cardinality,
            interior_count: generator.interior_count,
            dirichlet_concentration: generator.dirichlet_concentration,
            eps_floor: generator.eps_floor,
            seed,
        };
        let instance = sample_instance(&spec).map_err(config_err)?;
        let label = format!(
            "K{}N{}s{}",
            generator.cardinality, generator.interior_count, seed
        );
        Ok((instance, label))
    } else {
        let explicit = config
            .instance
            .explicit
            .as_ref()
            .expect("validated: exactly one instance kind");
        if seed_override.is_some() {
            return Err(CliError::Config(
                "sweep seeds apply only to generator instances".into(),
            ));
        }
        let cardinality = explicit.initial.len();
        let steps = explicit.transitions.len();
        if steps < 2 {
            return Err(CliError::Config(format!(
                "need at least 2 transition matrices (one interior time point), got {steps}"
            )));
        }
        let space = StateSpaceSpec::new(cardinality, steps - 1).map_err(config_err)?;
        let transitions: Vec<Vec<f64>> = explicit
            .transitions
            .iter()
            .map(|matrix| matrix.iter().flatten().copied().collect())
            .collect();
        let markov =
            MarkovSpec::new(space, explicit.initial.clone(), transitions).map_err(config_err)?;
        let marginals =
            MarginalPair::new(explicit.mu.clone(), explicit.nu.clone()).map_err(config_err)?;
        Ok((
            Instance { markov, marginals },
            format!("explicitK{cardinality}N{}", steps - 1),
        ))
    }
}

fn build_coupling(
    choice: &CouplingChoice,
    marginals: &MarginalPair,
    q: &imf_core::tensor::JointDistribution,
) -> Result<Coupling, CliError> {
    match choice {
        CouplingChoice::Named(name) if name == "independent" => {
            Ok(independent_coupling(marginals))
        }
        CouplingChoice::Named(name) if name == "reference" => {
            Coupling::new(endpoint_matrix(q), marginals).map_err(|e| {
                CliError::Config(format!(
                    "coupling \"reference\" needs the instance marginals to equal the reference process's own endpoint marginals: {e}"
                ))
            })
        }
        CouplingChoice::Named(name) => Err(CliError::Config(format!(
            "unknown coupling \"{name}\""
        ))),
        CouplingChoice::Matrix(rows) => {
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            Coupling::new(flat, marginals).map_err(config_err)
        }
    }
}

/// Runs the full pipeline for one instance and returns the in-memory report.
pub fn execute_run(
    config: &ExperimentConfig,
    seed_override: Option<u64>,
    tolerance_override: Option<f64>,
    mode: ExecMode,
) -> Result<RunReport, CliError> {
    let total_start = Instant::now();
    let tolerances = Tolerances::overridden(tolerance_override);

    let (instance, label) = prepare_instance(config, seed_override)?;
    let q = build_markov_joint(&instance.markov).map_err(config_err)?;
    let bridge = bridge_conditional(&q).map_err(runtime_err)?;
    let constants = compute_constants(&bridge, &instance.marginals);
    let eta = build_coupling(&config.instance.coupling, &instance.marginals, &q)?;
    let p0 = init_p0(&bridge, &eta).map_err(config_err)?;

    let oracle_start = Instant::now();
    let sinkhorn = SinkhornConfig {
        tolerance: config.oracle.tolerance,
        max_iterations: config.oracle.max_iterations,
    };
    let oracle = solve_bridge(&q, &bridge, &instance.marginals, &sinkhorn).map_err(runtime_err)?;
    let oracle_time = oracle_start.elapsed();

    let imf_start = Instant::now();
    let imf_cfg = ImfConfig {
        max_iterations: config.imf.max_iterations,
        stop_kl: config.imf.stop_kl,
        record_gradients: config.imf.record_gradients,
    };
    let outcome =
        run_imf(&p0, &bridge, &oracle.lifted, &constants, &imf_cfg).map_err(runtime_err)?;
    let imf_time = imf_start.elapsed();

    let checks_start = Instant::now();
    // Explicit checks.seed wins; otherwise derive from the effective instance
    // seed so sweep runs draw independent trials.
    let check_seed = config.checks.seed.unwrap_or_else(|| {
        seed_override
            .or(config.instance.generator.as_ref().and_then(|g| g.seed))
            .map(|s| stream_seed(s, 0xC0DE))
            .unwrap_or(0)
    });
    let mut certificates = Vec::new();
    if config.checks.lemma2 {
        certificates.push(certify_mass_bound(
            &outcome.trace,
            &constants,
            tolerances.mass,
        ));
    }
    if config.checks.lemma3 {
        certificates.push(
            check_lemma3(
                q.space(),
                config.checks.lemma3_trials,
                stream_seed(check_seed, 1),
                tolerances.lemma3,
                mode,
            )
            .map_err(runtime_err)?,
        );
    }
    if config.checks.lemma4 {
        certificates.push(certify_decrease(&outcome.trace, tolerances.decrease));
    }
    if config.checks.theorem1 {
        certificates.push(certify_rate_bound(
            &outcome.trace,
            tolerances.rate_bound,
            tolerances.pl,
        ));
    }
    if config.checks.spectrum {
        certificates.push(certify_spectrum(
            &outcome.trace,
            &outcome.final_iterate,
            &constants,
            tolerances.spectrum,
        ));
    }
    if config.checks.gradients {
        let ops = SubspaceOps::build(q.space()).map_err(runtime_err)?;
        // Probe the numerics at the first full iterate.
        let p1 = reciprocal_projection(&markov_projection(&p0).map_err(runtime_err)?, &bridge)
            .map_err(runtime_err)?;
        certificates.push(
            certify_gradients(
                &p1,
                &oracle.lifted,
                &ops,
                &outcome.trace,
                config.checks.gradient_directions,
                stream_seed(check_seed, 2),
                tolerances.fd_relative,
                tolerances.operators,
                mode,
            )
            .map_err(runtime_err)?,
        );
    }
    let checks_time = checks_start.elapsed();

    Ok(RunReport {
        label,
        constants,
        trace: outcome.trace,
        certificates,
        oracle_residual: oracle.residual,
        oracle_iterations: oracle.iterations_used,
        iterations_completed: outcome.iterations_completed,
        stopped_early: outcome.stopped_early,
        timings: Timings {
            oracle: oracle_time,
            iteration: imf_time,
            checks: checks_time,
            total: total_start.elapsed(),
        },
    })
}
