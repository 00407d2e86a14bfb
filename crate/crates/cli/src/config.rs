//! Experiment configuration: a single TOML file with nested sections whose
//! field names mirror the library types.

use std::path::PathBuf;

use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceConfig,
    #[serde(default)]
    pub imf: ImfSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub checks: ChecksSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    #[serde(default)]
    pub explicit: Option<ExplicitInstance>,
    #[serde(default)]
    pub generator: Option<GeneratorSection>,
    #[serde(default)]
    pub coupling: CouplingChoice,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExplicitInstance {
    pub initial: Vec<f64>,
    /// One row-major `K×K` matrix per step, written as nested arrays.
    pub transitions: Vec<Vec<Vec<f64>>>,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSection {
    pub cardinality: usize,
    pub interior_count: usize,
    #[serde(default = "default_concentration")]
    pub dirichlet_concentration: f64,
    #[serde(default = "default_eps_floor")]
    pub eps_floor: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// Choice of the endpoint coupling for the initializer.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum CouplingChoice {
    /// `"independent"` (the product of the marginals) or `"reference"` (the
    /// reference process's own endpoint coupling; requires matching
    /// marginals).
    Named(String),
    /// Explicit `K×K` matrix.
    Matrix(Vec<Vec<f64>>),
}

impl Default for CouplingChoice {
    fn default() -> Self {
        CouplingChoice::Named("independent".into())
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ImfSection {
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_stop_kl")]
    pub stop_kl: f64,
    #[serde(default = "default_true")]
    pub record_gradients: bool,
}

impl Default for ImfSection {
    fn default() -> Self {
        Self {
            max_iterations: default_max_iterations(),
            stop_kl: default_stop_kl(),
            record_gradients: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "default_oracle_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_oracle_iterations")]
    pub max_iterations: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            tolerance: default_oracle_tolerance(),
            max_iterations: default_oracle_iterations(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ChecksSection {
    #[serde(default = "default_true")]
    pub lemma2: bool,
    #[serde(default = "default_true")]
    pub lemma3: bool,
    #[serde(default = "default_lemma3_trials")]
    pub lemma3_trials: usize,
    #[serde(default = "default_true")]
    pub lemma4: bool,
    #[serde(default = "default_true")]
    pub theorem1: bool,
    #[serde(default = "default_true")]
    pub spectrum: bool,
    #[serde(default = "default_true")]
    pub gradients: bool,
    #[serde(default = "default_gradient_directions")]
    pub gradient_directions: usize,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for ChecksSection {
    fn default() -> Self {
        Self {
            lemma2: true,
            lemma3: true,
            lemma3_trials: default_lemma3_trials(),
            lemma4: true,
            theorem1: true,
            spectrum: true,
            gradients: true,
            gradient_directions: default_gradient_directions(),
            seed: None,
        }
    }
}

impl ChecksSection {
    pub fn any_randomized(&self) -> bool {
        (self.lemma3 && self.lemma3_trials > 0) || self.gradients
    }

    pub fn any_enabled(&self) -> bool {
        self.lemma2
            || self.lemma3
            || self.lemma4
            || self.theorem1
            || self.spectrum
            || self.gradients
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_output_directory")]
    pub directory: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: default_output_directory(),
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default)]
    pub seed_start: Option<u64>,
    #[serde(default)]
    pub seed_count: Option<usize>,
}

fn default_concentration() -> f64 {
    1.0
}
fn default_eps_floor() -> f64 {
    1e-3
}
fn default_max_iterations() -> usize {
    100
}
fn default_stop_kl() -> f64 {
    1e-14
}
fn default_true() -> bool {
    true
}
fn default_oracle_tolerance() -> f64 {
    1e-13
}
fn default_oracle_iterations() -> usize {
    100_000
}
fn default_lemma3_trials() -> usize {
    1000
}
fn default_gradient_directions() -> usize {
    20
}
fn default_output_directory() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<String> {
    vec!["text".into()]
}

impl ExperimentConfig {
    pub fn from_path(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let config: ExperimentConfig = toml::from_str(text)
            .map_err(|e| CliError::Config(format!("config parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        match (&self.instance.explicit, &self.instance.generator) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "exactly one of instance.explicit and instance.generator must be present, got both"
                        .into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "exactly one of instance.explicit and instance.generator must be present, got neither"
                        .into(),
                ))
            }
            _ => {}
        }
        if let CouplingChoice::Named(name) = &self.instance.coupling {
            if name != "independent" && name != "reference" {
                return Err(CliError::Config(format!(
                    "coupling must be \"independent\", \"reference\" or an explicit matrix, got \"{name}\""
                )));
            }
        }
        if let Some(generator) = &self.instance.generator {
            if generator.seed.is_none() && self.sweep.is_none() {
                return Err(CliError::Config(
                    "instance.generator.seed is required (no sweep provides seeds)".into(),
                ));
            }
        }
        if self.checks.any_randomized() && self.base_check_seed().is_none() && self.sweep.is_none()
        {
            return Err(CliError::Config(
                "a seed is required when randomized checks are enabled: set checks.seed or use a generator instance"
                    .into(),
            ));
        }
        if self.imf.max_iterations < 1 {
            return Err(CliError::Config(
                "imf.max_iterations must be at least 1".into(),
            ));
        }
        if !self.imf.stop_kl.is_finite() || self.imf.stop_kl < 0.0 {
            return Err(CliError::Config("imf.stop_kl must be nonnegative".into()));
        }
        if !self.oracle.tolerance.is_finite() || self.oracle.tolerance <= 0.0 {
            return Err(CliError::Config("oracle.tolerance must be positive".into()));
        }
        for format in &self.output.formats {
            if format != "text" {
                return Err(CliError::Config(format!(
                    "unsupported output format \"{format}\" (supported: \"text\")"
                )));
            }
        }
        if let Some(sweep) = &self.sweep {
            if self.instance.generator.is_none() {
                return Err(CliError::Config(
                    "sweep requires a generator instance".into(),
                ));
            }
            let has_list = sweep.seeds.as_ref().is_some_and(|s| !s.is_empty());
            let has_range = sweep.seed_count.unwrap_or(0) > 0;
            if !has_list && !has_range {
                return Err(CliError::Config(
                    "sweep needs a nonempty seed list or a positive seed_count".into(),
                ));
            }
        }
        Ok(())
    }

    /// Root seed for randomized checks: explicit `checks.seed`, else derived
    /// from the instance seed.
    pub fn base_check_seed(&self) -> Option<u64> {
        self.checks.seed.or_else(|| {
            self.instance
                .generator
                .as_ref()
                .and_then(|g| g.seed)
                .map(|s| imf_core::exec::stream_seed(s, 0xC0DE))
        })
    }

    /// Seeds of a sweep in deterministic order.
    pub fn sweep_seeds(&self) -> Vec<u64> {
        match &self.sweep {
            None => Vec::new(),
            Some(sweep) => {
                let mut seeds = sweep.seeds.clone().unwrap_or_default();
                if let (Some(start), Some(count)) = (sweep.seed_start, sweep.seed_count) {
                    seeds.extend((0..count as u64).map(|i| start + i));
                } else if let Some(count) = sweep.seed_count {
                    seeds.extend(0..count as u64);
                }
                seeds
            }
        }
    }
}
