//! Ground-truth solver: the static endpoint problem by alternating scaling,
//! lifted through the bridge conditional, plus an independent full-tensor
//! minimizer used as a cross-check.

use crate::error::{Error, Result};
use crate::process::{endpoint_matrix, init_p0, BridgeConditional, Coupling, MarginalPair};
use crate::subspace::{build_constraint_operator, SubspaceId};
use crate::tensor::JointDistribution;
use crate::verify::kl_gradient;

/// Scaling factors outside this window trigger the log-domain fallback.
const SCALING_WINDOW: (f64, f64) = (1e-100, 1e100);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SinkhornConfig {
    /// Maximum absolute row/column marginal violation accepted as converged.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SinkhornConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-13,
            max_iterations: 100_000,
        }
    }
}

impl SinkhornConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(Error::Validation(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Validation("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// Converged static coupling together with its scaling certificate: the
/// output equals `diag(row_scaling) · q01 · diag(col_scaling)`.
#[derive(Debug, Clone)]
pub struct StaticSolution {
    pub coupling: Coupling,
    pub row_scaling: Vec<f64>,
    pub col_scaling: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub used_log_domain: bool,
}

fn marginal_violation(matrix: &[f64], k: usize, marginals: &MarginalPair) -> f64 {
    let mut worst = 0.0f64;
    for a in 0..k {
        let row: f64 = matrix[a * k..(a + 1) * k].iter().sum();
        worst = worst.max((row - marginals.mu()[a]).abs());
    }
    for b in 0..k {
        let col: f64 = (0..k).map(|a| matrix[a * k + b]).sum();
        worst = worst.max((col - marginals.nu()[b]).abs());
    }
    worst
}

/// Minimizes `KL(c ‖ q01)` over couplings with the prescribed marginals by
/// alternating row and column scaling.
pub fn solve_static(
    q01: &[f64],
    marginals: &MarginalPair,
    cfg: &SinkhornConfig,
) -> Result<StaticSolution> {
    solve_static_from(q01, marginals, cfg, None)
}

/// As [`solve_static`] but starting from the given positive row scalings,
/// used to confirm that the fixed point does not depend on the start.
pub fn solve_static_from(
    q01: &[f64],
    marginals: &MarginalPair,
    cfg: &SinkhornConfig,
    initial_row_scaling: Option<&[f64]>,
) -> Result<StaticSolution> {
    cfg.validate()?;
    let k = marginals.cardinality();
    if q01.len() != k * k {
        return Err(Error::Domain(format!(
            "endpoint matrix has {} entries, expected {}",
            q01.len(),
            k * k
        )));
    }
    for (i, &x) in q01.iter().enumerate() {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::Validation(format!(
                "endpoint matrix entry ({},{}) = {x} must be strictly positive",
                i / k,
                i % k
            )));
        }
    }

    let mut u = match initial_row_scaling {
        Some(u0) => {
            if u0.len() != k || u0.iter().any(|&x| !x.is_finite() || x <= 0.0) {
                return Err(Error::Validation(
                    "initial row scaling must be a positive vector of length K".into(),
                ));
            }
            u0.to_vec()
        }
        None => vec![1.0; k],
    };
    let mut v = vec![1.0; k];

    let mut residual = f64::INFINITY;
    for iteration in 1..=cfg.max_iterations {
        for a in 0..k {
            let mass: f64 = (0..k).map(|b| q01[a * k + b] * v[b]).sum();
            u[a] = marginals.mu()[a] / mass;
        }
        for b in 0..k {
            let mass: f64 = (0..k).map(|a| q01[a * k + b] * u[a]).sum();
            v[b] = marginals.nu()[b] / mass;
        }

        let out_of_window = u
            .iter()
            .chain(v.iter())
            .any(|&x| !(SCALING_WINDOW.0..=SCALING_WINDOW.1).contains(&x));
        if out_of_window {
            return solve_static_log_domain(q01, marginals, cfg);
        }

        let matrix: Vec<f64> = (0..k * k).map(|i| u[i / k] * q01[i] * v[i % k]).collect();
        residual = marginal_violation(&matrix, k, marginals);
        if residual <= cfg.tolerance {
            return Ok(StaticSolution {
                coupling: Coupling::new(matrix, marginals)?,
                row_scaling: u,
                col_scaling: v,
                residual,
                iterations: iteration,
                used_log_domain: false,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "static endpoint scaling".into(),
        iterations: cfg.max_iterations,
        residual,
    })
}

fn log_sum_exp(terms: impl Iterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

fn solve_static_log_domain(
    q01: &[f64],
    marginals: &MarginalPair,
    cfg: &SinkhornConfig,
) -> Result<StaticSolution> {
    let k = marginals.cardinality();
    let log_q: Vec<f64> = q01.iter().map(|&x| x.ln()).collect();
    let log_mu: Vec<f64> = marginals.mu().iter().map(|&x| x.ln()).collect();
    let log_nu: Vec<f64> = marginals.nu().iter().map(|&x| x.ln()).collect();
    let mut f = vec![0.0; k]; // log row scalings
    let mut g = vec![0.0; k]; // log column scalings

    let mut residual = f64::INFINITY;
    for iteration in 1..=cfg.max_iterations {
        for a in 0..k {
            f[a] = log_mu[a] - log_sum_exp((0..k).map(|b| log_q[a * k + b] + g[b]));
        }
        for b in 0..k {
            g[b] = log_nu[b] - log_sum_exp((0..k).map(|a| log_q[a * k + b] + f[a]));
        }
        let matrix: Vec<f64> = (0..k * k)
            .map(|i| (f[i / k] + log_q[i] + g[i % k]).exp())
            .collect();
        residual = marginal_violation(&matrix, k, marginals);
        if residual <= cfg.tolerance {
            return Ok(StaticSolution {
                coupling: Coupling::new(matrix, marginals)?,
                row_scaling: f.iter().map(|&x| x.exp()).collect(),
                col_scaling: g.iter().map(|&x| x.exp()).collect(),
                residual,
                iterations: iteration,
                used_log_domain: true,
            });
        }
    }
    Err(Error::NonConvergence {
        what: "static endpoint scaling (log domain)".into(),
        iterations: cfg.max_iterations,
        residual,
    })
}

/// Lifts a static coupling to the full trajectory tensor through the bridge
/// conditional.
pub fn lift_static(coupling: &Coupling, bridge: &BridgeConditional) -> Result<JointDistribution> {
    init_p0(bridge, coupling)
}

/// The oracle solution: static coupling, its lift, and convergence data.
#[derive(Debug, Clone)]
pub struct OracleSolution {
    pub static_coupling: Coupling,
    pub lifted: JointDistribution,
    pub residual: f64,
    pub iterations_used: usize,
}

/// Solves the bridge problem for reference tensor `q` and endpoint marginals:
/// static scaling on the endpoint matrix, then lifting.
pub fn solve_bridge(
    q: &JointDistribution,
    bridge: &BridgeConditional,
    marginals: &MarginalPair,
    cfg: &SinkhornConfig,
) -> Result<OracleSolution> {
    let q01 = endpoint_matrix(q);
    let solution = solve_static(&q01, marginals, cfg)?;
    let lifted = lift_static(&solution.coupling, bridge)?;
    Ok(OracleSolution {
        static_coupling: solution.coupling,
        lifted,
        residual: solution.residual,
        iterations_used: solution.iterations,
    })
}

/// Settings for the independent full-tensor minimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceConfig {
    /// Mirror step size in (0, 1); 1 would collapse into plain proportional
    /// fitting of the reference.
    pub step: f64,
    /// Stationarity target: norm of the gradient projected onto the
    /// endpoint-singles subspace.
    pub stationarity_tol: f64,
    pub max_outer_iterations: usize,
    pub projection_tol: f64,
    pub max_projection_iterations: usize,
}

impl Default for BruteForceConfig {
    fn default() -> Self {
        Self {
            step: 0.5,
            stationarity_tol: 1e-10,
            max_outer_iterations: 20_000,
            projection_tol: 1e-14,
            max_projection_iterations: 2_000,
        }
    }
}

/// Minimizes `KL(p ‖ q)` over tensors with the prescribed endpoint marginals
/// directly on the full tensor: entropic mirror steps toward `q` alternated
/// with proportional fitting of the two endpoint marginals. Never touches the
/// bridge conditional, so it cross-checks the lifted static solution.
///
/// Restricted to desk-scale instances (cardinality ≤ 3, interior count ≤ 2).
pub fn brute_force_opt(
    q: &JointDistribution,
    marginals: &MarginalPair,
    cfg: &BruteForceConfig,
) -> Result<JointDistribution> {
    let space = q.space();
    if space.cardinality() > 3 || space.interior_count() > 2 {
        return Err(Error::Domain(format!(
            "brute-force minimizer is limited to cardinality ≤ 3 and interior count ≤ 2, got {}^{}",
            space.cardinality(),
            space.time_points()
        )));
    }
    if marginals.cardinality() != space.cardinality() {
        return Err(Error::Domain(
            "marginal pair cardinality does not match the state space".into(),
        ));
    }
    if !(0.0..1.0).contains(&cfg.step) || cfg.step == 0.0 {
        return Err(Error::Validation(format!(
            "mirror step must lie in (0, 1), got {}",
            cfg.step
        )));
    }
    if q.min_value() <= 0.0 {
        return Err(Error::Validation(
            "reference tensor must be strictly positive".into(),
        ));
    }

    let singles = build_constraint_operator(space, SubspaceId::EndpointSinglesZero)?;
    let last = space.last_time();
    let k = space.cardinality();

    let mut values = vec![1.0 / space.num_cells() as f64; space.num_cells()];
    let mut residual = f64::INFINITY;
    for _outer in 0..cfg.max_outer_iterations {
        // Entropic mirror step toward q: p ← p^(1-step) q^step, normalized.
        let mut sum = 0.0;
        for (v, &qv) in values.iter_mut().zip(q.values()) {
            *v = v.powf(1.0 - cfg.step) * qv.powf(cfg.step);
            sum += *v;
        }
        for v in &mut values {
            *v /= sum;
        }

        // Proportional fitting of the two endpoint marginals.
        let mut fitted = false;
        for _inner in 0..cfg.max_projection_iterations {
            let p = JointDistribution::new(space, values.clone())?;
            let head = p.marginal(&[0])?;
            let strides = space.strides();
            for (idx, v) in values.iter_mut().enumerate() {
                let a = idx / strides[0] % k;
                *v *= marginals.mu()[a] / head.values()[a];
            }
            let p = JointDistribution::new(space, values.clone())?;
            let tail = p.marginal(&[last])?;
            for (idx, v) in values.iter_mut().enumerate() {
                let b = idx % k;
                *v *= marginals.nu()[b] / tail.values()[b];
            }
            let p = JointDistribution::new(space, values.clone())?;
            let head_violation: f64 = p
                .marginal(&[0])?
                .values()
                .iter()
                .zip(marginals.mu())
                .map(|(got, want)| (got - want).abs())
                .fold(0.0, f64::max);
            if head_violation <= cfg.projection_tol {
                fitted = true;
                break;
            }
        }
        if !fitted {
            return Err(Error::NonConvergence {
                what: "endpoint-marginal fitting inside the brute-force minimizer".into(),
                iterations: cfg.max_projection_iterations,
                residual: f64::NAN,
            });
        }

        let p = JointDistribution::new(space, values.clone())?;
        let gradient = kl_gradient(&p, q)?;
        residual = singles.project(&gradient)?.norm();
        if residual <= cfg.stationarity_tol {
            return Ok(p);
        }
    }
    Err(Error::NonConvergence {
        what: "brute-force minimizer".into(),
        iterations: cfg.max_outer_iterations,
        residual,
    })
}
