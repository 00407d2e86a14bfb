//! The alternating fitting iteration: Markov projection, reciprocal
//! projection, and the loop with full diagnostic capture.
//!
//! Half-step indexing: step `k + 1/2` is the Markov projection of step `k`,
//! step `k + 1` the reciprocal projection of step `k + 1/2`.

use crate::error::{Error, Result};
use crate::process::{endpoint_matrix, BridgeConditional};
use crate::subspace::SubspaceOps;
use crate::tensor::{kl_divergence, JointDistribution};
use crate::verify::{kl_gradient, RateConstants};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImfConfig {
    pub max_iterations: usize,
    /// Halt once the divergence to the optimum drops below this value.
    /// Zero disables the rule and the loop always runs `max_iterations`.
    pub stop_kl: f64,
    pub record_gradients: bool,
}

impl Default for ImfConfig {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            stop_kl: 1e-14,
            record_gradients: true,
        }
    }
}

impl ImfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::Validation(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !self.stop_kl.is_finite() || self.stop_kl < 0.0 {
            return Err(Error::Validation(format!(
                "stop_kl must be finite and nonnegative, got {}",
                self.stop_kl
            )));
        }
        Ok(())
    }
}

/// Norms of the divergence gradient projected onto the three constraint
/// subspaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientNorms {
    /// Projection onto the subspace with vanishing consecutive-pair marginals.
    pub pair: f64,
    /// Projection onto the subspace with vanishing endpoint-pair marginal.
    pub endpoint_pair: f64,
    /// Projection onto the subspace with vanishing endpoint singles.
    pub endpoint_singles: f64,
}

/// Slack of the per-step decrease inequalities at one integer step `k`:
/// the full-step bound `f(p_k) - f(p_{k+1}) ≥ (m³/4)·‖∇f(p_k)‖²` on the
/// endpoint-singles subspace, and the two half-step bounds with constant
/// `m/2` on the pair and endpoint-pair subspaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecreaseSlacks {
    pub full_step: f64,
    pub markov_half: f64,
    pub reciprocal_half: f64,
}

/// Diagnostics for one recorded half-step.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// Step index in units of one half: 0, 1, 2, … for steps 0, 1/2, 1, …
    pub half_steps: u32,
    pub kl_to_opt: f64,
    /// Divergence drop relative to the previous record (zero at step 0).
    pub kl_decrement: f64,
    pub min_mass: f64,
    pub max_mass: f64,
    /// Total-mass drift removed by renormalization after the projection.
    pub normalization_drift: f64,
    /// Euclidean distance to the optimum.
    pub dist_to_opt: f64,
    pub grad: Option<GradientNorms>,
    /// Rate-bound value `contraction^(k-1) · KL(p_0 ‖ p*)` at integer `k ≥ 1`.
    pub bound_value: Option<f64>,
    /// Gradient-domination slack `‖∇f‖²_{singles} - f` at integer `k ≥ 1`.
    pub pl_slack: Option<f64>,
    pub decrease_slacks: Option<DecreaseSlacks>,
}

impl TraceRecord {
    /// Step index as a half-integer.
    pub fn step(&self) -> f64 {
        f64::from(self.half_steps) / 2.0
    }

    pub fn is_integer_step(&self) -> bool {
        self.half_steps.is_multiple_of(2)
    }
}

/// Per-half-step diagnostics of one fitting run.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn initial_kl(&self) -> f64 {
        self.records.first().map_or(0.0, |r| r.kl_to_opt)
    }

    pub fn final_kl(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.kl_to_opt)
    }

    /// Integer-step records with their step index, skipping step 0.
    pub fn integer_records(&self) -> impl Iterator<Item = (usize, &TraceRecord)> {
        self.records
            .iter()
            .filter(|r| r.half_steps > 0 && r.is_integer_step())
            .map(|r| ((r.half_steps / 2) as usize, r))
    }

    /// Smallest divergence drop between consecutive records; nonnegative (to
    /// roundoff) because both projections are divergence minimizers.
    pub fn monotonicity_slack(&self) -> f64 {
        self.records
            .windows(2)
            .map(|w| w[0].kl_to_opt - w[1].kl_to_opt)
            .fold(f64::INFINITY, f64::min)
    }

    /// Smallest trajectory mass over all recorded steps from 1/2 on.
    pub fn min_mass_after_start(&self) -> f64 {
        self.records
            .iter()
            .filter(|r| r.half_steps >= 1)
            .map(|r| r.min_mass)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Result of a fitting run.
#[derive(Debug, Clone)]
pub struct ImfOutcome {
    pub trace: IterationTrace,
    pub final_iterate: JointDistribution,
    pub iterations_completed: usize,
    pub stopped_early: bool,
}

/// Replaces `p` by the Markov process with the same initial law and the same
/// consecutive-pair marginals. Computed from pairwise marginals only.
pub fn markov_projection(p: &JointDistribution) -> Result<JointDistribution> {
    markov_projection_with_drift(p).map(|(q, _)| q)
}

pub fn markov_projection_with_drift(p: &JointDistribution) -> Result<(JointDistribution, f64)> {
    let space = p.space();
    let k = space.cardinality();
    let t = space.time_points();
    let strides = space.strides();

    let initial = p.marginal(&[0])?;
    let mut step_conditionals: Vec<Vec<f64>> = Vec::with_capacity(t - 1);
    for n in 0..t - 1 {
        let pair = p.marginal(&[n, n + 1])?;
        let mut conditional = pair.values().to_vec();
        for a in 0..k {
            let mass: f64 = conditional[a * k..(a + 1) * k].iter().sum();
            if mass <= 0.0 {
                return Err(Error::SingularConditioning(format!(
                    "time marginal at t{n}, state {a}"
                )));
            }
            for c in &mut conditional[a * k..(a + 1) * k] {
                *c /= mass;
            }
        }
        step_conditionals.push(conditional);
    }

    let mut values = vec![0.0; space.num_cells()];
    let mut sum = 0.0;
    for (idx, slot) in values.iter_mut().enumerate() {
        let mut prev = idx / strides[0] % k;
        let mut mass = initial.values()[prev];
        for (n, conditional) in step_conditionals.iter().enumerate() {
            let next = idx / strides[n + 1] % k;
            mass *= conditional[prev * k + next];
            prev = next;
        }
        *slot = mass;
        sum += mass;
    }
    let drift = (sum - 1.0).abs();
    for v in &mut values {
        *v /= sum;
    }
    Ok((JointDistribution::new(space, values)?, drift))
}

/// Replaces the interior conditional of `p` by the bridge while keeping its
/// endpoint coupling.
pub fn reciprocal_projection(
    p: &JointDistribution,
    bridge: &BridgeConditional,
) -> Result<JointDistribution> {
    reciprocal_projection_with_drift(p, bridge).map(|(q, _)| q)
}

pub fn reciprocal_projection_with_drift(
    p: &JointDistribution,
    bridge: &BridgeConditional,
) -> Result<(JointDistribution, f64)> {
    let space = p.space();
    if space != bridge.space() {
        return Err(Error::Domain(
            "distribution and bridge live on different state spaces".into(),
        ));
    }
    let k = space.cardinality();
    let endpoints = endpoint_matrix(p);
    let mut values = vec![0.0; space.num_cells()];
    let mut sum = 0.0;
    for (idx, slot) in values.iter_mut().enumerate() {
        let (x0, x1, path) = bridge.split_cell(idx);
        let mass = bridge.value(x0, x1, path) * endpoints[x0 * k + x1];
        *slot = mass;
        sum += mass;
    }
    let drift = (sum - 1.0).abs();
    for v in &mut values {
        *v /= sum;
    }
    Ok((JointDistribution::new(space, values)?, drift))
}

fn gradient_norms(
    p: &JointDistribution,
    opt: &JointDistribution,
    ops: &SubspaceOps,
) -> Result<GradientNorms> {
    let gradient = kl_gradient(p, opt)?;
    Ok(GradientNorms {
        pair: ops.pair.project(&gradient)?.norm(),
        endpoint_pair: ops.endpoint_pair.project(&gradient)?.norm(),
        endpoint_singles: ops.endpoint_singles.project(&gradient)?.norm(),
    })
}

fn base_record(
    half_steps: u32,
    p: &JointDistribution,
    opt: &JointDistribution,
    kl: f64,
    previous_kl: Option<f64>,
    drift: f64,
) -> Result<TraceRecord> {
    Ok(TraceRecord {
        half_steps,
        kl_to_opt: kl,
        kl_decrement: previous_kl.map_or(0.0, |prev| prev - kl),
        min_mass: p.min_value(),
        max_mass: p.max_value(),
        normalization_drift: drift,
        dist_to_opt: p.difference(opt)?.norm(),
        grad: None,
        bound_value: None,
        pl_slack: None,
        decrease_slacks: None,
    })
}

/// Runs the alternating iteration from `p0`, recording diagnostics against the
/// oracle optimum at every half-step.
///
/// `p0` must carry the target endpoint marginals and have the bridge as its
/// interior conditional, as produced by [`crate::process::init_p0`].
pub fn run_imf(
    p0: &JointDistribution,
    bridge: &BridgeConditional,
    opt: &JointDistribution,
    constants: &RateConstants,
    cfg: &ImfConfig,
) -> Result<ImfOutcome> {
    cfg.validate()?;
    let space = p0.space();
    if space != opt.space() || space != bridge.space() {
        return Err(Error::Domain(
            "initializer, bridge and optimum must share one state space".into(),
        ));
    }
    let ops = if cfg.record_gradients {
        Some(SubspaceOps::build(space)?)
    } else {
        None
    };

    let kl_initial = kl_divergence(p0, opt)?;
    let mut records = Vec::with_capacity(2 * cfg.max_iterations + 1);
    records.push(base_record(0, p0, opt, kl_initial, None, 0.0)?);

    let mut current = p0.clone();
    let mut current_kl = kl_initial;
    let mut iterations_completed = 0usize;
    let mut stopped_early = false;

    for k in 0..cfg.max_iterations {
        if cfg.stop_kl > 0.0 && current_kl < cfg.stop_kl {
            stopped_early = true;
            break;
        }

        let (half, half_drift) = markov_projection_with_drift(&current)?;
        let half_kl = kl_divergence(&half, opt)?;
        let mut half_record = base_record(
            2 * k as u32 + 1,
            &half,
            opt,
            half_kl,
            Some(current_kl),
            half_drift,
        )?;
        if let Some(ops) = &ops {
            half_record.grad = Some(gradient_norms(&half, opt, ops)?);
        }
        records.push(half_record);

        let (next, next_drift) = reciprocal_projection_with_drift(&half, bridge)?;
        let next_kl = kl_divergence(&next, opt)?;
        let mut next_record = base_record(
            2 * k as u32 + 2,
            &next,
            opt,
            next_kl,
            Some(half_kl),
            next_drift,
        )?;
        next_record.bound_value = Some(constants.contraction.powi(k as i32) * kl_initial);
        if let Some(ops) = &ops {
            let grad = gradient_norms(&next, opt, ops)?;
            next_record.pl_slack = Some(grad.endpoint_singles.powi(2) - next_kl);
            next_record.grad = Some(grad);
        }
        records.push(next_record);

        // The decrease inequalities at step k need the step-(k+1) divergence,
        // so they are filled in one step late. Step 0 is skipped: its iterate
        // may touch zero and carries no gradient.
        if k >= 1 {
            let kl_at_k = records[2 * k].kl_to_opt;
            let grad_at_k = records[2 * k].grad;
            let grad_at_half = records[2 * k + 1].grad;
            if let (Some(gk), Some(gh)) = (grad_at_k, grad_at_half) {
                let m = constants.m;
                records[2 * k].decrease_slacks = Some(DecreaseSlacks {
                    full_step: (kl_at_k - next_kl) - m.powi(3) / 4.0 * gk.endpoint_singles.powi(2),
                    markov_half: (kl_at_k - half_kl) - m / 2.0 * gk.pair.powi(2),
                    reciprocal_half: (half_kl - next_kl) - m / 2.0 * gh.endpoint_pair.powi(2),
                });
            }
        }

        current = next;
        current_kl = next_kl;
        iterations_completed = k + 1;
    }

    Ok(ImfOutcome {
        trace: IterationTrace { records },
        final_iterate: current,
        iterations_completed,
        stopped_early,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{
        bridge_conditional, build_markov_joint, independent_coupling, init_p0, sample_instance,
        GeneratorSpec,
    };
    use crate::space::StateSpaceSpec;
    use crate::verify::compute_constants;

    #[test]
    fn markov_projection_fixes_markov_inputs() {
        let instance = sample_instance(&GeneratorSpec::new(2, 2, 3)).unwrap();
        let q = build_markov_joint(&instance.markov).unwrap();
        let projected = markov_projection(&q).unwrap();
        for (a, b) in q.values().iter().zip(projected.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn markov_projection_of_uniform_is_uniform() {
        let space = StateSpaceSpec::new(2, 1).unwrap();
        let p = JointDistribution::uniform(space);
        let projected = markov_projection(&p).unwrap();
        assert_eq!(projected.values(), p.values());
    }

    #[test]
    fn markov_projection_reports_singular_time_marginal() {
        let space = StateSpaceSpec::new(2, 1).unwrap();
        // All mass on trajectories with state 0 at time 1.
        let mut values = vec![0.0; 8];
        values[space.flat_index(&[0, 0, 0]).unwrap()] = 0.5;
        values[space.flat_index(&[1, 0, 1]).unwrap()] = 0.5;
        let p = JointDistribution::new(space, values).unwrap();
        assert!(matches!(
            markov_projection(&p),
            Err(Error::SingularConditioning(_))
        ));
    }

    #[test]
    fn reciprocal_projection_fixes_reciprocal_inputs() {
        let instance = sample_instance(&GeneratorSpec::new(3, 1, 4)).unwrap();
        let q = build_markov_joint(&instance.markov).unwrap();
        let bridge = bridge_conditional(&q).unwrap();
        let p0 = init_p0(&bridge, &independent_coupling(&instance.marginals)).unwrap();
        let projected = reciprocal_projection(&p0, &bridge).unwrap();
        for (a, b) in p0.values().iter().zip(projected.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn reciprocal_projection_is_idempotent() {
        let instance = sample_instance(&GeneratorSpec::new(2, 2, 5)).unwrap();
        let q = build_markov_joint(&instance.markov).unwrap();
        let bridge = bridge_conditional(&q).unwrap();
        // Start from something that is neither Markov nor reciprocal.
        let p = JointDistribution::uniform(q.space());
        let once = reciprocal_projection(&p, &bridge).unwrap();
        let twice = reciprocal_projection(&once, &bridge).unwrap();
        for (a, b) in once.values().iter().zip(twice.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn run_exits_immediately_at_the_fixed_point() {
        let instance = sample_instance(&GeneratorSpec::new(2, 1, 6)).unwrap();
        let q = build_markov_joint(&instance.markov).unwrap();
        let bridge = bridge_conditional(&q).unwrap();
        // Take the reference's own endpoint data: q solves its own problem.
        let q_pair = crate::process::MarginalPair::new(
            q.marginal(&[0]).unwrap().values().to_vec(),
            q.marginal(&[q.space().last_time()])
                .unwrap()
                .values()
                .to_vec(),
        )
        .unwrap();
        let eta =
            crate::process::Coupling::new(crate::process::endpoint_matrix(&q), &q_pair).unwrap();
        let p0 = init_p0(&bridge, &eta).unwrap();
        let constants = compute_constants(&bridge, &q_pair);
        let outcome = run_imf(&p0, &bridge, &q, &constants, &ImfConfig::default()).unwrap();
        assert!(outcome.stopped_early);
        assert_eq!(outcome.iterations_completed, 0);
        assert!(outcome.trace.initial_kl().abs() < 1e-13);
    }

    #[test]
    fn config_validation_rejects_bad_values() {
        let cfg = ImfConfig {
            max_iterations: 0,
            ..ImfConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = ImfConfig {
            stop_kl: -1.0,
            ..ImfConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
