//! Rate constants and numerical certificates: every inequality used by the
//! exponential-convergence argument is evaluated on concrete runs and reported
//! with its slack.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exec::{run_batch, stream_rng, ExecMode};
use crate::imf::IterationTrace;
use crate::process::{BridgeConditional, MarginalPair};
use crate::space::StateSpaceSpec;
use crate::subspace::{ConstraintOperator, SubspaceOps};
use crate::tensor::{kl_divergence, JointDistribution, SignedMeasure};

/// Constants of the contraction estimate, computed from exact minima over the
/// finite tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConstants {
    /// Smallest bridge-conditional entry.
    pub eps_q: f64,
    /// Smallest initial-marginal entry.
    pub eps_mu: f64,
    /// Smallest final-marginal entry.
    pub eps_nu: f64,
    /// `eps_q^(N+1) · eps_mu · eps_nu`: mass floor after one Markov half-step.
    pub delta: f64,
    /// `eps_q · delta`: mass floor from step 1 on.
    pub m: f64,
    /// Per-step contraction factor `1 - m³/4`.
    pub contraction: f64,
    pub interior_count: usize,
}

impl RateConstants {
    /// `m` recomputed from its expanded product form; agrees with `m` up to
    /// floating-point association.
    pub fn m_product_form(&self) -> f64 {
        self.eps_q.powi(self.interior_count as i32 + 2) * self.eps_mu * self.eps_nu
    }
}

pub fn compute_constants(bridge: &BridgeConditional, marginals: &MarginalPair) -> RateConstants {
    let eps_q = bridge.min_value();
    let eps_mu = marginals.mu().iter().copied().fold(f64::INFINITY, f64::min);
    let eps_nu = marginals.nu().iter().copied().fold(f64::INFINITY, f64::min);
    let interior_count = bridge.space().interior_count();
    let delta = eps_q.powi(interior_count as i32 + 1) * eps_mu * eps_nu;
    let m = eps_q * delta;
    RateConstants {
        eps_q,
        eps_mu,
        eps_nu,
        delta,
        m,
        contraction: 1.0 - m.powi(3) / 4.0,
        interior_count,
    }
}

/// One evaluated inequality: `pass` iff `slack ≥ -tolerance`.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// A named bundle of checks with free-form notes.
#[derive(Debug, Clone, PartialEq)]
pub struct CertificateReport {
    pub name: String,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl CertificateReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Records the inequality `lhs ≥ rhs` with slack `lhs - rhs`.
    pub fn push_geq(&mut self, name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) {
        let slack = lhs - rhs;
        self.checks.push(Check {
            name: name.into(),
            lhs,
            rhs,
            slack,
            tolerance,
            pass: slack >= -tolerance,
        });
    }

    /// Records the inequality `lhs ≤ rhs` with slack `rhs - lhs`.
    pub fn push_leq(&mut self, name: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) {
        let slack = rhs - lhs;
        self.checks.push(Check {
            name: name.into(),
            lhs,
            rhs,
            slack,
            tolerance,
            pass: slack >= -tolerance,
        });
    }

    pub fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn min_slack(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.slack)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Gradient of `p ↦ KL(p ‖ opt)` as a tensor: `ln(p/opt) + 1` cellwise.
///
/// Undefined where `p` vanishes; iterates from step 1 on are bounded below by
/// the mass floor, so gradient diagnostics start there.
pub fn kl_gradient(p: &JointDistribution, opt: &JointDistribution) -> Result<SignedMeasure> {
    if p.space() != opt.space() {
        return Err(Error::Domain(
            "gradient requires both tensors on one state space".into(),
        ));
    }
    let mut values = Vec::with_capacity(p.values().len());
    for (idx, (&pv, &ov)) in p.values().iter().zip(opt.values()).enumerate() {
        if pv <= 0.0 || ov <= 0.0 {
            return Err(Error::Domain(format!(
                "gradient undefined at zero-mass cell {}; evaluate from step 1 on, where iterates are mass-bounded",
                p.space().cell_label(idx)
            )));
        }
        values.push((pv / ov).ln() + 1.0);
    }
    SignedMeasure::new(p.space(), values)
}

/// Unit-norm random direction inside the operator's subspace.
pub fn random_subspace_direction<R: Rng>(
    op: &ConstraintOperator,
    rng: &mut R,
) -> Result<SignedMeasure> {
    let space = op.space();
    loop {
        let values = (0..space.num_cells())
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let raw = SignedMeasure::new(space, values)?;
        let mut direction = op.project(&raw)?;
        let norm = direction.norm();
        if norm > 1e-8 {
            direction.scale(1.0 / norm);
            return Ok(direction);
        }
    }
}

/// Certifies the projection-norm inequality on the endpoint-singles subspace:
/// for random members, the squared norms of the projections onto the pair and
/// endpoint-pair subspaces dominate the squared norm. Also certifies the
/// supporting subspace structure (the endpoint-pair subspace sits inside the
/// endpoint-singles one, and its orthogonal complement there sits inside the
/// pair subspace).
pub fn check_lemma3(
    space: StateSpaceSpec,
    trials: usize,
    seed: u64,
    tolerance: f64,
    mode: ExecMode,
) -> Result<CertificateReport> {
    let mut report = CertificateReport::new("lemma3");
    if trials == 0 {
        report.note("no trials requested: vacuous pass".to_string());
        return Ok(report);
    }
    let ops = SubspaceOps::build(space)?;

    struct TrialOutcome {
        lhs: f64,
        rhs: f64,
        subset_residual: f64,
        complement_residual: f64,
    }

    let outcomes: Vec<Result<TrialOutcome>> = run_batch(mode, trials, |i| {
        let mut rng = stream_rng(seed, i as u64);
        let values: Vec<f64> = (0..space.num_cells())
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let raw = SignedMeasure::new(space, values)?;

        // The inequality quantifies over the endpoint-singles subspace.
        let xi = ops.endpoint_singles.project(&raw)?;
        let lhs = ops.pair.project(&xi)?.norm_sq() + ops.endpoint_pair.project(&xi)?.norm_sq();
        let rhs = xi.norm_sq();

        // Membership of an endpoint-pair element in the endpoint-singles
        // subspace.
        let xi_b = ops.endpoint_pair.project(&raw)?;
        let subset_residual = ops.endpoint_singles.membership_residual(&xi_b)?;

        // The complement of the endpoint-pair subspace inside the
        // endpoint-singles subspace lies in the pair subspace.
        let mut complement = xi.clone();
        complement.add_scaled(&ops.endpoint_pair.project(&xi)?, -1.0)?;
        let complement_residual = ops.pair.membership_residual(&complement)?;

        Ok(TrialOutcome {
            lhs,
            rhs,
            subset_residual,
            complement_residual,
        })
    });

    let mut worst: Option<(f64, f64)> = None;
    let mut max_subset = 0.0f64;
    let mut max_complement = 0.0f64;
    for outcome in outcomes {
        let o = outcome?;
        let slack = o.lhs - o.rhs;
        if worst.is_none_or(|(l, r)| slack < l - r) {
            worst = Some((o.lhs, o.rhs));
        }
        max_subset = max_subset.max(o.subset_residual);
        max_complement = max_complement.max(o.complement_residual);
    }
    let (lhs, rhs) = worst.expect("at least one trial");
    report.push_geq(
        format!("projection_norms_dominate_worst_of_{trials}"),
        lhs,
        rhs,
        tolerance,
    );
    report.push_leq(
        "endpoint_pair_inside_singles_residual",
        max_subset,
        0.0,
        tolerance,
    );
    report.push_leq(
        "complement_inside_pair_residual",
        max_complement,
        0.0,
        tolerance,
    );
    Ok(report)
}

/// Mass floor along the recorded iterates: every step from 1/2 on stays at or
/// above `m`.
pub fn certify_mass_bound(
    trace: &IterationTrace,
    constants: &RateConstants,
    tolerance: f64,
) -> CertificateReport {
    let mut report = CertificateReport::new("lemma2");
    let min_mass = trace.min_mass_after_start();
    if min_mass.is_finite() {
        report.push_geq(
            "min_trajectory_mass_at_least_m",
            min_mass,
            constants.m,
            tolerance,
        );
    } else {
        report.note("no recorded steps past 0: vacuous pass");
    }
    report
}

/// Per-step decrease inequalities aggregated over the recorded steps.
pub fn certify_decrease(trace: &IterationTrace, tolerance: f64) -> CertificateReport {
    let mut report = CertificateReport::new("lemma4");
    let mut count = 0usize;
    let mut full = f64::INFINITY;
    let mut markov = f64::INFINITY;
    let mut reciprocal = f64::INFINITY;
    for record in trace.records() {
        if let Some(slacks) = &record.decrease_slacks {
            count += 1;
            full = full.min(slacks.full_step);
            markov = markov.min(slacks.markov_half);
            reciprocal = reciprocal.min(slacks.reciprocal_half);
        }
    }
    if count == 0 {
        report.note("no steps with decrease diagnostics: vacuous pass");
        return report;
    }
    report.push_geq(
        format!("full_step_decrease_worst_of_{count}"),
        full,
        0.0,
        tolerance,
    );
    report.push_geq(
        format!("markov_half_decrease_worst_of_{count}"),
        markov,
        0.0,
        tolerance,
    );
    report.push_geq(
        format!("reciprocal_half_decrease_worst_of_{count}"),
        reciprocal,
        0.0,
        tolerance,
    );
    report
}

/// The rate bound, the gradient-domination inequality, and monotonicity of
/// the first step.
pub fn certify_rate_bound(
    trace: &IterationTrace,
    bound_tolerance: f64,
    pl_tolerance: f64,
) -> CertificateReport {
    let mut report = CertificateReport::new("theorem1");
    let mut bound_worst: Option<(f64, f64)> = None;
    let mut pl_worst = f64::INFINITY;
    let mut steps = 0usize;
    for (_, record) in trace.integer_records() {
        if let Some(bound) = record.bound_value {
            steps += 1;
            let slack = bound - record.kl_to_opt;
            if bound_worst.is_none_or(|(kl, b)| slack < b - kl) {
                bound_worst = Some((record.kl_to_opt, bound));
            }
        }
        if let Some(pl) = record.pl_slack {
            pl_worst = pl_worst.min(pl);
        }
    }
    match bound_worst {
        Some((kl, bound)) => {
            report.push_leq(
                format!("kl_below_rate_bound_worst_of_{steps}"),
                kl,
                bound,
                bound_tolerance,
            );
        }
        None => report.note("no integer steps recorded: vacuous pass"),
    }
    if pl_worst.is_finite() {
        report.push_geq(
            "gradient_dominates_value_worst",
            pl_worst,
            0.0,
            pl_tolerance,
        );
    }
    // First step does not increase the divergence.
    let records = trace.records();
    if records.len() > 2 {
        report.push_leq(
            "first_step_monotone",
            records[2].kl_to_opt,
            records[0].kl_to_opt,
            bound_tolerance,
        );
    }
    report
}

/// Hessian spectrum bounds at one iterate: cells in `[m, 1]`, hence diagonal
/// Hessian entries `1/p` in `[1, 1/m]`.
pub fn check_convexity_spectrum(
    p: &JointDistribution,
    constants: &RateConstants,
    tolerance: f64,
) -> CertificateReport {
    let mut report = CertificateReport::new("spectrum");
    report.push_geq("min_mass_at_least_m", p.min_value(), constants.m, tolerance);
    report.push_leq("max_mass_at_most_one", p.max_value(), 1.0, tolerance);
    report
}

/// Spectrum bounds along a whole recorded run plus the final iterate.
pub fn certify_spectrum(
    trace: &IterationTrace,
    final_iterate: &JointDistribution,
    constants: &RateConstants,
    tolerance: f64,
) -> CertificateReport {
    let mut report = check_convexity_spectrum(final_iterate, constants, tolerance);
    let min_mass = trace.min_mass_after_start();
    if min_mass.is_finite() {
        report.push_geq(
            "sequence_min_mass_at_least_m",
            min_mass,
            constants.m,
            tolerance,
        );
        let max_mass = trace
            .records()
            .iter()
            .filter(|r| r.half_steps >= 1)
            .map(|r| r.max_mass)
            .fold(f64::NEG_INFINITY, f64::max);
        report.push_leq("sequence_max_mass_at_most_one", max_mass, 1.0, tolerance);
    }
    report
}

/// Gradient and projection numerics: central finite differences against the
/// analytic gradient, idempotence and self-adjointness of the projections,
/// and the norm lower bound `‖∇f‖ ≥ ‖p - p*‖` along the iterates.
#[allow(clippy::too_many_arguments)]
pub fn certify_gradients(
    p: &JointDistribution,
    opt: &JointDistribution,
    ops: &SubspaceOps,
    trace: &IterationTrace,
    directions: usize,
    seed: u64,
    fd_tolerance: f64,
    operator_tolerance: f64,
    mode: ExecMode,
) -> Result<CertificateReport> {
    let mut report = CertificateReport::new("gradients");
    let space = p.space();

    // Probe the gradient formula at an interior blend of the iterate with the
    // uniform distribution. Iterates themselves sit at projection fixed
    // points where one projected gradient vanishes identically, which makes a
    // relative comparison against finite differences meaningless there; the
    // blend keeps all three projected gradients generic and bounds the
    // third-derivative truncation term.
    let n = space.num_cells() as f64;
    let blend_values: Vec<f64> = p.values().iter().map(|&v| 0.5 * v + 0.5 / n).collect();
    let probe = JointDistribution::new(space, blend_values)?;
    let gradient = kl_gradient(&probe, opt)?;

    if directions > 0 {
        let relative_errors: Vec<Result<f64>> = run_batch(mode, directions, |i| {
            let mut rng = stream_rng(seed, 1000 + i as u64);
            let op = match i % 3 {
                0 => &ops.pair,
                1 => &ops.endpoint_pair,
                _ => &ops.endpoint_singles,
            };
            let direction = random_subspace_direction(op, &mut rng)?;
            let max_component = direction
                .values()
                .iter()
                .fold(0.0f64, |acc, &v| acc.max(v.abs()));
            // Keep both probe points strictly positive.
            let h = (1e-6f64).min(0.25 * probe.min_value() / max_component);
            let forward = kl_divergence(&probe.perturbed(&direction, h)?, opt)?;
            let backward = kl_divergence(&probe.perturbed(&direction, -h)?, opt)?;
            let fd = (forward - backward) / (2.0 * h);
            let analytic = gradient.dot(&direction)?;
            // Scale near-zero directional derivatives by the projected
            // gradient norm instead of dividing by them.
            let scale = analytic.abs().max(op.project(&gradient)?.norm());
            Ok(if scale > 0.0 {
                (fd - analytic).abs() / scale
            } else {
                (fd - analytic).abs()
            })
        });
        let mut worst = 0.0f64;
        for r in relative_errors {
            worst = worst.max(r?);
        }
        report.push_leq(
            format!("finite_difference_relative_error_worst_of_{directions}"),
            worst,
            0.0,
            fd_tolerance,
        );
    }

    // Projection operators: idempotent and self-adjoint on random pairs.
    let mut idempotence = 0.0f64;
    let mut adjointness = 0.0f64;
    for (stream, op) in [&ops.pair, &ops.endpoint_pair, &ops.endpoint_singles]
        .into_iter()
        .enumerate()
    {
        let mut rng = stream_rng(seed, 2000 + stream as u64);
        for _ in 0..5 {
            let xi = random_tensor(space, &mut rng)?;
            let zeta = random_tensor(space, &mut rng)?;
            let pxi = op.project(&xi)?;
            let mut twice = op.project(&pxi)?;
            twice.add_scaled(&pxi, -1.0)?;
            idempotence = idempotence.max(twice.norm());
            let lhs = pxi.dot(&zeta)?;
            let rhs = xi.dot(&op.project(&zeta)?)?;
            adjointness = adjointness.max((lhs - rhs).abs());
        }
    }
    report.push_leq(
        "projection_idempotence_residual",
        idempotence,
        0.0,
        operator_tolerance,
    );
    report.push_leq(
        "projection_self_adjointness_residual",
        adjointness,
        0.0,
        operator_tolerance,
    );

    // Strong-convexity consequence along the run: the projected gradient norm
    // dominates the distance to the optimum.
    let mut norm_gap = f64::INFINITY;
    let mut steps = 0usize;
    for (_, record) in trace.integer_records() {
        if let Some(grad) = &record.grad {
            steps += 1;
            norm_gap = norm_gap.min(grad.endpoint_singles - record.dist_to_opt);
        }
    }
    if steps > 0 {
        report.push_geq(
            format!("gradient_norm_dominates_distance_worst_of_{steps}"),
            norm_gap,
            0.0,
            operator_tolerance,
        );
    } else {
        report.note("no gradient records: distance bound not evaluated");
    }
    Ok(report)
}

fn random_tensor<R: Rng>(space: StateSpaceSpec, rng: &mut R) -> Result<SignedMeasure> {
    let values = (0..space.num_cells())
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    SignedMeasure::new(space, values)
}

/// Certifies that a projection minimizes the divergence to `opt` over its
/// feasibility class: random feasible perturbations (projection plus a scaled
/// subspace direction, floored so every cell stays at or above half the mass
/// floor) never beat it by more than the tolerance.
#[allow(clippy::too_many_arguments)]
pub fn certify_argmin(
    projection: &JointDistribution,
    constraint: &ConstraintOperator,
    opt: &JointDistribution,
    mass_floor: f64,
    trials: usize,
    seed: u64,
    tolerance: f64,
    mode: ExecMode,
) -> Result<CertificateReport> {
    let mut report = CertificateReport::new(format!("argmin_{}", constraint.subspace()));
    if trials == 0 {
        report.note("no trials requested: vacuous pass");
        return Ok(report);
    }
    let base_kl = kl_divergence(projection, opt)?;
    let min_cell = projection.min_value();
    if min_cell <= 0.0 {
        return Err(Error::Domain(
            "argmin certificate needs a strictly positive projection".into(),
        ));
    }

    let perturbed_kls: Vec<Result<f64>> = run_batch(mode, trials, |i| {
        let mut rng = stream_rng(seed, 3000 + i as u64);
        let direction = random_subspace_direction(constraint, &mut rng)?;
        let max_component = direction
            .values()
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v.abs()));
        let t_max = 0.5 * min_cell / max_component;
        let t = t_max * rng.random_range(0.1..=1.0);
        let candidate = projection.perturbed(&direction, t)?;
        debug_assert!(candidate.min_value() >= mass_floor / 2.0 - 1e-15);
        kl_divergence(&candidate, opt)
    });
    let mut worst = f64::INFINITY;
    for kl in perturbed_kls {
        worst = worst.min(kl?);
    }
    report.push_geq(
        format!("perturbed_kl_dominates_worst_of_{trials}"),
        worst,
        base_kl,
        tolerance,
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{bridge_conditional, build_markov_joint, sample_instance, GeneratorSpec};

    fn uniform_bridge(k: usize, interior: usize) -> (BridgeConditional, MarginalPair) {
        let space = StateSpaceSpec::new(k, interior).unwrap();
        let spec = crate::process::MarkovSpec::new(
            space,
            vec![1.0 / k as f64; k],
            vec![vec![1.0 / k as f64; k * k]; space.time_points() - 1],
        )
        .unwrap();
        let q = build_markov_joint(&spec).unwrap();
        let marginals =
            MarginalPair::new(vec![1.0 / k as f64; k], vec![1.0 / k as f64; k]).unwrap();
        (bridge_conditional(&q).unwrap(), marginals)
    }

    #[test]
    fn uniform_constants_small_case() {
        let (bridge, marginals) = uniform_bridge(2, 1);
        let constants = compute_constants(&bridge, &marginals);
        assert!((constants.eps_q - 0.5).abs() < 1e-15);
        assert!((constants.m - 1.0 / 32.0).abs() < 1e-16);
        let expected_contraction = 1.0 - (1.0f64 / 32.0).powi(3) / 4.0;
        assert!((constants.contraction - expected_contraction).abs() < 1e-16);
    }

    #[test]
    fn uniform_constants_longer_chain() {
        let (bridge, marginals) = uniform_bridge(2, 2);
        let constants = compute_constants(&bridge, &marginals);
        assert!((constants.eps_q - 0.25).abs() < 1e-15);
        assert!((constants.m - 1.0 / 1024.0).abs() < 1e-18);
    }

    #[test]
    fn the_two_product_forms_of_m_agree() {
        let instance = sample_instance(&GeneratorSpec::new(3, 2, 21)).unwrap();
        let q = build_markov_joint(&instance.markov).unwrap();
        let bridge = bridge_conditional(&q).unwrap();
        let constants = compute_constants(&bridge, &instance.marginals);
        let rel = (constants.m - constants.m_product_form()).abs() / constants.m;
        assert!(rel < 1e-15);
        assert!(constants.m > 0.0 && constants.m <= 1.0);
        // For tiny m the factor 1 - m³/4 rounds to 1.0 in double precision.
        assert!(constants.contraction >= 0.75 && constants.contraction <= 1.0);
    }

    #[test]
    fn gradient_at_the_optimum_is_the_ones_tensor() {
        let instance = sample_instance(&GeneratorSpec::new(2, 1, 8)).unwrap();
        let q = build_markov_joint(&instance.markov).unwrap();
        let gradient = kl_gradient(&q, &q).unwrap();
        for &v in gradient.values() {
            assert_eq!(v, 1.0);
        }
        // The constant tensor projects to zero in every constraint subspace.
        let ops = SubspaceOps::build(q.space()).unwrap();
        for op in [&ops.pair, &ops.endpoint_pair, &ops.endpoint_singles] {
            assert!(op.project(&gradient).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn gradient_rejects_zero_cells() {
        let space = StateSpaceSpec::new(2, 1).unwrap();
        let mut values = vec![1.0 / 7.0; 8];
        values[3] = 0.0;
        let p = JointDistribution::new(space, values).unwrap();
        let opt = JointDistribution::uniform(space);
        let err = kl_gradient(&p, &opt).unwrap_err();
        assert!(err.to_string().contains("step 1"));
    }

    #[test]
    fn lemma3_zero_trials_is_a_vacuous_pass() {
        let space = StateSpaceSpec::new(2, 1).unwrap();
        let report = check_lemma3(space, 0, 1, 1e-10, ExecMode::Sequential).unwrap();
        assert!(report.pass());
        assert!(!report.notes.is_empty());
    }

    #[test]
    fn lemma3_holds_on_small_geometry() {
        let space = StateSpaceSpec::new(2, 1).unwrap();
        let report = check_lemma3(space, 100, 42, 1e-10, ExecMode::default()).unwrap();
        assert!(report.pass(), "{report:?}");
    }

    #[test]
    fn endpoint_pair_members_satisfy_the_inequality_with_pure_slack() {
        // For members of the endpoint-pair subspace the projection there is
        // the identity, so the slack is exactly the pair-projection norm.
        let space = StateSpaceSpec::new(2, 2).unwrap();
        let ops = SubspaceOps::build(space).unwrap();
        let mut rng = stream_rng(7, 0);
        let xi = ops
            .endpoint_pair
            .project(&random_tensor(space, &mut rng).unwrap())
            .unwrap();
        let lhs = ops.pair.project(&xi).unwrap().norm_sq()
            + ops.endpoint_pair.project(&xi).unwrap().norm_sq();
        assert!(lhs >= xi.norm_sq() - 1e-10);
    }
}
