//! Shared independent oracles for the integration tests. Everything here
//! recomputes expected values from first principles (explicit enumeration,
//! 1-D search, dense linear algebra) without going through the library's own
//! indexing or projection code paths.

#![allow(dead_code)]

use imf_core::oracle::{solve_bridge, OracleSolution, SinkhornConfig};
use imf_core::process::{
    bridge_conditional, build_markov_joint, independent_coupling, init_p0, sample_instance,
    BridgeConditional, Coupling, GeneratorSpec, Instance, MarginalPair,
};
use imf_core::tensor::JointDistribution;
use imf_core::verify::{compute_constants, RateConstants};

/// All trajectories of length `time_points` over `cardinality` states, in
/// row-major order, generated by an explicit odometer.
pub fn enumerate_trajectories(cardinality: usize, time_points: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = vec![0usize; time_points];
    loop {
        out.push(current.clone());
        // Increment the least significant coordinate with carries.
        let mut t = time_points;
        loop {
            if t == 0 {
                return out;
            }
            t -= 1;
            current[t] += 1;
            if current[t] < cardinality {
                break;
            }
            current[t] = 0;
        }
    }
}

/// Positional (row-major, time 0 most significant) encoding of a trajectory.
pub fn positional_index(trajectory: &[usize], cardinality: usize) -> usize {
    trajectory.iter().fold(0, |acc, &s| acc * cardinality + s)
}

/// Marginal over `times` by explicit summation across all trajectories.
pub fn brute_marginal(
    values: &[f64],
    cardinality: usize,
    time_points: usize,
    times: &[usize],
) -> Vec<f64> {
    let mut out = vec![0.0; cardinality.pow(times.len() as u32)];
    for (cell, trajectory) in enumerate_trajectories(cardinality, time_points)
        .into_iter()
        .enumerate()
    {
        let kept: Vec<usize> = times.iter().map(|&t| trajectory[t]).collect();
        out[positional_index(&kept, cardinality)] += values[cell];
    }
    out
}

/// KL divergence evaluated directly from its defining sum.
pub fn brute_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&pv, _)| pv > 0.0)
        .map(|(&pv, &qv)| pv * (pv / qv).ln())
        .sum()
}

/// Rank of a dense matrix by modified Gram-Schmidt with a relative threshold.
pub fn dense_rank(rows: &[Vec<f64>], relative_tol: f64) -> usize {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let scale = rows
        .iter()
        .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0f64, f64::max);
    if scale == 0.0 {
        return 0;
    }
    for row in rows {
        let mut v = row.clone();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= dot * y;
            }
        }
        let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > relative_tol * scale {
            for x in &mut v {
                *x /= norm;
            }
            basis.push(v);
        }
    }
    basis.len()
}

/// The 2×2 coupling with marginals `(mu0, 1-mu0)` / `(nu0, 1-nu0)` and free
/// parameter `a` in the first cell.
pub fn coupling_2x2(a: f64, mu0: f64, nu0: f64) -> [f64; 4] {
    [a, mu0 - a, nu0 - a, 1.0 - mu0 - nu0 + a]
}

fn coupling_kl(a: f64, mu0: f64, nu0: f64, q01: &[f64]) -> f64 {
    brute_kl(&coupling_2x2(a, mu0, nu0), q01)
}

fn coupling_kl_derivative(a: f64, mu0: f64, nu0: f64, q01: &[f64]) -> f64 {
    let c = coupling_2x2(a, mu0, nu0);
    (c[0] / q01[0]).ln() - (c[1] / q01[1]).ln() - (c[2] / q01[2]).ln() + (c[3] / q01[3]).ln()
}

/// Independent 1-D oracle for the 2×2 static problem: golden-section search
/// on the KL objective over the single free parameter, then a monotone
/// derivative bisection to polish past the sqrt(eps) positional limit of
/// value-comparison search.
pub fn golden_section_static_2x2(q01: &[f64], mu0: f64, nu0: f64) -> [f64; 4] {
    let lo0 = (mu0 + nu0 - 1.0).max(0.0);
    let hi0 = mu0.min(nu0);
    let pad = 1e-15 * (hi0 - lo0);
    let (mut lo, mut hi) = (lo0 + pad, hi0 - pad);
    let inv_phi = 0.5 * (5.0f64.sqrt() - 1.0);

    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = coupling_kl(x1, mu0, nu0, q01);
    let mut f2 = coupling_kl(x2, mu0, nu0, q01);
    for _ in 0..120 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = coupling_kl(x1, mu0, nu0, q01);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = coupling_kl(x2, mu0, nu0, q01);
        }
    }
    let rough = 0.5 * (lo + hi);

    // Value comparisons cannot localize a quadratic minimum below ~1e-8, so
    // finish on the strictly increasing derivative.
    let width = (hi0 - lo0) * 1e-4;
    let (mut blo, mut bhi) = (
        (rough - width).max(lo0 + pad),
        (rough + width).min(hi0 - pad),
    );
    if coupling_kl_derivative(blo, mu0, nu0, q01) > 0.0
        || coupling_kl_derivative(bhi, mu0, nu0, q01) < 0.0
    {
        blo = lo0 + pad;
        bhi = hi0 - pad;
    }
    for _ in 0..200 {
        let mid = 0.5 * (blo + bhi);
        if mid <= blo || mid >= bhi {
            break;
        }
        if coupling_kl_derivative(mid, mu0, nu0, q01) >= 0.0 {
            bhi = mid;
        } else {
            blo = mid;
        }
    }
    coupling_2x2(0.5 * (blo + bhi), mu0, nu0)
}

/// One fully solved seeded instance: reference process, bridge, constants,
/// oracle solution and the fitting initializer with the independent coupling.
pub struct Pipeline {
    pub instance: Instance,
    pub q: JointDistribution,
    pub bridge: BridgeConditional,
    pub constants: RateConstants,
    pub oracle: OracleSolution,
    pub eta: Coupling,
    pub p0: JointDistribution,
}

pub fn build_pipeline(cardinality: usize, interior: usize, seed: u64) -> Pipeline {
    let instance = sample_instance(&GeneratorSpec::new(cardinality, interior, seed)).unwrap();
    let q = build_markov_joint(&instance.markov).unwrap();
    let bridge = bridge_conditional(&q).unwrap();
    let constants = compute_constants(&bridge, &instance.marginals);
    let oracle =
        solve_bridge(&q, &bridge, &instance.marginals, &SinkhornConfig::default()).unwrap();
    let eta = independent_coupling(&instance.marginals);
    let p0 = init_p0(&bridge, &eta).unwrap();
    Pipeline {
        instance,
        q,
        bridge,
        constants,
        oracle,
        eta,
        p0,
    }
}

/// Geometry used by the seeded sweeps: cycles through the four desk-scale
/// shapes.
pub fn sweep_geometry(index: usize) -> (usize, usize) {
    match index % 4 {
        0 => (2, 1),
        1 => (2, 2),
        2 => (3, 1),
        _ => (3, 2),
    }
}

/// The marginal pair of a reference tensor itself.
pub fn own_marginals(q: &JointDistribution) -> MarginalPair {
    MarginalPair::new(
        q.marginal(&[0]).unwrap().values().to_vec(),
        q.marginal(&[q.space().last_time()])
            .unwrap()
            .values()
            .to_vec(),
    )
    .unwrap()
}
