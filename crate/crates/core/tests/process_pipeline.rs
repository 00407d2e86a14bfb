//! Process construction against exhaustive per-cell oracles.

mod common;

use common::{build_pipeline, enumerate_trajectories, positional_index};
use imf_core::process::{
    bridge_conditional, build_markov_joint, markov_factorization_residual, sample_instance,
    GeneratorSpec,
};

#[test]
fn bridge_conditional_matches_exhaustive_division() {
    let instance = sample_instance(&GeneratorSpec::new(3, 2, 23)).unwrap();
    let q = build_markov_joint(&instance.markov).unwrap();
    let bridge = bridge_conditional(&q).unwrap();

    // Endpoint masses and per-cell division recomputed by enumeration.
    let k = 3;
    let t = 4;
    let mut endpoint = vec![0.0; k * k];
    for (cell, trajectory) in enumerate_trajectories(k, t).into_iter().enumerate() {
        endpoint[trajectory[0] * k + trajectory[t - 1]] += q.values()[cell];
    }
    for (cell, trajectory) in enumerate_trajectories(k, t).into_iter().enumerate() {
        let x0 = trajectory[0];
        let x1 = trajectory[t - 1];
        let path = positional_index(&trajectory[1..t - 1], k);
        let expected = q.values()[cell] / endpoint[x0 * k + x1];
        assert!((bridge.value(x0, x1, path) - expected).abs() < 1e-14);
    }
    // Every slice over interior paths is a probability vector.
    for x0 in 0..k {
        for x1 in 0..k {
            let sum: f64 = bridge.slice(x0, x1).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            assert!(bridge.slice(x0, x1).iter().all(|&v| v > 0.0));
        }
    }
}

#[test]
fn initializer_is_the_exhaustive_product() {
    let p = build_pipeline(3, 1, 31);
    let k = 3;
    let t = 3;
    for (cell, trajectory) in enumerate_trajectories(k, t).into_iter().enumerate() {
        let x0 = trajectory[0];
        let x1 = trajectory[t - 1];
        let path = positional_index(&trajectory[1..t - 1], k);
        let expected = p.bridge.value(x0, x1, path) * p.eta.value(x0, x1);
        assert!((p.p0.values()[cell] - expected).abs() < 1e-15);
    }
}

#[test]
fn initializer_has_the_prescribed_endpoint_marginals() {
    for seed in [1u64, 2, 3] {
        let p = build_pipeline(2, 2, seed);
        let head = p.p0.marginal(&[0]).unwrap();
        let tail = p.p0.marginal(&[p.p0.space().last_time()]).unwrap();
        for (got, want) in head.values().iter().zip(p.instance.marginals.mu()) {
            assert!((got - want).abs() < 1e-12);
        }
        for (got, want) in tail.values().iter().zip(p.instance.marginals.nu()) {
            assert!((got - want).abs() < 1e-12);
        }
    }
}

#[test]
fn initializer_interior_conditional_is_the_bridge() {
    let p = build_pipeline(2, 2, 41);
    let recovered = bridge_conditional(&p.p0).unwrap();
    let k = 2;
    for x0 in 0..k {
        for x1 in 0..k {
            for path in 0..recovered.interior_cells() {
                let got = recovered.value(x0, x1, path);
                let want = p.bridge.value(x0, x1, path);
                assert!((got - want).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn markov_joint_conditional_depends_only_on_the_previous_state() {
    for seed in [3u64, 8, 21] {
        let instance = sample_instance(&GeneratorSpec::new(2, 2, seed)).unwrap();
        let q = build_markov_joint(&instance.markov).unwrap();
        assert!(markov_factorization_residual(&q).unwrap() < 1e-12);

        // Cellwise: the history conditional equals the transition row.
        let table = q.conditional(&[3], &[0, 1, 2]).unwrap();
        for x0 in 0..2usize {
            for x1 in 0..2usize {
                for x2 in 0..2usize {
                    for x3 in 0..2usize {
                        let got = table.value(&[x0, x1, x2], &[x3]).unwrap();
                        let want = instance.markov.transitions()[2][x2 * 2 + x3];
                        assert!((got - want).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
