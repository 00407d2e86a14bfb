//! Construction of reference Markov processes, endpoint couplings, bridge
//! conditionals and the fitting initializer, plus seeded random instance
//! generation.

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::error::{Error, Result};
use crate::space::StateSpaceSpec;
use crate::tensor::{JointDistribution, PROBABILITY_SUM_TOL};

/// Prescribed endpoint marginals, everywhere positive.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalPair {
    mu: Vec<f64>,
    nu: Vec<f64>,
}

impl MarginalPair {
    pub fn new(mu: Vec<f64>, nu: Vec<f64>) -> Result<Self> {
        if mu.len() != nu.len() {
            return Err(Error::Validation(format!(
                "endpoint marginals have different lengths: {} vs {}",
                mu.len(),
                nu.len()
            )));
        }
        let mu = validate_positive_probability_vector(mu, "mu")?;
        let nu = validate_positive_probability_vector(nu, "nu")?;
        Ok(Self { mu, nu })
    }

    pub fn cardinality(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }
}

fn validate_positive_probability_vector(mut v: Vec<f64>, name: &str) -> Result<Vec<f64>> {
    let mut sum = 0.0;
    for (i, &x) in v.iter().enumerate() {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::Validation(format!(
                "{name}[{i}] = {x} must be strictly positive"
            )));
        }
        sum += x;
    }
    let drift = (sum - 1.0).abs();
    if drift > PROBABILITY_SUM_TOL {
        return Err(Error::Validation(format!(
            "{name} sums to {sum}, drift {drift:e} exceeds {PROBABILITY_SUM_TOL:e}"
        )));
    }
    if drift > 0.0 {
        for x in &mut v {
            *x /= sum;
        }
    }
    Ok(v)
}

/// A time-inhomogeneous Markov process: initial law plus one row-stochastic
/// transition matrix per step. All entries must be strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSpec {
    space: StateSpaceSpec,
    initial: Vec<f64>,
    /// One `K×K` row-major matrix per step; `transitions[n][a*K + b]` maps the
    /// state at time `n` to the state at time `n + 1`.
    transitions: Vec<Vec<f64>>,
}

impl MarkovSpec {
    pub fn new(
        space: StateSpaceSpec,
        initial: Vec<f64>,
        transitions: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let k = space.cardinality();
        if initial.len() != k {
            return Err(Error::Validation(format!(
                "initial law has {} entries, expected {k}",
                initial.len()
            )));
        }
        let initial = validate_positive_probability_vector(initial, "initial")?;
        let steps = space.time_points() - 1;
        if transitions.len() != steps {
            return Err(Error::Validation(format!(
                "expected {steps} transition matrices, got {}",
                transitions.len()
            )));
        }
        let mut checked = Vec::with_capacity(steps);
        for (n, matrix) in transitions.into_iter().enumerate() {
            if matrix.len() != k * k {
                return Err(Error::Validation(format!(
                    "transition matrix {n} has {} entries, expected {}",
                    matrix.len(),
                    k * k
                )));
            }
            let mut matrix = matrix;
            for a in 0..k {
                let row = &matrix[a * k..(a + 1) * k];
                let mut sum = 0.0;
                for (b, &x) in row.iter().enumerate() {
                    if !x.is_finite() || x <= 0.0 {
                        return Err(Error::Validation(format!(
                            "transition matrix {n}, row {a}, column {b}: entry {x} must be strictly positive"
                        )));
                    }
                    sum += x;
                }
                let drift = (sum - 1.0).abs();
                if drift > PROBABILITY_SUM_TOL {
                    return Err(Error::Validation(format!(
                        "transition matrix {n}, row {a} sums to {sum}, drift {drift:e} exceeds {PROBABILITY_SUM_TOL:e}"
                    )));
                }
                if drift > 0.0 {
                    for x in &mut matrix[a * k..(a + 1) * k] {
                        *x /= sum;
                    }
                }
            }
            checked.push(matrix);
        }
        Ok(Self {
            space,
            initial,
            transitions: checked,
        })
    }

    pub fn space(&self) -> StateSpaceSpec {
        self.space
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn transitions(&self) -> &[Vec<f64>] {
        &self.transitions
    }
}

/// Expands a Markov specification into the full trajectory tensor
/// `q(trajectory) = initial(x_0) · Π_n transition_n(x_n, x_{n+1})`.
pub fn build_markov_joint(spec: &MarkovSpec) -> Result<JointDistribution> {
    let space = spec.space;
    let k = space.cardinality();
    let t = space.time_points();
    let mut values = vec![0.0; space.num_cells()];
    let strides = space.strides();
    for (idx, slot) in values.iter_mut().enumerate() {
        let mut prev = (idx / strides[0]) % k;
        let mut mass = spec.initial[prev];
        for (n, stride) in strides.iter().enumerate().take(t).skip(1) {
            let next = (idx / stride) % k;
            mass *= spec.transitions[n - 1][prev * k + next];
            prev = next;
        }
        *slot = mass;
    }
    JointDistribution::new(space, values)
}

/// An endpoint coupling with prescribed marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    cardinality: usize,
    /// `K×K` row-major; rows sum to `mu`, columns to `nu`.
    matrix: Vec<f64>,
    mu: Vec<f64>,
    nu: Vec<f64>,
}

impl Coupling {
    pub fn new(matrix: Vec<f64>, marginals: &MarginalPair) -> Result<Self> {
        let k = marginals.cardinality();
        if matrix.len() != k * k {
            return Err(Error::Validation(format!(
                "coupling matrix has {} entries, expected {}",
                matrix.len(),
                k * k
            )));
        }
        for (i, &x) in matrix.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::Validation(format!(
                    "coupling entry ({},{}) = {x} must be nonnegative",
                    i / k,
                    i % k
                )));
            }
        }
        for a in 0..k {
            let row: f64 = matrix[a * k..(a + 1) * k].iter().sum();
            if (row - marginals.mu[a]).abs() > PROBABILITY_SUM_TOL {
                return Err(Error::Validation(format!(
                    "coupling row {a} sums to {row}, expected mu[{a}] = {}",
                    marginals.mu[a]
                )));
            }
        }
        for b in 0..k {
            let col: f64 = (0..k).map(|a| matrix[a * k + b]).sum();
            if (col - marginals.nu[b]).abs() > PROBABILITY_SUM_TOL {
                return Err(Error::Validation(format!(
                    "coupling column {b} sums to {col}, expected nu[{b}] = {}",
                    marginals.nu[b]
                )));
            }
        }
        Ok(Self {
            cardinality: k,
            matrix,
            mu: marginals.mu.clone(),
            nu: marginals.nu.clone(),
        })
    }

    pub fn cardinality(&self) -> usize {
        self.cardinality
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    #[inline]
    pub fn value(&self, x0: usize, x1: usize) -> f64 {
        self.matrix[x0 * self.cardinality + x1]
    }

    pub fn marginals(&self) -> MarginalPair {
        MarginalPair {
            mu: self.mu.clone(),
            nu: self.nu.clone(),
        }
    }

    pub fn min_value(&self) -> f64 {
        self.matrix.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// The product coupling `mu ⊗ nu`.
pub fn independent_coupling(marginals: &MarginalPair) -> Coupling {
    let k = marginals.cardinality();
    let mut matrix = vec![0.0; k * k];
    for a in 0..k {
        for b in 0..k {
            matrix[a * k + b] = marginals.mu[a] * marginals.nu[b];
        }
    }
    Coupling {
        cardinality: k,
        matrix,
        mu: marginals.mu.clone(),
        nu: marginals.nu.clone(),
    }
}

/// The endpoint pair marginal of a trajectory tensor as a plain `K×K` matrix.
pub fn endpoint_matrix(p: &JointDistribution) -> Vec<f64> {
    let space = p.space();
    p.marginal(&[0, space.last_time()])
        .expect("endpoint times are always valid")
        .values()
        .to_vec()
}

/// The conditional law of the interior path given both endpoints,
/// `bridge(x_0, x_1, path) = q(x_0, path, x_1) / q(x_0, x_1)`.
///
/// Interior paths are indexed row-major over times `1..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeConditional {
    space: StateSpaceSpec,
    table: Vec<f64>,
}

impl BridgeConditional {
    pub fn space(&self) -> StateSpaceSpec {
        self.space
    }

    /// Number of interior paths per endpoint pair.
    pub fn interior_cells(&self) -> usize {
        self.space
            .cardinality()
            .pow(self.space.interior_count() as u32)
    }

    #[inline]
    pub fn value(&self, x0: usize, x1: usize, path_index: usize) -> f64 {
        let k = self.space.cardinality();
        self.table[(x0 * k + x1) * self.interior_cells() + path_index]
    }

    pub fn slice(&self, x0: usize, x1: usize) -> &[f64] {
        let k = self.space.cardinality();
        let w = self.interior_cells();
        let base = (x0 * k + x1) * w;
        &self.table[base..base + w]
    }

    pub fn min_value(&self) -> f64 {
        self.table.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Interior path index and endpoints of a full-tensor cell.
    #[inline]
    pub fn split_cell(&self, idx: usize) -> (usize, usize, usize) {
        let k = self.space.cardinality();
        let tail = self.space.num_cells() / k; // cells per fixed x_0
        let x0 = idx / tail;
        let rem = idx % tail;
        let x1 = rem % k;
        let path = rem / k;
        (x0, x1, path)
    }
}

/// Extracts the bridge conditional of a strictly positive trajectory tensor.
pub fn bridge_conditional(q: &JointDistribution) -> Result<BridgeConditional> {
    let space = q.space();
    let k = space.cardinality();
    let endpoints = endpoint_matrix(q);
    for (i, &mass) in endpoints.iter().enumerate() {
        if mass <= 0.0 {
            return Err(Error::SingularConditioning(format!(
                "endpoint pair ({},{})",
                i / k,
                i % k
            )));
        }
    }
    let interior = space.num_cells() / (k * k);
    let mut table = vec![0.0; space.num_cells()];
    let tail = space.num_cells() / k;
    for (idx, &mass) in q.values().iter().enumerate() {
        let x0 = idx / tail;
        let rem = idx % tail;
        let x1 = rem % k;
        let path = rem / k;
        table[(x0 * k + x1) * interior + path] = mass / endpoints[x0 * k + x1];
    }
    Ok(BridgeConditional { space, table })
}

/// Builds the fitting initializer `p_0(x_0, path, x_1) =
/// bridge(x_0, x_1, path) · eta(x_0, x_1)`. The result has the coupling's
/// endpoint marginals and the bridge as its interior conditional.
pub fn init_p0(bridge: &BridgeConditional, eta: &Coupling) -> Result<JointDistribution> {
    let space = bridge.space();
    let k = space.cardinality();
    if eta.cardinality() != k {
        return Err(Error::Validation(format!(
            "coupling cardinality {} does not match state space cardinality {k}",
            eta.cardinality()
        )));
    }
    let mut values = vec![0.0; space.num_cells()];
    let tail = space.num_cells() / k;
    for (idx, slot) in values.iter_mut().enumerate() {
        let x0 = idx / tail;
        let rem = idx % tail;
        let x1 = rem % k;
        let path = rem / k;
        *slot = bridge.value(x0, x1, path) * eta.value(x0, x1);
    }
    JointDistribution::new(space, values)
}

/// Largest cellwise deviation from the Markov factorization
/// `p(x_{n+1} | x_{0:n}) = p(x_{n+1} | x_n)`, over all histories with
/// positive mass. Zero (up to roundoff) iff `p` is Markov.
pub fn markov_factorization_residual(p: &JointDistribution) -> Result<f64> {
    let space = p.space();
    let k = space.cardinality();
    let mut worst = 0.0f64;
    for n in 1..space.time_points() - 1 {
        let head: Vec<usize> = (0..=n).collect();
        let head_next: Vec<usize> = (0..=n + 1).collect();
        let hist = p.marginal(&head)?;
        let hist_next = p.marginal(&head_next)?;
        let pair = p.marginal(&[n, n + 1])?;
        let time = p.marginal(&[n])?;
        for (h_idx, &h_mass) in hist.values().iter().enumerate() {
            if h_mass <= 0.0 {
                continue;
            }
            let a = h_idx % k; // state at time n
            for b in 0..k {
                let full = hist_next.values()[h_idx * k + b] / h_mass;
                let markov = pair.values()[a * k + b] / time.values()[a];
                worst = worst.max((full - markov).abs());
            }
        }
    }
    Ok(worst)
}

/// Parameters for seeded random instance generation. Rows and marginals are
/// drawn from a symmetric Dirichlet, floored at `eps_floor`, and renormalized
/// so the rate constant stays bounded away from zero.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub cardinality: usize,
    pub interior_count: usize,
    pub dirichlet_concentration: f64,
    pub eps_floor: f64,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn new(cardinality: usize, interior_count: usize, seed: u64) -> Self {
        Self {
            cardinality,
            interior_count,
            dirichlet_concentration: 1.0,
            eps_floor: 1e-3,
            seed,
        }
    }
}

/// A fully specified problem instance: reference process plus endpoint
/// marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub markov: MarkovSpec,
    pub marginals: MarginalPair,
}

fn dirichlet_row<R: Rng>(rng: &mut R, k: usize, concentration: f64, floor: f64) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive concentration");
    let mut row: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    let sum: f64 = row.iter().sum();
    let sum = if sum > 0.0 { sum } else { 1.0 };
    for x in &mut row {
        *x = (*x / sum).max(floor);
    }
    let sum: f64 = row.iter().sum();
    for x in &mut row {
        *x /= sum;
    }
    row
}

/// Draws a random instance. The draw order is fixed (initial law, transition
/// rows in step-major order, mu, nu) so a seed pins the instance exactly.
pub fn sample_instance(generator: &GeneratorSpec) -> Result<Instance> {
    if generator.dirichlet_concentration <= 0.0 {
        return Err(Error::Validation(format!(
            "dirichlet concentration must be positive, got {}",
            generator.dirichlet_concentration
        )));
    }
    if !(0.0..0.5).contains(&generator.eps_floor) {
        return Err(Error::Validation(format!(
            "eps floor must lie in [0, 0.5), got {}",
            generator.eps_floor
        )));
    }
    let space = StateSpaceSpec::new(generator.cardinality, generator.interior_count)?;
    let k = generator.cardinality;
    let mut rng = crate::exec::stream_rng(generator.seed, 0);
    let conc = generator.dirichlet_concentration;
    let floor = generator.eps_floor;

    let initial = dirichlet_row(&mut rng, k, conc, floor);
    let mut transitions = Vec::with_capacity(space.time_points() - 1);
    for _ in 0..space.time_points() - 1 {
        let mut matrix = Vec::with_capacity(k * k);
        for _ in 0..k {
            matrix.extend(dirichlet_row(&mut rng, k, conc, floor));
        }
        transitions.push(matrix);
    }
    let mu = dirichlet_row(&mut rng, k, conc, floor);
    let nu = dirichlet_row(&mut rng, k, conc, floor);

    Ok(Instance {
        markov: MarkovSpec::new(space, initial, transitions)?,
        marginals: MarginalPair::new(mu, nu)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::kl_divergence;

    fn uniform_spec(k: usize, interior: usize) -> MarkovSpec {
        let space = StateSpaceSpec::new(k, interior).unwrap();
        let initial = vec![1.0 / k as f64; k];
        let transitions = vec![vec![1.0 / k as f64; k * k]; space.time_points() - 1];
        MarkovSpec::new(space, initial, transitions).unwrap()
    }

    #[test]
    fn iid_uniform_joint_is_uniform() {
        let q = build_markov_joint(&uniform_spec(2, 1)).unwrap();
        for &v in q.values() {
            assert!((v - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn joint_mass_is_the_product_of_factors() {
        let space = StateSpaceSpec::new(2, 1).unwrap();
        let spec = MarkovSpec::new(
            space,
            vec![0.6, 0.4],
            vec![vec![0.9, 0.1, 0.2, 0.8], vec![0.9, 0.1, 0.2, 0.8]],
        )
        .unwrap();
        let q = build_markov_joint(&spec).unwrap();
        // Hand product of the three factors along (0,0,0).
        let expected = 0.6 * 0.9 * 0.9;
        assert!((q.value_at(&[0, 0, 0]).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn joint_initial_marginal_matches_the_spec() {
        let space = StateSpaceSpec::new(3, 2).unwrap();
        let spec = MarkovSpec::new(
            space,
            vec![0.5, 0.3, 0.2],
            vec![
                vec![0.6, 0.2, 0.2, 0.1, 0.8, 0.1, 0.3, 0.3, 0.4],
                vec![0.2, 0.5, 0.3, 0.4, 0.4, 0.2, 0.25, 0.25, 0.5],
                vec![0.7, 0.2, 0.1, 0.1, 0.1, 0.8, 0.45, 0.1, 0.45],
            ],
        )
        .unwrap();
        let q = build_markov_joint(&spec).unwrap();
        let m = q.marginal(&[0]).unwrap();
        for (got, want) in m.values().iter().zip(spec.initial()) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_transition_entry_is_rejected_naming_the_cell() {
        let space = StateSpaceSpec::new(2, 1).unwrap();
        let err = MarkovSpec::new(
            space,
            vec![0.5, 0.5],
            vec![vec![1.0, 0.0, 0.5, 0.5], vec![0.5, 0.5, 0.5, 0.5]],
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("matrix 0"), "{msg}");
        assert!(msg.contains("row 0"), "{msg}");
        assert!(msg.contains("column 1"), "{msg}");
    }

    #[test]
    fn non_stochastic_row_is_rejected() {
        let space = StateSpaceSpec::new(2, 1).unwrap();
        assert!(matches!(
            MarkovSpec::new(
                space,
                vec![0.5, 0.5],
                vec![vec![0.7, 0.7, 0.5, 0.5], vec![0.5, 0.5, 0.5, 0.5]],
            ),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn uniform_bridge_conditional_is_uniform() {
        let q = build_markov_joint(&uniform_spec(2, 1)).unwrap();
        let bridge = bridge_conditional(&q).unwrap();
        for x0 in 0..2 {
            for x1 in 0..2 {
                for path in 0..2 {
                    assert!((bridge.value(x0, x1, path) - 0.5).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn bridge_times_endpoints_reproduces_the_joint() {
        let instance = sample_instance(&GeneratorSpec::new(3, 2, 7)).unwrap();
        let q = build_markov_joint(&instance.markov).unwrap();
        let bridge = bridge_conditional(&q).unwrap();
        let endpoints = endpoint_matrix(&q);
        let k = 3usize;
        for (idx, &mass) in q.values().iter().enumerate() {
            let (x0, x1, path) = bridge.split_cell(idx);
            let recombined = bridge.value(x0, x1, path) * endpoints[x0 * k + x1];
            assert!((recombined - mass).abs() < 1e-15);
        }
    }

    #[test]
    fn independent_coupling_is_the_product() {
        let marginals = MarginalPair::new(vec![0.3, 0.7], vec![0.4, 0.6]).unwrap();
        let eta = independent_coupling(&marginals);
        assert!((eta.value(0, 0) - 0.12).abs() < 1e-15);
        // Row and column sums reproduce the marginals exactly.
        for a in 0..2 {
            let row: f64 = (0..2).map(|b| eta.value(a, b)).sum();
            assert!((row - marginals.mu()[a]).abs() < 1e-15);
        }
        for b in 0..2 {
            let col: f64 = (0..2).map(|a| eta.value(a, b)).sum();
            assert!((col - marginals.nu()[b]).abs() < 1e-15);
        }
    }

    #[test]
    fn init_with_reference_coupling_reproduces_the_reference() {
        let instance = sample_instance(&GeneratorSpec::new(2, 2, 11)).unwrap();
        let q = build_markov_joint(&instance.markov).unwrap();
        let bridge = bridge_conditional(&q).unwrap();
        let q_endpoints = endpoint_matrix(&q);
        let q_marginal_pair = MarginalPair::new(
            q.marginal(&[0]).unwrap().values().to_vec(),
            q.marginal(&[q.space().last_time()])
                .unwrap()
                .values()
                .to_vec(),
        )
        .unwrap();
        let eta = Coupling::new(q_endpoints, &q_marginal_pair).unwrap();
        let p0 = init_p0(&bridge, &eta).unwrap();
        assert!(kl_divergence(&p0, &q).unwrap().abs() < 1e-13);
    }

    #[test]
    fn coupling_marginal_mismatch_is_rejected() {
        let marginals = MarginalPair::new(vec![0.3, 0.7], vec![0.4, 0.6]).unwrap();
        let other = MarginalPair::new(vec![0.5, 0.5], vec![0.4, 0.6]).unwrap();
        let eta = independent_coupling(&marginals);
        assert!(matches!(
            Coupling::new(eta.matrix().to_vec(), &other),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn generated_instances_are_deterministic_in_the_seed() {
        let a = sample_instance(&GeneratorSpec::new(3, 1, 42)).unwrap();
        let b = sample_instance(&GeneratorSpec::new(3, 1, 42)).unwrap();
        assert_eq!(a, b);
        let c = sample_instance(&GeneratorSpec::new(3, 1, 43)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn generated_rows_respect_the_floor() {
        let generator = GeneratorSpec {
            cardinality: 3,
            interior_count: 2,
            dirichlet_concentration: 0.3,
            eps_floor: 1e-2,
            seed: 5,
        };
        let instance = sample_instance(&generator).unwrap();
        // After flooring and renormalization every entry stays above
        // floor / (1 + K * floor).
        let min_allowed = 1e-2 / (1.0 + 3.0 * 1e-2);
        for t in instance.markov.transitions() {
            for &x in t {
                assert!(x >= min_allowed);
            }
        }
        for &x in instance.marginals.mu() {
            assert!(x >= min_allowed);
        }
    }

    #[test]
    fn markov_joint_passes_the_factorization_test() {
        let instance = sample_instance(&GeneratorSpec::new(2, 2, 9)).unwrap();
        let q = build_markov_joint(&instance.markov).unwrap();
        assert!(markov_factorization_residual(&q).unwrap() < 1e-12);
    }
}
