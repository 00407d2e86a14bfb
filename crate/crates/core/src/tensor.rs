//! Dense probability tensors and signed measures over trajectories, with
//! marginalization, conditioning, KL divergence and Euclidean geometry.

use crate::error::{Error, Result};
use crate::space::StateSpaceSpec;

/// Total-mass drift a probability tensor may carry before it is rejected.
/// Drift below this is silently renormalized and reported to the caller.
pub const PROBABILITY_SUM_TOL: f64 = 1e-12;

/// A probability distribution over trajectories: a dense nonnegative tensor
/// summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    space: StateSpaceSpec,
    values: Vec<f64>,
}

impl JointDistribution {
    /// Validates nonnegativity and total mass. Mass within
    /// [`PROBABILITY_SUM_TOL`] of one is renormalized; larger violations are
    /// rejected. Use [`new_with_drift`](Self::new_with_drift) to observe the
    /// renormalization drift.
    pub fn new(space: StateSpaceSpec, values: Vec<f64>) -> Result<Self> {
        Self::new_with_drift(space, values).map(|(p, _)| p)
    }

    pub fn new_with_drift(space: StateSpaceSpec, values: Vec<f64>) -> Result<(Self, f64)> {
        if values.len() != space.num_cells() {
            return Err(Error::Domain(format!(
                "tensor has {} cells, space expects {}",
                values.len(),
                space.num_cells()
            )));
        }
        let mut sum = 0.0;
        for (idx, &v) in values.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Validation(format!(
                    "probability tensor entry at {} is {v}",
                    space.cell_label(idx)
                )));
            }
            sum += v;
        }
        let drift = (sum - 1.0).abs();
        if drift > PROBABILITY_SUM_TOL {
            return Err(Error::Validation(format!(
                "probability tensor sums to {sum}, drift {drift:e} exceeds {PROBABILITY_SUM_TOL:e}"
            )));
        }
        let mut values = values;
        if drift > 0.0 {
            for v in &mut values {
                *v /= sum;
            }
        }
        Ok((Self { space, values }, drift))
    }

    /// The uniform distribution on the space.
    pub fn uniform(space: StateSpaceSpec) -> Self {
        let n = space.num_cells();
        Self {
            space,
            values: vec![1.0 / n as f64; n],
        }
    }

    #[inline]
    pub fn space(&self) -> StateSpaceSpec {
        self.space
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, trajectory: &[usize]) -> Result<f64> {
        Ok(self.values[self.space.flat_index(trajectory)?])
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Marginal distribution over the given (sorted, nonempty) time points.
    pub fn marginal(&self, times: &[usize]) -> Result<Marginal> {
        marginal_values(self.space, &self.values, times)
    }

    /// Conditional table `c(target | given)` obtained from the two marginals.
    ///
    /// Fails with a singular-conditioning error naming the offending cell when
    /// the conditioning marginal vanishes somewhere.
    pub fn conditional(&self, target: &[usize], given: &[usize]) -> Result<ConditionalTable> {
        for t in target {
            if given.contains(t) {
                return Err(Error::Domain(format!(
                    "time {t} appears in both target and given sets"
                )));
            }
        }
        let mut union: Vec<usize> = given.iter().chain(target.iter()).copied().collect();
        union.sort_unstable();
        let joint = self.marginal(&union)?;
        let given_marginal = self.marginal(given)?;

        let cardinality = self.space.cardinality();
        let target_cells = cardinality.pow(target.len() as u32);
        let given_cells = cardinality.pow(given.len() as u32);
        let mut values = vec![0.0; target_cells * given_cells];

        // Reindex the union marginal into (given-major, target-minor) layout.
        let mut union_states = vec![0usize; union.len()];
        for (union_idx, &mass) in joint.values().iter().enumerate() {
            decode_states(union_idx, cardinality, &mut union_states);
            let g = encode_subset(&union, &union_states, given, cardinality);
            let t = encode_subset(&union, &union_states, target, cardinality);
            let denom = given_marginal.values()[g];
            if denom <= 0.0 {
                if mass > 0.0 {
                    return Err(Error::SingularConditioning(format!(
                        "marginal over times {given:?}, cell index {g}"
                    )));
                }
                continue;
            }
            values[g * target_cells + t] = mass / denom;
        }
        // Any zero-mass conditioning cell makes the whole table undefined.
        for (g, &mass) in given_marginal.values().iter().enumerate() {
            if mass <= 0.0 {
                return Err(Error::SingularConditioning(format!(
                    "marginal over times {given:?}, cell index {g}"
                )));
            }
        }
        Ok(ConditionalTable {
            cardinality,
            given: given.to_vec(),
            target: target.to_vec(),
            values,
        })
    }

    /// Copy of this distribution viewed as a signed measure.
    pub fn to_signed(&self) -> SignedMeasure {
        SignedMeasure {
            space: self.space,
            values: self.values.clone(),
        }
    }

    /// Pointwise difference `self - other` as a signed measure.
    pub fn difference(&self, other: &JointDistribution) -> Result<SignedMeasure> {
        check_same_space(self.space, other.space)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(SignedMeasure {
            space: self.space,
            values,
        })
    }

    /// `self + scale * direction`, validated as a probability tensor.
    pub fn perturbed(&self, direction: &SignedMeasure, scale: f64) -> Result<JointDistribution> {
        check_same_space(self.space, direction.space)?;
        let values = self
            .values
            .iter()
            .zip(&direction.values)
            .map(|(p, d)| p + scale * d)
            .collect();
        JointDistribution::new(self.space, values)
    }

    pub fn l1_distance(&self, other: &JointDistribution) -> Result<f64> {
        check_same_space(self.space, other.space)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }
}

/// Kullback–Leibler divergence `Σ p ln(p/q)` with the `0·ln 0 = 0` convention
/// implemented by skipping zero-mass cells.
pub fn kl_divergence(p: &JointDistribution, q: &JointDistribution) -> Result<f64> {
    check_same_space(p.space, q.space)?;
    let mut sum = 0.0;
    for (idx, (&pv, &qv)) in p.values.iter().zip(&q.values).enumerate() {
        if pv > 0.0 {
            if qv <= 0.0 {
                return Err(Error::InfiniteDivergence {
                    cell: p.space.cell_label(idx),
                    p_value: pv,
                });
            }
            sum += pv * (pv / qv).ln();
        }
    }
    Ok(sum)
}

/// A dense real-valued tensor over trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedMeasure {
    space: StateSpaceSpec,
    values: Vec<f64>,
}

impl SignedMeasure {
    pub fn new(space: StateSpaceSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.num_cells() {
            return Err(Error::Domain(format!(
                "tensor has {} cells, space expects {}",
                values.len(),
                space.num_cells()
            )));
        }
        Ok(Self { space, values })
    }

    pub fn zeros(space: StateSpaceSpec) -> Self {
        Self {
            space,
            values: vec![0.0; space.num_cells()],
        }
    }

    pub fn ones(space: StateSpaceSpec) -> Self {
        Self {
            space,
            values: vec![1.0; space.num_cells()],
        }
    }

    #[inline]
    pub fn space(&self) -> StateSpaceSpec {
        self.space
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Euclidean inner product over all tensor entries.
    pub fn dot(&self, other: &SignedMeasure) -> Result<f64> {
        check_same_space(self.space, other.space)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum())
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&mut self, factor: f64) {
        for v in &mut self.values {
            *v *= factor;
        }
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &SignedMeasure, scale: f64) -> Result<()> {
        check_same_space(self.space, other.space)?;
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += scale * b;
        }
        Ok(())
    }

    /// Signed marginal over the given time points.
    pub fn marginal(&self, times: &[usize]) -> Result<Marginal> {
        marginal_values(self.space, &self.values, times)
    }
}

/// Marginal of a tensor over an ordered subset of time points, laid out
/// row-major in the kept times.
#[derive(Debug, Clone, PartialEq)]
pub struct Marginal {
    times: Vec<usize>,
    cardinality: usize,
    values: Vec<f64>,
}

impl Marginal {
    pub fn times(&self) -> &[usize] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value_at(&self, states: &[usize]) -> Result<f64> {
        if states.len() != self.times.len() {
            return Err(Error::Domain(format!(
                "marginal over {} times indexed with {} states",
                self.times.len(),
                states.len()
            )));
        }
        let mut idx = 0usize;
        for &s in states {
            if s >= self.cardinality {
                return Err(Error::Domain(format!(
                    "state {s} out of range for cardinality {}",
                    self.cardinality
                )));
            }
            idx = idx * self.cardinality + s;
        }
        Ok(self.values[idx])
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// True when the entries form a probability vector within `tol`.
    pub fn is_probability(&self, tol: f64) -> bool {
        self.values.iter().all(|&v| v >= -tol) && (self.total_mass() - 1.0).abs() <= tol
    }
}

fn marginal_values(space: StateSpaceSpec, values: &[f64], times: &[usize]) -> Result<Marginal> {
    if times.is_empty() {
        return Err(Error::Domain(
            "marginal requested over an empty set of time points".into(),
        ));
    }
    let mut prev: Option<usize> = None;
    for &t in times {
        if t >= space.time_points() {
            return Err(Error::Domain(format!(
                "time point {t} out of range 0..{}",
                space.time_points()
            )));
        }
        if let Some(p) = prev {
            if t <= p {
                return Err(Error::Domain(
                    "marginal time points must be strictly increasing".into(),
                ));
            }
        }
        prev = Some(t);
    }

    let cardinality = space.cardinality();
    let strides = space.strides();
    let mut out = vec![0.0; cardinality.pow(times.len() as u32)];
    for (idx, &v) in values.iter().enumerate() {
        let mut m = 0usize;
        for &t in times {
            m = m * cardinality + (idx / strides[t]) % cardinality;
        }
        out[m] += v;
    }
    Ok(Marginal {
        times: times.to_vec(),
        cardinality,
        values: out,
    })
}

/// Conditional probability table `c(target | given)`, stored given-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTable {
    cardinality: usize,
    given: Vec<usize>,
    target: Vec<usize>,
    values: Vec<f64>,
}

impl ConditionalTable {
    pub fn given_times(&self) -> &[usize] {
        &self.given
    }

    pub fn target_times(&self) -> &[usize] {
        &self.target
    }

    pub fn target_cells(&self) -> usize {
        self.cardinality.pow(self.target.len() as u32)
    }

    pub fn given_cells(&self) -> usize {
        self.cardinality.pow(self.given.len() as u32)
    }

    /// The probability vector over targets for one assignment of the
    /// conditioning states.
    pub fn slice(&self, given_states: &[usize]) -> Result<&[f64]> {
        if given_states.len() != self.given.len() {
            return Err(Error::Domain(format!(
                "conditional over {} given times indexed with {} states",
                self.given.len(),
                given_states.len()
            )));
        }
        let mut g = 0usize;
        for &s in given_states {
            if s >= self.cardinality {
                return Err(Error::Domain(format!(
                    "state {s} out of range for cardinality {}",
                    self.cardinality
                )));
            }
            g = g * self.cardinality + s;
        }
        let width = self.target_cells();
        Ok(&self.values[g * width..(g + 1) * width])
    }

    pub fn value(&self, given_states: &[usize], target_states: &[usize]) -> Result<f64> {
        let slice = self.slice(given_states)?;
        if target_states.len() != self.target.len() {
            return Err(Error::Domain(format!(
                "conditional over {} target times indexed with {} states",
                self.target.len(),
                target_states.len()
            )));
        }
        let mut t = 0usize;
        for &s in target_states {
            if s >= self.cardinality {
                return Err(Error::Domain(format!(
                    "state {s} out of range for cardinality {}",
                    self.cardinality
                )));
            }
            t = t * self.cardinality + s;
        }
        Ok(slice[t])
    }
}

fn check_same_space(a: StateSpaceSpec, b: StateSpaceSpec) -> Result<()> {
    if a != b {
        return Err(Error::Domain(format!(
            "state spaces differ: {}^{} vs {}^{}",
            a.cardinality(),
            a.time_points(),
            b.cardinality(),
            b.time_points()
        )));
    }
    Ok(())
}

fn decode_states(mut index: usize, cardinality: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = index % cardinality;
        index /= cardinality;
    }
}

fn encode_subset(
    union: &[usize],
    union_states: &[usize],
    subset: &[usize],
    cardinality: usize,
) -> usize {
    let mut idx = 0usize;
    for &t in subset {
        let pos = union.iter().position(|&u| u == t).expect("subset of union");
        idx = idx * cardinality + union_states[pos];
    }
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space21() -> StateSpaceSpec {
        StateSpaceSpec::new(2, 1).unwrap()
    }

    #[test]
    fn uniform_marginal_over_first_time_is_uniform() {
        let p = JointDistribution::uniform(space21());
        let m = p.marginal(&[0]).unwrap();
        assert_eq!(m.values(), &[0.5, 0.5]);
    }

    #[test]
    fn marginal_over_all_times_is_the_tensor_itself() {
        let p = JointDistribution::uniform(space21());
        let m = p.marginal(&[0, 1, 2]).unwrap();
        assert_eq!(m.values(), p.values());
    }

    #[test]
    fn empty_marginal_subset_is_rejected() {
        let p = JointDistribution::uniform(space21());
        assert!(matches!(p.marginal(&[]), Err(Error::Domain(_))));
        assert!(matches!(p.marginal(&[3]), Err(Error::Domain(_))));
        assert!(matches!(p.marginal(&[1, 1]), Err(Error::Domain(_))));
    }

    #[test]
    fn kl_of_identical_distributions_is_zero() {
        let p = JointDistribution::uniform(space21());
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn kl_zero_cells_contribute_nothing() {
        let space = space21();
        let mut values = vec![0.0; 8];
        values[0] = 0.5;
        values[7] = 0.5;
        let p = JointDistribution::new(space, values).unwrap();
        let q = JointDistribution::uniform(space);
        // Only the two positive cells contribute: 2 * 0.5 * ln(0.5/0.125).
        let expected = (0.5f64 / 0.125).ln();
        assert!((kl_divergence(&p, &q).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn kl_against_vanishing_support_is_an_error() {
        let space = space21();
        let p = JointDistribution::uniform(space);
        let mut values = vec![0.0; 8];
        values[0] = 1.0;
        let q = JointDistribution::new(space, values).unwrap();
        assert!(matches!(
            kl_divergence(&p, &q),
            Err(Error::InfiniteDivergence { .. })
        ));
    }

    #[test]
    fn all_ones_norm_counts_cells() {
        let xi = SignedMeasure::ones(space21());
        assert_eq!(xi.norm_sq(), 8.0);
    }

    #[test]
    fn dot_requires_matching_spaces() {
        let a = SignedMeasure::ones(space21());
        let b = SignedMeasure::ones(StateSpaceSpec::new(3, 1).unwrap());
        assert!(matches!(a.dot(&b), Err(Error::Domain(_))));
    }

    #[test]
    fn probability_drift_beyond_tolerance_is_rejected() {
        let space = space21();
        let values = vec![0.13; 8]; // sums to 1.04
        assert!(matches!(
            JointDistribution::new(space, values),
            Err(Error::Validation(_))
        ));
        let (_, drift) = JointDistribution::new_with_drift(space, vec![0.125 + 1e-14; 8]).unwrap();
        assert!(drift > 0.0 && drift < 1e-12);
    }

    #[test]
    fn conditional_of_product_distribution_is_uniform() {
        // Independent uniforms: every conditional slice is the uniform vector.
        let p = JointDistribution::uniform(space21());
        let c = p.conditional(&[1], &[0, 2]).unwrap();
        for g0 in 0..2 {
            for g1 in 0..2 {
                assert_eq!(c.slice(&[g0, g1]).unwrap(), &[0.5, 0.5]);
            }
        }
    }

    #[test]
    fn conditional_rejects_overlapping_sets_and_zero_mass() {
        let p = JointDistribution::uniform(space21());
        assert!(matches!(
            p.conditional(&[0], &[0, 1]),
            Err(Error::Domain(_))
        ));

        let mut values = vec![0.0; 8];
        values[0] = 1.0; // all mass on state 0 everywhere
        let q = JointDistribution::new(space21(), values).unwrap();
        assert!(matches!(
            q.conditional(&[1], &[0]),
            Err(Error::SingularConditioning(_))
        ));
    }
}
