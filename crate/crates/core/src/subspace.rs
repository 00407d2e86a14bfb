//! Linear subspaces of signed measures defined by vanishing marginals, with
//! orthogonal projections computed through the pseudo-inverse of the small
//! constraint Gram matrix.
//!
//! Three subspaces are used: measures whose consecutive-pair marginals all
//! vanish, measures whose endpoint-pair marginal vanishes, and measures whose
//! two single-endpoint marginals vanish.

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, SymmetricEigen};
use crate::space::StateSpaceSpec;
use crate::tensor::SignedMeasure;

/// Relative eigenvalue cutoff for the Gram pseudo-inverse. Marginal-cell
/// constraints are linearly dependent (they share total mass), so the Gram
/// matrix is always rank deficient.
pub const GRAM_CUTOFF_RELATIVE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubspaceId {
    /// All consecutive-pair marginals vanish.
    PairMarginalsZero,
    /// The endpoint-pair marginal vanishes.
    EndpointPairZero,
    /// Both single-endpoint marginals vanish.
    EndpointSinglesZero,
}

impl std::fmt::Display for SubspaceId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SubspaceId::PairMarginalsZero => write!(f, "L_A"),
            SubspaceId::EndpointPairZero => write!(f, "L_B"),
            SubspaceId::EndpointSinglesZero => write!(f, "L_C"),
        }
    }
}

/// One constraint row: a marginal cell, i.e. the sum of all tensor cells whose
/// trajectory passes through the fixed (time, state) pairs.
#[derive(Debug, Clone, Copy)]
struct RowSpec {
    coords: [(usize, usize); 2],
    len: usize,
}

impl RowSpec {
    fn single(t: usize, state: usize) -> Self {
        Self {
            coords: [(t, state), (0, 0)],
            len: 1,
        }
    }

    fn pair(t0: usize, s0: usize, t1: usize, s1: usize) -> Self {
        Self {
            coords: [(t0, s0), (t1, s1)],
            len: 2,
        }
    }

    fn fixed(&self) -> &[(usize, usize)] {
        &self.coords[..self.len]
    }
}

/// The linear operator mapping a signed measure to its constrained marginal
/// cells, together with the spectral factorization of its Gram matrix.
#[derive(Debug, Clone)]
pub struct ConstraintOperator {
    space: StateSpaceSpec,
    subspace: SubspaceId,
    rows: Vec<RowSpec>,
    eigen: SymmetricEigen,
    cutoff: f64,
    rank: usize,
}

/// Builds the constraint operator for one subspace. Row counts: the pair
/// subspace has `(N+1)·K²` rows, the endpoint-pair subspace `K²`, and the
/// endpoint-singles subspace `2K`.
pub fn build_constraint_operator(
    space: StateSpaceSpec,
    subspace: SubspaceId,
) -> Result<ConstraintOperator> {
    let k = space.cardinality();
    let t = space.time_points();
    let mut rows = Vec::new();
    match subspace {
        SubspaceId::PairMarginalsZero => {
            for n in 0..t - 1 {
                for a in 0..k {
                    for b in 0..k {
                        rows.push(RowSpec::pair(n, a, n + 1, b));
                    }
                }
            }
        }
        SubspaceId::EndpointPairZero => {
            for a in 0..k {
                for b in 0..k {
                    rows.push(RowSpec::pair(0, a, t - 1, b));
                }
            }
        }
        SubspaceId::EndpointSinglesZero => {
            for a in 0..k {
                rows.push(RowSpec::single(0, a));
            }
            for b in 0..k {
                rows.push(RowSpec::single(t - 1, b));
            }
        }
    }

    // Gram entries count the trajectories satisfying both rows' constraints:
    // zero on conflict, K^(T - #distinct fixed coords) otherwise.
    let m = rows.len();
    let mut gram = vec![0.0; m * m];
    for (i, row_i) in rows.iter().enumerate() {
        for (j, row_j) in rows.iter().enumerate().skip(i) {
            let mut fixed: Vec<(usize, usize)> = row_i.fixed().to_vec();
            let mut conflict = false;
            for &(tj, sj) in row_j.fixed() {
                match fixed.iter().find(|(ti, _)| *ti == tj) {
                    Some(&(_, si)) if si != sj => {
                        conflict = true;
                        break;
                    }
                    Some(_) => {}
                    None => fixed.push((tj, sj)),
                }
            }
            let count = if conflict {
                0.0
            } else {
                (k as f64).powi((t - fixed.len()) as i32)
            };
            gram[i * m + j] = count;
            gram[j * m + i] = count;
        }
    }

    let eigen = symmetric_eigen(&gram, m);
    let cutoff = GRAM_CUTOFF_RELATIVE * eigen.max_eigenvalue().max(0.0);
    let rank = eigen.rank_above(cutoff);
    Ok(ConstraintOperator {
        space,
        subspace,
        rows,
        eigen,
        cutoff,
        rank,
    })
}

impl ConstraintOperator {
    pub fn space(&self) -> StateSpaceSpec {
        self.space
    }

    pub fn subspace(&self) -> SubspaceId {
        self.subspace
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Rank of the constraint matrix (eigenvalues of the Gram matrix above
    /// the spectral cutoff).
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Dimension of the subspace: tensor cells minus constraint rank.
    pub fn subspace_dimension(&self) -> usize {
        self.space.num_cells() - self.rank
    }

    /// Applies the constraint operator: each output entry is one marginal cell
    /// of `xi`.
    pub fn apply(&self, xi: &SignedMeasure) -> Result<Vec<f64>> {
        if xi.space() != self.space {
            return Err(Error::Domain(
                "signed measure space does not match the operator".into(),
            ));
        }
        let k = self.space.cardinality();
        let t = self.space.time_points();
        let strides = self.space.strides();
        let mut out = vec![0.0; self.rows.len()];
        match self.subspace {
            SubspaceId::PairMarginalsZero => {
                for (idx, &v) in xi.values().iter().enumerate() {
                    let mut prev = idx / strides[0] % k;
                    for n in 0..t - 1 {
                        let next = idx / strides[n + 1] % k;
                        out[n * k * k + prev * k + next] += v;
                        prev = next;
                    }
                }
            }
            SubspaceId::EndpointPairZero => {
                for (idx, &v) in xi.values().iter().enumerate() {
                    let a = idx / strides[0] % k;
                    let b = idx % k;
                    out[a * k + b] += v;
                }
            }
            SubspaceId::EndpointSinglesZero => {
                for (idx, &v) in xi.values().iter().enumerate() {
                    let a = idx / strides[0] % k;
                    let b = idx % k;
                    out[a] += v;
                    out[k + b] += v;
                }
            }
        }
        Ok(out)
    }

    /// Applies the transpose: spreads row weights back onto tensor cells.
    pub fn apply_transpose(&self, weights: &[f64]) -> SignedMeasure {
        assert_eq!(weights.len(), self.rows.len());
        let k = self.space.cardinality();
        let t = self.space.time_points();
        let strides = self.space.strides();
        let mut out = SignedMeasure::zeros(self.space);
        let values = out.values_mut();
        match self.subspace {
            SubspaceId::PairMarginalsZero => {
                for (idx, v) in values.iter_mut().enumerate() {
                    let mut prev = idx / strides[0] % k;
                    for n in 0..t - 1 {
                        let next = idx / strides[n + 1] % k;
                        *v += weights[n * k * k + prev * k + next];
                        prev = next;
                    }
                }
            }
            SubspaceId::EndpointPairZero => {
                for (idx, v) in values.iter_mut().enumerate() {
                    let a = idx / strides[0] % k;
                    let b = idx % k;
                    *v += weights[a * k + b];
                }
            }
            SubspaceId::EndpointSinglesZero => {
                for (idx, v) in values.iter_mut().enumerate() {
                    let a = idx / strides[0] % k;
                    let b = idx % k;
                    *v += weights[a] + weights[k + b];
                }
            }
        }
        out
    }

    /// Largest absolute constrained marginal cell; zero (to roundoff) iff `xi`
    /// lies in the subspace.
    pub fn membership_residual(&self, xi: &SignedMeasure) -> Result<f64> {
        Ok(self
            .apply(xi)?
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v.abs())))
    }

    /// Orthogonal projection of `xi` onto the subspace:
    /// `xi - Cᵀ (C Cᵀ)⁺ C xi`.
    pub fn project(&self, xi: &SignedMeasure) -> Result<SignedMeasure> {
        let y = self.apply(xi)?;
        let mut z = vec![0.0; y.len()];
        self.eigen.apply_pseudo_inverse(&y, self.cutoff, &mut z);
        let correction = self.apply_transpose(&z);
        let mut projected = xi.clone();
        projected.add_scaled(&correction, -1.0)?;
        Ok(projected)
    }
}

/// The three constraint operators for one state space.
#[derive(Debug, Clone)]
pub struct SubspaceOps {
    pub pair: ConstraintOperator,
    pub endpoint_pair: ConstraintOperator,
    pub endpoint_singles: ConstraintOperator,
}

impl SubspaceOps {
    pub fn build(space: StateSpaceSpec) -> Result<Self> {
        Ok(Self {
            pair: build_constraint_operator(space, SubspaceId::PairMarginalsZero)?,
            endpoint_pair: build_constraint_operator(space, SubspaceId::EndpointPairZero)?,
            endpoint_singles: build_constraint_operator(space, SubspaceId::EndpointSinglesZero)?,
        })
    }
}
