//! Small dense symmetric eigendecomposition (cyclic Jacobi) used to build
//! pseudo-inverses of constraint Gram matrices. The matrices involved are
//! tiny (one row per marginal cell), so no external linear algebra backend
//! is pulled in.

/// Eigendecomposition `A = V diag(λ) Vᵀ` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub n: usize,
    /// Eigenvalues, unsorted.
    pub eigenvalues: Vec<f64>,
    /// Row-major `n×n`; column `j` is the eigenvector for `eigenvalues[j]`.
    pub vectors: Vec<f64>,
}

/// Cyclic Jacobi iteration. `matrix` is row-major `n×n` and assumed symmetric;
/// only the symmetric part participates in the rotations.
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> SymmetricEigen {
    assert_eq!(matrix.len(), n * n, "matrix must be n×n");
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    if n == 0 {
        return SymmetricEigen {
            n,
            eigenvalues: vec![],
            vectors: v,
        };
    }

    let frobenius_sq: f64 = a.iter().map(|x| x * x).sum();
    let stop = (frobenius_sq * 1e-30).max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off_sq = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off_sq += a[p * n + q] * a[p * n + q];
            }
        }
        if 2.0 * off_sq <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // Two-sided rotation in the (p, q) plane.
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let eigenvalues = (0..n).map(|i| a[i * n + i]).collect();
    SymmetricEigen {
        n,
        eigenvalues,
        vectors: v,
    }
}

impl SymmetricEigen {
    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Number of eigenvalues strictly above `cutoff`.
    pub fn rank_above(&self, cutoff: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > cutoff).count()
    }

    /// Applies the spectral pseudo-inverse, dropping eigenvalues at or below
    /// `cutoff`: `out = Σ_{λ>cutoff} (vᵀy / λ) v`.
    pub fn apply_pseudo_inverse(&self, y: &[f64], cutoff: f64, out: &mut [f64]) {
        assert_eq!(y.len(), self.n);
        assert_eq!(out.len(), self.n);
        out.fill(0.0);
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            if lambda <= cutoff {
                continue;
            }
            let mut proj = 0.0;
            for (i, &yi) in y.iter().enumerate() {
                proj += self.vectors[i * self.n + j] * yi;
            }
            let w = proj / lambda;
            for (i, slot) in out.iter_mut().enumerate() {
                *slot += w * self.vectors[i * self.n + j];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(e: &SymmetricEigen) -> Vec<f64> {
        let n = e.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let mut s = 0.0;
                for j in 0..n {
                    s += e.vectors[i * n + j] * e.eigenvalues[j] * e.vectors[k * n + j];
                }
                out[i * n + k] = s;
            }
        }
        out
    }

    #[test]
    fn reconstructs_a_known_symmetric_matrix() {
        let a = vec![4.0, 1.0, 0.5, 1.0, 3.0, -1.0, 0.5, -1.0, 2.0];
        let e = symmetric_eigen(&a, 3);
        let r = reconstruct(&e);
        for (x, y) in a.iter().zip(&r) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal() {
        // Deterministic symmetric matrix with repeated structure.
        let n = 8;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = 1.0 / (1.0 + (i as f64 - j as f64).abs());
            }
        }
        let e = symmetric_eigen(&a, n);
        for j1 in 0..n {
            for j2 in 0..n {
                let mut dot = 0.0;
                for i in 0..n {
                    dot += e.vectors[i * n + j1] * e.vectors[i * n + j2];
                }
                let expected = if j1 == j2 { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pseudo_inverse_solves_on_the_range() {
        // Rank-deficient PSD matrix: G = B Bᵀ with B 3×2.
        let b = [1.0, 0.0, 1.0, 1.0, 0.0, 2.0];
        let mut g = vec![0.0; 9];
        for i in 0..3 {
            for k in 0..3 {
                g[i * 3 + k] = b[i * 2] * b[k * 2] + b[i * 2 + 1] * b[k * 2 + 1];
            }
        }
        let e = symmetric_eigen(&g, 3);
        let cutoff = 1e-10 * e.max_eigenvalue();
        assert_eq!(e.rank_above(cutoff), 2);

        // For y in range(G), G · G⁺ y = y.
        let y = [
            g[0] * 0.3 + g[1] * (-0.7) + g[2] * 1.1,
            g[3] * 0.3 + g[4] * (-0.7) + g[5] * 1.1,
            g[6] * 0.3 + g[7] * (-0.7) + g[8] * 1.1,
        ];
        let mut z = [0.0; 3];
        e.apply_pseudo_inverse(&y, cutoff, &mut z);
        for i in 0..3 {
            let gi: f64 = (0..3).map(|k| g[i * 3 + k] * z[k]).sum();
            assert!((gi - y[i]).abs() < 1e-10);
        }
    }
}
