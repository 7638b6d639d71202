//! The realignment map, its swap-operator variant, singular spectra, and the
//! faithfulness verdict built on them.
//!
//! For `rho = sum rho_{ij,kl} |i><j| (x) |k><l|` (A indices `i, j`, B indices
//! `k, l`) the realigned matrix is `sum rho_{ij,kl} |i><k| (x) |j><l|`, a
//! `dim_a^2 x dim_b^2` matrix. Its singular values are local-unitary
//! invariants; they decide faithfulness and feed the CCNR test.

use nalgebra::DVector;
use serde::Serialize;
use thiserror::Error;

use crate::channel::devectorize_vector;
use crate::qstate::{
    hermitian_eigenvalues, max_abs, partial_transpose, partial_transpose_matrix, BipartiteState, ComplexMatrix, StateError,
    Subsystem, C64,
};

/// Iteration cap handed to the SVD routine.
const SVD_MAX_ITERATIONS: usize = 10_000;

/// Convergence tolerances tried in turn. The implicit-shift iteration can
/// settle on wrong factors for exactly rank-deficient complex inputs at the
/// tightest setting, so every attempt is checked by recomposition.
const SVD_EPS_LADDER: [f64; 3] = [5.0 * f64::EPSILON, 1e-13, 1e-12];

/// Largest accepted `max |U S V^dagger - M|`, relative to `max(1, max |M|)`.
const SVD_RECOMPOSE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RealignError {
    #[error("swap-based realignment needs equal factor dimensions (got {dim_a} and {dim_b})")]
    UnequalDimensions { dim_a: usize, dim_b: usize },

    #[error("SVD did not converge within {iterations} iterations")]
    SvdFailure { iterations: usize },

    #[error("SVD factors do not reproduce the matrix (deviation {deviation:e})")]
    SvdInaccurate { deviation: f64 },

    #[error("CCNR sum requires a unit-trace input")]
    NotNormalized,

    #[error(transparent)]
    State(#[from] StateError),
}

/// How the "numerically zero" cut-off for singular values is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdPolicy {
    /// `max(sigma_max * dim_a^2 * 1e-12, 1e-12)`.
    Scaled { dim_a: usize },
    /// A fixed cut-off.
    Absolute(f64),
}

impl ThresholdPolicy {
    pub fn threshold(&self, sigma_max: f64) -> f64 {
        match *self {
            ThresholdPolicy::Scaled { dim_a } => (sigma_max * (dim_a * dim_a) as f64 * 1e-12).max(1e-12),
            ThresholdPolicy::Absolute(t) => t,
        }
    }
}

/// Singular values sorted descending together with the rank they imply.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularSpectrum {
    pub values: Vec<f64>,
    pub sum: f64,
    pub rank: usize,
    pub threshold: f64,
}

impl SingularSpectrum {
    pub(crate) fn from_values(values: Vec<f64>, policy: ThresholdPolicy) -> Self {
        let sigma_max = values.first().copied().unwrap_or(0.0);
        let threshold = policy.threshold(sigma_max);
        let sum = values.iter().sum();
        let rank = values.iter().filter(|&&v| v > threshold).count();
        Self {
            values,
            sum,
            rank,
            threshold,
        }
    }

    /// Number of values at or below the threshold.
    pub fn zero_count(&self) -> usize {
        self.values.len() - self.rank
    }
}

/// Thin SVD `m = u * diag(values) * v^dagger` with values sorted descending.
#[derive(Debug, Clone)]
pub(crate) struct SortedSvd {
    pub u: ComplexMatrix,
    pub values: Vec<f64>,
    pub v_t: ComplexMatrix,
}

pub(crate) fn sorted_svd(m: &ComplexMatrix) -> Result<SortedSvd, RealignError> {
    let min_dim = m.nrows().min(m.ncols());
    if min_dim == 0 {
        return Ok(SortedSvd {
            u: ComplexMatrix::zeros(m.nrows(), 0),
            values: Vec::new(),
            v_t: ComplexMatrix::zeros(0, m.ncols()),
        });
    }
    let limit = SVD_RECOMPOSE_TOL * max_abs(m).max(1.0);
    let mut deviation = f64::INFINITY;
    for eps in SVD_EPS_LADDER {
        let svd = m
            .clone()
            .try_svd(true, true, eps, SVD_MAX_ITERATIONS)
            .ok_or(RealignError::SvdFailure {
                iterations: SVD_MAX_ITERATIONS,
            })?;
        let u = svd.u.expect("u requested");
        let v_t = svd.v_t.expect("v_t requested");
        let sigma = ComplexMatrix::from_diagonal(&svd.singular_values.map(|x| C64::new(x, 0.0)));
        deviation = max_abs(&(&u * sigma * &v_t - m));
        if deviation <= limit {
            return Ok(sort_svd(u, svd.singular_values.as_slice(), v_t));
        }
    }
    Err(RealignError::SvdInaccurate { deviation })
}

fn sort_svd(u: ComplexMatrix, values: &[f64], v_t: ComplexMatrix) -> SortedSvd {
    let min_dim = values.len();
    let mut order: Vec<usize> = (0..min_dim).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    SortedSvd {
        u: ComplexMatrix::from_fn(u.nrows(), min_dim, |r, k| u[(r, order[k])]),
        values: order.iter().map(|&k| values[k]).collect(),
        v_t: ComplexMatrix::from_fn(min_dim, v_t.ncols(), |k, c| v_t[(order[k], c)]),
    }
}

/// Realignment of an arbitrary (possibly unnormalized) bipartite matrix.
///
/// Entry `(i*dim_a + j, k*dim_b + l)` of the result is `m[(i*dim_b + k, j*dim_b + l)]`.
pub fn realign_matrix(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix, StateError> {
    let n = dim_a * dim_b;
    if m.nrows() != n || m.ncols() != n {
        return Err(StateError::DimensionMismatch {
            expected: n,
            found: m.nrows(),
        });
    }
    Ok(ComplexMatrix::from_fn(dim_a * dim_a, dim_b * dim_b, |row, col| {
        let (i, j) = (row / dim_a, row % dim_a);
        let (k, l) = (col / dim_b, col % dim_b);
        m[(i * dim_b + k, j * dim_b + l)]
    }))
}

pub fn realign(s: &BipartiteState) -> ComplexMatrix {
    realign_matrix(s.matrix(), s.dim_a(), s.dim_b()).expect("bipartite state dimensions are consistent")
}

/// The swap operator `E = sum |ij><ji|` on `C^d (x) C^d`.
pub fn swap_operator(d: usize) -> ComplexMatrix {
    let n = d * d;
    let mut e = ComplexMatrix::zeros(n, n);
    for i in 0..d {
        for j in 0..d {
            e[(i * d + j, j * d + i)] = C64::new(1.0, 0.0);
        }
    }
    e
}

/// `(m^{T_B} E)^{T_A}` for a square bipartite matrix with equal factors.
pub fn realign_check_matrix(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix, RealignError> {
    if dim_a != dim_b {
        return Err(RealignError::UnequalDimensions { dim_a, dim_b });
    }
    let d = dim_a;
    let pt_b = partial_transpose_matrix(m, d, d, Subsystem::B)?;
    let swapped = pt_b * swap_operator(d);
    Ok(partial_transpose_matrix(&swapped, d, d, Subsystem::A)?)
}

/// Swap-operator form of the realignment; the full transpose of [`realign`].
pub fn realign_check(s: &BipartiteState) -> Result<ComplexMatrix, RealignError> {
    realign_check_matrix(s.matrix(), s.dim_a(), s.dim_b())
}

pub fn singular_spectrum(m: &ComplexMatrix, policy: ThresholdPolicy) -> Result<SingularSpectrum, RealignError> {
    let svd = sorted_svd(m)?;
    Ok(SingularSpectrum::from_values(svd.values, policy))
}

/// `rho = sum_k lambda_k G_k^A (x) G_k^B` with Hilbert-Schmidt orthonormal
/// operator families on each side.
///
/// Within a degenerate singular subspace the operators are whatever the SVD
/// returns; only reconstruction and orthonormality are guaranteed.
#[derive(Debug, Clone)]
pub struct OperatorSchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub ops_a: Vec<ComplexMatrix>,
    pub ops_b: Vec<ComplexMatrix>,
}

impl OperatorSchmidtDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.ops_a.first().map_or(0, |g| g.nrows()) * self.ops_b.first().map_or(0, |g| g.nrows());
        let mut out = ComplexMatrix::zeros(n, n);
        for ((lambda, ga), gb) in self.coefficients.iter().zip(&self.ops_a).zip(&self.ops_b) {
            out += ga.kronecker(gb).scale(*lambda);
        }
        out
    }

    /// Count of coefficients above `threshold`.
    pub fn schmidt_rank(&self, threshold: f64) -> usize {
        self.coefficients.iter().filter(|&&l| l > threshold).count()
    }
}

pub fn operator_schmidt(s: &BipartiteState) -> Result<OperatorSchmidtDecomposition, RealignError> {
    let (dim_a, dim_b) = s.dims();
    let svd = sorted_svd(&realign(s))?;
    let mut ops_a = Vec::with_capacity(svd.values.len());
    let mut ops_b = Vec::with_capacity(svd.values.len());
    for k in 0..svd.values.len() {
        // R = sum_k lambda_k |G_k^A><(G_k^B)*|, so the right singular vector is vec((G_k^B)*).
        let left = DVector::from_iterator(dim_a * dim_a, svd.u.column(k).iter().copied());
        let right = DVector::from_iterator(dim_b * dim_b, svd.v_t.row(k).iter().copied());
        ops_a.push(devectorize_vector(&left, dim_a));
        ops_b.push(devectorize_vector(&right, dim_b));
    }
    Ok(OperatorSchmidtDecomposition {
        coefficients: svd.values,
        ops_a,
        ops_b,
    })
}

/// Whether `$ (x) I (rho)` determines every channel `$` acting on A.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaithfulnessVerdict {
    pub faithful: bool,
    pub spectrum: SingularSpectrum,
    pub required_rank: usize,
    pub kernel_dimension: usize,
    /// Set when `dim_a != dim_b`: the verdict is then `false` by convention
    /// and `kernel_dimension` reports the rank deficit against `dim_a^2`.
    pub unequal_dimensions: bool,
}

pub fn is_faithful(s: &BipartiteState, policy: ThresholdPolicy) -> Result<FaithfulnessVerdict, RealignError> {
    let (dim_a, dim_b) = s.dims();
    let spectrum = singular_spectrum(&realign(s), policy)?;
    let required_rank = dim_a * dim_a;
    let kernel_dimension = required_rank.saturating_sub(spectrum.rank);
    let unequal_dimensions = dim_a != dim_b;
    Ok(FaithfulnessVerdict {
        faithful: !unequal_dimensions && spectrum.rank == required_rank,
        spectrum,
        required_rank,
        kernel_dimension,
        unequal_dimensions,
    })
}

/// Sum of the realignment singular values; above one certifies entanglement.
pub fn ccnr_sum(s: &BipartiteState) -> Result<f64, RealignError> {
    if (s.matrix().trace().re - 1.0).abs() > 1e-9 {
        return Err(RealignError::NotNormalized);
    }
    Ok(sorted_svd(&realign(s))?.values.iter().sum())
}

/// Smallest eigenvalue of the partial transpose on B; negative certifies entanglement.
pub fn ppt_min_eigenvalue(s: &BipartiteState) -> f64 {
    hermitian_eigenvalues(&partial_transpose(s, Subsystem::B))[0]
}
