//! Kraus channels, the Choi correspondence, and the natural superoperator
//! `M = sum_n K_n (x) conj(K_n)` acting on row-vectorized operators.
//!
//! `|sigma> = (sigma (x) I) sum_i |ii>` has entry `sigma[a, b]` at `a*d + b`,
//! so `|K sigma K^dagger> = (K (x) conj(K)) |sigma>`.

use nalgebra::DVector;
use thiserror::Error;

use crate::qstate::{
    max_abs, partial_trace_matrix, BipartiteState, ComplexMatrix, DensityMatrix, StateError, Subsystem, C64,
};

/// Relaxed validation tolerance for states predicted from an extracted superoperator.
pub const PREDICTION_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("a channel needs at least one Kraus operator")]
    Empty,

    #[error("Kraus operators must be square and share one dimension")]
    MixedDimensions,

    #[error("Kraus operators are not trace preserving (max |sum K^dagger K - I| = {deviation:e})")]
    NotTracePreserving { deviation: f64 },

    #[error("dimension mismatch: channel acts on dimension {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("predicted output is not a physical state: {0}")]
    NotPhysical(StateError),

    #[error(transparent)]
    State(#[from] StateError),
}

/// A completely positive trace-preserving map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    kraus: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Checks that the operators are square, equal-sized, and satisfy
    /// `sum K^dagger K = I` within `tol`.
    pub fn new(kraus: Vec<ComplexMatrix>, tol: f64) -> Result<Self, ChannelError> {
        let dim = kraus.first().ok_or(ChannelError::Empty)?.nrows();
        if kraus.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(ChannelError::MixedDimensions);
        }
        let mut completeness = ComplexMatrix::zeros(dim, dim);
        for k in &kraus {
            completeness += k.adjoint() * k;
        }
        let deviation = max_abs(&(completeness - ComplexMatrix::identity(dim, dim)));
        if deviation > tol {
            return Err(ChannelError::NotTracePreserving { deviation });
        }
        Ok(Self { dim, kraus })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            kraus: vec![ComplexMatrix::identity(dim, dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `sum_n K_n m K_n^dagger` for any square matrix of the channel's dimension.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> Result<ComplexMatrix, ChannelError> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(ChannelError::DimensionMismatch {
                expected: self.dim,
                found: m.nrows(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for k in &self.kraus {
            out += k * m * k.adjoint();
        }
        Ok(out)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix, ChannelError> {
        let out = self.apply_matrix(rho.matrix())?;
        Ok(DensityMatrix::new_unchecked(out))
    }

    /// `($ (x) I)(m)` for a `(dim * dim_b)`-square matrix.
    pub fn apply_extended_matrix(&self, m: &ComplexMatrix, dim_b: usize) -> Result<ComplexMatrix, ChannelError> {
        let n = self.dim * dim_b;
        if m.nrows() != n || m.ncols() != n {
            return Err(ChannelError::DimensionMismatch {
                expected: n,
                found: m.nrows(),
            });
        }
        let id_b = ComplexMatrix::identity(dim_b, dim_b);
        let mut out = ComplexMatrix::zeros(n, n);
        for k in &self.kraus {
            let lifted = k.kronecker(&id_b);
            out += &lifted * m * lifted.adjoint();
        }
        Ok(out)
    }

    /// The channel applied to the A factor of `s`.
    pub fn apply_extended(&self, s: &BipartiteState) -> Result<BipartiteState, ChannelError> {
        if s.dim_a() != self.dim {
            return Err(ChannelError::DimensionMismatch {
                expected: self.dim,
                found: s.dim_a(),
            });
        }
        let out = self.apply_extended_matrix(s.matrix(), s.dim_b())?;
        Ok(BipartiteState::new(DensityMatrix::new_unchecked(out), s.dim_a(), s.dim_b())?)
    }

    /// `S = ($ (x) I)(|Phi+><Phi+|)` with the unnormalized `|Phi+> = sum_i |ii>`.
    pub fn choi_state(&self) -> ChoiMatrix {
        let d = self.dim;
        let mut phi = ComplexMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                phi[(i * d + i, j * d + j)] = C64::new(1.0, 0.0);
            }
        }
        let matrix = self.apply_extended_matrix(&phi, d).expect("dimensions match by construction");
        ChoiMatrix { dim: d, matrix }
    }

    pub fn superoperator(&self) -> Superoperator {
        let n = self.dim * self.dim;
        let mut matrix = ComplexMatrix::zeros(n, n);
        for k in &self.kraus {
            matrix += k.kronecker(&k.map(|z| z.conj()));
        }
        Superoperator { dim: self.dim, matrix }
    }
}

/// Choi matrix in the unnormalized convention (trace `dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: ComplexMatrix,
}

impl ChoiMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// The Choi matrix divided by `dim`, a unit-trace state.
    pub fn normalized(&self) -> ComplexMatrix {
        self.matrix.unscale(self.dim as f64)
    }

    /// `$(rho) = Tr_B[(I (x) rho^T) S]`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix, ChannelError> {
        let d = self.dim;
        if rho.dim() != d {
            return Err(ChannelError::DimensionMismatch {
                expected: d,
                found: rho.dim(),
            });
        }
        let lifted = ComplexMatrix::identity(d, d).kronecker(&rho.matrix().transpose());
        let out = partial_trace_matrix(&(lifted * &self.matrix), d, d, Subsystem::B)?;
        Ok(DensityMatrix::new_unchecked(out))
    }
}

/// Row-vectorized operator `|sigma>`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorizedState {
    dim: usize,
    vector: DVector<C64>,
}

impl VectorizedState {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vector(&self) -> &DVector<C64> {
        &self.vector
    }
}

pub fn vectorize(sigma: &ComplexMatrix) -> Result<VectorizedState, StateError> {
    if !sigma.is_square() {
        return Err(StateError::NotSquare {
            rows: sigma.nrows(),
            cols: sigma.ncols(),
        });
    }
    let d = sigma.nrows();
    Ok(VectorizedState {
        dim: d,
        vector: DVector::from_fn(d * d, |idx, _| sigma[(idx / d, idx % d)]),
    })
}

pub fn devectorize(v: &VectorizedState) -> ComplexMatrix {
    devectorize_vector(&v.vector, v.dim)
}

/// Inverse of row-vectorization for a raw length-`d^2` vector.
pub(crate) fn devectorize_vector(v: &DVector<C64>, d: usize) -> ComplexMatrix {
    debug_assert_eq!(v.len(), d * d);
    ComplexMatrix::from_fn(d, d, |a, b| v[a * d + b])
}

/// The `d^2 x d^2` matrix acting on row-vectorized operators.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: ComplexMatrix) -> Result<Self, ChannelError> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(ChannelError::DimensionMismatch {
                expected: dim * dim,
                found: matrix.nrows(),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `devectorize(M |sigma>)` without any physicality check.
    pub fn apply_matrix(&self, sigma: &ComplexMatrix) -> Result<ComplexMatrix, ChannelError> {
        if sigma.nrows() != self.dim || sigma.ncols() != self.dim {
            return Err(ChannelError::DimensionMismatch {
                expected: self.dim,
                found: sigma.nrows(),
            });
        }
        let v = vectorize(sigma)?;
        Ok(devectorize_vector(&(&self.matrix * v.vector()), self.dim))
    }

    /// Output state predicted by `M`, validated at [`PREDICTION_TOL`].
    pub fn predict_output(&self, sigma: &DensityMatrix) -> Result<DensityMatrix, ChannelError> {
        let out = self.apply_matrix(sigma.matrix())?;
        DensityMatrix::new(out, PREDICTION_TOL).map_err(ChannelError::NotPhysical)
    }
}

/// The Schur-multiplier channel `sigma -> C o sigma` with
/// `C[a, b] = <u_b, u_a>` for unit vectors `u_a`.
///
/// Kraus operators are `K_n = diag(u_0[n], ..., u_{d-1}[n])`.
pub fn schur_channel(gram_vectors: &[DVector<C64>]) -> Result<KrausChannel, ChannelError> {
    let rank = gram_vectors.first().ok_or(ChannelError::Empty)?.len();
    if gram_vectors.iter().any(|u| u.len() != rank) {
        return Err(ChannelError::MixedDimensions);
    }
    let kraus = (0..rank)
        .map(|n| ComplexMatrix::from_diagonal(&DVector::from_iterator(gram_vectors.len(), gram_vectors.iter().map(|u| u[n]))))
        .collect();
    KrausChannel::new(kraus, 1e-12)
}
