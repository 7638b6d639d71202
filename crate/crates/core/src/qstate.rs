//! Validated density matrices, bipartite states, and the index-level matrix
//! manipulations (Kronecker product, partial trace, partial transpose) the
//! rest of the crate is built on.
//!
//! Composite indices are row-major with the A index major: the basis vector
//! `|i>_A |k>_B` sits at position `i * dim_b + k`.

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use thiserror::Error;

/// Complex double.
pub type C64 = Complex<f64>;

/// Dense complex matrix, row/column indexed by composite indices.
pub type ComplexMatrix = DMatrix<C64>;

/// Default absolute tolerance for density-matrix validation.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Eigenvalues of a density matrix below this are treated as zero when
/// taking square roots.
const SQRT_CLIP: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (max |m - m^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("trace is not 1 (got {trace})")]
    NotUnitTrace { trace: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// Which factor of a bipartite system an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// A Hermitian, positive-semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `m` as a density matrix within the absolute tolerance `tol`.
    ///
    /// The positivity check runs on the Hermitian part `(m + m^dagger)/2`;
    /// the stored entries are the original ones.
    pub fn new(m: ComplexMatrix, tol: f64) -> Result<Self, StateError> {
        if !m.is_square() {
            return Err(StateError::NotSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        let deviation = max_abs(&(&m - m.adjoint()));
        if deviation > tol {
            return Err(StateError::NotHermitian { deviation });
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(StateError::NotUnitTrace { trace: tr.re });
        }
        let min_eigenvalue = hermitian_eigenvalues(&hermitian_part(&m))[0];
        if min_eigenvalue < -tol {
            return Err(StateError::NotPositive { min_eigenvalue });
        }
        Ok(Self { matrix: m })
    }

    /// The projector `|psi><psi|` for a normalized copy of `psi`.
    pub fn from_pure(psi: &[C64]) -> Self {
        let norm = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let n = psi.len();
        let matrix = ComplexMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / (norm * norm));
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let matrix = ComplexMatrix::identity(dim, dim).unscale(dim as f64);
        Self { matrix }
    }

    /// Skips validation. Callers guarantee the invariants by construction.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        debug_assert!(matrix.is_square());
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// A density matrix on `C^dim_a (x) C^dim_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    state: DensityMatrix,
}

impl BipartiteState {
    pub fn new(state: DensityMatrix, dim_a: usize, dim_b: usize) -> Result<Self, StateError> {
        if state.dim() != dim_a * dim_b {
            return Err(StateError::DimensionMismatch {
                expected: dim_a * dim_b,
                found: state.dim(),
            });
        }
        Ok(Self { dim_a, dim_b, state })
    }

    /// Validates `m` and attaches the factor dimensions.
    pub fn from_matrix(m: ComplexMatrix, dim_a: usize, dim_b: usize, tol: f64) -> Result<Self, StateError> {
        Self::new(DensityMatrix::new(m, tol)?, dim_a, dim_b)
    }

    pub fn product(rho: &DensityMatrix, sigma: &DensityMatrix) -> Self {
        Self {
            dim_a: rho.dim(),
            dim_b: sigma.dim(),
            state: DensityMatrix::new_unchecked(tensor(rho.matrix(), sigma.matrix())),
        }
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim_a, self.dim_b)
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        self.state.matrix()
    }
}

/// Kronecker product: entry `(i*rows_b + r, j*cols_b + c)` is `a[i,j] * b[r,c]`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

fn check_bipartite(m: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<(), StateError> {
    let n = dim_a * dim_b;
    if m.nrows() != n || m.ncols() != n {
        return Err(StateError::DimensionMismatch {
            expected: n,
            found: if m.nrows() != n { m.nrows() } else { m.ncols() },
        });
    }
    Ok(())
}

/// Partial trace of an arbitrary (possibly unnormalized) bipartite matrix.
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    subsystem: Subsystem,
) -> Result<ComplexMatrix, StateError> {
    check_bipartite(m, dim_a, dim_b)?;
    let out = match subsystem {
        Subsystem::B => ComplexMatrix::from_fn(dim_a, dim_a, |i, j| {
            (0..dim_b).map(|k| m[(i * dim_b + k, j * dim_b + k)]).sum()
        }),
        Subsystem::A => ComplexMatrix::from_fn(dim_b, dim_b, |k, l| {
            (0..dim_a).map(|i| m[(i * dim_b + k, i * dim_b + l)]).sum()
        }),
    };
    Ok(out)
}

/// Reduced state after tracing out `subsystem`.
pub fn partial_trace(s: &BipartiteState, subsystem: Subsystem) -> DensityMatrix {
    let reduced = partial_trace_matrix(s.matrix(), s.dim_a, s.dim_b, subsystem)
        .expect("bipartite state dimensions are consistent");
    DensityMatrix::new_unchecked(reduced)
}

/// Transposes the indices of one factor of an arbitrary bipartite matrix.
pub fn partial_transpose_matrix(
    m: &ComplexMatrix,
    dim_a: usize,
    dim_b: usize,
    subsystem: Subsystem,
) -> Result<ComplexMatrix, StateError> {
    check_bipartite(m, dim_a, dim_b)?;
    let n = dim_a * dim_b;
    let out = ComplexMatrix::from_fn(n, n, |r, c| {
        let (i, k) = (r / dim_b, r % dim_b);
        let (j, l) = (c / dim_b, c % dim_b);
        match subsystem {
            Subsystem::A => m[(j * dim_b + k, i * dim_b + l)],
            Subsystem::B => m[(i * dim_b + l, j * dim_b + k)],
        }
    });
    Ok(out)
}

pub fn partial_transpose(s: &BipartiteState, subsystem: Subsystem) -> ComplexMatrix {
    partial_transpose_matrix(s.matrix(), s.dim_a, s.dim_b, subsystem)
        .expect("bipartite state dimensions are consistent")
}

/// Root fidelity `Tr sqrt(sqrt(rho) sigma sqrt(rho))`.
///
/// Eigenvalues of `sqrt(rho) sigma sqrt(rho)` at or below the clipping
/// threshold count as zero, so rounding noise on a rank-deficient product is
/// not amplified by the square root.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64, StateError> {
    if rho.dim() != sigma.dim() {
        return Err(StateError::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let root = psd_sqrt(rho.matrix());
    let inner = hermitian_part(&(&root * sigma.matrix() * &root));
    let f: f64 = hermitian_eigenvalues(&inner)
        .into_iter()
        .filter(|&x| x > SQRT_CLIP)
        .map(f64::sqrt)
        .sum();
    Ok(f.clamp(0.0, 1.0))
}

/// `Tr(rho^2)`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

/// Trace distance `||a - b||_1 / 2` for Hermitian `a`, `b`.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let diff = hermitian_part(&(a - b));
    0.5 * hermitian_eigenvalues(&diff).iter().map(|x| x.abs()).sum::<f64>()
}

/// Nearest-in-spectrum density matrix: Hermitian part, negative eigenvalues
/// clipped to zero, trace renormalized to one.
///
/// Falls back to the maximally mixed state when nothing positive survives.
pub fn project_to_density(m: &ComplexMatrix) -> DensityMatrix {
    let dim = m.nrows();
    let eig = SymmetricEigen::new(hermitian_part(m));
    let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&x| x.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if total <= f64::EPSILON {
        return DensityMatrix::maximally_mixed(dim);
    }
    let v = &eig.eigenvectors;
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (k, &lambda) in clipped.iter().enumerate() {
        if lambda == 0.0 {
            continue;
        }
        let col = v.column(k);
        out += (col * col.adjoint()).scale(lambda / total);
    }
    DensityMatrix::new_unchecked(hermitian_part(&out))
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let mut values: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// `(m + m^dagger) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn psd_sqrt(m: &ComplexMatrix) -> ComplexMatrix {
    let dim = m.nrows();
    let eig = SymmetricEigen::new(hermitian_part(m));
    let mut out = ComplexMatrix::zeros(dim, dim);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda <= SQRT_CLIP {
            continue;
        }
        let col = eig.eigenvectors.column(k);
        out += (col * col.adjoint()).scale(lambda.sqrt());
    }
    out
}

/// Convenience constructor for real-valued literals.
pub fn real_matrix(rows: usize, cols: usize, entries: &[f64]) -> ComplexMatrix {
    assert_eq!(entries.len(), rows * cols, "entries.len() must equal rows * cols");
    ComplexMatrix::from_row_iterator(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn sigma_x() -> ComplexMatrix {
        real_matrix(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    fn ket(v: &[f64]) -> Vec<C64> {
        v.iter().map(|&x| c(x, 0.0)).collect()
    }

    fn bell() -> BipartiteState {
        let s = 0.5f64.sqrt();
        BipartiteState::new(DensityMatrix::from_pure(&ket(&[s, 0.0, 0.0, s])), 2, 2).unwrap()
    }

    #[test]
    fn validates_maximally_mixed_qubit() {
        let m = ComplexMatrix::identity(2, 2).scale(0.5);
        assert!(DensityMatrix::new(m, DEFAULT_TOL).is_ok());
    }

    #[test]
    fn rejects_trace_two() {
        let m = ComplexMatrix::identity(2, 2);
        assert!(matches!(
            DensityMatrix::new(m, DEFAULT_TOL),
            Err(StateError::NotUnitTrace { trace }) if (trace - 2.0).abs() < 1e-15
        ));
    }

    #[test]
    fn rejects_negative_eigenvalue() {
        let m = real_matrix(2, 2, &[1.5, 0.0, 0.0, -0.5]);
        match DensityMatrix::new(m, DEFAULT_TOL) {
            Err(StateError::NotPositive { min_eigenvalue }) => assert_abs_diff_eq!(min_eigenvalue, -0.5, epsilon = 1e-12),
            other => panic!("expected NotPositive, got {other:?}"),
        }
    }

    #[test]
    fn rejects_non_hermitian_and_non_square() {
        let m = real_matrix(2, 2, &[0.5, 0.3, 0.0, 0.5]);
        assert!(matches!(DensityMatrix::new(m, DEFAULT_TOL), Err(StateError::NotHermitian { .. })));
        let m = ComplexMatrix::zeros(2, 3);
        assert!(matches!(DensityMatrix::new(m, DEFAULT_TOL), Err(StateError::NotSquare { rows: 2, cols: 3 })));
    }

    #[test]
    fn validation_keeps_original_entries() {
        let mut m = ComplexMatrix::identity(2, 2).scale(0.5);
        m[(0, 1)] = c(0.1, 1e-12);
        m[(1, 0)] = c(0.1, 0.0);
        let rho = DensityMatrix::new(m.clone(), DEFAULT_TOL).unwrap();
        assert_eq!(rho.matrix(), &m);
    }

    #[test]
    fn tensor_examples() {
        let i2 = ComplexMatrix::identity(2, 2);
        assert_eq!(tensor(&i2, &i2), ComplexMatrix::identity(4, 4));

        let xx = tensor(&sigma_x(), &sigma_x());
        let anti = ComplexMatrix::from_fn(4, 4, |r, c| if r + c == 3 { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        assert_eq!(xx, anti);

        let p0 = real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let p1 = real_matrix(2, 2, &[0.0, 0.0, 0.0, 1.0]);
        let expected = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(ket(&[0.0, 1.0, 0.0, 0.0])));
        assert_eq!(tensor(&p0, &p1), expected);
    }

    #[test]
    fn tensor_index_convention() {
        let a = ComplexMatrix::from_fn(2, 3, |i, j| c((i * 3 + j) as f64, 1.0));
        let b = ComplexMatrix::from_fn(3, 2, |r, s| c(1.0, (r * 2 + s) as f64));
        let t = tensor(&a, &b);
        assert_eq!(t.shape(), (6, 6));
        for i in 0..2 {
            for j in 0..3 {
                for r in 0..3 {
                    for s in 0..2 {
                        assert_eq!(t[(i * 3 + r, j * 2 + s)], a[(i, j)] * b[(r, s)]);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_of_product_and_bell() {
        let rho = DensityMatrix::new(real_matrix(2, 2, &[0.75, 0.25, 0.25, 0.25]), DEFAULT_TOL).unwrap();
        let sigma = DensityMatrix::maximally_mixed(3);
        let prod = BipartiteState::product(&rho, &sigma);
        let reduced = partial_trace(&prod, Subsystem::B);
        assert!(max_abs(&(reduced.matrix() - rho.matrix())) < 1e-12);
        let other = partial_trace(&prod, Subsystem::A);
        assert!(max_abs(&(other.matrix() - sigma.matrix())) < 1e-12);

        let marginal = partial_trace(&bell(), Subsystem::B);
        assert!(max_abs(&(marginal.matrix() - ComplexMatrix::identity(2, 2).scale(0.5))) < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let m = ComplexMatrix::identity(4, 4);
        assert!(matches!(
            partial_trace_matrix(&m, 2, 3, Subsystem::A),
            Err(StateError::DimensionMismatch { expected: 6, found: 4 })
        ));
    }

    #[test]
    fn bell_partial_transpose_is_half_swap() {
        let pt = partial_transpose(&bell(), Subsystem::B);
        // direct index permutation: (|00><00| + |00><11| + |11><00| + |11><11|)/2
        // moves the coherences to |01><10| and |10><01|
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(0, 0)] = c(0.5, 0.0);
        expected[(3, 3)] = c(0.5, 0.0);
        expected[(1, 2)] = c(0.5, 0.0);
        expected[(2, 1)] = c(0.5, 0.0);
        assert!(max_abs(&(pt.clone() - expected)) < 1e-15);
        let eig = hermitian_eigenvalues(&pt);
        for (got, want) in eig.iter().zip([-0.5, 0.5, 0.5, 0.5]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn partial_transpose_of_product_transposes_factor() {
        let rho = DensityMatrix::new(real_matrix(2, 2, &[0.6, 0.2, 0.2, 0.4]), DEFAULT_TOL).unwrap();
        let mut s = ComplexMatrix::identity(2, 2).scale(0.5);
        s[(0, 1)] = c(0.0, -0.3);
        s[(1, 0)] = c(0.0, 0.3);
        let sigma = DensityMatrix::new(s.clone(), DEFAULT_TOL).unwrap();
        let prod = BipartiteState::product(&rho, &sigma);
        let pt = partial_transpose(&prod, Subsystem::B);
        assert!(max_abs(&(pt - tensor(rho.matrix(), &s.transpose()))) < 1e-15);
    }

    #[test]
    fn fidelity_examples() {
        let p0 = DensityMatrix::from_pure(&ket(&[1.0, 0.0]));
        let p1 = DensityMatrix::from_pure(&ket(&[0.0, 1.0]));
        let plus = DensityMatrix::from_pure(&ket(&[1.0, 1.0]));
        assert_abs_diff_eq!(fidelity(&p0, &p0).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&p0, &p1).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fidelity(&p0, &plus).unwrap(), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-12);
        assert!(fidelity(&p0, &DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn purity_examples() {
        let p0 = DensityMatrix::from_pure(&ket(&[0.6, 0.8]));
        assert_abs_diff_eq!(purity(&p0), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(purity(&DensityMatrix::maximally_mixed(2)), 0.5, epsilon = 1e-15);
        let d = DensityMatrix::new(real_matrix(2, 2, &[0.75, 0.0, 0.0, 0.25]), DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(purity(&d), 0.625, epsilon = 1e-15);
    }

    #[test]
    fn projection_clips_and_renormalizes() {
        let m = real_matrix(2, 2, &[1.1, 0.0, 0.0, -0.1]);
        let rho = project_to_density(&m);
        assert!(max_abs(&(rho.matrix() - real_matrix(2, 2, &[1.0, 0.0, 0.0, 0.0]))) < 1e-12);
    }
}
