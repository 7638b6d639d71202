//! Recovering the superoperator of an unknown channel from one input/output
//! pair of bipartite states.
//!
//! The realignment intertwines the channel: `R(($ (x) I)(rho)) = M R(rho)`.
//! When `R(rho)` has full row rank `dim_a^2` this determines
//! `M = R(out) R(rho)^+`. Otherwise `M` is only fixed on the range of
//! `R(rho)`; the orthogonal complement is what the input state cannot probe.

use nalgebra::DVector;
use serde::Serialize;
use thiserror::Error;

use crate::catalog::{probe_states, CatalogError};
use crate::channel::{devectorize_vector, ChannelError, KrausChannel, Superoperator};
use crate::qstate::{hermitian_eigenvalues, hermitian_part, max_abs, trace_distance, BipartiteState, ComplexMatrix, C64};
use crate::realignment::{realign, sorted_svd, RealignError, SingularSpectrum, ThresholdPolicy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExtractionError {
    #[error("input state is not faithful: realigned matrix has rank {rank} < {required}, kernel dimension {kernel_dimension}")]
    NotFaithful {
        rank: usize,
        required: usize,
        kernel_dimension: usize,
    },

    #[error("input dims {input:?} do not match output dims {output:?}")]
    DimensionMismatch {
        input: (usize, usize),
        output: (usize, usize),
    },

    #[error(transparent)]
    Realign(#[from] RealignError),

    #[error(transparent)]
    Channel(#[from] ChannelError),

    #[error(transparent)]
    Catalog(#[from] CatalogError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtractionMode {
    /// Requires every singular value of the realigned input above threshold.
    Strict,
    /// Moore-Penrose pseudo-inverse, dropping singular values at or below threshold.
    Pseudo,
}

#[derive(Debug, Clone)]
pub struct ExtractionResult {
    pub m: Superoperator,
    pub mode: ExtractionMode,
    pub input_spectrum: SingularSpectrum,
    /// `max |R(out) - M R(in)|`.
    pub residual: f64,
    pub truncated_count: usize,
}

/// Solves `M R(input) = R(output)` through the SVD of `R(input)`.
///
/// `threshold` overrides the scale-aware zero cut-off of the realignment
/// module, e.g. for noisy tomographic data.
pub fn extract(
    input: &BipartiteState,
    output: &BipartiteState,
    mode: ExtractionMode,
    threshold: Option<ThresholdPolicy>,
) -> Result<ExtractionResult, ExtractionError> {
    if input.dims() != output.dims() {
        return Err(ExtractionError::DimensionMismatch {
            input: input.dims(),
            output: output.dims(),
        });
    }
    let dim_a = input.dim_a();
    let policy = threshold.unwrap_or(ThresholdPolicy::Scaled { dim_a });
    let r_in = realign(input);
    let r_out = realign(output);
    let svd = sorted_svd(&r_in)?;
    let spectrum = SingularSpectrum::from_values(svd.values.clone(), policy);
    let required = dim_a * dim_a;
    if mode == ExtractionMode::Strict && spectrum.rank < required {
        return Err(ExtractionError::NotFaithful {
            rank: spectrum.rank,
            required,
            kernel_dimension: required - spectrum.rank,
        });
    }

    // M = R(out) V diag(1/s) U^dagger over the kept singular triplets.
    let mut m = ComplexMatrix::zeros(required, required);
    for k in 0..spectrum.rank {
        let u = svd.u.column(k);
        let v_dag = svd.v_t.row(k);
        let image = &r_out * v_dag.adjoint();
        m += (image * u.adjoint()).unscale(svd.values[k]);
    }
    let residual = max_abs(&(&r_out - &m * &r_in));
    let truncated_count = svd.values.len() - spectrum.rank;
    Ok(ExtractionResult {
        m: Superoperator::new(dim_a, m)?,
        mode,
        input_spectrum: spectrum,
        residual,
        truncated_count,
    })
}

/// What an input state can and cannot reveal about channels on A.
#[derive(Debug, Clone)]
pub struct ReachabilityReport {
    pub spectrum: SingularSpectrum,
    pub kernel_dimension: usize,
    /// Orthonormal (Hilbert-Schmidt) `dim_a x dim_a` operators spanning the
    /// complement of the range of `R(input)`: inputs on which the channel
    /// action is never observed.
    pub unprobed_basis: Vec<ComplexMatrix>,
}

pub fn reachable_report(input: &BipartiteState) -> Result<ReachabilityReport, ExtractionError> {
    let dim_a = input.dim_a();
    let n = dim_a * dim_a;
    let svd = sorted_svd(&realign(input))?;
    let spectrum = SingularSpectrum::from_values(svd.values.clone(), ThresholdPolicy::Scaled { dim_a });
    let rank = spectrum.rank;

    let mut range_projector = ComplexMatrix::zeros(n, n);
    for k in 0..rank {
        let u = svd.u.column(k);
        range_projector += u * u.adjoint();
    }
    let complement = hermitian_part(&(ComplexMatrix::identity(n, n) - range_projector));
    let eig = nalgebra::SymmetricEigen::new(complement);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let kernel_dimension = n - rank;
    let unprobed_basis = order
        .iter()
        .take(kernel_dimension)
        .map(|&k| {
            let v = DVector::from_iterator(n, eig.eigenvectors.column(k).iter().copied());
            devectorize_vector(&v, dim_a)
        })
        .collect();
    Ok(ReachabilityReport {
        spectrum,
        kernel_dimension,
        unprobed_basis,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UnfaithfulnessReport {
    /// `max |($_A (x) I)(rho) - ($_B (x) I)(rho)|`.
    pub output_distance: f64,
    /// Largest trace distance between the two channels' outputs over the probe frame.
    pub channel_distance: f64,
    /// Index into the probe frame attaining `channel_distance`.
    pub worst_probe: usize,
    /// Outputs indistinguishable (< 1e-9) while the channels differ (> 0.01).
    pub witnessed: bool,
}

/// Compares two channels through one bipartite input and through the
/// single-system probe frame of the catalog.
pub fn demonstrate_unfaithfulness(
    input: &BipartiteState,
    ch_a: &KrausChannel,
    ch_b: &KrausChannel,
) -> Result<UnfaithfulnessReport, ExtractionError> {
    let out_a = ch_a.apply_extended(input)?;
    let out_b = ch_b.apply_extended(input)?;
    let output_distance = max_abs(&(out_a.matrix() - out_b.matrix()));

    let mut channel_distance = 0.0;
    let mut worst_probe = 0;
    for (idx, probe) in probe_states(input.dim_a())?.iter().enumerate() {
        let a = ch_a.apply_matrix(probe.matrix())?;
        let b = ch_b.apply_matrix(probe.matrix())?;
        let dist = trace_distance(&a, &b);
        if dist > channel_distance {
            channel_distance = dist;
            worst_probe = idx;
        }
    }
    Ok(UnfaithfulnessReport {
        output_distance,
        channel_distance,
        worst_probe,
        witnessed: output_distance < 1e-9 && channel_distance > 0.01,
    })
}

/// Eigenvalues of the Choi matrix `sum_ij |i><j| (x) M(|i><j|)` (unnormalized,
/// input factor first); all non-negative iff `M` is completely positive.
pub fn choi_eigenvalues(m: &Superoperator) -> Vec<f64> {
    let d = m.dim();
    let mut choi = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let mut unit = ComplexMatrix::zeros(d, d);
            unit[(i, j)] = C64::new(1.0, 0.0);
            let image = m.apply_matrix(&unit).expect("dimension matches");
            for a in 0..d {
                for b in 0..d {
                    choi[(i * d + a, j * d + b)] = image[(a, b)];
                }
            }
        }
    }
    hermitian_eigenvalues(&hermitian_part(&choi))
}
