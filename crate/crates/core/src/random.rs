//! Random states, unitaries, and channels for property tests and sweeps.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::KrausChannel;
use crate::qstate::{BipartiteState, ComplexMatrix, DensityMatrix, C64};

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    })
}

/// Haar-distributed unitary (QR of a Ginibre matrix with phase-fixed R).
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let qr = ginibre(d, d, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        let diag = r[(j, j)];
        let phase = if diag.norm() > 0.0 { diag / diag.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Random pure state vector, uniformly distributed on the unit sphere.
pub fn random_ket<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    let g = ginibre(d, 1, rng);
    let norm = g.norm();
    g.iter().map(|z| z / norm).collect()
}

pub fn random_pure<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    DensityMatrix::from_pure(&random_ket(d, rng))
}

/// Full-rank random density matrix `G G^dagger / Tr(G G^dagger)`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(d, d, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new_unchecked(m.unscale(tr))
}

pub fn random_bipartite<R: Rng + ?Sized>(dim_a: usize, dim_b: usize, rng: &mut R) -> BipartiteState {
    BipartiteState::new(random_density(dim_a * dim_b, rng), dim_a, dim_b).expect("dimensions match")
}

/// Product of two independent random density matrices.
pub fn random_product<R: Rng + ?Sized>(dim_a: usize, dim_b: usize, rng: &mut R) -> BipartiteState {
    BipartiteState::product(&random_density(dim_a, rng), &random_density(dim_b, rng))
}

/// Convex combination of `terms` random product states with random weights.
pub fn random_separable<R: Rng + ?Sized>(dim_a: usize, dim_b: usize, terms: usize, rng: &mut R) -> BipartiteState {
    let weights: Vec<f64> = (0..terms).map(|_| rng.gen::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let n = dim_a * dim_b;
    let mut m = ComplexMatrix::zeros(n, n);
    for w in weights {
        let (a, b) = if rng.gen_bool(0.5) {
            (random_pure(dim_a, rng), random_pure(dim_b, rng))
        } else {
            (random_density(dim_a, rng), random_density(dim_b, rng))
        };
        m += a.matrix().kronecker(b.matrix()).scale(w / total);
    }
    BipartiteState::new(DensityMatrix::new_unchecked(m), dim_a, dim_b).expect("dimensions match")
}

/// Random trace-preserving channel with `kraus_count` operators, obtained by
/// slicing a random isometry `C^d -> C^(d * kraus_count)` into `d x d` blocks.
pub fn random_channel<R: Rng + ?Sized>(d: usize, kraus_count: usize, rng: &mut R) -> KrausChannel {
    let isometry = ginibre(d * kraus_count, d, rng).qr().q();
    let kraus = (0..kraus_count)
        .map(|n| isometry.rows(n * d, d).into_owned())
        .collect();
    KrausChannel::new(kraus, 1e-10).expect("isometry blocks are complete")
}
