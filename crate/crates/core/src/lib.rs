//! Faithfulness of bipartite states for ancilla-assisted process tomography.
//!
//! A bipartite input `rho` on `A (x) B` is *faithful* when the output
//! `($ (x) I)(rho)` of any channel `$` acting on `A` determines `$`. This holds
//! exactly when the realigned matrix `R(rho)` has no zero singular values, and
//! then the channel's superoperator is `M = R(out) R(rho)^-1`.
//!
//! Modules:
//! - [`qstate`]: validated states and index-level matrix operations.
//! - [`realignment`]: realignment, singular spectra, faithfulness, CCNR / PPT tests.
//! - [`channel`]: Kraus channels, Choi matrices, superoperators, vectorization.
//! - [`extraction`]: recovering `M` from an input/output pair.
//! - [`catalog`]: named states, probe frames, operator bases.
//! - [`tomography`]: simulated three-qubit experiment with shot-noise tomography.
//! - [`io`]: the JSON file formats.

pub mod catalog;
pub mod channel;
pub mod extraction;
pub mod io;
pub mod qstate;
pub mod random;
pub mod realignment;
pub mod tomography;
