//! Quasi-Hermitian quantum mechanics for simple and bipartite finite-dimensional
//! systems.
//!
//! The crate is organised bottom-up:
//!
//! * [`matcore`] dense complex matrices, non-Hermitian eigendecomposition,
//!   Hermitian eigensolver, SVD and positive square roots.
//! * [`metric`] biorthonormal eigenbases, metric operators `η` with
//!   `η H η⁻¹ = H†`, hermitization and alternative metrics.
//! * [`tensor`] tensor-separability of metric operators (`η = ξ ⊗ ζ`).
//! * [`dynamics`] generalized density matrices, evolution, partial traces,
//!   entropy and purity.
//! * [`optimize`] the derivative-free simplex minimizer used by the
//!   separability search.

pub mod dynamics;
pub mod error;
pub mod matcore;
pub mod metric;
pub mod optimize;
pub mod tensor;

pub use error::{Error, Result};
pub use matcore::{c64, ComplexMatrix, Spectrum, Tolerance};
