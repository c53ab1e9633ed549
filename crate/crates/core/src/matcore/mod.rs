//! Dense complex matrix foundation.

mod eigen;
mod hermitian;
mod io;
mod matrix;
pub mod random;

pub use eigen::{eig, eig_with, eigenvalues, Spectrum};
pub use hermitian::{hermitian_eig, inv_sqrt_pos, sqrt_pos, sqrt_pos_with, svd, HermitianEigen, Svd};
pub use io::MatrixFile;
pub use matrix::{kron, ComplexMatrix};

pub use num_complex::Complex64;

/// Shorthand constructor for a complex number.
#[inline]
pub const fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Numerical tolerances shared by the decision procedures.
///
/// `relative` bounds normalized residuals, `absolute` governs eigenvalue
/// reality and degeneracy tests, and `max_condition` is the largest
/// eigenvector-matrix condition number accepted as diagonalizable.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerance {
    pub relative: f64,
    pub absolute: f64,
    pub max_condition: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            relative: 1e-10,
            absolute: 1e-12,
            max_condition: 1e8,
        }
    }
}

impl Tolerance {
    /// Default tolerances with the residual bound replaced.
    pub fn with_relative(relative: f64) -> Self {
        Self {
            relative,
            ..Self::default()
        }
    }
}
