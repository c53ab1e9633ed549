use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("matrix is not diagonalizable (eigenvector condition number {condition:.3e})")]
    NonDiagonalizable { condition: f64 },

    #[error("degenerate spectrum: eigenvalues {first} and {second} coincide within tolerance")]
    DegenerateSpectrum { first: String, second: String },

    #[error("spectrum is not real: largest imaginary part {max_imag:.3e}")]
    ComplexSpectrum { max_imag: f64 },

    #[error("matrix is not positive definite: smallest eigenvalue {min_eigenvalue:.3e}")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("metric weight {index} is not positive: {value}")]
    NonPositiveWeight { index: usize, value: f64 },

    #[error("Hamiltonian is not quasi-Hermitian for this metric (residual {residual:.3e})")]
    NotQuasiHermitian { residual: f64 },

    #[error("invalid parity operator: {0}")]
    InvalidParity(String),

    #[error("best Kronecker factors are not positive definite (residual {residual:.3e})")]
    FactorsIndefinite { residual: f64 },

    #[error("problem size {size} exceeds the exhaustive-search limit {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("state has vanishing overlap with the metric: Tr(ρη) = {overlap:.3e}")]
    ZeroOverlap { overlap: f64 },

    #[error("expectation value is not real: imaginary part {imag:.3e}")]
    NonRealExpectation { imag: f64 },

    #[error("density spectrum out of range: eigenvalue {re} + {im}i")]
    SpectrumOutOfRange { re: f64, im: f64 },

    #[error("purity is not real: imaginary part {imag:.3e}")]
    NonRealPurity { imag: f64 },

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error("malformed matrix file: {0}")]
    Parse(String),
}
