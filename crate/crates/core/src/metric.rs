//! Metric operators for quasi-Hermitian Hamiltonians.
//!
//! A Hamiltonian `H` is quasi-Hermitian when some positive-definite
//! Hermitian `η` satisfies `η H η⁻¹ = H†`. For a nondegenerate real
//! spectrum with biorthonormal eigenbasis `{ψ_n, φ_n}` every such metric has
//! the form `η = Σ r_n |φ_n⟩⟨φ_n|` with `r_n > 0`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{
    eig_with, hermitian_eig, inv_sqrt_pos, sqrt_pos_with, Complex64, ComplexMatrix, Tolerance,
};

/// Eigenbasis `{ψ_n, φ_n}` of a quasi-Hermitian Hamiltonian with
/// `⟨φ_m|ψ_n⟩ = δ_mn` and real energies, ascending.
///
/// Each `ψ_n` has unit norm and its largest-modulus entry real positive.
#[derive(Debug, Clone, Serialize)]
pub struct BiorthonormalSystem {
    energies: Vec<f64>,
    right: ComplexMatrix,
    left: ComplexMatrix,
}

impl BiorthonormalSystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Columns `|ψ_n⟩`.
    pub fn right_basis(&self) -> &ComplexMatrix {
        &self.right
    }

    /// Columns `|φ_n⟩`.
    pub fn left_basis(&self) -> &ComplexMatrix {
        &self.left
    }

    pub fn psi(&self, n: usize) -> Vec<Complex64> {
        self.right.column(n)
    }

    pub fn phi(&self, n: usize) -> Vec<Complex64> {
        self.left.column(n)
    }

    /// `|ψ_n⟩⟨φ_n|`.
    pub fn projector(&self, n: usize) -> ComplexMatrix {
        let psi = self.psi(n);
        let phi = self.phi(n);
        ComplexMatrix::from_fn(self.dim(), self.dim(), |i, j| psi[i] * phi[j].conj())
    }

    /// `Σ E_n |ψ_n⟩⟨φ_n|`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut scaled = self.right.clone();
        for (j, &e) in self.energies.iter().enumerate() {
            for i in 0..self.dim() {
                scaled[(i, j)] *= e;
            }
        }
        &scaled * &self.left.adjoint()
    }

    /// `‖L†R − I‖_F`.
    pub fn biorthonormality_defect(&self) -> f64 {
        (&self.left.adjoint() * &self.right).distance(&ComplexMatrix::identity(self.dim()))
    }
}

/// [`biorthonormalize_with`] using default tolerances.
pub fn biorthonormalize(h: &ComplexMatrix) -> Result<BiorthonormalSystem> {
    biorthonormalize_with(h, Tolerance::default())
}

/// Biorthonormal eigenbasis of a diagonalizable Hamiltonian with a real,
/// nondegenerate spectrum.
pub fn biorthonormalize_with(h: &ComplexMatrix, tol: Tolerance) -> Result<BiorthonormalSystem> {
    let spectrum = eig_with(h, tol)?;
    if !spectrum.real_spectrum {
        return Err(Error::ComplexSpectrum {
            max_imag: spectrum.max_imag(),
        });
    }
    if spectrum.degenerate {
        let values = &spectrum.eigenvalues;
        let (i, j) = (0..values.len())
            .flat_map(|i| (i + 1..values.len()).map(move |j| (i, j)))
            .min_by(|&(a, b), &(c, d)| {
                (values[a] - values[b]).norm().total_cmp(&(values[c] - values[d]).norm())
            })
            .expect("degenerate spectrum has a pair");
        return Err(Error::DegenerateSpectrum {
            first: format!("{}", values[i]),
            second: format!("{}", values[j]),
        });
    }
    let n = spectrum.dim();
    let mut right = spectrum.right;
    let mut left = spectrum.left;
    for j in 0..n {
        let col = right.column(j);
        let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let pivot = col
            .iter()
            .position(|z| z.norm() >= max * (1.0 - 1e-12))
            .expect("nonzero eigenvector");
        let phase = col[pivot].conj() / col[pivot].norm();
        for i in 0..n {
            right[(i, j)] *= phase;
            left[(i, j)] *= phase;
        }
        right[(pivot, j)].im = 0.0;
    }
    Ok(BiorthonormalSystem {
        energies: spectrum.eigenvalues.iter().map(|z| z.re).collect(),
        right,
        left,
    })
}

/// Positive-definite Hermitian metric `η` with cached `η^{1/2}` and
/// `η^{-1/2}`.
#[derive(Debug, Clone, Serialize)]
pub struct MetricOperator {
    matrix: ComplexMatrix,
    sqrt: ComplexMatrix,
    inv_sqrt: ComplexMatrix,
    weights: Option<Vec<f64>>,
}

impl MetricOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::new_with(matrix, Tolerance::default())
    }

    /// Validates Hermiticity and positivity; the stored matrix is the
    /// Hermitian part of the input.
    pub fn new_with(matrix: ComplexMatrix, tol: Tolerance) -> Result<Self> {
        let sqrt = sqrt_pos_with(&matrix, tol)?;
        let inv_sqrt = inv_sqrt_pos(&matrix, tol)?;
        Ok(Self {
            matrix: matrix.hermitian_part(),
            sqrt,
            inv_sqrt,
            weights: None,
        })
    }

    pub fn identity(n: usize) -> Self {
        let i = ComplexMatrix::identity(n);
        Self {
            matrix: i.clone(),
            sqrt: i.clone(),
            inv_sqrt: i,
            weights: None,
        }
    }

    pub fn with_weights(mut self, weights: Vec<f64>) -> Self {
        self.weights = Some(weights);
        self
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn sqrt(&self) -> &ComplexMatrix {
        &self.sqrt
    }

    pub fn inv_sqrt(&self) -> &ComplexMatrix {
        &self.inv_sqrt
    }

    pub fn inverse(&self) -> ComplexMatrix {
        (&self.inv_sqrt * &self.inv_sqrt).hermitian_part()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Product metric `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        use crate::matcore::kron;
        Self {
            matrix: kron(&self.matrix, &other.matrix),
            sqrt: kron(&self.sqrt, &other.sqrt),
            inv_sqrt: kron(&self.inv_sqrt, &other.inv_sqrt),
            weights: None,
        }
    }

    /// Smallest eigenvalue of `η`.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eig(&self.matrix).map_or(f64::NAN, |e| e.values[0])
    }
}

/// `η = Σ_n |φ_n⟩⟨φ_n|`, so that `η|ψ_n⟩ = |φ_n⟩`.
pub fn canonical_metric(sys: &BiorthonormalSystem) -> Result<MetricOperator> {
    metric_family(sys, &vec![1.0; sys.dim()])
}

/// `η = Σ_n r_n |φ_n⟩⟨φ_n|` for positive weights `r_n`.
pub fn metric_family(sys: &BiorthonormalSystem, weights: &[f64]) -> Result<MetricOperator> {
    if weights.len() != sys.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} weights for a {}-level system",
            weights.len(),
            sys.dim()
        )));
    }
    if let Some((index, &value)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(w.is_finite() && **w > 0.0))
    {
        return Err(Error::NonPositiveWeight { index, value });
    }
    let n = sys.dim();
    let mut scaled = sys.left.clone();
    for (j, &w) in weights.iter().enumerate() {
        for i in 0..n {
            scaled[(i, j)] *= w;
        }
    }
    let eta = &scaled * &sys.left.adjoint();
    Ok(MetricOperator::new(eta)?.with_weights(weights.to_vec()))
}

/// `‖η h − h† η‖_F / max(1, ‖η h‖_F)`.
pub fn verify_quasi_hermitian(h: &ComplexMatrix, eta: &MetricOperator) -> Result<f64> {
    quasi_hermiticity_residual(h, eta.matrix())
}

/// [`verify_quasi_hermitian`] for a raw (possibly indefinite) Hermitian matrix.
pub fn quasi_hermiticity_residual(h: &ComplexMatrix, eta: &ComplexMatrix) -> Result<f64> {
    if !h.is_square() || h.shape() != eta.shape() {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian {}x{} against metric {}x{}",
            h.rows(),
            h.cols(),
            eta.rows(),
            eta.cols()
        )));
    }
    let eh = eta * h;
    let he = &h.adjoint() * eta;
    Ok(eh.distance(&he) / eh.frobenius_norm().max(1.0))
}

/// Result of [`hermitize`].
#[derive(Debug, Clone)]
pub struct Hermitized {
    /// `η^{1/2} h η^{-1/2}`.
    pub h_prime: ComplexMatrix,
    /// `η^{1/2}`.
    pub similarity: ComplexMatrix,
}

pub fn hermitize(h: &ComplexMatrix, eta: &MetricOperator) -> Result<Hermitized> {
    hermitize_with(h, eta, Tolerance::default())
}

/// Similarity `h → η^{1/2} h η^{-1/2}` onto a Hermitian operator.
pub fn hermitize_with(h: &ComplexMatrix, eta: &MetricOperator, tol: Tolerance) -> Result<Hermitized> {
    require_quasi_hermitian(h, eta, tol)?;
    let h_prime = &(eta.sqrt() * h) * eta.inv_sqrt();
    Ok(Hermitized {
        h_prime,
        similarity: eta.sqrt().clone(),
    })
}

pub(crate) fn require_quasi_hermitian(
    h: &ComplexMatrix,
    eta: &MetricOperator,
    tol: Tolerance,
) -> Result<()> {
    let residual = verify_quasi_hermitian(h, eta)?;
    if residual > tol.relative {
        return Err(Error::NotQuasiHermitian { residual });
    }
    Ok(())
}

/// Congruence `η' → η^{-1/2} η' η^{-1/2}` into the hermitized frame.
pub fn congruence(eta: &MetricOperator, other: &ComplexMatrix) -> ComplexMatrix {
    (&(eta.inv_sqrt() * other) * eta.inv_sqrt()).hermitian_part()
}

/// Alternative metric `η' = η^{1/2} C η^{1/2}` for a positive-definite `C`
/// commuting with the hermitized Hamiltonian.
pub fn metric_from_commutant(
    h: &ComplexMatrix,
    eta: &MetricOperator,
    c: &ComplexMatrix,
) -> Result<MetricOperator> {
    metric_from_commutant_with(h, eta, c, Tolerance::default())
}

pub fn metric_from_commutant_with(
    h: &ComplexMatrix,
    eta: &MetricOperator,
    c: &ComplexMatrix,
    tol: Tolerance,
) -> Result<MetricOperator> {
    let herm = hermitize_with(h, eta, tol)?;
    if c.shape() != h.shape() {
        return Err(Error::DimensionMismatch(format!(
            "commutant element {}x{} for a {}-level system",
            c.rows(),
            c.cols(),
            h.rows()
        )));
    }
    let defect = herm.h_prime.commutator(c).frobenius_norm()
        / (herm.h_prime.frobenius_norm() * c.frobenius_norm()).max(1.0);
    if defect > tol.relative {
        return Err(Error::InvalidMatrix(format!(
            "operator does not commute with the hermitized Hamiltonian (defect {defect:.3e})"
        )));
    }
    let eta_prime = &(eta.sqrt() * c) * eta.sqrt();
    MetricOperator::new_with(eta_prime, tol)
}

/// Lower and upper bounds of the log-uniform commutant eigenvalues.
pub const COMMUTANT_RANGE: (f64, f64) = (1e-2, 1e2);

/// `count` alternative metrics `η^{1/2} C η^{1/2}` where `C` is diagonal in
/// the eigenbasis of the hermitized Hamiltonian with log-uniform entries in
/// [`COMMUTANT_RANGE`].
pub fn commutant_metrics(
    h: &ComplexMatrix,
    eta: &MetricOperator,
    count: usize,
    seed: u64,
) -> Result<Vec<MetricOperator>> {
    commutant_metrics_with(h, eta, count, seed, Tolerance::default())
}

pub fn commutant_metrics_with(
    h: &ComplexMatrix,
    eta: &MetricOperator,
    count: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<Vec<MetricOperator>> {
    let herm = hermitize_with(h, eta, tol)?;
    let basis = hermitian_eig(&herm.h_prime)?;
    let scale = herm.h_prime.frobenius_norm().max(1.0);
    for w in basis.values.windows(2) {
        if (w[1] - w[0]).abs() <= tol.absolute * scale {
            return Err(Error::DegenerateSpectrum {
                first: w[0].to_string(),
                second: w[1].to_string(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = (COMMUTANT_RANGE.0.ln(), COMMUTANT_RANGE.1.ln());
    (0..count)
        .map(|_| {
            let diag: Vec<f64> = (0..basis.values.len())
                .map(|_| rng.gen_range(lo..hi).exp())
                .collect();
            let v = &basis.vectors;
            let mut scaled = v.clone();
            for (j, &c) in diag.iter().enumerate() {
                for i in 0..v.rows() {
                    scaled[(i, j)] *= c;
                }
            }
            let c = (&scaled * &v.adjoint()).hermitian_part();
            let eta_prime = &(eta.sqrt() * &c) * eta.sqrt();
            MetricOperator::new_with(eta_prime, tol)
        })
        .collect()
}

/// `U = η^{-1/2} W η^{1/2}` for unitary `W`, so that `U† η U = η`.
pub fn pseudo_unitary_from(eta: &MetricOperator, w: &ComplexMatrix) -> ComplexMatrix {
    &(eta.inv_sqrt() * w) * eta.sqrt()
}

/// `η`-quasi-Hermitian operator `η^{-1/2} K η^{1/2}` pulled back from a
/// Hermitian `K`.
pub fn quasi_hermitian_from(eta: &MetricOperator, k: &ComplexMatrix) -> ComplexMatrix {
    &(eta.inv_sqrt() * k) * eta.sqrt()
}

pub fn is_pt_symmetric(h: &ComplexMatrix, p: &ComplexMatrix) -> Result<bool> {
    is_pt_symmetric_with(h, p, Tolerance::default())
}

/// PT symmetry with `T` complex conjugation: `P · conj(h) · P = h`.
pub fn is_pt_symmetric_with(h: &ComplexMatrix, p: &ComplexMatrix, tol: Tolerance) -> Result<bool> {
    if !h.is_square() || h.shape() != p.shape() {
        return Err(Error::DimensionMismatch(format!(
            "Hamiltonian {}x{} against parity {}x{}",
            h.rows(),
            h.cols(),
            p.rows(),
            p.cols()
        )));
    }
    let n = p.rows();
    if !p.is_real(tol.absolute) {
        return Err(Error::InvalidParity("parity operator must be real".into()));
    }
    if p.distance(&p.transpose()) > tol.relative {
        return Err(Error::InvalidParity("parity operator must be symmetric".into()));
    }
    if (p * p).distance(&ComplexMatrix::identity(n)) > tol.relative * (n as f64).sqrt() {
        return Err(Error::InvalidParity("parity operator must square to the identity".into()));
    }
    let image = &(p * &h.conj()) * p;
    Ok(image.distance(h) / h.frobenius_norm().max(1.0) <= tol.relative)
}
