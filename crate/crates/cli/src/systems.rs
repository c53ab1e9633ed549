//! Hamiltonians, metrics and states of the built-in scenarios.

use quasi_hermitian::matcore::kron;
use quasi_hermitian::{c64, ComplexMatrix};

pub fn sigma1() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}

pub fn sigma3() -> ComplexMatrix {
    ComplexMatrix::from_real_diag(&[1.0, -1.0])
}

/// `diag(1, −1, −1, 1)`.
pub fn two_qubit_hamiltonian() -> ComplexMatrix {
    kron(&sigma3(), &sigma3())
}

/// PT-symmetric qubit `½[[√3 + i, 2], [2, √3 − i]]` with eigenvalues `0`
/// and `√3`.
pub fn pt_qubit() -> ComplexMatrix {
    let s3 = 3f64.sqrt();
    ComplexMatrix::from_rows(&[
        vec![c64(s3 / 2.0, 0.5), c64(1.0, 0.0)],
        vec![c64(1.0, 0.0), c64(s3 / 2.0, -0.5)],
    ])
}

/// Positive metric of [`pt_qubit`]: `[[2, −√2 − i], [−√2 + i, 2]]`,
/// trace 4 and determinant 1.
pub fn pt_qubit_metric() -> ComplexMatrix {
    let s2 = 2f64.sqrt();
    ComplexMatrix::from_rows(&[
        vec![c64(2.0, 0.0), c64(-s2, -1.0)],
        vec![c64(-s2, 1.0), c64(2.0, 0.0)],
    ])
}

/// `1 ⊕ H_B` with `H_B` = [`pt_qubit`], plus the coupling `ε σ1 ⊗ 1` at
/// `ε = ½`. Blocks are indexed by the first factor, so `1 ⊗ ζ` is a metric
/// whenever `ζ` is one for `H_B`.
pub fn pt_coupled_hamiltonian() -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    &id.direct_sum(&pt_qubit()) + &kron(&sigma1(), &id).scale_real(0.5)
}

/// `diag(1, 2) ⊕ H_B`.
pub fn block_sum_hamiltonian() -> ComplexMatrix {
    ComplexMatrix::from_real_diag(&[1.0, 2.0]).direct_sum(&pt_qubit())
}

/// `1 ⊗ σ1`.
pub fn parity() -> ComplexMatrix {
    kron(&ComplexMatrix::identity(2), &sigma1())
}

/// `½[[1, 1], [1, 1]] ⊗ ½[[1, −i], [i, 1]]`.
pub fn initial_state() -> ComplexMatrix {
    let a = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
    let b = ComplexMatrix::from_rows(&[vec![c64(0.5, 0.0), c64(0.0, -0.5)], vec![c64(0.0, 0.5), c64(0.5, 0.0)]]);
    kron(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupled_hamiltonian_entries() {
        let s3 = 3f64.sqrt();
        let h = pt_coupled_hamiltonian();
        let expected = ComplexMatrix::from_rows(&[
            vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(0.5, 0.0), c64(0.0, 0.0)],
            vec![c64(0.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0), c64(0.5, 0.0)],
            vec![c64(0.5, 0.0), c64(0.0, 0.0), c64(0.5 * s3, 0.5), c64(1.0, 0.0)],
            vec![c64(0.0, 0.0), c64(0.5, 0.0), c64(1.0, 0.0), c64(0.5 * s3, -0.5)],
        ]);
        assert!(h.distance(&expected) < 1e-15);
    }

    #[test]
    fn block_sum_entries() {
        let h = block_sum_hamiltonian();
        assert_eq!(h[(1, 1)], c64(2.0, 0.0));
        assert_eq!(h[(2, 3)], c64(1.0, 0.0));
        assert_eq!(h[(0, 2)], c64(0.0, 0.0));
    }
}
