//! Seeded random matrix generators.

use num_complex::Complex64;
use rand::Rng;

use super::{hermitian_eig, ComplexMatrix};

/// Entries with real and imaginary parts uniform in `[-1, 1)`.
pub fn random_complex<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// `(X + X†)/2` for a [`random_complex`] `X`.
pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    random_complex(n, n, rng).hermitian_part()
}

/// `X X† + floor·I`, Hermitian positive definite.
pub fn random_positive<R: Rng + ?Sized>(n: usize, floor: f64, rng: &mut R) -> ComplexMatrix {
    let x = random_complex(n, n, rng);
    let mut p = (&x * &x.adjoint()).hermitian_part();
    for i in 0..n {
        p[(i, i)] += floor;
    }
    p
}

/// `exp(iK)` for a random Hermitian `K`.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let k = random_hermitian(n, rng).scale_real(std::f64::consts::PI);
    let e = hermitian_eig(&k).expect("square input");
    let mut scaled = e.vectors.clone();
    for (j, &lambda) in e.values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, lambda);
        for i in 0..n {
            scaled[(i, j)] *= phase;
        }
    }
    &scaled * &e.vectors.adjoint()
}

/// `V D V⁻¹` with `V = I + 0.3 X/√n` and real eigenvalues spaced at least 0.5
/// apart; diagonalizable with a real nondegenerate spectrum.
pub fn random_real_spectrum<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let mut energy = rng.gen_range(-2.0..0.0);
    let diag: Vec<f64> = (0..n)
        .map(|_| {
            let e = energy;
            energy += rng.gen_range(0.5..1.5);
            e
        })
        .collect();
    let x = random_complex(n, n, rng).scale_real(0.3 / (n as f64).sqrt());
    let v = &ComplexMatrix::identity(n) + &x;
    let v_inv = v.inverse().expect("perturbed identity is invertible");
    &(&v * &ComplexMatrix::from_real_diag(&diag)) * &v_inv
}
