//! Hermitian eigensolver, singular value decomposition and positive square
//! roots, all built on complex Jacobi rotations.

use num_complex::Complex64;

use super::{ComplexMatrix, Tolerance};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const MAX_SWEEPS: usize = 100;

/// `A = V · diag(values) · V†`, values ascending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V · diag(f(λ)) · V†`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (j, &v) in self.values.iter().enumerate() {
            let w = f(v);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        &scaled * &self.vectors.adjoint()
    }
}

/// `A = U · diag(σ) · V†` with `σ` descending. `U` is `rows × k`, `V` is
/// `cols × k`, `k = min(rows, cols)`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub singular_values: Vec<f64>,
    pub v: ComplexMatrix,
}

/// Unitary 2×2 `W` such that `W† [[app, apq], [conj(apq), aqq]] W` is diagonal.
fn jacobi_rotation(app: f64, aqq: f64, apq: Complex64) -> [[Complex64; 2]; 2] {
    let g = apq.norm();
    let e = apq / g;
    let tau = (aqq - app) / (2.0 * g);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    let ec = e.conj();
    [
        [Complex64::new(c, 0.0), Complex64::new(s, 0.0)],
        [-ec * s, ec * c],
    ]
}

fn rotate_columns(m: &mut ComplexMatrix, p: usize, q: usize, w: &[[Complex64; 2]; 2]) {
    for i in 0..m.rows() {
        let a = m[(i, p)];
        let b = m[(i, q)];
        m[(i, p)] = a * w[0][0] + b * w[1][0];
        m[(i, q)] = a * w[0][1] + b * w[1][1];
    }
}

fn rotate_rows_adjoint(m: &mut ComplexMatrix, p: usize, q: usize, w: &[[Complex64; 2]; 2]) {
    for j in 0..m.cols() {
        let a = m[(p, j)];
        let b = m[(q, j)];
        m[(p, j)] = w[0][0].conj() * a + w[1][0].conj() * b;
        m[(q, j)] = w[0][1].conj() * a + w[1][1].conj() * b;
    }
}

/// Cyclic Jacobi eigensolver for Hermitian matrices. The input is
/// symmetrized as `(A + A†)/2` first.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<HermitianEigen> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "Hermitian eigensolver needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let mut m = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm();
    if scale > 0.0 {
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| m[(i, j)].norm_sqr())
                .sum::<f64>()
                .sqrt();
            if off <= f64::EPSILON * scale * 0.1 {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = m[(p, q)];
                    if apq.norm() <= f64::MIN_POSITIVE {
                        continue;
                    }
                    let w = jacobi_rotation(m[(p, p)].re, m[(q, q)].re, apq);
                    rotate_columns(&mut m, p, q, &w);
                    rotate_rows_adjoint(&mut m, p, q, &w);
                    m[(p, q)] = ZERO;
                    m[(q, p)] = ZERO;
                    m[(p, p)].im = 0.0;
                    m[(q, q)].im = 0.0;
                    rotate_columns(&mut v, p, q, &w);
                }
            }
        }
        if !converged {
            return Err(Error::NoConvergence("Jacobi eigensolver".into()));
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// One-sided (Hestenes) Jacobi singular value decomposition.
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if a.rows() < a.cols() {
        let t = svd(&a.adjoint())?;
        return Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
        });
    }
    let (rows, cols) = a.shape();
    let mut u = a.clone();
    let mut v = ComplexMatrix::identity(cols);
    let negligible = (f64::EPSILON * a.frobenius_norm()).powi(2);
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let mut alpha = 0.0;
                let mut beta = 0.0;
                let mut gamma = ZERO;
                for i in 0..rows {
                    let up = u[(i, p)];
                    let uq = u[(i, q)];
                    alpha += up.norm_sqr();
                    beta += uq.norm_sqr();
                    gamma += up.conj() * uq;
                }
                if gamma.norm() <= f64::EPSILON * (alpha * beta).sqrt()
                    || alpha.min(beta) <= negligible
                    || gamma.norm() == 0.0
                {
                    continue;
                }
                rotated = true;
                let w = jacobi_rotation(alpha, beta, gamma);
                rotate_columns(&mut u, p, q, &w);
                rotate_columns(&mut v, p, q, &w);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence("one-sided Jacobi SVD".into()));
    }
    let norms: Vec<f64> = (0..cols)
        .map(|j| (0..rows).map(|i| u[(i, j)].norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let singular_values: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let u_sorted = ComplexMatrix::from_fn(rows, cols, |i, k| {
        let j = order[k];
        if norms[j] > 0.0 {
            u[(i, j)] / norms[j]
        } else {
            ZERO
        }
    });
    let v_sorted = ComplexMatrix::from_fn(cols, cols, |i, k| v[(i, order[k])]);
    Ok(Svd {
        u: u_sorted,
        singular_values,
        v: v_sorted,
    })
}

fn positive_eigen(p: &ComplexMatrix, tol: Tolerance) -> Result<HermitianEigen> {
    if !p.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "square root of non-square {}x{} matrix",
            p.rows(),
            p.cols()
        )));
    }
    if p.hermiticity_defect() > tol.relative {
        return Err(Error::InvalidMatrix(format!(
            "matrix is not Hermitian (defect {:.3e})",
            p.hermiticity_defect()
        )));
    }
    let e = hermitian_eig(p)?;
    let min = e.values[0];
    if min <= tol.absolute * p.frobenius_norm().max(1.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Ok(e)
}

/// Principal square root of a Hermitian positive-definite matrix.
pub fn sqrt_pos(p: &ComplexMatrix) -> Result<ComplexMatrix> {
    sqrt_pos_with(p, Tolerance::default())
}

pub fn sqrt_pos_with(p: &ComplexMatrix, tol: Tolerance) -> Result<ComplexMatrix> {
    Ok(positive_eigen(p, tol)?.map(f64::sqrt).hermitian_part())
}

/// `p^{-1/2}` for Hermitian positive-definite `p`.
pub fn inv_sqrt_pos(p: &ComplexMatrix, tol: Tolerance) -> Result<ComplexMatrix> {
    Ok(positive_eigen(p, tol)?.map(|x| 1.0 / x.sqrt()).hermitian_part())
}
