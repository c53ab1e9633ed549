//! Eigendecomposition of small non-Hermitian matrices.
//!
//! 2×2 inputs use the closed-form quadratic; larger inputs are reduced to
//! Hessenberg form by Householder reflections and brought to complex Schur
//! form by implicitly shifted single-shift QR. Right eigenvectors come from
//! back-substitution on the triangular factor, left eigenvectors from the
//! inverse of the right-eigenvector matrix.

use std::cmp::Ordering;

use num_complex::Complex64;

use super::{ComplexMatrix, Tolerance};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const MAX_DIM: usize = 64;

/// Eigenvalues with biorthonormal right and left eigenvectors.
///
/// Columns of `right` are `A`'s right eigenvectors (unit norm); columns of
/// `left` satisfy `left† · right = I`, so `A = right · diag(λ) · left†`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub right: ComplexMatrix,
    pub left: ComplexMatrix,
    /// Two eigenvalues lie closer than `tolerance.absolute`.
    pub degenerate: bool,
    /// Every imaginary part is within `tolerance.absolute`.
    pub real_spectrum: bool,
    /// Condition number `‖R‖_F ‖R⁻¹‖_F` of the right-eigenvector matrix.
    pub condition: f64,
    pub tolerance: Tolerance,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_imag(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// `R · diag(f(λ)) · L†`.
    pub fn apply_function(&self, f: impl Fn(Complex64) -> Complex64) -> ComplexMatrix {
        let n = self.dim();
        let mut scaled = self.right.clone();
        for (j, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            for i in 0..n {
                scaled[(i, j)] *= w;
            }
        }
        &scaled * &self.left.adjoint()
    }

    /// `‖A·R − R·diag(λ)‖_F / ‖A‖_F`.
    pub fn eigen_residual(&self, a: &ComplexMatrix) -> f64 {
        let lhs = a * &self.right;
        let rhs = &self.right * &ComplexMatrix::from_diag(&self.eigenvalues);
        lhs.distance(&rhs) / a.frobenius_norm().max(f64::MIN_POSITIVE)
    }

    /// `‖L†R − I‖_F`.
    pub fn biorthonormality_defect(&self) -> f64 {
        (&self.left.adjoint() * &self.right).distance(&ComplexMatrix::identity(self.dim()))
    }
}

/// [`eig_with`] using default tolerances.
pub fn eig(a: &ComplexMatrix) -> Result<Spectrum> {
    eig_with(a, Tolerance::default())
}

/// Full eigendecomposition. Eigenvalues are sorted by real part, then
/// imaginary part.
pub fn eig_with(a: &ComplexMatrix, tol: Tolerance) -> Result<Spectrum> {
    check_square(a)?;
    let n = a.rows();
    let (values, vectors) = if n == 1 {
        (vec![a[(0, 0)]], ComplexMatrix::identity(1))
    } else if n == 2 {
        eig_2x2(a)
    } else {
        let (t, z) = schur(a)?;
        let y = triangular_eigenvectors(&t);
        let vectors = &z * &y;
        (t.diagonal(), vectors)
    };

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| cmp_complex(values[i], values[j]));
    let eigenvalues: Vec<Complex64> = order.iter().map(|&i| values[i]).collect();
    let mut right = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut v = vectors.column(src);
        normalize(&mut v);
        right.set_column(dst, &v);
    }

    let inv = right
        .inverse()
        .map_err(|_| Error::NonDiagonalizable { condition: f64::INFINITY })?;
    let condition = right.frobenius_norm() * inv.frobenius_norm();
    if !condition.is_finite() || condition > tol.max_condition {
        return Err(Error::NonDiagonalizable { condition });
    }
    let left = inv.adjoint();

    let degenerate = has_close_pair(&eigenvalues, tol.absolute);
    let real_spectrum = eigenvalues.iter().all(|z| z.im.abs() <= tol.absolute);

    Ok(Spectrum {
        eigenvalues,
        right,
        left,
        degenerate,
        real_spectrum,
        condition,
        tolerance: tol,
    })
}

/// Eigenvalues only, sorted by real part then imaginary part. Accepts
/// non-diagonalizable input.
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    check_square(a)?;
    let mut values = match a.rows() {
        1 => vec![a[(0, 0)]],
        2 => {
            let (l1, l2) = quadratic_roots(a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
            vec![l1, l2]
        }
        _ => schur(a)?.0.diagonal(),
    };
    values.sort_by(|x, y| cmp_complex(*x, *y));
    Ok(values)
}

fn check_square(a: &ComplexMatrix) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    if a.rows() > MAX_DIM {
        return Err(Error::TooLarge {
            size: a.rows(),
            limit: MAX_DIM,
        });
    }
    Ok(())
}

fn cmp_complex(x: Complex64, y: Complex64) -> Ordering {
    x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im))
}

fn has_close_pair(values: &[Complex64], tol: f64) -> bool {
    values
        .iter()
        .enumerate()
        .any(|(i, a)| values[i + 1..].iter().any(|b| (a - b).norm() <= tol))
}

fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
}

fn quadratic_roots(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let half_tr = (a + d) * 0.5;
    let half_diff = (a - d) * 0.5;
    let disc = (half_diff * half_diff + b * c).sqrt();
    (half_tr - disc, half_tr + disc)
}

fn eig_2x2(m: &ComplexMatrix) -> (Vec<Complex64>, ComplexMatrix) {
    let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let (l1, l2) = quadratic_roots(a, b, c, d);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let vector = |lambda: Complex64, fallback: usize| -> Vec<Complex64> {
        // (A − λ)v = 0 has solutions (b, λ − a) and (λ − d, c); take the better conditioned.
        let u = [b, lambda - a];
        let w = [lambda - d, c];
        let nu = u[0].norm() + u[1].norm();
        let nw = w[0].norm() + w[1].norm();
        if nu.max(nw) <= f64::EPSILON * scale {
            let mut e = vec![ZERO; 2];
            e[fallback] = ONE;
            e
        } else if nu >= nw {
            u.to_vec()
        } else {
            w.to_vec()
        }
    };
    // For a scalar matrix both candidate vectors vanish; fall back to the standard basis.
    let v1 = vector(l1, 0);
    let v2 = vector(l2, 1);
    (vec![l1, l2], ComplexMatrix::from_columns(&[v1, v2]))
}

/// Complex Householder reduction to upper Hessenberg form: returns
/// `(H, Q)` with `A = Q H Q†`.
fn hessenberg(a: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut q = ComplexMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { ONE };
        let alpha = -phase * xnorm;
        let mut v = x;
        v[0] -= alpha;
        normalize(&mut v);
        // h ← (I − 2vv†) h (I − 2vv†) restricted to rows/cols k+1..n
        for j in 0..n {
            let dot: Complex64 = (0..v.len()).map(|r| v[r].conj() * h[(k + 1 + r, j)]).sum();
            for r in 0..v.len() {
                h[(k + 1 + r, j)] -= v[r] * dot * 2.0;
            }
        }
        for i in 0..n {
            let dot: Complex64 = (0..v.len()).map(|r| h[(i, k + 1 + r)] * v[r]).sum();
            for r in 0..v.len() {
                h[(i, k + 1 + r)] -= dot * v[r].conj() * 2.0;
            }
            let dotq: Complex64 = (0..v.len()).map(|r| q[(i, k + 1 + r)] * v[r]).sum();
            for r in 0..v.len() {
                q[(i, k + 1 + r)] -= dotq * v[r].conj() * 2.0;
            }
        }
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
    }
    (h, q)
}

/// Givens rotation `G = [[c, s], [−s̄, c]]` with `G·[x; y] = [r; 0]`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let ny = y.norm();
    if ny == 0.0 {
        return (1.0, ZERO);
    }
    let nx = x.norm();
    if nx == 0.0 {
        return (0.0, y.conj() / ny);
    }
    let norm = nx.hypot(ny);
    let phase = x / nx;
    (nx / norm, phase * y.conj() / norm)
}

/// Complex Schur form `A = Z T Z†` with `T` upper triangular.
fn schur(a: &ComplexMatrix) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = a.rows();
    let (mut h, mut z) = hessenberg(a);
    let norm = a.frobenius_norm().max(f64::MIN_POSITIVE);
    let eps = f64::EPSILON;
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let limit = 100 * n.max(10);

    while hi > 0 {
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].norm() + h[(l, l)].norm();
            if s == 0.0 {
                s = norm;
            }
            if h[(l, l - 1)].norm() <= eps * s {
                h[(l, l - 1)] = ZERO;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > limit {
            return Err(Error::NoConvergence(format!(
                "QR iteration exceeded {limit} sweeps"
            )));
        }

        let shift = if iter.is_multiple_of(10) {
            // exceptional shift breaks symmetric stagnation cycles
            h[(hi, hi)] + Complex64::new(0.75 * h[(hi, hi - 1)].norm(), 0.0)
        } else {
            let (l1, l2) = quadratic_roots(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            );
            if (l1 - h[(hi, hi)]).norm() <= (l2 - h[(hi, hi)]).norm() {
                l1
            } else {
                l2
            }
        };

        for k in l..hi {
            let (x, y) = if k == l {
                (h[(l, l)] - shift, h[(l + 1, l)])
            } else {
                (h[(k, k - 1)], h[(k + 1, k - 1)])
            };
            let (c, s) = givens(x, y);
            let start = if k == l { l } else { k - 1 };
            for j in start..n {
                let p = h[(k, j)];
                let q = h[(k + 1, j)];
                h[(k, j)] = p * c + s * q;
                h[(k + 1, j)] = -s.conj() * p + q * c;
            }
            if k > l {
                h[(k + 1, k - 1)] = ZERO;
            }
            let last = (k + 2).min(hi);
            for i in 0..=last {
                let p = h[(i, k)];
                let q = h[(i, k + 1)];
                h[(i, k)] = p * c + s.conj() * q;
                h[(i, k + 1)] = -s * p + q * c;
            }
            for i in 0..n {
                let p = z[(i, k)];
                let q = z[(i, k + 1)];
                z[(i, k)] = p * c + s.conj() * q;
                z[(i, k + 1)] = -s * p + q * c;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok((h, z))
}

/// Eigenvectors of an upper triangular matrix by back-substitution
/// (columns, unnormalized).
fn triangular_eigenvectors(t: &ComplexMatrix) -> ComplexMatrix {
    let n = t.rows();
    let smin = (f64::EPSILON * t.max_abs()).max(f64::MIN_POSITIVE);
    let mut y = ComplexMatrix::zeros(n, n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut v = vec![ZERO; n];
        v[k] = ONE;
        for i in (0..k).rev() {
            let sum: Complex64 = (i + 1..=k).map(|j| t[(i, j)] * v[j]).sum();
            let mut denom = t[(i, i)] - lambda;
            if denom.norm() < smin {
                denom = Complex64::new(smin, 0.0);
            }
            v[i] = -sum / denom;
        }
        y.set_column(k, &v);
    }
    y
}
