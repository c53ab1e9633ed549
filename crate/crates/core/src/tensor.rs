//! Tensor-separability of metric operators.
//!
//! A bipartite quasi-Hermitian system of dimension `n·m` has component
//! descriptions exactly when some metric of its Hamiltonian factors as
//! `η = ξ ⊗ ζ` with positive `ξ` and `ζ`. This module decides that
//! numerically: through the eigenvalue product-grid test, the nearest
//! Kronecker product of a given `η`, a multistart search over a
//! Hamiltonian's whole metric family, and the block-diagonal linear
//! obstruction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{hermitian_eig, kron, random::random_hermitian, svd, Complex64, ComplexMatrix, Tolerance};
use crate::metric::{
    biorthonormalize_with, metric_family, quasi_hermitian_from, quasi_hermiticity_residual,
    verify_quasi_hermitian, MetricOperator,
};
use crate::optimize::{nelder_mead, NelderMeadOptions};

/// Largest `n·m` handled by the exhaustive eigenvalue assignment.
pub const SPECTRUM_TEST_LIMIT: usize = 16;

/// Relative residual below which a factorization counts as exact.
pub const SEPARABILITY_THRESHOLD: f64 = 1e-8;

fn block_dims(eta: &ComplexMatrix, n: usize, m: usize) -> Result<()> {
    if n == 0 || m == 0 || eta.shape() != (n * m, n * m) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator cannot be split as {n} ⊗ {m}",
            eta.rows(),
            eta.cols()
        )));
    }
    Ok(())
}

/// Van Loan–Pitsianis rearrangement: row `i·n + j` holds the `m×m` block
/// `(i, j)` of `eta`, vectorized row-major. `kron(ξ, ζ)` maps to
/// `vec(ξ)·vec(ζ)ᵀ`.
pub fn rearrange(eta: &ComplexMatrix, n: usize, m: usize) -> Result<ComplexMatrix> {
    block_dims(eta, n, m)?;
    Ok(ComplexMatrix::from_fn(n * n, m * m, |row, col| {
        let (i, j) = (row / n, row % n);
        let (k, l) = (col / m, col % m);
        eta[(i * m + k, j * m + l)]
    }))
}

/// Relative rank-one defect `sqrt(Σ_{k≥2} σ_k²) / ‖η‖_F` of the rearranged
/// operator; zero exactly when `η` is a Kronecker product.
pub fn rank_one_defect(eta: &ComplexMatrix, n: usize, m: usize) -> Result<f64> {
    let r = rearrange(eta, n, m)?;
    let norm = r.frobenius_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let s = svd(&r)?.singular_values;
    Ok(s[1..].iter().map(|x| x * x).sum::<f64>().sqrt() / norm)
}

/// Candidate factors `(ξ, ζ)` of a metric, gauge-fixed to `Tr ξ = n`.
#[derive(Debug, Clone, Serialize)]
pub struct KroneckerFactorization {
    pub xi: ComplexMatrix,
    pub zeta: ComplexMatrix,
    /// `‖ξ ⊗ ζ − η‖_F / ‖η‖_F`.
    pub residual: f64,
    /// Both factors are positive definite.
    pub positive: bool,
}

impl KroneckerFactorization {
    pub fn gauge_trace(&self) -> f64 {
        self.xi.trace().re
    }

    pub fn product(&self) -> ComplexMatrix {
        kron(&self.xi, &self.zeta)
    }

    /// Factors as metric operators; fails when either is indefinite.
    pub fn metrics(&self) -> Result<(MetricOperator, MetricOperator)> {
        Ok((
            MetricOperator::new(self.xi.clone())?,
            MetricOperator::new(self.zeta.clone())?,
        ))
    }
}

fn is_positive(a: &ComplexMatrix, tol: Tolerance) -> bool {
    hermitian_eig(a).is_ok_and(|e| e.values[0] > tol.absolute * a.frobenius_norm().max(1.0))
}

/// Best Kronecker approximation of any `(n·m)×(n·m)` operator from the
/// leading singular pair of its rearrangement. Factors are projected onto
/// Hermitian matrices; positivity is reported, not required.
pub fn kron_decompose(eta: &ComplexMatrix, n: usize, m: usize) -> Result<KroneckerFactorization> {
    kron_decompose_with(eta, n, m, Tolerance::default())
}

pub fn kron_decompose_with(
    eta: &ComplexMatrix,
    n: usize,
    m: usize,
    tol: Tolerance,
) -> Result<KroneckerFactorization> {
    let r = rearrange(eta, n, m)?;
    let dec = svd(&r)?;
    let sigma = dec.singular_values[0];
    let u = dec.u.column(0);
    let v = dec.v.column(0);
    let xi_raw = ComplexMatrix::from_fn(n, n, |i, j| u[i * n + j]);
    let zeta_raw = ComplexMatrix::from_fn(m, m, |k, l| v[k * m + l].conj() * sigma);

    let trace = xi_raw.trace();
    let gauge = if trace.norm() > f64::EPSILON * xi_raw.frobenius_norm() {
        Complex64::new(n as f64, 0.0) / trace
    } else {
        let big = xi_raw
            .as_slice()
            .iter()
            .copied()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("non-empty");
        if big.norm() > 0.0 {
            big.norm() / big
        } else {
            Complex64::new(1.0, 0.0)
        }
    };
    let xi = xi_raw.scale(gauge).hermitian_part();
    let zeta = zeta_raw.scale(gauge.inv()).hermitian_part();
    let norm = eta.frobenius_norm().max(f64::MIN_POSITIVE);
    let residual = kron(&xi, &zeta).distance(eta) / norm;
    let positive = is_positive(&xi, tol) && is_positive(&zeta, tol);
    Ok(KroneckerFactorization {
        xi,
        zeta,
        residual,
        positive,
    })
}

/// Nearest Kronecker product of a positive-definite metric. Fails with
/// [`Error::FactorsIndefinite`] when the best factors are not positive.
pub fn nearest_kron(eta: &ComplexMatrix, n: usize, m: usize) -> Result<KroneckerFactorization> {
    nearest_kron_with(eta, n, m, Tolerance::default())
}

pub fn nearest_kron_with(
    eta: &ComplexMatrix,
    n: usize,
    m: usize,
    tol: Tolerance,
) -> Result<KroneckerFactorization> {
    block_dims(eta, n, m)?;
    if eta.hermiticity_defect() > tol.relative {
        return Err(Error::InvalidMatrix("metric must be Hermitian".into()));
    }
    let min = hermitian_eig(eta)?.values[0];
    if min <= tol.absolute * eta.frobenius_norm().max(1.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    let f = kron_decompose_with(eta, n, m, tol)?;
    if !f.positive {
        return Err(Error::FactorsIndefinite { residual: f.residual });
    }
    Ok(f)
}

/// Necessary spectral condition for `η = ξ ⊗ ζ`: the `n·m` eigenvalues can
/// be laid out on an `n×m` grid with `η_ij = ξ_i ζ_j` for positive `ξ_i`,
/// `ζ_j`.
pub fn spectrum_ratio_test(eigenvalues: &[f64], n: usize, m: usize) -> Result<bool> {
    spectrum_ratio_test_with(eigenvalues, n, m, 1e-8)
}

/// [`spectrum_ratio_test`] with a relative matching tolerance.
///
/// The smallest eigenvalue sits at `ξ_1 ζ_1`. Every choice of the other
/// `m − 1` entries of its row fixes the ratios `ζ_j / ζ_1`; each further row
/// then starts at the smallest unassigned eigenvalue and is fully
/// determined. Row choices with equal value patterns are tried once.
pub fn spectrum_ratio_test_with(eigenvalues: &[f64], n: usize, m: usize, rel_tol: f64) -> Result<bool> {
    let size = n * m;
    if eigenvalues.len() != size || size == 0 {
        return Err(Error::DimensionMismatch(format!(
            "{} eigenvalues for a {n} ⊗ {m} grid",
            eigenvalues.len()
        )));
    }
    if size > SPECTRUM_TEST_LIMIT {
        return Err(Error::TooLarge {
            size,
            limit: SPECTRUM_TEST_LIMIT,
        });
    }
    if let Some(&bad) = eigenvalues.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: bad });
    }
    if n == 1 || m == 1 {
        return Ok(true);
    }
    let mut values = eigenvalues.to_vec();
    values.sort_by(f64::total_cmp);
    let base = values[0];
    let rest = &values[1..];
    let close = |a: f64, b: f64| (a - b).abs() <= rel_tol * a.abs().max(b.abs());

    let mut tried: Vec<Vec<f64>> = Vec::new();
    let mut found = false;
    for_each_combination(rest.len(), m - 1, &mut |chosen: &[usize]| {
        if found {
            return;
        }
        let row: Vec<f64> = chosen.iter().map(|&i| rest[i]).collect();
        if tried
            .iter()
            .any(|t| t.iter().zip(&row).all(|(a, b)| close(*a, *b)))
        {
            return;
        }
        tried.push(row.clone());
        let ratios: Vec<f64> = std::iter::once(1.0).chain(row.iter().map(|x| x / base)).collect();
        let mut remaining: Vec<f64> = (0..rest.len())
            .filter(|i| !chosen.contains(i))
            .map(|i| rest[i])
            .collect();
        while let Some(&head) = remaining.first() {
            for &ratio in &ratios {
                let target = head * ratio;
                match remaining
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| close(**x, target))
                    .min_by(|a, b| (a.1 - target).abs().total_cmp(&(b.1 - target).abs()))
                {
                    Some((idx, _)) => {
                        remaining.remove(idx);
                    }
                    None => return,
                }
            }
        }
        found = true;
    });
    Ok(found)
}

fn for_each_combination(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, acc: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if acc.len() == k {
            f(acc);
            return;
        }
        for i in start..n {
            if n - i < k - acc.len() {
                break;
            }
            acc.push(i);
            rec(i + 1, n, k, acc, f);
            acc.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Settings for [`search_separable_metric_with`].
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SearchOptions {
    pub starts: usize,
    pub max_iterations: usize,
    /// Residual below which a separable metric counts as found.
    pub threshold: f64,
    /// Each weight `r_n` is confined to `[1/weight_bound, weight_bound]`.
    pub weight_bound: f64,
    pub parallel: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            starts: 32,
            max_iterations: 2000,
            threshold: SEPARABILITY_THRESHOLD,
            weight_bound: 10.0,
            parallel: false,
        }
    }
}

/// Verdict of the separable-metric search.
#[derive(Debug, Clone, Serialize)]
pub struct SeparabilityReport {
    pub found: bool,
    pub factorization: Option<KroneckerFactorization>,
    pub best_residual: f64,
    /// Family weights `r_n` of the best metric; absent for the identity
    /// metric of a Hermitian Hamiltonian.
    pub weights: Option<Vec<f64>>,
    pub starts: usize,
    pub seed: u64,
    /// Best rank-one defect reached from each start, in start order.
    pub start_residuals: Vec<f64>,
    /// The Hamiltonian was Hermitian and the identity metric was used.
    pub hermitian: bool,
}

/// [`search_separable_metric_with`] using default options.
pub fn search_separable_metric(
    h: &ComplexMatrix,
    n: usize,
    m: usize,
    starts: usize,
    seed: u64,
) -> Result<SeparabilityReport> {
    let opts = SearchOptions {
        starts,
        ..SearchOptions::default()
    };
    search_separable_metric_with(h, n, m, seed, opts, Tolerance::default())
}

/// Searches the metric family `Σ r_n |φ_n⟩⟨φ_n|` of `h` for a member of the
/// form `ξ ⊗ ζ`.
///
/// The rank-one defect of the rearranged metric is minimized over
/// log-weights (gauge `Σ log r_n = 0`, each weight clipped to the
/// configured bound) by simplex descent from `starts` seeded starting
/// points; the first start is the canonical metric. Hermitian Hamiltonians
/// short-circuit to the identity metric.
pub fn search_separable_metric_with(
    h: &ComplexMatrix,
    n: usize,
    m: usize,
    seed: u64,
    opts: SearchOptions,
    tol: Tolerance,
) -> Result<SeparabilityReport> {
    block_dims(h, n, m)?;
    if h.hermiticity_defect() <= tol.relative {
        let xi = ComplexMatrix::identity(n);
        let zeta = ComplexMatrix::identity(m);
        return Ok(SeparabilityReport {
            found: true,
            factorization: Some(KroneckerFactorization {
                xi,
                zeta,
                residual: 0.0,
                positive: true,
            }),
            best_residual: 0.0,
            weights: None,
            starts: opts.starts,
            seed,
            start_residuals: Vec::new(),
            hermitian: true,
        });
    }

    let sys = biorthonormalize_with(h, tol)?;
    let dim = sys.dim();
    let phi = sys.left_basis().clone();
    let bound = opts.weight_bound.max(1.0).ln();

    let log_weights = |x: &[f64]| -> Vec<f64> {
        let last = -x.iter().sum::<f64>();
        x.iter()
            .copied()
            .chain(std::iter::once(last))
            .map(|v| v.clamp(-bound, bound))
            .collect()
    };
    let family = |x: &[f64]| -> ComplexMatrix {
        let r: Vec<f64> = log_weights(x).into_iter().map(f64::exp).collect();
        let mut scaled = phi.clone();
        for (j, &w) in r.iter().enumerate() {
            for i in 0..dim {
                scaled[(i, j)] *= w;
            }
        }
        &scaled * &phi.adjoint()
    };
    let objective = |x: &[f64]| -> f64 {
        rank_one_defect(&family(x), n, m).map_or(f64::INFINITY, |d| d * d)
    };

    let free = dim - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<Vec<f64>> = (0..opts.starts.max(1))
        .map(|k| {
            if k == 0 {
                vec![0.0; free]
            } else {
                (0..free).map(|_| rng.gen_range(-bound..=bound)).collect()
            }
        })
        .collect();
    let nm_opts = NelderMeadOptions {
        max_iterations: opts.max_iterations,
        ..NelderMeadOptions::default()
    };
    let run = |x0: &Vec<f64>| nelder_mead(objective, x0, nm_opts);
    let minima: Vec<_> = if opts.parallel {
        starts.par_iter().map(run).collect()
    } else {
        starts.iter().map(run).collect()
    };

    let best = minima
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.value.total_cmp(&b.value).then(i.cmp(j)))
        .map(|(_, m)| m)
        .expect("at least one start");
    let weights: Vec<f64> = log_weights(&best.x).into_iter().map(f64::exp).collect();
    let eta = metric_family(&sys, &weights)?;
    let factorization = kron_decompose_with(eta.matrix(), n, m, tol)?;
    let best_residual = factorization.residual;
    let found = best_residual < opts.threshold && factorization.positive;
    Ok(SeparabilityReport {
        found,
        factorization: Some(factorization),
        best_residual,
        weights: Some(weights),
        starts: opts.starts,
        seed,
        start_residuals: minima.iter().map(|m| m.value.max(0.0).sqrt()).collect(),
        hermitian: false,
    })
}

/// Orthonormal (Frobenius) real basis of the `m×m` Hermitian matrices.
fn hermitian_basis(m: usize) -> Vec<ComplexMatrix> {
    let mut basis = Vec::with_capacity(m * m);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for k in 0..m {
        let mut e = ComplexMatrix::zeros(m, m);
        e[(k, k)] = Complex64::new(1.0, 0.0);
        basis.push(e);
    }
    for k in 0..m {
        for l in k + 1..m {
            let mut s = ComplexMatrix::zeros(m, m);
            s[(k, l)] = Complex64::new(r, 0.0);
            s[(l, k)] = Complex64::new(r, 0.0);
            basis.push(s);
            let mut a = ComplexMatrix::zeros(m, m);
            a[(k, l)] = Complex64::new(0.0, r);
            a[(l, k)] = Complex64::new(0.0, -r);
            basis.push(a);
        }
    }
    basis
}

/// Null space of the real-linear map `ζ ↦ (ζ a_k − b_k ζ)_k` over Hermitian
/// `ζ`: returns (smallest singular value, null-space matrices).
fn hermitian_null_space(equations: &[(&ComplexMatrix, ComplexMatrix)], m: usize) -> Result<(f64, Vec<ComplexMatrix>)> {
    let basis = hermitian_basis(m);
    let per_eq = 2 * m * m;
    let rows = per_eq * equations.len();
    let mut a = ComplexMatrix::zeros(rows, basis.len());
    for (col, b) in basis.iter().enumerate() {
        for (e, (right, left)) in equations.iter().enumerate() {
            let image = &(b * *right) - &(left * b);
            for (idx, z) in image.as_slice().iter().enumerate() {
                a[(e * per_eq + idx, col)] = Complex64::new(z.re, 0.0);
                a[(e * per_eq + m * m + idx, col)] = Complex64::new(z.im, 0.0);
            }
        }
    }
    let dec = svd(&a)?;
    let s = &dec.singular_values;
    let smallest = *s.last().expect("non-empty");
    let cutoff = 1e-10 * s[0].max(1.0);
    let null: Vec<ComplexMatrix> = (0..s.len())
        .filter(|&k| s[k] <= cutoff)
        .map(|k| {
            let mut z = ComplexMatrix::zeros(m, m);
            for (j, b) in basis.iter().enumerate() {
                z = &z + &b.scale_real(dec.v[(j, k)].re);
            }
            z.hermitian_part()
        })
        .collect();
    Ok((smallest, null))
}

/// Most positive member of a space of Hermitian matrices: maximizes
/// `λ_min(ζ) / ‖ζ‖_F` and returns the optimizer when that ratio is positive.
fn positive_member(space: &[ComplexMatrix]) -> Option<ComplexMatrix> {
    if space.is_empty() {
        return None;
    }
    let combine = |c: &[f64]| -> ComplexMatrix {
        let m = space[0].rows();
        c.iter()
            .zip(space)
            .fold(ComplexMatrix::zeros(m, m), |acc, (w, z)| &acc + &z.scale_real(*w))
    };
    let score = |c: &[f64]| -> f64 {
        let z = combine(c);
        let norm = z.frobenius_norm();
        if norm == 0.0 {
            return f64::INFINITY;
        }
        hermitian_eig(&z).map_or(f64::INFINITY, |e| -e.values[0] / norm)
    };
    let d = space.len();
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    for k in 0..d {
        for sign in [1.0, -1.0] {
            let mut c = vec![0.0; d];
            c[k] = sign;
            candidates.push(c);
        }
    }
    let x0 = candidates
        .into_iter()
        .min_by(|a, b| score(a).total_cmp(&score(b)))
        .expect("non-empty");
    let opts = NelderMeadOptions {
        max_iterations: 500,
        initial_step: 0.3,
        x_tolerance: 1e-10,
        f_target: f64::NEG_INFINITY,
    };
    let best = nelder_mead(score, &x0, opts);
    let z = combine(&best.x);
    if -best.value > 1e-9 {
        let t = z.trace().re;
        Some(z.scale_real(z.rows() as f64 / t))
    } else {
        None
    }
}

/// Outcome of [`block_obstruction`].
#[derive(Debug, Clone, Serialize)]
pub struct BlockObstruction {
    /// A positive-definite `ζ` solves both block equations.
    pub feasible: bool,
    /// Positive solution, normalized to `Tr ζ = m`.
    pub witness: Option<ComplexMatrix>,
    /// Least-squares residual: smallest singular value of the linear system
    /// over unit-Frobenius Hermitian `ζ`.
    pub residual: f64,
    /// Dimension of the Hermitian solution space (any signature).
    pub solution_dimension: usize,
    /// The off-diagonal coupling equation is also solvable by a positive
    /// `ζ`, so `ξ` may carry off-diagonal entries.
    pub coupling_allowed: bool,
    pub coupling_residual: f64,
}

/// Decides whether the block-diagonal Hamiltonian `h_a ⊕ h_b` admits a
/// metric `ξ ⊗ ζ`, reducing `η H = H† η` to linear equations on `ζ`:
/// `ζ h_a = h_a† ζ` and `ζ h_b = h_b† ζ`, plus `ζ h_b = h_a† ζ` when `ξ` has
/// off-diagonal entries.
pub fn block_obstruction(h_a: &ComplexMatrix, h_b: &ComplexMatrix) -> Result<BlockObstruction> {
    if !h_a.is_square() || h_a.shape() != h_b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "blocks {}x{} and {}x{} must be square and equal",
            h_a.rows(),
            h_a.cols(),
            h_b.rows(),
            h_b.cols()
        )));
    }
    let m = h_a.rows();
    let (a_dag, b_dag) = (h_a.adjoint(), h_b.adjoint());
    let (residual, null) = hermitian_null_space(&[(h_a, a_dag.clone()), (h_b, b_dag.clone())], m)?;
    let witness = positive_member(&null);
    let (coupling_residual, coupled) =
        hermitian_null_space(&[(h_a, a_dag.clone()), (h_b, b_dag), (h_b, a_dag)], m)?;
    let coupling_allowed = positive_member(&coupled).is_some();
    Ok(BlockObstruction {
        feasible: witness.is_some(),
        witness,
        residual,
        solution_dimension: null.len(),
        coupling_allowed,
        coupling_residual,
    })
}

/// Largest quasi-Hermiticity residual of `ζ` against the two blocks.
pub fn block_equation_residual(h_a: &ComplexMatrix, h_b: &ComplexMatrix, zeta: &ComplexMatrix) -> Result<f64> {
    Ok(quasi_hermiticity_residual(h_a, zeta)?.max(quasi_hermiticity_residual(h_b, zeta)?))
}

/// Sampled check that `O_ξ ⊗ O_ζ` is `η`-quasi-Hermitian for random
/// `ξ`- and `ζ`-quasi-Hermitian observables.
#[derive(Debug, Clone, Serialize)]
pub struct ObservableCheck {
    pub samples: usize,
    pub max_residual: f64,
    pub residuals: Vec<f64>,
}

pub fn tensor_observable_check(
    xi: &MetricOperator,
    zeta: &MetricOperator,
    eta: &MetricOperator,
    samples: usize,
    seed: u64,
) -> Result<ObservableCheck> {
    let (n, m) = (xi.dim(), zeta.dim());
    if eta.dim() != n * m {
        return Err(Error::DimensionMismatch(format!(
            "metric of dimension {} against factors {n} and {m}",
            eta.dim()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residuals = Vec::with_capacity(samples);
    for _ in 0..samples {
        let o_xi = quasi_hermitian_from(xi, &random_hermitian(n, &mut rng));
        let o_zeta = quasi_hermitian_from(zeta, &random_hermitian(m, &mut rng));
        residuals.push(verify_quasi_hermitian(&kron(&o_xi, &o_zeta), eta)?);
    }
    Ok(ObservableCheck {
        samples,
        max_residual: residuals.iter().copied().fold(0.0, f64::max),
        residuals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::matcore::random::random_positive;

    fn h_b() -> ComplexMatrix {
        let s3 = 3f64.sqrt();
        ComplexMatrix::from_rows(&[
            vec![c64(s3 / 2.0, 0.5), c64(1.0, 0.0)],
            vec![c64(1.0, 0.0), c64(s3 / 2.0, -0.5)],
        ])
    }

    fn zeta_witness() -> ComplexMatrix {
        let s2 = 2f64.sqrt();
        ComplexMatrix::from_rows(&[
            vec![c64(2.0, 0.0), c64(-s2, -1.0)],
            vec![c64(-s2, 1.0), c64(2.0, 0.0)],
        ])
    }

    fn coupled() -> ComplexMatrix {
        let a = ComplexMatrix::identity(2);
        let mut h = &(&kron(&a, &ComplexMatrix::identity(2)) + &kron(&ComplexMatrix::identity(2), &h_b()))
            - &ComplexMatrix::identity(4);
        for (i, j) in [(0, 2), (1, 3), (2, 0), (3, 1)] {
            h[(i, j)] = c64(0.5, 0.0);
        }
        h
    }

    fn block_sum() -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&[1.0, 2.0]).direct_sum(&h_b())
    }

    /// All assignments of four values to a 2×2 grid with a vanishing
    /// multiplicative minor.
    fn brute_force_grid(v: &[f64]) -> bool {
        let idx = [0usize, 1, 2, 3];
        let mut perms = Vec::new();
        permute(&mut idx.to_vec(), 0, &mut perms);
        perms.iter().any(|p| {
            let g = |k: usize| v[p[k]];
            ((g(0) * g(3)) - (g(1) * g(2))).abs() <= 1e-9 * (g(0) * g(3)).abs()
        })
    }

    fn permute(a: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
        if k == a.len() {
            out.push(a.clone());
            return;
        }
        for i in k..a.len() {
            a.swap(k, i);
            permute(a, k + 1, out);
            a.swap(k, i);
        }
    }

    #[test]
    fn rearrange_sends_kron_to_rank_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xi = random_positive(2, 0.1, &mut rng);
        let zeta = random_positive(3, 0.1, &mut rng);
        let r = rearrange(&kron(&xi, &zeta), 2, 3).unwrap();
        assert_eq!(r.shape(), (4, 9));
        let s = svd(&r).unwrap().singular_values;
        assert!(s[1] < 1e-12 * s[0]);
        assert!((r.frobenius_norm() - kron(&xi, &zeta).frobenius_norm()).abs() < 1e-12);
    }

    #[test]
    fn rearrange_identity() {
        let r = rearrange(&ComplexMatrix::identity(4), 2, 2).unwrap();
        let v = [1.0, 0.0, 0.0, 1.0];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(r[(i, j)], c64(v[i] * v[j], 0.0));
            }
        }
    }

    #[test]
    fn rearrange_of_non_product_diagonal() {
        // Nonzero entries of the rearrangement form [[1, 2], [3, 5]].
        let r = rearrange(&ComplexMatrix::from_real_diag(&[1.0, 2.0, 3.0, 5.0]), 2, 2).unwrap();
        let s = svd(&r).unwrap().singular_values;
        let fro2 = 1.0 + 4.0 + 9.0 + 25.0;
        let det: f64 = 1.0 * 5.0 - 2.0 * 3.0;
        let s1 = ((fro2 + (fro2 * fro2 - 4.0 * det * det).sqrt()) / 2.0).sqrt();
        assert!((s[1] - det.abs() / s1).abs() < 1e-12);
        assert!(s[1] > 0.0);
    }

    #[test]
    fn rearrange_rejects_bad_split() {
        assert!(matches!(
            rearrange(&ComplexMatrix::identity(4), 3, 2),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn nearest_kron_recovers_diagonal_factors_in_trace_gauge() {
        let eta = kron(
            &ComplexMatrix::from_real_diag(&[1.0, 2.0]),
            &ComplexMatrix::from_real_diag(&[1.0, 3.0]),
        );
        let f = nearest_kron(&eta, 2, 2).unwrap();
        assert!(f.residual < 1e-12);
        assert!((f.gauge_trace() - 2.0).abs() < 1e-12);
        let xi = ComplexMatrix::from_real_diag(&[2.0 / 3.0, 4.0 / 3.0]);
        let zeta = ComplexMatrix::from_real_diag(&[1.5, 4.5]);
        assert!(f.xi.distance(&xi) < 1e-12);
        assert!(f.zeta.distance(&zeta) < 1e-12);
    }

    #[test]
    fn nearest_kron_of_identity() {
        let f = nearest_kron(&ComplexMatrix::identity(4), 2, 2).unwrap();
        assert!(f.residual < 1e-15);
        assert!(f.xi.distance(&ComplexMatrix::identity(2)) < 1e-14);
        assert!(f.zeta.distance(&ComplexMatrix::identity(2)) < 1e-14);
    }

    #[test]
    fn nearest_kron_residual_of_perturbed_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xi = random_positive(2, 0.5, &mut rng);
        let zeta = random_positive(2, 0.5, &mut rng);
        let e = random_positive(4, 0.1, &mut rng);
        let eta = &kron(&xi, &zeta) + &e.scale_real(0.1);
        let r = rearrange(&eta, 2, 2).unwrap();
        let gram = hermitian_eig(&(&r.adjoint() * &r)).unwrap();
        let mut sq: Vec<f64> = gram.values.iter().map(|v| v.max(0.0)).collect();
        sq.sort_by(|a, b| b.total_cmp(a));
        let oracle = sq[1..].iter().sum::<f64>().sqrt() / eta.frobenius_norm();
        let f = kron_decompose(&eta, 2, 2).unwrap();
        assert!(f.residual > 1e-3);
        assert!(f.residual >= sq[1].sqrt() / eta.frobenius_norm() - 1e-12);
        assert!((f.residual - oracle).abs() < 1e-9);
    }

    #[test]
    fn nearest_kron_rejects_indefinite_input() {
        let eta = ComplexMatrix::from_real_diag(&[1.0, -2.0, 3.0, 5.0]);
        assert!(matches!(
            nearest_kron(&eta, 2, 2),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn indefinite_factors_are_reported() {
        // Positive, but the leading Kronecker term of the rearrangement is
        // dominated by the off-diagonal block.
        let mut eta = ComplexMatrix::identity(4).scale_real(1.0);
        for (i, j) in [(0, 3), (3, 0)] {
            eta[(i, j)] = c64(0.9, 0.0);
        }
        for (i, j) in [(1, 2), (2, 1)] {
            eta[(i, j)] = c64(0.9, 0.0);
        }
        let f = kron_decompose(&eta, 2, 2).unwrap();
        if !f.positive {
            assert!(matches!(nearest_kron(&eta, 2, 2), Err(Error::FactorsIndefinite { .. })));
        }
    }

    #[test]
    fn spectrum_test_examples() {
        assert!(spectrum_ratio_test(&[1.0, 2.0, 3.0, 6.0], 2, 2).unwrap());
        assert!(spectrum_ratio_test(&[6.0, 3.0, 2.0, 1.0], 2, 2).unwrap());
        assert!(!spectrum_ratio_test(&[1.0, 2.0, 3.0, 5.0], 2, 2).unwrap());
        assert!(!brute_force_grid(&[1.0, 2.0, 3.0, 5.0]));
        assert!(spectrum_ratio_test(&[1.0, 1.0, 1.0, 1.0], 2, 2).unwrap());
    }

    #[test]
    fn spectrum_test_agrees_with_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 0..300 {
            let v: Vec<f64> = if k % 2 == 0 {
                let (a, b, c, d) = (
                    rng.gen_range(1..4) as f64,
                    rng.gen_range(1..4) as f64,
                    rng.gen_range(1..4) as f64,
                    rng.gen_range(1..4) as f64,
                );
                vec![a * c, a * d, b * c, b * d]
            } else {
                (0..4).map(|_| rng.gen_range(1..10) as f64).collect()
            };
            assert_eq!(spectrum_ratio_test(&v, 2, 2).unwrap(), brute_force_grid(&v), "{v:?}");
        }
    }

    #[test]
    fn spectrum_test_on_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for (n, m) in [(2, 3), (3, 2), (2, 4), (4, 4), (3, 3)] {
            let xi: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..5.0)).collect();
            let zeta: Vec<f64> = (0..m).map(|_| rng.gen_range(0.1..5.0)).collect();
            let mut v: Vec<f64> = xi.iter().flat_map(|a| zeta.iter().map(move |b| a * b)).collect();
            assert!(spectrum_ratio_test(&v, n, m).unwrap());
            v[0] *= 1.37;
            assert!(!spectrum_ratio_test(&v, n, m).unwrap());
        }
    }

    #[test]
    fn spectrum_test_errors() {
        assert!(matches!(
            spectrum_ratio_test(&[1.0; 18], 3, 6),
            Err(Error::TooLarge { .. })
        ));
        assert!(spectrum_ratio_test(&[1.0, 2.0], 2, 2).is_err());
        assert!(spectrum_ratio_test(&[1.0, 0.0, 2.0, 3.0], 2, 2).is_err());
    }

    #[test]
    fn search_hermitian_uses_identity() {
        let h = ComplexMatrix::from_real_diag(&[1.0, -1.0, -1.0, 1.0]);
        let report = search_separable_metric(&h, 2, 2, 4, 0).unwrap();
        assert!(report.found && report.hermitian);
        assert_eq!(report.best_residual, 0.0);
    }

    #[test]
    fn search_finds_metric_for_coupled_pt_hamiltonian() {
        let report = search_separable_metric(&coupled(), 2, 2, 8, 7).unwrap();
        assert!(report.found, "{}", report.best_residual);
        let f = report.factorization.unwrap();
        let eta = kron(&f.xi, &f.zeta);
        assert!(quasi_hermiticity_residual(&coupled(), &eta).unwrap() < 1e-8);
    }

    #[test]
    fn search_is_deterministic() {
        let opts = SearchOptions {
            starts: 4,
            max_iterations: 300,
            ..SearchOptions::default()
        };
        let a = search_separable_metric_with(&block_sum(), 2, 2, 9, opts, Tolerance::default()).unwrap();
        let par = SearchOptions { parallel: true, ..opts };
        let b = search_separable_metric_with(&block_sum(), 2, 2, 9, par, Tolerance::default()).unwrap();
        assert_eq!(a.start_residuals, b.start_residuals);
        assert_eq!(a.weights, b.weights);
        assert_eq!(a.best_residual, b.best_residual);
    }

    #[test]
    fn block_obstruction_examples() {
        let diag = ComplexMatrix::from_real_diag(&[1.0, 2.0]);
        let r = block_obstruction(&diag, &h_b()).unwrap();
        assert!(!r.feasible);
        assert!(r.residual > 1e-6);
        assert_eq!(r.solution_dimension, 0);

        let r = block_obstruction(&ComplexMatrix::identity(2), &h_b()).unwrap();
        assert!(r.feasible);
        let w = r.witness.unwrap();
        assert!(quasi_hermiticity_residual(&h_b(), &w).unwrap() < 1e-10);
        assert!((w.trace().re - 2.0).abs() < 1e-12);
        assert_eq!(r.solution_dimension, 2);
        assert!(block_equation_residual(&ComplexMatrix::identity(2), &h_b(), &zeta_witness()).unwrap() < 1e-12);

        let s3 = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        let r = block_obstruction(&s3, &s3).unwrap();
        assert!(r.feasible && r.coupling_allowed);
        assert!(block_equation_residual(&s3, &s3, &ComplexMatrix::identity(2)).unwrap() < 1e-15);
    }

    #[test]
    fn block_obstruction_shape_errors() {
        assert!(block_obstruction(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3)).is_err());
    }

    #[test]
    fn observable_check_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let xi = MetricOperator::new(random_positive(2, 0.2, &mut rng)).unwrap();
        let zeta = MetricOperator::new(zeta_witness()).unwrap();
        let eta = xi.kron(&zeta);
        assert!(tensor_observable_check(&xi, &zeta, &eta, 50, 1).unwrap().max_residual < 1e-9);

        let id2 = MetricOperator::identity(2);
        let r = tensor_observable_check(&id2, &zeta, &MetricOperator::identity(4), 50, 1).unwrap();
        assert!(r.residuals.iter().any(|x| *x > 0.01));

        let r = tensor_observable_check(&id2, &zeta, &eta, 0, 1).unwrap();
        assert!(r.residuals.is_empty() && r.max_residual == 0.0);
    }
}
