//! Generalized density matrices and their dynamics.
//!
//! A state `ρ` described with metric `η` becomes `ρ̃ = ρη / Tr(ρη)`, which
//! evolves by similarity `ρ̃(t) = U ρ̃ U⁻¹` with `U = e^{−iHt}`. Expectations,
//! entropies and purities are read off `ρ̃` directly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{eig_with, eigenvalues, hermitian_eig, kron, svd, Complex64, ComplexMatrix, Spectrum, Tolerance};
use crate::metric::{canonical_metric, require_quasi_hermitian, BiorthonormalSystem, MetricOperator};
use crate::tensor::{kron_decompose, SEPARABILITY_THRESHOLD};

/// Entropy eigenvalues within this distance of `[0, 1]` are clipped.
pub const CLIP_BAND: f64 = 1e-12;
/// Entropy eigenvalues farther than this from `[0, 1]`, or with a larger
/// imaginary part, are rejected.
pub const SPECTRUM_LIMIT: f64 = 1e-8;
/// Singular values above this count towards the numerical rank.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// `ρ̃` together with the metric it is described in.
#[derive(Debug, Clone, Serialize)]
pub struct GeneralizedDensity {
    matrix: ComplexMatrix,
    #[serde(skip)]
    metric: MetricOperator,
    source: Option<ComplexMatrix>,
}

impl GeneralizedDensity {
    /// Wraps a matrix without validation; used for reduced states whose
    /// invariants depend on the metric's separability.
    pub fn from_parts(matrix: ComplexMatrix, metric: MetricOperator, source: Option<ComplexMatrix>) -> Self {
        Self { matrix, metric, source }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn metric(&self) -> &MetricOperator {
        &self.metric
    }

    /// Fiducial density `ρ` this state was built from, if known.
    pub fn source(&self) -> Option<&ComplexMatrix> {
        self.source.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }
}

/// Spectral propagator of a diagonalizable Hamiltonian.
#[derive(Debug, Clone)]
pub struct Propagator {
    spectrum: Spectrum,
}

impl Propagator {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(h, Tolerance::default())
    }

    pub fn with_tolerance(h: &ComplexMatrix, tol: Tolerance) -> Result<Self> {
        Ok(Self {
            spectrum: eig_with(h, tol)?,
        })
    }

    /// `e^{−iHt}`.
    pub fn forward(&self, t: f64) -> ComplexMatrix {
        self.spectrum.apply_function(|e| (Complex64::new(0.0, -t) * e).exp())
    }

    /// `e^{+iHt}`, the inverse of [`forward`](Self::forward).
    pub fn backward(&self, t: f64) -> ComplexMatrix {
        self.spectrum.apply_function(|e| (Complex64::new(0.0, t) * e).exp())
    }
}

/// `U(t) = Σ_n e^{−iE_n t} |ψ_n⟩⟨φ_n|`.
pub fn evolution_operator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(Propagator::new(h)?.forward(t))
}

fn check_density(rho: &ComplexMatrix, tol: Tolerance) -> Result<()> {
    if !rho.is_square() {
        return Err(Error::InvalidDensity(format!("{}x{} is not square", rho.rows(), rho.cols())));
    }
    let defect = rho.hermiticity_defect();
    if defect > tol.relative {
        return Err(Error::InvalidDensity(format!("not Hermitian (defect {defect:e})")));
    }
    let trace = rho.trace().re;
    if (trace - 1.0).abs() > tol.relative {
        return Err(Error::InvalidDensity(format!("trace {trace} differs from 1")));
    }
    let min = hermitian_eig(rho)?.values[0];
    if min < -tol.relative {
        return Err(Error::InvalidDensity(format!("negative eigenvalue {min:e}")));
    }
    Ok(())
}

/// `ρ̃ = ρη / Tr(ρη)` for a fiducial density `ρ`.
pub fn generalized_density(rho: &ComplexMatrix, eta: &MetricOperator) -> Result<GeneralizedDensity> {
    generalized_density_with(rho, eta, Tolerance::default())
}

pub fn generalized_density_with(
    rho: &ComplexMatrix,
    eta: &MetricOperator,
    tol: Tolerance,
) -> Result<GeneralizedDensity> {
    check_density(rho, tol)?;
    if rho.rows() != eta.dim() {
        return Err(Error::DimensionMismatch(format!(
            "density of dimension {} with metric of dimension {}",
            rho.rows(),
            eta.dim()
        )));
    }
    let product = rho * eta.matrix();
    let overlap = product.trace().re;
    if overlap <= tol.absolute {
        return Err(Error::ZeroOverlap { overlap });
    }
    Ok(GeneralizedDensity {
        matrix: product.scale_real(1.0 / overlap),
        metric: eta.clone(),
        source: Some(rho.clone()),
    })
}

/// `|ψ⟩⟨ψ|η / ⟨ψ|η|ψ⟩` from an unnormalized state vector.
pub fn pure_state(psi: &[Complex64], eta: &MetricOperator) -> Result<GeneralizedDensity> {
    let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
    if norm2 == 0.0 || !norm2.is_finite() {
        return Err(Error::InvalidDensity("zero state vector".into()));
    }
    let n = psi.len();
    let rho = ComplexMatrix::from_fn(n, n, |i, j| psi[i] * psi[j].conj() / norm2);
    generalized_density(&rho, eta)
}

/// `Tr(ρ̃ H)`; `h` must be quasi-Hermitian for the state's metric.
pub fn expectation(state: &GeneralizedDensity, h: &ComplexMatrix) -> Result<f64> {
    expectation_with(state, h, Tolerance::default())
}

pub fn expectation_with(state: &GeneralizedDensity, h: &ComplexMatrix, tol: Tolerance) -> Result<f64> {
    require_quasi_hermitian(h, &state.metric, tol)?;
    let value = (&state.matrix * h).trace();
    if value.im.abs() > tol.relative * value.re.abs().max(1.0) {
        return Err(Error::NonRealExpectation { imag: value.im });
    }
    Ok(value.re)
}

/// Outcome weights `p(E_n) = Tr(ρ̃ |ψ_n⟩⟨φ_n|)` over the eigenbasis of `sys`.
pub fn energy_distribution(state: &GeneralizedDensity, sys: &BiorthonormalSystem) -> Result<Vec<f64>> {
    if sys.dim() != state.dim() {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {} with a {}-level eigenbasis",
            state.dim(),
            sys.dim()
        )));
    }
    (0..sys.dim())
        .map(|n| {
            let p = (&state.matrix * &sys.projector(n)).trace();
            if p.im.abs() > 1e-9 {
                Err(Error::NonRealExpectation { imag: p.im })
            } else {
                Ok(p.re)
            }
        })
        .collect()
}

/// `ρ̃(t) = e^{−iHt} ρ̃ e^{+iHt}`; the fiducial source follows
/// `U ρ U† / Tr(U ρ U†)`.
pub fn evolve(state: &GeneralizedDensity, h: &ComplexMatrix, t: f64) -> Result<GeneralizedDensity> {
    evolve_with(state, h, t, Tolerance::default())
}

pub fn evolve_with(state: &GeneralizedDensity, h: &ComplexMatrix, t: f64, tol: Tolerance) -> Result<GeneralizedDensity> {
    require_quasi_hermitian(h, &state.metric, tol)?;
    let propagator = Propagator::with_tolerance(h, tol)?;
    Ok(evolve_by(state, &propagator, t))
}

/// [`evolve`] with a precomputed propagator and no metric check.
pub fn evolve_by(state: &GeneralizedDensity, propagator: &Propagator, t: f64) -> GeneralizedDensity {
    let u = propagator.forward(t);
    let u_inv = propagator.backward(t);
    GeneralizedDensity {
        matrix: &(&u * &state.matrix) * &u_inv,
        metric: state.metric.clone(),
        source: state.source.as_ref().map(|rho| {
            let moved = (&(&u * rho) * &u.adjoint()).hermitian_part();
            let trace = moved.trace().re;
            moved.scale_real(1.0 / trace)
        }),
    }
}

/// Tensor factor of a bipartite space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subsystem {
    A,
    B,
}

/// State of a compound system on `C^n ⊗ C^m` with optional component
/// eigenbases and metrics.
#[derive(Debug, Clone)]
pub struct BipartiteState {
    pub state: GeneralizedDensity,
    pub dims: (usize, usize),
    pub sys_a: Option<BiorthonormalSystem>,
    pub sys_b: Option<BiorthonormalSystem>,
    pub metric_a: Option<MetricOperator>,
    pub metric_b: Option<MetricOperator>,
}

impl BipartiteState {
    pub fn new(state: GeneralizedDensity, n: usize, m: usize) -> Result<Self> {
        if n * m != state.dim() || n == 0 || m == 0 {
            return Err(Error::DimensionMismatch(format!(
                "state of dimension {} cannot be split as {n} ⊗ {m}",
                state.dim()
            )));
        }
        Ok(Self {
            state,
            dims: (n, m),
            sys_a: None,
            sys_b: None,
            metric_a: None,
            metric_b: None,
        })
    }

    pub fn with_systems(mut self, sys_a: BiorthonormalSystem, sys_b: BiorthonormalSystem) -> Result<Self> {
        if sys_a.dim() != self.dims.0 || sys_b.dim() != self.dims.1 {
            return Err(Error::DimensionMismatch(format!(
                "component systems of dimension {} and {} for a {} ⊗ {} state",
                sys_a.dim(),
                sys_b.dim(),
                self.dims.0,
                self.dims.1
            )));
        }
        self.sys_a = Some(sys_a);
        self.sys_b = Some(sys_b);
        Ok(self)
    }

    pub fn with_metrics(mut self, metric_a: MetricOperator, metric_b: MetricOperator) -> Result<Self> {
        if metric_a.dim() != self.dims.0 || metric_b.dim() != self.dims.1 {
            return Err(Error::DimensionMismatch("component metrics do not match the split".into()));
        }
        self.metric_a = Some(metric_a);
        self.metric_b = Some(metric_b);
        Ok(self)
    }

    /// Same split and components, new compound state.
    pub fn replace_state(&self, state: GeneralizedDensity) -> Self {
        Self { state, ..self.clone() }
    }
}

/// Reduced state of one factor.
#[derive(Debug, Clone, Serialize)]
pub struct ReducedState {
    pub state: GeneralizedDensity,
    pub subsystem: Subsystem,
    /// The compound metric factors as `ξ ⊗ ζ` and the reduced state is
    /// described in the matching component metric. When false the reduced
    /// state is a formal contraction with no component-system reading.
    pub interpretable: bool,
}

fn standard_basis(n: usize) -> (ComplexMatrix, ComplexMatrix) {
    (ComplexMatrix::identity(n), ComplexMatrix::identity(n))
}

fn bases(sys: Option<&BiorthonormalSystem>, n: usize) -> (ComplexMatrix, ComplexMatrix) {
    sys.map_or_else(
        || standard_basis(n),
        |s| (s.right_basis().clone(), s.left_basis().clone()),
    )
}

/// Contraction of the `which` factor away from `a`:
/// `Σ_j ⟨φ_j| a |ψ_j⟩` over the traced factor's biorthonormal pair.
fn contract(a: &ComplexMatrix, n: usize, m: usize, which: Subsystem, right: &ComplexMatrix, left: &ComplexMatrix) -> ComplexMatrix {
    match which {
        Subsystem::B => ComplexMatrix::from_fn(n, n, |i, k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..m {
                for l in 0..m {
                    let phi = left[(l, j)].conj();
                    if phi == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for lp in 0..m {
                        acc += phi * a[(i * m + l, k * m + lp)] * right[(lp, j)];
                    }
                }
            }
            acc
        }),
        Subsystem::A => ComplexMatrix::from_fn(m, m, |l, lp| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..n {
                for i in 0..n {
                    let phi = left[(i, j)].conj();
                    if phi == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for k in 0..n {
                        acc += phi * a[(i * m + l, k * m + lp)] * right[(k, j)];
                    }
                }
            }
            acc
        }),
    }
}

/// Ordinary partial trace of an `(n·m)`-dimensional operator, keeping the
/// factor other than `traced`.
pub fn fiducial_partial_trace(a: &ComplexMatrix, n: usize, m: usize, traced: Subsystem) -> Result<ComplexMatrix> {
    if a.shape() != (n * m, n * m) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator cannot be split as {n} ⊗ {m}",
            a.rows(),
            a.cols()
        )));
    }
    let k = if traced == Subsystem::A { n } else { m };
    let (r, l) = standard_basis(k);
    Ok(contract(a, n, m, traced, &r, &l))
}

fn component_metrics(bip: &BipartiteState) -> Option<(MetricOperator, MetricOperator)> {
    let eta = bip.state.metric.matrix();
    let norm = eta.frobenius_norm();
    let (n, m) = bip.dims;
    if let (Some(a), Some(b)) = (&bip.metric_a, &bip.metric_b) {
        if kron(a.matrix(), b.matrix()).distance(eta) <= SEPARABILITY_THRESHOLD * norm {
            return Some((a.clone(), b.clone()));
        }
    }
    let f = kron_decompose(eta, n, m).ok()?;
    if f.positive && f.residual <= SEPARABILITY_THRESHOLD {
        f.metrics().ok()
    } else {
        None
    }
}

/// Reduced state of the factor kept after tracing out the other one.
///
/// `keep = A` traces over the `B` factor with its biorthonormal pair
/// `{Ψ_j, Φ_j}` and describes the result in `ξ`; `keep = B` likewise in `ζ`.
/// When the compound metric is not a product the component canonical metric
/// (or the identity) is attached and the result is flagged
/// non-interpretable.
pub fn partial_trace(bip: &BipartiteState, keep: Subsystem) -> Result<ReducedState> {
    let (n, m) = bip.dims;
    if bip.state.dim() != n * m {
        return Err(Error::DimensionMismatch("state does not match its split".into()));
    }
    let (traced, kept_dim, traced_sys, kept_sys) = match keep {
        Subsystem::A => (Subsystem::B, n, bip.sys_b.as_ref(), bip.sys_a.as_ref()),
        Subsystem::B => (Subsystem::A, m, bip.sys_a.as_ref(), bip.sys_b.as_ref()),
    };
    let (right, left) = bases(traced_sys, if traced == Subsystem::A { n } else { m });
    let matrix = contract(bip.state.matrix(), n, m, traced, &right, &left);
    let source = bip
        .state
        .source()
        .map(|rho| contract(rho, n, m, traced, &ComplexMatrix::identity(right.rows()), &ComplexMatrix::identity(right.rows())));

    let (metric, interpretable) = match component_metrics(bip) {
        Some((a, b)) => (if keep == Subsystem::A { a } else { b }, true),
        None => {
            let fallback = kept_sys
                .and_then(|s| canonical_metric(s).ok())
                .unwrap_or_else(|| MetricOperator::identity(kept_dim));
            (fallback, false)
        }
    };
    Ok(ReducedState {
        state: GeneralizedDensity::from_parts(matrix, metric, source),
        subsystem: keep,
        interpretable,
    })
}

fn checked_spectrum(state: &GeneralizedDensity) -> Result<Vec<f64>> {
    eigenvalues(state.matrix())?
        .into_iter()
        .map(|z| {
            if z.im.abs() > SPECTRUM_LIMIT || z.re < -SPECTRUM_LIMIT || z.re > 1.0 + SPECTRUM_LIMIT {
                Err(Error::SpectrumOutOfRange { re: z.re, im: z.im })
            } else {
                Ok(z.re.clamp(0.0, 1.0))
            }
        })
        .collect()
}

/// Real spectrum of `ρ̃`, clipped to `[0, 1]`.
pub fn state_spectrum(state: &GeneralizedDensity) -> Result<Vec<f64>> {
    checked_spectrum(state)
}

/// Von Neumann entropy `−Σ λ log λ` in nats over the eigenvalues of `ρ̃`.
pub fn entropy(state: &GeneralizedDensity) -> Result<f64> {
    let s: f64 = checked_spectrum(state)?
        .into_iter()
        .filter(|&l| l > CLIP_BAND)
        .map(|l| -l * l.ln())
        .sum();
    Ok(s.max(0.0))
}

/// `Tr(ρ̃²)`.
pub fn purity(state: &GeneralizedDensity) -> Result<f64> {
    let p = (state.matrix() * state.matrix()).trace();
    if p.im.abs() > SPECTRUM_LIMIT {
        return Err(Error::NonRealPurity { imag: p.im });
    }
    Ok(p.re)
}

/// Number of singular values above [`RANK_THRESHOLD`].
pub fn numerical_rank(a: &ComplexMatrix) -> Result<usize> {
    Ok(svd(a)?.singular_values.iter().filter(|&&s| s > RANK_THRESHOLD).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use crate::metric::{biorthonormalize, metric_family};
    use std::f64::consts::{FRAC_PI_4, LN_2, PI};

    fn h_b() -> ComplexMatrix {
        let s3 = 3f64.sqrt();
        ComplexMatrix::from_rows(&[
            vec![c64(s3 / 2.0, 0.5), c64(1.0, 0.0)],
            vec![c64(1.0, 0.0), c64(s3 / 2.0, -0.5)],
        ])
    }

    fn zeta() -> MetricOperator {
        let s2 = 2f64.sqrt();
        MetricOperator::new(ComplexMatrix::from_rows(&[
            vec![c64(2.0, 0.0), c64(-s2, -1.0)],
            vec![c64(-s2, 1.0), c64(2.0, 0.0)],
        ]))
        .unwrap()
    }

    fn two_qubit() -> ComplexMatrix {
        ComplexMatrix::from_real_diag(&[1.0, -1.0, -1.0, 1.0])
    }

    fn initial_product() -> ComplexMatrix {
        let a = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let b = ComplexMatrix::from_rows(&[vec![c64(0.5, 0.0), c64(0.0, -0.5)], vec![c64(0.0, 0.5), c64(0.5, 0.0)]]);
        kron(&a, &b)
    }

    fn plus_state() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]])
    }

    /// Classical fourth-order Runge–Kutta on `dρ̃/dt = −i[H, ρ̃]`.
    fn rk4(h: &ComplexMatrix, rho: &ComplexMatrix, t: f64, dt: f64) -> ComplexMatrix {
        let minus_i = c64(0.0, -1.0);
        let f = |r: &ComplexMatrix| r.commutator_with(h).scale(minus_i);
        let steps = (t / dt).round() as usize;
        let mut r = rho.clone();
        for _ in 0..steps {
            let k1 = f(&r);
            let k2 = f(&(&r + &k1.scale_real(dt / 2.0)));
            let k3 = f(&(&r + &k2.scale_real(dt / 2.0)));
            let k4 = f(&(&r + &k3.scale_real(dt)));
            let sum = &(&(&k1 + &k2.scale_real(2.0)) + &k3.scale_real(2.0)) + &k4;
            r = &r + &sum.scale_real(dt / 6.0);
        }
        r
    }

    trait Commutator {
        fn commutator_with(&self, h: &ComplexMatrix) -> ComplexMatrix;
    }

    impl Commutator for ComplexMatrix {
        fn commutator_with(&self, h: &ComplexMatrix) -> ComplexMatrix {
            &(h * self) - &(self * h)
        }
    }

    #[test]
    fn evolution_operator_of_diagonal_hamiltonian() {
        let t = 0.7;
        let u = evolution_operator(&two_qubit(), t).unwrap();
        let (e, f) = (c64(0.0, -t).exp(), c64(0.0, t).exp());
        let expected = ComplexMatrix::from_diag(&[e, f, f, e]);
        assert!(u.distance(&expected) < 1e-14);
        assert!(evolution_operator(&two_qubit(), 0.0).unwrap().distance(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn evolution_is_pseudo_unitary() {
        for t in [0.3, 1.0, 2.7] {
            let u = evolution_operator(&h_b(), t).unwrap();
            let lhs = &(&u.adjoint() * zeta().matrix()) * &u;
            assert!(lhs.distance(zeta().matrix()) < 1e-9);
            assert!((&u.adjoint() * &u).distance(&ComplexMatrix::identity(2)) > 1e-3);
        }
    }

    #[test]
    fn generalized_density_examples() {
        let rho = ComplexMatrix::identity(2).scale_real(0.5);
        let s = generalized_density(&rho, &MetricOperator::identity(2)).unwrap();
        assert!(s.matrix().distance(&rho) < 1e-15);
        let eta = MetricOperator::new(ComplexMatrix::from_real_diag(&[1.0, 3.0])).unwrap();
        let s = generalized_density(&rho, &eta).unwrap();
        assert!(s.matrix().distance(&ComplexMatrix::from_real_diag(&[0.25, 0.75])) < 1e-15);
    }

    #[test]
    fn pure_state_has_rank_one() {
        let psi = [c64(1.0, 0.0), c64(0.3, -0.2)];
        let s = pure_state(&psi, &zeta()).unwrap();
        let p = ComplexMatrix::from_fn(2, 2, |i, j| psi[i] * psi[j].conj());
        let num = &p * zeta().matrix();
        let expected = num.scale_real(1.0 / num.trace().re);
        assert!(s.matrix().distance(&expected) < 1e-14);
        assert_eq!(numerical_rank(s.matrix()).unwrap(), 1);
        assert!((purity(&s).unwrap() - 1.0).abs() < 1e-12);
        assert!(entropy(&s).unwrap().abs() < 1e-10);
    }

    #[test]
    fn invalid_densities() {
        let eta = MetricOperator::identity(2);
        let bad_trace = ComplexMatrix::identity(2);
        assert!(matches!(generalized_density(&bad_trace, &eta), Err(Error::InvalidDensity(_))));
        let negative = ComplexMatrix::from_real_diag(&[1.5, -0.5]);
        assert!(matches!(generalized_density(&negative, &eta), Err(Error::InvalidDensity(_))));
        assert!(pure_state(&[c64(0.0, 0.0); 2], &eta).is_err());
    }

    #[test]
    fn expectation_depends_on_metric() {
        let h = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        let s = generalized_density(&plus_state(), &MetricOperator::identity(2)).unwrap();
        assert!(expectation(&s, &h).unwrap().abs() < 1e-15);
        let eta = MetricOperator::new(ComplexMatrix::from_real_diag(&[1.0, 3.0])).unwrap();
        let s = generalized_density(&plus_state(), &eta).unwrap();
        assert!((expectation(&s, &h).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn expectation_rejects_foreign_metric() {
        let s = generalized_density(&plus_state(), &MetricOperator::identity(2)).unwrap();
        assert!(matches!(expectation(&s, &h_b()), Err(Error::NotQuasiHermitian { .. })));
    }

    #[test]
    fn eigenstate_expectation_and_distribution() {
        let sys = biorthonormalize(&h_b()).unwrap();
        let eta = metric_family(&sys, &[0.7, 2.0]).unwrap();
        for k in 0..2 {
            let s = pure_state(&sys.psi(k), &eta).unwrap();
            assert!((expectation(&s, &h_b()).unwrap() - sys.energies()[k]).abs() < 1e-12);
            let p = energy_distribution(&s, &sys).unwrap();
            assert!((p[k] - 1.0).abs() < 1e-12 && p[1 - k].abs() < 1e-12);
        }
    }

    #[test]
    fn evolution_matches_runge_kutta() {
        let sys = biorthonormalize(&h_b()).unwrap();
        let eta = metric_family(&sys, &[1.0, 2.5]).unwrap();
        let rho = ComplexMatrix::from_real_rows(&[&[0.7, 0.2], &[0.2, 0.3]]);
        let s = generalized_density(&rho, &eta).unwrap();
        let exact = evolve(&s, &h_b(), 1.0).unwrap();
        let oracle = rk4(&h_b(), s.matrix(), 1.0, 1e-3);
        assert!(exact.matrix().distance(&oracle) < 1e-8);
        assert!(evolve(&s, &h_b(), 0.0).unwrap().matrix().distance(s.matrix()) < 1e-14);
        let back = generalized_density(exact.source().unwrap(), &eta).unwrap();
        assert!(back.matrix().distance(exact.matrix()) < 1e-12);
    }

    #[test]
    fn reduced_states_of_two_qubit_evolution() {
        let s = generalized_density(&initial_product(), &MetricOperator::identity(4)).unwrap();
        for t in [0.0, 0.4, FRAC_PI_4, 1.3, PI] {
            let st = evolve(&s, &two_qubit(), t).unwrap();
            let bip = BipartiteState::new(st, 2, 2).unwrap();
            let a = partial_trace(&bip, Subsystem::A).unwrap();
            let c = (2.0 * t).cos();
            let expected = ComplexMatrix::from_real_rows(&[&[0.5, 0.5 * c], &[0.5 * c, 0.5]]);
            assert!(a.state.matrix().distance(&expected) < 1e-14);
            assert!(a.interpretable);
            let b = partial_trace(&bip, Subsystem::B).unwrap();
            let expected_b = ComplexMatrix::from_rows(&[
                vec![c64(0.5, 0.0), c64(0.0, -0.5 * c)],
                vec![c64(0.0, 0.5 * c), c64(0.5, 0.0)],
            ]);
            assert!(b.state.matrix().distance(&expected_b) < 1e-14);
            let p = 0.5 * (1.0 + c * c);
            assert!((purity(&a.state).unwrap() - p).abs() < 1e-14);
            let (s2, c2) = (t.sin().powi(2), t.cos().powi(2));
            let closed = [s2, c2].iter().filter(|x| **x > 0.0).map(|x| -x * x.ln()).sum::<f64>();
            assert!((entropy(&a.state).unwrap() - closed).abs() < 1e-10);
        }
    }

    #[test]
    fn bell_point_entropy() {
        let s = generalized_density(&initial_product(), &MetricOperator::identity(4)).unwrap();
        let st = evolve(&s, &two_qubit(), FRAC_PI_4).unwrap();
        let a = partial_trace(&BipartiteState::new(st, 2, 2).unwrap(), Subsystem::A).unwrap();
        assert!((entropy(&a.state).unwrap() - LN_2).abs() < 1e-12);
    }

    #[test]
    fn biorthonormal_partial_trace_uses_component_bases() {
        let sys = biorthonormalize(&h_b()).unwrap();
        let eta = MetricOperator::identity(2).kron(&zeta());
        let rho = kron(&plus_state(), &ComplexMatrix::identity(2).scale_real(0.5));
        let s = generalized_density(&rho, &eta).unwrap();
        let sys_a = biorthonormalize(&ComplexMatrix::from_real_diag(&[1.0, 2.0])).unwrap();
        let bip = BipartiteState::new(s.clone(), 2, 2)
            .unwrap()
            .with_systems(sys_a, sys)
            .unwrap()
            .with_metrics(MetricOperator::identity(2), zeta())
            .unwrap();
        let with_bases = partial_trace(&bip, Subsystem::A).unwrap();
        let plain = fiducial_partial_trace(s.matrix(), 2, 2, Subsystem::B).unwrap();
        assert!(with_bases.state.matrix().distance(&plain) < 1e-12);
        assert!(with_bases.interpretable);
        assert!((with_bases.state.trace() - c64(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn non_product_metric_is_flagged() {
        let mut m = ComplexMatrix::identity(4);
        m[(0, 3)] = c64(0.4, 0.0);
        m[(3, 0)] = c64(0.4, 0.0);
        let eta = MetricOperator::new(m).unwrap();
        let rho = ComplexMatrix::identity(4).scale_real(0.25);
        let s = generalized_density(&rho, &eta).unwrap();
        let r = partial_trace(&BipartiteState::new(s, 2, 2).unwrap(), Subsystem::B).unwrap();
        assert!(!r.interpretable);
    }

    #[test]
    fn entropy_of_mixed_and_out_of_range_states() {
        let mixed = generalized_density(&ComplexMatrix::identity(2).scale_real(0.5), &MetricOperator::identity(2)).unwrap();
        assert!((entropy(&mixed).unwrap() - LN_2).abs() < 1e-15);
        let bogus = GeneralizedDensity::from_parts(
            ComplexMatrix::from_real_diag(&[1.5, -0.5]),
            MetricOperator::identity(2),
            None,
        );
        assert!(matches!(entropy(&bogus), Err(Error::SpectrumOutOfRange { .. })));
        let rotation = GeneralizedDensity::from_parts(
            ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[-0.5, 0.5]]),
            MetricOperator::identity(2),
            None,
        );
        assert!(entropy(&rotation).is_err());
        let complex_purity = GeneralizedDensity::from_parts(
            ComplexMatrix::from_diag(&[c64(0.5, 0.1), c64(0.5, 0.1)]),
            MetricOperator::identity(2),
            None,
        );
        assert!(matches!(purity(&complex_purity), Err(Error::NonRealPurity { .. })));
    }

    #[test]
    fn bipartite_split_is_checked() {
        let s = generalized_density(&ComplexMatrix::identity(4).scale_real(0.25), &MetricOperator::identity(4)).unwrap();
        assert!(BipartiteState::new(s, 3, 2).is_err());
    }
}
