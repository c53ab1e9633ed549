//! `verify`, `factorize` and `search-separable`.

use std::path::Path;

use serde::Serialize;

use quasi_hermitian::matcore::hermitian_eig;
use quasi_hermitian::metric::{is_pt_symmetric_with, quasi_hermiticity_residual};
use quasi_hermitian::tensor::{
    kron_decompose_with, search_separable_metric_with, SearchOptions, SeparabilityReport, SEPARABILITY_THRESHOLD,
};
use quasi_hermitian::{ComplexMatrix, Error, Tolerance};

use crate::error::{CliError, CliResult};
use crate::scenario::read_matrix;

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub residual: f64,
    pub tolerance: f64,
    pub quasi_hermitian: bool,
    pub metric_hermitian: bool,
    pub metric_positive: bool,
    pub min_eigenvalue: f64,
    pub pt_symmetric: Option<bool>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.quasi_hermitian && self.metric_hermitian && self.metric_positive
    }
}

/// Checks `η H = H† η` and positivity of `η`; optionally PT symmetry of `H`
/// under the given parity.
pub fn verify(h: &ComplexMatrix, eta: &ComplexMatrix, parity: Option<&ComplexMatrix>, tol: Tolerance) -> CliResult<VerifyReport> {
    if !h.is_square() || h.shape() != eta.shape() {
        return Err(CliError::Validation(format!(
            "Hamiltonian {}x{} and metric {}x{} must be square and equal",
            h.rows(),
            h.cols(),
            eta.rows(),
            eta.cols()
        )));
    }
    let residual = quasi_hermiticity_residual(h, eta)?;
    let metric_hermitian = eta.hermiticity_defect() <= tol.relative;
    let min_eigenvalue = hermitian_eig(eta)?.values[0];
    let metric_positive = min_eigenvalue > tol.absolute * eta.frobenius_norm().max(1.0);
    let pt_symmetric = parity.map(|p| is_pt_symmetric_with(h, p, tol)).transpose()?;
    Ok(VerifyReport {
        residual,
        tolerance: tol.relative,
        quasi_hermitian: residual <= tol.relative,
        metric_hermitian,
        metric_positive,
        min_eigenvalue,
        pt_symmetric,
    })
}

pub fn verify_files(h: &Path, eta: &Path, parity: Option<&Path>, tol: Tolerance) -> CliResult<VerifyReport> {
    let p = parity.map(read_matrix).transpose()?;
    verify(&read_matrix(h)?, &read_matrix(eta)?, p.as_ref(), tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct FactorizeReport {
    pub residual: f64,
    pub xi_positive: bool,
    pub zeta_positive: bool,
    pub separable: bool,
    pub verdict: &'static str,
    #[serde(skip)]
    pub xi: ComplexMatrix,
    #[serde(skip)]
    pub zeta: ComplexMatrix,
}

fn is_positive(a: &ComplexMatrix, tol: Tolerance) -> bool {
    hermitian_eig(a).is_ok_and(|e| e.values[0] > tol.absolute * a.frobenius_norm().max(1.0))
}

/// Nearest `ξ ⊗ ζ` to a positive-definite `η`.
pub fn factorize(eta: &ComplexMatrix, n: usize, m: usize, tol: Tolerance) -> CliResult<FactorizeReport> {
    if eta.shape() != (n * m, n * m) {
        return Err(CliError::Validation(format!(
            "{}x{} metric cannot be split as {n} ⊗ {m}",
            eta.rows(),
            eta.cols()
        )));
    }
    if eta.hermiticity_defect() > tol.relative {
        return Err(CliError::Validation("metric is not Hermitian".into()));
    }
    let min = hermitian_eig(eta)?.values[0];
    if min <= tol.absolute * eta.frobenius_norm().max(1.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min }.into());
    }
    let f = kron_decompose_with(eta, n, m, tol)?;
    let xi_positive = is_positive(&f.xi, tol);
    let zeta_positive = is_positive(&f.zeta, tol);
    let separable = xi_positive && zeta_positive && f.residual < SEPARABILITY_THRESHOLD;
    Ok(FactorizeReport {
        residual: f.residual,
        xi_positive,
        zeta_positive,
        separable,
        verdict: if separable { "separable" } else { "not separable" },
        xi: f.xi,
        zeta: f.zeta,
    })
}

pub fn search(h: &ComplexMatrix, n: usize, m: usize, starts: usize, seed: u64, parallel: bool, tol: Tolerance) -> CliResult<SeparabilityReport> {
    if starts == 0 {
        return Err(CliError::Config("starts must be at least 1".into()));
    }
    let opts = SearchOptions {
        starts,
        parallel,
        ..SearchOptions::default()
    };
    Ok(search_separable_metric_with(h, n, m, seed, opts, tol)?)
}

pub fn to_json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}
