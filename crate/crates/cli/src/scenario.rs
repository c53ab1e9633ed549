//! Scenario assembly, time sweeps and the run report.

use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use quasi_hermitian::dynamics::{
    entropy, evolve_by, expectation_with, generalized_density_with, partial_trace, purity, BipartiteState,
    GeneralizedDensity, Propagator, ReducedState, Subsystem,
};
use quasi_hermitian::metric::{
    biorthonormalize_with, canonical_metric, is_pt_symmetric_with, metric_family, verify_quasi_hermitian,
    BiorthonormalSystem, MetricOperator,
};
use quasi_hermitian::tensor::{
    block_obstruction, kron_decompose_with, search_separable_metric_with, BlockObstruction, SearchOptions,
    SeparabilityReport, SEPARABILITY_THRESHOLD,
};
use quasi_hermitian::{ComplexMatrix, Tolerance};

use crate::config::{ScenarioConfig, ScenarioName, TimeGrid};
use crate::error::{CliError, CliResult};
use crate::systems;

/// Slack allowed on the purity and entropy bounds of every row.
pub const ROW_TOLERANCE: f64 = 1e-9;

/// Fully assembled system ready to evolve.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: ScenarioName,
    pub hamiltonian: ComplexMatrix,
    pub metric: MetricOperator,
    pub density: ComplexMatrix,
    pub dims: (usize, usize),
    pub sys_a: Option<BiorthonormalSystem>,
    pub sys_b: Option<BiorthonormalSystem>,
    pub metric_a: Option<MetricOperator>,
    pub metric_b: Option<MetricOperator>,
    pub parity: Option<ComplexMatrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub entropy_a: f64,
    pub entropy_b: f64,
    pub purity_a: f64,
    pub purity_b: f64,
    pub expect_h: f64,
}

pub fn read_matrix(path: &Path) -> CliResult<ComplexMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    ComplexMatrix::from_json_str(&text).map_err(|e| CliError::io(path, e))
}

fn two_weights(name: &str, w: &Option<Vec<f64>>) -> CliResult<Option<[f64; 2]>> {
    match w {
        None => Ok(None),
        Some(v) if v.len() == 2 => Ok(Some([v[0], v[1]])),
        Some(v) => Err(CliError::Config(format!("{name} needs 2 values, got {}", v.len()))),
    }
}

fn diagonal_metric(w: &[f64]) -> CliResult<MetricOperator> {
    Ok(MetricOperator::new(ComplexMatrix::from_real_diag(w))?.with_weights(w.to_vec()))
}

/// Builds `H`, `η` and `ρ(0)` for a validated configuration.
pub fn build_scenario(config: &ScenarioConfig, tol: Tolerance) -> CliResult<Scenario> {
    config.validate()?;
    let scenario = match config.scenario {
        ScenarioName::HermitianTwoQubit => {
            let wa = two_weights("weights_a", &config.weights_a)?.unwrap_or([1.0, 1.0]);
            let wb = two_weights("weights_b", &config.weights_b)?.unwrap_or([1.0, 1.0]);
            let (xi, zeta) = (diagonal_metric(&wa)?, diagonal_metric(&wb)?);
            Scenario {
                name: config.scenario,
                hamiltonian: systems::two_qubit_hamiltonian(),
                metric: xi.kron(&zeta),
                density: systems::initial_state(),
                dims: (2, 2),
                sys_a: Some(biorthonormalize_with(&systems::sigma3(), tol)?),
                sys_b: Some(biorthonormalize_with(&systems::sigma3(), tol)?),
                metric_a: Some(xi),
                metric_b: Some(zeta),
                parity: Some(systems::parity()),
            }
        }
        ScenarioName::PtCoupled => {
            let sys_b = biorthonormalize_with(&systems::pt_qubit(), tol)?;
            let xi = match two_weights("weights_a", &config.weights_a)? {
                Some(w) => diagonal_metric(&w)?,
                None => MetricOperator::identity(2),
            };
            let zeta = match two_weights("weights_b", &config.weights_b)? {
                Some(w) => metric_family(&sys_b, &w)?,
                None => MetricOperator::new_with(systems::pt_qubit_metric(), tol)?,
            };
            Scenario {
                name: config.scenario,
                hamiltonian: systems::pt_coupled_hamiltonian(),
                metric: xi.kron(&zeta),
                density: systems::initial_state(),
                dims: (2, 2),
                sys_a: None,
                sys_b: Some(sys_b),
                metric_a: Some(xi),
                metric_b: Some(zeta),
                parity: Some(systems::parity()),
            }
        }
        ScenarioName::NoSeparableMetric => {
            let h = systems::block_sum_hamiltonian();
            let sys = biorthonormalize_with(&h, tol)?;
            Scenario {
                name: config.scenario,
                metric: canonical_metric(&sys)?,
                hamiltonian: h,
                density: systems::initial_state(),
                dims: (2, 2),
                sys_a: None,
                sys_b: Some(biorthonormalize_with(&systems::pt_qubit(), tol)?),
                metric_a: None,
                metric_b: None,
                parity: Some(systems::parity()),
            }
        }
        ScenarioName::Custom => build_custom(config, tol)?,
    };
    let mut scenario = scenario;
    if let Some(p) = &config.matrix_paths.parity {
        scenario.parity = Some(read_matrix(p)?);
    }
    let residual = verify_quasi_hermitian(&scenario.hamiltonian, &scenario.metric)?;
    if residual > tol.relative {
        return Err(CliError::Validation(format!(
            "metric does not quasi-hermitize the Hamiltonian (residual {residual:e})"
        )));
    }
    Ok(scenario)
}

fn build_custom(config: &ScenarioConfig, tol: Tolerance) -> CliResult<Scenario> {
    let paths = &config.matrix_paths;
    let h_path = paths.hamiltonian.as_ref().expect("validated");
    let h = read_matrix(h_path)?;
    if !h.is_square() {
        return Err(CliError::Validation(format!("{}: Hamiltonian must be square", h_path.display())));
    }
    let d = h.rows();
    let (n, m) = match config.dims {
        Some(dims) => dims,
        None if d == 4 => (2, 2),
        None => return Err(CliError::Config(format!("dims required for a {d}-dimensional Hamiltonian"))),
    };
    if n * m != d {
        return Err(CliError::Config(format!("dims {n}x{m} do not match dimension {d}")));
    }
    let mut metric_a = None;
    let mut metric_b = None;
    let metric = match (&paths.metric, &config.weights_a, &config.weights_b) {
        (Some(p), _, _) => MetricOperator::new_with(read_matrix(p)?, tol)?,
        (None, Some(wa), Some(wb)) => {
            if wa.len() != n || wb.len() != m {
                return Err(CliError::Config(format!("weights must have lengths {n} and {m}")));
            }
            let (xi, zeta) = (diagonal_metric(wa)?, diagonal_metric(wb)?);
            let eta = xi.kron(&zeta);
            metric_a = Some(xi);
            metric_b = Some(zeta);
            eta
        }
        (None, None, None) => {
            if h.hermiticity_defect() <= tol.relative {
                MetricOperator::identity(d)
            } else {
                canonical_metric(&biorthonormalize_with(&h, tol)?)?
            }
        }
        _ => return Err(CliError::Config("custom weights need both weights_a and weights_b".into())),
    };
    if metric.dim() != d {
        return Err(CliError::Validation(format!(
            "metric dimension {} does not match Hamiltonian dimension {d}",
            metric.dim()
        )));
    }
    let density = match &paths.density {
        Some(p) => read_matrix(p)?,
        None => ComplexMatrix::identity(d).scale_real(1.0 / d as f64),
    };
    Ok(Scenario {
        name: ScenarioName::Custom,
        hamiltonian: h,
        metric,
        density,
        dims: (n, m),
        sys_a: None,
        sys_b: None,
        metric_a,
        metric_b,
        parity: None,
    })
}

/// How the reduced columns of the trajectory were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReducedDescription {
    /// Partial traces of `ρ̃` described in the component metrics `ξ`, `ζ`.
    ComponentMetric,
    /// The compound metric is not a product; ordinary reduced states of the
    /// fiducial `ρ(t)` are reported instead.
    Fiducial,
}

struct Point {
    row: TrajectoryRow,
    full_entropy: f64,
    description: ReducedDescription,
}

fn reduced_columns(r: &ReducedState, dim: usize) -> CliResult<(f64, f64, ReducedDescription)> {
    let (state, description) = if r.interpretable {
        (r.state.clone(), ReducedDescription::ComponentMetric)
    } else {
        let rho = r
            .state
            .source()
            .ok_or_else(|| CliError::Invariant("reduced state lacks a fiducial source".into()))?;
        let fiducial = GeneralizedDensity::from_parts(rho.clone(), MetricOperator::identity(dim), Some(rho.clone()));
        (fiducial, ReducedDescription::Fiducial)
    };
    Ok((entropy(&state)?, purity(&state)?, description))
}

fn check_row(row: &TrajectoryRow, dims: (usize, usize)) -> CliResult<()> {
    for (name, p, d) in [("purity_a", row.purity_a, dims.0), ("purity_b", row.purity_b, dims.1)] {
        if !(p >= 1.0 / d as f64 - ROW_TOLERANCE && p <= 1.0 + ROW_TOLERANCE) {
            return Err(CliError::Invariant(format!("{name} = {p} at t = {}", row.t)));
        }
    }
    for (name, s) in [("entropy_a", row.entropy_a), ("entropy_b", row.entropy_b)] {
        if s.is_nan() || s < -ROW_TOLERANCE {
            return Err(CliError::Invariant(format!("{name} = {s} at t = {}", row.t)));
        }
    }
    if !row.expect_h.is_finite() {
        return Err(CliError::Invariant(format!("non-finite energy at t = {}", row.t)));
    }
    Ok(())
}

/// Result of sweeping a scenario over its time grid.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub rows: Vec<TrajectoryRow>,
    pub full_entropy: Vec<f64>,
    pub description: ReducedDescription,
}

pub fn sweep(scenario: &Scenario, grid: &TimeGrid, parallel: bool, tol: Tolerance) -> CliResult<Sweep> {
    let state = generalized_density_with(&scenario.density, &scenario.metric, tol)?;
    let (n, m) = scenario.dims;
    let mut bip = BipartiteState::new(state.clone(), n, m)?;
    bip.sys_a = scenario.sys_a.clone();
    bip.sys_b = scenario.sys_b.clone();
    bip.metric_a = scenario.metric_a.clone();
    bip.metric_b = scenario.metric_b.clone();
    let propagator = Propagator::with_tolerance(&scenario.hamiltonian, tol)?;

    let point = |t: f64| -> CliResult<Point> {
        let moved = evolve_by(&state, &propagator, t);
        let expect_h = expectation_with(&moved, &scenario.hamiltonian, tol)?;
        let full_entropy = entropy(&moved)?;
        let at = bip.replace_state(moved);
        let (entropy_a, purity_a, da) = reduced_columns(&partial_trace(&at, Subsystem::A)?, n)?;
        let (entropy_b, purity_b, db) = reduced_columns(&partial_trace(&at, Subsystem::B)?, m)?;
        let description = if da == ReducedDescription::ComponentMetric && db == da {
            da
        } else {
            ReducedDescription::Fiducial
        };
        let row = TrajectoryRow {
            t,
            entropy_a,
            entropy_b,
            purity_a,
            purity_b,
            expect_h,
        };
        check_row(&row, scenario.dims)?;
        Ok(Point {
            row,
            full_entropy,
            description,
        })
    };
    let times = grid.points();
    let points: Vec<CliResult<Point>> = if parallel {
        times.par_iter().map(|&t| point(t)).collect()
    } else {
        times.iter().map(|&t| point(t)).collect()
    };
    let points = points.into_iter().collect::<CliResult<Vec<_>>>()?;
    let description = if points.iter().all(|p| p.description == ReducedDescription::ComponentMetric) {
        ReducedDescription::ComponentMetric
    } else {
        ReducedDescription::Fiducial
    };
    Ok(Sweep {
        rows: points.iter().map(|p| p.row).collect(),
        full_entropy: points.iter().map(|p| p.full_entropy).collect(),
        description,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricSummary {
    pub quasi_hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    /// Relative distance from the nearest `ξ ⊗ ζ`.
    pub kron_residual: f64,
    pub kron_factors_positive: bool,
    pub separable: bool,
    /// The metric has the form `1 ⊗ ζ` (up to the trace gauge).
    pub identity_first_factor: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub scenario: &'static str,
    pub dims: (usize, usize),
    pub seed: u64,
    pub t_grid: TimeGrid,
    pub entropy_units: &'static str,
    pub metric: MetricSummary,
    pub pt_symmetric: Option<bool>,
    pub separable_metric_found: bool,
    pub separability: SeparabilityReport,
    pub block_obstruction: Option<BlockObstruction>,
    pub reduced_states: ReducedDescription,
    /// Reduced states have a component-system reading only for product
    /// metrics.
    pub reduced_interpretable: bool,
    /// `max − min` of the compound-state entropy over the grid.
    pub full_entropy_drift: f64,
    pub rows: usize,
}

/// Trajectory plus report of one run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<TrajectoryRow>,
    pub report: ScenarioReport,
}

fn block_diagonal_halves(h: &ComplexMatrix, n: usize, m: usize) -> Option<(ComplexMatrix, ComplexMatrix)> {
    if n != 2 {
        return None;
    }
    let off = h.block(0, m, m, m).max_abs().max(h.block(m, 0, m, m).max_abs());
    (off == 0.0).then(|| (h.block(0, 0, m, m), h.block(m, m, m, m)))
}

pub fn run_scenario(config: &ScenarioConfig, parallel: bool) -> CliResult<RunOutput> {
    let tol = config
        .tolerance
        .map_or_else(Tolerance::default, Tolerance::with_relative);
    let scenario = build_scenario(config, tol)?;
    let sweep = sweep(&scenario, &config.t_grid, parallel, tol)?;
    let (n, m) = scenario.dims;
    let h = &scenario.hamiltonian;

    let factors = kron_decompose_with(scenario.metric.matrix(), n, m, tol)?;
    let identity_first_factor = factors.xi.distance(&ComplexMatrix::identity(n)) <= 1e-8 * n as f64;
    let metric = MetricSummary {
        quasi_hermiticity_residual: verify_quasi_hermitian(h, &scenario.metric)?,
        min_eigenvalue: scenario.metric.min_eigenvalue(),
        kron_residual: factors.residual,
        kron_factors_positive: factors.positive,
        separable: factors.positive && factors.residual < SEPARABILITY_THRESHOLD,
        identity_first_factor,
    };
    let pt_symmetric = scenario
        .parity
        .as_ref()
        .map(|p| is_pt_symmetric_with(h, p, tol))
        .transpose()?;
    let opts = SearchOptions {
        starts: config.starts,
        parallel,
        ..SearchOptions::default()
    };
    let separability = search_separable_metric_with(h, n, m, config.seed, opts, tol)?;
    let block_obstruction = block_diagonal_halves(h, n, m)
        .map(|(a, b)| block_obstruction(&a, &b))
        .transpose()?;
    let lo = sweep.full_entropy.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sweep.full_entropy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let report = ScenarioReport {
        scenario: scenario.name.as_str(),
        dims: scenario.dims,
        seed: config.seed,
        t_grid: config.t_grid,
        entropy_units: "nats",
        metric,
        pt_symmetric,
        separable_metric_found: separability.found,
        separability,
        block_obstruction,
        reduced_states: sweep.description,
        reduced_interpretable: sweep.description == ReducedDescription::ComponentMetric,
        full_entropy_drift: if sweep.full_entropy.is_empty() { 0.0 } else { hi - lo },
        rows: sweep.rows.len(),
    };
    Ok(RunOutput {
        rows: sweep.rows,
        report,
    })
}
