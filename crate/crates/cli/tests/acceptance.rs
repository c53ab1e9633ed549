//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fail.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, LN_2, PI, TAU};
use std::process::Command;

use qherm_cli::config::{ScenarioConfig, ScenarioName, TimeGrid};
use qherm_cli::{run_scenario, systems};
use quasi_hermitian::dynamics::{
    energy_distribution, evolution_operator, expectation, generalized_density, numerical_rank,
};
use quasi_hermitian::matcore::random::{random_complex, random_positive, random_real_spectrum};
use quasi_hermitian::matcore::kron;
use quasi_hermitian::metric::{
    biorthonormalize, is_pt_symmetric, metric_family, quasi_hermiticity_residual, verify_quasi_hermitian, MetricOperator,
};
use quasi_hermitian::tensor::{block_obstruction, nearest_kron, search_separable_metric};
use quasi_hermitian::{c64, ComplexMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CLOSED_FORM_TOL: f64 = 1e-9;
const BELL_TOL: f64 = 1e-10;
const PT_RESIDUAL_TOL: f64 = 1e-12;
const FOUND_TOL: f64 = 1e-8;
const OBSTRUCTION_FLOOR: f64 = 1e-6;
const SEARCH_FLOOR: f64 = 1e-4;
/// Best relative rank-one defect of the seeded 32-start search on the block
/// sum, weights confined to `[1/10, 10]`.
const SEARCH_REGRESSION: f64 = 2.9998785044649703e-3;
const SEARCH_SEED: u64 = 0;

type Check = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn two_qubit_config(weights_a: [f64; 2], grid: TimeGrid) -> ScenarioConfig {
    ScenarioConfig {
        scenario: ScenarioName::HermitianTwoQubit,
        t_grid: grid,
        weights_a: Some(weights_a.to_vec()),
        weights_b: Some(vec![1.0, 1.0]),
        starts: 1,
        ..ScenarioConfig::default()
    }
}

fn closed_form(x1: f64, x2: f64, t: f64) -> (f64, f64) {
    let q = (x1 * x1 + x2 * x2 + 2.0 * x1 * x2 * (4.0 * t).cos()).sqrt() / (x1 + x2);
    let (rp, rm) = (0.5 * (1.0 + q), 0.5 * (1.0 - q));
    let s = [rp, rm].iter().filter(|r| **r > 0.0).map(|r| -r * r.ln()).sum();
    (s, 0.5 * (1.0 + q * q))
}

fn criterion_1() -> Check {
    let grid = TimeGrid {
        start: 0.0,
        stop: PI,
        steps: 101,
    };
    let weighted = run_scenario(&two_qubit_config([1.0, 2.0], grid), false).map_err(|e| e.to_string())?;
    let plain = run_scenario(&two_qubit_config([1.0, 1.0], grid), false).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for row in &weighted.rows {
        let (s, p) = closed_form(1.0, 2.0, row.t);
        worst = worst.max((row.entropy_a - s).abs()).max((row.purity_a - p).abs());
    }
    for row in &plain.rows {
        let c = (2.0 * row.t).cos();
        worst = worst.max((row.purity_a - 0.5 * (1.0 + c * c)).abs());
        let (s2, c2) = (row.t.sin().powi(2), row.t.cos().powi(2));
        let s: f64 = [s2, c2].iter().filter(|x| **x > 0.0).map(|x| -x * x.ln()).sum();
        worst = worst.max((row.entropy_a - s).abs());
    }
    let n = weighted.rows.len() + plain.rows.len();
    ensure(
        worst <= CLOSED_FORM_TOL && n == 202,
        format!("{n} rows, max deviation {worst:.3e} (tol {CLOSED_FORM_TOL:e})"),
    )
}

fn criterion_2() -> Check {
    let bell = TimeGrid {
        start: FRAC_PI_4,
        stop: FRAC_PI_4,
        steps: 1,
    };
    let row = run_scenario(&two_qubit_config([1.0, 1.0], bell), false).map_err(|e| e.to_string())?.rows[0];
    let bell_dev = (row.entropy_a - LN_2).abs();
    let grid = TimeGrid {
        start: 0.0,
        stop: PI,
        steps: 3,
    };
    let mut purity_dev: f64 = 0.0;
    for w in [[1.0, 1.0], [1.0, 2.0], [3.0, 0.5]] {
        let out = run_scenario(&two_qubit_config(w, grid), false).map_err(|e| e.to_string())?;
        debug_assert!((out.rows[1].t - FRAC_PI_2).abs() < 1e-15);
        for r in &out.rows {
            purity_dev = purity_dev.max((r.purity_a - 1.0).abs()).max((r.purity_b - 1.0).abs());
        }
    }
    ensure(
        bell_dev <= BELL_TOL && purity_dev <= BELL_TOL,
        format!("|S(pi/4) - ln 2| = {bell_dev:.3e}, max |P - 1| at k*pi/2 = {purity_dev:.3e}"),
    )
}

fn criterion_3() -> Check {
    let zeta = systems::pt_qubit_metric();
    let residual = quasi_hermiticity_residual(&systems::pt_qubit(), &zeta).map_err(|e| e.to_string())?;
    let det = zeta[(0, 0)] * zeta[(1, 1)] - zeta[(0, 1)] * zeta[(1, 0)];
    let trace = zeta.trace();
    let pt = is_pt_symmetric(&systems::pt_coupled_hamiltonian(), &systems::parity()).map_err(|e| e.to_string())?;
    let report =
        search_separable_metric(&systems::pt_coupled_hamiltonian(), 2, 2, 32, SEARCH_SEED).map_err(|e| e.to_string())?;
    ensure(
        residual < PT_RESIDUAL_TOL
            && (det - c64(1.0, 0.0)).norm() < 1e-14
            && (trace - c64(4.0, 0.0)).norm() < 1e-14
            && pt
            && report.found
            && report.best_residual < FOUND_TOL,
        format!(
            "residual {residual:.3e}, det {:.15}, trace {:.15}, PT {pt}, found {} ({:.3e})",
            det.re, trace.re, report.found, report.best_residual
        ),
    )
}

fn criterion_4() -> Check {
    let ob = block_obstruction(&ComplexMatrix::from_real_diag(&[1.0, 2.0]), &systems::pt_qubit())
        .map_err(|e| e.to_string())?;
    let report = search_separable_metric(&systems::block_sum_hamiltonian(), 2, 2, 32, SEARCH_SEED)
        .map_err(|e| e.to_string())?;
    let pt = is_pt_symmetric(&systems::block_sum_hamiltonian(), &systems::parity()).map_err(|e| e.to_string())?;
    let pinned = (report.best_residual - SEARCH_REGRESSION).abs() < 1e-9;
    ensure(
        !ob.feasible
            && ob.residual > OBSTRUCTION_FLOOR
            && !report.found
            && report.best_residual > SEARCH_FLOOR
            && pinned
            && !pt,
        format!(
            "obstruction feasible {} residual {:.3e}, search found {} best {:.10e} (pinned {pinned}), PT {pt}",
            ob.feasible, ob.residual, report.found, report.best_residual
        ),
    )
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(0.1..10.0)).collect()
}

fn random_density(rng: &mut ChaCha8Rng, n: usize, rank: usize) -> ComplexMatrix {
    let v = random_complex(n, rank, rng);
    let rho = &v * &v.adjoint();
    let t = rho.trace().re;
    rho.scale_real(1.0 / t).hermitian_part()
}

fn suite_a() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 2 + (seed % 7) as usize;
        let h = random_real_spectrum(n, &mut rng);
        let sys = biorthonormalize(&h).map_err(|e| format!("seed {seed}: {e}"))?;
        worst = worst
            .max(sys.biorthonormality_defect())
            .max(sys.reconstruct().relative_distance(&h));
    }
    ensure(worst < 1e-9, format!("200 matrices, dims 2-8, max residual {worst:.3e}"))
}

fn suite_b() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = 2 + (seed % 7) as usize;
        let h = random_real_spectrum(n, &mut rng);
        let sys = biorthonormalize(&h).map_err(|e| e.to_string())?;
        let eta = metric_family(&sys, &random_weights(&mut rng, n)).map_err(|e| e.to_string())?;
        worst = worst.max(verify_quasi_hermitian(&h, &eta).map_err(|e| e.to_string())?);
    }
    ensure(worst < 1e-10, format!("200 family metrics, max residual {worst:.3e}"))
}

fn suite_c() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
        let n = 2 + (seed % 5) as usize;
        let h = random_real_spectrum(n, &mut rng);
        let sys = biorthonormalize(&h).map_err(|e| e.to_string())?;
        let eta = metric_family(&sys, &random_weights(&mut rng, n)).map_err(|e| e.to_string())?;
        for _ in 0..5 {
            let t = rng.gen_range(0.0..TAU);
            let u = evolution_operator(&h, t).map_err(|e| e.to_string())?;
            let moved = &(&u.adjoint() * eta.matrix()) * &u;
            worst = worst.max(moved.distance(eta.matrix()) / eta.matrix().frobenius_norm().max(1.0));
        }
    }
    ensure(worst < 1e-9, format!("250 samples, max |U^dag eta U - eta| {worst:.3e}"))
}

fn suite_d() -> Check {
    let mut worst: f64 = 0.0;
    let mut rank_mismatch = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(3000 + seed);
        let n = 2 + (seed % 5) as usize;
        let rank = 1 + (seed as usize / 5) % n;
        let rho = random_density(&mut rng, n, rank);
        let eta = MetricOperator::new(random_positive(n, 0.2, &mut rng)).map_err(|e| e.to_string())?;
        let s = generalized_density(&rho, &eta).map_err(|e| e.to_string())?;
        worst = worst.max((s.trace() - c64(1.0, 0.0)).norm());
        let (a, b) = (numerical_rank(s.matrix()), numerical_rank(&rho));
        if a.map_err(|e| e.to_string())? != rank || b.map_err(|e| e.to_string())? != rank {
            rank_mismatch += 1;
        }
    }
    ensure(
        worst < 1e-12 && rank_mismatch == 0,
        format!("100 states, max trace error {worst:.3e}, rank mismatches {rank_mismatch}"),
    )
}

fn suite_e() -> Check {
    let mut worst_residual: f64 = 0.0;
    let mut worst_factor: f64 = 0.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + seed);
        let (n, m) = (2 + (seed % 3) as usize, 2 + (seed / 3 % 3) as usize);
        let xi = random_positive(n, 0.2, &mut rng);
        let zeta = random_positive(m, 0.2, &mut rng);
        let f = nearest_kron(&kron(&xi, &zeta), n, m).map_err(|e| e.to_string())?;
        let g = n as f64 / xi.trace().re;
        worst_residual = worst_residual.max(f.residual);
        worst_factor = worst_factor
            .max(f.xi.distance(&xi.scale_real(g)))
            .max(f.zeta.distance(&zeta.scale_real(1.0 / g)));
    }
    ensure(
        worst_factor < 1e-8 && worst_residual < 1e-10,
        format!("100 products, max residual {worst_residual:.3e}, max factor error {worst_factor:.3e}"),
    )
}

fn suite_f() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
        let n = 2 + (seed % 5) as usize;
        let h = random_real_spectrum(n, &mut rng);
        let sys = biorthonormalize(&h).map_err(|e| e.to_string())?;
        let eta = metric_family(&sys, &random_weights(&mut rng, n)).map_err(|e| e.to_string())?;
        let s = generalized_density(&random_density(&mut rng, n, n), &eta).map_err(|e| e.to_string())?;
        let p = energy_distribution(&s, &sys).map_err(|e| e.to_string())?;
        worst = worst.max((p.iter().sum::<f64>() - 1.0).abs());
    }
    ensure(worst < 1e-10, format!("100 states, max |sum p - 1| {worst:.3e}"))
}

fn suite_g() -> Check {
    let grid = TimeGrid {
        start: 0.0,
        stop: PI,
        steps: 101,
    };
    let mut drift: f64 = 0.0;
    let mut variation = f64::INFINITY;
    for w in [[1.0, 1.0], [1.0, 2.0]] {
        let out = run_scenario(&two_qubit_config(w, grid), false).map_err(|e| e.to_string())?;
        drift = drift.max(out.report.full_entropy_drift);
        let lo = out.rows.iter().map(|r| r.entropy_a).fold(f64::INFINITY, f64::min);
        let hi = out.rows.iter().map(|r| r.entropy_a).fold(f64::NEG_INFINITY, f64::max);
        variation = variation.min(hi - lo);
    }
    ensure(
        drift < 1e-10 && variation > 1e-3,
        format!("full-state entropy drift {drift:.3e}, reduced entropy range {variation:.3e}"),
    )
}

fn suite_h() -> Check {
    let h = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
    let rho = ComplexMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
    let plain = generalized_density(&rho, &MetricOperator::identity(2)).map_err(|e| e.to_string())?;
    let eta = MetricOperator::new(ComplexMatrix::from_real_diag(&[1.0, 3.0])).map_err(|e| e.to_string())?;
    let weighted = generalized_density(&rho, &eta).map_err(|e| e.to_string())?;
    let (a, b) = (
        expectation(&plain, &h).map_err(|e| e.to_string())?,
        expectation(&weighted, &h).map_err(|e| e.to_string())?,
    );
    ensure(
        a.abs() < 1e-12 && (b + 0.5).abs() < 1e-12,
        format!("<H> = {a} with the identity metric, {b} with diag(1, 3)"),
    )
}

fn criterion_5() -> Vec<(&'static str, Check)> {
    vec![
        ("5a biorthonormal reconstruction", suite_a()),
        ("5b family metrics quasi-hermitize", suite_b()),
        ("5c pseudo-unitary evolution", suite_c()),
        ("5d trace and rank of generalized densities", suite_d()),
        ("5e nearest Kronecker round trip", suite_e()),
        ("5f energy weights sum to one", suite_f()),
        ("5g full entropy constant, reduced entropy varies", suite_g()),
        ("5h metric-dependent expectation", suite_h()),
    ]
}

fn qherm(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_qherm"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn criterion_6() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut compared = 0;
    for scenario in ["hermitian-two-qubit", "pt-coupled", "no-separable-metric"] {
        let mut files = Vec::new();
        for (k, extra) in [[].as_slice(), [].as_slice(), ["--parallel"].as_slice()].iter().enumerate() {
            let out = dir.path().join(format!("{scenario}-{k}"));
            let mut args = vec!["run", "--scenario", scenario, "--seed", "11", "--out", out.to_str().unwrap()];
            args.extend_from_slice(extra);
            qherm(&args)?;
            let read = |name: &str| std::fs::read(out.join(name)).map_err(|e| e.to_string());
            files.push((read("trajectory.csv")?, read("report.json")?));
        }
        if files.windows(2).any(|w| w[0] != w[1]) {
            return Err(format!("{scenario}: outputs differ between identical runs"));
        }
        compared += files.len();
    }
    let h = dir.path().join("h.json");
    std::fs::write(&h, systems::block_sum_hamiltonian().to_json_string()).map_err(|e| e.to_string())?;
    let h = h.to_str().unwrap();
    let first = qherm(&["search-separable", h, "--seed", "3"])?;
    let second = qherm(&["search-separable", h, "--seed", "3"])?;
    let third = qherm(&["search-separable", h, "--seed", "3", "--parallel"])?;
    ensure(
        first == second && second == third,
        format!("{compared} run outputs and 3 search reports byte-identical"),
    )
}

fn main() {
    let mut results: Vec<(&str, Check)> = vec![
        ("1 closed-form reduced entropy and purity", criterion_1()),
        ("2 Bell point and separability times", criterion_2()),
        ("3 PT-symmetric metric and separable search", criterion_3()),
        ("4 block-sum obstruction", criterion_4()),
    ];
    results.extend(criterion_5());
    results.push(("6 deterministic command output", criterion_6()));

    let mut failed = 0;
    for (name, result) in &results {
        match result {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("{} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
