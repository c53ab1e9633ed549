use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qherm_cli::commands::{factorize, search, to_json_line, verify_files};
use qherm_cli::config::{parse_dims, parse_weights, ScenarioConfig, ScenarioName};
use qherm_cli::output::{render, Format};
use qherm_cli::scenario::read_matrix;
use qherm_cli::{run_scenario, CliError, CliResult};
use quasi_hermitian::Tolerance;

#[derive(Parser)]
#[command(name = "qherm", version, about = "Quasi-Hermitian bipartite systems: metrics, dynamics, separability")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a scenario over a time grid and write the trajectory and report.
    Run(Box<RunArgs>),
    /// Check that a metric quasi-hermitizes a Hamiltonian.
    Verify(VerifyArgs),
    /// Nearest Kronecker factors of a metric; writes xi.json and zeta.json.
    Factorize(FactorizeArgs),
    /// Search a Hamiltonian's metric family for a product metric.
    SearchSeparable(SearchArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    scenario: Option<ScenarioName>,
    /// Scenario configuration JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    t_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t_stop: Option<f64>,
    /// Number of grid points, endpoints included.
    #[arg(long)]
    steps: Option<usize>,
    /// Comma-separated positive weights of the first factor's metric.
    #[arg(long)]
    weights_a: Option<String>,
    #[arg(long)]
    weights_b: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory; without it the trajectory goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    parity: Option<PathBuf>,
    #[arg(long)]
    parallel: bool,
    #[arg(long)]
    hamiltonian: Option<PathBuf>,
    #[arg(long)]
    metric: Option<PathBuf>,
    #[arg(long)]
    density: Option<PathBuf>,
    /// Factor dimensions as `n,m`.
    #[arg(long, value_parser = parse_dims)]
    dims: Option<(usize, usize)>,
}

#[derive(Args)]
struct VerifyArgs {
    hamiltonian: PathBuf,
    metric: PathBuf,
    #[arg(long)]
    parity: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct FactorizeArgs {
    metric: PathBuf,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args)]
struct SearchArgs {
    hamiltonian: PathBuf,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    m: usize,
    #[arg(long, default_value_t = 32)]
    starts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    parallel: bool,
    /// Also write search.json into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn tolerance(tol: Option<f64>) -> CliResult<Tolerance> {
    match tol {
        None => Ok(Tolerance::default()),
        Some(t) if t.is_finite() && t > 0.0 => Ok(Tolerance::with_relative(t)),
        Some(t) => Err(CliError::Config(format!("--tol {t} must be positive"))),
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))
}

fn run(args: RunArgs) -> CliResult<()> {
    let mut config = match &args.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = args.scenario {
        config.scenario = s;
    }
    if let Some(t) = args.t_start {
        config.t_grid.start = t;
    }
    if let Some(t) = args.t_stop {
        config.t_grid.stop = t;
    }
    if let Some(s) = args.steps {
        config.t_grid.steps = s;
    }
    let weights = |flag: &str, text: &str| {
        parse_weights(text).map_err(|e| CliError::Config(format!("--{flag}: {e}")))
    };
    if let Some(w) = &args.weights_a {
        config.weights_a = Some(weights("weights-a", w)?);
    }
    if let Some(w) = &args.weights_b {
        config.weights_b = Some(weights("weights-b", w)?);
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    if let Some(s) = args.starts {
        config.starts = s;
    }
    if args.tol.is_some() {
        config.tolerance = args.tol;
    }
    if args.dims.is_some() {
        config.dims = args.dims;
    }
    let paths = &mut config.matrix_paths;
    for (slot, flag) in [
        (&mut paths.hamiltonian, args.hamiltonian),
        (&mut paths.metric, args.metric),
        (&mut paths.density, args.density),
        (&mut paths.parity, args.parity),
    ] {
        if flag.is_some() {
            *slot = flag;
        }
    }

    let output = run_scenario(&config, args.parallel)?;
    let trajectory = render(&output.rows, args.format);
    match &args.out {
        Some(dir) => {
            write_file(dir, &format!("trajectory.{}", args.format.extension()), &trajectory)?;
            write_file(dir, "report.json", &to_json_line(&output.report))?;
        }
        None => print!("{trajectory}"),
    }
    Ok(())
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::Run(args) => run(*args),
        Command::Verify(args) => {
            let tol = tolerance(args.tol)?;
            let report = verify_files(&args.hamiltonian, &args.metric, args.parity.as_deref(), tol)?;
            print!("{}", to_json_line(&report));
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Validation(format!(
                    "metric rejected: residual {:e}, positive {}",
                    report.residual, report.metric_positive
                )))
            }
        }
        Command::Factorize(args) => {
            let tol = tolerance(args.tol)?;
            let report = factorize(&read_matrix(&args.metric)?, args.n, args.m, tol)?;
            write_file(&args.out, "xi.json", &report.xi.to_json_string())?;
            write_file(&args.out, "zeta.json", &report.zeta.to_json_string())?;
            print!("{}", to_json_line(&report));
            Ok(())
        }
        Command::SearchSeparable(args) => {
            let tol = tolerance(args.tol)?;
            let h = read_matrix(&args.hamiltonian)?;
            let report = search(&h, args.n, args.m, args.starts, args.seed, args.parallel, tol)?;
            let text = to_json_line(&report);
            if let Some(dir) = &args.out {
                write_file(dir, "search.json", &text)?;
            }
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
