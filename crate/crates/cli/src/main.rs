use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rcc_core::clusters::{extract_clusters_with, ClusterOptions, DEFAULT_FUSE_TOL};
use rcc_core::experiment::{benchmark_rows, solve_path, BenchmarkConfig, LambdaGrid, Scenario};
use rcc_core::io;
use rcc_core::par::limit_threads;
use rcc_core::weights::{DEFAULT_DELTA, DEFAULT_ZETA};
use rcc_core::{
    adjusted_rand_index, build_edge_set, generate, init_state, init_state_from, median_start,
    run_benchmark, solve_from, DataMatrix, Error, Execution, NoiseKind, Result, ScenarioConfig,
    SolverConfig, WeightKind, WeightScheme,
};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  invalid input, invalid flags or I/O failure
  2  the solver stopped at --max-iter without converging (output is still written)

Set RCC_THREADS to cap the number of worker threads.";

const OK: u8 = 0;
const FAILURE: u8 = 1;
const NOT_CONVERGED: u8 = 2;

#[derive(Parser)]
#[command(
    name = "rcc",
    version,
    about = "Robust convex clustering: Huber loss with a fused group-lasso penalty, solved by ADMM",
    after_help = EXIT_CODES
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster one data matrix at a single λ and write the result as JSON.
    #[command(after_help = EXIT_CODES)]
    Cluster(ClusterArgs),
    /// Solve across a λ grid and write k and the objective per λ as CSV.
    #[command(after_help = EXIT_CODES)]
    Path(PathArgs),
    /// Generate a two-cluster dataset with optional heavy tails and outliers.
    #[command(after_help = EXIT_CODES)]
    Simulate(SimulateArgs),
    /// Adjusted Rand index between two label files.
    #[command(after_help = EXIT_CODES)]
    Eval(EvalArgs),
    /// Simulation benchmark over noise and contamination scenarios.
    #[command(after_help = EXIT_CODES)]
    Benchmark(BenchmarkArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Data CSV, one observation per row. A non-numeric first line is treated as a header.
    #[arg(long)]
    input: PathBuf,
    /// Huber threshold; `inf` gives the squared loss.
    #[arg(long, default_value_t = 3.0)]
    tau: f64,
    #[arg(long, default_value = "robust", value_parser = parse_weights)]
    weights: WeightKind,
    #[arg(long, default_value_t = DEFAULT_ZETA)]
    zeta: f64,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    /// Drop pairs whose weight is at or below this value.
    #[arg(long, default_value_t = 0.0)]
    w_min: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_FUSE_TOL)]
    fuse_tol: f64,
    /// sequential, parallel or auto
    #[arg(long, default_value = "auto", value_parser = parse_execution)]
    execution: Execution,
    /// Starting centroids: `data` (U = X) or `median` (every row at the
    /// coordinatewise median; much faster with gross outliers under the Huber loss).
    #[arg(long, default_value = "data", value_parser = ["data", "median"])]
    start: String,
}

impl ModelArgs {
    fn scheme(&self) -> WeightScheme {
        WeightScheme {
            kind: self.weights,
            zeta: self.zeta,
            delta: self.delta,
            w_min: self.w_min,
        }
    }

    fn solver(&self, lambda: f64) -> SolverConfig {
        SolverConfig::new(lambda, self.tau)
            .with_rho(self.rho)
            .with_tol(self.tol)
            .with_max_iter(self.max_iter)
            .with_execution(self.execution)
    }
}

#[derive(Args)]
struct ClusterArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    lambda: f64,
    /// Result JSON path.
    #[arg(long)]
    output: PathBuf,
    /// Report each row's cluster mean instead of its raw centroid.
    #[arg(long)]
    average_centroids: bool,
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("grid").required(true).args(["lambda_grid", "lambda_log"]))]
struct PathArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Comma-separated λ values.
    #[arg(long)]
    lambda_grid: Option<String>,
    /// Log-spaced grid `lo:hi:count`.
    #[arg(long)]
    lambda_log: Option<String>,
    /// Report the smallest grid λ giving exactly this many clusters.
    #[arg(long)]
    target_k: Option<usize>,
    /// Start each λ from the previous solution.
    #[arg(long)]
    warm_start: bool,
    /// CSV path; standard output when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    p: usize,
    /// gaussian, t2 or lognormal
    #[arg(long, default_value = "gaussian", value_parser = parse_noise)]
    noise: NoiseKind,
    /// Fraction of rows contaminated.
    #[arg(long, default_value_t = 0.0)]
    contam_frac: f64,
    /// Fraction of coordinates replaced in each contaminated row.
    #[arg(long, default_value_t = 0.2)]
    contam_var_frac: f64,
    #[arg(long, default_value_t = 10.0)]
    contam_lo: f64,
    #[arg(long, default_value_t = 20.0)]
    contam_hi: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Data CSV path.
    #[arg(long)]
    output: PathBuf,
    /// True-label CSV path.
    #[arg(long)]
    labels: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    labels_a: PathBuf,
    #[arg(long)]
    labels_b: PathBuf,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 50)]
    n: usize,
    #[arg(long, default_value_t = 20)]
    p: usize,
    /// Replication r uses seed + r.
    #[arg(long, default_value_t = 2019)]
    seed: u64,
    /// Huber threshold for the robust method.
    #[arg(long, default_value_t = 3.0)]
    tau: f64,
    #[arg(long, default_value_t = DEFAULT_ZETA)]
    zeta: f64,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    /// Log-spaced search grid `lo:hi:count`.
    #[arg(long)]
    lambda_log: Option<String>,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    /// Only the five distinct table settings instead of every noise × contamination pair.
    #[arg(long)]
    table_only: bool,
    /// Solve every λ from scratch.
    #[arg(long)]
    cold_start: bool,
    /// Benchmark table CSV path.
    #[arg(long)]
    output: PathBuf,
}

fn parse_weights(s: &str) -> std::result::Result<WeightKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_execution(s: &str) -> std::result::Result<Execution, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_noise(s: &str) -> std::result::Result<NoiseKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn load(model: &ModelArgs) -> Result<DataMatrix> {
    io::read_csv_auto(&model.input)
}

fn cmd_cluster(args: &ClusterArgs) -> Result<u8> {
    let x = load(&args.model)?;
    let edges = build_edge_set(&x, &args.model.scheme())?;
    let start = match args.model.start.as_str() {
        "median" => init_state_from(&x, &edges, &median_start(&x))?,
        _ => init_state(&x, &edges)?,
    };
    let report = solve_from(&x, &edges, &args.model.solver(args.lambda), start)?;
    let opts = ClusterOptions {
        fuse_tol: args.model.fuse_tol,
        average_centroids: args.average_centroids,
    };
    let result = extract_clusters_with(&report, &edges, &opts);
    io::write_result(&result, &args.output)?;
    println!("k={} iterations={}", result.k, report.iterations);
    if !report.converged {
        eprintln!(
            "warning: not converged after {} iterations (last W change {:e})",
            report.iterations, report.state.w_change
        );
        return Ok(NOT_CONVERGED);
    }
    Ok(OK)
}

fn cmd_path(args: &PathArgs) -> Result<u8> {
    let grid = match (&args.lambda_grid, &args.lambda_log) {
        (Some(list), _) => LambdaGrid::parse_list(list)?,
        (None, Some(range)) => LambdaGrid::parse_log(range)?,
        (None, None) => return Err(Error::InvalidConfig("a λ grid is required".into())),
    };
    let x = load(&args.model)?;
    let edges = build_edge_set(&x, &args.model.scheme())?;
    let path = solve_path(
        &x,
        &edges,
        &args.model.solver(0.0),
        &grid,
        args.model.fuse_tol,
        args.warm_start,
        None,
    )?;
    let points: Vec<_> = path.into_iter().map(|(p, _)| p).collect();
    let report = args
        .target_k
        .map(|target| match points.iter().find(|p| p.k == target) {
            Some(p) => format!("selected lambda={:?} k={}", p.lambda, p.k),
            None => format!("no grid lambda gives k={target}"),
        });
    match &args.output {
        Some(out) => {
            io::write_path_table(&points, out)?;
            if let Some(r) = report {
                println!("{r}");
            }
        }
        None => {
            print!("{}", io::path_table_csv(&points)?);
            if let Some(r) = report {
                eprintln!("{r}");
            }
        }
    }
    let unconverged = points.iter().filter(|p| !p.converged).count();
    if unconverged > 0 {
        eprintln!("warning: {unconverged} grid point(s) did not converge");
        return Ok(NOT_CONVERGED);
    }
    Ok(OK)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<u8> {
    let data = generate(&ScenarioConfig {
        n: args.n,
        p: args.p,
        noise: args.noise,
        contam_frac: args.contam_frac,
        contam_var_frac: args.contam_var_frac,
        contam_range: (args.contam_lo, args.contam_hi),
        seed: args.seed,
    })?;
    io::write_csv(&args.output, &data.x.view(), None)?;
    io::write_labels(&args.labels, &data.true_labels)?;
    let rows: Vec<String> = data
        .contaminated_rows
        .iter()
        .map(|r| r.to_string())
        .collect();
    println!(
        "contaminated rows: {}",
        if rows.is_empty() {
            "none".to_string()
        } else {
            rows.join(",")
        }
    );
    Ok(OK)
}

fn cmd_eval(args: &EvalArgs) -> Result<u8> {
    let a = io::read_labels(&args.labels_a)?;
    let b = io::read_labels(&args.labels_b)?;
    println!("{:.6}", adjusted_rand_index(&a, &b)?);
    Ok(OK)
}

fn cmd_benchmark(args: &BenchmarkArgs) -> Result<u8> {
    let defaults = BenchmarkConfig::default();
    let cfg = BenchmarkConfig {
        reps: args.reps,
        n: args.n,
        p: args.p,
        seed: args.seed,
        tau: args.tau,
        zeta: args.zeta,
        delta: args.delta,
        grid: match &args.lambda_log {
            Some(range) => LambdaGrid::parse_log(range)?,
            None => defaults.grid.clone(),
        },
        solver: defaults
            .solver
            .with_tol(args.tol)
            .with_max_iter(args.max_iter),
        warm_start: !args.cold_start,
        scenarios: if args.table_only {
            Scenario::table()
        } else {
            Scenario::full_grid()
        },
        ..defaults
    };
    let cells = run_benchmark(&cfg)?;
    let rows = benchmark_rows(&cells)?;
    io::write_benchmark_table(&rows, &args.output)?;
    for row in &rows {
        println!(
            "{:<24} {:<18} {:.3} ({:.3})",
            row.scenario, row.method, row.mean_ari, row.se_ari
        );
    }
    let unmatched: usize = cells
        .iter()
        .map(|c| c.replicates.iter().filter(|r| !r.matched).count())
        .sum();
    if unmatched > 0 {
        eprintln!("note: {unmatched} replication(s) never reached k=2; the closest k was scored");
    }
    Ok(OK)
}

fn thread_cap() -> Result<()> {
    match std::env::var("RCC_THREADS") {
        Ok(v) => {
            let n = v.trim().parse::<usize>().map_err(|_| {
                Error::InvalidConfig(format!("RCC_THREADS must be a positive integer, got '{v}'"))
            })?;
            limit_threads(n)
        }
        Err(_) => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { FAILURE } else { OK });
        }
    };
    let outcome = thread_cap().and_then(|()| match &cli.command {
        Command::Cluster(a) => cmd_cluster(a),
        Command::Path(a) => cmd_path(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Benchmark(a) => cmd_benchmark(a),
    });
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(FAILURE)
        }
    }
}
