//! λ paths, λ selection by target cluster count, and the simulation benchmark.

use serde::{Deserialize, Serialize};

use crate::clusters::{extract_clusters, DEFAULT_FUSE_TOL};
use crate::error::{Error, Result};
use crate::eval::adjusted_rand_index;
use crate::io::BenchmarkRow;
use crate::par::{map_ordered, Execution};
use crate::problem::{ClusteringResult, DataMatrix, SolverConfig, SolverState, WeightedEdgeSet};
use crate::simulate::{generate, NoiseKind, ScenarioConfig};
use crate::solver::{init_state, solve_from, SolveReport};
use crate::weights::{build_edge_set, WeightScheme, DEFAULT_DELTA, DEFAULT_ZETA};

/// Increasing list of λ values.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid(Vec<f64>);

pub const DEFAULT_GRID_LO: f64 = 1e-1;
pub const DEFAULT_GRID_HI: f64 = 1e3;
pub const DEFAULT_GRID_COUNT: usize = 20;

impl Default for LambdaGrid {
    /// 20 log-spaced points over four decades.
    fn default() -> Self {
        LambdaGrid::log(DEFAULT_GRID_LO, DEFAULT_GRID_HI, DEFAULT_GRID_COUNT)
            .expect("valid default grid")
    }
}

impl LambdaGrid {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidConfig("lambda grid is empty".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidConfig(
                "lambda grid values must be finite and >= 0".into(),
            ));
        }
        values.sort_by(f64::total_cmp);
        values.dedup();
        Ok(LambdaGrid(values))
    }

    /// `count` points evenly spaced in `log10` from `lo` to `hi` inclusive.
    pub fn log(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo && count >= 1) {
            return Err(Error::InvalidConfig(format!(
                "log grid needs 0 < lo <= hi and count >= 1, got {lo}:{hi}:{count}"
            )));
        }
        if count == 1 {
            return Self::new(vec![lo]);
        }
        let (a, b) = (lo.log10(), hi.log10());
        Self::new(
            (0..count)
                .map(|k| 10f64.powf(a + (b - a) * k as f64 / (count - 1) as f64))
                .collect(),
        )
    }

    /// Parses `"v1,v2,..."`.
    pub fn parse_list(s: &str) -> Result<Self> {
        let values = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidConfig(format!("bad lambda value '{t}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    /// Parses `"lo:hi:count"`.
    pub fn parse_log(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::InvalidConfig(format!("expected lo:hi:count, got '{s}'"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo = parts[0].trim().parse::<f64>().map_err(|_| bad())?;
        let hi = parts[1].trim().parse::<f64>().map_err(|_| bad())?;
        let count = parts[2].trim().parse::<usize>().map_err(|_| bad())?;
        Self::log(lo, hi, count)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathPoint {
    pub lambda: f64,
    pub k: usize,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn solve_at(
    x: &DataMatrix,
    edges: &WeightedEdgeSet,
    cfg: &SolverConfig,
    lambda: f64,
    start: Option<&SolverState>,
    fuse_tol: f64,
) -> Result<(SolveReport, PathPoint, ClusteringResult)> {
    let run_cfg = SolverConfig { lambda, ..*cfg };
    let start = match start {
        Some(prev) => SolverState {
            iter: 0,
            ..prev.clone()
        },
        None => init_state(x, edges)?,
    };
    let report = solve_from(x, edges, &run_cfg, start)?;
    let result = extract_clusters(&report, edges, fuse_tol);
    let point = PathPoint {
        lambda,
        k: result.k,
        objective: report.state.objective,
        iterations: report.iterations,
        converged: report.converged,
    };
    Ok((report, point, result))
}

/// Solves at every grid λ in increasing order.
///
/// With `warm_start` each solve starts from the previous λ's final state.
/// When `stop_at_k` is set the sweep ends at the first λ producing that many clusters.
pub fn solve_path(
    x: &DataMatrix,
    edges: &WeightedEdgeSet,
    cfg: &SolverConfig,
    grid: &LambdaGrid,
    fuse_tol: f64,
    warm_start: bool,
    stop_at_k: Option<usize>,
) -> Result<Vec<(PathPoint, ClusteringResult)>> {
    let mut out = Vec::with_capacity(grid.values().len());
    let mut previous: Option<SolverState> = None;
    for &lambda in grid.values() {
        let start = previous.as_ref().filter(|_| warm_start);
        let (report, point, result) = solve_at(x, edges, cfg, lambda, start, fuse_tol)?;
        let done = stop_at_k == Some(result.k);
        out.push((point, result));
        previous = Some(report.state);
        if done {
            break;
        }
    }
    Ok(out)
}

/// Doublings of λ tried past the top of the grid while the count is still above target.
pub const MAX_EXTEND_STEPS: usize = 40;
/// Log-scale bisection steps between bracketing λ values.
pub const MAX_BISECT_STEPS: usize = 30;

#[derive(Debug, Clone)]
pub struct LambdaSelection {
    pub lambda: f64,
    pub result: ClusteringResult,
    /// False when no λ tried produced exactly the target count; the closest count was used.
    pub matched: bool,
    /// Every λ solved, in the order tried.
    pub evaluated: Vec<PathPoint>,
}

/// Finds a λ whose solution has exactly `target_k` clusters.
///
/// The grid is scanned upward and the first exact match wins. If the count
/// jumps over the target between two grid points, λ is bisected on a log
/// scale inside that bracket; if the top of the grid still has too many
/// clusters, λ keeps doubling until the count drops to the target or below.
/// Without any exact match the λ with the closest count is returned
/// (smallest λ on ties) with `matched = false`.
pub fn select_lambda(
    x: &DataMatrix,
    edges: &WeightedEdgeSet,
    cfg: &SolverConfig,
    grid: &LambdaGrid,
    target_k: usize,
    fuse_tol: f64,
    warm_start: bool,
) -> Result<LambdaSelection> {
    let mut evaluated: Vec<PathPoint> = Vec::new();
    let mut best: Option<(PathPoint, ClusteringResult)> = None;
    let keep = |point: PathPoint,
                result: ClusteringResult,
                evaluated: &mut Vec<PathPoint>,
                best: &mut Option<(PathPoint, ClusteringResult)>| {
        evaluated.push(point.clone());
        let better = match &*best {
            None => true,
            Some((b, _)) => {
                let (d, db) = (point.k.abs_diff(target_k), b.k.abs_diff(target_k));
                d < db || (d == db && point.lambda < b.lambda)
            }
        };
        if better {
            *best = Some((point, result));
        }
    };

    // bracket: last state with k > target, first λ above it with k < target
    let mut below: Option<(f64, SolverState)> = None;
    let mut above: Option<f64> = None;
    let mut previous: Option<SolverState> = None;
    for &lambda in grid.values() {
        let start = previous.as_ref().filter(|_| warm_start);
        let (report, point, result) = solve_at(x, edges, cfg, lambda, start, fuse_tol)?;
        let k = point.k;
        keep(point, result, &mut evaluated, &mut best);
        if k == target_k {
            return Ok(finish(best, evaluated, target_k));
        }
        if k > target_k {
            below = Some((lambda, report.state.clone()));
        } else if below.is_some() {
            above = Some(lambda);
            break;
        }
        previous = Some(report.state);
    }

    if above.is_none() {
        if let Some((top, state)) = below.clone() {
            let mut lambda = if top > 0.0 { top } else { 0.5 };
            let mut state = state;
            for _ in 0..MAX_EXTEND_STEPS {
                lambda *= 2.0;
                let start = warm_start.then_some(&state);
                let (report, point, result) = solve_at(x, edges, cfg, lambda, start, fuse_tol)?;
                let k = point.k;
                keep(point, result, &mut evaluated, &mut best);
                if k == target_k {
                    return Ok(finish(best, evaluated, target_k));
                }
                if k < target_k {
                    above = Some(lambda);
                    break;
                }
                below = Some((lambda, report.state.clone()));
                state = report.state;
            }
        }
    }

    if let (Some((mut lo, mut lo_state)), Some(mut hi)) = (below, above) {
        for _ in 0..MAX_BISECT_STEPS {
            let mid = if lo > 0.0 { (lo * hi).sqrt() } else { hi / 2.0 };
            if mid <= lo || mid >= hi {
                break;
            }
            let start = warm_start.then_some(&lo_state);
            let (report, point, result) = solve_at(x, edges, cfg, mid, start, fuse_tol)?;
            let k = point.k;
            keep(point, result, &mut evaluated, &mut best);
            if k == target_k {
                break;
            }
            if k > target_k {
                lo = mid;
                lo_state = report.state;
            } else {
                hi = mid;
            }
        }
    }
    Ok(finish(best, evaluated, target_k))
}

fn finish(
    best: Option<(PathPoint, ClusteringResult)>,
    evaluated: Vec<PathPoint>,
    target_k: usize,
) -> LambdaSelection {
    let (point, result) = best.expect("at least one λ was solved");
    LambdaSelection {
        lambda: point.lambda,
        matched: point.k == target_k,
        result,
        evaluated,
    }
}

/// Loss/weight combinations compared in the benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Huber loss with truncated weights.
    HuberRobust,
    /// Squared loss with Gaussian-kernel weights.
    SquaredGaussian,
    /// Squared loss with truncated weights.
    SquaredRobust,
}

impl Method {
    pub const ALL: [Method; 3] = [
        Method::HuberRobust,
        Method::SquaredGaussian,
        Method::SquaredRobust,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::HuberRobust => "huber_robust",
            Method::SquaredGaussian => "squared_gaussian",
            Method::SquaredRobust => "squared_robust",
        }
    }

    pub fn tau(self, huber_tau: f64) -> f64 {
        match self {
            Method::HuberRobust => huber_tau,
            Method::SquaredGaussian | Method::SquaredRobust => f64::INFINITY,
        }
    }

    pub fn weights(self, zeta: f64, delta: f64) -> WeightScheme {
        match self {
            Method::HuberRobust | Method::SquaredRobust => WeightScheme::robust(zeta, delta),
            Method::SquaredGaussian => WeightScheme::gaussian(zeta),
        }
    }
}

/// A data-generating setting: noise family plus contamination level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub noise: NoiseKind,
    pub contam_frac: f64,
}

impl Scenario {
    pub fn new(noise: NoiseKind, contam_frac: f64) -> Self {
        let pct = (contam_frac * 100.0).round() as u32;
        let name = match (noise, pct) {
            (NoiseKind::Gaussian, _) => format!("outliers_{pct}pct"),
            (other, 0) => other.name().to_string(),
            (other, _) => format!("{}_outliers_{pct}pct", other.name()),
        };
        Scenario {
            name,
            noise,
            contam_frac,
        }
    }

    /// The five distinct table settings: Gaussian noise at 0%, 6% and 10%
    /// contamination, and uncontaminated t(2) and log-normal noise.
    pub fn table() -> Vec<Scenario> {
        vec![
            Scenario::new(NoiseKind::Gaussian, 0.0),
            Scenario::new(NoiseKind::Gaussian, 0.06),
            Scenario::new(NoiseKind::Gaussian, 0.10),
            Scenario::new(NoiseKind::StudentT2, 0.0),
            Scenario::new(NoiseKind::Lognormal, 0.0),
        ]
    }

    /// Every noise family crossed with every contamination level.
    pub fn full_grid() -> Vec<Scenario> {
        [
            NoiseKind::Gaussian,
            NoiseKind::StudentT2,
            NoiseKind::Lognormal,
        ]
        .into_iter()
        .flat_map(|noise| {
            [0.0, 0.06, 0.10]
                .into_iter()
                .map(move |f| Scenario::new(noise, f))
        })
        .collect()
    }
}

#[derive(Debug, Clone)]
pub struct BenchmarkConfig {
    pub reps: usize,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    pub tau: f64,
    pub zeta: f64,
    pub delta: f64,
    pub grid: LambdaGrid,
    /// λ and τ are overridden per method and grid point.
    pub solver: SolverConfig,
    pub fuse_tol: f64,
    pub warm_start: bool,
    pub scenarios: Vec<Scenario>,
    pub methods: Vec<Method>,
    /// Run replications concurrently (needs the `parallel` feature).
    pub parallel: bool,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            reps: 10,
            n: 50,
            p: 20,
            seed: 2019,
            tau: 3.0,
            zeta: DEFAULT_ZETA,
            delta: DEFAULT_DELTA,
            grid: LambdaGrid::default(),
            solver: SolverConfig::default().with_execution(Execution::Sequential),
            fuse_tol: DEFAULT_FUSE_TOL,
            warm_start: true,
            scenarios: Scenario::full_grid(),
            methods: Method::ALL.to_vec(),
            parallel: true,
        }
    }
}

/// Outcome of one replication for one method.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Replicate {
    pub rep: usize,
    pub lambda: f64,
    pub k: usize,
    pub matched: bool,
    pub ari: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellResult {
    pub scenario: String,
    pub method: Method,
    /// In replication order.
    pub replicates: Vec<Replicate>,
}

impl CellResult {
    pub fn aris(&self) -> Vec<f64> {
        self.replicates.iter().map(|r| r.ari).collect()
    }

    pub fn mean_ari(&self) -> f64 {
        let a = self.aris();
        a.iter().sum::<f64>() / a.len() as f64
    }
}

/// Generates replication `rep` of `scenario`; the seed is `base_seed + rep`.
pub fn scenario_dataset(
    cfg: &BenchmarkConfig,
    scenario: &Scenario,
    rep: usize,
) -> Result<crate::simulate::SimulatedDataset> {
    generate(&ScenarioConfig {
        n: cfg.n,
        p: cfg.p,
        noise: scenario.noise,
        contam_frac: scenario.contam_frac,
        seed: cfg.seed.wrapping_add(rep as u64),
        ..Default::default()
    })
}

fn run_replicate(cfg: &BenchmarkConfig, scenario: &Scenario, rep: usize) -> Result<Vec<Replicate>> {
    let data = scenario_dataset(cfg, scenario, rep)?;
    cfg.methods
        .iter()
        .map(|&method| {
            let edges = build_edge_set(&data.x, &method.weights(cfg.zeta, cfg.delta))?;
            let solver = SolverConfig {
                tau: method.tau(cfg.tau),
                ..cfg.solver
            };
            let sel = select_lambda(
                &data.x,
                &edges,
                &solver,
                &cfg.grid,
                2,
                cfg.fuse_tol,
                cfg.warm_start,
            )?;
            Ok(Replicate {
                rep,
                lambda: sel.lambda,
                k: sel.result.k,
                matched: sel.matched,
                ari: adjusted_rand_index(&sel.result.labels, &data.true_labels)?,
            })
        })
        .collect()
}

/// Runs every scenario × replication × method and collects ARIs against the truth.
pub fn run_benchmark(cfg: &BenchmarkConfig) -> Result<Vec<CellResult>> {
    if cfg.reps == 0 {
        return Err(Error::InvalidConfig("reps must be >= 1".into()));
    }
    let jobs: Vec<(usize, usize)> = (0..cfg.scenarios.len())
        .flat_map(|s| (0..cfg.reps).map(move |r| (s, r)))
        .collect();
    let outcomes = map_ordered(&jobs, cfg.parallel, |&(s, r)| {
        run_replicate(cfg, &cfg.scenarios[s], r)
    });

    let mut cells: Vec<CellResult> = cfg
        .scenarios
        .iter()
        .flat_map(|sc| {
            cfg.methods.iter().map(move |&method| CellResult {
                scenario: sc.name.clone(),
                method,
                replicates: Vec::with_capacity(cfg.reps),
            })
        })
        .collect();
    for (&(s, _), outcome) in jobs.iter().zip(outcomes) {
        for (m, rep) in outcome?.into_iter().enumerate() {
            cells[s * cfg.methods.len() + m].replicates.push(rep);
        }
    }
    Ok(cells)
}

pub fn benchmark_rows(cells: &[CellResult]) -> Result<Vec<BenchmarkRow>> {
    cells
        .iter()
        .map(|c| BenchmarkRow::from_replications(c.scenario.clone(), c.method.name(), &c.aris()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn grid_parsing() {
        let g = LambdaGrid::parse_list("1, 0.1,10").unwrap();
        assert_eq!(g.values(), &[0.1, 1.0, 10.0]);
        let g = LambdaGrid::parse_log("0.01:100:5").unwrap();
        let want = [0.01, 0.1, 1.0, 10.0, 100.0];
        for (a, b) in g.values().iter().zip(want) {
            assert!((a / b - 1.0).abs() < 1e-12);
        }
        assert!(LambdaGrid::parse_list("").is_err());
        assert!(LambdaGrid::parse_list("a").is_err());
        assert!(LambdaGrid::parse_log("1:2").is_err());
        assert!(LambdaGrid::parse_log("0:2:3").is_err());
        assert_eq!(LambdaGrid::default().values().len(), 20);
    }

    #[test]
    fn path_zero_and_huge_lambda() {
        let x = DataMatrix::new(array![[0.0, 0.0], [0.3, 0.1], [5.0, 5.0], [5.2, 4.9]]).unwrap();
        let edges = WeightedEdgeSet::uniform(4);
        let cfg = SolverConfig::default();
        let grid = LambdaGrid::parse_list("0,1e4").unwrap();
        let path = solve_path(&x, &edges, &cfg, &grid, DEFAULT_FUSE_TOL, false, None).unwrap();
        assert_eq!(path[0].0.k, 4);
        assert_eq!(path[1].0.k, 1);
    }

    #[test]
    fn selection_finds_two_clusters() {
        let x = DataMatrix::new(array![[0.0, 0.0], [0.3, 0.1], [5.0, 5.0], [5.2, 4.9]]).unwrap();
        let edges = WeightedEdgeSet::uniform(4);
        let cfg = SolverConfig::default();
        for warm in [false, true] {
            let sel = select_lambda(
                &x,
                &edges,
                &cfg,
                &LambdaGrid::default(),
                2,
                DEFAULT_FUSE_TOL,
                warm,
            )
            .unwrap();
            assert!(sel.matched);
            assert_eq!(sel.result.labels, vec![0, 0, 1, 1]);
        }
        let sel = select_lambda(
            &x,
            &edges,
            &cfg,
            &LambdaGrid::parse_list("0").unwrap(),
            5,
            DEFAULT_FUSE_TOL,
            false,
        )
        .unwrap();
        assert!(!sel.matched);
        assert_eq!(sel.result.k, 4);
    }

    #[test]
    fn bisection_recovers_a_skipped_count() {
        let x = DataMatrix::new(array![[0.0, 0.0], [0.3, 0.1], [5.0, 5.0], [5.2, 4.9]]).unwrap();
        let edges = WeightedEdgeSet::uniform(4);
        let cfg = SolverConfig::default();
        let grid = LambdaGrid::parse_list("0,1e4").unwrap();
        let sel = select_lambda(&x, &edges, &cfg, &grid, 2, DEFAULT_FUSE_TOL, false).unwrap();
        assert!(sel.matched);
        assert!(sel.lambda > 0.0 && sel.lambda < 1e4);
        assert_eq!(sel.result.labels, vec![0, 0, 1, 1]);
        assert!(sel.evaluated.len() > 2);
    }

    #[test]
    fn extension_past_the_grid() {
        let x = DataMatrix::new(array![[0.0, 0.0], [0.3, 0.1], [5.0, 5.0], [5.2, 4.9]]).unwrap();
        let edges = WeightedEdgeSet::uniform(4);
        let cfg = SolverConfig::default();
        for grid in ["1e-3", "0"] {
            let grid = LambdaGrid::parse_list(grid).unwrap();
            let sel = select_lambda(&x, &edges, &cfg, &grid, 2, DEFAULT_FUSE_TOL, true).unwrap();
            assert!(sel.matched);
            assert_eq!(sel.result.k, 2);
        }
    }

    #[test]
    fn scenario_names() {
        let names: Vec<String> = Scenario::table().into_iter().map(|s| s.name).collect();
        assert_eq!(
            names,
            [
                "outliers_0pct",
                "outliers_6pct",
                "outliers_10pct",
                "t2",
                "lognormal"
            ]
        );
        assert_eq!(Scenario::full_grid().len(), 9);
    }
}
