//! Robust convex clustering.
//!
//! Estimates one centroid per observation by minimizing a Huber-loss fit plus a
//! weighted fused group-lasso penalty on centroid differences, solved with ADMM.
//! Observations whose centroids fuse belong to the same cluster.

pub mod clusters;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod graph;
pub mod huber;
pub mod io;
pub mod par;
pub mod problem;
pub mod simulate;
pub mod solver;
pub mod weights;

pub use clusters::{
    count_clusters, extract_clusters, extract_clusters_with, ClusterOptions, FusionGraph,
};
pub use error::{Error, Result};
pub use eval::adjusted_rand_index;
pub use experiment::{
    run_benchmark, select_lambda, solve_path, BenchmarkConfig, LambdaGrid, Method, Scenario,
};
pub use graph::DifferenceOperator;
pub use huber::HuberParams;
pub use par::Execution;
pub use problem::{
    objective, CentroidMatrix, ClusteringResult, DataMatrix, Diagnostics, Edge, SolverConfig,
    SolverState, WeightedEdgeSet,
};
pub use simulate::{generate, NoiseKind, ScenarioConfig, SimulatedDataset};
pub use solver::{
    init_state, init_state_from, kkt_residual, median_start, solve, solve_from, SolveReport,
};
pub use weights::{build_edge_set, WeightKind, WeightScheme};
