//! Domain types shared across the crate and the robust convex clustering objective.
//!
//! All matrices are row-major `n × p` with one observation per row. Edge lists
//! are kept sorted by `(i, j)` so that the row order of the pairwise-difference
//! operator is deterministic.

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::huber::{huber_loss, HuberParams};
use crate::par::Execution;

fn all_finite(values: &ArrayView2<'_, f64>) -> bool {
    values.iter().all(|v| v.is_finite())
}

/// An `n × p` matrix of observations.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: Array2<f64>,
}

impl DataMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        let (n, p) = values.dim();
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "data matrix needs at least 2 rows, got {n}"
            )));
        }
        if p < 1 {
            return Err(Error::InvalidInput(
                "data matrix needs at least 1 column".into(),
            ));
        }
        if !all_finite(&values.view()) {
            return Err(Error::InvalidInput(
                "data matrix contains non-finite entries".into(),
            ));
        }
        Ok(DataMatrix { values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if let Some((r, _)) = rows.iter().enumerate().find(|(_, row)| row.len() != p) {
            return Err(Error::Dimension(format!(
                "row {r} has length {} but row 0 has length {p}",
                rows[r].len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let values = Array2::from_shape_vec((rows.len(), p), flat)
            .map_err(|e| Error::Dimension(e.to_string()))?;
        Self::new(values)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.values
    }
}

/// Estimated centroids, one row per observation.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidMatrix {
    values: Array2<f64>,
}

impl CentroidMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if !all_finite(&values.view()) {
            return Err(Error::InvalidInput(
                "centroid matrix contains non-finite entries".into(),
            ));
        }
        Ok(CentroidMatrix { values })
    }

    /// Centroid matrix paired with `data`; checks the shapes agree.
    pub fn for_data(values: Array2<f64>, data: &DataMatrix) -> Result<Self> {
        if values.dim() != data.values().dim() {
            return Err(Error::Dimension(format!(
                "centroids are {:?} but data is {:?}",
                values.dim(),
                data.values().dim()
            )));
        }
        Self::new(values)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.values
    }
}

/// A fusion edge between rows `i < j` with positive weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Sorted, duplicate-free list of weighted pairs defining the fusion penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedEdgeSet {
    n: usize,
    edges: Vec<Edge>,
}

impl WeightedEdgeSet {
    /// Builds an edge set, sorting by `(i, j)`.
    ///
    /// Rejects out-of-range or unordered endpoints, non-positive or non-finite
    /// weights, and duplicate pairs.
    pub fn new(n: usize, mut edges: Vec<Edge>) -> Result<Self> {
        for e in &edges {
            if !(e.i < e.j && e.j < n) {
                return Err(Error::InvalidInput(format!(
                    "edge ({}, {}) must satisfy i < j < n = {n}",
                    e.i, e.j
                )));
            }
            if !(e.weight > 0.0 && e.weight.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "edge ({}, {}) has weight {}; weights must be finite and > 0",
                    e.i, e.j, e.weight
                )));
            }
        }
        edges.sort_by_key(|e| (e.i, e.j));
        if let Some(w) = edges
            .windows(2)
            .find(|w| (w[0].i, w[0].j) == (w[1].i, w[1].j))
        {
            return Err(Error::InvalidInput(format!(
                "duplicate edge ({}, {})",
                w[0].i, w[0].j
            )));
        }
        Ok(WeightedEdgeSet { n, edges })
    }

    /// Complete graph on `n` nodes with every weight equal to one.
    pub fn uniform(n: usize) -> Self {
        let edges = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| Edge { i, j, weight: 1.0 }))
            .collect();
        WeightedEdgeSet { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Edge> {
        self.edges.iter()
    }

    /// True when every pair `i < j` is present.
    pub fn is_complete(&self) -> bool {
        self.n >= 1 && self.edges.len() == self.n * (self.n - 1) / 2
    }
}

/// Tuning and stopping parameters for the ADMM solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Fusion strength.
    pub lambda: f64,
    /// Huber robustification parameter; `f64::INFINITY` gives the squared loss.
    pub tau: f64,
    /// Augmented-Lagrangian penalty.
    pub rho: f64,
    /// Stop once `‖W(t) − W(t−1)‖_F ≤ tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Dual step in scaled coordinates. `1.0` is standard scaled ADMM; setting it
    /// equal to `rho` reproduces the printed dual update `Y ← Y − ρ(EU − V)`.
    pub dual_step: f64,
    pub execution: Execution,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: 1.0,
            tau: 3.0,
            rho: 1.0,
            tol: 1e-6,
            max_iter: 10_000,
            dual_step: 1.0,
            execution: Execution::Auto,
        }
    }
}

impl SolverConfig {
    pub fn new(lambda: f64, tau: f64) -> Self {
        SolverConfig {
            lambda,
            tau,
            ..Default::default()
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho = rho;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_dual_step(mut self, dual_step: f64) -> Self {
        self.dual_step = dual_step;
        self
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    pub fn huber(&self) -> Result<HuberParams> {
        HuberParams::new(self.tau)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!(
                "lambda must be finite and >= 0, got {}",
                self.lambda
            ));
        }
        if self.tau.is_nan() || self.tau <= 0.0 {
            return bad(format!("tau must be > 0 (or inf), got {}", self.tau));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad(format!("rho must be finite and > 0, got {}", self.rho));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        if self.max_iter < 1 {
            return bad("max_iter must be >= 1".into());
        }
        if !(self.dual_step > 0.0 && self.dual_step.is_finite()) {
            return bad(format!(
                "dual_step must be finite and > 0, got {}",
                self.dual_step
            ));
        }
        Ok(())
    }
}

/// Primal blocks `U`, `W`, `V` and scaled dual blocks `Y`, `Z` of the ADMM iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub u: Array2<f64>,
    pub w: Array2<f64>,
    pub v: Array2<f64>,
    pub y: Array2<f64>,
    pub z: Array2<f64>,
    pub iter: usize,
    /// `‖W(t) − W(t−1)‖_F` at the last completed iteration.
    pub w_change: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: usize,
    pub final_w_change: f64,
    pub objective_trace: Vec<f64>,
    pub converged: bool,
}

/// Cluster assignments extracted from a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusteringResult {
    pub centroids: Array2<f64>,
    /// Cluster id per row; ids are numbered by smallest member row.
    pub labels: Vec<usize>,
    pub fused_edges: Vec<(usize, usize)>,
    pub k: usize,
    pub diagnostics: Diagnostics,
}

fn check_shapes(x: &DataMatrix, u: &ArrayView2<'_, f64>, edges: &WeightedEdgeSet) -> Result<()> {
    if u.dim() != x.values().dim() {
        return Err(Error::Dimension(format!(
            "centroids are {:?} but data is {:?}",
            u.dim(),
            x.values().dim()
        )));
    }
    if edges.n() != x.n() {
        return Err(Error::Dimension(format!(
            "edge set has {} nodes but data has {} rows",
            edges.n(),
            x.n()
        )));
    }
    Ok(())
}

/// Huber data-fidelity term `Σ_ij ℓ_τ(X_ij − U_ij)`.
pub fn data_loss(x: &ArrayView2<'_, f64>, u: &ArrayView2<'_, f64>, huber: HuberParams) -> f64 {
    x.iter()
        .zip(u.iter())
        .map(|(&xv, &uv)| huber_loss(xv - uv, huber))
        .sum()
}

/// Weighted fusion penalty `Σ_(i,j) w_ij ‖U_i − U_j‖₂`, without the `λ` factor.
pub fn fusion_penalty(u: &ArrayView2<'_, f64>, edges: &WeightedEdgeSet) -> f64 {
    edges
        .iter()
        .map(|e| {
            let ui = u.row(e.i);
            let uj = u.row(e.j);
            let sq: f64 = ui
                .iter()
                .zip(uj.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            e.weight * sq.sqrt()
        })
        .sum()
}

/// Robust convex clustering objective evaluated at `u`.
pub fn objective_at(
    x: &DataMatrix,
    u: &ArrayView2<'_, f64>,
    edges: &WeightedEdgeSet,
    cfg: &SolverConfig,
) -> Result<f64> {
    check_shapes(x, u, edges)?;
    let huber = cfg.huber()?;
    Ok(data_loss(&x.view(), u, huber) + cfg.lambda * fusion_penalty(u, edges))
}

/// `Σ_ij ℓ_τ(X_ij − U_ij) + λ Σ w_ij ‖U_i − U_j‖₂`.
pub fn objective(
    x: &DataMatrix,
    u: &CentroidMatrix,
    edges: &WeightedEdgeSet,
    cfg: &SolverConfig,
) -> Result<f64> {
    objective_at(x, &u.view(), edges, cfg)
}
