//! Cluster assignment from fused centroid differences.

use ndarray::Array2;

use crate::problem::{ClusteringResult, Diagnostics, WeightedEdgeSet};
use crate::solver::SolveReport;

pub const DEFAULT_FUSE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterOptions {
    /// Rows closer than `fuse_tol · (1 + ‖Û‖_F / n)` are also treated as fused.
    pub fuse_tol: f64,
    /// Replace each row of the reported centroids by its cluster mean.
    pub average_centroids: bool,
}

impl Default for ClusterOptions {
    fn default() -> Self {
        ClusterOptions {
            fuse_tol: DEFAULT_FUSE_TOL,
            average_centroids: false,
        }
    }
}

/// Undirected graph of fused pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FusionGraph {
    pub n: usize,
    pub fused: Vec<(usize, usize)>,
}

impl FusionGraph {
    pub fn new(n: usize, fused: Vec<(usize, usize)>) -> Self {
        debug_assert!(fused.iter().all(|&(i, j)| i < n && j < n));
        FusionGraph { n, fused }
    }

    /// Connected-component labels, numbered in order of each component's smallest row.
    pub fn labels(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(i, j) in &self.fused {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                // smaller index becomes the root
                let (lo, hi) = if ri < rj { (ri, rj) } else { (rj, ri) };
                parent[hi] = lo;
            }
        }
        let mut id_of_root = vec![usize::MAX; self.n];
        let mut next = 0;
        (0..self.n)
            .map(|i| {
                let r = find(&mut parent, i);
                if id_of_root[r] == usize::MAX {
                    id_of_root[r] = next;
                    next += 1;
                }
                id_of_root[r]
            })
            .collect()
    }
}

/// Clusters with the default `average_centroids = false`.
pub fn extract_clusters(
    report: &SolveReport,
    edges: &WeightedEdgeSet,
    fuse_tol: f64,
) -> ClusteringResult {
    extract_clusters_with(
        report,
        edges,
        &ClusterOptions {
            fuse_tol,
            ..Default::default()
        },
    )
}

/// Declares edge `(i, j)` fused when `V̂_ij` is exactly zero or the centroid rows
/// are within the relative `fuse_tol`, then labels connected components.
pub fn extract_clusters_with(
    report: &SolveReport,
    edges: &WeightedEdgeSet,
    opts: &ClusterOptions,
) -> ClusteringResult {
    let u = &report.state.u;
    let v = &report.state.v;
    let n = u.nrows();
    let u_norm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dist_tol = opts.fuse_tol * (1.0 + u_norm / n as f64);

    let fused: Vec<(usize, usize)> = edges
        .iter()
        .enumerate()
        .filter(|(r, e)| {
            let v_zero = v.row(*r).iter().all(|&x| x == 0.0);
            v_zero || {
                let d2: f64 = u
                    .row(e.i)
                    .iter()
                    .zip(u.row(e.j).iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                d2.sqrt() <= dist_tol
            }
        })
        .map(|(_, e)| (e.i, e.j))
        .collect();

    let labels = FusionGraph::new(n, fused.clone()).labels();
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let centroids = if opts.average_centroids {
        cluster_means(u, &labels, k)
    } else {
        u.clone()
    };
    ClusteringResult {
        centroids,
        labels,
        fused_edges: fused,
        k,
        diagnostics: Diagnostics {
            iterations: report.iterations,
            final_w_change: report.state.w_change,
            objective_trace: report.objective_trace.clone(),
            converged: report.converged,
        },
    }
}

fn cluster_means(u: &Array2<f64>, labels: &[usize], k: usize) -> Array2<f64> {
    let p = u.ncols();
    let mut sums = Array2::<f64>::zeros((k, p));
    let mut counts = vec![0usize; k];
    for (row, &l) in u.rows().into_iter().zip(labels) {
        sums.row_mut(l).scaled_add(1.0, &row);
        counts[l] += 1;
    }
    let mut out = u.clone();
    for (mut row, &l) in out.rows_mut().into_iter().zip(labels) {
        row.assign(&(&sums.row(l) / counts[l] as f64));
    }
    out
}

/// Number of distinct labels.
pub fn count_clusters(result: &ClusteringResult) -> usize {
    let mut seen: Vec<usize> = result.labels.clone();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}
