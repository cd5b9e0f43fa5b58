//! Fusion weights: Gaussian kernel, truncated (robust) Gaussian kernel, and uniform.

use ndarray::ArrayView1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_ordered, Execution};
use crate::problem::{DataMatrix, Edge, WeightedEdgeSet};

pub const DEFAULT_ZETA: f64 = 0.01;
pub const DEFAULT_DELTA: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    /// `exp(−ζ‖x_i − x_j‖²)`
    Gaussian,
    /// `exp(−ζ Σ_k min((x_ik − x_jk)², δ²))`
    Robust,
    /// All weights one.
    Uniform,
}

impl std::str::FromStr for WeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(WeightKind::Gaussian),
            "robust" => Ok(WeightKind::Robust),
            "uniform" => Ok(WeightKind::Uniform),
            other => Err(Error::InvalidConfig(format!(
                "unknown weight scheme '{other}' (expected gaussian, robust or uniform)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightScheme {
    pub kind: WeightKind,
    pub zeta: f64,
    pub delta: f64,
    /// Pairs with weight `≤ w_min` are dropped from the edge set.
    pub w_min: f64,
}

impl WeightScheme {
    pub fn gaussian(zeta: f64) -> Self {
        WeightScheme {
            kind: WeightKind::Gaussian,
            zeta,
            delta: DEFAULT_DELTA,
            w_min: 0.0,
        }
    }

    pub fn robust(zeta: f64, delta: f64) -> Self {
        WeightScheme {
            kind: WeightKind::Robust,
            zeta,
            delta,
            w_min: 0.0,
        }
    }

    pub fn uniform() -> Self {
        WeightScheme {
            kind: WeightKind::Uniform,
            zeta: DEFAULT_ZETA,
            delta: DEFAULT_DELTA,
            w_min: 0.0,
        }
    }

    pub fn with_w_min(mut self, w_min: f64) -> Self {
        self.w_min = w_min;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind != WeightKind::Uniform && !(self.zeta > 0.0 && self.zeta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "zeta must be > 0, got {}",
                self.zeta
            )));
        }
        if self.kind == WeightKind::Robust && !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "delta must be > 0, got {}",
                self.delta
            )));
        }
        if self.w_min.is_nan() || self.w_min < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "w_min must be >= 0, got {}",
                self.w_min
            )));
        }
        Ok(())
    }

    pub fn weight(&self, xi: ArrayView1<'_, f64>, xj: ArrayView1<'_, f64>) -> f64 {
        match self.kind {
            WeightKind::Gaussian => gaussian_weight(xi, xj, self.zeta),
            WeightKind::Robust => robust_weight(xi, xj, self.zeta, self.delta),
            WeightKind::Uniform => 1.0,
        }
    }
}

pub fn gaussian_weight(xi: ArrayView1<'_, f64>, xj: ArrayView1<'_, f64>, zeta: f64) -> f64 {
    debug_assert_eq!(xi.len(), xj.len());
    let sq: f64 = xi
        .iter()
        .zip(xj.iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    (-zeta * sq).exp()
}

/// Gaussian kernel with each squared coordinate difference capped at `δ²`, so a
/// handful of wild coordinates cannot drive the weight to zero.
pub fn robust_weight(
    xi: ArrayView1<'_, f64>,
    xj: ArrayView1<'_, f64>,
    zeta: f64,
    delta: f64,
) -> f64 {
    debug_assert_eq!(xi.len(), xj.len());
    let cap = delta * delta;
    let sq: f64 = xi
        .iter()
        .zip(xj.iter())
        .map(|(a, b)| ((a - b) * (a - b)).min(cap))
        .sum();
    (-zeta * sq).exp()
}

/// Evaluates `scheme` on every pair `i < j` and keeps the pairs with weight above `w_min`.
pub fn build_edge_set(x: &DataMatrix, scheme: &WeightScheme) -> Result<WeightedEdgeSet> {
    scheme.validate()?;
    let n = x.n();
    let rows: Vec<usize> = (0..n).collect();
    let work = n * n.saturating_sub(1) / 2 * x.p();
    let per_row = map_ordered(&rows, Execution::Auto.use_parallel(work), |&i| {
        (i + 1..n)
            .filter_map(|j| {
                let weight = scheme.weight(x.row(i), x.row(j));
                (weight > scheme.w_min).then_some(Edge { i, j, weight })
            })
            .collect::<Vec<_>>()
    });
    WeightedEdgeSet::new(n, per_row.into_iter().flatten().collect())
}
