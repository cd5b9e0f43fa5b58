//! Two-cluster synthetic data with heavy-tailed noise and arbitrary-outlier contamination.
//!
//! Draw order from the single seeded generator is fixed: centroid 1, centroid 2,
//! noise (row-major), contaminated rows, then for each contaminated row in
//! ascending order its replaced coordinates followed by their values.

use ndarray::Array2;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{ChiSquared, Distribution, LogNormal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::DataMatrix;

/// Generator behind every seeded draw in this crate.
pub type SimRng = ChaCha20Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha20Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseKind {
    Gaussian,
    /// Student t with 2 degrees of freedom.
    StudentT2,
    /// `exp(N(0, 1))`, not centered.
    Lognormal,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Gaussian => "gaussian",
            NoiseKind::StudentT2 => "t2",
            NoiseKind::Lognormal => "lognormal",
        }
    }
}

impl std::str::FromStr for NoiseKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" | "normal" => Ok(NoiseKind::Gaussian),
            "t2" | "student_t2" | "t" => Ok(NoiseKind::StudentT2),
            "lognormal" => Ok(NoiseKind::Lognormal),
            other => Err(Error::InvalidConfig(format!(
                "unknown noise '{other}' (expected gaussian, t2 or lognormal)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n: usize,
    pub p: usize,
    pub noise: NoiseKind,
    /// Fraction of rows contaminated, in `[0, 0.5]`.
    pub contam_frac: f64,
    /// Fraction of coordinates replaced in each contaminated row, in `(0, 1]`.
    pub contam_var_frac: f64,
    pub contam_range: (f64, f64),
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n: 50,
            p: 20,
            noise: NoiseKind::Gaussian,
            contam_frac: 0.0,
            contam_var_frac: 0.2,
            contam_range: (10.0, 20.0),
            seed: 0,
        }
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor() as usize
}

impl ScenarioConfig {
    pub fn contaminated_rows(&self) -> usize {
        round_half_up(self.contam_frac * self.n as f64)
    }

    pub fn contaminated_coords(&self) -> usize {
        round_half_up(self.contam_var_frac * self.p as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return bad(format!("n must be even and >= 2, got {}", self.n));
        }
        if self.p < 2 || !self.p.is_multiple_of(2) {
            return bad(format!("p must be even and >= 2, got {}", self.p));
        }
        if !(0.0..=0.5).contains(&self.contam_frac) {
            return bad(format!(
                "contam_frac must lie in [0, 0.5], got {}",
                self.contam_frac
            ));
        }
        if !(self.contam_var_frac > 0.0 && self.contam_var_frac <= 1.0) {
            return bad(format!(
                "contam_var_frac must lie in (0, 1], got {}",
                self.contam_var_frac
            ));
        }
        let (lo, hi) = self.contam_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad(format!(
                "contam_range must be finite with lo < hi, got ({lo}, {hi})"
            ));
        }
        if self.contaminated_coords() > self.p {
            return bad("contaminated coordinate count exceeds p".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedDataset {
    pub x: DataMatrix,
    /// 0 for the first `n/2` rows, 1 for the rest.
    pub true_labels: Vec<usize>,
    /// `2 × p`
    pub true_centroids: Array2<f64>,
    /// Sorted row indices.
    pub contaminated_rows: Vec<usize>,
}

pub fn generate(cfg: &ScenarioConfig) -> Result<SimulatedDataset> {
    cfg.validate()?;
    let (n, p) = (cfg.n, cfg.p);
    let half = n / 2;
    let mut rng = rng_from_seed(cfg.seed);

    let mut centroids = Array2::<f64>::zeros((2, p));
    for j in 0..p {
        centroids[(0, j)] = rng.sample(StandardNormal);
    }
    for j in 0..p {
        let mean = if j < p / 2 { 3.0 } else { -3.0 };
        centroids[(1, j)] = mean + rng.sample::<f64, _>(StandardNormal);
    }

    let true_labels: Vec<usize> = (0..n).map(|i| usize::from(i >= half)).collect();
    let mut values = Array2::<f64>::zeros((n, p));
    let chi2 = ChiSquared::new(2.0).expect("valid degrees of freedom");
    let lognormal = LogNormal::new(0.0, 1.0).expect("valid lognormal");
    for i in 0..n {
        for j in 0..p {
            let eps = match cfg.noise {
                NoiseKind::Gaussian => rng.sample(StandardNormal),
                NoiseKind::StudentT2 => {
                    let z: f64 = rng.sample(StandardNormal);
                    let v: f64 = chi2.sample(&mut rng);
                    z / (v / 2.0).sqrt()
                }
                NoiseKind::Lognormal => lognormal.sample(&mut rng),
            };
            values[(i, j)] = centroids[(true_labels[i], j)] + eps;
        }
    }

    let m = cfg.contaminated_rows();
    let q = cfg.contaminated_coords();
    let mut rows = sample(&mut rng, n, m).into_vec();
    rows.sort_unstable();
    let (lo, hi) = cfg.contam_range;
    let outlier =
        Uniform::new_inclusive(lo, hi).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    for &i in &rows {
        let mut coords = sample(&mut rng, p, q).into_vec();
        coords.sort_unstable();
        for j in coords {
            values[(i, j)] = outlier.sample(&mut rng);
        }
    }

    Ok(SimulatedDataset {
        x: DataMatrix::new(values)?,
        true_labels,
        true_centroids: centroids,
        contaminated_rows: rows,
    })
}
