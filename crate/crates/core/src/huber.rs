//! Huber loss and the proximal maps used by the ADMM updates.

use ndarray::ArrayViewMut1;

use crate::error::{Error, Result};

/// Robustification parameter of the Huber loss.
///
/// `tau = +inf` is a valid value and turns every branch test quadratic, which
/// recovers squared-loss convex clustering with no separate code path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuberParams {
    tau: f64,
}

impl HuberParams {
    pub fn new(tau: f64) -> Result<Self> {
        if tau > 0.0 {
            Ok(HuberParams { tau })
        } else {
            Err(Error::InvalidConfig(format!(
                "tau must be > 0 (or inf), got {tau}"
            )))
        }
    }

    pub fn squared() -> Self {
        HuberParams { tau: f64::INFINITY }
    }

    pub fn tau(self) -> f64 {
        self.tau
    }

    pub fn is_squared(self) -> bool {
        self.tau == f64::INFINITY
    }
}

/// `ℓ_τ(a)`: `a²/2` for `|a| ≤ τ`, `τ|a| − τ²/2` otherwise.
#[inline]
pub fn huber_loss(a: f64, params: HuberParams) -> f64 {
    let tau = params.tau;
    let abs = a.abs();
    if abs <= tau {
        0.5 * a * a
    } else {
        tau * abs - 0.5 * tau * tau
    }
}

/// Derivative of the Huber loss, `clamp(a, −τ, τ)`.
#[inline]
pub fn huber_derivative(a: f64, params: HuberParams) -> f64 {
    a.clamp(-params.tau, params.tau)
}

/// `S(a, b) = sign(a) · max(|a| − b, 0)`.
#[inline]
pub fn soft_threshold(a: f64, b: f64) -> f64 {
    debug_assert!(b >= 0.0);
    let shrunk = a.abs() - b;
    if shrunk > 0.0 {
        shrunk.copysign(a)
    } else {
        0.0
    }
}

/// Minimizer over `w` of `ℓ_τ(x − w) + (ρ/2)(w − u_minus_z)²`.
///
/// At the branch boundary both closed forms coincide; the quadratic one is taken.
#[inline]
pub fn w_update_scalar(x: f64, u_minus_z: f64, rho: f64, params: HuberParams) -> f64 {
    let gap = x - u_minus_z;
    if (rho * gap / (1.0 + rho)).abs() <= params.tau {
        (x + rho * u_minus_z) / (1.0 + rho)
    } else {
        x - soft_threshold(gap, params.tau / rho)
    }
}

/// Block soft-threshold `[1 − threshold/‖e‖₂]₊ · e`, in place.
///
/// Zero vectors, and any `e` with `‖e‖₂ ≤ threshold`, map to exactly zero.
/// Returns the norm of the output.
pub fn group_shrink_in_place(mut e: ArrayViewMut1<'_, f64>, threshold: f64) -> f64 {
    let norm = e.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= threshold {
        e.fill(0.0);
        0.0
    } else {
        let scale = 1.0 - threshold / norm;
        e.mapv_inplace(|v| v * scale);
        norm - threshold
    }
}

/// Block soft-threshold of `e`; see [`group_shrink_in_place`].
pub fn group_shrink(e: &[f64], threshold: f64) -> Vec<f64> {
    let mut out = e.to_vec();
    group_shrink_in_place(ArrayViewMut1::from(out.as_mut_slice()), threshold);
    out
}
