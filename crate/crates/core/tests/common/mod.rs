//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the crate's numerical kernels; only data types are shared.

#![allow(dead_code)]

use nalgebra::DMatrix;
use ndarray::Array2;
use rand::Rng;

pub fn huber(a: f64, tau: f64) -> f64 {
    if tau.is_infinite() || a.abs() <= tau {
        a * a / 2.0
    } else {
        tau * a.abs() - tau * tau / 2.0
    }
}

fn huber_grad(a: f64, tau: f64) -> f64 {
    if tau.is_infinite() {
        a
    } else {
        a.max(-tau).min(tau)
    }
}

/// Minimizes a convex 1-D function on `[lo, hi]` given its value `f` and a
/// (sub)derivative `df`: dense scan of `f`, then bisection on the sign of `df`
/// inside the best scan cell.
pub fn brute_min_1d(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    const SCAN: usize = 4000;
    let h = (hi - lo) / SCAN as f64;
    let mut best = (f64::INFINITY, lo);
    for k in 0..=SCAN {
        let x = lo + h * k as f64;
        let v = f(x);
        if v < best.0 {
            best = (v, x);
        }
    }
    let (mut a, mut b) = (best.1 - h, best.1 + h);
    for _ in 0..200 {
        let mid = (a + b) / 2.0;
        if mid <= a || mid >= b {
            break;
        }
        if df(mid) > 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    (a + b) / 2.0
}

/// `argmin_w ℓ_τ(x − w) + (ρ/2)(w − a)²` by brute force.
pub fn w_update_oracle(x: f64, a: f64, rho: f64, tau: f64) -> f64 {
    let lo = x.min(a) - 1.0;
    let hi = x.max(a) + 1.0;
    brute_min_1d(
        |w| huber(x - w, tau) + rho / 2.0 * (w - a) * (w - a),
        |w| -huber_grad(x - w, tau) + rho * (w - a),
        lo,
        hi,
    )
}

fn ball_project(s: &mut [f64], r: f64) {
    let norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > r {
        s.iter_mut().for_each(|v| *v *= r / norm);
    }
}

/// `argmin_v t‖v‖ + ½‖v − z‖²` through projected gradient on the dual
/// `min_{‖s‖ ≤ t} ½‖s − z‖²`, recovering `v = z − s`.
pub fn group_shrink_oracle(z: &[f64], t: f64) -> Vec<f64> {
    let mut s = vec![0.0; z.len()];
    for _ in 0..400 {
        for (si, zi) in s.iter_mut().zip(z) {
            *si -= 0.5 * (*si - zi);
        }
        ball_project(&mut s, t);
    }
    z.iter().zip(&s).map(|(zi, si)| zi - si).collect()
}

/// `(i, j, w)` triples.
pub type Pairs = Vec<(usize, usize, f64)>;

pub fn objective(x: &Array2<f64>, u: &Array2<f64>, pairs: &Pairs, lambda: f64, tau: f64) -> f64 {
    let loss: f64 = x.iter().zip(u.iter()).map(|(a, b)| huber(a - b, tau)).sum();
    let pen: f64 = pairs
        .iter()
        .map(|&(i, j, w)| {
            let d2: f64 = (0..u.ncols())
                .map(|k| (u[(i, k)] - u[(j, k)]).powi(2))
                .sum();
            w * d2.sqrt()
        })
        .sum();
    loss + lambda * pen
}

/// Normalized subgradient descent with geometrically shrinking step stages,
/// each restarted from the best point so far. Returns the best objective and point.
pub fn subgradient_oracle(
    x: &Array2<f64>,
    pairs: &Pairs,
    lambda: f64,
    tau: f64,
) -> (f64, Array2<f64>) {
    const STAGES: usize = 30;
    const PER_STAGE: usize = 40_000;
    let (n, p) = x.dim();
    let scale = (x.iter().map(|v| v * v).sum::<f64>() / (n * p) as f64)
        .sqrt()
        .max(1.0);
    let mut best_u = x.clone();
    let mut best = objective(x, x, pairs, lambda, tau);
    let mut g = Array2::<f64>::zeros((n, p));
    for stage in 0..STAGES {
        let step = 0.2 * scale * 0.5f64.powi(stage as i32);
        let mut u = best_u.clone();
        for _ in 0..PER_STAGE {
            for i in 0..n {
                for k in 0..p {
                    g[(i, k)] = -huber_grad(x[(i, k)] - u[(i, k)], tau);
                }
            }
            for &(i, j, w) in pairs {
                let d2: f64 = (0..p).map(|k| (u[(i, k)] - u[(j, k)]).powi(2)).sum();
                let d = d2.sqrt();
                if d > 0.0 {
                    for k in 0..p {
                        let c = lambda * w * (u[(i, k)] - u[(j, k)]) / d;
                        g[(i, k)] += c;
                        g[(j, k)] -= c;
                    }
                }
            }
            let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            if gn == 0.0 {
                break;
            }
            u.scaled_add(-step / gn, &g);
            let f = objective(x, &u, pairs, lambda, tau);
            if f < best {
                best = f;
                best_u.assign(&u);
            }
        }
    }
    (best, best_u)
}

/// Squared-loss convex clustering by the classical two-block ADMM
/// (`V = EU` split only), with a dense explicit difference matrix.
pub fn squared_admm_oracle(x: &Array2<f64>, pairs: &Pairs, lambda: f64) -> Array2<f64> {
    let (n, p) = x.dim();
    let m = pairs.len();
    let rho = 1.0;
    let mut e = DMatrix::<f64>::zeros(m, n);
    for (r, &(i, j, _)) in pairs.iter().enumerate() {
        e[(r, i)] = 1.0;
        e[(r, j)] = -1.0;
    }
    let lhs = DMatrix::<f64>::identity(n, n) + e.transpose() * &e * rho;
    let inv = lhs.try_inverse().expect("I + ρEᵀE is positive definite");
    let xm = DMatrix::from_fn(n, p, |i, k| x[(i, k)]);
    let mut u = xm.clone();
    let mut v = &e * &u;
    let mut q = DMatrix::<f64>::zeros(m, p);
    for _ in 0..2_000_000 {
        let u_next = &inv * (&xm + e.transpose() * (&v - &q) * rho);
        let eu = &e * &u_next;
        let mut v_next = &eu + &q;
        for (r, &(_, _, w)) in pairs.iter().enumerate() {
            let mut row: Vec<f64> = v_next.row(r).iter().copied().collect();
            let t = lambda * w / rho;
            let norm = row.iter().map(|a| a * a).sum::<f64>().sqrt();
            let scale = if norm <= t { 0.0 } else { 1.0 - t / norm };
            row.iter_mut().for_each(|a| *a *= scale);
            for k in 0..p {
                v_next[(r, k)] = row[k];
            }
        }
        q += &eu - &v_next;
        let du = (&u_next - &u).amax();
        let primal = (&eu - &v_next).amax();
        let dual = (&v_next - &v).amax();
        u = u_next;
        v = v_next;
        if du < 1e-14 && primal < 1e-13 && dual < 1e-13 {
            break;
        }
    }
    Array2::from_shape_fn((n, p), |(i, k)| u[(i, k)])
}

/// Adjusted Rand index straight from the definition over all `n(n−1)/2` pairs.
pub fn ari_pair_counting(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut only_a, mut only_b, mut total) = (0f64, 0f64, 0f64, 0f64);
    for i in 0..n {
        for j in i + 1..n {
            let sa = a[i] == a[j];
            let sb = b[i] == b[j];
            total += 1.0;
            match (sa, sb) {
                (true, true) => both += 1.0,
                (true, false) => only_a += 1.0,
                (false, true) => only_b += 1.0,
                _ => {}
            }
        }
    }
    let pa = both + only_a;
    let pb = both + only_b;
    let expected = pa * pb / total;
    let max = (pa + pb) / 2.0;
    if max == expected {
        let same = (0..n).all(|i| (0..n).all(|j| (a[i] == a[j]) == (b[i] == b[j])));
        return if same { 1.0 } else { 0.0 };
    }
    (both - expected) / (max - expected)
}

pub fn random_partition(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let k = rng.random_range(1..=n.min(8));
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn frobenius(a: &Array2<f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}
