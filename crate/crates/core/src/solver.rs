//! ADMM for robust convex clustering.
//!
//! The problem is split as
//!
//! ```text
//! minimize  Σ ℓ_τ(X − W) + λ Σ w_ij ‖V_ij‖₂
//! s.t.      U = W,  E U = V
//! ```
//!
//! and each iteration runs, in order: the U-update (a linear solve with
//! `EᵀE + I`), the elementwise Huber prox for W, the block soft-threshold for
//! each row of V, then the scaled dual updates for Y and Z. Iteration stops
//! when `‖W(t) − W(t−1)‖_F ≤ tol`.

use ndarray::{Array2, ArrayView2, Axis, Zip};

use crate::error::{Error, Result};
use crate::graph::DifferenceOperator;
use crate::huber::{group_shrink_in_place, huber_derivative, w_update_scalar};
use crate::par::zip_for_each;
use crate::problem::{
    objective_at, CentroidMatrix, DataMatrix, SolverConfig, SolverState, WeightedEdgeSet,
};

/// Iterations between non-finite checks on the full state.
const FINITE_CHECK_INTERVAL: usize = 100;

/// Per-iteration primal feasibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimalResidual {
    /// `‖V − EU‖_F`
    pub fusion: f64,
    /// `‖W − U‖_F`
    pub copy: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub state: SolverState,
    pub converged: bool,
    pub iterations: usize,
    pub objective_trace: Vec<f64>,
    pub primal_residuals: Vec<PrimalResidual>,
    /// Norm of the minimum-norm subgradient of the objective at the final `U`.
    pub kkt_residual: f64,
}

impl SolveReport {
    pub fn centroids(&self) -> &Array2<f64> {
        &self.state.u
    }

    pub fn final_residual(&self) -> Option<PrimalResidual> {
        self.primal_residuals.last().copied()
    }
}

fn check_inputs(x: &DataMatrix, edges: &WeightedEdgeSet) -> Result<()> {
    if edges.n() != x.n() {
        return Err(Error::Dimension(format!(
            "edge set has {} nodes but data has {} rows",
            edges.n(),
            x.n()
        )));
    }
    Ok(())
}

fn frobenius(a: &ArrayView2<'_, f64>) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn frobenius_diff(a: &ArrayView2<'_, f64>, b: &ArrayView2<'_, f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Starting point `U = W = X`, `V = EX`, `Y = Z = 0`.
pub fn init_state(x: &DataMatrix, edges: &WeightedEdgeSet) -> Result<SolverState> {
    check_inputs(x, edges)?;
    Ok(state_at(x.values().clone(), edges, x.p()))
}

/// Starting point `U = W = U₀`, `V = EU₀`, `Y = Z = 0`.
///
/// Under the Huber loss each iteration moves a centroid by a bounded amount, so
/// starting from the data takes a number of iterations proportional to the size
/// of gross outliers. A robust start such as [`median_start`] avoids that.
pub fn init_state_from(
    x: &DataMatrix,
    edges: &WeightedEdgeSet,
    u0: &CentroidMatrix,
) -> Result<SolverState> {
    check_inputs(x, edges)?;
    if u0.values().dim() != x.values().dim() {
        return Err(Error::Dimension(
            "starting centroids do not match data".into(),
        ));
    }
    Ok(state_at(u0.values().clone(), edges, x.p()))
}

/// Every row set to the coordinatewise median of `X`.
pub fn median_start(x: &DataMatrix) -> CentroidMatrix {
    let (n, p) = (x.n(), x.p());
    let medians: Vec<f64> = (0..p)
        .map(|j| {
            let mut col: Vec<f64> = x.values().column(j).to_vec();
            col.sort_by(f64::total_cmp);
            if n % 2 == 1 {
                col[n / 2]
            } else {
                (col[n / 2 - 1] + col[n / 2]) / 2.0
            }
        })
        .collect();
    CentroidMatrix::new(Array2::from_shape_fn((n, p), |(_, j)| medians[j])).expect("finite medians")
}

fn state_at(u: Array2<f64>, edges: &WeightedEdgeSet, p: usize) -> SolverState {
    let n = u.nrows();
    let mut v = Array2::zeros((edges.len(), p));
    for (mut row, e) in v.rows_mut().into_iter().zip(edges.iter()) {
        Zip::from(&mut row)
            .and(u.row(e.i))
            .and(u.row(e.j))
            .for_each(|o, &a, &b| *o = a - b);
    }
    SolverState {
        w: u.clone(),
        u,
        v,
        y: Array2::zeros((edges.len(), p)),
        z: Array2::zeros((n, p)),
        iter: 0,
        w_change: f64::INFINITY,
        objective: f64::NAN,
    }
}

/// Runs ADMM from [`init_state`].
pub fn solve(x: &DataMatrix, edges: &WeightedEdgeSet, cfg: &SolverConfig) -> Result<SolveReport> {
    solve_from(x, edges, cfg, init_state(x, edges)?)
}

/// Runs ADMM from a caller-supplied state (e.g. a warm start from a nearby `λ`).
pub fn solve_from(
    x: &DataMatrix,
    edges: &WeightedEdgeSet,
    cfg: &SolverConfig,
    mut state: SolverState,
) -> Result<SolveReport> {
    cfg.validate()?;
    check_inputs(x, edges)?;
    let (n, p) = (x.n(), x.p());
    let m = edges.len();
    if state.u.dim() != (n, p)
        || state.w.dim() != (n, p)
        || state.z.dim() != (n, p)
        || state.v.dim() != (m, p)
        || state.y.dim() != (m, p)
    {
        return Err(Error::Dimension(
            "initial state does not match data and edge set".into(),
        ));
    }

    let huber = cfg.huber()?;
    let op = DifferenceOperator::new(edges)?;
    let rho = cfg.rho;
    let eta = cfg.dual_step;
    let thresholds: Vec<f64> = edges.iter().map(|e| cfg.lambda * e.weight / rho).collect();
    let par_nodes = cfg.execution.use_parallel(n * p);
    let par_edges = cfg.execution.use_parallel(m * p);

    let xv = x.view();
    let mut rhs = Array2::<f64>::zeros((n, p));
    let mut vy = Array2::<f64>::zeros((m, p));
    let mut eu = Array2::<f64>::zeros((m, p));
    let mut w_prev = state.w.clone();

    let mut objective_trace = Vec::new();
    let mut primal_residuals = Vec::new();
    let mut converged = false;
    let start_iter = state.iter;

    for t in 1..=cfg.max_iter {
        // (a) U = (EᵀE + I)⁻¹ [Eᵀ(V + Y) + (W + Z)]
        zip_for_each!(
            par_edges,
            Zip::from(&mut vy).and(&state.v).and(&state.y),
            |o, &a, &b| *o = a + b
        );
        op.apply_et_into(&vy.view(), rhs.view_mut(), par_edges);
        zip_for_each!(
            par_nodes,
            Zip::from(&mut rhs).and(&state.w).and(&state.z),
            |o, &a, &b| *o += a + b
        );
        op.solve_normal_in_place(rhs.view_mut());
        std::mem::swap(&mut state.u, &mut rhs);

        // (b) elementwise Huber prox for W
        std::mem::swap(&mut state.w, &mut w_prev);
        zip_for_each!(
            par_nodes,
            Zip::from(&mut state.w).and(&xv).and(&state.u).and(&state.z),
            |w, &xi, &u, &z| *w = w_update_scalar(xi, u - z, rho, huber)
        );

        // (c) V = group_shrink(EU − Y), then (d) Y ← Y − η(EU − V)
        op.apply_e_into(&state.u.view(), eu.view_mut(), par_edges);
        zip_for_each!(
            par_edges,
            Zip::indexed(state.v.axis_iter_mut(Axis(0)))
                .and(state.y.axis_iter_mut(Axis(0)))
                .and(eu.axis_iter(Axis(0))),
            |r,
             mut v: ndarray::ArrayViewMut1<'_, f64>,
             mut y: ndarray::ArrayViewMut1<'_, f64>,
             d: ndarray::ArrayView1<'_, f64>| {
                Zip::from(&mut v)
                    .and(&y)
                    .and(&d)
                    .for_each(|v, &y, &d| *v = d - y);
                group_shrink_in_place(v.view_mut(), thresholds[r]);
                Zip::from(&mut y)
                    .and(&v)
                    .and(&d)
                    .for_each(|y, &v, &d| *y -= eta * (d - v));
            }
        );

        // (e) Z ← Z − η(U − W)
        zip_for_each!(
            par_nodes,
            Zip::from(&mut state.z).and(&state.u).and(&state.w),
            |z, &u, &w| *z -= eta * (u - w)
        );

        state.iter = start_iter + t;
        state.w_change = frobenius_diff(&state.w.view(), &w_prev.view());
        state.objective = objective_at(x, &state.u.view(), edges, cfg)?;
        objective_trace.push(state.objective);
        primal_residuals.push(PrimalResidual {
            fusion: frobenius_diff(&state.v.view(), &eu.view()),
            copy: frobenius_diff(&state.w.view(), &state.u.view()),
        });

        // From the standard start U = W = X the first pass leaves W unchanged, so the
        // stopping test only applies from the second pass on.
        let converged_now = t >= 2 && state.w_change <= cfg.tol;
        if t % FINITE_CHECK_INTERVAL == 0
            || converged_now
            || t == cfg.max_iter
            || !state.objective.is_finite()
        {
            check_finite(&state)?;
        }
        if converged_now {
            converged = true;
            break;
        }
    }

    let iterations = state.iter - start_iter;
    let seed = state.y.mapv(|y| -rho * y);
    let kkt = kkt_residual_seeded(x, edges, cfg, &state.u.view(), Some(&seed))?;
    Ok(SolveReport {
        state,
        converged,
        iterations,
        objective_trace,
        primal_residuals,
        kkt_residual: kkt,
    })
}

fn check_finite(state: &SolverState) -> Result<()> {
    let blocks: [(&'static str, &Array2<f64>); 5] = [
        ("U", &state.u),
        ("W", &state.w),
        ("V", &state.v),
        ("Y", &state.y),
        ("Z", &state.z),
    ];
    for (name, block) in blocks {
        if !block.iter().all(|v| v.is_finite()) {
            return Err(Error::Divergence {
                iteration: state.iter,
                block: name,
            });
        }
    }
    Ok(())
}

/// Maximum iterations of the ball-constrained least-squares solve inside [`kkt_residual`].
const KKT_MAX_ITER: usize = 5_000;

/// Norm of the minimum-norm subgradient of the objective at `u`.
///
/// Edges with `‖U_i − U_j‖₂` at or below `1e-6 · (1 + ‖U‖_F / √n)` are treated as
/// fused: their penalty contributes any vector in the ball of radius `λ w_ij`,
/// and the best choice is found by accelerated projected gradient on the
/// ball-constrained least-squares problem. All other edges contribute the
/// gradient `λ w_ij (U_i − U_j)/‖U_i − U_j‖₂`.
pub fn kkt_residual(
    x: &DataMatrix,
    edges: &WeightedEdgeSet,
    cfg: &SolverConfig,
    u: &CentroidMatrix,
) -> Result<f64> {
    kkt_residual_at(x, edges, cfg, &u.view())
}

pub(crate) fn kkt_residual_at(
    x: &DataMatrix,
    edges: &WeightedEdgeSet,
    cfg: &SolverConfig,
    u: &ArrayView2<'_, f64>,
) -> Result<f64> {
    kkt_residual_seeded(x, edges, cfg, u, None)
}

/// `seed` holds one candidate subgradient per edge (ADMM supplies `−ρY`); its rows
/// for fused edges start the projected-gradient iteration.
fn kkt_residual_seeded(
    x: &DataMatrix,
    edges: &WeightedEdgeSet,
    cfg: &SolverConfig,
    u: &ArrayView2<'_, f64>,
    seed: Option<&Array2<f64>>,
) -> Result<f64> {
    check_inputs(x, edges)?;
    if u.dim() != x.values().dim() {
        return Err(Error::Dimension("centroids do not match data".into()));
    }
    let huber = cfg.huber()?;
    let (n, p) = u.dim();
    let zero_tol = 1e-6 * (1.0 + frobenius(u) / (n as f64).sqrt());

    let mut grad = Array2::from_shape_fn((n, p), |(i, j)| {
        -huber_derivative(x.values()[(i, j)] - u[(i, j)], huber)
    });
    // (i, j, radius, edge index)
    let mut fused: Vec<(usize, usize, f64, usize)> = Vec::new();
    if cfg.lambda > 0.0 {
        for (r, e) in edges.iter().enumerate() {
            let d = &u.row(e.i) - &u.row(e.j);
            let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
            let radius = cfg.lambda * e.weight;
            if norm <= zero_tol {
                fused.push((e.i, e.j, radius, r));
            } else {
                grad.row_mut(e.i).scaled_add(radius / norm, &d);
                grad.row_mut(e.j).scaled_add(-radius / norm, &d);
            }
        }
    }
    if fused.is_empty() {
        return Ok(frobenius(&grad.view()));
    }

    // minimize ½‖G + E_Fᵀ S‖² over S with ‖S_e‖ ≤ r_e
    let mut degree = vec![0usize; n];
    for &(i, j, _, _) in &fused {
        degree[i] += 1;
        degree[j] += 1;
    }
    let step = 1.0 / (2.0 * *degree.iter().max().unwrap_or(&1) as f64);
    let project = |s: &mut Array2<f64>| {
        for (mut row, &(_, _, r, _)) in s.rows_mut().into_iter().zip(&fused) {
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > r {
                row.mapv_inplace(|v| v * r / norm);
            }
        }
    };
    let residual_into = |s: &Array2<f64>, res: &mut Array2<f64>| {
        res.assign(&grad);
        for (row, &(i, j, _, _)) in s.rows().into_iter().zip(&fused) {
            res.row_mut(i).scaled_add(1.0, &row);
            res.row_mut(j).scaled_add(-1.0, &row);
        }
    };

    let mut s = Array2::<f64>::zeros((fused.len(), p));
    if let Some(seed) = seed {
        for (mut row, &(_, _, _, r)) in s.rows_mut().into_iter().zip(&fused) {
            row.assign(&seed.row(r));
        }
        project(&mut s);
    }
    let mut res = Array2::<f64>::zeros((n, p));
    residual_into(&s, &mut res);
    let mut best = frobenius(&grad.view()).min(frobenius(&res.view()));
    let mut look = s.clone();
    let mut next = s.clone();
    let mut momentum = 1.0f64;
    for it in 0..KKT_MAX_ITER {
        residual_into(&look, &mut res);
        if it % 10 == 0 {
            best = best.min(frobenius(&res.view()));
        }
        for ((mut row, l), &(i, j, _, _)) in
            next.rows_mut().into_iter().zip(look.rows()).zip(&fused)
        {
            Zip::from(&mut row)
                .and(&l)
                .and(res.row(i))
                .and(res.row(j))
                .for_each(|o, &l, &a, &b| *o = l - step * (a - b));
        }
        project(&mut next);
        let m_next = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
        let beta = (momentum - 1.0) / m_next;
        momentum = m_next;
        let mut moved = 0.0;
        Zip::from(&mut look)
            .and(&next)
            .and(&s)
            .for_each(|l, &a, &b| {
                moved += (a - b) * (a - b);
                *l = a + beta * (a - b);
            });
        std::mem::swap(&mut s, &mut next);
        if moved.sqrt() <= 1e-13 * (1.0 + frobenius(&s.view())) {
            break;
        }
    }
    residual_into(&s, &mut res);
    Ok(best.min(frobenius(&res.view())))
}
