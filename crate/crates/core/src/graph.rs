//! Pairwise-difference operator `E` and the `(EᵀE + I)` solve used by the U-update.
//!
//! `E` has one row per stored edge `(i, j)` with `+1` in column `i` and `−1` in
//! column `j`. It is never formed densely: products are edge-list traversals.

use nalgebra::{Cholesky, DMatrix, Dyn};
use ndarray::{Array2, ArrayView2, ArrayViewMut2, Axis, Zip};

use crate::error::{Error, Result};
use crate::par::zip_for_each;
use crate::problem::WeightedEdgeSet;

#[derive(Debug, Clone)]
enum NormalSolver {
    /// `(EᵀE + I)⁻¹ = (I + 11ᵀ)/(n + 1)` for the complete graph.
    Complete,
    Cholesky(Cholesky<f64, Dyn>),
}

#[derive(Debug, Clone)]
pub struct DifferenceOperator {
    n: usize,
    pairs: Vec<(usize, usize)>,
    /// For each node, `(edge index, sign)` of every incident edge in edge order.
    incidence: Vec<Vec<(usize, f64)>>,
    solver: NormalSolver,
}

impl DifferenceOperator {
    pub fn new(edges: &WeightedEdgeSet) -> Result<Self> {
        let n = edges.n();
        let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e.i, e.j)).collect();
        let mut incidence = vec![Vec::new(); n];
        for (r, &(i, j)) in pairs.iter().enumerate() {
            incidence[i].push((r, 1.0));
            incidence[j].push((r, -1.0));
        }
        let solver = if edges.is_complete() {
            NormalSolver::Complete
        } else {
            let mut m = DMatrix::<f64>::identity(n, n);
            for &(i, j) in &pairs {
                m[(i, i)] += 1.0;
                m[(j, j)] += 1.0;
                m[(i, j)] -= 1.0;
                m[(j, i)] -= 1.0;
            }
            NormalSolver::Cholesky(Cholesky::new(m).ok_or(Error::Factorization(n))?)
        };
        Ok(DifferenceOperator {
            n,
            pairs,
            incidence,
            solver,
        })
    }

    /// Same operator but always using the dense factorization path.
    pub fn new_factored(edges: &WeightedEdgeSet) -> Result<Self> {
        let mut op = Self::new(edges)?;
        if matches!(op.solver, NormalSolver::Complete) {
            let mut m = DMatrix::<f64>::identity(op.n, op.n);
            for &(i, j) in &op.pairs {
                m[(i, i)] += 1.0;
                m[(j, j)] += 1.0;
                m[(i, j)] -= 1.0;
                m[(j, i)] -= 1.0;
            }
            op.solver = NormalSolver::Cholesky(Cholesky::new(m).ok_or(Error::Factorization(op.n))?);
        }
        Ok(op)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn uses_closed_form(&self) -> bool {
        matches!(self.solver, NormalSolver::Complete)
    }

    fn check_rows(&self, got: usize, want: usize, what: &str) -> Result<()> {
        if got != want {
            return Err(Error::Dimension(format!(
                "{what} has {got} rows, expected {want}"
            )));
        }
        Ok(())
    }

    /// `E U`: row for edge `(i, j)` is `U_i − U_j`.
    pub fn apply_e(&self, u: &ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_rows(u.nrows(), self.n, "U")?;
        let mut out = Array2::zeros((self.pairs.len(), u.ncols()));
        self.apply_e_into(u, out.view_mut(), false);
        Ok(out)
    }

    pub(crate) fn apply_e_into(
        &self,
        u: &ArrayView2<'_, f64>,
        mut out: ArrayViewMut2<'_, f64>,
        parallel: bool,
    ) {
        let pairs = &self.pairs;
        zip_for_each!(
            parallel,
            Zip::indexed(out.axis_iter_mut(Axis(0))),
            |r, mut row: ndarray::ArrayViewMut1<'_, f64>| {
                let (i, j) = pairs[r];
                Zip::from(&mut row)
                    .and(u.row(i))
                    .and(u.row(j))
                    .for_each(|o, &a, &b| *o = a - b);
            }
        );
    }

    /// `Eᵀ V`: node `i` accumulates `+V_(i,j)` and `−V_(k,i)` over incident edges.
    pub fn apply_et(&self, v: &ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_rows(v.nrows(), self.pairs.len(), "V")?;
        let mut out = Array2::zeros((self.n, v.ncols()));
        self.apply_et_into(v, out.view_mut(), false);
        Ok(out)
    }

    pub(crate) fn apply_et_into(
        &self,
        v: &ArrayView2<'_, f64>,
        mut out: ArrayViewMut2<'_, f64>,
        parallel: bool,
    ) {
        let incidence = &self.incidence;
        zip_for_each!(
            parallel,
            Zip::indexed(out.axis_iter_mut(Axis(0))),
            |i, mut row: ndarray::ArrayViewMut1<'_, f64>| {
                row.fill(0.0);
                for &(r, sign) in &incidence[i] {
                    row.scaled_add(sign, &v.row(r));
                }
            }
        );
    }

    /// Solves `(EᵀE + I) X = B` column by column.
    pub fn solve_normal(&self, b: &ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_rows(b.nrows(), self.n, "B")?;
        let mut out = b.to_owned();
        self.solve_normal_in_place(out.view_mut());
        Ok(out)
    }

    pub(crate) fn solve_normal_in_place(&self, mut b: ArrayViewMut2<'_, f64>) {
        match &self.solver {
            NormalSolver::Complete => {
                let scale = 1.0 / (self.n as f64 + 1.0);
                let col_sums = b.sum_axis(Axis(0));
                for mut row in b.rows_mut() {
                    Zip::from(&mut row)
                        .and(&col_sums)
                        .for_each(|x, &s| *x = (*x + s) * scale);
                }
            }
            NormalSolver::Cholesky(chol) => {
                let (n, p) = b.dim();
                let mut rhs = DMatrix::from_fn(n, p, |r, c| b[(r, c)]);
                chol.solve_mut(&mut rhs);
                for ((r, c), x) in b.indexed_iter_mut() {
                    *x = rhs[(r, c)];
                }
            }
        }
    }

    /// Dense `EᵀE + I` (for diagnostics and tests).
    pub fn normal_matrix(&self) -> Array2<f64> {
        let mut m = Array2::eye(self.n);
        for &(i, j) in &self.pairs {
            m[(i, i)] += 1.0;
            m[(j, j)] += 1.0;
            m[(i, j)] -= 1.0;
            m[(j, i)] -= 1.0;
        }
        m
    }
}
