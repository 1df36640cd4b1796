//! L1-minimisation decoders and a brute-force sparsest-solution oracle.
//!
//! [`basis_pursuit`] is exact (an LP solved by simplex) and is the arbiter
//! in every cross-check. [`basis_pursuit_denoise`] is a first-order
//! primal-dual method for the L2-ball constrained problem. Every result
//! carries `op_count`, the number of scalar multiply-adds spent, which
//! stands in for an asymptotic complexity figure.

mod bpdn;
mod oracle;
mod simplex;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cs_core::{MeasurementMatrix, SparseVector};
use crate::error::{Error, Result};

pub use bpdn::{basis_pursuit_denoise, DenoiseConfig};
pub use oracle::{l0_oracle, L0_ENUMERATION_CAP};
pub use simplex::{solve_standard_form, LpSolution};

/// Relative threshold used to read a support off a dense solver output.
pub const SUPPORT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub solution: SparseVector,
    /// L1 norm of `solution`.
    pub objective: f64,
    /// `||y - Phi x||_2`.
    pub residual_norm: f64,
    pub iterations: usize,
    pub op_count: u64,
    pub status: SolveStatus,
}

impl RecoveryResult {
    fn new(
        phi: &DMatrix<f64>,
        y: &[f64],
        x: Vec<f64>,
        iterations: usize,
        op_count: u64,
        status: SolveStatus,
    ) -> Self {
        let residual_norm = residual(phi, &x, y);
        let solution = SparseVector::from_dense(x);
        Self {
            objective: solution.norm_l1(),
            solution,
            residual_norm,
            iterations,
            op_count,
            status,
        }
    }

    /// Placeholder result for a solve that failed as infeasible, used where
    /// infeasibility is a measured outcome rather than an error.
    pub fn infeasible(n: usize) -> Self {
        Self {
            solution: SparseVector::zeros(n),
            objective: 0.0,
            residual_norm: f64::INFINITY,
            iterations: 0,
            op_count: 0,
            status: SolveStatus::Infeasible,
        }
    }

    /// Support with round-off below `SUPPORT_TOL * max(1, ||x||_inf)` removed.
    pub fn support(&self) -> Vec<usize> {
        self.solution.support_with_tol(SUPPORT_TOL)
    }
}

pub(crate) fn residual(phi: &DMatrix<f64>, x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (i, yi) in y.iter().enumerate() {
        let mut s = 0.0;
        for (j, xj) in x.iter().enumerate() {
            if *xj != 0.0 {
                s += phi[(i, j)] * xj;
            }
        }
        acc += (yi - s) * (yi - s);
    }
    acc.sqrt()
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn check_dims(phi: &MeasurementMatrix, y: &[f64]) -> Result<()> {
    if phi.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: phi.rows(),
            got: y.len(),
        });
    }
    Ok(())
}

/// Exact `min ||x||_1  s.t.  Phi x = y`.
///
/// Solved as the LP `min 1^T (u + w)  s.t. [Phi, -Phi][u; w] = y, u, w >= 0`
/// with `x = u - w`. Inconsistent systems return [`Error::Infeasible`].
pub fn basis_pursuit(phi: &MeasurementMatrix, y: &[f64]) -> Result<RecoveryResult> {
    check_dims(phi, y)?;
    let a = phi.as_dmatrix();
    let (m, n) = a.shape();
    let split = DMatrix::from_fn(m, 2 * n, |i, j| if j < n { a[(i, j)] } else { -a[(i, j - n)] });
    let cost = vec![1.0; 2 * n];
    let lp = match crash_basis(a, y) {
        Some(basis) => simplex::solve_from_basis(&split, y, &cost, &basis)
            .or_else(|_| solve_standard_form(&split, y, &cost))?,
        None => solve_standard_form(&split, y, &cost)?,
    };
    let x: Vec<f64> = (0..n).map(|j| lp.z[j] - lp.z[j + n]).collect();
    let res = RecoveryResult::new(a, y, x, lp.iterations, lp.op_count, SolveStatus::Optimal);
    let scale = norm2(y).max(1.0);
    if res.residual_norm > 1e-8 * scale {
        return Err(Error::Infeasible(format!(
            "equality residual {:.3e} after solve",
            res.residual_norm
        )));
    }
    Ok(res)
}

/// Feasible starting basis for the split LP: `m` independent columns of
/// `Phi` picked by pivoted Gram-Schmidt, each taken with the sign of its
/// coefficient in `B^{-1} y`. `None` when `Phi` has rank below `m`.
fn crash_basis(a: &DMatrix<f64>, y: &[f64]) -> Option<Vec<usize>> {
    let (m, n) = a.shape();
    let mut resid = a.clone();
    let mut cols = Vec::with_capacity(m);
    let scale = a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(1e-300);
    for _ in 0..m {
        let (j, norm) = (0..n)
            .filter(|j| !cols.contains(j))
            .map(|j| (j, resid.column(j).norm()))
            .max_by(|x, y| x.1.total_cmp(&y.1))?;
        if norm <= 1e-9 * scale {
            return None;
        }
        let q = resid.column(j) / norm;
        let proj = q.transpose() * &resid;
        resid -= &q * proj;
        cols.push(j);
    }
    let xb = a
        .select_columns(&cols)
        .lu()
        .solve(&nalgebra::DVector::from_column_slice(y))?;
    Some(
        cols.iter()
            .zip(xb.iter())
            .map(|(&j, v)| if *v >= 0.0 { j } else { j + n })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cs_core::measure;

    #[test]
    fn identity_returns_measurement() {
        let phi = MeasurementMatrix::identity(5);
        let y = vec![1.0, -2.0, 0.0, 0.5, 3.0];
        let r = basis_pursuit(&phi, &y).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!(r.solution.max_abs_diff(&SparseVector::from_dense(y.clone())) < 1e-12);
        assert!((r.objective - 6.5).abs() < 1e-12);
        assert!(r.op_count > 0);
    }

    #[test]
    fn zero_measurement_gives_zero() {
        let phi = MeasurementMatrix::bernoulli(4, 9, 3).unwrap();
        let r = basis_pursuit(&phi, &[0.0; 4]).unwrap();
        assert_eq!(r.objective, 0.0);
        assert!(r.solution.norm_inf() == 0.0);
    }

    #[test]
    fn recovers_one_sparse() {
        let phi = MeasurementMatrix::bernoulli(6, 8, 11).unwrap();
        let x0 = SparseVector::from_entries(8, &[(3, 5.0)]).unwrap();
        let y = measure(&phi, &x0).unwrap();
        let oracle = l0_oracle(&phi, &y, 2).unwrap();
        assert_eq!(oracle.support(), vec![3]);
        let r = basis_pursuit(&phi, &y).unwrap();
        assert!(r.solution.max_abs_diff(&x0) < 1e-9);
    }

    #[test]
    fn dimension_mismatch() {
        let phi = MeasurementMatrix::identity(3);
        assert!(matches!(
            basis_pursuit(&phi, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn inconsistent_rank_deficient_system() {
        let phi = MeasurementMatrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert!(matches!(
            basis_pursuit(&phi, &[1.0, 3.0]),
            Err(Error::Infeasible(_))
        ));
        // consistent but rank deficient is fine
        let r = basis_pursuit(&phi, &[1.0, 2.0]).unwrap();
        assert!((r.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_equivariance() {
        let phi = MeasurementMatrix::gaussian(10, 30, 5).unwrap();
        let x0 = SparseVector::from_entries(30, &[(2, 1.5), (17, -0.7)]).unwrap();
        let y = measure(&phi, &x0).unwrap();
        let base = basis_pursuit(&phi, &y).unwrap();
        for c in [-3.0, 0.25, 7.0] {
            let ys: Vec<f64> = y.iter().map(|v| v * c).collect();
            let r = basis_pursuit(&phi, &ys).unwrap();
            for (a, b) in r.solution.values().iter().zip(base.solution.values()) {
                assert!((a - c * b).abs() < 1e-9 * c.abs().max(1.0));
            }
        }
    }
}
