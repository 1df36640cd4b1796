//! `min ||x||_1  s.t.  ||y - Phi x||_2 <= epsilon` by a primal-dual
//! first-order method.
//!
//! Each iteration projects onto the L2 ball around `y` (through the dual
//! prox) and applies soft shrinkage to the primal. Every few iterations the
//! current support and signs are used to solve the restricted problem in
//! closed form ("polish"); a polished point is accepted once a dual
//! certificate closes the duality gap to `convergence_tol`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{norm2, residual, RecoveryResult, SolveStatus};
use crate::cs_core::MeasurementMatrix;
use crate::error::{invalid, Error, Result};

const CHECK_EVERY: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenoiseConfig {
    /// L2 noise budget.
    pub epsilon: f64,
    pub max_iterations: usize,
    pub convergence_tol: f64,
}

impl DenoiseConfig {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            max_iterations: 20_000,
            convergence_tol: 1e-7,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(invalid("epsilon", "must be finite and >= 0"));
        }
        if self.max_iterations == 0 {
            return Err(invalid("max_iterations", "must be at least 1"));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(invalid("convergence_tol", "must be positive"));
        }
        Ok(())
    }
}

struct Workspace<'a> {
    a: &'a DMatrix<f64>,
    y: &'a [f64],
    eps: f64,
    tol: f64,
    ops: u64,
}

struct Candidate {
    x: Vec<f64>,
    gap: f64,
}

impl Workspace<'_> {
    fn mul(&mut self, x: &[f64]) -> Vec<f64> {
        let (m, n) = self.a.shape();
        self.ops += (m * n) as u64;
        let mut out = vec![0.0; m];
        for (j, xj) in x.iter().enumerate() {
            if *xj != 0.0 {
                for (i, o) in out.iter_mut().enumerate() {
                    *o += self.a[(i, j)] * xj;
                }
            }
        }
        out
    }

    fn mul_t(&mut self, v: &[f64]) -> Vec<f64> {
        let (m, n) = self.a.shape();
        self.ops += (m * n) as u64;
        (0..n)
            .map(|j| (0..m).map(|i| self.a[(i, j)] * v[i]).sum())
            .collect()
    }

    /// Dual value of `v` after scaling it into `||Phi^T v||_inf <= 1`,
    /// using the convention `D(v) = <y, v> - eps ||v||`.
    fn dual_value(&mut self, v: &[f64]) -> f64 {
        let at = self.mul_t(v);
        let s = at.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        if s == 0.0 {
            return 0.0;
        }
        let scale = 1.0 / s.max(1.0);
        let yv: f64 = self.y.iter().zip(v).map(|(a, b)| a * b).sum();
        scale * (yv - self.eps * norm2(v))
    }

    /// Closed-form solve on the support/sign pattern of `x`.
    fn polish(&mut self, x: &[f64], dual_hint: f64) -> Option<Candidate> {
        let (m, _) = self.a.shape();
        let xmax = x.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if xmax == 0.0 {
            return None;
        }
        let support: Vec<usize> = (0..x.len()).filter(|&j| x[j].abs() > 1e-4 * xmax).collect();
        if support.is_empty() || support.len() > m {
            return None;
        }
        let signs = DVector::from_iterator(support.len(), support.iter().map(|&j| x[j].signum()));
        let sub = self.a.select_columns(&support);
        let k = support.len();
        self.ops += (m * k * k + k * k * k) as u64;
        let gram = sub.tr_mul(&sub);
        let chol = gram.clone().cholesky()?;
        let yv = DVector::from_column_slice(self.y);
        let x_ls = chol.solve(&sub.tr_mul(&yv));
        let r_ls = &yv - &sub * &x_ls;
        let r2 = r_ls.norm_squared();
        let eps2 = self.eps * self.eps;
        let yscale = norm2(self.y).max(1.0);
        let slack = 1e-12 * yscale * yscale;
        if r2 > eps2 + slack {
            return None;
        }
        let w = chol.solve(&signs);
        let sw = signs.dot(&w);
        if sw <= 0.0 {
            return None;
        }
        let radius = (eps2 - r2).max(0.0).sqrt();
        let xs = &x_ls - &w * (radius / sw.sqrt());
        if xs.iter().zip(signs.iter()).any(|(v, s)| v * s <= 0.0) {
            return None;
        }
        let mut cand = vec![0.0; x.len()];
        for (i, &j) in support.iter().enumerate() {
            cand[j] = xs[i];
        }
        let primal: f64 = xs.iter().map(|v| v.abs()).sum();
        // Dual certificate from the restricted optimality conditions.
        let v_cert: Vec<f64> = if radius > 0.0 {
            let r = &yv - &sub * &xs;
            (r * (sw.sqrt() / radius)).as_slice().to_vec()
        } else {
            (&sub * &w).as_slice().to_vec()
        };
        let dual = self.dual_value(&v_cert).max(dual_hint);
        Some(Candidate {
            x: cand,
            gap: (primal - dual).max(0.0),
        })
    }

    fn converged(&self, gap: f64, primal: f64) -> bool {
        gap <= self.tol * primal.max(1e-300)
    }
}

fn soft(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Distance from `y` to the range of `Phi`.
fn range_distance(a: &DMatrix<f64>, y: &[f64]) -> f64 {
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested U");
    let smax = svd.singular_values.max();
    let yv = DVector::from_column_slice(y);
    let mut proj = DVector::zeros(y.len());
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > 1e-12 * smax.max(f64::MIN_POSITIVE) {
            let ui = u.column(i);
            proj += ui * ui.dot(&yv);
        }
    }
    (yv - proj).norm()
}

pub fn basis_pursuit_denoise(
    phi: &MeasurementMatrix,
    y: &[f64],
    cfg: &DenoiseConfig,
) -> Result<RecoveryResult> {
    cfg.validate()?;
    if phi.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: phi.rows(),
            got: y.len(),
        });
    }
    let a = phi.as_dmatrix();
    let (m, n) = a.shape();
    let ynorm = norm2(y);
    if ynorm <= cfg.epsilon {
        return Ok(RecoveryResult::new(a, y, vec![0.0; n], 0, m as u64, SolveStatus::Optimal));
    }
    let dist = range_distance(a, y);
    let mut ops = (m * m * n) as u64;
    if dist > cfg.epsilon * (1.0 + cfg.convergence_tol) + 1e-12 * ynorm.max(1.0) {
        return Err(Error::Infeasible(format!(
            "epsilon {:.3e} below distance {dist:.3e} from y to range(Phi)",
            cfg.epsilon
        )));
    }
    let lip = a.singular_values().max();
    ops += (m * m * n) as u64;

    let mut ws = Workspace {
        a,
        y,
        eps: cfg.epsilon,
        tol: cfg.convergence_tol,
        ops,
    };
    // Primal iterates carry the units of y, dual iterates are unitless.
    let omega = ynorm / (m as f64).sqrt();
    let tau = 0.95 * omega / lip;
    let sigma = 0.95 / (omega * lip);

    let mut x = vec![0.0; n];
    let mut x_bar = x.clone();
    let mut v = vec![0.0; m];
    let mut best: Option<Candidate> = None;
    let mut iterations = 0;
    let mut status = SolveStatus::MaxIter;

    for it in 1..=cfg.max_iterations {
        iterations = it;
        // dual step: prox of sigma * g* with g the indicator of B(y, eps)
        let ax = ws.mul(&x_bar);
        let u: Vec<f64> = v.iter().zip(&ax).map(|(vi, ai)| vi + sigma * ai).collect();
        let mut p: Vec<f64> = u.iter().zip(y).map(|(ui, yi)| ui / sigma - yi).collect();
        let pn = norm2(&p);
        if pn > cfg.epsilon {
            let s = cfg.epsilon / pn;
            p.iter_mut().for_each(|t| *t *= s);
        }
        for i in 0..m {
            v[i] = u[i] - sigma * (p[i] + y[i]);
        }
        // primal step
        let atv = ws.mul_t(&v);
        let x_new: Vec<f64> = x
            .iter()
            .zip(&atv)
            .map(|(xi, gi)| soft(xi - tau * gi, tau))
            .collect();
        for j in 0..n {
            x_bar[j] = 2.0 * x_new[j] - x[j];
        }
        x = x_new;

        if it % CHECK_EVERY == 0 {
            let neg_v: Vec<f64> = v.iter().map(|t| -t).collect();
            let dual_hint = ws.dual_value(&neg_v);
            if let Some(c) = ws.polish(&x, dual_hint) {
                let primal: f64 = c.x.iter().map(|t| t.abs()).sum();
                let done = ws.converged(c.gap, primal);
                if best.as_ref().is_none_or(|b| c.gap < b.gap) {
                    best = Some(c);
                }
                if done {
                    status = SolveStatus::Optimal;
                    break;
                }
            }
            let r = residual(a, &x, y);
            let primal: f64 = x.iter().map(|t| t.abs()).sum();
            let feasible = r <= cfg.epsilon * (1.0 + cfg.convergence_tol);
            if feasible && ws.converged((primal - dual_hint).max(0.0), primal) {
                best = Some(Candidate { x: x.clone(), gap: primal - dual_hint });
                status = SolveStatus::Optimal;
                break;
            }
        }
    }
    let ops = ws.ops;
    let out = match best {
        Some(c) => c.x,
        None => x,
    };
    Ok(RecoveryResult::new(a, y, out, iterations, ops, status))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cs_core::{measure, SparseVector};
    use crate::solver::basis_pursuit;

    #[test]
    fn identity_equality_case() {
        let phi = MeasurementMatrix::identity(4);
        let y = vec![1.0, 0.0, -3.0, 2.0];
        let r = basis_pursuit_denoise(&phi, &y, &DenoiseConfig::new(0.0)).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!(r.solution.max_abs_diff(&SparseVector::from_dense(y)) < 1e-9);
    }

    #[test]
    fn huge_ball_gives_zero() {
        let phi = MeasurementMatrix::gaussian(2, 4, 1).unwrap();
        let y = vec![0.3, -1.2];
        let r = basis_pursuit_denoise(&phi, &y, &DenoiseConfig::new(10.0 * norm2(&y))).unwrap();
        assert_eq!(r.solution.norm_inf(), 0.0);
        assert_eq!(r.status, SolveStatus::Optimal);
    }

    #[test]
    fn infeasible_epsilon() {
        let phi = MeasurementMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let err = basis_pursuit_denoise(&phi, &[1.0, -1.0], &DenoiseConfig::new(0.1));
        assert!(matches!(err, Err(Error::Infeasible(_))));
    }

    #[test]
    fn invalid_config() {
        let phi = MeasurementMatrix::identity(2);
        let mut cfg = DenoiseConfig::new(-1.0);
        assert!(basis_pursuit_denoise(&phi, &[1.0, 1.0], &cfg).is_err());
        cfg.epsilon = 0.1;
        cfg.max_iterations = 0;
        assert!(basis_pursuit_denoise(&phi, &[1.0, 1.0], &cfg).is_err());
    }

    #[test]
    fn zero_epsilon_matches_exact_path() {
        let phi = MeasurementMatrix::bernoulli(20, 50, 8).unwrap();
        let x0 = SparseVector::from_entries(50, &[(4, 2.0), (30, -1.0), (41, 0.5)]).unwrap();
        let y = measure(&phi, &x0).unwrap();
        let exact = basis_pursuit(&phi, &y).unwrap();
        let fo = basis_pursuit_denoise(&phi, &y, &DenoiseConfig::new(0.0)).unwrap();
        assert_eq!(fo.status, SolveStatus::Optimal);
        assert!(fo.solution.max_abs_diff(&exact.solution) < 1e-5);
    }

    #[test]
    fn noisy_solution_is_feasible_and_near_truth() {
        let phi = MeasurementMatrix::bernoulli(40, 100, 21).unwrap();
        let x0 = SparseVector::from_entries(100, &[(7, 3.0), (55, -2.0), (90, 1.0)]).unwrap();
        let mut y = measure(&phi, &x0).unwrap();
        let z: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 0.01 } else { -0.01 }).collect();
        y.iter_mut().zip(&z).for_each(|(a, b)| *a += b);
        let eps = norm2(&z);
        let cfg = DenoiseConfig::new(eps);
        let r = basis_pursuit_denoise(&phi, &y, &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!(r.residual_norm <= eps * (1.0 + cfg.convergence_tol) + 1e-12);
        let err = r.solution.values().iter().zip(x0.values()).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!(err <= 10.0 * eps, "err {err} eps {eps}");
    }
}
