//! Dense two-phase simplex for `min c^T z  s.t.  A z = b, z >= 0`.
//!
//! Pricing is Dantzig's rule, switching to Bland's rule after a run of
//! degenerate pivots so that the method cannot cycle. The final basis is
//! re-solved directly against the original data to strip accumulated
//! tableau round-off.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const COST_TOL: f64 = 1e-10;
const DEGENERATE_RUN: usize = 50;

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub z: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub op_count: u64,
}

struct Tableau {
    rows: usize,
    width: usize,
    cells: Vec<f64>,
    basis: Vec<usize>,
    ops: u64,
    iterations: usize,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.cells[r * self.width + c]
    }

    fn rhs_col(&self) -> usize {
        self.width - 1
    }

    fn obj_row(&self) -> usize {
        self.rows
    }

    fn pivot(&mut self, r: usize, col: usize) {
        let w = self.width;
        let p = self.cells[r * w + col];
        for j in 0..w {
            self.cells[r * w + j] /= p;
        }
        let (before, rest) = self.cells.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        let mut touched = 0u64;
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[col];
            if f != 0.0 {
                for (x, pv) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * pv;
                }
                row[col] = 0.0;
                touched += 1;
            }
        }
        self.ops += (touched + 1) * w as u64;
        self.basis[r] = col;
        self.iterations += 1;
    }

    /// Runs simplex iterations on the current objective row over columns
    /// `0..allowed`. Returns false if the iteration cap was hit.
    fn optimize(&mut self, allowed: usize, active_rows: &[bool], max_iter: usize) -> bool {
        let obj = self.obj_row();
        let rhs = self.rhs_col();
        let mut degenerate = 0usize;
        for _ in 0..max_iter {
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut best = -COST_TOL;
            for j in 0..allowed {
                let d = self.at(obj, j);
                if d < -COST_TOL {
                    if bland {
                        enter = Some(j);
                        break;
                    }
                    if d < best {
                        best = d;
                        enter = Some(j);
                    }
                }
            }
            let Some(col) = enter else {
                return true;
            };
            let mut leave: Option<(usize, f64, f64)> = None;
            for r in 0..self.rows {
                if !active_rows[r] {
                    continue;
                }
                let a = self.at(r, col);
                if a > PIVOT_TOL {
                    let ratio = self.at(r, rhs).max(0.0) / a;
                    leave = match leave {
                        None => Some((r, ratio, a)),
                        Some((lr, lratio, la)) => {
                            let tie = (ratio - lratio).abs() <= 1e-12 * (1.0 + lratio.abs());
                            let better = if tie {
                                if bland {
                                    self.basis[r] < self.basis[lr]
                                } else {
                                    a > la
                                }
                            } else {
                                ratio < lratio
                            };
                            if better {
                                Some((r, ratio, a))
                            } else {
                                Some((lr, lratio, la))
                            }
                        }
                    };
                }
            }
            // The objectives solved here are bounded below, so a missing
            // leaving row only happens through round-off on a tiny reduced
            // cost; treat the current point as optimal.
            let Some((r, ratio, _)) = leave else {
                return true;
            };
            if ratio <= 1e-14 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            self.pivot(r, col);
        }
        false
    }
}

/// Solve `min c^T z  s.t.  A z = b, z >= 0`.
///
/// Returns [`Error::Infeasible`] when phase one cannot drive the artificial
/// variables to zero. Rank-deficient but consistent systems are handled by
/// dropping redundant rows.
pub fn solve_standard_form(a: &DMatrix<f64>, b: &[f64], c: &[f64]) -> Result<LpSolution> {
    let (m, n) = a.shape();
    check_shapes(a, b, c)?;
    let width = n + m + 1;
    let mut t = Tableau {
        rows: m,
        width,
        cells: vec![0.0; (m + 1) * width],
        basis: (n..n + m).collect(),
        ops: 0,
        iterations: 0,
    };
    let bscale = scale_of(b);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t.cells[i * width + j] = sign * a[(i, j)];
        }
        t.cells[i * width + n + i] = 1.0;
        t.cells[i * width + width - 1] = sign * b[i];
    }
    // Phase one: minimise the sum of artificials.
    let obj = m * width;
    for j in 0..n {
        let s: f64 = (0..m).map(|i| t.cells[i * width + j]).sum();
        t.cells[obj + j] = -s;
    }
    let s: f64 = (0..m).map(|i| t.cells[i * width + width - 1]).sum();
    t.cells[obj + width - 1] = -s;
    t.ops += ((m + 1) * width) as u64;

    let mut active = vec![true; m];
    if !t.optimize(n + m, &active, iteration_cap(m, n)) {
        return Err(Error::Infeasible("phase one did not converge".into()));
    }
    let infeasibility = -t.at(m, width - 1);
    if infeasibility > 1e-9 * bscale {
        return Err(Error::Infeasible(format!(
            "phase one residual {infeasibility:.3e}"
        )));
    }
    // Drive remaining artificials out of the basis or mark their rows redundant.
    for r in 0..m {
        if t.basis[r] >= n {
            let col = (0..n)
                .filter(|&j| t.at(r, j).abs() > PIVOT_TOL)
                .max_by(|&x, &y| t.at(r, x).abs().total_cmp(&t.at(r, y).abs()));
            match col {
                Some(j) => t.pivot(r, j),
                None => active[r] = false,
            }
        }
    }
    phase_two(t, a, b, c, &active)
}

/// Phase two only, started from a caller-supplied basis (one column index
/// per row). Fails with [`Error::Infeasible`] if the basis is singular or
/// not primal feasible.
pub fn solve_from_basis(
    a: &DMatrix<f64>,
    b: &[f64],
    c: &[f64],
    basis: &[usize],
) -> Result<LpSolution> {
    let (m, n) = a.shape();
    check_shapes(a, b, c)?;
    if basis.len() != m || basis.iter().any(|&j| j >= n) {
        return Err(Error::Infeasible("malformed starting basis".into()));
    }
    let lu = a.select_columns(basis).lu();
    let width = n + 1;
    let mut body = DMatrix::zeros(m, width);
    body.view_mut((0, 0), (m, n)).copy_from(a);
    body.set_column(n, &DVector::from_column_slice(b));
    let Some(reduced) = lu.solve(&body) else {
        return Err(Error::Infeasible("singular starting basis".into()));
    };
    let bscale = scale_of(b);
    if reduced.column(n).iter().any(|v| *v < -1e-9 * bscale) {
        return Err(Error::Infeasible("starting basis is not primal feasible".into()));
    }
    let mut cells = vec![0.0; (m + 1) * width];
    for i in 0..m {
        for j in 0..width {
            cells[i * width + j] = reduced[(i, j)];
        }
        cells[i * width + n] = cells[i * width + n].max(0.0);
        // clean the identity block exactly
        for (r, &bj) in basis.iter().enumerate() {
            cells[i * width + bj] = if r == i { 1.0 } else { 0.0 };
        }
    }
    let t = Tableau {
        rows: m,
        width,
        cells,
        basis: basis.to_vec(),
        ops: (m * m * m + m * m * width) as u64,
        iterations: 0,
    };
    phase_two(t, a, b, c, &vec![true; m])
}

fn check_shapes(a: &DMatrix<f64>, b: &[f64], c: &[f64]) -> Result<()> {
    let (m, n) = a.shape();
    if b.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: b.len() });
    }
    if c.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: c.len() });
    }
    Ok(())
}

fn scale_of(b: &[f64]) -> f64 {
    b.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(1.0)
}

fn iteration_cap(m: usize, n: usize) -> usize {
    50 * (m + n).max(10)
}

fn phase_two(
    mut t: Tableau,
    a: &DMatrix<f64>,
    b: &[f64],
    c: &[f64],
    active: &[bool],
) -> Result<LpSolution> {
    let (m, n) = a.shape();
    let width = t.width;
    let obj = m * width;
    for j in 0..width {
        t.cells[obj + j] = 0.0;
    }
    for j in 0..n {
        t.cells[obj + j] = c[j];
    }
    for r in 0..m {
        if !active[r] {
            continue;
        }
        let cb = c[t.basis[r]];
        if cb != 0.0 {
            for j in 0..width {
                t.cells[obj + j] -= cb * t.cells[r * width + j];
            }
        }
    }
    t.ops += ((m + 1) * width) as u64;
    if !t.optimize(n, active, iteration_cap(m, n)) {
        return Err(Error::Infeasible("phase two hit the iteration cap".into()));
    }

    let bscale = scale_of(b);
    let mut z = vec![0.0; n];
    for r in 0..m {
        if active[r] && t.basis[r] < n {
            z[t.basis[r]] = t.at(r, width - 1).max(0.0);
        }
    }
    if let Some(refined) = refine(a, b, &t.basis, active, n) {
        let resid = |z: &[f64]| {
            let r = a * DVector::from_column_slice(z) - DVector::from_column_slice(b);
            r.norm()
        };
        t.ops += (2 * m * n) as u64;
        if refined.iter().all(|v| *v >= -1e-9 * bscale) && resid(&refined) <= resid(&z) {
            z = refined.into_iter().map(|v| v.max(0.0)).collect();
        }
    }
    let objective = z.iter().zip(c).map(|(zi, ci)| zi * ci).sum();
    Ok(LpSolution {
        z,
        objective,
        iterations: t.iterations,
        op_count: t.ops,
    })
}

fn refine(
    a: &DMatrix<f64>,
    b: &[f64],
    basis: &[usize],
    active: &[bool],
    n: usize,
) -> Option<Vec<f64>> {
    let rows: Vec<usize> = (0..basis.len()).filter(|&r| active[r]).collect();
    let cols: Vec<usize> = rows.iter().map(|&r| basis[r]).collect();
    if cols.iter().any(|&c| c >= n) {
        return None;
    }
    let ab = a.select_rows(&rows).select_columns(&cols);
    let rhs = DVector::from_iterator(rows.len(), rows.iter().map(|&r| b[r]));
    let sol = ab.lu().solve(&rhs)?;
    let mut z = vec![0.0; n];
    for (k, &c) in cols.iter().enumerate() {
        z[c] = sol[k];
    }
    Some(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // min x + 2y  s.t. x + y = 1 -> x = 1, y = 0
        let a = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let s = solve_standard_form(&a, &[1.0], &[1.0, 2.0]).unwrap();
        assert!((s.z[0] - 1.0).abs() < 1e-12 && s.z[1].abs() < 1e-12);
        assert!((s.objective - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_rows() {
        // x - y = -2, min x + y -> x = 0, y = 2
        let a = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let s = solve_standard_form(&a, &[-2.0], &[1.0, 1.0]).unwrap();
        assert!((s.z[1] - 2.0).abs() < 1e-12 && s.z[0].abs() < 1e-12);
    }

    #[test]
    fn infeasible_system() {
        // x = 1 and x = 2
        let a = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        assert!(matches!(
            solve_standard_form(&a, &[1.0, 2.0], &[1.0]),
            Err(Error::Infeasible(_))
        ));
        // x >= 0 with x = -1
        let a = DMatrix::from_row_slice(1, 1, &[1.0]);
        assert!(solve_standard_form(&a, &[-1.0], &[1.0]).is_err());
    }

    #[test]
    fn warm_start_matches_two_phase() {
        let a = DMatrix::from_row_slice(2, 4, &[1.0, 2.0, -1.0, 0.5, 0.0, 1.0, 1.0, -2.0]);
        let b = [2.0, 1.0];
        let c = [1.0, 1.0, 1.0, 1.0];
        let cold = solve_standard_form(&a, &b, &c).unwrap();
        let warm = solve_from_basis(&a, &b, &c, &[0, 1]).unwrap();
        assert!((cold.objective - warm.objective).abs() < 1e-12);
        // column 0 alone cannot start: x = (2, 1) needs both rows
        assert!(solve_from_basis(&a, &b, &c, &[0, 0]).is_err());
        // infeasible start: basis {2, 3} gives negative coordinates
        assert!(solve_from_basis(&a, &b, &c, &[2, 3]).is_err());
    }

    #[test]
    fn redundant_rows() {
        // x + y = 1 twice
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let s = solve_standard_form(&a, &[1.0, 2.0], &[3.0, 1.0]).unwrap();
        assert!((s.z[1] - 1.0).abs() < 1e-12 && s.z[0].abs() < 1e-12);
    }
}
