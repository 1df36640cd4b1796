use super::{norm2, RecoveryResult, SolveStatus};
use crate::cs_core::{binomial, Combinations, MeasurementMatrix};
use crate::error::{invalid, Error, Result};

pub const L0_ENUMERATION_CAP: u128 = 1_000_000;

/// Brute-force sparsest solution of `Phi x = y` over supports of size
/// `<= k_max`.
///
/// Supports are visited by size, then lexicographically. Among consistent
/// supports of the smallest size, the one with smallest least-squares
/// residual wins; residuals equal to within round-off fall back to the
/// lexicographically smallest support.
pub fn l0_oracle(phi: &MeasurementMatrix, y: &[f64], k_max: usize) -> Result<RecoveryResult> {
    if phi.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: phi.rows(),
            got: y.len(),
        });
    }
    let n = phi.cols();
    if k_max > n {
        return Err(invalid("k_max", format!("{k_max} exceeds n = {n}")));
    }
    let count = binomial(n, k_max);
    if count > L0_ENUMERATION_CAP {
        return Err(Error::CapExceeded {
            count,
            cap: L0_ENUMERATION_CAP,
        });
    }
    let a = phi.as_dmatrix();
    let m = a.nrows();
    let yscale = norm2(y).max(1.0);
    let consistent_tol = 1e-8 * yscale;
    let tie_tol = 1e-12 * yscale;
    let yv = nalgebra::DVector::from_column_slice(y);
    let mut ops = 0u64;
    let mut visited = 0usize;

    if norm2(y) <= consistent_tol {
        return Ok(RecoveryResult::new(a, y, vec![0.0; n], 0, 0, SolveStatus::Optimal));
    }
    for size in 1..=k_max {
        let mut best: Option<(f64, Vec<usize>, Vec<f64>)> = None;
        for support in Combinations::new(n, size) {
            visited += 1;
            let sub = a.select_columns(&support);
            ops += (m * size * size) as u64;
            let svd = sub.svd(true, true);
            let Ok(coef) = svd.solve(&yv, 1e-12) else {
                continue;
            };
            let res = (&yv - a.select_columns(&support) * &coef).norm();
            if res > consistent_tol {
                continue;
            }
            let better = match &best {
                None => true,
                Some((r, _, _)) => res < *r - tie_tol,
            };
            if better {
                best = Some((res, support, coef.as_slice().to_vec()));
            }
        }
        if let Some((_, support, coef)) = best {
            let mut x = vec![0.0; n];
            for (i, j) in support.into_iter().enumerate() {
                x[j] = coef[i];
            }
            return Ok(RecoveryResult::new(a, y, x, visited, ops, SolveStatus::Optimal));
        }
    }
    Err(Error::NoConsistentSupport { k_max })
}
