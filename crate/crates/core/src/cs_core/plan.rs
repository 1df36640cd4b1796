use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default oversampling constant for `m >= rho * k * ln(n / k)`.
pub const DEFAULT_RHO: f64 = 3.0;

/// Measurement budget for recovering a k-sparse length-n signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionPlan {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub rho: f64,
    pub alpha: f64,
}

/// Smallest `m >= rho * k * ln(n/k)`, clamped to `m >= k + 1`.
///
/// The logarithm is natural; a different base only rescales `rho`.
pub fn plan_dimensions(n: usize, k: usize, rho: f64) -> Result<DimensionPlan> {
    if k == 0 || k >= n {
        return Err(invalid("k", format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(invalid("rho", "must be positive and finite"));
    }
    let bound = rho * k as f64 * (n as f64 / k as f64).ln();
    let m = (bound.ceil() as usize).max(k + 1);
    if m > n {
        return Err(Error::PlanExceedsLength { m, n, rho });
    }
    Ok(DimensionPlan {
        n,
        k,
        m,
        rho,
        alpha: k as f64 / n as f64,
    })
}

impl DimensionPlan {
    /// A plan with an explicitly chosen `m` (no bound check beyond `k < m <= n`).
    pub fn with_m(n: usize, k: usize, m: usize) -> Result<Self> {
        if k == 0 || k >= n {
            return Err(invalid("k", format!("need 1 <= k < n, got k = {k}, n = {n}")));
        }
        if m <= k || m > n {
            return Err(invalid("m", format!("need k < m <= n, got m = {m}")));
        }
        let rho = m as f64 / (k as f64 * (n as f64 / k as f64).ln());
        Ok(Self {
            n,
            k,
            m,
            rho,
            alpha: k as f64 / n as f64,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(plan_dimensions(128, 4, 3.0).unwrap().m, 42);
        assert_eq!(plan_dimensions(2, 1, 1e-9).unwrap().m, 2);
        assert!(matches!(
            plan_dimensions(16, 8, 6.0),
            Err(Error::PlanExceedsLength { m: 34, n: 16, .. })
        ));
    }

    #[test]
    fn alpha_recorded() {
        let p = plan_dimensions(128, 4, 3.0).unwrap();
        assert_eq!(p.alpha, 4.0 / 128.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(plan_dimensions(10, 0, 1.0).is_err());
        assert!(plan_dimensions(10, 10, 1.0).is_err());
        assert!(plan_dimensions(10, 2, 0.0).is_err());
        assert!(plan_dimensions(10, 2, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn monotone_in_k_and_rho(n in 8usize..2000, k in 1usize..6, rho in 0.1f64..3.0, drho in 0.0f64..1.0) {
            prop_assume!(k + 1 < n);
            if let (Ok(a), Ok(b)) = (plan_dimensions(n, k, rho), plan_dimensions(n, k, rho + drho)) {
                prop_assert!(a.m <= b.m);
            }
            // k ln(n/k) only increases up to k = n/e
            if ((k + 1) as f64) <= n as f64 / std::f64::consts::E {
                if let (Ok(a), Ok(b)) = (plan_dimensions(n, k, rho), plan_dimensions(n, k + 1, rho)) {
                    prop_assert!(a.m <= b.m);
                }
            }
        }

        #[test]
        fn bound_satisfied(n in 4usize..5000, k in 1usize..40, rho in 0.1f64..4.0) {
            prop_assume!(k < n);
            if let Ok(p) = plan_dimensions(n, k, rho) {
                prop_assert!(p.m as f64 >= rho * k as f64 * (n as f64 / k as f64).ln());
                prop_assert!(p.m > k && p.m <= n);
            }
        }
    }
}
