use crate::error::{invalid, Result};

/// Binary entropy in bits, with `0 log 0 = 0`.
pub fn binary_entropy(alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid("alpha", format!("{alpha} outside [0, 1]")));
    }
    Ok(hb(alpha))
}

pub(crate) fn hb(alpha: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&alpha));
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.log2() };
    term(alpha) + term(1.0 - alpha)
}

/// Shannon entropy in bits of a probability vector.
pub fn shannon_entropy(probs: &[f64]) -> f64 {
    probs
        .iter()
        .filter(|p| **p > 0.0)
        .map(|p| -p * p.log2())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.2).unwrap() - 0.721_928_094_887_362_3).abs() < 1e-12);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.5).is_err());
        assert!(binary_entropy(f64::NAN).is_err());
    }

    #[test]
    fn symmetric() {
        for a in [0.01, 0.1, 0.3, 0.45] {
            assert!((hb(a) - hb(1.0 - a)).abs() < 1e-15);
        }
    }

    #[test]
    fn shannon_uniform() {
        assert!((shannon_entropy(&[0.25; 4]) - 2.0).abs() < 1e-15);
        assert!((shannon_entropy(&[0.5, 0.25, 0.25]) - 1.5).abs() < 1e-15);
    }
}
