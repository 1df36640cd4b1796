//! Closed-form rates, support-detection error models and error exponents.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::cs_core::hb;
use crate::error::{invalid, Result};

/// Threshold on `P/N` above which the channel counts as high-SNR.
pub const HIGH_SNR: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    /// Per-symbol transmit power `P`.
    pub power: f64,
    /// Per-coordinate noise variance `N`.
    pub noise: f64,
}

impl ChannelConfig {
    pub fn new(power: f64, noise: f64) -> Result<Self> {
        if !(power > 0.0 && power.is_finite()) {
            return Err(invalid("power", format!("{power} must be finite and > 0")));
        }
        if !(noise > 0.0 && noise.is_finite()) {
            return Err(invalid("noise", format!("{noise} must be finite and > 0")));
        }
        Ok(Self { power, noise })
    }

    /// Unit power with noise set by the SNR in decibels.
    pub fn from_snr_db(snr_db: f64) -> Result<Self> {
        Self::new(1.0, 10f64.powf(-snr_db / 10.0))
    }

    pub fn snr(&self) -> f64 {
        self.power / self.noise
    }

    pub fn snr_db(&self) -> f64 {
        10.0 * self.snr().log10()
    }

    pub fn is_high_snr(&self) -> bool {
        self.snr() >= HIGH_SNR
    }
}

/// High-SNR capacity `0.5 log2(P/N)` in bits per symbol.
pub fn capacity(ch: &ChannelConfig) -> f64 {
    0.5 * ch.snr().log2()
}

/// The three terms of the achievable rate, in order:
/// `(k/m) C`, `(n/m) Hb(alpha)`, `(k/2m) log2(1/(beta (1 + delta_k)))`.
pub fn achievable_rate_terms(
    k: usize,
    m: usize,
    n: usize,
    alpha: f64,
    beta: f64,
    delta_k: f64,
    c: f64,
) -> [f64; 3] {
    let (k, m, n) = (k as f64, m as f64, n as f64);
    [
        k / m * c,
        n / m * hb(alpha),
        k / (2.0 * m) * (1.0 / (beta * (1.0 + delta_k))).log2(),
    ]
}

pub fn achievable_rate(
    k: usize,
    m: usize,
    n: usize,
    alpha: f64,
    beta: f64,
    delta_k: f64,
    c: f64,
) -> f64 {
    achievable_rate_terms(k, m, n, alpha, beta, delta_k, c)
        .iter()
        .sum()
}

/// `C / log2(1/alpha) + Hb(alpha) / (alpha log2(1/alpha))`.
pub fn approx_rate(alpha: f64, c: f64) -> Result<f64> {
    approx_rate_with(alpha, c, std::f64::consts::LN_2)
}

/// [`approx_rate`] with natural logarithms, the form obtained by putting
/// `m = k ln(n/k)` into [`achievable_rate`].
pub fn approx_rate_natural(alpha: f64, c: f64) -> Result<f64> {
    approx_rate_with(alpha, c, 1.0)
}

fn approx_rate_with(alpha: f64, c: f64, ln_base: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(invalid("alpha", format!("{alpha} outside (0, 1)")));
    }
    let l = (1.0 / alpha).ln() / ln_base;
    Ok(c / l + hb(alpha) / (alpha * l))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportErrorModel {
    /// Probability of declaring a zero coordinate nonzero.
    pub p_given_zero: f64,
    /// Probability of declaring a nonzero coordinate zero.
    pub p_given_nonzero: f64,
    /// Probability that the detected pattern differs anywhere.
    pub p_pattern: f64,
}

impl SupportErrorModel {
    fn out_of_range(&self) -> Vec<String> {
        let bad = |p: f64| !(0.0..=1.0).contains(&p);
        let mut v = Vec::new();
        if bad(self.p_given_zero) {
            v.push("p_given_zero".to_string());
        }
        if bad(self.p_given_nonzero) {
            v.push("p_given_nonzero".to_string());
        }
        if bad(self.p_pattern) {
            v.push("p_pattern".to_string());
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportErrorReport {
    /// The published expressions with `phi` the standard normal CDF.
    pub verbatim: SupportErrorModel,
    /// Two-sided gaussian-tail model.
    pub corrected: SupportErrorModel,
    /// Fields of `verbatim` that are not probabilities.
    pub verbatim_out_of_range: Vec<String>,
    /// Noise scale `sqrt(beta m N / n)` on zero coordinates.
    pub sigma_zero: f64,
    /// Scale `sqrt(P + beta m N / n)` on nonzero coordinates.
    pub sigma_nonzero: f64,
}

fn std_normal() -> Normal {
    Normal::standard()
}

pub(crate) fn normal_cdf(x: f64) -> f64 {
    std_normal().cdf(x)
}

/// Per-coordinate support-detection error probabilities for threshold `tau`.
///
/// Verbatim: `phi(tau/s0)`, `1 - 2 phi(tau/s1)` and
/// `1 - (1 - p0)^(n(1-alpha)) (2 phi(tau/s1))^(n alpha)`.
/// Corrected: `2 Q(tau/s0)`, `2 phi(tau/s1) - 1` and the matching product.
pub fn support_error_analytic(
    tau: f64,
    ch: &ChannelConfig,
    m: usize,
    n: usize,
    alpha: f64,
    beta: f64,
) -> Result<SupportErrorReport> {
    if !(tau > 0.0) {
        return Err(invalid("tau", "must be > 0"));
    }
    if !(beta >= 1.0) {
        return Err(invalid("beta", "must be >= 1"));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(invalid("alpha", format!("{alpha} outside [0, 1]")));
    }
    if n == 0 || m == 0 {
        return Err(invalid("n", "m and n must be positive"));
    }
    let spill = beta * m as f64 * ch.noise / n as f64;
    let s0 = spill.sqrt();
    let s1 = (ch.power + spill).sqrt();
    let nf = n as f64;
    let zeros = nf * (1.0 - alpha);
    let ones = nf * alpha;

    let v0 = normal_cdf(tau / s0);
    let v1 = 1.0 - 2.0 * normal_cdf(tau / s1);
    let verbatim = SupportErrorModel {
        p_given_zero: v0,
        p_given_nonzero: v1,
        p_pattern: 1.0 - (1.0 - v0).powf(zeros) * (2.0 * normal_cdf(tau / s1)).powf(ones),
    };
    let c0 = 2.0 * (1.0 - normal_cdf(tau / s0));
    let c1 = 2.0 * normal_cdf(tau / s1) - 1.0;
    let corrected = SupportErrorModel {
        p_given_zero: c0,
        p_given_nonzero: c1,
        p_pattern: 1.0 - (1.0 - c0).powf(zeros) * (1.0 - c1).powf(ones),
    };
    Ok(SupportErrorReport {
        verbatim_out_of_range: verbatim.out_of_range(),
        verbatim,
        corrected,
        sigma_zero: s0,
        sigma_nonzero: s1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorExponent {
    /// `n (Hb(alpha) + (alpha/2) log2(snr / (beta (1 + delta_k))))`.
    pub exponent: f64,
    /// `2^-exponent`, up to the unspecified subexponential constant.
    pub bound: f64,
}

pub fn error_exponent_bound(
    n: usize,
    alpha: f64,
    beta: f64,
    delta_k: f64,
    ch: &ChannelConfig,
) -> ErrorExponent {
    let exponent =
        n as f64 * (hb(alpha) + alpha / 2.0 * (ch.snr() / (beta * (1.0 + delta_k))).log2());
    ErrorExponent {
        exponent,
        bound: (-exponent).exp2(),
    }
}
