//! Experiment configuration: a flat TOML file overlaid by command-line flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::cs_core::plan_dimensions;
use crate::error::{Error, Result};
use crate::multicast::NetworkGraph;
use crate::scc::{codebook_bits, MAX_CODEBOOK_BITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    CsRecover,
    SdcCompare,
    MulticastSim,
    SccSim,
    Rates,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::CsRecover => "cs-recover",
            Subcommand::SdcCompare => "sdc-compare",
            Subcommand::MulticastSim => "multicast-sim",
            Subcommand::SccSim => "scc-sim",
            Subcommand::Rates => "rates",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum MatrixChoice {
    #[default]
    Bernoulli,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyChoice {
    #[default]
    BernoulliGamma,
    LowestEntropy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TransformChoice {
    RandomSign,
    Harmonic,
}

/// Every field is optional; unset fields fall back to per-subcommand
/// defaults through the accessor methods. The same struct is the TOML
/// schema (snake_case keys) and the flag set (`--kebab-case`).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[arg(skip)]
    pub subcommand: Option<Subcommand>,
    #[arg(long)]
    pub master_seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long = "output", short = 'o')]
    pub output_path: Option<PathBuf>,
    #[arg(long = "format", value_enum)]
    pub output_format: Option<OutputFormat>,

    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    /// Measurement count; derived from `rho` when unset.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long, value_enum)]
    pub matrix: Option<MatrixChoice>,
    /// cs-recover: L2 noise budget as a fraction of `||y||`; 0 is noiseless.
    #[arg(long)]
    pub noise_ratio: Option<f64>,

    /// Bits per latent nonzero (`R`).
    #[arg(long = "symbol-rate", alias = "R")]
    pub symbol_rate: Option<u32>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, value_enum)]
    pub policy: Option<PolicyChoice>,
    #[arg(long, value_enum)]
    pub transform: Option<TransformChoice>,

    /// Built-in topology: `butterfly` or `depth1(n)`.
    #[arg(long)]
    pub topology: Option<String>,
    #[arg(long)]
    pub graph_file: Option<PathBuf>,
    #[arg(long)]
    pub q: Option<u32>,

    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub snr_db: Option<Vec<f64>>,
    /// scc-sim: fixed rate; unset means achievable rate minus `rate_margin`.
    #[arg(long)]
    pub rate: Option<f64>,
    #[arg(long)]
    pub rate_margin: Option<f64>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
}

/// One failed precondition, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("flat config serializes")
    }

    /// Fields set in `other` replace those in `self`.
    pub fn overlay(mut self, other: &Self) -> Self {
        macro_rules! take {
            ($($f:ident),*) => {$(
                if other.$f.is_some() {
                    self.$f = other.$f.clone();
                }
            )*};
        }
        take!(
            subcommand, master_seed, trials, output_path, output_format, n, k, m, rho, matrix,
            noise_ratio, symbol_rate, alpha, policy, transform, topology, graph_file, q, snr_db,
            rate, rate_margin, tau, beta
        );
        self
    }

    pub fn subcommand(&self) -> Subcommand {
        self.subcommand.unwrap_or(Subcommand::CsRecover)
    }
    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(100)
    }
    pub fn output_format(&self) -> OutputFormat {
        self.output_format.unwrap_or_default()
    }
    pub fn n(&self) -> usize {
        self.n.unwrap_or(match self.subcommand() {
            Subcommand::CsRecover | Subcommand::SdcCompare => 128,
            Subcommand::MulticastSim => 8,
            Subcommand::SccSim => 16,
            Subcommand::Rates => 10,
        })
    }
    pub fn k(&self) -> usize {
        self.k.unwrap_or(match self.subcommand() {
            Subcommand::CsRecover | Subcommand::SdcCompare => 4,
            Subcommand::MulticastSim => 1,
            Subcommand::SccSim | Subcommand::Rates => 2,
        })
    }
    pub fn rho(&self) -> f64 {
        self.rho.unwrap_or(crate::cs_core::DEFAULT_RHO)
    }
    /// Explicit `m`, or a per-subcommand default (`None` means "plan it").
    fn m_default(&self) -> Option<usize> {
        self.m.or(match self.subcommand() {
            Subcommand::SccSim if self.rho.is_none() => Some(10),
            Subcommand::Rates if self.rho.is_none() => Some(6),
            _ => None,
        })
    }
    /// Measurement count after planning.
    pub fn m(&self) -> Result<usize> {
        match self.m_default() {
            Some(m) => Ok(m),
            None => Ok(plan_dimensions(self.n(), self.k(), self.rho())?.m),
        }
    }
    pub fn matrix(&self) -> MatrixChoice {
        self.matrix.unwrap_or_default()
    }
    pub fn noise_ratio(&self) -> f64 {
        self.noise_ratio.unwrap_or(0.0)
    }
    pub fn symbol_rate(&self) -> u32 {
        self.symbol_rate.unwrap_or(match self.subcommand() {
            Subcommand::MulticastSim => 1,
            _ => 4,
        })
    }
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(self.k() as f64 / self.n().max(1) as f64)
    }
    pub fn policy(&self) -> PolicyChoice {
        self.policy.unwrap_or_default()
    }
    pub fn transform(&self) -> TransformChoice {
        self.transform.unwrap_or(match self.subcommand() {
            Subcommand::MulticastSim => TransformChoice::Harmonic,
            _ => TransformChoice::RandomSign,
        })
    }
    pub fn topology(&self) -> &str {
        self.topology.as_deref().unwrap_or("butterfly")
    }
    pub fn q(&self) -> u32 {
        self.q.unwrap_or(crate::multicast::DEFAULT_Q)
    }
    pub fn snr_db(&self) -> Vec<f64> {
        self.snr_db.clone().unwrap_or_else(|| vec![10.0, 20.0, 30.0, 40.0])
    }
    pub fn rate_margin(&self) -> f64 {
        self.rate_margin.unwrap_or(0.25)
    }
    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or(crate::scc::DEFAULT_BETA)
    }

    /// Loads the multicast graph from `graph_file` or `topology`.
    pub fn graph(&self) -> Result<NetworkGraph> {
        match &self.graph_file {
            Some(p) => NetworkGraph::read(p),
            None => NetworkGraph::named(self.topology()),
        }
    }
}

/// All violated preconditions, in field order; empty when the config can run.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut bad = |field: &'static str, message: String| out.push(Violation { field, message });
    let sub = cfg.subcommand();

    if cfg.master_seed.is_none() {
        bad("master_seed", "required (no wall-clock seeding)".into());
    }
    if cfg.trials() == 0 && sub != Subcommand::Rates {
        bad("trials", "must be >= 1".into());
    }
    let (n, k) = (cfg.n(), cfg.k());
    if n < 2 {
        bad("n", format!("must be >= 2, got {n}"));
    }
    if k == 0 {
        bad("k", "must be >= 1".into());
    }
    if k >= n {
        bad("k", format!("k must be < n (k = {k}, n = {n})"));
    }
    let rho = cfg.rho();
    if !(rho > 0.0 && rho.is_finite()) {
        bad("rho", format!("must be > 0, got {rho}"));
    }
    let dims_ok = n >= 2 && k >= 1 && k < n && rho > 0.0 && rho.is_finite();
    match cfg.m_default() {
        Some(m) if dims_ok && (m <= k || m > n) && sub != Subcommand::MulticastSim => {
            bad("m", format!("need k < m <= n, got m = {m}"));
        }
        None if dims_ok && sub != Subcommand::MulticastSim => {
            if let Err(e) = plan_dimensions(n, k, rho) {
                bad("rho", format!("no valid plan: {e}"));
            }
        }
        _ => {}
    }
    if !(1..=20).contains(&cfg.symbol_rate()) {
        bad("symbol_rate", "must lie in 1..=20".into());
    }
    let alpha = cfg.alpha();
    if !(0.0..1.0).contains(&alpha) {
        bad("alpha", format!("{alpha} outside [0, 1)"));
    }
    let nr = cfg.noise_ratio();
    if !(0.0..1.0).contains(&nr) {
        bad("noise_ratio", format!("{nr} outside [0, 1)"));
    }

    match sub {
        Subcommand::MulticastSim => {
            if !(1..=8).contains(&cfg.q()) {
                bad("q", "must lie in 1..=8".into());
            }
            match cfg.graph() {
                Err(e) => bad("topology", e.to_string()),
                Ok(g) if g.sources().len() > n => bad(
                    "topology",
                    format!("{} graph sources exceed n = {n}", g.sources().len()),
                ),
                Ok(_) => {}
            }
            if cfg.transform() == TransformChoice::Harmonic && k != 1 {
                bad("transform", "harmonic ensemble is 1-sparse; set k = 1".into());
            }
        }
        Subcommand::SccSim => {
            let snr = cfg.snr_db();
            if snr.is_empty() || snr.iter().any(|s| !s.is_finite()) {
                bad("snr_db", "need a non-empty list of finite values".into());
            }
            if let Some(tau) = cfg.tau {
                if !(tau > 0.0 && tau.is_finite()) {
                    bad("tau", format!("must be > 0, got {tau}"));
                }
            }
            if !(cfg.beta() >= 1.0) {
                bad("beta", format!("must be >= 1, got {}", cfg.beta()));
            }
            if !cfg.rate_margin().is_finite() {
                bad("rate_margin", "must be finite".into());
            }
            if let (Some(rate), Ok(m)) = (cfg.rate, cfg.m()) {
                if let Err(e) = codebook_bits(m, rate) {
                    bad("rate", format!("{e} (at most {MAX_CODEBOOK_BITS} bits)"));
                }
            }
        }
        _ => {}
    }
    out
}
