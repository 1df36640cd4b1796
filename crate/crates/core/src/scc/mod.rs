//! Sparse channel coding for the high-SNR AWGN channel.
//!
//! A message picks a random `k`-sparse codeword `X` (outer layer: its
//! support; inner layer: gaussian values on it) and the channel carries
//! `W = Phi X`. The receiver denoises with an L2-constrained L1 program,
//! thresholds to a support, then runs ML among codewords on that support.

mod analysis;
mod codebook;
mod decode;
mod monte_carlo;

pub use analysis::{
    achievable_rate, achievable_rate_terms, approx_rate, approx_rate_natural, capacity,
    error_exponent_bound, support_error_analytic, ChannelConfig, ErrorExponent,
    SupportErrorModel, SupportErrorReport, HIGH_SNR,
};
pub use codebook::{
    awgn, build_codebook, codebook_bits, CodebookConfig, Encoded, RipRegime, SccCodebook,
    MAX_CODEBOOK_BITS,
};
pub use decode::{
    decode, denoise_stage, failure_stage, ml_stage, noise_budget, support_stage, DecodeDiagnostics,
    DecodeStage, DecoderConfig, DEFAULT_BETA,
};
pub use monte_carlo::{monte_carlo_pe, wilson_interval, PeEstimate, Z95};
