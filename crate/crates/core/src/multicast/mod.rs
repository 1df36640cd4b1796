//! Multicast networks: max-flow, random linear network coding over
//! GF(2^q), and the SDCIC pipeline run across a DAG instead of a tree.

mod gf;
mod graph;
mod pipeline;
mod rlnc;

pub use gf::{FieldElement, GaloisField, DEFAULT_Q};
pub use graph::{
    brute_force_min_cut, max_flow, min_cut, Edge, MaxFlow, NetworkGraph, BRUTE_FORCE_EDGE_CAP,
};
pub use pipeline::{
    multicast_trials, rlnc_invertibility, sdcic_multicast_roundtrip, MulticastConfig,
    MulticastOutcome, Quantizer, ReceiverOutcome, QUANT_BITS,
};
pub use rlnc::{coding_rank, receiver_decode, rlnc_session, CodedPacket, RlncSession};
