//! Constructive strong-lottery-ticket toolkit for random binary ReLU
//! networks.
//!
//! The crate builds, embeds, and certifies pruned {±1} ReLU networks that
//! reproduce fully-connected ReLU targets: exactly for integer targets,
//! within a certified uniform error for real ones. The pieces:
//!
//! - [`network`]: shape-checked FC ReLU networks (real / integer / binary)
//!   with float and exact rational backends, plus supermask evaluation.
//! - [`precision`]: decimal truncation to logarithmic precision and the
//!   rescaling of finite-precision networks to integer ones, with exact
//!   error certificates.
//! - [`construct`]: the deterministic diamond-chain / mirrored-pair gadget
//!   constructions that represent any integer network by pruning a binary
//!   one.
//! - [`embed`]: uniform ±1 sampling, the width-factor bound, greedy layerwise
//!   embedding of a gadget plan into a random network, the end-to-end
//!   pipeline, and Monte-Carlo failure-rate estimation.
//! - [`verify`]: exact-equality and uniform-error certificates, sign
//!   agreement, and overparameterization accounting.
//! - [`expressivity`]: brute-force separation of pruned one-hidden-layer
//!   binary networks from the unpruned sign-flip class.
//!
//! Monte-Carlo trials, point verification, and enumeration run data-parallel
//! under the `parallel` feature (default); disabling it yields a fully
//! sequential build with identical results.

pub mod construct;
pub mod embed;
pub mod error;
pub mod expressivity;
pub mod matrix;
pub mod network;
pub mod par;
pub mod precision;
pub mod ratio;
pub mod rng;
pub mod verify;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use network::{
    masked_eval_f64, masked_eval_rational, Backend, BinaryNetwork, EvalPoint, IntegerNetwork,
    MaskMatrix, MaskSet, NetworkFile, TargetNetwork,
};
pub use ratio::Rat;
