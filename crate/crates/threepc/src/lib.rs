//! Three-party semi-honest inference protocols over additively shared
//! tensors: two computing parties plus a helper that deals correlated
//! randomness and evaluates comparison codewords. All randomness is drawn
//! from per-pair PRF keys, so a session is a deterministic function of its
//! seed and every transcript is reproducible.

pub mod batchnorm;
pub mod beaver;
pub mod budget;
pub mod channel;
pub mod compare;
pub mod conv;
pub mod convert;
mod error;
pub mod executor;
pub mod maxpool;
pub mod metrics;
pub mod msb;
pub mod relu;
pub mod session;
pub mod tags;
pub mod truncate;

pub use error::{ProtoError, Result};
pub use metrics::{ChannelStat, FreshShareStat, Metrics, OpCounts};
pub use session::{
    derive_party_keys, fresh_dest, run_parties, PartyKeys, ProtocolContext, Role, ROLES,
};
