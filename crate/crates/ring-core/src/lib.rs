//! Ring arithmetic and secret-sharing primitives for the 3-party inference
//! protocols.
//!
//! Three rings are supported: `Z_{2^64}` (the main computation ring),
//! `Z_{2^64 - 1}` (used for sign-bit extraction, which needs an odd modulus),
//! and `Z_67` (bit shares for private comparison). Values are carried as
//! canonical `u64` words; the wire encoding is little-endian 8-byte words for
//! the two large rings and a single byte for `Z_67`.

mod error;
mod prf;
mod ring;
mod share;
mod tensor;
pub mod wire;

pub use error::RingError;
pub use prf::PrfStream;
pub use ring::{i64_to_zl, zl_to_i64, RingId, ZLM1_MOD, ZP_MOD};
pub use share::{reconstruct_parts, share_tensor, share_tensor_with_mask, SecretShare};
pub use tensor::RingTensor;

pub type Result<T> = std::result::Result<T, RingError>;
