//! Canonical byte encoding of tensors for transmission.
//!
//! Elements of the two 64-bit rings are little-endian 8-byte words; `Z_67`
//! elements are one byte each. Shapes and rings are never sent: both ends of
//! a protocol step know them from the program being executed.

use crate::{Result, RingError, RingId, RingTensor};

pub fn encode_tensor(t: &RingTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(t.numel() * t.ring().elem_bytes());
    match t.ring() {
        RingId::ZL | RingId::ZLm1 => {
            for &x in t.data() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        RingId::Zp => {
            for &x in t.data() {
                out.push(x as u8);
            }
        }
    }
    out
}

pub fn decode_tensor(ring: RingId, shape: &[usize], payload: &[u8]) -> Result<RingTensor> {
    let n: usize = shape.iter().product();
    let want = n * ring.elem_bytes();
    if payload.len() != want {
        return Err(RingError::BadPayloadLength {
            got: payload.len(),
            want,
        });
    }
    let data: Vec<u64> = match ring {
        RingId::ZL | RingId::ZLm1 => payload
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect(),
        RingId::Zp => payload.iter().map(|&b| b as u64).collect(),
    };
    if let Some(&bad) = data.iter().find(|&&x| !ring.is_canonical(x)) {
        return Err(RingError::NotCanonical(bad, ring));
    }
    RingTensor::from_vec(ring, shape.to_vec(), data)
}
