//! Shared maximum and arg-maximum via a sequential tournament.
//!
//! The candidates arrive as `count` tensors of `m` independent lanes (one
//! lane per pooling window). Each round compares the running maximum with the
//! next candidate using the sign protocol and keeps winner and winner index
//! with two multiplications. Earlier candidates win ties.

use ring_core::{RingId, RingTensor};

use crate::beaver::mult_elementwise;
use crate::error::{ProtoError, Result};
use crate::relu::drelu;
use crate::session::{ProtocolContext, Role};

const ZL: RingId = RingId::ZL;

/// Returns shares of (max, argmax) across the `count` candidate tensors, per
/// lane. The helper passes `None` for `slices` and gets `None`.
pub fn maxpool_argmax(
    ctx: &mut ProtocolContext,
    slices: Option<&[RingTensor]>,
    m: usize,
    count: usize,
) -> Result<Option<(RingTensor, RingTensor)>> {
    if count == 0 {
        return Err(ProtoError::Precondition("empty candidate list".into()));
    }
    let shape = [m];
    match ctx.role {
        Role::P2 => {
            for _ in 1..count {
                drelu(ctx, None, &shape)?;
                mult_elementwise(ctx, None, None, &shape)?;
                mult_elementwise(ctx, None, None, &shape)?;
            }
            Ok(None)
        }
        role => {
            let slices =
                slices.ok_or_else(|| ProtoError::Precondition("missing candidates".into()))?;
            if slices.len() != count || slices.iter().any(|s| s.numel() != m) {
                return Err(ProtoError::Precondition("candidate shape mismatch".into()));
            }
            let j = role.j();
            let mut cur = slices[0].clone();
            let mut curidx = RingTensor::zeros(ZL, vec![m]);
            for (k, cand) in slices.iter().enumerate().skip(1) {
                let diff = cur.sub(cand)?;
                let b = drelu(ctx, Some(&diff), &shape)?
                    .ok_or_else(|| ProtoError::Malformed("drelu gave no share".into()))?;
                // cur <- b*(cur - cand) + cand
                let keep = mult_elementwise(ctx, Some(&b), Some(&diff), &shape)?
                    .ok_or_else(|| ProtoError::Malformed("mult gave no share".into()))?;
                cur = keep.add(cand)?;
                // curidx <- b*(curidx - k) + k, with the public k contributed
                // by one party only.
                let k_term = ZL.mul(j, k as u64);
                let idx_diff = curidx.scalar_add(ZL.neg(k_term));
                let keep_idx = mult_elementwise(ctx, Some(&b), Some(&idx_diff), &shape)?
                    .ok_or_else(|| ProtoError::Malformed("mult gave no share".into()))?;
                curidx = keep_idx.scalar_add(k_term);
            }
            Ok(Some((cur, curidx)))
        }
    }
}
