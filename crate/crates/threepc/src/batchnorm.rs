//! Folded batch normalization on shares: per-channel multiply by a shared
//! scale, then add a shared offset held at the doubled fixed-point scale so
//! the caller's single rescale lands both terms on the working scale.

use ring_core::{RingId, RingTensor};

use crate::beaver::mult_elementwise;
use crate::error::{ProtoError, Result};
use crate::session::{ProtocolContext, Role};

const ZL: RingId = RingId::ZL;

/// Broadcast a per-channel `[c]` tensor across `shape` (channels last).
fn tile_channels(t: &RingTensor, shape: &[usize]) -> Result<RingTensor> {
    let c = *shape.last().unwrap();
    if t.numel() != c {
        return Err(ProtoError::Precondition(format!(
            "{} channel parameters for {c} channels",
            t.numel()
        )));
    }
    let n: usize = shape.iter().product();
    let data = (0..n).map(|i| t.data()[i % c]).collect();
    Ok(RingTensor::from_vec(ZL, shape.to_vec(), data)?)
}

/// `x * mult + bias` with per-channel shared `mult` (scale s) and `bias`
/// (scale 2s), channels last. The helper passes `None` tensors and gets
/// `None`.
pub fn fused_batchnorm(
    ctx: &mut ProtocolContext,
    x: Option<&RingTensor>,
    mult: Option<&RingTensor>,
    bias: Option<&RingTensor>,
    shape: &[usize],
) -> Result<Option<RingTensor>> {
    match ctx.role {
        Role::P2 => mult_elementwise(ctx, None, None, shape),
        _ => {
            let x = x.ok_or_else(|| ProtoError::Precondition("missing input share".into()))?;
            let mult =
                mult.ok_or_else(|| ProtoError::Precondition("missing scale share".into()))?;
            let bias =
                bias.ok_or_else(|| ProtoError::Precondition("missing offset share".into()))?;
            let m_full = tile_channels(mult, shape)?;
            let b_full = tile_channels(bias, shape)?;
            let prod = mult_elementwise(ctx, Some(x), Some(&m_full), shape)?
                .ok_or_else(|| ProtoError::Malformed("mult gave no share".into()))?;
            Ok(Some(prod.add(&b_full)?))
        }
    }
}
