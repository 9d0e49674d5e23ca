//! Sign extraction and rectification on shares over `Z_{2^64}`.

use ring_core::{RingId, RingTensor};

use crate::beaver::mult_elementwise;
use crate::convert::share_convert_core;
use crate::error::{ProtoError, Result};
use crate::msb::msb_core;
use crate::session::{ProtocolContext, Role};

const ZL: RingId = RingId::ZL;

/// Shares of `1` where the signed value is >= 0, `0` where it is negative.
/// Values must satisfy |v| < 2^62. The helper passes `None` and gets `None`.
pub fn drelu(
    ctx: &mut ProtocolContext,
    a: Option<&RingTensor>,
    shape: &[usize],
) -> Result<Option<RingTensor>> {
    let n: usize = shape.iter().product();
    let base = ctx.alloc_instances(n);
    ctx.record_fresh(base, n);
    drelu_core(ctx, a, shape, base)
}

pub(crate) fn drelu_core(
    ctx: &mut ProtocolContext,
    a: Option<&RingTensor>,
    shape: &[usize],
    base: u64,
) -> Result<Option<RingTensor>> {
    let n: usize = shape.iter().product();
    ctx.metrics.ops.comparisons += n as u64;
    // Double the input: the sign bit survives (|v| < 2^62) and the doubled
    // value cannot be 2^64 - 1, which the conversion requires.
    let doubled = a.map(|t| t.add(t)).transpose()?;
    let conv = share_convert_core(ctx, doubled.as_ref(), shape, base)?;
    let msb = msb_core(ctx, conv.as_ref(), shape, base)?;
    match ctx.role {
        Role::P2 => Ok(None),
        role => {
            let msb = msb.ok_or_else(|| ProtoError::Malformed("msb gave no share".into()))?;
            let j = role.j();
            let data = msb.data().iter().map(|&m| ZL.sub(j, m)).collect();
            Ok(Some(RingTensor::from_vec(ZL, shape.to_vec(), data)?))
        }
    }
}

/// max(v, 0) on shares. The helper passes `None` and gets `None`.
pub fn relu(
    ctx: &mut ProtocolContext,
    a: Option<&RingTensor>,
    shape: &[usize],
) -> Result<Option<RingTensor>> {
    let n: usize = shape.iter().product();
    ctx.metrics.ops.relu += n as u64;
    let b = drelu(ctx, a, shape)?;
    mult_elementwise(ctx, b.as_ref(), a, shape)
}
