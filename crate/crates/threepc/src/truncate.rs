//! Local fixed-point rescaling: each party arithmetic-shifts its own share,
//! one of them on the negated share. The reconstruction is within one unit of
//! the true shifted value, which fixed-point inference tolerates.

use ring_core::{RingId, RingTensor};

use crate::error::{ProtoError, Result};
use crate::session::{ProtocolContext, Role};

const ZL: RingId = RingId::ZL;

/// One party's shift of one share word. P0 shifts its share as a signed
/// value; P1 shifts the negated share and negates back, so the two rounding
/// errors nearly cancel.
pub(crate) fn shift_share(role: Role, v: u64, s: u32) -> u64 {
    match role {
        Role::P0 => ((v as i64) >> s) as u64,
        Role::P1 => (((v.wrapping_neg() as i64) >> s) as u64).wrapping_neg(),
        Role::P2 => unreachable!("helper holds no shares"),
    }
}

/// Divide a shared value by 2^s (rounding toward negative infinity, up to one
/// unit of error). No communication; the helper passes `None` and gets `None`.
pub fn scaledown_local(
    ctx: &mut ProtocolContext,
    a: Option<&RingTensor>,
    s: u32,
) -> Result<Option<RingTensor>> {
    match ctx.role {
        Role::P2 => Ok(None),
        role => {
            let a = a.ok_or_else(|| ProtoError::Precondition("missing share".into()))?;
            ctx.metrics.ops.scaledown_elems += a.numel() as u64;
            let data = a.data().iter().map(|&v| shift_share(role, v, s)).collect();
            Ok(Some(RingTensor::from_vec(ZL, a.shape().to_vec(), data)?))
        }
    }
}
