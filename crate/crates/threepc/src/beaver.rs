//! Beaver-triple multiplication on additive shares over `Z_{2^64}`.
//!
//! The helper party derives triple halves from the PRF keys it shares with
//! each party (so only one explicit share crosses the wire) and the output
//! carries a fresh zero share derived from the key the two computing parties
//! share, re-randomizing it.

use ring_core::{RingId, RingTensor};

use crate::error::{ProtoError, Result};
use crate::session::{ProtocolContext, Role};
use crate::tags;

const RING: RingId = RingId::ZL;

/// Draw the zero-share half for this party: P0 takes the PRF output, P1 its
/// negation, so the two halves cancel.
fn zero_share(ctx: &mut ProtocolContext, shape: &[usize]) -> RingTensor {
    let u = ctx.k01().next_tensor(RING, shape);
    match ctx.role {
        Role::P0 => u,
        Role::P1 => u.neg(),
        Role::P2 => unreachable!("helper holds no zero share"),
    }
}

/// Elementwise product of two shared tensors. P0/P1 pass their shares and get
/// a share of `x * y`; the helper passes `None` and gets `None`.
pub fn mult_elementwise(
    ctx: &mut ProtocolContext,
    x: Option<&RingTensor>,
    y: Option<&RingTensor>,
    shape: &[usize],
) -> Result<Option<RingTensor>> {
    match ctx.role {
        Role::P2 => {
            let a0 = ctx.k0().next_tensor(RING, shape);
            let b0 = ctx.k0().next_tensor(RING, shape);
            let c0 = ctx.k0().next_tensor(RING, shape);
            let a1 = ctx.k1().next_tensor(RING, shape);
            let b1 = ctx.k1().next_tensor(RING, shape);
            let c = a0.add(&a1)?.mul(&b0.add(&b1)?)?;
            let c1 = c.sub(&c0)?;
            ctx.send_tensor(Role::P1, tags::BEAVER_C1, &c1)?;
            Ok(None)
        }
        j => {
            let x = x.ok_or_else(|| ProtoError::Precondition("missing x share".into()))?;
            let y = y.ok_or_else(|| ProtoError::Precondition("missing y share".into()))?;
            let (a, b, c, peer) = match j {
                Role::P0 => {
                    let a = ctx.k0().next_tensor(RING, shape);
                    let b = ctx.k0().next_tensor(RING, shape);
                    let c = ctx.k0().next_tensor(RING, shape);
                    (a, b, c, Role::P1)
                }
                Role::P1 => {
                    let a = ctx.k1().next_tensor(RING, shape);
                    let b = ctx.k1().next_tensor(RING, shape);
                    let c = ctx.recv_tensor(Role::P2, tags::BEAVER_C1, RING, shape)?;
                    (a, b, c, Role::P0)
                }
                Role::P2 => unreachable!(),
            };
            let e_mine = x.sub(&a)?;
            let f_mine = y.sub(&b)?;
            ctx.send_tensor(peer, tags::BEAVER_E, &e_mine)?;
            ctx.send_tensor(peer, tags::BEAVER_F, &f_mine)?;
            let e_theirs = ctx.recv_tensor(peer, tags::BEAVER_E, RING, shape)?;
            let f_theirs = ctx.recv_tensor(peer, tags::BEAVER_F, RING, shape)?;
            let e = e_mine.add(&e_theirs)?;
            let f = f_mine.add(&f_theirs)?;
            // z_j = -j*e*f + x_j*f + e*y_j + c_j + u_j
            let mut z = x.mul(&f)?.add(&e.mul(y)?)?.add(&c)?;
            if j == Role::P1 {
                z = z.sub(&e.mul(&f)?)?;
            }
            z = z.add(&zero_share(ctx, shape))?;
            Ok(Some(z))
        }
    }
}

/// Matrix product of shared `l x m` and `m x n` tensors via a matrix Beaver
/// triple. Wire cost: l*n elements from the helper plus 2(l*m + m*n) for the
/// masked exchange.
pub fn matmul_3pc(
    ctx: &mut ProtocolContext,
    x: Option<&RingTensor>,
    y: Option<&RingTensor>,
    dims: (usize, usize, usize),
) -> Result<Option<RingTensor>> {
    let (l, m, n) = dims;
    let (xs, ys, zs) = (vec![l, m], vec![m, n], vec![l, n]);
    match ctx.role {
        Role::P2 => {
            let a0 = ctx.k0().next_tensor(RING, &xs);
            let b0 = ctx.k0().next_tensor(RING, &ys);
            let c0 = ctx.k0().next_tensor(RING, &zs);
            let a1 = ctx.k1().next_tensor(RING, &xs);
            let b1 = ctx.k1().next_tensor(RING, &ys);
            let c = a0.add(&a1)?.matmul(&b0.add(&b1)?)?;
            let c1 = c.sub(&c0)?;
            ctx.send_tensor(Role::P1, tags::BEAVER_C1, &c1)?;
            Ok(None)
        }
        j => {
            let x = x.ok_or_else(|| ProtoError::Precondition("missing x share".into()))?;
            let y = y.ok_or_else(|| ProtoError::Precondition("missing y share".into()))?;
            let (a, b, c, peer) = match j {
                Role::P0 => {
                    let a = ctx.k0().next_tensor(RING, &xs);
                    let b = ctx.k0().next_tensor(RING, &ys);
                    let c = ctx.k0().next_tensor(RING, &zs);
                    (a, b, c, Role::P1)
                }
                Role::P1 => {
                    let a = ctx.k1().next_tensor(RING, &xs);
                    let b = ctx.k1().next_tensor(RING, &ys);
                    let c = ctx.recv_tensor(Role::P2, tags::BEAVER_C1, RING, &zs)?;
                    (a, b, c, Role::P0)
                }
                Role::P2 => unreachable!(),
            };
            let e_mine = x.sub(&a)?;
            let f_mine = y.sub(&b)?;
            ctx.send_tensor(peer, tags::BEAVER_E, &e_mine)?;
            ctx.send_tensor(peer, tags::BEAVER_F, &f_mine)?;
            let e_theirs = ctx.recv_tensor(peer, tags::BEAVER_E, RING, &xs)?;
            let f_theirs = ctx.recv_tensor(peer, tags::BEAVER_F, RING, &ys)?;
            let e = e_mine.add(&e_theirs)?;
            let f = f_mine.add(&f_theirs)?;
            let mut z = x.matmul(&f)?.add(&e.matmul(y)?)?.add(&c)?;
            if j == Role::P1 {
                z = z.sub(&e.matmul(&f)?)?;
            }
            z = z.add(&zero_share(ctx, &zs))?;
            Ok(Some(z))
        }
    }
}
