//! Most-significant-bit extraction on shares over `Z_{2^64 - 1}`.
//!
//! Over an odd modulus, msb(a) equals the low bit of 2a, and masking 2a with
//! a helper-known random value turns the question into a public-value parity
//! plus one private comparison against the mask.

use ring_core::{RingId, RingTensor};

use crate::beaver::mult_elementwise;
use crate::compare::private_compare;
use crate::error::{ProtoError, Result};
use crate::session::{fresh_dest, ProtocolContext, Role};
use crate::tags;

const ZL: RingId = RingId::ZL;
const ZLM1: RingId = RingId::ZLm1;
const ZP: RingId = RingId::Zp;

/// Compute shares over `Z_{2^64}` of the most significant bit of a value
/// shared over `Z_{2^64 - 1}`. The helper passes `None` and gets `None`.
pub fn compute_msb(
    ctx: &mut ProtocolContext,
    a: Option<&RingTensor>,
    shape: &[usize],
) -> Result<Option<RingTensor>> {
    let n: usize = shape.iter().product();
    let base = ctx.alloc_instances(n);
    ctx.record_fresh(base, n);
    msb_core(ctx, a, shape, base)
}

pub(crate) fn msb_core(
    ctx: &mut ProtocolContext,
    a: Option<&RingTensor>,
    shape: &[usize],
    base: u64,
) -> Result<Option<RingTensor>> {
    let n: usize = shape.iter().product();
    let n_to_p0 = (0..n).filter(|&i| fresh_dest(base, i) == Role::P0).count();
    let n_to_p1 = n - n_to_p0;

    match ctx.role {
        Role::P2 => {
            // The random mask x is derived jointly with each party's key, so
            // sharing it costs no traffic; only its bits and low bit travel.
            let x0 = ctx.k0().next_tensor(ZLM1, &[n]);
            let x1 = ctx.k1().next_tensor(ZLM1, &[n]);
            let x = x0.add(&x1)?;
            let mut xb_p0 = Vec::with_capacity(n_to_p0 * 64);
            let mut xb_p1 = Vec::with_capacity(n_to_p1 * 64);
            for idx in 0..n {
                let dest = fresh_dest(base, idx);
                for i in 0..64 {
                    let b = (x.data()[idx] >> i) & 1;
                    let prf = match dest {
                        Role::P0 => ctx.k1().next_elem(ZP),
                        _ => ctx.k0().next_elem(ZP),
                    };
                    let explicit = ZP.sub(b, prf);
                    match dest {
                        Role::P0 => xb_p0.push(explicit),
                        _ => xb_p1.push(explicit),
                    }
                }
            }
            if n_to_p0 > 0 {
                let t = RingTensor::from_vec(ZP, vec![n_to_p0, 64], xb_p0)?;
                ctx.send_tensor(Role::P0, tags::MSB_XBITS, &t)?;
            }
            if n_to_p1 > 0 {
                let t = RingTensor::from_vec(ZP, vec![n_to_p1, 64], xb_p1)?;
                ctx.send_tensor(Role::P1, tags::MSB_XBITS, &t)?;
            }
            // Low bit of x, shared over Z_{2^64}.
            let mut lsb_p0 = Vec::with_capacity(n_to_p0);
            let mut lsb_p1 = Vec::with_capacity(n_to_p1);
            for idx in 0..n {
                let dest = fresh_dest(base, idx);
                let b = x.data()[idx] & 1;
                let prf = match dest {
                    Role::P0 => ctx.k1().next_elem(ZL),
                    _ => ctx.k0().next_elem(ZL),
                };
                let explicit = ZL.sub(b, prf);
                match dest {
                    Role::P0 => lsb_p0.push(explicit),
                    _ => lsb_p1.push(explicit),
                }
            }
            if n_to_p0 > 0 {
                let t = RingTensor::from_vec(ZL, vec![n_to_p0], lsb_p0)?;
                ctx.send_tensor(Role::P0, tags::MSB_XLSB, &t)?;
            }
            if n_to_p1 > 0 {
                let t = RingTensor::from_vec(ZL, vec![n_to_p1], lsb_p1)?;
                ctx.send_tensor(Role::P1, tags::MSB_XLSB, &t)?;
            }

            let bp = private_compare(ctx, None, None, None, n, 64)?
                .ok_or_else(|| ProtoError::Malformed("compare gave no helper output".into()))?;

            // Blinded comparison bit, shared over Z_{2^64}.
            let mut bp_p0 = Vec::with_capacity(n_to_p0);
            let mut bp_p1 = Vec::with_capacity(n_to_p1);
            for idx in 0..n {
                let dest = fresh_dest(base, idx);
                let prf = match dest {
                    Role::P0 => ctx.k1().next_elem(ZL),
                    _ => ctx.k0().next_elem(ZL),
                };
                let explicit = ZL.sub(bp[idx], prf);
                match dest {
                    Role::P0 => bp_p0.push(explicit),
                    _ => bp_p1.push(explicit),
                }
            }
            if n_to_p0 > 0 {
                let t = RingTensor::from_vec(ZL, vec![n_to_p0], bp_p0)?;
                ctx.send_tensor(Role::P0, tags::MSB_BETA, &t)?;
            }
            if n_to_p1 > 0 {
                let t = RingTensor::from_vec(ZL, vec![n_to_p1], bp_p1)?;
                ctx.send_tensor(Role::P1, tags::MSB_BETA, &t)?;
            }
            mult_elementwise(ctx, None, None, &[n])?;
            Ok(None)
        }
        role => {
            let j = role.j();
            let a = a.ok_or_else(|| ProtoError::Precondition("missing share".into()))?;
            if a.numel() != n {
                return Err(ProtoError::Precondition("share shape mismatch".into()));
            }
            let x_mine = match role {
                Role::P0 => ctx.k0().next_tensor(ZLM1, &[n]),
                _ => ctx.k1().next_tensor(ZLM1, &[n]),
            };
            let beta: Vec<u64> = (0..n).map(|_| ctx.k01().next_u64() & 1).collect();

            // Reveal r = 2a + x between the two parties.
            let y: Vec<u64> = a.data().iter().map(|&v| ZLM1.add(v, v)).collect();
            let r_mine: Vec<u64> = y
                .iter()
                .zip(x_mine.data())
                .map(|(&yv, &xv)| ZLM1.add(yv, xv))
                .collect();
            let peer = if role == Role::P0 { Role::P1 } else { Role::P0 };
            ctx.send_tensor(peer, tags::MSB_R, &RingTensor::from_vec(ZLM1, vec![n], r_mine.clone())?)?;
            let r_theirs = ctx.recv_tensor(peer, tags::MSB_R, ZLM1, &[n])?;
            let r: Vec<u64> = r_mine
                .iter()
                .zip(r_theirs.data())
                .map(|(&a, &b)| ZLM1.add(a, b))
                .collect();

            // Bit shares of the mask x.
            let n_me = if role == Role::P0 { n_to_p0 } else { n_to_p1 };
            let explicit = if n_me > 0 {
                Some(ctx.recv_tensor(Role::P2, tags::MSB_XBITS, ZP, &[n_me, 64])?)
            } else {
                None
            };
            let mut xbits = Vec::with_capacity(n * 64);
            let mut row = 0;
            for idx in 0..n {
                if fresh_dest(base, idx) == role {
                    let e = explicit.as_ref().unwrap();
                    xbits.extend_from_slice(&e.data()[row * 64..(row + 1) * 64]);
                    row += 1;
                } else {
                    let key = match role {
                        Role::P0 => ctx.k0(),
                        _ => ctx.k1(),
                    };
                    for _ in 0..64 {
                        xbits.push(key.next_elem(ZP));
                    }
                }
            }
            let xb = RingTensor::from_vec(ZP, vec![n, 64], xbits)?;

            // Shares of x's low bit over Z_{2^64}.
            let explicit = if n_me > 0 {
                Some(ctx.recv_tensor(Role::P2, tags::MSB_XLSB, ZL, &[n_me])?)
            } else {
                None
            };
            let mut xlsb = Vec::with_capacity(n);
            let mut row = 0;
            for idx in 0..n {
                if fresh_dest(base, idx) == role {
                    xlsb.push(explicit.as_ref().unwrap().data()[row]);
                    row += 1;
                } else {
                    let key = match role {
                        Role::P0 => ctx.k0(),
                        _ => ctx.k1(),
                    };
                    xlsb.push(key.next_elem(ZL));
                }
            }

            private_compare(ctx, Some(&xb), Some(&r), Some(&beta), n, 64)?;

            // Shares of beta' = beta ^ (x > r) over Z_{2^64}.
            let explicit = if n_me > 0 {
                Some(ctx.recv_tensor(Role::P2, tags::MSB_BETA, ZL, &[n_me])?)
            } else {
                None
            };
            let mut bp = Vec::with_capacity(n);
            let mut row = 0;
            for idx in 0..n {
                if fresh_dest(base, idx) == role {
                    bp.push(explicit.as_ref().unwrap().data()[row]);
                    row += 1;
                } else {
                    let key = match role {
                        Role::P0 => ctx.k0(),
                        _ => ctx.k1(),
                    };
                    bp.push(key.next_elem(ZL));
                }
            }

            // msb = (r0 ^ beta) ^ (x0 ^ beta'): the first xor is public, the
            // second needs one multiplication of the shared bits.
            let xlsb_t = RingTensor::from_vec(ZL, vec![n], xlsb)?;
            let bp_t = RingTensor::from_vec(ZL, vec![n], bp)?;
            let u = mult_elementwise(ctx, Some(&xlsb_t), Some(&bp_t), &[n])?
                .ok_or_else(|| ProtoError::Malformed("mult gave no share".into()))?;
            let mut out = Vec::with_capacity(n);
            for idx in 0..n {
                let w = ZL.sub(
                    ZL.add(xlsb_t.data()[idx], bp_t.data()[idx]),
                    ZL.mul(2, u.data()[idx]),
                );
                let c = (r[idx] & 1) ^ beta[idx];
                out.push(if c == 0 { w } else { ZL.sub(j, w) });
            }
            Ok(Some(RingTensor::from_vec(ZL, shape.to_vec(), out)?))
        }
    }
}
