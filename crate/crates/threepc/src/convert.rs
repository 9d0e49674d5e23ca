//! Share conversion from `Z_{2^64}` to `Z_{2^64 - 1}`.
//!
//! The parties mask their shares with common randomness and hand the masked
//! value to the helper, which re-shares its bits and the wrap indicators the
//! parties cannot compute locally. A private comparison on the bit shares
//! yields the final wrap correction. Requires the shared value to differ from
//! `2^64 - 1` (callers arrange this by doubling).

use ring_core::{RingId, RingTensor};

use crate::compare::private_compare;
use crate::error::{ProtoError, Result};
use crate::session::{fresh_dest, ProtocolContext, Role};
use crate::tags;

const ZL: RingId = RingId::ZL;
const ZLM1: RingId = RingId::ZLm1;
const ZP: RingId = RingId::Zp;

/// Convert shares of `a` over `Z_{2^64}` into shares of the same value over
/// `Z_{2^64 - 1}`. The helper passes `None` and gets `None`.
pub fn share_convert(
    ctx: &mut ProtocolContext,
    a: Option<&RingTensor>,
    shape: &[usize],
) -> Result<Option<RingTensor>> {
    let n: usize = shape.iter().product();
    let base = ctx.alloc_instances(n);
    ctx.record_fresh(base, n);
    share_convert_core(ctx, a, shape, base)
}

pub(crate) fn share_convert_core(
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
            let at0 = ctx.recv_tensor(Role::P0, tags::SC_ATILDE, ZL, &[n])?;
            let at1 = ctx.recv_tensor(Role::P1, tags::SC_ATILDE, ZL, &[n])?;
            let mut x = vec![0u64; n];
            let mut delta = vec![0u64; n];
            for idx in 0..n {
                let (v, wrapped) = at0.data()[idx].overflowing_add(at1.data()[idx]);
                x[idx] = v;
                delta[idx] = u64::from(wrapped);
            }
            // Bit shares of x: the party not receiving the explicit half
            // derives its half from the key it shares with the helper.
            let mut xb_p0 = Vec::with_capacity(n_to_p0 * 64);
            let mut xb_p1 = Vec::with_capacity(n_to_p1 * 64);
            for idx in 0..n {
                let dest = fresh_dest(base, idx);
                for i in 0..64 {
                    let b = (x[idx] >> i) & 1;
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
                ctx.send_tensor(Role::P0, tags::SC_XBITS, &t)?;
            }
            if n_to_p1 > 0 {
                let t = RingTensor::from_vec(ZP, vec![n_to_p1, 64], xb_p1)?;
                ctx.send_tensor(Role::P1, tags::SC_XBITS, &t)?;
            }
            // The helper-side wrap bit delta, shared explicitly to both.
            let mut d0 = Vec::with_capacity(n);
            let mut d1 = Vec::with_capacity(n);
            for idx in 0..n {
                let s0 = ctx.private.next_elem(ZLM1);
                d0.push(s0);
                d1.push(ZLM1.sub(delta[idx], s0));
            }
            ctx.send_tensor(Role::P0, tags::SC_DELTA, &RingTensor::from_vec(ZLM1, vec![n], d0)?)?;
            ctx.send_tensor(Role::P1, tags::SC_DELTA, &RingTensor::from_vec(ZLM1, vec![n], d1)?)?;

            let etap = private_compare(ctx, None, None, None, n, 64)?
                .ok_or_else(|| ProtoError::Malformed("compare gave no helper output".into()))?;

            // Shares of the masked comparison bit, split like the x bits.
            let mut e_p0 = Vec::with_capacity(n_to_p0);
            let mut e_p1 = Vec::with_capacity(n_to_p1);
            for idx in 0..n {
                let dest = fresh_dest(base, idx);
                let prf = match dest {
                    Role::P0 => ctx.k1().next_elem(ZLM1),
                    _ => ctx.k0().next_elem(ZLM1),
                };
                let explicit = ZLM1.sub(etap[idx], prf);
                match dest {
                    Role::P0 => e_p0.push(explicit),
                    _ => e_p1.push(explicit),
                }
            }
            if n_to_p0 > 0 {
                let t = RingTensor::from_vec(ZLM1, vec![n_to_p0], e_p0)?;
                ctx.send_tensor(Role::P0, tags::SC_ETA, &t)?;
            }
            if n_to_p1 > 0 {
                let t = RingTensor::from_vec(ZLM1, vec![n_to_p1], e_p1)?;
                ctx.send_tensor(Role::P1, tags::SC_ETA, &t)?;
            }
            Ok(None)
        }
        role => {
            let j = role.j();
            let a = a.ok_or_else(|| ProtoError::Precondition("missing share".into()))?;
            if a.numel() != n {
                return Err(ProtoError::Precondition("share shape mismatch".into()));
            }
            // Common randomness: the mask r (as two halves), its wrap bit,
            // and the comparison blinding bit.
            let mut r = Vec::with_capacity(n);
            let mut alpha = Vec::with_capacity(n);
            let mut r_mine = Vec::with_capacity(n);
            let mut eta2 = Vec::with_capacity(n);
            for _ in 0..n {
                let r0 = ctx.k01().next_u64();
                let r1 = ctx.k01().next_u64();
                eta2.push(ctx.k01().next_u64() & 1);
                let (rv, wrapped) = r0.overflowing_add(r1);
                r.push(rv);
                alpha.push(u64::from(wrapped));
                r_mine.push(if j == 0 { r0 } else { r1 });
            }
            let mut atilde = Vec::with_capacity(n);
            let mut beta_mine = Vec::with_capacity(n);
            for idx in 0..n {
                let (v, wrapped) = a.data()[idx].overflowing_add(r_mine[idx]);
                atilde.push(v);
                beta_mine.push(u64::from(wrapped));
            }
            ctx.send_tensor(Role::P2, tags::SC_ATILDE, &RingTensor::from_vec(ZL, vec![n], atilde)?)?;

            // Bit shares of the masked value.
            let n_me = if role == Role::P0 { n_to_p0 } else { n_to_p1 };
            let explicit = if n_me > 0 {
                Some(ctx.recv_tensor(Role::P2, tags::SC_XBITS, ZP, &[n_me, 64])?)
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

            let delta_sh = ctx.recv_tensor(Role::P2, tags::SC_DELTA, ZLM1, &[n])?;

            // Compare the masked value against r - 1 under the blinding bit.
            // For r = 0 the comparison result is ignored (the wrap answer is
            // public), but it still runs so traffic does not depend on r.
            let r_cmp: Vec<u64> = r.iter().map(|v| v.wrapping_sub(1)).collect();
            private_compare(ctx, Some(&xb), Some(&r_cmp), Some(&eta2), n, 64)?;

            // Shares of the blinded comparison bit, split like the x bits.
            let explicit = if n_me > 0 {
                Some(ctx.recv_tensor(Role::P2, tags::SC_ETA, ZLM1, &[n_me])?)
            } else {
                None
            };
            let mut etap_mine = Vec::with_capacity(n);
            let mut row = 0;
            for idx in 0..n {
                if fresh_dest(base, idx) == role {
                    etap_mine.push(explicit.as_ref().unwrap().data()[row]);
                    row += 1;
                } else {
                    let key = match role {
                        Role::P0 => ctx.k0(),
                        _ => ctx.k1(),
                    };
                    etap_mine.push(key.next_elem(ZLM1));
                }
            }

            // eta = (masked value >= r); unblind with eta2, then apply the
            // wrap corrections to land on shares of a over Z_{2^64 - 1}.
            let mut out = Vec::with_capacity(n);
            for idx in 0..n {
                let eta_mine = if r[idx] == 0 {
                    j
                } else if eta2[idx] == 0 {
                    etap_mine[idx]
                } else {
                    ZLM1.sub(j, etap_mine[idx])
                };
                let a_lm1 = if a.data()[idx] == u64::MAX { 0 } else { a.data()[idx] };
                let mut y = ZLM1.sub(a_lm1, beta_mine[idx]);
                y = ZLM1.sub(y, delta_sh.data()[idx]);
                y = ZLM1.sub(y, eta_mine);
                y = ZLM1.add(y, ZLM1.mul(j, ZLM1.add(alpha[idx], 1)));
                out.push(y);
            }
            Ok(Some(RingTensor::from_vec(ZLM1, shape.to_vec(), out)?))
        }
    }
}
