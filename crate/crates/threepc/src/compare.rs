//! Private comparison on bit shares over `Z_67`.
//!
//! P0 and P1 hold additive shares of the bits of a secret `x`, a public `r`,
//! and a common random bit `beta`. They derive per-bit codewords whose sum
//! (after masking with a common random nonzero scalar and a common random
//! permutation) contains a zero iff the comparison outcome flips `beta`; the
//! helper reconstructs the codewords and learns only `beta ^ (x > r)`.

use ring_core::{RingId, RingTensor};

use crate::error::{ProtoError, Result};
use crate::session::{ProtocolContext, Role};
use crate::tags;

const ZP: RingId = RingId::Zp;

fn bit(v: u64, i: u32) -> u64 {
    (v >> i) & 1
}

fn max_value(nbits: u32) -> u64 {
    if nbits == 64 {
        u64::MAX
    } else {
        (1u64 << nbits) - 1
    }
}

/// Party side (P0/P1). `bit_shares` is `[n, nbits]` over `Z_67`, LSB first;
/// `r` and `beta` are per-element and known to both computing parties.
/// The helper passes `None` everywhere and receives `beta ^ (x > r)` per
/// element.
pub fn private_compare(
    ctx: &mut ProtocolContext,
    bit_shares: Option<&RingTensor>,
    r: Option<&[u64]>,
    beta: Option<&[u64]>,
    n: usize,
    nbits: u32,
) -> Result<Option<Vec<u64>>> {
    let nb = nbits as usize;
    match ctx.role {
        Role::P2 => {
            let c0 = ctx.recv_tensor(Role::P0, tags::PC_C, ZP, &[n, nb])?;
            let c1 = ctx.recv_tensor(Role::P1, tags::PC_C, ZP, &[n, nb])?;
            let d = c0.add(&c1)?;
            let out = (0..n)
                .map(|idx| u64::from(d.data()[idx * nb..(idx + 1) * nb].contains(&0)))
                .collect();
            Ok(Some(out))
        }
        role => {
            let j = role.j();
            let shares = bit_shares
                .ok_or_else(|| ProtoError::Precondition("missing bit shares".into()))?;
            if shares.shape() != [n, nb] {
                return Err(ProtoError::Precondition(format!(
                    "bit shares shaped {:?}, want [{n}, {nb}]",
                    shares.shape()
                )));
            }
            let r = r.ok_or_else(|| ProtoError::Precondition("missing r".into()))?;
            let beta = beta.ok_or_else(|| ProtoError::Precondition("missing beta".into()))?;
            let mut payload = Vec::with_capacity(n * nb);
            for idx in 0..n {
                let x = &shares.data()[idx * nb..(idx + 1) * nb];
                let mut c = vec![0u64; nb];
                if beta[idx] == 1 && r[idx] == max_value(nbits) {
                    // x > r is impossible; emit shares of (0, 1, 1, ...) so the
                    // helper always sees exactly one zero.
                    for (i, ci) in c.iter_mut().enumerate() {
                        let u = ctx.k01().next_elem(ZP);
                        *ci = match (i, j) {
                            (0, 0) => u,
                            (0, _) => ZP.neg(u),
                            (_, 0) => u,
                            (_, _) => ZP.sub(1, u),
                        };
                    }
                } else {
                    // t = r for beta = 0 (zero iff x > r), r + 1 for beta = 1
                    // (zero iff x < r + 1).
                    let t = r[idx] + u64::from(beta[idx] == 1);
                    let mut wsum = 0u64;
                    for i in (0..nb).rev() {
                        let ti = bit(t, i as u32);
                        let ci = if beta[idx] == 0 {
                            // t_i - x_i + 1 + wsum
                            ZP.add(ZP.add(j * (ti + 1), ZP.neg(x[i])), wsum)
                        } else {
                            // x_i - t_i + 1 + wsum
                            ZP.add(ZP.sub(ZP.add(x[i], j), ZP.mul(j, ti)), wsum)
                        };
                        c[i] = ci;
                        let w = ZP.sub(ZP.add(x[i], j * ti), ZP.mul(2 * ti, x[i]));
                        wsum = ZP.add(wsum, w);
                    }
                }
                // Common random nonzero mask and permutation.
                let s: Vec<u64> = (0..nb).map(|_| ctx.k01().next_nonzero(ZP)).collect();
                let perm = ctx.k01().next_permutation(nb);
                for i in 0..nb {
                    payload.push(ZP.mul(c[perm[i]], s[perm[i]]));
                }
            }
            let t = RingTensor::from_vec(ZP, vec![n, nb], payload)?;
            ctx.send_tensor(Role::P2, tags::PC_C, &t)?;
            Ok(None)
        }
    }
}
