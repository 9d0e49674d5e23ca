//! Secure 2-d convolution: mask the input and filters in their original
//! shapes, exchange them once, then compute the product on locally reshaped
//! matrices. Masks for one input channel are reused across every output
//! channel, so the masked-input traffic does not grow with the output count.

use ring_core::{RingId, RingTensor};

use crate::error::{ProtoError, Result};
use crate::session::{ProtocolContext, Role};
use crate::tags;

const RING: RingId = RingId::ZL;

/// Row-major flatten of an f x g filter to an f*g x 1 column.
pub fn reshape_filter(y: &RingTensor) -> RingTensor {
    let n = y.numel();
    y.reshape(vec![n, 1]).expect("same element count")
}

/// im2col for stride-1 valid convolution: row i*qw + j of the result is the
/// f x g window of X at (i, j), flattened row-major.
pub fn reshape_input(x: &RingTensor, f: usize, g: usize) -> Result<RingTensor> {
    let (h, w) = (x.shape()[0], x.shape()[1]);
    if h < f || w < g {
        return Err(ProtoError::Precondition(format!(
            "filter {f}x{g} larger than input {h}x{w}"
        )));
    }
    let (qh, qw) = (h - f + 1, w - g + 1);
    let mut data = Vec::with_capacity(qh * qw * f * g);
    for i in 0..qh {
        for j in 0..qw {
            for k in 0..f {
                for l in 0..g {
                    data.push(x.data()[(k + i) * w + (l + j)]);
                }
            }
        }
    }
    Ok(RingTensor::from_vec(RING, vec![qh * qw, f * g], data)?)
}

/// Unflatten a (qh*qw) x 1 column back to qh x qw.
pub fn reshape_output(z: &RingTensor, qh: usize, qw: usize) -> Result<RingTensor> {
    if z.numel() != qh * qw {
        return Err(ProtoError::Precondition(format!(
            "cannot reshape {} elements to {qh}x{qw}",
            z.numel()
        )));
    }
    Ok(z.reshape(vec![qh, qw])?)
}

/// Channel c of an h x w x ch tensor, as h x w.
fn channel_slice(t: &RingTensor, c: usize) -> RingTensor {
    let (h, w, ch) = (t.shape()[0], t.shape()[1], t.shape()[2]);
    let data: Vec<u64> = (0..h * w).map(|i| t.data()[i * ch + c]).collect();
    RingTensor::from_vec(RING, vec![h, w], data).unwrap()
}

/// Filter slice (ci, co) of an f x g x ci x co tensor, as f x g.
fn filter_slice(t: &RingTensor, ci: usize, co: usize) -> RingTensor {
    let (f, g, nci, nco) = (
        t.shape()[0],
        t.shape()[1],
        t.shape()[2],
        t.shape()[3],
    );
    let data: Vec<u64> = (0..f * g)
        .map(|i| t.data()[(i * nci + ci) * nco + co])
        .collect();
    let _ = nco;
    RingTensor::from_vec(RING, vec![f, g], data).unwrap()
}

/// Assemble qh x qw x o output from per-output-channel qh*qw x 1 columns.
fn stack_channels(cols: &[RingTensor], qh: usize, qw: usize) -> RingTensor {
    let o = cols.len();
    let mut data = vec![0u64; qh * qw * o];
    for (c, col) in cols.iter().enumerate() {
        for i in 0..qh * qw {
            data[i * o + c] = col.data()[i];
        }
    }
    RingTensor::from_vec(RING, vec![qh, qw, o], data).unwrap()
}

/// Stride-1 valid convolution of shared input (h x w x i) with shared
/// filters (f x g x i x o), returning shares of the qh x qw x o output.
///
/// Wire cost in ring elements: h*w*i for each masked-input direction,
/// f*g*i*o for each masked-filter direction, qh*qw*o from the helper.
pub fn conv2d_3pc(
    ctx: &mut ProtocolContext,
    x: Option<&RingTensor>,
    w: Option<&RingTensor>,
    in_shape: &[usize],
    filter_shape: &[usize],
) -> Result<Option<RingTensor>> {
    let (h, wd, ci) = (in_shape[0], in_shape[1], in_shape[2]);
    let (f, g, o) = (filter_shape[0], filter_shape[1], filter_shape[3]);
    if filter_shape[2] != ci {
        return Err(ProtoError::Precondition("channel mismatch".into()));
    }
    if h < f || wd < g {
        return Err(ProtoError::Precondition("filter larger than input".into()));
    }
    let (qh, qw) = (h - f + 1, wd - g + 1);
    let xs = vec![h, wd, ci];
    let ws = filter_shape.to_vec();
    let zs = vec![qh, qw, o];

    match ctx.role {
        Role::P2 => {
            let a0 = ctx.k0().next_tensor(RING, &xs);
            let b0 = ctx.k0().next_tensor(RING, &ws);
            let c0 = ctx.k0().next_tensor(RING, &zs);
            let a1 = ctx.k1().next_tensor(RING, &xs);
            let b1 = ctx.k1().next_tensor(RING, &ws);
            let a = a0.add(&a1)?;
            let b = b0.add(&b1)?;
            let a_cols: Vec<RingTensor> = (0..ci)
                .map(|c| reshape_input(&channel_slice(&a, c), f, g))
                .collect::<Result<_>>()?;
            let mut cols = Vec::with_capacity(o);
            for oc in 0..o {
                let mut acc = RingTensor::zeros(RING, vec![qh * qw, 1]);
                for c in 0..ci {
                    let prod = a_cols[c].matmul(&reshape_filter(&filter_slice(&b, c, oc)))?;
                    acc = acc.add(&prod)?;
                }
                cols.push(acc);
            }
            let c_full = stack_channels(&cols, qh, qw);
            let c1 = c_full.sub(&c0)?;
            ctx.send_tensor(Role::P1, tags::BEAVER_C1, &c1)?;
            Ok(None)
        }
        j => {
            let x = x.ok_or_else(|| ProtoError::Precondition("missing input share".into()))?;
            let w = w.ok_or_else(|| ProtoError::Precondition("missing filter share".into()))?;
            let (a, b, c, peer) = match j {
                Role::P0 => {
                    let a = ctx.k0().next_tensor(RING, &xs);
                    let b = ctx.k0().next_tensor(RING, &ws);
                    let c = ctx.k0().next_tensor(RING, &zs);
                    (a, b, c, Role::P1)
                }
                Role::P1 => {
                    let a = ctx.k1().next_tensor(RING, &xs);
                    let b = ctx.k1().next_tensor(RING, &ws);
                    let c = ctx.recv_tensor(Role::P2, tags::BEAVER_C1, RING, &zs)?;
                    (a, b, c, Role::P0)
                }
                Role::P2 => unreachable!(),
            };
            let e_mine = x.sub(&a)?;
            let f_mine = w.sub(&b)?;
            ctx.send_tensor(peer, tags::BEAVER_E, &e_mine)?;
            ctx.send_tensor(peer, tags::BEAVER_F, &f_mine)?;
            let e_theirs = ctx.recv_tensor(peer, tags::BEAVER_E, RING, &xs)?;
            let f_theirs = ctx.recv_tensor(peer, tags::BEAVER_F, RING, &ws)?;
            let e = e_mine.add(&e_theirs)?;
            let ff = f_mine.add(&f_theirs)?;

            let e_cols: Vec<RingTensor> = (0..ci)
                .map(|c| reshape_input(&channel_slice(&e, c), f, g))
                .collect::<Result<_>>()?;
            let x_cols: Vec<RingTensor> = (0..ci)
                .map(|c| reshape_input(&channel_slice(x, c), f, g))
                .collect::<Result<_>>()?;
            let mut cols = Vec::with_capacity(o);
            for oc in 0..o {
                let mut acc = RingTensor::zeros(RING, vec![qh * qw, 1]);
                for cch in 0..ci {
                    let f_col = reshape_filter(&filter_slice(&ff, cch, oc));
                    let y_col = reshape_filter(&filter_slice(w, cch, oc));
                    // z_j = -j*E'F' + X'_j F' + E' Y'_j  (per channel)
                    acc = acc.add(&x_cols[cch].matmul(&f_col)?)?;
                    acc = acc.add(&e_cols[cch].matmul(&y_col)?)?;
                    if j == Role::P1 {
                        acc = acc.sub(&e_cols[cch].matmul(&f_col)?)?;
                    }
                }
                cols.push(acc);
            }
            let mut z = stack_channels(&cols, qh, qw).add(&c)?;
            let u = ctx.k01().next_tensor(RING, &zs);
            z = match j {
                Role::P0 => z.add(&u)?,
                _ => z.sub(&u)?,
            };
            Ok(Some(z))
        }
    }
}
