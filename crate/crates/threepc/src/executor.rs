//! Executes a lowered integer program on secret shares.
//!
//! P0 and P1 walk the statement list holding shares of every named tensor;
//! the helper walks the same list holding only the declared shapes, joining
//! in wherever a statement needs an interactive protocol. Data movement and
//! additions stay local. Every send during a statement is attributed to that
//! statement's operation name.

use std::collections::{BTreeMap, HashMap};

use model_compiler::{FixedModel, IntTensor, LlilProgram, OpKind};
use ring_core::{i64_to_zl, share_tensor, RingId, RingTensor, SecretShare};

use crate::batchnorm::fused_batchnorm;
use crate::beaver::matmul_3pc;
use crate::conv::conv2d_3pc;
use crate::error::{ProtoError, Result};
use crate::maxpool::maxpool_argmax;
use crate::relu::relu;
use crate::session::{ProtocolContext, Role};
use crate::truncate::scaledown_local;

const ZL: RingId = RingId::ZL;

/// One party's half of the model state: shares of the quantized weights and
/// of the input.
#[derive(Clone)]
pub struct SharedInputs {
    pub weights: BTreeMap<String, RingTensor>,
    pub input: RingTensor,
}

pub fn int_to_ring(t: &IntTensor) -> RingTensor {
    RingTensor::from_i64_vec(t.dims.clone(), &t.data).expect("i64 data is always in range")
}

/// Split a quantized model and input into per-party executor inputs, drawing
/// masks from `stream`. Used by tests and the in-process driver; a deployed
/// client would deal shares itself.
pub fn deal_shares(
    model: &FixedModel,
    input: &IntTensor,
    stream: &mut ring_core::PrfStream,
) -> [SharedInputs; 2] {
    let mut w0 = BTreeMap::new();
    let mut w1 = BTreeMap::new();
    for (name, t) in &model.weights {
        let SecretShare { part0, part1 } = share_tensor(&int_to_ring(t), stream);
        w0.insert(name.clone(), part0);
        w1.insert(name.clone(), part1);
    }
    let SecretShare { part0, part1 } = share_tensor(&int_to_ring(input), stream);
    [
        SharedInputs {
            weights: w0,
            input: part0,
        },
        SharedInputs {
            weights: w1,
            input: part1,
        },
    ]
}

/// Zero-pad a shared h x w x c tensor for `same` convolution. Both parties
/// pad with zeros, which is a valid sharing of zero.
fn pad_same_share(x: &RingTensor, f: usize, g: usize) -> RingTensor {
    let (h, w, c) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let (ph, pw) = ((f - 1) / 2, (g - 1) / 2);
    let ow = w + 2 * pw;
    let mut data = vec![0u64; (h + 2 * ph) * ow * c];
    for y in 0..h {
        for xx in 0..w {
            for ch in 0..c {
                data[((y + ph) * ow + (xx + pw)) * c + ch] = x.data()[(y * w + xx) * c + ch];
            }
        }
    }
    RingTensor::from_vec(ZL, vec![h + 2 * ph, ow, c], data).unwrap()
}

fn pad_share(x: &RingTensor, spec: &[[usize; 2]]) -> RingTensor {
    let out_dims: Vec<usize> = x
        .shape()
        .iter()
        .zip(spec)
        .map(|(&d, p)| d + p[0] + p[1])
        .collect();
    let strides = |dims: &[usize]| -> Vec<usize> {
        let mut s = vec![1; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            s[i] = s[i + 1] * dims[i + 1];
        }
        s
    };
    let in_strides = strides(x.shape());
    let out_strides = strides(&out_dims);
    let mut data = vec![0u64; out_dims.iter().product()];
    for flat in 0..x.numel() {
        let mut rem = flat;
        let mut off = 0usize;
        for d in 0..x.shape().len() {
            let idx = rem / in_strides[d];
            rem %= in_strides[d];
            off += (idx + spec[d][0]) * out_strides[d];
        }
        data[off] = x.data()[flat];
    }
    RingTensor::from_vec(ZL, out_dims, data).unwrap()
}

fn transpose2_share(x: &RingTensor) -> RingTensor {
    let (m, n) = (x.shape()[0], x.shape()[1]);
    let mut data = vec![0u64; m * n];
    for i in 0..m {
        for j in 0..n {
            data[j * m + i] = x.data()[i * n + j];
        }
    }
    RingTensor::from_vec(ZL, vec![n, m], data).unwrap()
}

fn concat_last_share(parts: &[&RingTensor]) -> RingTensor {
    let rank = parts[0].shape().len();
    let axis = rank - 1;
    let outer: usize = parts[0].shape()[..axis].iter().product();
    let last: usize = parts.iter().map(|p| p.shape()[axis]).sum();
    let mut dims = parts[0].shape().to_vec();
    dims[axis] = last;
    let mut data = Vec::with_capacity(outer * last);
    for row in 0..outer {
        for p in parts {
            let n = p.shape()[axis];
            data.extend_from_slice(&p.data()[row * n..(row + 1) * n]);
        }
    }
    RingTensor::from_vec(ZL, dims, data).unwrap()
}

/// Gather pooling-window candidate k (k = dy*b + dx) across all windows and
/// channels of an h x w x c tensor, as one lane-major tensor.
fn pool_candidate(x: &RingTensor, a: usize, b: usize, k: usize) -> RingTensor {
    let (h, w, c) = (x.shape()[0], x.shape()[1], x.shape()[2]);
    let (oh, ow) = (h / a, w / b);
    let (dy, dx) = (k / b, k % b);
    let mut data = Vec::with_capacity(oh * ow * c);
    for y in 0..oh {
        for xx in 0..ow {
            for ch in 0..c {
                data.push(x.data()[((y * a + dy) * w + (xx * b + dx)) * c + ch]);
            }
        }
    }
    RingTensor::from_vec(ZL, vec![oh * ow * c], data).unwrap()
}

/// Run the statement list. P0/P1 pass their shares and get a share of the
/// program output; the helper passes `None` and gets `None`.
pub fn execute_program(
    ctx: &mut ProtocolContext,
    p: &LlilProgram,
    inputs: Option<&SharedInputs>,
) -> Result<Option<RingTensor>> {
    let mut env: HashMap<String, RingTensor> = HashMap::new();
    if let Some(inp) = inputs {
        if ctx.role == Role::P2 {
            return Err(ProtoError::Precondition("helper holds no shares".into()));
        }
        for (k, v) in &inp.weights {
            env.insert(k.clone(), v.clone());
        }
        env.insert(p.input.clone(), inp.input.clone());
    } else if ctx.role != Role::P2 {
        return Err(ProtoError::Precondition("computing party needs shares".into()));
    }
    let helper = ctx.role == Role::P2;

    for st in &p.stmts {
        let label = st.op.name().to_string();
        let get = |env: &HashMap<String, RingTensor>, name: &String| -> Result<RingTensor> {
            env.get(name)
                .cloned()
                .ok_or_else(|| ProtoError::Precondition(format!("no value for {name}")))
        };
        let out: Option<RingTensor> = ctx.with_op(&label, |ctx| -> Result<Option<RingTensor>> {
            match st.op {
                OpKind::MatMul => {
                    let (ad, bd) = (p.dims(&st.args[0])?, p.dims(&st.args[1])?);
                    let dims = (ad[0], ad[1], bd[1]);
                    let (x, y) = if helper {
                        (None, None)
                    } else {
                        (Some(get(&env, &st.args[0])?), Some(get(&env, &st.args[1])?))
                    };
                    matmul_3pc(ctx, x.as_ref(), y.as_ref(), dims)
                }
                OpKind::Conv => {
                    let wd = p.dims(&st.args[1])?.to_vec();
                    let same = st.attrs.padding.as_deref() == Some("same");
                    let xd = p.dims(&st.args[0])?.to_vec();
                    let in_shape = if same {
                        vec![xd[0] + wd[0] - 1, xd[1] + wd[1] - 1, xd[2]]
                    } else {
                        xd
                    };
                    let (x, w) = if helper {
                        (None, None)
                    } else {
                        let x = get(&env, &st.args[0])?;
                        let x = if same { pad_same_share(&x, wd[0], wd[1]) } else { x };
                        (Some(x), Some(get(&env, &st.args[1])?))
                    };
                    conv2d_3pc(ctx, x.as_ref(), w.as_ref(), &in_shape, &wd)
                }
                OpKind::Relu => {
                    let shape = p.dims(&st.args[0])?.to_vec();
                    let x = if helper { None } else { Some(get(&env, &st.args[0])?) };
                    relu(ctx, x.as_ref(), &shape)
                }
                OpKind::MaxPool => {
                    let [a, b] = st.attrs.pool.unwrap();
                    let xd = p.dims(&st.args[0])?.to_vec();
                    let (oh, ow, c) = (xd[0] / a, xd[1] / b, xd[2]);
                    let lanes = oh * ow * c;
                    let cands = if helper {
                        None
                    } else {
                        let x = get(&env, &st.args[0])?;
                        Some((0..a * b).map(|k| pool_candidate(&x, a, b, k)).collect::<Vec<_>>())
                    };
                    let res = maxpool_argmax(ctx, cands.as_deref(), lanes, a * b)?;
                    Ok(res.map(|(max, _)| max.reshape(vec![oh, ow, c]).unwrap()))
                }
                OpKind::ArgMax => {
                    let n = p.numel(&st.args[0])?;
                    let cands = if helper {
                        None
                    } else {
                        let x = get(&env, &st.args[0])?;
                        Some(
                            (0..n)
                                .map(|k| {
                                    RingTensor::from_vec(ZL, vec![1], vec![x.data()[k]]).unwrap()
                                })
                                .collect::<Vec<_>>(),
                        )
                    };
                    let res = maxpool_argmax(ctx, cands.as_deref(), 1, n)?;
                    Ok(res.map(|(_, idx)| idx))
                }
                OpKind::AvgPool => {
                    let [a, b] = st.attrs.pool.unwrap();
                    let mult = i64_to_zl(st.attrs.avg_mult.unwrap());
                    let s = st.attrs.scale.unwrap();
                    let out = if helper {
                        None
                    } else {
                        let x = get(&env, &st.args[0])?;
                        let mut acc = pool_candidate(&x, a, b, 0);
                        for k in 1..a * b {
                            acc = acc.add(&pool_candidate(&x, a, b, k))?;
                        }
                        // Rescale of the reciprocal product stays internal to
                        // the op and outside the scaledown accounting.
                        let role = ctx.role;
                        let data = acc
                            .scalar_mul(mult)
                            .data()
                            .iter()
                            .map(|&v| crate::truncate::shift_share(role, v, s))
                            .collect();
                        let xd = p.dims(&st.args[0])?;
                        Some(RingTensor::from_vec(
                            ZL,
                            vec![xd[0] / a, xd[1] / b, xd[2]],
                            data,
                        )?)
                    };
                    Ok(out)
                }
                OpKind::FusedBatchNorm => {
                    let shape = p.dims(&st.args[0])?.to_vec();
                    let (x, m, bsh) = if helper {
                        (None, None, None)
                    } else {
                        (
                            Some(get(&env, &st.args[0])?),
                            Some(get(&env, &st.args[1])?),
                            Some(get(&env, &st.args[2])?),
                        )
                    };
                    fused_batchnorm(ctx, x.as_ref(), m.as_ref(), bsh.as_ref(), &shape)
                }
                OpKind::ScaleDown => {
                    let s = st.attrs.scale.unwrap();
                    let x = if helper { None } else { Some(get(&env, &st.args[0])?) };
                    scaledown_local(ctx, x.as_ref(), s)
                }
                // Purely local data handling from here on.
                OpKind::MatAdd => {
                    if helper {
                        Ok(None)
                    } else {
                        Ok(Some(get(&env, &st.args[0])?.add(&get(&env, &st.args[1])?)?))
                    }
                }
                OpKind::Reshape => {
                    if helper {
                        Ok(None)
                    } else {
                        let dims = p.dims(st.output.as_ref().unwrap())?.to_vec();
                        Ok(Some(get(&env, &st.args[0])?.reshape(dims)?))
                    }
                }
                OpKind::Transpose => {
                    if helper {
                        Ok(None)
                    } else {
                        Ok(Some(transpose2_share(&get(&env, &st.args[0])?)))
                    }
                }
                OpKind::Pad => {
                    if helper {
                        Ok(None)
                    } else {
                        Ok(Some(pad_share(
                            &get(&env, &st.args[0])?,
                            st.attrs.pad.as_ref().unwrap(),
                        )))
                    }
                }
                OpKind::Concat => {
                    if helper {
                        Ok(None)
                    } else {
                        let parts = st
                            .args
                            .iter()
                            .map(|a| get(&env, a))
                            .collect::<Result<Vec<_>>>()?;
                        let refs: Vec<&RingTensor> = parts.iter().collect();
                        Ok(Some(concat_last_share(&refs)))
                    }
                }
            }
        })?;
        if let Some(t) = out {
            let name = st
                .output
                .clone()
                .unwrap_or_else(|| st.args[0].clone());
            env.insert(name, t);
        }
    }
    if helper {
        Ok(None)
    } else {
        env.remove(&p.output)
            .map(Some)
            .ok_or_else(|| ProtoError::Precondition(format!("no value for {}", p.output)))
    }
}
