use std::collections::HashMap;

use crate::error::CompileError;
use crate::graph::{FloatTensor, IntTensor, OpKind};
use crate::llil::FixedModel;
use crate::loader::FloatModel;

/// Zero-pad a height x width x channels tensor symmetrically for `same`
/// convolution with an odd f x g filter.
pub fn pad_same_i64(x: &IntTensor, f: usize, g: usize) -> IntTensor {
    let (h, w, c) = (x.dims[0], x.dims[1], x.dims[2]);
    let (ph, pw) = ((f - 1) / 2, (g - 1) / 2);
    let mut out = IntTensor::zeros(vec![h + 2 * ph, w + 2 * pw, c]);
    let ow = w + 2 * pw;
    for y in 0..h {
        for xx in 0..w {
            for ch in 0..c {
                out.data[((y + ph) * ow + (xx + pw)) * c + ch] = x.data[(y * w + xx) * c + ch];
            }
        }
    }
    out
}

/// Valid convolution, stride 1, on two's-complement words (wrapping).
pub fn conv_valid_i64(x: &IntTensor, w: &IntTensor) -> IntTensor {
    let (h, wd, ci) = (x.dims[0], x.dims[1], x.dims[2]);
    let (f, g, _, co) = (w.dims[0], w.dims[1], w.dims[2], w.dims[3]);
    let (qh, qw) = (h - f + 1, wd - g + 1);
    let mut out = IntTensor::zeros(vec![qh, qw, co]);
    for y in 0..qh {
        for xx in 0..qw {
            for o in 0..co {
                let mut acc = 0i64;
                for k in 0..f {
                    for l in 0..g {
                        for c in 0..ci {
                            let xv = x.data[((y + k) * wd + (xx + l)) * ci + c];
                            let wv = w.data[((k * g + l) * ci + c) * co + o];
                            acc = acc.wrapping_add(xv.wrapping_mul(wv));
                        }
                    }
                }
                out.data[(y * qw + xx) * co + o] = acc;
            }
        }
    }
    out
}

pub fn matmul_i64(a: &IntTensor, b: &IntTensor) -> IntTensor {
    let (m, k, n) = (a.dims[0], a.dims[1], b.dims[1]);
    let mut out = IntTensor::zeros(vec![m, n]);
    for i in 0..m {
        for t in 0..k {
            let av = a.data[i * k + t];
            for j in 0..n {
                out.data[i * n + j] =
                    out.data[i * n + j].wrapping_add(av.wrapping_mul(b.data[t * n + j]));
            }
        }
    }
    out
}

fn pool_map(x: &IntTensor, a: usize, b: usize, fold: impl Fn(&[i64]) -> i64) -> IntTensor {
    let (h, w, c) = (x.dims[0], x.dims[1], x.dims[2]);
    let (oh, ow) = (h / a, w / b);
    let mut out = IntTensor::zeros(vec![oh, ow, c]);
    let mut window = Vec::with_capacity(a * b);
    for y in 0..oh {
        for xx in 0..ow {
            for ch in 0..c {
                window.clear();
                for dy in 0..a {
                    for dx in 0..b {
                        window.push(x.data[((y * a + dy) * w + (xx * b + dx)) * c + ch]);
                    }
                }
                out.data[(y * ow + xx) * c + ch] = fold(&window);
            }
        }
    }
    out
}

pub fn maxpool_i64(x: &IntTensor, a: usize, b: usize) -> IntTensor {
    pool_map(x, a, b, |w| *w.iter().max().unwrap())
}

/// Sum, public multiply by the quantized reciprocal, then rescale.
pub fn avgpool_i64(x: &IntTensor, a: usize, b: usize, mult: i64, s: u32) -> IntTensor {
    pool_map(x, a, b, |w| {
        let sum = w.iter().fold(0i64, |acc, &v| acc.wrapping_add(v));
        sum.wrapping_mul(mult) >> s
    })
}

pub fn argmax_i64(x: &IntTensor) -> IntTensor {
    let mut best = 0usize;
    for (i, &v) in x.data.iter().enumerate() {
        if v > x.data[best] {
            best = i;
        }
    }
    IntTensor::new(vec![1], vec![best as i64])
}

pub fn transpose2_i64(x: &IntTensor) -> IntTensor {
    let (m, n) = (x.dims[0], x.dims[1]);
    let mut out = IntTensor::zeros(vec![n, m]);
    for i in 0..m {
        for j in 0..n {
            out.data[j * m + i] = x.data[i * n + j];
        }
    }
    out
}

pub fn pad_i64(x: &IntTensor, spec: &[[usize; 2]]) -> IntTensor {
    let out_dims: Vec<usize> = x
        .dims
        .iter()
        .zip(spec)
        .map(|(&d, p)| d + p[0] + p[1])
        .collect();
    let mut out = IntTensor::zeros(out_dims.clone());
    let rank = x.dims.len();
    let in_strides = strides(&x.dims);
    let out_strides = strides(&out_dims);
    for flat in 0..x.numel() {
        let mut rem = flat;
        let mut off = 0usize;
        for d in 0..rank {
            let idx = rem / in_strides[d];
            rem %= in_strides[d];
            off += (idx + spec[d][0]) * out_strides[d];
        }
        out.data[off] = x.data[flat];
    }
    out
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

pub fn concat_last_i64(parts: &[&IntTensor]) -> IntTensor {
    let rank = parts[0].dims.len();
    let axis = rank - 1;
    let outer: usize = parts[0].dims[..axis].iter().product();
    let last: usize = parts.iter().map(|p| p.dims[axis]).sum();
    let mut dims = parts[0].dims.clone();
    dims[axis] = last;
    let mut data = Vec::with_capacity(outer * last);
    for row in 0..outer {
        for p in parts {
            let n = p.dims[axis];
            data.extend_from_slice(&p.data[row * n..(row + 1) * n]);
        }
    }
    IntTensor::new(dims, data)
}

/// Deterministic plaintext evaluation of a lowered model; the correctness
/// oracle the secure backend is tested against.
pub fn fixed_interpret(m: &FixedModel, input: &IntTensor) -> Result<IntTensor, CompileError> {
    let p = &m.graph;
    let mut env: HashMap<String, IntTensor> = HashMap::new();
    for (k, v) in &m.weights {
        env.insert(k.clone(), v.clone());
    }
    env.insert(p.input.clone(), input.clone());
    for st in &p.stmts {
        let get = |name: &String| -> Result<&IntTensor, CompileError> {
            env.get(name)
                .ok_or_else(|| CompileError::MissingValue(name.clone()))
        };
        let out = match st.op {
            OpKind::MatMul => matmul_i64(get(&st.args[0])?, get(&st.args[1])?),
            OpKind::MatAdd => {
                let (a, b) = (get(&st.args[0])?, get(&st.args[1])?);
                IntTensor::new(
                    a.dims.clone(),
                    a.data
                        .iter()
                        .zip(&b.data)
                        .map(|(&x, &y)| x.wrapping_add(y))
                        .collect(),
                )
            }
            OpKind::Conv => {
                let (x, w) = (get(&st.args[0])?, get(&st.args[1])?);
                if st.attrs.padding.as_deref() == Some("same") {
                    conv_valid_i64(&pad_same_i64(x, w.dims[0], w.dims[1]), w)
                } else {
                    conv_valid_i64(x, w)
                }
            }
            OpKind::Relu => {
                let x = get(&st.args[0])?;
                IntTensor::new(x.dims.clone(), x.data.iter().map(|&v| v.max(0)).collect())
            }
            OpKind::MaxPool => {
                let [a, b] = st.attrs.pool.unwrap();
                maxpool_i64(get(&st.args[0])?, a, b)
            }
            OpKind::AvgPool => {
                let [a, b] = st.attrs.pool.unwrap();
                avgpool_i64(
                    get(&st.args[0])?,
                    a,
                    b,
                    st.attrs.avg_mult.unwrap(),
                    st.attrs.scale.unwrap(),
                )
            }
            OpKind::ArgMax => argmax_i64(get(&st.args[0])?),
            OpKind::FusedBatchNorm => {
                let (x, bm, cm) = (get(&st.args[0])?, get(&st.args[1])?, get(&st.args[2])?);
                let c = *x.dims.last().unwrap();
                IntTensor::new(
                    x.dims.clone(),
                    x.data
                        .iter()
                        .enumerate()
                        .map(|(i, &v)| v.wrapping_mul(bm.data[i % c]).wrapping_add(cm.data[i % c]))
                        .collect(),
                )
            }
            OpKind::ScaleDown => {
                let s = st.attrs.scale.unwrap();
                let name = st.args[0].clone();
                let t = env
                    .get_mut(&name)
                    .ok_or(CompileError::MissingValue(name))?;
                for v in &mut t.data {
                    *v >>= s;
                }
                continue;
            }
            OpKind::Reshape => {
                let x = get(&st.args[0])?;
                let dims = p.dims(st.output.as_ref().unwrap())?.to_vec();
                IntTensor::new(dims, x.data.clone())
            }
            OpKind::Transpose => transpose2_i64(get(&st.args[0])?),
            OpKind::Pad => pad_i64(get(&st.args[0])?, st.attrs.pad.as_ref().unwrap()),
            OpKind::Concat => {
                let parts = st
                    .args
                    .iter()
                    .map(get)
                    .collect::<Result<Vec<_>, _>>()?;
                concat_last_i64(&parts)
            }
        };
        env.insert(st.output.clone().unwrap(), out);
    }
    env.remove(&p.output)
        .ok_or_else(|| CompileError::MissingValue(p.output.clone()))
}

/// Float32 reference evaluation of the high-level program.
pub fn float_interpret(m: &FloatModel, input: &FloatTensor) -> Result<FloatTensor, CompileError> {
    let p = &m.graph;
    let mut env: HashMap<String, FloatTensor> = HashMap::new();
    for (k, v) in &m.weights {
        env.insert(k.clone(), v.clone());
    }
    env.insert(p.input.clone(), input.clone());
    for nd in &p.nodes {
        let get = |name: &String| -> Result<&FloatTensor, CompileError> {
            env.get(name)
                .ok_or_else(|| CompileError::MissingValue(name.clone()))
        };
        let out = match nd.op {
            OpKind::MatMul => {
                let (a, b) = (get(&nd.inputs[0])?, get(&nd.inputs[1])?);
                let (mm, k, n) = (a.dims[0], a.dims[1], b.dims[1]);
                let mut data = vec![0f32; mm * n];
                for i in 0..mm {
                    for t in 0..k {
                        let av = a.data[i * k + t];
                        for j in 0..n {
                            data[i * n + j] += av * b.data[t * n + j];
                        }
                    }
                }
                FloatTensor::new(vec![mm, n], data)
            }
            OpKind::MatAdd => {
                let (a, b) = (get(&nd.inputs[0])?, get(&nd.inputs[1])?);
                FloatTensor::new(
                    a.dims.clone(),
                    a.data.iter().zip(&b.data).map(|(&x, &y)| x + y).collect(),
                )
            }
            OpKind::Conv => {
                let (x, w) = (get(&nd.inputs[0])?, get(&nd.inputs[1])?);
                let same = nd.attrs.padding.as_deref() == Some("same");
                conv_f32(x, w, same)
            }
            OpKind::Relu => {
                let x = get(&nd.inputs[0])?;
                FloatTensor::new(
                    x.dims.clone(),
                    x.data.iter().map(|&v| v.max(0.0)).collect(),
                )
            }
            OpKind::MaxPool | OpKind::AvgPool => {
                let [a, b] = nd.attrs.pool.unwrap();
                pool_f32(get(&nd.inputs[0])?, a, b, nd.op == OpKind::AvgPool)
            }
            OpKind::ArgMax => {
                let x = get(&nd.inputs[0])?;
                let mut best = 0usize;
                for (i, &v) in x.data.iter().enumerate() {
                    if v > x.data[best] {
                        best = i;
                    }
                }
                FloatTensor::new(vec![1], vec![best as f32])
            }
            OpKind::FusedBatchNorm => {
                let x = get(&nd.inputs[0])?;
                let (g, bta, mu, var) = (
                    get(&nd.inputs[1])?.clone(),
                    get(&nd.inputs[2])?.clone(),
                    get(&nd.inputs[3])?.clone(),
                    get(&nd.inputs[4])?.clone(),
                );
                let eps = nd.attrs.epsilon.unwrap_or(1e-5);
                let c = *x.dims.last().unwrap();
                FloatTensor::new(
                    x.dims.clone(),
                    x.data
                        .iter()
                        .enumerate()
                        .map(|(i, &v)| {
                            let ch = i % c;
                            g.data[ch] * (v - mu.data[ch]) / (var.data[ch] + eps).sqrt()
                                + bta.data[ch]
                        })
                        .collect(),
                )
            }
            OpKind::Reshape => {
                let x = get(&nd.inputs[0])?;
                FloatTensor::new(p.dims(&nd.output)?.to_vec(), x.data.clone())
            }
            OpKind::Transpose => {
                let x = get(&nd.inputs[0])?;
                let (mm, n) = (x.dims[0], x.dims[1]);
                let mut data = vec![0f32; mm * n];
                for i in 0..mm {
                    for j in 0..n {
                        data[j * mm + i] = x.data[i * n + j];
                    }
                }
                FloatTensor::new(vec![n, mm], data)
            }
            OpKind::Pad | OpKind::Concat => {
                return Err(CompileError::Unsupported {
                    node: nd.output.clone(),
                    msg: "float interpreter does not implement this library op".into(),
                })
            }
            OpKind::ScaleDown => unreachable!("no ScaleDown in HLIL"),
        };
        env.insert(nd.output.clone(), out);
    }
    env.remove(&p.output)
        .ok_or_else(|| CompileError::MissingValue(p.output.clone()))
}

fn conv_f32(x: &FloatTensor, w: &FloatTensor, same: bool) -> FloatTensor {
    let (f, g, ci, co) = (w.dims[0], w.dims[1], w.dims[2], w.dims[3]);
    let (xh, xw) = (x.dims[0], x.dims[1]);
    let (ph, pw) = if same { ((f - 1) / 2, (g - 1) / 2) } else { (0, 0) };
    let (qh, qw) = (xh + 2 * ph - f + 1, xw + 2 * pw - g + 1);
    let mut out = vec![0f32; qh * qw * co];
    for y in 0..qh {
        for xx in 0..qw {
            for o in 0..co {
                let mut acc = 0f32;
                for k in 0..f {
                    for l in 0..g {
                        let (iy, ix) = (y + k, xx + l);
                        if iy < ph || ix < pw || iy - ph >= xh || ix - pw >= xw {
                            continue;
                        }
                        for c in 0..ci {
                            acc += x.data[((iy - ph) * xw + (ix - pw)) * ci + c]
                                * w.data[((k * g + l) * ci + c) * co + o];
                        }
                    }
                }
                out[(y * qw + xx) * co + o] = acc;
            }
        }
    }
    FloatTensor::new(vec![qh, qw, co], out)
}

fn pool_f32(x: &FloatTensor, a: usize, b: usize, avg: bool) -> FloatTensor {
    let (h, w, c) = (x.dims[0], x.dims[1], x.dims[2]);
    let (oh, ow) = (h / a, w / b);
    let mut out = vec![0f32; oh * ow * c];
    for y in 0..oh {
        for xx in 0..ow {
            for ch in 0..c {
                let mut acc = if avg { 0.0 } else { f32::NEG_INFINITY };
                for dy in 0..a {
                    for dx in 0..b {
                        let v = x.data[((y * a + dy) * w + (xx * b + dx)) * c + ch];
                        acc = if avg { acc + v } else { acc.max(v) };
                    }
                }
                out[(y * ow + xx) * c + ch] = if avg { acc / (a * b) as f32 } else { acc };
            }
        }
    }
    FloatTensor::new(vec![oh, ow, c], out)
}
